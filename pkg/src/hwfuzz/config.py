"""Campaign configuration: dataclass plus a reader for a small hjson-like format.

Accepted syntax is JSON extended with ``#``, ``//`` and ``/* */`` comments,
unquoted keys, bare-word values (ending at ``,`` ``}`` ``]`` or end of
line), optional commas and optional outer braces::

    # one hour on the example design
    {engine: fairfuzz, duration_secs: 3600}
"""
from __future__ import annotations

import json
import os
import re
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Optional

from .errors import ConfigError

ENGINES = ("afl", "aflpp", "fairfuzz", "perffuzz", "tortoise")


@dataclass
class FuzzConfig:
    engine: str = "afl"
    duration_secs: Optional[float] = None
    max_execs: Optional[int] = None
    rng_seed: int = 1
    reset_cycles: int = 2
    max_cycles: int = 256
    workers: int = 1
    out_dir: str = "out"
    corpus_dir: Optional[str] = None
    dict: Optional[str] = None
    top: Optional[str] = None
    clock: Optional[str] = None
    reset: Optional[str] = None

    def validate(self) -> "FuzzConfig":
        if self.engine not in ENGINES:
            raise ConfigError("invariant-violation",
                              f"unknown engine '{self.engine}' (expected one of {', '.join(ENGINES)})")
        if self.duration_secs is None and self.max_execs is None:
            raise ConfigError("invariant-violation", "one of duration_secs or max_execs must be set")
        if self.duration_secs is not None and self.duration_secs < 0:
            raise ConfigError("invariant-violation", "duration_secs must be >= 0")
        if self.max_execs is not None and self.max_execs < 0:
            raise ConfigError("invariant-violation", "max_execs must be >= 0")
        for key in ("reset_cycles", "max_cycles", "workers"):
            if getattr(self, key) < 1:
                raise ConfigError("invariant-violation", f"{key} must be >= 1")
        if not 0 <= self.rng_seed < 1 << 64:
            raise ConfigError("invariant-violation", "rng_seed must fit in 64 bits")
        return self


_TYPES = {"engine": str, "duration_secs": float, "max_execs": int, "rng_seed": int,
          "reset_cycles": int, "max_cycles": int, "workers": int, "out_dir": str,
          "corpus_dir": str, "dict": str, "top": str, "clock": str, "reset": str}


class _Reader:
    def __init__(self, text: str):
        self.s = text
        self.i = 0

    def fail(self, msg):
        line = self.s.count("\n", 0, self.i) + 1
        col = self.i - (self.s.rfind("\n", 0, self.i) + 1) + 1
        raise ConfigError("parse", f"{msg} at line {line}, column {col}", line, col)

    def skip(self, newlines=True):
        s = self.s
        while self.i < len(s):
            c = s[self.i]
            if c in " \t\r" or (newlines and c == "\n"):
                self.i += 1
            elif c == "#" or s.startswith("//", self.i):
                while self.i < len(s) and s[self.i] != "\n":
                    self.i += 1
            elif s.startswith("/*", self.i):
                end = s.find("*/", self.i + 2)
                if end < 0:
                    self.fail("unterminated comment")
                self.i = end + 2
            else:
                break

    def peek(self):
        return self.s[self.i] if self.i < len(self.s) else ""

    def document(self):
        self.skip()
        if self.peek() == "{":
            out = self.obj()
        else:
            out = self.members(None)
        self.skip()
        if self.i != len(self.s):
            self.fail("trailing content")
        return out

    def obj(self):
        self.i += 1
        out = self.members("}")
        self.i += 1
        return out

    def members(self, close):
        out = {}
        while True:
            self.skip()
            c = self.peek()
            if c == ",":
                self.i += 1
                continue
            if (close and c == close) or (not close and not c):
                return out
            if not c:
                self.fail("unexpected end of input")
            key = self.key()
            self.skip()
            if self.peek() != ":":
                self.fail(f"expected ':' after key '{key}'")
            self.i += 1
            self.skip()
            if key in out:
                self.fail(f"duplicate key '{key}'")
            out[key] = self.value()

    def key(self):
        if self.peek() in "\"'":
            return self.string()
        m = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*").match(self.s, self.i)
        if not m:
            self.fail("expected a key")
        self.i = m.end()
        return m.group()

    def string(self):
        q = self.peek()
        j = self.i + 1
        buf = []
        while True:
            if j >= len(self.s) or self.s[j] == "\n":
                self.fail("unterminated string")
            c = self.s[j]
            if c == "\\":
                j += 1
                buf.append("\\" + self.s[j])
            elif c == q:
                break
            else:
                buf.append('\\"' if c == '"' else c)
            j += 1
        self.i = j + 1
        try:
            return json.loads('"' + "".join(buf) + '"')
        except json.JSONDecodeError:
            self.fail("bad escape in string")

    def value(self):
        c = self.peek()
        if c == "{":
            return self.obj()
        if c == "[":
            self.i += 1
            items = []
            while True:
                self.skip()
                if self.peek() == ",":
                    self.i += 1
                    continue
                if self.peek() == "]":
                    self.i += 1
                    return items
                if not self.peek():
                    self.fail("unterminated array")
                items.append(self.value())
        if c in "\"'":
            return self.string()
        m = re.compile(r"[^,}\]\n#]*").match(self.s, self.i)
        raw = m.group()
        cut = raw.find("//")
        if cut >= 0:
            raw = raw[:cut]
        cut = raw.find("/*")
        if cut >= 0:
            raw = raw[:cut]
        self.i += len(raw)
        word = raw.strip()
        if not word:
            self.fail("expected a value")
        if word in ("true", "false", "null"):
            return json.loads(word)
        try:
            return json.loads(word)
        except json.JSONDecodeError:
            pass
        if re.fullmatch(r"0[xX][0-9a-fA-F_]+", word):
            return int(word.replace("_", ""), 16)
        return word


def parse_config_text(text: str) -> dict:
    return _Reader(text).document()


def config_from_dict(raw: dict) -> FuzzConfig:
    if not isinstance(raw, dict):
        raise ConfigError("parse", "config must be an object")
    kwargs = {}
    for key, val in raw.items():
        if key not in _TYPES:
            raise ConfigError("unknown-key", f"unknown config key '{key}'")
        want = _TYPES[key]
        if val is None:
            kwargs[key] = None
            continue
        if want is int and not (isinstance(val, int) and not isinstance(val, bool)):
            raise ConfigError("invariant-violation", f"'{key}' must be an integer")
        if want is float:
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError("invariant-violation", f"'{key}' must be a number")
            val = float(val)
        if want is str and not isinstance(val, str):
            val = str(val)
        kwargs[key] = val
    cfg = FuzzConfig(**kwargs)
    env = os.environ.get("HWFUZZ_SEED")
    if env is not None:
        try:
            cfg.rng_seed = int(env, 0)
        except ValueError:
            raise ConfigError("invariant-violation", f"HWFUZZ_SEED is not an integer: {env!r}") from None
    return cfg.validate()


def load_config(path) -> FuzzConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("parse", f"cannot read config: {exc}") from None
    return config_from_dict(parse_config_text(text))


def config_echo(cfg: FuzzConfig) -> str:
    return "\n".join(f"{f.name}: {getattr(cfg, f.name)}" for f in fields(cfg))
