"""Byte string <-> per-cycle input frames.

A frame is F = ceil(W/8) bytes, W being the summed width of the data
inputs (clock and reset excluded). The frame's bytes form a little-endian
integer whose bits are handed to the ports in declaration order, each port
taking its bits LSB-first. Bits past W and a trailing partial frame are
dropped, so flipping byte i only ever changes frame i // F.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence


class StimulusFrame(dict):
    """Input port name -> value for one cycle."""

    @property
    def assignments(self) -> dict:
        return dict(self)


@lru_cache(maxsize=64)
def _layout(spec) -> tuple[int, tuple]:
    fields = []
    off = 0
    for p in spec.data_inputs:
        fields.append((p.name, off, (1 << p.width) - 1))
        off += p.width
    return max(1, (off + 7) // 8), tuple(fields)


def frame_size(spec) -> int:
    return _layout(spec)[0]


def decode(data: bytes, spec) -> list:
    fsz, fields = _layout(spec)
    n = len(data) // fsz
    out = []
    if fsz == 1 and len(fields) == 1:
        name, _, mask = fields[0]
        return [StimulusFrame({name: b & mask}) for b in data]
    for i in range(n):
        word = int.from_bytes(data[i * fsz:(i + 1) * fsz], "little")
        out.append(StimulusFrame({name: (word >> off) & mask for name, off, mask in fields}))
    return out


def encode(frames: Iterable, spec) -> bytes:
    fsz, fields = _layout(spec)
    out = bytearray()
    for f in frames:
        word = 0
        for name, off, mask in fields:
            val = f[name]
            if val < 0 or val > mask:
                raise ValueError(f"value {val} does not fit port '{name}'")
            word |= val << off
        out += word.to_bytes(fsz, "little")
    return bytes(out)


@dataclass(frozen=True)
class TestCase:
    """A raw fuzzer input together with the spec that gives it meaning."""
    data: bytes
    spec: object = field(compare=False, repr=False)

    __test__ = False  # keep pytest from collecting this class

    @property
    def frames(self) -> list:
        return decode(self.data, self.spec)

    def __bytes__(self) -> bytes:
        return self.data

    def __len__(self) -> int:
        return len(self.data)
