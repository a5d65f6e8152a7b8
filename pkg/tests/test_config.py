"""Config file reader and validation."""
import pytest
from hypothesis import given, strategies as st

from hwfuzz.config import FuzzConfig, config_echo, config_from_dict, load_config, parse_config_text
from hwfuzz.errors import ConfigError


def test_hjson_subset():
    text = """
    # campaign
    {
      engine: fairfuzz      // inline comment
      duration_secs: 3600,
      /* block
         comment */
      "rng_seed": 0x2A
      out_dir: runs/ff one
      top: null
    }
    """
    assert parse_config_text(text) == {"engine": "fairfuzz", "duration_secs": 3600, "rng_seed": 42,
                                       "out_dir": "runs/ff one", "top": None}


def test_braceless_and_json():
    assert parse_config_text("engine: afl\nmax_execs: 10\n") == {"engine": "afl", "max_execs": 10}
    assert parse_config_text('{"max_execs": 10, "dict": "a.dict"}') == {"max_execs": 10, "dict": "a.dict"}


def test_load_and_defaults(tmp_path):
    p = tmp_path / "c.hjson"
    p.write_text("{max_execs: 100}")
    cfg = load_config(p)
    assert cfg == FuzzConfig(max_execs=100)
    assert "engine: afl" in config_echo(cfg)


@pytest.mark.parametrize("raw, category", [
    ({"max_execs": 1, "bogus": 1}, "unknown-key"),
    ({"engine": "honggfuzz", "max_execs": 1}, "invariant-violation"),
    ({}, "invariant-violation"),
    ({"max_execs": -1}, "invariant-violation"),
    ({"max_execs": 1, "workers": 0}, "invariant-violation"),
    ({"max_execs": "ten"}, "invariant-violation"),
    ({"max_execs": True}, "invariant-violation"),
    ({"duration_secs": "x"}, "invariant-violation"),
])
def test_invalid(raw, category, monkeypatch):
    monkeypatch.delenv("HWFUZZ_SEED", raising=False)
    with pytest.raises(ConfigError) as ei:
        config_from_dict(raw)
    assert ei.value.category == category


@pytest.mark.parametrize("text", ["{engine: afl", "{a: [1, 2}", '{a: "open}', "{a 1}"])
def test_malformed(text):
    with pytest.raises(ConfigError) as ei:
        parse_config_text(text)
    assert ei.value.category == "parse"


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope")


def test_env_seed_override(monkeypatch):
    monkeypatch.setenv("HWFUZZ_SEED", "99")
    assert config_from_dict({"max_execs": 1, "rng_seed": 5}).rng_seed == 99
    monkeypatch.setenv("HWFUZZ_SEED", "abc")
    with pytest.raises(ConfigError):
        config_from_dict({"max_execs": 1})


keys = st.sampled_from(["engine", "out_dir", "top"])
words = st.from_regex(r"[a-z][a-z0-9_]{0,8}", fullmatch=True).filter(lambda w: w not in ("null", "true", "false"))


@given(st.dictionaries(keys, words, max_size=3), st.integers(0, 10**6))
def test_bare_words_roundtrip(d, n):
    text = "\n".join(f"{k}: {v}" for k, v in d.items()) + f"\nmax_execs: {n}\n"
    assert parse_config_text(text) == {**d, "max_execs": n}
