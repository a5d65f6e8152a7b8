"""Bundled benchmark designs."""
from __future__ import annotations

from pathlib import Path

DESIGN_DIR = Path(__file__).resolve().parent
DESIGNS = ("key_store_debug", "counter8", "fsm_lock", "alu8")


def design_path(name: str) -> Path:
    if name not in DESIGNS:
        raise KeyError(f"no bundled design '{name}'")
    return DESIGN_DIR / f"{name}.v"


def design_source(name: str) -> str:
    return design_path(name).read_text(encoding="utf-8")


def load_design(name: str):
    """Parse, extract the spec and elaborate a bundled design."""
    from ..rtl import extract_spec, parse
    from ..sim import elaborate
    mods = parse(design_source(name))
    return elaborate(mods, extract_spec(mods, name))
