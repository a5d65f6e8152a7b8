"""Exhaustive state-space exploration: which coverage points can fire at all.

Breadth-first search over distinct register states after reset, trying
every input frame value from each state. Used as an oracle for coverage
targets; only practical for designs with a few input bits and a small
state space.
"""
from __future__ import annotations

import copy
from collections import deque

from ..errors import SimTrap
from .simulator import RunConfig, new_state, step_cycle


def _clone(state):
    c = copy.copy(state)
    c.values = list(state.values)
    c.prev = dict(state.prev)
    c.fired = []
    c.nba = []
    c.failures = []
    return c


def reachable_points(nl, cfg: RunConfig = RunConfig(), max_states: int = 100_000,
                     max_input_bits: int = 16, stop_at=None) -> set:
    """Set of point ids fired by some input sequence (crash-truncated runs included).

    ``stop_at`` ends the search early once that many points are known.
    """
    width = sum(nl.signals[sid].width for sid in nl.inputs)
    if width > max_input_bits:
        raise ValueError(f"{width} input bits is too many to enumerate")
    names = [(nl.signals[sid].name, nl.signals[sid].width) for sid in nl.inputs]

    def frame_of(word):
        f = {}
        for name, w in names:
            f[name] = word & ((1 << w) - 1)
            word >>= w
        return f

    frames = [frame_of(x) for x in range(1 << width)]
    zero = frames[0]
    state = new_state(nl)
    hit = set()
    for _ in range(cfg.reset_cycles):
        step_cycle(nl, state, zero, reset_active=True)
    hit.update(state.fired)
    state.fired = []
    if state.failures:
        return hit
    inputs = set(nl.inputs)
    keep = [sid for sid in range(len(nl.signals)) if sid not in inputs]

    def key_of(st):
        # inputs are overwritten by the next frame, so they are not state
        v = st.values
        return tuple(v[sid] for sid in keep) + tuple(st.prev.values())

    seen = {key_of(state)}
    queue = deque([state])
    while queue and len(seen) < max_states:
        cur = queue.popleft()
        for f in frames:
            nxt = _clone(cur)
            try:
                step_cycle(nl, nxt, f)
            except SimTrap:
                hit.update(nxt.fired)
                continue
            hit.update(nxt.fired)
            if stop_at is not None and len(hit) >= stop_at:
                return hit
            if nxt.failures:
                continue
            key = key_of(nxt)
            if key not in seen:
                seen.add(key)
                queue.append(nxt)
    return hit
