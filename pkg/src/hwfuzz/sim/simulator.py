"""Cycle-based two-phase simulation of an elaborated netlist.

One cycle is two phases. In the low phase the clock is driven to 0 and the
cycle's inputs (reset level and stimulus frame) are applied; in the high
phase the clock rises. Each phase settles continuous assigns, runs the
processes whose sensitivity saw an edge, commits the nonblocking queue and
settles again. Edges are found by comparing each edge-sensitive signal
with its value at the previous check. Assertions clocked by an edge seen
during the cycle are evaluated last, on post-commit values.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..errors import SimTrap


@dataclass(frozen=True)
class RunConfig:
    reset_cycles: int = 2
    max_cycles: int = 256
    trace: bool = False

    def __post_init__(self):
        if self.reset_cycles < 1 or self.max_cycles < 1:
            raise ValueError("reset_cycles and max_cycles must be >= 1")


@dataclass
class SimState:
    values: list
    prev: dict  # sid -> value at the last edge check
    cycle: int = 0
    nba: list = field(default_factory=list)
    fired: list = field(default_factory=list)
    trace: Optional[list] = None
    failures: list = field(default_factory=list)


@dataclass(frozen=True)
class CrashInfo:
    kind: str  # "assertion" | "div-by-zero" | "oob-select"
    cycle: int
    message: str
    assertion: Optional[int] = None
    span: Optional[tuple] = None

    @property
    def ident(self):
        """Assertion id, or the trap kind."""
        return self.assertion if self.kind == "assertion" else self.kind


@dataclass
class RunResult:
    outcome: str  # "completed" | "crash"
    crash_info: Optional[CrashInfo]
    coverage: object
    cycles_run: int
    outputs: dict
    fired: list
    trace: Optional[list] = None

    @property
    def crashed(self) -> bool:
        return self.outcome == "crash"

    @property
    def last_point(self) -> int:
        return self.fired[-1] if self.fired else -1


def _edge_signals(nl):
    sids = set()
    for proc in nl.processes:
        sids.update(sid for _, sid in proc.sensitivity)
    for a in nl.assertions:
        sids.add(a.clock)
    sids.add(nl.clock)
    return sorted(sids)


def new_state(nl, trace=False) -> SimState:
    values = [s.init for s in nl.signals]
    prev = {sid: values[sid] & 1 for sid in _edge_signals(nl)}
    return SimState(values, prev, trace=[] if trace else None)


def _detect(state, events):
    v = state.values
    prev = state.prev
    for sid, old in prev.items():
        new = v[sid] & 1
        if new != old:
            events.add(("posedge" if new else "negedge", sid))
            prev[sid] = new


def _commit(model, state):
    v = state.values
    widths = model.widths
    for sid, off, w, val in state.nba:
        if off == 0 and w == widths[sid]:
            v[sid] = val
        else:
            v[sid] = (v[sid] & ~(((1 << w) - 1) << off)) | (val << off)
    state.nba.clear()


def _phase(nl, model, state, events_all):
    events = set()
    model.settle(state.values)
    _detect(state, events)
    if events:
        v, nba, fired = state.values, state.nba, state.fired
        for proc, fn in zip(nl.processes, model.procs):
            for ev in proc.sensitivity:
                if ev in events:
                    fn(v, nba, fired)
                    break
        _commit(model, state)
        model.settle(v)
        events_all |= events


def _cycle(nl, state, drive) -> list:
    model = nl.model
    v = state.values
    start = len(state.fired)
    events = set()
    try:
        v[nl.clock] = 0
        drive(v)
        _phase(nl, model, state, events)
        v[nl.clock] = 1
        _phase(nl, model, state, events)
        state.fired.extend(p for p in _assign_points(nl))
        state.failures = eval_assertions(nl, state, events)
    except SimTrap as trap:
        trap.cycle = state.cycle
        state.nba.clear()
        raise
    if state.trace is not None:
        state.trace.append(tuple(v))
    state.cycle += 1
    return state.fired[start:]


def _assign_points(nl):
    pts = nl.__dict__.get("_assign_points")
    if pts is None:
        pts = tuple(ca.point for ca in nl.cont_assigns if ca.point >= 0)
        object.__setattr__(nl, "_assign_points", pts)
    return pts


def step_cycle(nl, state, frame, reset_active=False) -> list:
    """Run one clock cycle. ``frame`` maps data-input names to values.

    Returns the coverage points fired during the cycle; raises SimTrap.
    Assertion failures are left in ``state.failures``.
    """
    sigs = nl.signals
    assigns = [(sid, frame[sigs[sid].name] & ((1 << sigs[sid].width) - 1)) for sid in nl.inputs]
    reset_sid = nl.reset
    reset_val = None
    if reset_sid is not None:
        active = nl.spec.reset_active_value
        reset_val = active if reset_active else 1 - active

    def drive(v):
        if reset_sid is not None:
            v[reset_sid] = reset_val
        for sid, val in assigns:
            v[sid] = val

    return _cycle(nl, state, drive)


def eval_assertions(nl, state, events=None) -> list:
    """Failures as ``(assertion id, cycle)`` for assertions whose clock fired."""
    out = []
    v = state.values
    for a, fn in zip(nl.assertions, nl.model.asserts):
        if events is not None and (a.clock_edge, a.clock) not in events:
            continue
        if fn(v):
            out.append((a.id, state.cycle))
    return out


def _outputs(nl, state):
    if nl.spec is None:
        return {}
    return {p.name: state.values[nl.signal(p.name).sid] for p in nl.spec.outputs}


def _finish(nl, state, crash, coverage_fn) -> RunResult:
    from ..coverage import edges_from_trace
    cov = edges_from_trace(state.fired, nl.point_kinds)
    return RunResult("crash" if crash else "completed", crash, cov, state.cycle,
                     _outputs(nl, state), state.fired, state.trace)


def _run(nl, state, frames_iter, max_cycles) -> Optional[CrashInfo]:
    for frame, reset_active in frames_iter:
        if state.cycle >= max_cycles:
            break
        try:
            if callable(frame):
                _cycle(nl, state, frame)
            else:
                step_cycle(nl, state, frame, reset_active)
        except SimTrap as trap:
            return CrashInfo(trap.category, trap.cycle, trap.message, None, trap.span)
        if state.failures:
            aid, cyc = state.failures[0]
            a = nl.assertions[aid]
            label = f" '{a.label}'" if a.label else ""
            return CrashInfo("assertion", cyc, f"assertion {aid}{label} failed at cycle {cyc}", aid, a.span)
    return None


def run_testcase(nl, tc, cfg: RunConfig = RunConfig()) -> RunResult:
    """Reset for ``cfg.reset_cycles`` then apply one frame per cycle.

    ``tc`` is a TestCase, raw bytes, or a list of frames.
    """
    from ..stimulus import TestCase, decode
    if isinstance(tc, TestCase):
        frames = tc.frames
    elif isinstance(tc, (bytes, bytearray)):
        frames = decode(bytes(tc), nl.spec)
    else:
        frames = list(tc)
    state = new_state(nl, trace=cfg.trace)
    zero = {nl.signals[sid].name: 0 for sid in nl.inputs}

    def schedule():
        for _ in range(cfg.reset_cycles):
            yield zero, True
        for f in frames:
            yield f, False

    crash = _run(nl, state, schedule(), cfg.max_cycles)
    return _finish(nl, state, crash, None)


def run_testbench(nl, max_cycles=100_000, trace=False) -> RunResult:
    """Simulate a self-driving testbench until ``$finish`` or ``max_cycles``."""
    model = nl.model
    state = new_state(nl, trace=trace)

    def schedule():
        for seg, fin in zip(model.segments, model.segment_finish):
            if fin:
                seg(state.values)  # statements ahead of $finish still execute
                return
            yield seg, False
        while True:
            yield (lambda v: None), False

    crash = _run(nl, state, schedule(), max_cycles)
    return _finish(nl, state, crash, None)
