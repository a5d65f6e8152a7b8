"""The fuzzing loop: select, mutate, execute, triage, repeat.

Output directory layout::

    corpus/id_<seq6>_<origin>    accepted inputs (origin: seed, det, havoc, splice)
    crashes/crash_<n6>           unique crashing inputs
    crashes/crash_<n6>.meta      kind, assertion or trap, cycle, dedup key
    stats.csv                    coverage samples over time
    coverage.bin                 final coverage snapshot
    campaign.meta                rng seed, engine, config echo

With one worker the run is a pure function of (netlist, seeds, config):
wall-clock time only decides when a duration-bounded campaign stops.
"""
from __future__ import annotations

import shutil
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..config import FuzzConfig, config_echo
from ..coverage import GlobalCoverage, dump_snapshot, is_interesting, weighted_sum
from ..errors import ConfigError
from ..report import emit_csv, record_sample
from ..sim.simulator import RunConfig, run_testcase
from ..stimulus import frame_size
from .engines import Corpus, CorpusEntry, assign_energy, fairfuzz_compute_mask, select_next
from .mutate import deterministic, havoc
from .rng import SplitMix64

HEARTBEAT = 1000
DET_MAX_LEN = 16  # longer entries go straight to havoc
SPLICE_ODDS = 16  # one havoc candidate in this many is a splice


@dataclass(frozen=True)
class CrashRecord:
    data: bytes
    kind: str  # "assertion" | "div-by-zero" | "oob-select"
    ident: object  # assertion id, or the trap kind
    cycle: int
    last_point: int
    message: str = ""

    @property
    def key(self) -> tuple:
        return (self.ident, self.last_point)

    @property
    def key_str(self) -> str:
        return f"{self.ident}:{self.last_point}"

    def meta_text(self) -> str:
        lines = [f"kind: {self.kind}"]
        if self.kind == "assertion":
            lines.append(f"assertion: {self.ident}")
        lines += [f"cycle: {self.cycle}", f"last_point: {self.last_point}",
                  f"dedup_key: {self.key_str}", f"message: {self.message}"]
        return "\n".join(lines) + "\n"


def crash_key(result) -> tuple:
    return (result.crash_info.ident, result.last_point)


def parse_crash_meta(text: str) -> dict:
    out = {}
    for line in text.splitlines():
        k, _, v = line.partition(":")
        out[k.strip()] = v.strip()
    return out


class CrashSet:
    """Unique crashes by dedup key, optionally mirrored to a directory."""

    def __init__(self, out_dir: Optional[Path] = None):
        self.records: list[CrashRecord] = []
        self.keys: dict = {}
        self.total = 0
        self.out_dir = out_dir

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def triage_crash(result, crashes: CrashSet, data: bytes = b"") -> str:
    """Record a crashing run; returns "new-unique" or "duplicate"."""
    info = result.crash_info
    crashes.total += 1
    key = crash_key(result)
    if key in crashes.keys:
        return "duplicate"
    rec = CrashRecord(bytes(data), info.kind, info.ident, info.cycle, result.last_point, info.message)
    crashes.keys[key] = len(crashes.records)
    crashes.records.append(rec)
    if crashes.out_dir is not None:
        n = len(crashes.records) - 1
        (crashes.out_dir / f"crash_{n:06d}").write_bytes(rec.data)
        (crashes.out_dir / f"crash_{n:06d}.meta").write_text(rec.meta_text(), encoding="utf-8")
    return "new-unique"


@dataclass
class CampaignStats:
    engine: str
    rng_seed: int
    start_time: float = 0.0  # epoch seconds of the first execution
    execs: int = 0
    corpus_size: int = 0
    unique_crashes: int = 0
    total_crashes: int = 0
    wall_ms: int = 0
    stmt_pct: float = 0.0
    branch_pct: float = 0.0
    samples: list = field(default_factory=list)

    @property
    def execs_per_sec(self) -> float:
        return 1000.0 * self.execs / self.wall_ms if self.wall_ms else 0.0


@dataclass
class CampaignResult:
    stats: CampaignStats
    corpus: Corpus
    crashes: CrashSet
    coverage: GlobalCoverage
    out_dir: Optional[Path] = None


class _Stop(Exception):
    pass


class Campaign:
    def __init__(self, nl, cfg: FuzzConfig, seeds=None, tokens=(), out_dir=None, stop_when=None):
        self.nl = nl
        self.stop_when = stop_when  # optional predicate on the global coverage, checked on growth
        self.cfg = cfg.validate()
        self.engine = cfg.engine
        self.run_cfg = RunConfig(cfg.reset_cycles, cfg.max_cycles)
        fsz = frame_size(nl.spec)
        self.seeds = [bytes(s) for s in seeds] if seeds else [bytes(fsz * 4)]
        self.max_len = max(fsz * cfg.max_cycles, max(len(s) for s in self.seeds))
        self.tokens = tuple(bytes(t) for t in tokens)
        self.out_dir = Path(out_dir) if out_dir is not None else None
        self.glob = GlobalCoverage.for_netlist(nl)
        self.corpus = Corpus()
        self.stats = CampaignStats(cfg.engine, cfg.rng_seed)
        self.crashes = CrashSet()
        self.lock = threading.RLock()
        self._t0 = None
        self._stopped = False

    # -- output --------------------------------------------------------------

    def _prepare_dir(self):
        d = self.out_dir
        if d is None:
            return
        if d.exists() and any(d.iterdir()):
            if not (d / "campaign.meta").exists():
                raise ConfigError("invariant-violation",
                                  f"output directory '{d}' is not empty and holds no campaign")
            for sub in ("corpus", "crashes"):
                shutil.rmtree(d / sub, ignore_errors=True)
            for f in ("stats.csv", "coverage.bin", "campaign.meta"):
                (d / f).unlink(missing_ok=True)
        (d / "corpus").mkdir(parents=True, exist_ok=True)
        (d / "crashes").mkdir(exist_ok=True)
        self.crashes.out_dir = d / "crashes"

    def _write_meta(self):
        d = self.out_dir
        if d is None:
            return
        text = (f"rng_seed: {self.cfg.rng_seed}\nengine: {self.engine}\n"
                f"top: {self.nl.top}\nnetlist: {self.nl.hash.hex()}\n"
                f"--- config\n{config_echo(self.cfg)}\n")
        (d / "campaign.meta").write_text(text, encoding="utf-8")

    def _finish_dir(self):
        d = self.out_dir
        if d is None:
            return
        emit_csv(self.stats.samples, d / "stats.csv")
        (d / "coverage.bin").write_bytes(dump_snapshot(self.glob))

    # -- execution -----------------------------------------------------------

    def _elapsed_ms(self) -> int:
        return 0 if self._t0 is None else int((time.monotonic() - self._t0) * 1000)

    def _budget_left(self) -> bool:
        if self._stopped:
            return False
        cfg = self.cfg
        if cfg.max_execs is not None and self.stats.execs >= cfg.max_execs:
            return False
        if cfg.duration_secs is not None and self._t0 is not None \
                and time.monotonic() - self._t0 >= cfg.duration_secs:
            return False
        return True

    def _sample(self):
        self.stats.wall_ms = self._elapsed_ms()
        self.stats.corpus_size = len(self.corpus)
        self.stats.unique_crashes = len(self.crashes)
        record_sample(self.stats, self.glob, self.nl)

    def _add_entry(self, data, cov, origin, parent, cycles) -> CorpusEntry:
        ent = CorpusEntry(len(self.corpus), data, cov, origin, exec_cost=max(1, cycles),
                          depth=parent.depth + 1 if parent else 0,
                          weighted=weighted_sum(cov.hits, self.glob.weights) if cov else 0)
        self.corpus.add(ent)
        if self.out_dir is not None:
            (self.out_dir / "corpus" / ent.name).write_bytes(data)
        return ent

    def execute(self, data: bytes, origin: str, parent=None, force=False):
        """Run one candidate and triage it. Raises _Stop once the budget is gone."""
        with self.lock:
            if not self._budget_left():
                raise _Stop
            if self._t0 is None:
                self._t0 = time.monotonic()
                self.stats.start_time = time.time()
            self.stats.execs += 1  # reserve the slot so workers never overshoot
        res = run_testcase(self.nl, data, self.run_cfg)
        with self.lock:
            cov = res.coverage
            if self.engine == "aflpp":
                self.corpus.note_path(cov)
            verdict = is_interesting(cov, self.glob, self.engine)
            if res.crashed:
                if verdict != "none":
                    self.glob.update(cov, accepted=False)
                    if self.stop_when is not None and self.stop_when(self.glob):
                        self._stopped = True
                if force:
                    # a crashing seed still has to seed the queue, or nothing gets fuzzed
                    self._add_entry(data, cov, origin, parent, res.cycles_run)
                if triage_crash(res, self.crashes, data) == "new-unique":
                    self._sample()
            elif verdict != "none" or force:
                self._add_entry(data, cov, origin, parent, res.cycles_run)
                self.glob.update(cov, accepted=True)
                self._sample()
                if self.stop_when is not None and self.stop_when(self.glob):
                    self._stopped = True
            if self.stats.execs % HEARTBEAT == 0:
                self._sample()
        return res

    def _fuzz_one(self, rng: SplitMix64):
        with self.lock:
            entry, target = select_next(self.corpus, self.engine, self.glob, rng)
            # aflpp follows AFL++'s default of skipping the deterministic stage
            run_det = self.engine != "aflpp" and not entry.det_done and len(entry.data) <= DET_MAX_LEN
            entry.det_done = True
        mask = None
        if self.engine == "fairfuzz" and target is not None:
            mask = entry.branch_masks.get(target)
            if mask is None:
                mask = fairfuzz_compute_mask(entry, target,
                                             lambda d: self.execute(d, "det", entry))
                entry.branch_masks[target] = mask
            if not mask:
                mask = None
        if run_det:
            for m in deterministic(entry.data, mask):
                if m != entry.data:
                    self.execute(m, "det", entry)
        with self.lock:
            energy = assign_energy(entry, self.engine, self.glob, self.corpus)
        for _ in range(energy):
            other = None
            with self.lock:
                n = len(self.corpus)
                if mask is None and n > 1 and rng.below(SPLICE_ODDS) == 0:
                    pick = rng.below(n - 1)
                    other = self.corpus.entries[pick + (pick >= entry.id)].data
            m = havoc(entry.data, rng, self.tokens, mask, self.max_len, other)
            self.execute(m, "splice" if other is not None else "havoc", entry)
        entry.n_fuzzed += 1

    def _worker(self, rng: SplitMix64):
        try:
            while True:
                self._fuzz_one(rng)
        except _Stop:
            pass

    def run(self) -> CampaignResult:
        self._prepare_dir()
        self._write_meta()
        try:
            if self.cfg.max_execs == 0:
                for s in self.seeds:
                    self._add_entry(s, None, "seed", None, 0)
            else:
                for s in self.seeds:
                    self.execute(s, "seed", force=not self.corpus.entries)
            if self.corpus.entries and self.cfg.max_execs != 0:
                rng = SplitMix64(self.cfg.rng_seed)
                if self.cfg.workers == 1:
                    self._worker(rng)
                else:
                    threads = [threading.Thread(target=self._worker, args=(rng.fork(i + 1),))
                               for i in range(self.cfg.workers)]
                    for t in threads:
                        t.start()
                    for t in threads:
                        t.join()
        except _Stop:
            pass
        self._stopped = True
        self._sample()
        s = self.stats
        s.stmt_pct, s.branch_pct = s.samples[-1].stmt_pct, s.samples[-1].branch_pct
        s.total_crashes = self.crashes.total
        self._finish_dir()
        return CampaignResult(s, self.corpus, self.crashes, self.glob, self.out_dir)


def run_campaign(nl, seeds, cfg: FuzzConfig, out_dir=None, tokens=(), stop_when=None) -> CampaignResult:
    """Fuzz ``nl`` under ``cfg``; writes the output layout when ``out_dir`` is given.

    ``stop_when(glob)`` ends the campaign early once it returns true.
    """
    return Campaign(nl, cfg, seeds, tokens, out_dir, stop_when).run()


def load_seeds(corpus_dir) -> list:
    return [p.read_bytes() for p in sorted(Path(corpus_dir).iterdir()) if p.is_file()]


def load_dict(path) -> list:
    """Tokens from an AFL-style dictionary: ``name="value"`` or ``"value"`` per line."""
    import ast
    tokens = []
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        q = line.find('"')
        if q < 0 or not line.endswith('"'):
            raise ConfigError("parse", f"bad dictionary line: {raw!r}")
        body = line[q:]
        try:
            val = ast.literal_eval("b" + body)
        except (ValueError, SyntaxError):
            raise ConfigError("parse", f"bad dictionary line: {raw!r}") from None
        if val:
            tokens.append(val)
    return tokens
