"""Corpus bookkeeping and the five engine strategies.

Engines differ in three places only: which entry is fuzzed next
(``select_next``; aflpp samples the queue by AFL++'s weights when given an rng), how many havoc iterations it gets (``assign_energy``),
and, for fairfuzz, which byte positions havoc may touch
(``fairfuzz_compute_mask``). Interestingness lives in ``coverage``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from ..coverage import CoverageMap, GlobalCoverage, weighted_sum

ENGINES = ("afl", "aflpp", "fairfuzz", "perffuzz", "tortoise")
BRANCH_KINDS = ("branch-true", "branch-false", "case-item", "case-default")
ENERGY_MIN, ENERGY_MAX, ENERGY_BASE = 16, 1600, 256
FAST_FACTOR_MAX = 32


@dataclass
class CorpusEntry:
    id: int
    data: bytes
    coverage: Optional[CoverageMap]
    origin: str = "seed"
    exec_cost: int = 1  # simulated cycles: a deterministic stand-in for exec time
    depth: int = 0
    n_fuzzed: int = 0
    path_frequency: int = 1
    branch_masks: dict = field(default_factory=dict)
    favored: bool = False
    det_done: bool = False
    weighted: int = 0

    @property
    def name(self) -> str:
        return f"id_{self.id:06d}_{self.origin}"

    @property
    def n_edges(self) -> int:
        return len(self.coverage.edges) if self.coverage else 0

    @property
    def cost(self) -> int:
        return self.exec_cost * max(1, len(self.data))


class Corpus:
    """Entries in insertion order plus AFL's per-edge champion table."""

    def __init__(self):
        self.entries: list[CorpusEntry] = []
        self.top_rated: dict[int, CorpusEntry] = {}
        self.path_freq: dict = {}
        self.cursor = -1
        self._dirty = False

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def add(self, entry: CorpusEntry) -> CorpusEntry:
        self.entries.append(entry)
        if entry.coverage is not None:
            for e in entry.coverage.edges:
                cur = self.top_rated.get(e)
                if cur is None or entry.cost < cur.cost:
                    self.top_rated[e] = entry
                    self._dirty = True
        return entry

    @staticmethod
    def path_key(cov: CoverageMap):
        # a path is the bucketed edge map, as AFL++ hashes the classified trace
        return frozenset(cov.edges.items())

    def note_path(self, cov: CoverageMap) -> int:
        key = self.path_key(cov)
        n = self.path_freq.get(key, 0) + 1
        self.path_freq[key] = n
        return n

    def path_frequency(self, entry: CorpusEntry) -> int:
        if entry.coverage is None:
            return 1
        return max(1, self.path_freq.get(self.path_key(entry.coverage), 1))

    def cull(self) -> None:
        """Greedy favored set: champions that together cover every known edge."""
        if not self._dirty:
            return
        for ent in self.entries:
            ent.favored = False
        covered = set()
        for e in sorted(self.top_rated):
            if e in covered:
                continue
            champ = self.top_rated[e]
            champ.favored = True
            covered.update(champ.coverage.edges)
        self._dirty = False


def _round_robin(corpus: Corpus, favored, rng):
    """Next entry after the cursor, skipping non-favored ones probabilistically.

    Without an rng every non-favored entry is skipped while favored ones exist.
    """
    n = len(corpus.entries)
    any_favored = any(favored(e) for e in corpus.entries)
    for _ in range(8 * n + 1):
        corpus.cursor = (corpus.cursor + 1) % n
        ent = corpus.entries[corpus.cursor]
        if not any_favored or favored(ent):
            return ent
        if rng is None:
            continue
        skip = 95 if ent.n_fuzzed else 75
        if rng.below(100) >= skip:
            return ent
    return corpus.entries[corpus.cursor]


def rare_branches(corpus_hits, kinds) -> list:
    """Branch points whose corpus hit count is at most the rarity cutoff.

    The cutoff is the smallest power of two not below the minimum nonzero
    hit count; the result is sorted rarest first, ties by point id.
    """
    hits = [(h, p) for p, (h, k) in enumerate(zip(corpus_hits, kinds)) if h and k in BRANCH_KINDS]
    if not hits:
        return []
    low = min(h for h, _ in hits)
    cutoff = 1
    while cutoff < low:
        cutoff <<= 1
    return [p for h, p in sorted(hits) if h <= cutoff]


def _perf_holders(corpus: Corpus, glob: GlobalCoverage) -> set:
    best = {}
    pm = glob.perf_max
    for ent in corpus.entries:
        if ent.coverage is None:
            continue
        for e, c in ent.coverage.counts.items():
            if c == pm.get(e) and e not in best:
                best[e] = ent.id
    return set(best.values())


def select_next(corpus: Corpus, engine: str, glob: GlobalCoverage, rng=None):
    """Pick the entry to fuzz next; fairfuzz also returns its target branch.

    Returns ``(entry, target)`` where ``target`` is a branch point id or None.
    """
    if not corpus.entries:
        raise ValueError("empty corpus")
    if len(corpus.entries) == 1:
        corpus.cursor = 0
        ent = corpus.entries[0]
        target = None
        if engine == "fairfuzz":
            rare = rare_branches(glob.corpus_hits, glob.kinds)
            target = next((p for p in rare if ent.coverage and ent.coverage.hits >> p & 1), None)
        return ent, target
    corpus.cull()
    if engine == "fairfuzz":
        rare = rare_branches(glob.corpus_hits, glob.kinds)
        if rare:
            n = len(corpus.entries)
            for step in range(1, n + 1):
                i = (corpus.cursor + step) % n
                ent = corpus.entries[i]
                if ent.coverage is None:
                    continue
                for p in rare:
                    if ent.coverage.hits >> p & 1:
                        corpus.cursor = i
                        return ent, p
        return _round_robin(corpus, lambda e: e.favored, rng), None
    if engine == "tortoise":
        def key(e):
            return (-(e.weighted + 1) / (1 + e.n_fuzzed), e.n_fuzzed, e.id)
        ent = min(corpus.entries, key=key)
        corpus.cursor = corpus.entries.index(ent)
        return ent, None
    if engine == "aflpp" and rng is not None:
        return _weighted_pick(corpus, rng), None
    if engine == "perffuzz":
        holders = _perf_holders(corpus, glob)
        return _round_robin(corpus, lambda e: e.favored or e.id in holders, rng), None
    return _round_robin(corpus, lambda e: e.favored, rng), None


def queue_weight(entry: CorpusEntry, corpus: Corpus, avg_cost: float, avg_edges: float) -> float:
    """AFL++'s queue weight: rare paths, fast runs and big bitmaps are picked more often."""
    w = 1.0 / (math.log10(corpus.path_frequency(entry)) + 1)
    w *= avg_cost / max(1, entry.exec_cost)
    w *= max(1, entry.n_edges) / max(1.0, avg_edges)
    w = max(w, 0.1)
    if entry.favored:
        w *= 5
    if not entry.n_fuzzed:
        w *= 2
    return w


def _weighted_pick(corpus: Corpus, rng) -> CorpusEntry:
    avg_cost, avg_edges = _averages(corpus)
    weights = [queue_weight(e, corpus, avg_cost, avg_edges) for e in corpus.entries]
    r = rng.below(1 << 53) / (1 << 53) * sum(weights)
    for i, w in enumerate(weights):
        r -= w
        if r < 0:
            break
    corpus.cursor = i
    return corpus.entries[i]


def _averages(corpus: Corpus):
    ents = [e for e in corpus.entries if e.coverage is not None] or corpus.entries
    n = max(1, len(ents))
    return (sum(e.exec_cost for e in ents) / n, sum(e.n_edges for e in ents) / n)


def performance_score(entry: CorpusEntry, avg_cost: float, avg_edges: float) -> float:
    """AFL's score: 256 for an average entry, scaled by speed, coverage and depth."""
    cost = entry.exec_cost
    if cost * 0.1 > avg_cost:
        perf = 10
    elif cost * 0.25 > avg_cost:
        perf = 25
    elif cost * 0.5 > avg_cost:
        perf = 50
    elif cost * 0.75 > avg_cost:
        perf = 75
    elif cost * 4 < avg_cost:
        perf = 300
    elif cost * 3 < avg_cost:
        perf = 200
    elif cost * 2 < avg_cost:
        perf = 150
    else:
        perf = 100
    size = entry.n_edges
    if size * 0.3 > avg_edges:
        perf *= 3
    elif size * 0.5 > avg_edges:
        perf *= 2
    elif size * 0.75 > avg_edges:
        perf *= 1.5
    elif size * 3 < avg_edges:
        perf *= 0.25
    elif size * 2 < avg_edges:
        perf *= 0.5
    elif size * 1.5 < avg_edges:
        perf *= 0.75
    d = entry.depth
    perf *= 1 if d <= 3 else 2 if d <= 7 else 3 if d <= 13 else 4 if d <= 25 else 5
    return ENERGY_BASE * perf / 100


def fast_factor(entry: CorpusEntry, path_frequency: int) -> float:
    return min(2 ** min(entry.n_fuzzed, 16) / max(1, path_frequency), FAST_FACTOR_MAX)


def assign_energy(entry: CorpusEntry, engine: str, glob: GlobalCoverage = None,
                  corpus: Optional[Corpus] = None) -> int:
    """Havoc iterations for ``entry``, always within [16, 1600]."""
    if corpus is not None and corpus.entries:
        avg_cost, avg_edges = _averages(corpus)
    else:
        avg_cost, avg_edges = entry.exec_cost, entry.n_edges
    score = performance_score(entry, avg_cost, avg_edges)
    if engine == "aflpp":
        pf = corpus.path_frequency(entry) if corpus is not None else entry.path_frequency
        score *= fast_factor(entry, pf)
    return int(max(ENERGY_MIN, min(ENERGY_MAX, score)))


def fairfuzz_compute_mask(entry: CorpusEntry, target: int, execute) -> set:
    """Byte positions whose all-bits flip keeps ``target`` firing.

    ``execute(data)`` runs a candidate and returns its RunResult (or None
    when the budget ran out, which ends the probe with the positions so far).
    """
    mask = set()
    data = entry.data
    for i in range(len(data)):
        probe = bytearray(data)
        probe[i] ^= 0xFF
        res = execute(bytes(probe))
        if res is None:
            break
        if res.coverage.hits >> target & 1:
            mask.add(i)
    return mask


def entry_weight(cov: CoverageMap, glob: GlobalCoverage) -> int:
    return weighted_sum(cov.hits, glob.weights)
