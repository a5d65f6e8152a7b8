"""Edge coverage with AFL hit-count buckets, plus exact point bitsets.

Edge index for consecutive fired points ``p -> q``::

    (mix64(p) ^ (mix64(q) >> 1)) & 0xFFFF

where ``mix64`` is the SplitMix64 finaliser (add 0x9E3779B97F4A7C15, then
xor-shift-multiply by 0xBF58476D1CE4E5B9 and 0x94D049BB133111EB).

Raw per-edge counts are classified into one of eight buckets
{1, 2, 3, 4-7, 8-15, 16-31, 32-127, 128+}, bit 0 .. bit 7 of a byte.

Snapshot file layout (little-endian)::

    b"HWCOV1"                    magic
    32 bytes                     netlist hash (sha256)
    u32 n                        number of coverage points
    n bytes                      point kind codes (see KIND_CODES)
    n bytes                      point weights
    ceil(n/8) bytes              hit bitset, point i -> byte i//8, bit i%8
    n x u32                      corpus hit count per point
    65536 bytes                  edge bucket masks
    u32 m, m x (u16 edge, u32)   per-edge perf maxima
    u64                          best weighted sum
"""
from __future__ import annotations

import struct
from collections import Counter
from dataclasses import dataclass, field
from typing import Sequence

from .errors import MergeError

MAP_SIZE = 1 << 16
M64 = (1 << 64) - 1
COUNT_MAX = 0xFFFFFFFF
MAGIC = b"HWCOV1"

KIND_CODES = {"statement": 0, "branch-true": 1, "branch-false": 2, "case-item": 3,
              "case-default": 4, "cont-assign": 5}
_CODE_KINDS = {v: k for k, v in KIND_CODES.items()}
_STMT = ("statement", "cont-assign")
_BRANCH = ("branch-true", "branch-false", "case-item", "case-default")


def mix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & M64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & M64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & M64
    return x ^ (x >> 31)


_HASHES: list[int] = []


def _hashes(n):
    while len(_HASHES) < n:
        _HASHES.append(mix64(len(_HASHES)))
    return _HASHES


def edge_index(p: int, q: int) -> int:
    h = _hashes(max(p, q) + 1)
    return (h[p] ^ (h[q] >> 1)) & 0xFFFF


def bucket(count: int) -> int:
    """AFL hit-count class of ``count`` as a one-hot byte (0 for no hits)."""
    if count <= 0:
        return 0
    if count <= 3:
        return 1 << (count - 1)
    if count <= 7:
        return 8
    if count <= 15:
        return 16
    if count <= 31:
        return 32
    if count <= 127:
        return 64
    return 128


_BUCKET_LUT = bytes(bucket(i) for i in range(256))

_MASKS: dict = {}


def _kind_masks(kinds):
    m = _MASKS.get(kinds)
    if m is None:
        stmt = sum(1 << i for i, k in enumerate(kinds) if k in _STMT)
        br = sum(1 << i for i, k in enumerate(kinds) if k in _BRANCH)
        m = _MASKS[kinds] = (stmt, br)
    return m


def _bits(x: int):
    i = 0
    while x:
        if x & 1:
            yield i
        x >>= 1
        i += 1


@dataclass
class CoverageMap:
    """Coverage of a single run.

    ``edges`` is the sparse form of the 64K bucket array; ``counts`` keeps the
    raw per-edge hit counts that Perffuzz-style triage compares.
    """
    edges: dict
    counts: dict
    hits: int
    kinds: tuple

    @property
    def edge_buckets(self) -> bytearray:
        out = bytearray(MAP_SIZE)
        for e, b in self.edges.items():
            out[e] = b
        return out

    @property
    def stmt_hits(self) -> int:
        return self.hits & _kind_masks(self.kinds)[0]

    @property
    def branch_hits(self) -> int:
        return self.hits & _kind_masks(self.kinds)[1]

    @property
    def perf_counts(self) -> dict:
        return self.counts

    def edge_set_key(self) -> int:
        return hash(tuple(sorted(self.edges)))


def edges_from_trace(fired: Sequence[int], kinds: tuple = ()) -> CoverageMap:
    if not fired:
        return CoverageMap({}, {}, 0, tuple(kinds))
    h = _hashes(max(fired) + 1)
    counts = Counter((h[p] ^ (h[q] >> 1)) & 0xFFFF for p, q in zip(fired, fired[1:]))
    lut = _BUCKET_LUT
    edges = {e: (lut[c] if c < 256 else 128) for e, c in counts.items()}
    hits = 0
    for p in set(fired):
        hits |= 1 << p
    return CoverageMap(edges, {e: min(c, COUNT_MAX) for e, c in counts.items()}, hits, tuple(kinds))


@dataclass
class GlobalCoverage:
    kinds: tuple
    weights: tuple
    edge_buckets: bytearray = field(default_factory=lambda: bytearray(MAP_SIZE))
    hits: int = 0
    corpus_hits: list = None
    perf_max: dict = field(default_factory=dict)
    best_weighted: int = 0
    netlist_hash: bytes = b"\0" * 32

    def __post_init__(self):
        self.kinds = tuple(self.kinds)
        self.weights = tuple(self.weights)
        if self.corpus_hits is None:
            self.corpus_hits = [0] * len(self.kinds)

    @classmethod
    def for_netlist(cls, nl) -> "GlobalCoverage":
        return cls(nl.point_kinds, nl.weights, netlist_hash=nl.hash)

    @property
    def stmt_hits(self) -> int:
        return self.hits & _kind_masks(self.kinds)[0]

    @property
    def branch_hits(self) -> int:
        return self.hits & _kind_masks(self.kinds)[1]

    @property
    def edge_count(self) -> int:
        return MAP_SIZE - self.edge_buckets.count(0)

    def copy(self) -> "GlobalCoverage":
        return GlobalCoverage(self.kinds, self.weights, bytearray(self.edge_buckets), self.hits,
                              list(self.corpus_hits), dict(self.perf_max), self.best_weighted,
                              self.netlist_hash)

    def weighted_sum(self, run: CoverageMap) -> int:
        return weighted_sum(run.hits, self.weights)

    def update(self, run: CoverageMap, accepted: bool = True) -> None:
        """In-place merge of ``run``; ``accepted`` marks a corpus insertion."""
        g = self.edge_buckets
        for e, b in run.edges.items():
            g[e] |= b
        pm = self.perf_max
        for e, c in run.counts.items():
            if c > pm.get(e, 0):
                pm[e] = c
        self.hits |= run.hits
        w = self.weighted_sum(run)
        if w > self.best_weighted:
            self.best_weighted = w
        if accepted:
            for p in _bits(run.hits):
                self.corpus_hits[p] += 1

    def absorb(self, other: "GlobalCoverage") -> None:
        """Fold another global state (e.g. from a snapshot) into this one."""
        for e in range(MAP_SIZE):
            self.edge_buckets[e] |= other.edge_buckets[e]
        for e, c in other.perf_max.items():
            if c > self.perf_max.get(e, 0):
                self.perf_max[e] = c
        self.hits |= other.hits
        self.best_weighted = max(self.best_weighted, other.best_weighted)
        self.corpus_hits = [a + b for a, b in zip(self.corpus_hits, other.corpus_hits)]


def weighted_sum(hits: int, weights) -> int:
    return sum(weights[p] for p in _bits(hits) if p < len(weights))


def is_interesting(run: CoverageMap, glob: GlobalCoverage, engine: str = "afl") -> str:
    """Classify ``run`` against ``glob``: new-edge > new-bucket > perf-gain/weighted-gain > none.

    A previously unseen coverage point also counts as new-edge, so a run
    whose only novelty is a single fired point is still kept.
    """
    g = glob.edge_buckets
    new_bucket = False
    for e, b in run.edges.items():
        have = g[e]
        if not have:
            return "new-edge"
        if b & ~have:
            new_bucket = True
    if run.hits & ~glob.hits:
        return "new-edge"
    if new_bucket:
        return "new-bucket"
    if engine == "perffuzz":
        pm = glob.perf_max
        for e, c in run.counts.items():
            if c > pm.get(e, 0):
                return "perf-gain"
    if engine == "tortoise" and glob.weighted_sum(run) > glob.best_weighted:
        return "weighted-gain"
    return "none"


def merge(glob: GlobalCoverage, run: CoverageMap, accepted: bool = True) -> GlobalCoverage:
    out = glob.copy()
    out.update(run, accepted)
    return out


def coverage_pct(glob, nl=None) -> tuple[float, float]:
    """(stmt_pct, branch_pct) from the exact bitsets, never from the edge map."""
    kinds = glob.kinds if nl is None else nl.point_kinds
    stmt_mask, br_mask = _kind_masks(tuple(kinds))
    n_stmt, n_br = stmt_mask.bit_count(), br_mask.bit_count()
    s = 100.0 * (glob.hits & stmt_mask).bit_count() / n_stmt if n_stmt else 100.0
    b = 100.0 * (glob.hits & br_mask).bit_count() / n_br if n_br else 100.0
    return s, b


# -- snapshots ---------------------------------------------------------------

def dump_snapshot(glob: GlobalCoverage) -> bytes:
    n = len(glob.kinds)
    out = bytearray(MAGIC)
    out += glob.netlist_hash
    out += struct.pack("<I", n)
    out += bytes(KIND_CODES[k] for k in glob.kinds)
    out += bytes(min(w, 255) for w in glob.weights)
    out += glob.hits.to_bytes((n + 7) // 8, "little")
    out += struct.pack(f"<{n}I", *glob.corpus_hits)
    out += glob.edge_buckets
    items = sorted(glob.perf_max.items())
    out += struct.pack("<I", len(items))
    for e, c in items:
        out += struct.pack("<HI", e, c)
    out += struct.pack("<Q", glob.best_weighted)
    return bytes(out)


def load_snapshot(data: bytes) -> GlobalCoverage:
    try:
        if data[:6] != MAGIC:
            raise MergeError("corrupt-snapshot", "bad magic")
        pos = 6
        nhash = data[pos:pos + 32]
        pos += 32
        (n,) = struct.unpack_from("<I", data, pos)
        pos += 4
        kinds = tuple(_CODE_KINDS[c] for c in data[pos:pos + n])
        pos += n
        weights = tuple(data[pos:pos + n])
        pos += n
        nb = (n + 7) // 8
        hits = int.from_bytes(data[pos:pos + nb], "little")
        pos += nb
        counts = list(struct.unpack_from(f"<{n}I", data, pos))
        pos += 4 * n
        buckets = bytearray(data[pos:pos + MAP_SIZE])
        pos += MAP_SIZE
        (m,) = struct.unpack_from("<I", data, pos)
        pos += 4
        perf = {}
        for _ in range(m):
            e, c = struct.unpack_from("<HI", data, pos)
            perf[e] = c
            pos += 6
        (best,) = struct.unpack_from("<Q", data, pos)
        pos += 8
    except (struct.error, KeyError, IndexError) as exc:
        raise MergeError("corrupt-snapshot", f"truncated or malformed snapshot: {exc}") from None
    if pos != len(data) or len(kinds) != n or len(buckets) != MAP_SIZE or hits >> n:
        raise MergeError("corrupt-snapshot", "snapshot length or bitset does not match its header")
    return GlobalCoverage(kinds, weights, buckets, hits, counts, perf, best, bytes(nhash))
