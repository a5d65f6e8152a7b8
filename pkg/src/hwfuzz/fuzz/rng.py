"""SplitMix64: a 64-bit-state generator with a fixed, portable output stream."""
from __future__ import annotations

M64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


class SplitMix64:
    __slots__ = ("state",)

    def __init__(self, seed: int = 0):
        self.state = seed & M64

    def next_u64(self) -> int:
        self.state = z = (self.state + GOLDEN) & M64
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & M64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & M64
        return z ^ (z >> 31)

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection, so no modulo bias."""
        if n <= 0:
            raise ValueError("below() needs n > 0")
        if n & (n - 1) == 0:
            return self.next_u64() & (n - 1)
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            x = self.next_u64()
            if x < limit:
                return x % n

    def chance(self, num: int, den: int) -> bool:
        return self.below(den) < num

    def choice(self, seq):
        return seq[self.below(len(seq))]

    def randbytes(self, n: int) -> bytes:
        return bytes(self.next_u64() & 0xFF for _ in range(n))

    def fork(self, salt: int) -> "SplitMix64":
        return SplitMix64(self.state ^ ((salt * GOLDEN) & M64))
