"""Mutation operators: AFL-style deterministic stages and stacked havoc.

Every operator works on ``bytes`` and returns new ``bytes``. An optional
``mask`` (set of byte positions) restricts in-place edits to those
positions and allows no length change other than appending at the end,
which is how rare-branch targeting keeps a branch alive while mutating
around it.
"""
from __future__ import annotations

import struct
from typing import Iterator, Optional

from .rng import SplitMix64

ARITH_MAX = 35
INTERESTING_8 = (-128, -1, 0, 1, 16, 32, 64, 100, 127)
INTERESTING_16 = INTERESTING_8 + (-32768, -129, 128, 255, 256, 512, 1000, 1024, 4096, 32767)
INTERESTING_32 = INTERESTING_16 + (-2147483648, -100663046, -32769, 32768, 65535, 65536,
                                   100663045, 2147483647)


def _could_be_bitflip(xor: int) -> bool:
    # true if old ^ new is reachable by the walking-bitflip or byte-flip stages
    if xor == 0:
        return True
    sh = 0
    while not xor & 1:
        xor >>= 1
        sh += 1
    if xor in (1, 3, 15):
        return True
    if sh & 7:
        return False
    return xor in (0xFF, 0xFFFF, 0xFFFFFFFF)


def _allowed(mask, pos, n) -> bool:
    return mask is None or all(p in mask for p in range(pos, pos + n))


def deterministic(data: bytes, mask: Optional[set] = None) -> Iterator[bytes]:
    """Yield the deterministic-stage mutants of ``data`` in AFL order.

    Walking bit flips of 1/2/4 bits, byte flips of 1/2/4 bytes, 8-bit add and
    subtract of 1..35, then 8/16/32-bit interesting values (16/32-bit in both
    byte orders). Mutants that an earlier stage already produced are skipped.
    """
    n = len(data)
    nbits = n * 8
    buf = bytearray(data)
    for width in (1, 2, 4):
        for bit in range(nbits - width + 1):
            if not _allowed(mask, bit >> 3, ((bit + width - 1) >> 3) - (bit >> 3) + 1):
                continue
            out = bytearray(buf)
            for b in range(bit, bit + width):
                out[b >> 3] ^= 1 << (b & 7)
            yield bytes(out)
    for width in (1, 2, 4):
        for pos in range(n - width + 1):
            if not _allowed(mask, pos, width):
                continue
            out = bytearray(buf)
            for p in range(pos, pos + width):
                out[p] ^= 0xFF
            yield bytes(out)
    for pos in range(n):
        if not _allowed(mask, pos, 1):
            continue
        orig = buf[pos]
        for d in range(1, ARITH_MAX + 1):
            for new in ((orig + d) & 0xFF, (orig - d) & 0xFF):
                if _could_be_bitflip(orig ^ new):
                    continue
                out = bytearray(buf)
                out[pos] = new
                yield bytes(out)
    seen_int8 = set()
    for pos in range(n):
        if not _allowed(mask, pos, 1):
            continue
        for v in INTERESTING_8:
            new = v & 0xFF
            if _could_be_bitflip(buf[pos] ^ new) or (pos, new) in seen_int8:
                continue
            seen_int8.add((pos, new))
            out = bytearray(buf)
            out[pos] = new
            yield bytes(out)
    for size, table, fmt in ((2, INTERESTING_16, "H"), (4, INTERESTING_32, "I")):
        for pos in range(n - size + 1):
            if not _allowed(mask, pos, size):
                continue
            orig = bytes(buf[pos:pos + size])
            done = {orig}
            for v in table[len(INTERESTING_8) if size == 2 else len(INTERESTING_16):]:
                for order in ("<", ">"):
                    new = struct.pack(order + fmt, v & ((1 << (8 * size)) - 1))
                    if new in done:
                        continue
                    done.add(new)
                    out = bytearray(buf)
                    out[pos:pos + size] = new
                    yield bytes(out)


def _block_len(rng: SplitMix64, limit: int) -> int:
    # bias towards short blocks, as AFL does
    cap = min(limit, rng.choice((8, 32, 128, 1500)))
    return 1 + rng.below(max(1, cap))


N_HAVOC_OPS = 13


def havoc(data: bytes, rng: SplitMix64, tokens=(), mask: Optional[set] = None,
          max_len: int = 4096, splice_with: Optional[bytes] = None) -> bytes:
    """Apply a stack of 2**k random edits (k uniform in 0..6) to ``data``.

    With a ``mask``, edits stay on masked positions except for appends at
    the end, whose bytes then join the mask.
    """
    buf = bytearray(data)
    if splice_with is not None and len(buf) > 1 and len(splice_with) > 1:
        cut = 1 + rng.below(min(len(buf), len(splice_with)) - 1)
        buf = buf[:cut] + bytearray(splice_with[cut:])
    positions = sorted(mask) if mask is not None else None
    if positions is not None and positions and max(positions) >= len(buf):
        positions = [p for p in positions if p < len(buf)]
    maskset = set(positions) if positions is not None else None
    stack = 1 << rng.below(7)
    for _ in range(stack):
        n = len(buf)
        if positions is not None:
            # in-place edits on masked bytes, or an append: later frames cannot
            # change what fired in earlier cycles, so growing the tail is safe
            op = rng.below(9)
            if op == 8 or not positions:
                if n >= max_len:
                    continue
                ln = 1 + rng.below(min(8, max_len - n))  # short tails keep runs cheap
                if n and rng.chance(1, 2):
                    src = rng.below(n)
                    block = buf[src:src + ln]
                else:
                    block = bytearray(rng.randbytes(ln))
                buf += block
                positions.extend(range(n, n + len(block)))
                maskset.update(range(n, n + len(block)))
                continue
        else:
            op = rng.below(N_HAVOC_OPS)
        if n == 0 and op < 8:
            op = 9  # nothing to edit in place; grow instead
        if positions is not None:
            pos = rng.choice(positions)
        elif n:
            pos = rng.below(n)
        else:
            pos = 0
        if op == 0:
            buf[pos] ^= 1 << rng.below(8)
        elif op == 1:
            buf[pos] = rng.choice(INTERESTING_8) & 0xFF
        elif op == 2:
            if pos + 1 < n and _allowed(maskset, pos, 2):
                v = rng.choice(INTERESTING_16) & 0xFFFF
                buf[pos:pos + 2] = struct.pack(rng.choice(("<H", ">H")), v)
        elif op == 3:
            if pos + 3 < n and _allowed(maskset, pos, 4):
                v = rng.choice(INTERESTING_32) & 0xFFFFFFFF
                buf[pos:pos + 4] = struct.pack(rng.choice(("<I", ">I")), v)
        elif op == 4:
            buf[pos] = (buf[pos] - 1 - rng.below(ARITH_MAX)) & 0xFF
        elif op == 5:
            buf[pos] = (buf[pos] + 1 + rng.below(ARITH_MAX)) & 0xFF
        elif op == 6:
            buf[pos] ^= 1 + rng.below(255)
        elif op == 7:
            if tokens:
                tok = rng.choice(tokens)
                if pos + len(tok) <= n and _allowed(maskset, pos, len(tok)):
                    buf[pos:pos + len(tok)] = tok
            else:
                buf[pos] = rng.below(256)
        elif op == 8:
            if n > 1:
                ln = _block_len(rng, n - 1)
                start = rng.below(n - ln + 1)
                del buf[start:start + ln]
        elif op == 9:
            if n < max_len:
                if n and rng.chance(3, 4):
                    ln = _block_len(rng, n)
                    src = rng.below(n - ln + 1)
                    block = buf[src:src + ln]
                else:
                    ln = _block_len(rng, 32)
                    block = bytearray([rng.below(256)] * ln)
                at = rng.below(n + 1)
                buf[at:at] = block
        elif op == 10:
            if n > 1:
                ln = _block_len(rng, n - 1)
                src = rng.below(n - ln + 1)
                dst = rng.below(n - ln + 1)
                if rng.chance(3, 4):
                    buf[dst:dst + ln] = buf[src:src + ln]
                else:
                    buf[dst:dst + ln] = bytes([rng.below(256)]) * ln
        elif op == 11:
            if tokens:
                tok = rng.choice(tokens)
                if len(tok) <= n:
                    at = rng.below(n - len(tok) + 1)
                    buf[at:at + len(tok)] = tok
        else:
            if tokens and n + 1 < max_len:
                tok = rng.choice(tokens)
                at = rng.below(n + 1)
                buf[at:at] = tok
        if len(buf) > max_len:
            del buf[max_len:]
    return bytes(buf)
