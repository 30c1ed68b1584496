"""Entropy-compressed bit sequences with constant-time access and rank.

The sequence is cut into fixed-width blocks of ``b`` bits.  Each block is
stored as a pair (class, offset): the class is the block's popcount, the
offset is the block's index in the canonical enumeration of all b-bit words
of that popcount (numeric order, which coincides with the combinatorial
number system).  Classes take ``ceil(lg(b+1))`` bits each; offsets take
``ceil(lg C(b, class))`` bits, so the offset stream as a whole stays within
one bit per block of the information-theoretic minimum ``lg C(n, ones)``.
Absolute (rank, offset-position) checkpoints are kept every ``sb`` blocks;
a query touches one checkpoint plus at most one superblock of class fields,
read out of a single small byte slice.

Degenerate inputs (empty, all-zero, all-one) are legal: classes 0 and b
have a single member, so their offsets occupy zero bits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np

from . import opcount

BLOCK_CAP = 18  # keeps every decode table at <= 2**18 entries

# Overhead budget constants: payload must stay within
# lg C(n, ones) + C1 * n * lglg(n)/lg(n) + C2 * lg(n) bits.
C1_DEFAULT = 2
C2_DEFAULT = 64


class BitseqRangeError(IndexError):
    pass


def lg(x):
    """ceil(log2(x)) for x >= 1; defined as 0 for x <= 1."""
    return (x - 1).bit_length() if x >= 2 else 0


def overhead_budget(length, c1=C1_DEFAULT, c2=C2_DEFAULT):
    """Allowed payload overhead beyond the entropy term, in bits (float)."""
    lgn = max(1, lg(length))
    lglgn = max(1, lg(lgn))
    return c1 * length * lglgn / lgn + c2 * lgn


def entropy_bound(length, ones):
    """ceil(lg C(length, ones)): the 0th-order information content."""
    return lg(comb(length, ones)) if length else 0


def _params(length):
    b = max(1, min(lg(length), BLOCK_CAP))
    sb = max(1, lg(length))
    nblocks = -(-length // b) if length else 0
    nsamples = -(-nblocks // sb) if nblocks else 0
    return b, sb, nblocks, nsamples


# Decode tables: (b, class) -> list of b-bit words of that popcount in
# increasing numeric order.  Shared across all sequences.
_unrank_tables: dict = {}


def _unrank_table(b, c):
    key = (b, c)
    table = _unrank_tables.get(key)
    if table is None:
        if c == 0:
            table = [0]
        else:
            # Gosper's hack enumerates same-popcount words in numeric order.
            table = []
            v = (1 << c) - 1
            limit = 1 << b
            while v < limit:
                table.append(v)
                lowest = v & -v
                ripple = v + lowest
                v = ripple | (((v ^ ripple) >> 2) // lowest)
        _unrank_tables[key] = table
    return table


def _read_bits(data, pos, width):
    """Read `width` bits starting at bit `pos` (LSB-first packing)."""
    if width == 0:
        return 0
    end = pos + width
    assert end <= 8 * len(data), "bit read past payload end"
    lo = pos >> 3
    hi = (end + 7) >> 3
    chunk = int.from_bytes(data[lo:hi], "little")
    return (chunk >> (pos & 7)) & ((1 << width) - 1)


class _BitWriter:
    def __init__(self):
        self._out = bytearray()
        self._acc = 0
        self._fill = 0

    def write(self, value, width):
        if width == 0:
            return
        self._acc |= (value & ((1 << width) - 1)) << self._fill
        self._fill += width
        while self._fill >= 8:
            self._out.append(self._acc & 0xFF)
            self._acc >>= 8
            self._fill -= 8

    def finish(self):
        if self._fill:
            self._out.append(self._acc & 0xFF)
            self._acc = 0
            self._fill = 0
        return bytes(self._out)


def pack_fixed(values, width):
    """Pack an iterable of ints into LSB-first fixed-width fields."""
    w = _BitWriter()
    for v in values:
        w.write(int(v), width)
    return w.finish()


def _pack_fixed_np(values, width):
    """Vectorized fixed-width packing of a numpy integer array."""
    if width == 0 or len(values) == 0:
        return b""
    vals = np.asarray(values, dtype=np.int64)
    bits = ((vals[:, None] >> np.arange(width, dtype=np.int64)) & 1).astype(np.uint8)
    return np.packbits(bits.reshape(-1), bitorder="little").tobytes()


def _pack_varwidth_np(values, widths, total_bits):
    """Pack values[i] into widths[i] bits each, LSB-first, vectorized."""
    if total_bits == 0:
        return b""
    flat = np.zeros(total_bits, dtype=np.uint8)
    starts = np.concatenate(([0], np.cumsum(widths)[:-1]))
    maxw = int(widths.max())
    for j in range(maxw):
        sel = widths > j
        flat[starts[sel] + j] = (values[sel] >> j) & 1
    return np.packbits(flat, bitorder="little").tobytes()


@dataclass
class CompressedBitSequence:
    """Immutable compressed bit string supporting access and rank."""

    length: int
    ones: int
    classes: bytes       # nblocks fixed-width class fields
    offsets: bytes       # variable-width per-block offsets
    total_offset_bits: int
    sample_rank: list = field(repr=False)      # absolute ones before superblock
    sample_off: list = field(repr=False)       # absolute offset bit position

    def __post_init__(self):
        self.b, self.sb, self.nblocks, self.nsamples = _params(self.length)
        self.cw = self.b.bit_length()
        self.ow = tuple(lg(comb(self.b, c)) for c in range(self.b + 1))
        self._cmask = (1 << self.cw) - 1
        for c in range(self.b + 1):
            _unrank_table(self.b, c)

    # -- queries ---------------------------------------------------------

    def access(self, i):
        """Bit at 1-based position i."""
        if not 1 <= i <= self.length:
            raise BitseqRangeError(f"access position {i} outside [1, {self.length}]")
        opcount.bump()
        k, j = divmod(i - 1, self.b)
        word = self._decode_block(k)
        return (word >> j) & 1

    def rank(self, i):
        """Number of 1s among positions 1..i (0 <= i <= length)."""
        if not 0 <= i <= self.length:
            raise BitseqRangeError(f"rank position {i} outside [0, {self.length}]")
        if i == 0:
            return 0
        opcount.bump()
        k, j = divmod(i - 1, self.b)
        s = k // self.sb
        base = s * self.sb
        r = self.sample_rank[s]
        off = self.sample_off[s]
        chunk = _read_bits(self.classes, base * self.cw, (k - base + 1) * self.cw)
        for _ in range(k - base):
            c = chunk & self._cmask
            chunk >>= self.cw
            r += c
            off += self.ow[c]
        c = chunk & self._cmask
        word = _unrank_table(self.b, c)[_read_bits(self.offsets, off, self.ow[c])]
        return r + (word & ((1 << (j + 1)) - 1)).bit_count()

    def rank_range(self, x1, x2):
        """Count of 1s in positions x1..x2 inclusive."""
        if not (1 <= x1 <= x2 <= self.length):
            raise BitseqRangeError(f"range [{x1}, {x2}] invalid for length {self.length}")
        return self.rank(x2) - self.rank(x1 - 1)

    def _decode_block(self, k):
        s = k // self.sb
        base = s * self.sb
        off = self.sample_off[s]
        chunk = _read_bits(self.classes, base * self.cw, (k - base + 1) * self.cw)
        for _ in range(k - base):
            c = chunk & self._cmask
            chunk >>= self.cw
            off += self.ow[c]
        c = chunk & self._cmask
        return _unrank_table(self.b, c)[_read_bits(self.offsets, off, self.ow[c])]

    # -- size accounting -------------------------------------------------

    @property
    def classes_bits(self):
        return self.nblocks * self.cw

    @property
    def samples_bits(self):
        return self.nsamples * (self._rank_width() + self._off_width())

    def _rank_width(self):
        return self.ones.bit_length()

    def _off_width(self):
        return (8 * len(self.offsets)).bit_length()

    @property
    def encoded_size_bits(self):
        """Payload bits: offsets + classes + checkpoint samples.

        The two fixed header words (length, ones) are reported separately
        by size_report; they are O(1) and excluded from the entropy-budget
        comparison.
        """
        return self.total_offset_bits + self.classes_bits + self.samples_bits

    def size_report(self, c1=C1_DEFAULT, c2=C2_DEFAULT):
        bound = entropy_bound(self.length, self.ones)
        budget = bound + overhead_budget(self.length, c1, c2)
        return {
            "length": self.length,
            "ones": self.ones,
            "offset_bits": self.total_offset_bits,
            "class_bits": self.classes_bits,
            "sample_bits": self.samples_bits,
            "header_bits": 128,
            "encoded_bits": self.encoded_size_bits,
            "entropy_bound_bits": bound,
            "budget_bits": budget,
            "ratio": (self.encoded_size_bits / budget) if budget > 0 else 0.0,
        }


def build_bitseq(bits):
    """Build a CompressedBitSequence from a 0/1 sequence or bool array."""
    arr = np.asarray(bits, dtype=np.uint8)
    if arr.ndim != 1:
        arr = arr.reshape(-1)
    n = int(arr.shape[0])
    b, sb, nblocks, nsamples = _params(n)
    if n == 0:
        return CompressedBitSequence(0, 0, b"", b"", 0, [], [])

    padded = np.zeros(nblocks * b, dtype=np.uint8)
    padded[:n] = arr
    mat = padded.reshape(nblocks, b)
    cls = mat.sum(axis=1, dtype=np.int64)
    ones = int(cls.sum())

    # Combinatorial rank of each block within its class, vectorized over
    # bit positions: a set bit at position p with i ones seen so far (it
    # included) contributes C(p, i).
    ctab = np.zeros((b + 1, b + 2), dtype=np.int64)
    for p in range(b + 1):
        for i in range(p + 2):
            ctab[p, i] = comb(p, i) if i <= p else 0
    offs = np.zeros(nblocks, dtype=np.int64)
    seen = np.zeros(nblocks, dtype=np.int64)
    for p in range(b):
        bitp = mat[:, p].astype(np.int64)
        seen += bitp
        offs += bitp * ctab[p, np.minimum(seen, b + 1)]

    ow = np.array([lg(comb(b, c)) for c in range(b + 1)], dtype=np.int64)
    widths = ow[cls]
    total_offset_bits = int(widths.sum())

    classes_bytes = _pack_fixed_np(cls, b.bit_length())
    offsets_bytes = _pack_varwidth_np(offs, widths, total_offset_bits)

    cum_ones = np.concatenate(([0], np.cumsum(cls)))
    cum_off = np.concatenate(([0], np.cumsum(widths)))
    sample_rank = [int(cum_ones[s * sb]) for s in range(nsamples)]
    sample_off = [int(cum_off[s * sb]) for s in range(nsamples)]

    return CompressedBitSequence(
        n, ones, classes_bytes, offsets_bytes, total_offset_bits,
        sample_rank, sample_off,
    )


def concat_build(parts):
    """Compress the concatenation of several bit sequences in one structure.

    Returns (sequence, offsets) where offsets[i] is the 1-based position of
    part i's first bit inside the combined sequence; addressing a part is
    offsets[i] + local_index - 1.  One structure's checkpoint overhead is
    paid instead of one per part.
    """
    offsets = []
    pos = 1
    arrays = []
    for p in parts:
        a = np.asarray(p, dtype=np.uint8).reshape(-1)
        offsets.append(pos)
        pos += int(a.shape[0])
        arrays.append(a)
    combined = np.concatenate(arrays) if arrays else np.zeros(0, dtype=np.uint8)
    return build_bitseq(combined), offsets


# -- serialization -------------------------------------------------------
# Section format: [length u64 LE][ones u64 LE][payload byte count u64 LE]
# [payload = classes || offsets][samples = ranks || offset positions].
# Everything else is re-derived from length and ones.


def serialize_bitseq(s):
    payload = s.classes + s.offsets
    w = _BitWriter()
    rw = s._rank_width()
    for v in s.sample_rank:
        w.write(v, rw)
    ranks = w.finish()
    w = _BitWriter()
    ow = s._off_width()
    for v in s.sample_off:
        w.write(v, ow)
    offs = w.finish()
    head = (
        s.length.to_bytes(8, "little")
        + s.ones.to_bytes(8, "little")
        + len(payload).to_bytes(8, "little")
    )
    return head + payload + ranks + offs


def deserialize_bitseq(buf, start=0):
    """Parse a serialized sequence at `start`; returns (sequence, end)."""
    length = int.from_bytes(buf[start:start + 8], "little")
    ones = int.from_bytes(buf[start + 8:start + 16], "little")
    nbytes = int.from_bytes(buf[start + 16:start + 24], "little")
    pos = start + 24
    payload = bytes(buf[pos:pos + nbytes])
    pos += nbytes

    b, sb, nblocks, nsamples = _params(length)
    cw = b.bit_length()
    class_bytes = -(-nblocks * cw // 8)
    classes = payload[:class_bytes]
    offsets = payload[class_bytes:]

    ow = np.array([lg(comb(b, c)) for c in range(b + 1)], dtype=np.int64)
    if nblocks:
        cbits = np.unpackbits(np.frombuffer(classes, dtype=np.uint8),
                              bitorder="little")[:nblocks * cw]
        cls = cbits.reshape(nblocks, cw).astype(np.int64) @ (1 << np.arange(cw, dtype=np.int64))
        total_offset_bits = int(ow[cls].sum())
    else:
        total_offset_bits = 0

    rw = ones.bit_length()
    rank_bytes = -(-nsamples * rw // 8)
    ranks_raw = bytes(buf[pos:pos + rank_bytes])
    pos += rank_bytes
    offw = (8 * len(offsets)).bit_length()
    off_bytes = -(-nsamples * offw // 8)
    offs_raw = bytes(buf[pos:pos + off_bytes])
    pos += off_bytes

    sample_rank = [_read_bits(ranks_raw, i * rw, rw) for i in range(nsamples)]
    sample_off = [_read_bits(offs_raw, i * offw, offw) for i in range(nsamples)]
    return (
        CompressedBitSequence(length, ones, classes, offsets,
                              total_offset_bits, sample_rank, sample_off),
        pos,
    )
