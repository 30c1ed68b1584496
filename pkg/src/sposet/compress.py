"""Compression of flat posets by dense biclique removal plus sparse merges,
with a constant-time edge query over the output.

The recursion keeps a working decomposition whose bottom antichain is the
union of already-merged initial levels and whose other antichains are single
initial levels.  Whenever some consecutive pair is big and carries at least
(n/lg n)^2 surviving cross edges, a balanced biclique D is pulled out of the
pair: the full adjacency of each D member to the opposite antichain goes out
as raw bits (W sequences), and every remaining element's connection to D is
a single small code made possible by transitivity: an element above the pair
that touches any top-side member must cover the whole bottom side, and
symmetrically below, so tau/2 + 1 bits per element suffice.  When no pair
qualifies, the bottom two antichains merge and their surviving cross edges
are emitted like the flattening step.  Membership bit sequences (one per
removal epoch) translate initial ranks into surviving ranks at any epoch
with one rank call, which is what keeps the query constant time.

Queries are normalized: the caller asks whether the element on the lower
initial level precedes the one on the higher level; the four cases follow
which of the two was removed first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import opcount
from .bitseq import _read_bits, build_bitseq, concat_build, lg
from .biclique import C_Q, BicliqueCertificate, best_effort_biclique, q_target
from .order import ClosureMatrix

INF = 1 << 62           # removal id for elements never removed
C_MIN = 64              # minimum pair size for the dense case


class NotFlatError(ValueError):
    pass


@dataclass
class DenseRemoval:
    ell: int
    pair_index: int                 # index of the lower antichain in the pair
    lower_levels: tuple             # (first, last) initial level of the lower antichain
    upper_level: int
    cert: BicliqueCertificate
    q: int
    lower_size: int                 # surviving sizes when the removal ran
    upper_size: int
    member_positions: tuple         # initial rank positions of D, left side first
    w_minus: np.ndarray = field(repr=False)
    w_plus: np.ndarray = field(repr=False)
    y_vals: np.ndarray = field(repr=False)
    y_width: int = 0
    wm_off: int = 0                 # bit offsets into the packed W/Y stream
    wp_off: int = 0
    y_off: int = 0


@dataclass
class MergeA:
    seq_offset: int
    delta: int                      # removals completed before this merge, plus one
    upper_len: int
    lower_len: int


def encode_connection(left_mask, right_mask, q, v_above):
    """Key-Lemma code for one outside element's edges into D.

    Code 0 means no edges.  For an element above the pair, a nonempty
    top-side mask is stored as-is in [1, 2^q - 1] (full bottom side implied);
    otherwise a nonempty bottom-side mask m is stored as 2^q + m - 1.  Below
    the pair the roles of the sides swap.  Codes fit in q + 1 bits and at
    most 2^(q+1) - 1 are distinct.
    """
    if v_above:
        if right_mask:
            return right_mask
        if left_mask:
            return (1 << q) + left_mask - 1
        return 0
    if left_mask:
        return left_mask
    if right_mask:
        return (1 << q) + right_mask - 1
    return 0


def decode_edge(code, q, member_rank, member_top, v_above):
    """Inverse of encode_connection for one queried D member.

    member_rank is the rank inside D (left side first), member_top tells
    which side it sits on.  Malformed codes raise."""
    if not 0 <= code < (1 << (q + 1)):
        raise ValueError(f"connectivity code {code} out of range for q={q}")
    if code == 0:
        return False
    full = 1 << q
    if v_above:
        if code < full:
            if member_top:
                return (code >> (member_rank - q - 1)) & 1 == 1
            return True
        mask = code - full + 1
        if member_top:
            return False
        return (mask >> (member_rank - 1)) & 1 == 1
    if code < full:
        if member_top:
            return True
        return (code >> (member_rank - 1)) & 1 == 1
    mask = code - full + 1
    if not member_top:
        return False
    return (mask >> (member_rank - q - 1)) & 1 == 1


def connectivity_code(v, removal: DenseRemoval, closure: ClosureMatrix, level_of):
    """Code describing how element v connects to the removal's biclique."""
    lo_first, lo_last = removal.lower_levels
    if lo_first <= level_of[v] <= removal.upper_level:
        raise ValueError(f"element {v} belongs to the removal's antichain pair")
    q = removal.q
    left = removal.cert.left
    right = removal.cert.right
    incoming = any(closure.has(m, v) for m in left + right)
    outgoing = any(closure.has(v, m) for m in left + right)
    assert not (incoming and outgoing), "element is both above and below D"
    if not incoming and not outgoing:
        return 0
    v_above = incoming
    if v_above:
        left_mask = sum(1 << k for k, m in enumerate(left) if closure.has(m, v))
        right_mask = sum(1 << k for k, m in enumerate(right) if closure.has(m, v))
    else:
        left_mask = sum(1 << k for k, m in enumerate(left) if closure.has(v, m))
        right_mask = sum(1 << k for k, m in enumerate(right) if closure.has(v, m))
    return encode_connection(left_mask, right_mask, q, v_above)


class CompressOutput:
    """Everything the flat-poset query needs, plus raw pieces for tests."""

    def __init__(self, n, levels):
        self.n = n
        self.m = len(levels)
        self.levels = [list(lv) for lv in levels]
        self.F = [0] * (self.m + 2)
        for k, lv in enumerate(levels, start=1):
            self.F[k + 1] = self.F[k] + len(lv)
        self.level_of = [0] * (n + 1)
        self.rank_of = [0] * (n + 1)
        for k, lv in enumerate(levels, start=1):
            for r, lab in enumerate(lv, start=1):
                self.level_of[lab] = k
                self.rank_of[lab] = r
        self.c_id = [INF] * (n + 1)
        self.c_rank = [0] * (n + 1)
        self.c_top = [0] * (n + 1)
        self.c_ds = [0] * (n + 1)
        self.c_dt = [0] * (n + 1)
        self.removals = []
        self.A = [None] * (self.m + 1)
        self.sparse_bits = None
        self.raw_sparse_bits = 0
        self.M = []
        self.wy = b""
        self.wy_bits = 0
        self.steps = 0

    # -- query -----------------------------------------------------------

    def _merge_bit(self, i, x, j, y):
        rec = self.A[i]
        opcount.bump(1)
        ml = self.M[rec.delta - 1]
        z = ml.rank(self.F[j] + y)
        low = ml.rank(self.F[i])
        w = ml.rank(self.F[i] + x) - low
        opcount.bump(2)
        pos = rec.seq_offset + (z - 1) * rec.upper_len + (w - 1)
        return self.sparse_bits.access(pos) == 1

    def _y_code(self, rem, k):
        opcount.bump(1)
        return _read_bits(self.wy, rem.y_off + (k - 1) * rem.y_width, rem.y_width)

    def edge_query(self, lo, hi):
        """Does `lo` precede `hi`, given level(lo) < level(hi)?"""
        i, x = self.level_of[hi], self.rank_of[hi]
        j, y = self.level_of[lo], self.rank_of[lo]
        ida, idb = self.c_id[hi], self.c_id[lo]
        opcount.bump(4)
        if ida == idb:
            if ida != INF and self.c_top[hi] != self.c_top[lo]:
                return True                              # opposite biclique sides
            return self._merge_bit(i, x, j, y)           # same side / never removed
        if ida < idb:
            # the higher element was removed first
            ell = ida
            rem = self.removals[ell - 1]
            ml = self.M[ell - 1]
            opcount.bump(2)
            ra = ml.rank(self.F[i] + x)
            rb = ml.rank(self.F[j] + y)
            opcount.bump(1)
            if self.c_top[hi] == 1 and ra - self.c_ds[hi] <= rb:
                recj = self.A[j]
                opcount.bump(1)
                if recj is not None and recj.delta > ell:
                    k = rb - ml.rank(self.F[j])
                else:
                    k = rb
                srank = self.c_rank[hi] - rem.q
                pos = rem.wp_off + (srank - 1) * rem.lower_size + (k - 1)
                opcount.bump(1)
                return _read_bits(self.wy, pos, 1) == 1
            if self.c_top[hi] == 0 and ra - self.c_ds[hi] - 1 == 0:
                return self._merge_bit(i, x, j, y)
            code = self._y_code(rem, rb)
            return decode_edge(code, rem.q, self.c_rank[hi], self.c_top[hi], False)
        # the lower element was removed first
        ell = idb
        rem = self.removals[ell - 1]
        reci = self.A[i]
        opcount.bump(2)
        if reci.delta <= ell:
            return self._merge_bit(i, x, j, y)
        ml = self.M[ell - 1]
        ra = ml.rank(self.F[i] + x)
        opcount.bump(1)
        if self.c_top[lo] == 0:
            rb = ml.rank(self.F[j] + y)
            if rb + self.c_dt[lo] >= ra:
                k = ra - ml.rank(self.F[i])
                srank = self.c_rank[lo]
                pos = rem.wm_off + (srank - 1) * rem.upper_size + (k - 1)
                opcount.bump(1)
                return _read_bits(self.wy, pos, 1) == 1
        code = self._y_code(rem, ra - self.c_ds[lo] - self.c_dt[lo] - 1)
        return decode_edge(code, rem.q, self.c_rank[lo], self.c_top[lo], True)

    # -- size accounting ---------------------------------------------------

    def size_report(self):
        n, m, r = self.n, self.m, len(self.removals)
        id_w = max(1, r.bit_length())
        rank_w = max((2 * rem.q for rem in self.removals), default=0).bit_length()
        dsdt_w = max((self.c_ds[v] + self.c_dt[v] + 1 for v in range(1, n + 1)),
                     default=0).bit_length()
        c_bits = n * (id_w + rank_w + 1 + 2 * dsdt_w)
        off_w = max(1, self.wy_bits.bit_length())
        rem_hdr_bits = r * (3 * off_w + 2 * (n.bit_length()) + rank_w + m.bit_length())
        a_bits = 0
        for rec in self.A[1:]:
            if rec is not None:
                a_bits += (self.raw_sparse_bits + 1).bit_length() + id_w + 2 * n.bit_length()
        f_bits = (m + 1) * n.bit_length()
        m_bits = sum(s.encoded_size_bits + 128 for s in self.M)
        sparse_payload = self.sparse_bits.encoded_size_bits if self.sparse_bits else 0
        total = self.wy_bits + sparse_payload + m_bits + c_bits + a_bits + f_bits + rem_hdr_bits
        return {
            "n": n,
            "levels": m,
            "removals": r,
            "wy_bits": self.wy_bits,
            "sparse_raw_bits": self.raw_sparse_bits,
            "sparse_payload_bits": sparse_payload,
            "membership_bits": m_bits,
            "record_bits": c_bits + a_bits + f_bits + rem_hdr_bits,
            "total_bits": total,
            "quarter_square_bits": n * n / 4,
            "triangular_bits": n * (n - 1) / 2,
        }


def build_membership(removals, n, positions=None):
    """Survivor bit sequences M'_1 .. M'_{r+1} over initial rank positions.

    M'_l marks the elements still present after removals 1..l-1; rank over
    M'_l converts an initial position into a surviving rank."""
    cur = np.ones(n, dtype=bool)
    out = [build_bitseq(cur)]
    for rem in removals:
        pos = rem.member_positions if positions is None else positions[rem.ell]
        for p in pos:
            cur[p - 1] = False
        out.append(build_bitseq(cur))
    return out


def compress_flat(levels, closure: ClosureMatrix, c_min=C_MIN, c_q=C_Q) -> CompressOutput:
    """Run the dense/sparse recursion over a flat decomposition.

    `levels` are the initial antichains in linear-extension order; `closure`
    carries the poset's strict pairs (cells inside one level are never
    read).  Raises NotFlatError when the decomposition is deeper than lg n.
    """
    n = sum(len(lv) for lv in levels)
    m = len(levels)
    # bit_length rather than ceil(log2) so the two-element, two-level
    # degenerate input stays legal
    if m > max(1, n.bit_length()):
        raise NotFlatError(f"{m} antichains exceed the lg({n}) flatness bound")
    out = CompressOutput(n, levels)
    if m <= 1 or n == 0:
        out.sparse_bits, _ = concat_build([])
        out.M = build_membership([], n)
        return out

    bits = closure.bits
    members = [None] + [np.array(lv, dtype=np.int64) for lv in levels]
    alive_mask = [None] + [np.ones(len(lv), dtype=bool) for lv in levels]
    alive_count = [0] + [len(lv) for lv in levels]
    alive0 = np.ones(n, dtype=bool)          # 0-based by element label
    levelarr = np.zeros(n, dtype=np.int64)
    idx_in_level = [0] * (n + 1)
    for k in range(1, m + 1):
        levelarr[members[k] - 1] = k
        for idx, lab in enumerate(levels[k - 1]):
            idx_in_level[lab] = idx

    # surviving cross-edge counts per initial level pair
    cnt = np.zeros((m + 2, m + 2), dtype=np.int64)
    for p in range(1, m + 1):
        for qq in range(p + 1, m + 1):
            cnt[p, qq] = int(bits[np.ix_(members[p] - 1, members[qq] - 1)].sum())

    def alive_elems(first, last):
        parts = [members[k][alive_mask[k]] for k in range(first, last + 1)]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    merged_upto = 1
    nhat = n
    sparse_parts = []
    sparse_order = []

    while m - merged_upto + 1 > 1:
        out.steps += 1
        mhat = m - merged_upto + 1
        thr = (nhat / max(1, lg(nhat))) ** 2
        dense = None
        for t in range(1, mhat):
            if t == 1:
                lo_first, lo_last = 1, merged_upto
            else:
                lo_first = lo_last = merged_upto + t - 1
            hi = merged_upto + t
            bsize = sum(alive_count[k] for k in range(lo_first, lo_last + 1)) + alive_count[hi]
            ecount = int(sum(cnt[p, hi] for p in range(lo_first, lo_last + 1)))
            if bsize >= c_min and ecount >= thr:
                dense = (t, lo_first, lo_last, hi)
                break
        if dense is None:
            up = merged_upto + 1
            lower = alive_elems(1, merged_upto)
            upper = alive_elems(up, up)
            if lower.size and upper.size:
                part = bits[np.ix_(lower - 1, upper - 1)].reshape(-1)
            else:
                part = np.zeros(0, dtype=bool)
            out.A[up] = MergeA(0, len(out.removals) + 1, len(upper), len(lower))
            sparse_parts.append(part)
            sparse_order.append(up)
            merged_upto += 1
            continue

        t, lo_first, lo_last, hi = dense
        lower = alive_elems(lo_first, lo_last)
        upper = alive_elems(hi, hi)
        adj = bits[np.ix_(lower - 1, upper - 1)]
        bsize = len(lower) + len(upper)
        qt = q_target(bsize, int(adj.sum()), c_q)
        rows, cols = best_effort_biclique(adj, qt)
        d_left = lower[rows]
        d_right = upper[cols]
        q = len(rows)
        ell = len(out.removals) + 1

        union = len(lower) + len(upper)
        for k, lab in enumerate(d_left):
            lab = int(lab)
            out.c_id[lab] = ell
            out.c_rank[lab] = k + 1
            out.c_top[lab] = 0
            upos = int(rows[k])
            out.c_ds[lab] = upos
            out.c_dt[lab] = union - 1 - upos
        for k, lab in enumerate(d_right):
            lab = int(lab)
            out.c_id[lab] = ell
            out.c_rank[lab] = q + k + 1
            out.c_top[lab] = 1
            upos = len(lower) + int(cols[k])
            out.c_ds[lab] = upos
            out.c_dt[lab] = union - 1 - upos

        w_minus = adj[rows, :].copy()
        w_plus = adj[:, cols].T.copy()

        below = alive_elems(1, lo_first - 1) if lo_first > 1 else np.zeros(0, dtype=np.int64)
        above = alive_elems(hi + 1, m) if hi < m else np.zeros(0, dtype=np.int64)
        pow2 = (1 << np.arange(q, dtype=np.int64))
        codes = []
        if below.size:
            cl = bits[np.ix_(below - 1, d_left - 1)].astype(np.int64) @ pow2
            cr = bits[np.ix_(below - 1, d_right - 1)].astype(np.int64) @ pow2
            codes.append(np.where(cl > 0, cl, np.where(cr > 0, (1 << q) + cr - 1, 0)))
        if above.size:
            cl = bits[np.ix_(d_left - 1, above - 1)].astype(np.int64).T @ pow2
            cr = bits[np.ix_(d_right - 1, above - 1)].astype(np.int64).T @ pow2
            codes.append(np.where(cr > 0, cr, np.where(cl > 0, (1 << q) + cl - 1, 0)))
        y_vals = np.concatenate(codes) if codes else np.zeros(0, dtype=np.int64)

        positions = tuple(
            int(out.F[out.level_of[int(lab)]] + out.rank_of[int(lab)])
            for lab in list(d_left) + list(d_right)
        )
        out.removals.append(DenseRemoval(
            ell=ell,
            pair_index=t,
            lower_levels=(lo_first, lo_last),
            upper_level=hi,
            cert=BicliqueCertificate(tuple(int(v) for v in d_left),
                                     tuple(int(v) for v in d_right)),
            q=q,
            lower_size=len(lower),
            upper_size=len(upper),
            member_positions=positions,
            w_minus=w_minus,
            w_plus=w_plus,
            y_vals=y_vals,
            y_width=q + 1,
        ))

        # retire the members: per-level alive masks, global mask, pair counts
        for lab in [int(v) for v in d_left] + [int(v) for v in d_right]:
            i0 = lab - 1
            lv = int(levelarr[i0])
            row = bits[i0] & alive0
            col = bits[:, i0] & alive0
            outc = np.bincount(levelarr[row], minlength=m + 2)
            inc = np.bincount(levelarr[col], minlength=m + 2)
            for w in range(1, m + 1):
                if w > lv:
                    cnt[lv, w] -= outc[w]
                elif w < lv:
                    cnt[w, lv] -= inc[w]
            alive0[i0] = False
            alive_mask[lv][idx_in_level[lab]] = False
            alive_count[lv] -= 1
        nhat -= 2 * q

    out.sparse_bits, offsets = concat_build(sparse_parts)
    out.raw_sparse_bits = out.sparse_bits.length
    for lv, off in zip(sparse_order, offsets):
        out.A[lv].seq_offset = off
    out.M = build_membership(out.removals, n)

    # pack the W/Y payload stream
    pieces = []
    bitpos = 0
    for rem in out.removals:
        rem.wm_off = bitpos
        pieces.append(rem.w_minus.reshape(-1))
        bitpos += rem.w_minus.size
        rem.wp_off = bitpos
        pieces.append(rem.w_plus.reshape(-1))
        bitpos += rem.w_plus.size
        rem.y_off = bitpos
        if rem.y_vals.size:
            ybits = ((rem.y_vals[:, None] >> np.arange(rem.y_width, dtype=np.int64)) & 1)
            pieces.append(ybits.reshape(-1).astype(bool))
        bitpos += rem.y_vals.size * rem.y_width
    flat = np.concatenate([p.astype(np.uint8) for p in pieces]) if pieces \
        else np.zeros(0, dtype=np.uint8)
    out.wy = np.packbits(flat, bitorder="little").tobytes()
    out.wy_bits = bitpos
    return out


def query_flat(co: CompressOutput, a, b):
    """Does a precede b in the compressed flat poset?  Elements on the same
    initial antichain are incomparable; a query against the level order is
    False without probing."""
    if not (1 <= a <= co.n and 1 <= b <= co.n):
        raise IndexError(f"element out of range [1, {co.n}]")
    if a == b:
        raise ValueError("query_flat requires two distinct elements")
    opcount.bump(2)
    la, lb = co.level_of[a], co.level_of[b]
    if la >= lb:
        return False
    return co.edge_query(a, b)


def compress_size_report(co: CompressOutput):
    return co.size_report()
