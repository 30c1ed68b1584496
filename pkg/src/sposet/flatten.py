"""Height flattening: merge runs of small consecutive antichains.

A merge step fuses two consecutive antichains and emits their cross edges
as one bit sequence, sectioned by the rank of the lower element; each
section holds one bit per upper element.  The left-to-right schedule keeps
the upper antichain of every merge a pristine original level, so merge
records can be keyed by original level index and an element's rank inside
the accumulated lower antichain is its own level rank plus the recorded
lower length of its level's merge.

After the run at most `gamma` antichains remain, and any two elements that
ended up in the same residual antichain can be compared with one access
into the concatenated output.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import opcount
from .bitseq import build_bitseq, concat_build, lg
from .order import AntichainDecomposition, ClosureMatrix


class FlattenAnswer(enum.Enum):
    YES = "yes"
    NO = "no"
    DIFFERENT_ANTICHAINS = "different-antichains"


@dataclass
class MergeRecord:
    seq_offset: int     # 1-based bit position of this merge's output
    lower_len: int      # lower antichain size when the merge ran
    upper_len: int


@dataclass
class FlattenOutput:
    n: int
    gamma: int
    orig_level: list
    orig_rank: list
    res_level: list
    res_rank: list
    residual_levels: list
    records: dict            # original upper-level index -> MergeRecord
    merged_bits: object
    raw_bits: int
    merge_groups: list       # per residual level: original level sizes

    @property
    def aux_bits(self):
        """Metadata accounted at packed widths (lookup arrays + records)."""
        if self.n == 0:
            return 0
        h = len(self.orig_level) and max(self.orig_level[1:])
        widths = (
            h.bit_length()
            + max(self.orig_rank[1:]).bit_length()
            + len(self.residual_levels).bit_length()
            + max(self.res_rank[1:]).bit_length()
        )
        rec = 1 + (self.raw_bits + 1).bit_length() + 2 * self.n.bit_length()
        return self.n * widths + h * rec


def merge_step(lower, upper, closure: ClosureMatrix):
    """Fuse two consecutive antichains; emit their cross-edge bits.

    Returns (merged antichain, bits) where bits is laid out in sections
    B^x for x in [1, |lower|], each |upper| long: B^x[y] = 1 iff
    lower(x) precedes upper(y).
    """
    if set(lower) & set(upper):
        raise AssertionError("merge_step: antichains overlap")
    lo = np.array(lower, dtype=np.int64) - 1
    up = np.array(upper, dtype=np.int64) - 1
    if lo.size and up.size and closure.bits[np.ix_(up, lo)].any():
        raise AssertionError("merge_step: edges run from upper to lower; "
                             "antichains are not in consecutive order")
    bits = closure.bits[np.ix_(lo, up)].reshape(-1) if lo.size and up.size \
        else np.zeros(0, dtype=bool)
    return list(lower) + list(upper), bits


def flatten(d: AntichainDecomposition, closure: ClosureMatrix, gamma: int) -> FlattenOutput:
    """Left-to-right greedy merge schedule with threshold 2n/gamma.

    The scan index stays put after a merge and advances only when the pair
    is too big, so each original level above a group bottom is the upper
    antichain of exactly one merge.
    """
    if gamma < 1:
        raise ValueError("gamma must be at least 1")
    n = sum(len(lv) for lv in d.levels)
    work = [
        {"orig": idx + 1, "elems": list(lv), "sizes": [len(lv)]}
        for idx, lv in enumerate(d.levels)
    ]
    parts = []
    emit_order = []
    records = {}
    i = 0
    while i < len(work) - 1:
        lo, up = work[i], work[i + 1]
        if (len(lo["elems"]) + len(up["elems"])) * gamma <= 2 * n:
            merged, bits = merge_step(lo["elems"], up["elems"], closure)
            records[up["orig"]] = MergeRecord(0, len(lo["elems"]), len(up["elems"]))
            emit_order.append(up["orig"])
            parts.append(bits)
            lo["elems"] = merged
            lo["sizes"].extend(up["sizes"])
            del work[i + 1]
        else:
            i += 1

    merged_bits, offsets = concat_build(parts)
    for orig, off in zip(emit_order, offsets):
        records[orig].seq_offset = off

    orig_level = list(d.height_of)
    orig_rank = list(d.rank_of)
    res_level = [0] * (n + 1)
    res_rank = [0] * (n + 1)
    residual_levels = []
    for ridx, entry in enumerate(work, start=1):
        residual_levels.append(entry["elems"])
        for r, lab in enumerate(entry["elems"], start=1):
            res_level[lab] = ridx
            res_rank[lab] = r

    out = FlattenOutput(
        n=n,
        gamma=gamma,
        orig_level=orig_level,
        orig_rank=orig_rank,
        res_level=res_level,
        res_rank=res_rank,
        residual_levels=residual_levels,
        records=records,
        merged_bits=merged_bits,
        raw_bits=int(merged_bits.length),
        merge_groups=[entry["sizes"] for entry in work],
    )
    assert len(residual_levels) <= max(gamma, 1)
    return out


def flatten_query(f: FlattenOutput, a, b) -> FlattenAnswer:
    """Does a precede b, for a pair inside one residual antichain?

    Pairs in different residual antichains are reported as such; pairs from
    the same original level are incomparable.  Otherwise one access into the
    merge output decides, and a query against the level order's direction is
    a No without a probe.
    """
    if a == b:
        raise ValueError("flatten_query requires two distinct elements")
    if not (1 <= a <= f.n and 1 <= b <= f.n):
        raise IndexError(f"element out of range [1, {f.n}]")
    opcount.bump(2)
    if f.res_level[a] != f.res_level[b]:
        return FlattenAnswer.DIFFERENT_ANTICHAINS
    ia, ib = f.orig_level[a], f.orig_level[b]
    if ia == ib or ia > ib:
        return FlattenAnswer.NO
    rec = f.records[ib]
    opcount.bump(2)
    lower_rec = f.records.get(ia)
    z = f.orig_rank[a] + (lower_rec.lower_len if lower_rec else 0)
    pos = rec.seq_offset + (z - 1) * rec.upper_len + f.orig_rank[b] - 1
    bit = f.merged_bits.access(pos)
    return FlattenAnswer.YES if bit else FlattenAnswer.NO


def group_output_bound(sizes):
    """Pair-count ceiling for one merged group: n_{s,t}(n_{s,t}-1)/2."""
    total = sum(sizes)
    return total * (total - 1) // 2


def group_raw_bits(sizes):
    """Exact bits a bottom-up merge of the group emits."""
    acc = 0
    out = 0
    for k, sz in enumerate(sizes):
        if k:
            out += acc * sz
        acc += sz
    return out


def flatten_output_size(f: FlattenOutput, c_budget=4):
    """Raw and compressed output size against the c * n^2 / gamma budget."""
    budget = c_budget * f.n * f.n / max(1, f.gamma)
    groups = []
    for sizes in f.merge_groups:
        groups.append({
            "sizes": list(sizes),
            "raw_bits": group_raw_bits(sizes),
            "pair_bound": group_output_bound(sizes),
        })
    return {
        "n": f.n,
        "gamma": f.gamma,
        "raw_bits": f.raw_bits,
        "compressed_bits": f.merged_bits.encoded_size_bits,
        "aux_bits": f.aux_bits,
        "budget_bits": budget,
        "groups": groups,
    }
