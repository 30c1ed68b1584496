"""Versioned binary container for built oracles.

Layout: magic "SPOS", version u16, mode u8, reserved u8, then a section
directory (count u32; per entry an 8-byte tag, u64 offset, u64 length) and
the section payloads.  All scalar integers are little-endian; offsets are
8 bytes.  Bulk arrays are bit-packed with their widths recorded, and bit
sequences use their own self-describing section format.

Loading rebuilds an oracle that answers byte-for-byte like the one saved;
saving is deterministic, so identical builds give identical files.
"""

from __future__ import annotations

import struct

import numpy as np

from .bitseq import _read_bits, deserialize_bitseq, pack_fixed, serialize_bitseq
from .compress import INF, CompressOutput, DenseRemoval, MergeA
from .flatten import FlattenOutput, MergeRecord
from .oracle import (
    ReachabilityOracle,
    ReductionIndex,
    SuccinctPoset,
    TransitiveRelationOracle,
)

MAGIC = b"SPOS"
VERSION = 1

MODE_POSET = 1
MODE_REDUCTION = 2
MODE_DIGRAPH = 3
MODE_RELATION = 4

MODE_NAMES = {
    MODE_POSET: "poset",
    MODE_REDUCTION: "reduction",
    MODE_DIGRAPH: "digraph",
    MODE_RELATION: "relation",
}


class ContainerError(ValueError):
    """Corrupt or unreadable container."""


def _u64(x):
    return int(x).to_bytes(8, "little")


def _tag(name):
    return name.encode("ascii").ljust(8, b"\0")


def _pack_list(vals, width):
    return _u64(len(vals)) + _u64(width) + pack_fixed(vals, width)


def _unpack_list(buf, pos):
    count = int.from_bytes(buf[pos:pos + 8], "little")
    width = int.from_bytes(buf[pos + 8:pos + 16], "little")
    pos += 16
    nbytes = -(-count * width // 8)
    raw = bytes(buf[pos:pos + nbytes])
    vals = [_read_bits(raw, i * width, width) for i in range(count)]
    return vals, pos + nbytes


def _width_for(vals):
    return max((int(v) for v in vals), default=0).bit_length()


# -- flatten sections --------------------------------------------------------


def _write_flatten(f: FlattenOutput):
    n = f.n
    lw = _width_for(f.orig_level[1:]) if n else 0
    rw = _width_for(f.orig_rank[1:]) if n else 0
    slw = _width_for(f.res_level[1:]) if n else 0
    srw = _width_for(f.res_rank[1:]) if n else 0
    lookup = (
        _u64(n) + _u64(f.gamma)
        + _pack_list(f.orig_level[1:], lw)
        + _pack_list(f.orig_rank[1:], rw)
        + _pack_list(f.res_level[1:], slw)
        + _pack_list(f.res_rank[1:], srw)
    )
    recs = sorted(f.records.items())
    body = _u64(len(recs))
    for orig, rec in recs:
        body += _u64(orig) + _u64(rec.seq_offset) + _u64(rec.lower_len) + _u64(rec.upper_len)
    return {
        "LOOKUP": lookup,
        "FLATREC": body,
        "FLATBITS": serialize_bitseq(f.merged_bits),
    }


def _levels_from(res_level, res_rank, n):
    m = max(res_level[1:], default=0)
    levels = [[] for _ in range(m)]
    order = sorted(range(1, n + 1), key=lambda lab: (res_level[lab], res_rank[lab]))
    for lab in order:
        levels[res_level[lab] - 1].append(lab)
    return levels


def _groups_from(orig_level, res_level, n):
    per = {}
    for lab in range(1, n + 1):
        key = (res_level[lab], orig_level[lab])
        per[key] = per.get(key, 0) + 1
    m = max((res_level[lab] for lab in range(1, n + 1)), default=0)
    groups = []
    for r in range(1, m + 1):
        sizes = [per[k] for k in sorted(per) if k[0] == r]
        groups.append(sizes)
    return groups


def _read_flatten(sections):
    buf = sections["LOOKUP"]
    n = int.from_bytes(buf[0:8], "little")
    gamma = int.from_bytes(buf[8:16], "little")
    pos = 16
    orig_level, pos = _unpack_list(buf, pos)
    orig_rank, pos = _unpack_list(buf, pos)
    res_level, pos = _unpack_list(buf, pos)
    res_rank, pos = _unpack_list(buf, pos)
    orig_level = [0] + orig_level
    orig_rank = [0] + orig_rank
    res_level = [0] + res_level
    res_rank = [0] + res_rank

    buf = sections["FLATREC"]
    count = int.from_bytes(buf[0:8], "little")
    records = {}
    pos = 8
    for _ in range(count):
        orig = int.from_bytes(buf[pos:pos + 8], "little")
        off = int.from_bytes(buf[pos + 8:pos + 16], "little")
        lo = int.from_bytes(buf[pos + 16:pos + 24], "little")
        up = int.from_bytes(buf[pos + 24:pos + 32], "little")
        records[orig] = MergeRecord(off, lo, up)
        pos += 32

    merged_bits, _ = deserialize_bitseq(sections["FLATBITS"])
    return FlattenOutput(
        n=n,
        gamma=gamma,
        orig_level=orig_level,
        orig_rank=orig_rank,
        res_level=res_level,
        res_rank=res_rank,
        residual_levels=_levels_from(res_level, res_rank, n),
        records=records,
        merged_bits=merged_bits,
        raw_bits=merged_bits.length,
        merge_groups=_groups_from(orig_level, res_level, n),
    )


# -- compress sections ---------------------------------------------------------


def _write_compress(co: CompressOutput):
    n = co.n
    r = len(co.removals)
    ids = [0 if co.c_id[v] == INF else co.c_id[v] for v in range(1, n + 1)]
    idw = _width_for(ids)
    rkw = _width_for(co.c_rank[1:]) if n else 0
    dsw = _width_for(co.c_ds[1:]) if n else 0
    dtw = _width_for(co.c_dt[1:]) if n else 0
    crec = (
        _u64(n)
        + _pack_list(ids, idw)
        + _pack_list(co.c_rank[1:], rkw)
        + _pack_list(co.c_top[1:], 1)
        + _pack_list(co.c_ds[1:], dsw)
        + _pack_list(co.c_dt[1:], dtw)
    )
    abody = _u64(co.m)
    for lv in range(1, co.m + 1):
        rec = co.A[lv]
        if rec is None:
            abody += _u64(0)
        else:
            abody += _u64(1) + _u64(rec.seq_offset) + _u64(rec.delta) \
                + _u64(rec.upper_len) + _u64(rec.lower_len)
    rbody = _u64(r)
    for rem in co.removals:
        rbody += b"".join(_u64(x) for x in (
            rem.pair_index, rem.lower_levels[0], rem.lower_levels[1],
            rem.upper_level, rem.q, rem.lower_size, rem.upper_size,
            rem.wm_off, rem.wp_off, rem.y_off, rem.y_width,
        ))
    mbody = _u64(len(co.M)) + b"".join(serialize_bitseq(s) for s in co.M)
    return {
        "CRECORD": crec,
        "AMERGE": abody,
        "REMOVALS": rbody,
        "WYDATA": _u64(co.wy_bits) + co.wy,
        "SPARSE": serialize_bitseq(co.sparse_bits),
        "MEMBER": mbody,
    }


def _read_compress(sections, levels):
    co = CompressOutput(sum(len(lv) for lv in levels), levels)
    n = co.n
    buf = sections["CRECORD"]
    assert int.from_bytes(buf[0:8], "little") == n
    pos = 8
    ids, pos = _unpack_list(buf, pos)
    ranks, pos = _unpack_list(buf, pos)
    tops, pos = _unpack_list(buf, pos)
    ds, pos = _unpack_list(buf, pos)
    dt, pos = _unpack_list(buf, pos)
    co.c_id = [INF] + [INF if v == 0 else v for v in ids]
    co.c_rank = [0] + ranks
    co.c_top = [0] + tops
    co.c_ds = [0] + ds
    co.c_dt = [0] + dt

    buf = sections["AMERGE"]
    m = int.from_bytes(buf[0:8], "little")
    pos = 8
    co.A = [None] * (m + 1)
    for lv in range(1, m + 1):
        flag = int.from_bytes(buf[pos:pos + 8], "little")
        pos += 8
        if flag:
            vals = struct.unpack_from("<4Q", buf, pos)
            pos += 32
            co.A[lv] = MergeA(vals[0], vals[1], vals[2], vals[3])

    buf = sections["REMOVALS"]
    r = int.from_bytes(buf[0:8], "little")
    pos = 8
    for ell in range(1, r + 1):
        vals = struct.unpack_from("<11Q", buf, pos)
        pos += 88
        co.removals.append(DenseRemoval(
            ell=ell,
            pair_index=vals[0],
            lower_levels=(vals[1], vals[2]),
            upper_level=vals[3],
            cert=None,
            q=vals[4],
            lower_size=vals[5],
            upper_size=vals[6],
            member_positions=(),
            w_minus=None,
            w_plus=None,
            y_vals=np.zeros(0, dtype=np.int64),
            y_width=vals[10],
            wm_off=vals[7],
            wp_off=vals[8],
            y_off=vals[9],
        ))

    buf = sections["WYDATA"]
    co.wy_bits = int.from_bytes(buf[0:8], "little")
    co.wy = bytes(buf[8:])
    co.sparse_bits, _ = deserialize_bitseq(sections["SPARSE"])
    co.raw_sparse_bits = co.sparse_bits.length
    buf = sections["MEMBER"]
    count = int.from_bytes(buf[0:8], "little")
    pos = 8
    for _ in range(count):
        seq, pos = deserialize_bitseq(buf, pos)
        co.M.append(seq)
    return co


def _write_poset(s: SuccinctPoset):
    sections = {"PMETA": _u64(s.n) + _u64(s.gamma)}
    sections.update(_write_flatten(s.flat))
    sections.update(_write_compress(s.dense))
    return sections


def _read_poset(sections):
    buf = sections["PMETA"]
    flat = _read_flatten(sections)
    dense = _read_compress(sections, flat.residual_levels)
    return SuccinctPoset(
        int.from_bytes(buf[0:8], "little"),
        int.from_bytes(buf[8:16], "little"),
        flat,
        dense,
    )


# -- public API -----------------------------------------------------------------


def serialize(oracle) -> bytes:
    if isinstance(oracle, SuccinctPoset):
        mode, sections = MODE_POSET, _write_poset(oracle)
    elif isinstance(oracle, ReductionIndex):
        mode = MODE_REDUCTION
        sections = {"RMETA": _u64(oracle.n)}
        sections.update(_write_flatten(oracle.flat))
    elif isinstance(oracle, ReachabilityOracle):
        mode = MODE_DIGRAPH
        cw = max(1, _width_for(oracle.component_of[1:]))
        sections = {
            "GMETA": _u64(oracle.n),
            "SCCMAP": _pack_list(oracle.component_of[1:], cw),
        }
        sections.update(_write_poset(oracle.poset))
    elif isinstance(oracle, TransitiveRelationOracle):
        mode = MODE_RELATION
        cw = max(1, _width_for(oracle.quasi.component_of[1:]))
        sections = {
            "TMETA": _u64(oracle.n),
            "REFLEX": serialize_bitseq(oracle.reflexive_bits),
            "SCCMAP": _pack_list(oracle.quasi.component_of[1:], cw),
        }
        sections.update(_write_poset(oracle.quasi.poset))
    else:
        raise TypeError(f"cannot serialize {type(oracle).__name__}")

    names = sorted(sections)
    header = MAGIC + struct.pack("<HBB", VERSION, mode, 0)
    dir_size = 4 + len(names) * 24
    offset = len(header) + dir_size
    directory = struct.pack("<I", len(names))
    body = b""
    for name in names:
        payload = sections[name]
        directory += _tag(name) + _u64(offset) + _u64(len(payload))
        body += payload
        offset += len(payload)
    return header + directory + body


def deserialize(data):
    try:
        if data[:4] != MAGIC:
            raise ContainerError("bad magic; not an oracle container")
        version, mode, _ = struct.unpack_from("<HBB", data, 4)
        if version != VERSION:
            raise ContainerError(f"unsupported container version {version}")
        (count,) = struct.unpack_from("<I", data, 8)
        sections = {}
        pos = 12
        for _ in range(count):
            tag = data[pos:pos + 8].rstrip(b"\0").decode("ascii")
            off = int.from_bytes(data[pos + 8:pos + 16], "little")
            ln = int.from_bytes(data[pos + 16:pos + 24], "little")
            pos += 24
            if off + ln > len(data):
                raise ContainerError(f"section {tag} runs past end of file")
            sections[tag] = data[off:off + ln]
        if mode == MODE_POSET:
            return _read_poset(sections)
        if mode == MODE_REDUCTION:
            n = int.from_bytes(sections["RMETA"][0:8], "little")
            return ReductionIndex(n, _read_flatten(sections))
        if mode == MODE_DIGRAPH:
            n = int.from_bytes(sections["GMETA"][0:8], "little")
            comp, _ = _unpack_list(sections["SCCMAP"], 0)
            return ReachabilityOracle(n, [0] + comp, _read_poset(sections))
        if mode == MODE_RELATION:
            n = int.from_bytes(sections["TMETA"][0:8], "little")
            refl, _ = deserialize_bitseq(sections["REFLEX"])
            comp, _ = _unpack_list(sections["SCCMAP"], 0)
            poset = _read_poset(sections)
            quasi = ReachabilityOracle(n, [0] + comp, poset)
            return TransitiveRelationOracle(n, refl, quasi)
        raise ContainerError(f"unknown mode {mode}")
    except ContainerError:
        raise
    except Exception as exc:
        raise ContainerError(f"container is corrupt: {exc}") from exc


def mode_of(oracle):
    if isinstance(oracle, SuccinctPoset):
        return "poset"
    if isinstance(oracle, ReductionIndex):
        return "reduction"
    if isinstance(oracle, ReachabilityOracle):
        return "digraph"
    if isinstance(oracle, TransitiveRelationOracle):
        return "relation"
    raise TypeError(type(oracle).__name__)


def save(oracle, path):
    blob = serialize(oracle)
    with open(path, "wb") as fh:
        fh.write(blob)
    return blob


def load(path):
    with open(path, "rb") as fh:
        data = fh.read()
    return deserialize(data)
