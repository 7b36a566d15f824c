"""
Binary index files.

Layout (all integers little-endian)::

    b"GEDI1\\0\\0\\0"
    u32 header length, header (canonical JSON), u32 CRC-32 of the header
    sections, each: 4-byte tag, u64 payload length, payload, u32 CRC-32

Sections, in file order:

``YSYM``  symbols of Y as i32 (Y and BOTH indexes)
``TREE``  per repetition: u32 repetition, u64 node count, 16-byte digest of
          the tolerances (trees are regenerated from the seed on load and
          checked against the digest)
``SAMP``  per repetition: u32 repetition, then per internal depth u64 sample
          count, u32 per-node sizes, u32 delta-encoded positions
``MTAB``  per repetition: u32 repetition, then per internal depth u64 entry
          count, i64 keys, i32 shifts
``XFPS``  per repetition: u32 repetition, i64 fingerprint per node
``SDTB``  shared shifted-distance rows: u8 item width, u64 row count, u64 row
          length, then per row (i32 depth, i32 node index, i32 shift) and the
          row values

Hash coefficients are not stored; they are regenerated from the seed.
Saving is a pure function of the in-memory index, so load followed by save
reproduces the file byte for byte.
"""

from __future__ import annotations

import json
import os
import struct
import zlib

import numpy as np

from .config import Resolved
from .index import (SIDE_BOTH, SIDE_X, SIDE_Y, Repetition, XIndex, YIndex, tree_digest,
                    tree_for)
from .layout import PaddedY, margin_for
from .matching import MatchingIndex, build_samples
from .shifted import ShiftedDistanceIndex
from .strings import Text

MAGIC = b"GEDI1\0\0\0"
VERSION = 1


class IndexFormatError(ValueError):
    """Malformed, truncated or corrupted index file."""


# -- encoding helpers ----------------------------------------------------------

def _arr(a, dtype: str) -> bytes:
    return np.ascontiguousarray(a, dtype=dtype).tobytes()


def _section(tag: bytes, payload: bytes) -> bytes:
    return tag + struct.pack("<Q", len(payload)) + payload + struct.pack("<I", zlib.crc32(payload))


def _header_bytes(header: dict) -> bytes:
    return json.dumps(header, sort_keys=True, separators=(",", ":")).encode()


class _Reader:
    def __init__(self, buf: bytes):
        self.buf = memoryview(buf)
        self.pos = 0

    def take(self, n: int) -> memoryview:
        if self.pos + n > len(self.buf):
            raise IndexFormatError("truncated index file")
        out = self.buf[self.pos:self.pos + n]
        self.pos += n
        return out

    def u8(self) -> int:
        return self.take(1)[0]

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def i32x3(self):
        return struct.unpack("<iii", self.take(12))

    def array(self, dtype: str, count: int) -> np.ndarray:
        size = np.dtype(dtype).itemsize * count
        return np.frombuffer(self.take(size), dtype=dtype, count=count).copy()

    @property
    def done(self) -> bool:
        return self.pos == len(self.buf)


# -- save ------------------------------------------------------------------------

def _header(cfg: Resolved, side: str, materialized: bool) -> dict:
    return dict(format="GEDI1", version=VERSION, side=side, materialized=bool(materialized),
                config=cfg.to_dict(), alphabet_map=dict(name=cfg.alphabet, coding="code point"))


def _tree_section(r: int, n_nodes: int, digest: bytes) -> bytes:
    return _section(b"TREE", struct.pack("<IQ", r, n_nodes) + digest)


def _samp_payload(r: int, samples) -> bytes:
    parts = [struct.pack("<I", r)]
    for lv in samples.levels:
        parts += [struct.pack("<Q", lv.pos.size), _arr(np.diff(lv.ptr), "<u4"),
                  _arr(_samp_deltas(lv), "<u4")]
    return b"".join(parts)


def _mtab_payload(r: int, tables) -> bytes:
    parts = [struct.pack("<I", r)]
    for keys, shifts in tables:
        parts += [struct.pack("<Q", keys.size), _arr(keys, "<i8"), _arr(shifts, "<i4")]
    return b"".join(parts)


def _sd_payload(sd: ShiftedDistanceIndex) -> bytes:
    width = np.dtype(sd.dtype).itemsize
    row_len = 2 * sd.M + 1
    parts = [struct.pack("<BQQ", width, len(sd.rows), row_len)]
    tag = "<i2" if width == 2 else "<i4"
    for key in sorted(sd.rows):
        parts.append(struct.pack("<iii", *key))
        parts.append(_arr(sd.rows[key], tag))
    return b"".join(parts)


def dumps(index) -> bytes:
    """Serialize a :class:`YIndex` or :class:`XIndex`."""
    if isinstance(index, YIndex):
        cfg = index.config
        out = [MAGIC]
        hb = _header_bytes(_header(cfg, index.side, index.materialized))
        out += [struct.pack("<I", len(hb)), hb, struct.pack("<I", zlib.crc32(hb))]
        out.append(_section(b"YSYM", _arr(index.y.core[:cfg.n], "<i4")))
        for r, rep in enumerate(index.reps):
            out.append(_tree_section(r, rep.tree.n_nodes, tree_digest(rep.tree)))
        for r, rep in enumerate(index.reps):
            out.append(_section(b"SAMP", _samp_payload(r, rep.samples)))
        for r, rep in enumerate(index.reps):
            out.append(_section(b"MTAB", _mtab_payload(r, rep.matching.tables)))
        if index.x_side is not None:
            for r, fps in enumerate(index.x_side.fingerprints):
                out.append(_section(b"XFPS", struct.pack("<I", r) + _arr(fps, "<i8")))
        out.append(_section(b"SDTB", _sd_payload(index.shifted)))
        return b"".join(out)
    if isinstance(index, XIndex):
        cfg = index.config
        hb = _header_bytes(_header(cfg, SIDE_X, False))
        out = [MAGIC, struct.pack("<I", len(hb)), hb, struct.pack("<I", zlib.crc32(hb))]
        for r, (fps, dg) in enumerate(zip(index.fingerprints, index.tree_digests)):
            out.append(_tree_section(r, fps.size, dg))
        for r, fps in enumerate(index.fingerprints):
            out.append(_section(b"XFPS", struct.pack("<I", r) + _arr(fps, "<i8")))
        return b"".join(out)
    raise TypeError(f"cannot serialize {type(index).__name__}")


def save(index, path: str) -> int:
    """Write ``index`` atomically (temp file and rename); returns bytes written."""
    data = dumps(index)
    tmp = f"{path}.tmp{os.getpid()}"
    with open(tmp, "wb") as f:
        f.write(data)
    os.replace(tmp, path)
    return len(data)


# -- load ------------------------------------------------------------------------

def read_header(buf: bytes) -> tuple[dict, _Reader]:
    rd = _Reader(buf)
    if bytes(rd.take(len(MAGIC))) != MAGIC:
        raise IndexFormatError("not a GEDI1 index (bad magic)")
    hb = bytes(rd.take(rd.u32()))
    if zlib.crc32(hb) != rd.u32():
        raise IndexFormatError("header checksum mismatch")
    header = json.loads(hb)
    if header.get("version") != VERSION:
        raise IndexFormatError(f"unsupported index version {header.get('version')}")
    return header, rd


def _sections(rd: _Reader):
    while not rd.done:
        tag = bytes(rd.take(4))
        payload = bytes(rd.take(rd.u64()))
        if zlib.crc32(payload) != rd.u32():
            raise IndexFormatError(f"checksum mismatch in section {tag.decode(errors='replace')}")
        yield tag, payload


def loads(buf: bytes):
    """Inverse of :func:`dumps`; verifies every checksum and tree digest."""
    header, rd = read_header(buf)
    cfg = Resolved.from_dict(header["config"])
    side = header["side"]
    secs: dict[bytes, list] = {}
    for tag, payload in _sections(rd):
        secs.setdefault(tag, []).append(payload)
    digests = {}
    for payload in secs.get(b"TREE", []):
        r, _ = struct.unpack("<IQ", payload[:12])
        digests[r] = payload[12:28]
    xfps = {}
    for payload in secs.get(b"XFPS", []):
        (r,) = struct.unpack("<I", payload[:4])
        xfps[r] = np.frombuffer(payload[4:], dtype="<i8").astype(np.int64)
    if side == SIDE_X:
        fps = [xfps[r] for r in range(len(xfps))]
        return XIndex(cfg, fps, [digests[r] for r in range(len(fps))])
    if side not in (SIDE_Y, SIDE_BOTH):
        raise IndexFormatError(f"unknown side {side!r}")
    sym = np.frombuffer(secs[b"YSYM"][0], dtype="<i4").astype(np.int64)
    y = PaddedY(Text(sym, cfg.alphabet_size), cfg.n_padded, margin_for(cfg.shift_bound), cfg.prime)
    tables = {}
    for payload in secs.get(b"MTAB", []):
        tr = _Reader(payload)
        r = tr.u32()
        levels = []
        for _ in range(cfg.depth):
            c = tr.u64()
            levels.append((tr.array("<i8", c).astype(np.int64), tr.array("<i4", c).astype(np.int32)))
        tables[r] = levels
    stored_pos = {}
    for payload in secs.get(b"SAMP", []):
        tr = _Reader(payload)
        r = tr.u32()
        levels = []
        for d in range(cfg.depth):
            c = tr.u64()
            sizes = tr.array("<u4", cfg.branching ** d).astype(np.int64)
            deltas = tr.array("<u4", c).astype(np.int64)
            levels.append((sizes, deltas))
        stored_pos[r] = levels
    reps = []
    for r in range(cfg.reps):
        tree = tree_for(cfg, r)
        if tree_digest(tree) != digests.get(r):
            raise IndexFormatError(f"tree digest mismatch for repetition {r}")
        samples = build_samples(tree, cfg.c_h, cfg.prime)
        if r in stored_pos:
            for lv, (sizes, deltas) in zip(samples.levels, stored_pos[r]):
                if not np.array_equal(np.diff(lv.ptr), sizes) or not np.array_equal(
                        _samp_deltas(lv), deltas):
                    raise IndexFormatError(f"sample sets differ for repetition {r}")
        reps.append(Repetition(tree, samples, MatchingIndex(tree, samples, y, tables[r])))
    tree0 = reps[0].tree
    sd = ShiftedDistanceIndex(y, tree0.S, cfg.k, tree0.level_len)
    tr = _Reader(secs[b"SDTB"][0])
    width, nrows, row_len = struct.unpack("<BQQ", tr.take(17))
    tag = "<i2" if width == 2 else "<i4"
    if row_len != 2 * sd.M + 1 or np.dtype(sd.dtype).itemsize != width:
        raise IndexFormatError("shifted-distance table shape does not match the header")
    for _ in range(nrows):
        key = tr.i32x3()
        sd.rows[key] = tr.array(tag, row_len).astype(sd.dtype)
    idx = YIndex(cfg, y, reps, sd, side=side, materialized=bool(header.get("materialized")))
    if side == SIDE_BOTH:
        fps = [xfps[r] for r in range(cfg.reps)]
        idx.x_side = XIndex(cfg, fps, [digests[r] for r in range(cfg.reps)])
    return idx


def _samp_deltas(lv) -> np.ndarray:
    # positions restart at every node; deltas restart too
    deltas = lv.pos.copy()
    if deltas.size:
        deltas[1:] -= lv.pos[:-1]
        sizes = np.diff(lv.ptr)
        starts = lv.ptr[:-1][sizes > 0]
        deltas[starts] = lv.pos[starts]
    return deltas


def load(path: str):
    with open(path, "rb") as f:
        return loads(f.read())


def peek_header(path: str) -> dict:
    """Header only, without materializing the index."""
    with open(path, "rb") as f:
        buf = f.read()
    return read_header(buf)[0]
