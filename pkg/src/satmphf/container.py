"""Binary container shared by all three MPHF kinds.

Layout: b"MPHF", version byte, kind byte, then a kind-specific payload.
Integers are little-endian; bit vectors are packed least significant bit
first within each byte.
"""

from __future__ import annotations

import io
import struct

import numpy as np

from .errors import CorruptStructure, InvalidArgument
from .matching_mphf import MatchingMphf, ShardedMphf
from .sat_mphf import SatMphf
from .xorsat import FilterBlock, XorsatFilter

MAGIC = b"MPHF"
VERSION = 1
KIND_SAT, KIND_MATCHING, KIND_SHARDED = 1, 2, 3
_ENCODING_CODES = {"cubic": 0, "compact": 1}
_ENCODING_NAMES = {v: k for k, v in _ENCODING_CODES.items()}
PREAMBLE_BYTES = len(MAGIC) + 1


def _pack_bits(bits) -> bytes:
    return np.packbits(np.asarray(bits, dtype=np.uint8), bitorder="little").tobytes()


def _unpack_bits(raw: bytes, count: int) -> np.ndarray:
    return np.unpackbits(np.frombuffer(raw, dtype=np.uint8), count=count, bitorder="little")


class _Reader:
    def __init__(self, data: bytes):
        self.buf = io.BytesIO(data)

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        raw = self.buf.read(size)
        if len(raw) != size:
            raise CorruptStructure("container ended early")
        return struct.unpack(fmt, raw)

    def bits(self, count: int) -> np.ndarray:
        nbytes = (count + 7) // 8
        raw = self.buf.read(nbytes)
        if len(raw) != nbytes:
            raise CorruptStructure("container ended early")
        return _unpack_bits(raw, count)

    def done(self) -> None:
        if self.buf.read(1):
            raise CorruptStructure("trailing bytes after payload")


def _matching_body(h: MatchingMphf) -> bytes:
    f = h.filter
    out = [struct.pack("<QQB", h.seed, h.n, h.k),
           struct.pack("<QBQI", f.seed, f.k_f, f.item_count, len(f.blocks))]
    out += [struct.pack("<BI", b.attempt, b.slots) for b in f.blocks]
    all_bits = np.concatenate([b.bits for b in f.blocks]) if f.blocks else np.zeros(0, np.uint8)
    out.append(_pack_bits(all_bits))
    return b"".join(out)


def _read_matching(r: _Reader) -> MatchingMphf:
    seed, n, k = r.take("<QQB")
    fseed, k_f, count, nb = r.take("<QBQI")
    heads = [r.take("<BI") for _ in range(nb)]
    bits = r.bits(sum(s for _, s in heads))
    blocks, at = [], 0
    for attempt, slots in heads:
        blocks.append(FilterBlock(attempt, slots, bits[at:at + slots].copy()))
        at += slots
    if n < 1 or k < 1:
        raise CorruptStructure("matching record has n or k equal to 0")
    return MatchingMphf(seed, n, k, XorsatFilter(fseed, k_f, count, tuple(blocks)))


def dumps(h) -> bytes:
    if isinstance(h, SatMphf):
        body = struct.pack("<QQQBB", h.seed, h.n, h.m, h.k, _ENCODING_CODES[h.encoding]) + _pack_bits(h.bits)
        kind = KIND_SAT
    elif isinstance(h, MatchingMphf):
        body, kind = _matching_body(h), KIND_MATCHING
    elif isinstance(h, ShardedMphf):
        parts = [struct.pack("<QI", h.seed, len(h.blocks)),
                 struct.pack(f"<{len(h.offsets)}Q", *h.offsets)]
        parts += [_matching_body(b) for b in h.blocks]
        body, kind = b"".join(parts), KIND_SHARDED
    else:
        raise InvalidArgument(f"cannot serialize {type(h).__name__}")
    return MAGIC + bytes((VERSION, kind)) + body


def loads(data: bytes):
    if data[:4] != MAGIC:
        raise CorruptStructure("bad magic")
    if len(data) < 6 or data[4] != VERSION:
        raise CorruptStructure("unsupported container version")
    kind = data[5]
    r = _Reader(data[6:])
    if kind == KIND_SAT:
        seed, n, m, k, enc = r.take("<QQQBB")
        if enc not in _ENCODING_NAMES:
            raise CorruptStructure(f"unknown encoding code {enc}")
        bits = tuple(int(b) for b in r.bits(m))
        h = SatMphf(seed, n, m, k, _ENCODING_NAMES[enc], bits)
    elif kind == KIND_MATCHING:
        h = _read_matching(r)
    elif kind == KIND_SHARDED:
        seed, nb = r.take("<QI")
        offsets = r.take(f"<{nb + 1}Q")
        blocks = tuple(_read_matching(r) for _ in range(nb))
        if offsets[0] != 0 or any(offsets[i + 1] - offsets[i] != b.n for i, b in enumerate(blocks)):
            raise CorruptStructure("offsets disagree with block sizes")
        h = ShardedMphf(seed, blocks, tuple(offsets))
    else:
        raise CorruptStructure(f"unknown record kind {kind}")
    r.done()
    return h


def save(h, path) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps(h))


def load(path):
    with open(path, "rb") as fh:
        return loads(fh.read())


def payload_bits(h) -> int:
    """Container size in bits, not counting magic and version."""
    return 8 * (len(dumps(h)) - PREAMBLE_BYTES)


def kind_name(h) -> str:
    for cls, name in ((SatMphf, "sat"), (MatchingMphf, "matching"), (ShardedMphf, "sharded")):
        if isinstance(h, cls):
            return name
    raise InvalidArgument(f"not an MPHF: {type(h).__name__}")
