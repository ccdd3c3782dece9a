"""Trajectory serialization: JSON-lines and a compact binary framing.

Binary format: magic b"LERW", version u16 little-endian, then one
zig-zag varint pair (du, dv) per step, deltas from the previous vertex
(the first pair is the delta from the origin).
"""

from __future__ import annotations

import json
from typing import BinaryIO, Iterable, TextIO

import numpy as np

MAGIC = b"LERW"
VERSION = 1


def _zigzag(n: int) -> int:
    return (n << 1) ^ (n >> 63) if n < 0 else n << 1


def _unzigzag(z: int) -> int:
    return (z >> 1) ^ -(z & 1)


def _write_varint(out: bytearray, n: int) -> None:
    while True:
        b = n & 0x7F
        n >>= 7
        if n:
            out.append(b | 0x80)
        else:
            out.append(b)
            return


def _read_varint(data: bytes, pos: int) -> tuple[int, int]:
    shift = 0
    val = 0
    while True:
        b = data[pos]
        pos += 1
        val |= (b & 0x7F) << shift
        if not b & 0x80:
            return val, pos
        shift += 7


def write_binary(fh: BinaryIO, positions: np.ndarray) -> None:
    out = bytearray()
    out += MAGIC
    out += VERSION.to_bytes(2, "little")
    prev_u = prev_v = 0
    for u, v in positions:
        _write_varint(out, _zigzag(int(u) - prev_u))
        _write_varint(out, _zigzag(int(v) - prev_v))
        prev_u, prev_v = int(u), int(v)
    fh.write(bytes(out))


def read_binary(fh: BinaryIO) -> np.ndarray:
    data = fh.read()
    if data[:4] != MAGIC:
        raise ValueError("bad magic; not a LERW trajectory file")
    version = int.from_bytes(data[4:6], "little")
    if version != VERSION:
        raise ValueError(f"unsupported trajectory version {version}")
    pos = 6
    us, vs = [], []
    u = v = 0
    while pos < len(data):
        zu, pos = _read_varint(data, pos)
        zv, pos = _read_varint(data, pos)
        u += _unzigzag(zu)
        v += _unzigzag(zv)
        us.append(u)
        vs.append(v)
    return np.array([us, vs], dtype=np.int64).T


def write_jsonl(fh: TextIO, positions: Iterable) -> None:
    for n, (u, v) in enumerate(positions):
        fh.write(json.dumps({"n": n, "u": int(u), "v": int(v)}) + "\n")


def read_jsonl(fh: TextIO) -> np.ndarray:
    us, vs = [], []
    for line in fh:
        line = line.strip()
        if not line:
            continue
        rec = json.loads(line)
        us.append(rec["u"])
        vs.append(rec["v"])
    return np.array([us, vs], dtype=np.int64).T


def path_to_json(vertices) -> list:
    """Vertex serialization: JSON array of [u, v] integer pairs."""
    return [[int(u), int(v)] for u, v in vertices]
