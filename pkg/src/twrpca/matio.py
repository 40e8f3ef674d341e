"""Binary matrix container and small image/CSV writers.

Matrix files carry one complex128 matrix: a 28-byte header (magic "TWRM",
version, dtype tag, row-major flag, dimensions, CRC32 of the preceding
header bytes) followed by the payload as little-endian interleaved
real/imaginary float64 pairs, rows*cols*16 bytes. Round trips are
bit-exact.
"""

import json
import struct
import zlib

import numpy as np

from .errors import InputError

MAGIC = b"TWRM"
VERSION = 1
DTYPE_COMPLEX128 = 1
_HEADER = struct.Struct("<4sHBBQQ")  # magic, version, dtype, row-major, rows, cols
_CRC = struct.Struct("<I")


def write_matrix(path, a):
    """Write a 2-D complex matrix (real input is widened)."""
    a = np.asarray(a)
    if a.ndim != 2:
        raise InputError(f"matrix files hold 2-D arrays, got ndim={a.ndim}")
    payload = np.ascontiguousarray(a, dtype="<c16").tobytes()
    head = _HEADER.pack(MAGIC, VERSION, DTYPE_COMPLEX128, 1, a.shape[0], a.shape[1])
    with open(path, "wb") as fh:
        fh.write(head)
        fh.write(_CRC.pack(zlib.crc32(head)))
        fh.write(payload)


def read_matrix(path):
    """Read a matrix file back; validates magic, version, dtype, checksum
    and payload length."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size + _CRC.size:
        raise InputError(f"{path}: truncated header")
    head = raw[:_HEADER.size]
    magic, version, dtype, row_major, rows, cols = _HEADER.unpack(head)
    if magic != MAGIC:
        raise InputError(f"{path}: not a TWRM matrix file")
    if version != VERSION:
        raise InputError(f"{path}: unsupported version {version}")
    if dtype != DTYPE_COMPLEX128:
        raise InputError(f"{path}: unsupported dtype tag {dtype}")
    (crc,) = _CRC.unpack(raw[_HEADER.size:_HEADER.size + _CRC.size])
    if crc != zlib.crc32(head):
        raise InputError(f"{path}: header checksum mismatch")
    payload = raw[_HEADER.size + _CRC.size:]
    expect = rows * cols * 16
    if len(payload) != expect:
        raise InputError(f"{path}: payload is {len(payload)} bytes, expected {expect}")
    flat = np.frombuffer(payload, dtype="<c16")
    order = "C" if row_major else "F"
    return flat.reshape(rows, cols, order=order).copy()


def write_pgm16(path, values):
    """Min-max normalized 16-bit PGM (big-endian per the format), with the
    normalization constants in a JSON sidecar next to the image."""
    values = np.asarray(values, dtype=float)
    vmin, vmax = float(values.min()), float(values.max())
    span = vmax - vmin
    norm = (values - vmin) / span if span > 0.0 else np.zeros_like(values)
    pixels = np.round(norm * 65535.0).astype(">u2")
    # image rows run down in z, columns across in x
    img = pixels.T
    with open(path, "wb") as fh:
        fh.write(f"P5\n{img.shape[1]} {img.shape[0]}\n65535\n".encode("ascii"))
        fh.write(img.tobytes())
    with open(str(path) + ".json", "w") as fh:
        json.dump({"min": vmin, "max": vmax}, fh, sort_keys=True)
        fh.write("\n")


def write_complex_csv(path, name, a):
    """CSV with re_<name>/im_<name> column pairs, one matrix row per line.

    Matrix columns beyond the first get a numeric suffix on the pair."""
    a = np.atleast_2d(np.asarray(a))
    cols = []
    for j in range(a.shape[1]):
        tag = name if a.shape[1] == 1 else f"{name}{j}"
        cols.append(f"re_{tag}")
        cols.append(f"im_{tag}")
    with open(path, "w") as fh:
        fh.write(",".join(cols) + "\n")
        for row in a:
            parts = []
            for x in row:
                parts.append(f"{x.real:.17g}")
                parts.append(f"{x.imag:.17g}")
            fh.write(",".join(parts) + "\n")
