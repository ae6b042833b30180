"""Binary PGM masks and PMAP1 probability maps.

PMAP1 layout::

    b"PMAP1\n" + b"<height> <width>\n" + height*width little-endian float32

PGM files must be P5 with maxval 255; pixels above 127 read as foreground.
"""
import os
import re

import numpy as np

from ..errors import (BadMagicError, DimensionOverflowError, MalformedHeaderError,
                      TruncatedPayloadError, ValueRangeError)
from ..grids import as_mask, as_probmap

MAX_SIDE = 1 << 16
PMAP_MAGIC = b"PMAP1\n"

_PGM_TOKEN = re.compile(rb"\s*(?:#[^\n]*\n\s*)*(\S+)")


def _check_dims(h: int, w: int) -> None:
    if h < 1 or w < 1:
        raise MalformedHeaderError(f"non-positive dimensions {h}x{w}")
    if h > MAX_SIDE or w > MAX_SIDE:
        raise DimensionOverflowError(f"dimensions {h}x{w} exceed {MAX_SIDE}")


def decode_pgm(data: bytes) -> np.ndarray:
    pos = 0
    tokens = []
    for _ in range(4):
        m = _PGM_TOKEN.match(data, pos)
        if m is None:
            raise MalformedHeaderError("incomplete PGM header")
        tokens.append(m.group(1))
        pos = m.end()
    if tokens[0] != b"P5":
        raise MalformedHeaderError(f"expected P5 magic, got {tokens[0]!r}")
    try:
        w, h, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise MalformedHeaderError("non-integer PGM header field") from None
    _check_dims(h, w)
    if maxval != 255:
        raise MalformedHeaderError(f"only maxval 255 is supported, got {maxval}")
    if pos >= len(data) or data[pos:pos + 1] not in (b" ", b"\t", b"\n", b"\r"):
        raise MalformedHeaderError("missing whitespace after PGM header")
    payload = data[pos + 1:]
    if len(payload) < h * w:
        raise TruncatedPayloadError(f"expected {h * w} pixel bytes, got {len(payload)}")
    pixels = np.frombuffer(payload, dtype=np.uint8, count=h * w).reshape(h, w)
    return (pixels > 127).astype(np.uint8)


def encode_pgm(mask) -> bytes:
    m = as_mask(mask)
    h, w = m.shape
    return f"P5\n{w} {h}\n255\n".encode() + (m * 255).astype(np.uint8).tobytes()


def read_mask(path) -> np.ndarray:
    with open(path, "rb") as f:
        return decode_pgm(f.read())


def write_mask(mask, path) -> None:
    with open(path, "wb") as f:
        f.write(encode_pgm(mask))


def decode_pmap(data: bytes) -> np.ndarray:
    if not data.startswith(PMAP_MAGIC):
        raise BadMagicError("missing PMAP1 magic")
    end = data.find(b"\n", len(PMAP_MAGIC))
    if end < 0:
        raise MalformedHeaderError("missing PMAP1 dimension line")
    parts = data[len(PMAP_MAGIC):end].split(b" ")
    if len(parts) != 2 or not all(p.isdigit() for p in parts):
        raise MalformedHeaderError("PMAP1 dimension line must be '<height> <width>'")
    h, w = int(parts[0]), int(parts[1])
    _check_dims(h, w)
    payload = data[end + 1:]
    if len(payload) < 4 * h * w:
        raise TruncatedPayloadError(f"expected {4 * h * w} payload bytes, got {len(payload)}")
    values = np.frombuffer(payload, dtype="<f4", count=h * w).reshape(h, w)
    if not np.all(np.isfinite(values)) or values.min() < 0.0 or values.max() > 1.0:
        raise ValueRangeError("PMAP1 values must be finite and lie in [0, 1]")
    return values.astype(np.float64)


def encode_pmap(p) -> bytes:
    a = as_probmap(p)
    h, w = a.shape
    return PMAP_MAGIC + f"{h} {w}\n".encode() + a.astype("<f4").tobytes()


def read_probmap(path) -> np.ndarray:
    """Read a PMAP1 file as float64 (exactly representing the stored float32s)."""
    with open(path, "rb") as f:
        return decode_pmap(f.read())


def write_probmap(p, path) -> None:
    with open(path, "wb") as f:
        f.write(encode_pmap(p))


def read_prediction(path) -> np.ndarray:
    """Read a prediction as a probability map from either PMAP1 or PGM."""
    with open(path, "rb") as f:
        data = f.read()
    if data.startswith(PMAP_MAGIC):
        return decode_pmap(data)
    if data.startswith(b"P5"):
        return decode_pgm(data).astype(np.float64)
    raise BadMagicError(f"{os.fspath(path)}: neither PMAP1 nor P5 PGM")
