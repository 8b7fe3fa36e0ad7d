"""Flat binary tensor container plus PGM/PPM image loading.

Container layout, little-endian throughout:

    bytes 0..3    magic ``RTEN``
    bytes 4..7    u32 version, currently 1
    byte  8       u8 dtype code, 0 = float32
    byte  9       u8 ndim, 1..4
    next 8*ndim   u64 extents
    rest          4 * prod(dims) bytes of float32 payload, row-major

Batches are stored N,H,W,C. Images load from binary PGM (P5) or PPM (P6)
with maxval 255 and come back as float32 in [0, 1].
"""

import struct
from pathlib import Path

import numpy as np

from .errors import (
    IoFailure,
    MalformedHeader,
    MalformedImage,
    NonFiniteValue,
    ShapeMismatch,
    TruncatedPayload,
    UnsupportedFormat,
)

MAGIC = b"RTEN"
VERSION = 1
DTYPE_F32 = 0
MAX_NDIM = 4

_HEAD = struct.Struct("<4sIBB")


def write_tensor(t, path) -> None:
    """Serialize a float32 tensor of rank 1..4 to the container format."""
    arr = np.ascontiguousarray(t, dtype=np.float32)
    if not 1 <= arr.ndim <= MAX_NDIM:
        raise ShapeMismatch(f"tensor rank must be 1..{MAX_NDIM}, got {arr.ndim}")
    if any(d < 1 for d in arr.shape):
        raise ShapeMismatch(f"tensor extents must be positive, got {arr.shape}")
    if not np.isfinite(arr).all():
        raise NonFiniteValue("refusing to write NaN/Inf values")
    header = _HEAD.pack(MAGIC, VERSION, DTYPE_F32, arr.ndim)
    header += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    try:
        with open(path, "wb") as f:
            f.write(header)
            f.write(arr.astype("<f4", copy=False).tobytes())
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e


def read_tensor(path) -> np.ndarray:
    """Load a tensor written by :func:`write_tensor`. Round-trips bit for bit."""
    try:
        blob = Path(path).read_bytes()
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e

    if len(blob) < _HEAD.size:
        raise MalformedHeader(f"{path}: file shorter than fixed header")
    magic, version, dtype, ndim = _HEAD.unpack_from(blob)
    if magic != MAGIC:
        raise MalformedHeader(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise MalformedHeader(f"{path}: unsupported version {version}")
    if dtype != DTYPE_F32:
        raise MalformedHeader(f"{path}: unsupported dtype code {dtype}")
    if not 1 <= ndim <= MAX_NDIM:
        raise MalformedHeader(f"{path}: ndim {ndim} outside 1..{MAX_NDIM}")

    dims_end = _HEAD.size + 8 * ndim
    if len(blob) < dims_end:
        raise MalformedHeader(f"{path}: file shorter than dims block")
    dims = struct.unpack_from(f"<{ndim}Q", blob, _HEAD.size)
    if any(d < 1 for d in dims):
        raise MalformedHeader(f"{path}: non-positive extent in {dims}")

    count = 1
    for d in dims:
        count *= d
    expected = dims_end + 4 * count
    if len(blob) != expected:
        raise TruncatedPayload(
            f"{path}: payload is {len(blob) - dims_end} bytes, expected {4 * count}"
        )

    data = np.frombuffer(blob, dtype="<f4", offset=dims_end).reshape(dims)
    if not np.isfinite(data).all():
        raise NonFiniteValue(f"{path}: payload contains NaN/Inf")
    return data.astype(np.float32, copy=True)


# ---------------------------------------------------------------------------
# PGM / PPM


def _next_token(buf: bytes, pos: int):
    # skip whitespace and '#' comment lines between header fields
    n = len(buf)
    while pos < n:
        c = buf[pos]
        if c in b" \t\r\n":
            pos += 1
        elif c == ord("#"):
            nl = buf.find(b"\n", pos)
            if nl < 0:
                raise MalformedImage("comment runs past end of file")
            pos = nl + 1
        else:
            break
    start = pos
    while pos < n and buf[pos] not in b" \t\r\n":
        pos += 1
    if start == pos:
        raise MalformedImage("unexpected end of header")
    return buf[start:pos], pos


def read_image(path) -> np.ndarray:
    """Decode binary PGM/PPM into an [H, W, C] float32 tensor scaled by 1/255."""
    try:
        blob = Path(path).read_bytes()
    except OSError as e:
        raise IoFailure(f"cannot read {path}: {e}") from e

    magic, pos = _next_token(blob, 0)
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise UnsupportedFormat(f"{path}: magic {magic!r}, want binary P5 or P6")

    fields = []
    for _ in range(3):
        tok, pos = _next_token(blob, pos)
        try:
            fields.append(int(tok))
        except ValueError:
            raise MalformedImage(f"{path}: non-numeric header field {tok!r}") from None
    width, height, maxval = fields
    if width < 1 or height < 1:
        raise MalformedImage(f"{path}: bad dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedFormat(f"{path}: maxval {maxval}, only 8-bit 255 supported")

    # exactly one whitespace byte separates maxval from the raster
    if pos >= len(blob) or blob[pos] not in b" \t\r\n":
        raise MalformedImage(f"{path}: missing raster separator")
    raster = blob[pos + 1 :]
    expected = width * height * channels
    if len(raster) != expected:
        raise MalformedImage(
            f"{path}: raster is {len(raster)} bytes, expected {expected}"
        )

    pixels = np.frombuffer(raster, dtype=np.uint8).reshape(height, width, channels)
    return (pixels.astype(np.float32) / np.float32(255.0)).astype(np.float32)


def write_image(t, path) -> None:
    """Encode an [H, W, 1|3] tensor with values in [0, 1] as binary PGM/PPM."""
    arr = np.asarray(t, dtype=np.float32)
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ShapeMismatch(f"expected HxWx1 or HxWx3, got {arr.shape}")
    h, w, c = arr.shape
    magic = b"P5" if c == 1 else b"P6"
    raster = np.clip(np.rint(arr * 255.0), 0, 255).astype(np.uint8)
    try:
        with open(path, "wb") as f:
            f.write(magic + b"\n%d %d\n255\n" % (w, h))
            f.write(raster.tobytes())
    except OSError as e:
        raise IoFailure(f"cannot write {path}: {e}") from e
