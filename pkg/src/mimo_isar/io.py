"""Binary cube files.

Layout (little-endian, no padding)::

    offset  size  field
    0       8     magic b"ISARCUBE"
    8       2     format version (u16)
    10      4x4   P, Q, L, N (u32)
    26      4     frame index (u32)
    30      8     frame start time in seconds (f64)
    38      8     radar parameter digest (u64, 0 = unknown)
    46      ...   P*Q*L*N complex samples as interleaved (real f32, imag f32),
                  index order p, q, l, n with n fastest

Samples are stored in single precision; a cube read from disk writes back
bit-identically.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .exceptions import CubeFormatError
from .synth import MAX_CUBE_ELEMENTS, RawCube

MAGIC = b"ISARCUBE"
VERSION = 1
HEADER = struct.Struct("<8sHIIIIIdQ")
HEADER_SIZE = HEADER.size
SAMPLE_DTYPE = np.dtype("<c8")
BYTES_PER_SAMPLE = SAMPLE_DTYPE.itemsize
_U32_MAX = 2**32 - 1


def payload_size(P, Q, L, N) -> int:
    """Payload length in bytes, ``P * Q * L * N * 8``."""
    return int(P) * int(Q) * int(L) * int(N) * BYTES_PER_SAMPLE


def _check_dims(dims):
    if any(d <= 0 for d in dims):
        raise CubeFormatError(f"cube dimensions must be positive, got {dims}")
    if any(d > _U32_MAX for d in dims):
        raise CubeFormatError(f"cube dimension overflows u32: {dims}")
    if int(np.prod(dims, dtype=object)) > MAX_CUBE_ELEMENTS:
        raise CubeFormatError(f"cube of {'x'.join(map(str, dims))} samples exceeds {MAX_CUBE_ELEMENTS} elements")


def encode_cube(cube: RawCube) -> bytes:
    dims = tuple(int(d) for d in cube.data.shape)
    _check_dims(dims)
    if not 0 <= cube.frame_index <= _U32_MAX:
        raise CubeFormatError(f"frame index {cube.frame_index} does not fit in u32")
    digest = cube.params.digest() if cube.params is not None else int(cube.provenance.get("params_digest", 0))
    header = HEADER.pack(MAGIC, VERSION, *dims, int(cube.frame_index), float(cube.frame_start_s), digest)
    return header + np.ascontiguousarray(cube.data, dtype=SAMPLE_DTYPE).tobytes()


def decode_cube(buf: bytes, params=None, source="<bytes>") -> RawCube:
    """Parse cube bytes; see :func:`read_cube`."""
    if len(buf) < HEADER_SIZE:
        raise CubeFormatError(f"{source}: truncated header, expected {HEADER_SIZE} bytes, got {len(buf)}")
    magic, version, P, Q, L, N, frame_index, frame_start_s, digest = HEADER.unpack_from(buf)
    if magic != MAGIC:
        raise CubeFormatError(f"{source}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise CubeFormatError(f"{source}: unsupported format version {version}, expected {VERSION}")
    _check_dims((P, Q, L, N))
    expected = payload_size(P, Q, L, N)
    actual = len(buf) - HEADER_SIZE
    if actual < expected:
        raise CubeFormatError(f"{source}: truncated payload, expected {expected} bytes, got {actual}")
    if actual > expected:
        raise CubeFormatError(f"{source}: {actual - expected} trailing bytes after payload of {expected} bytes")
    if params is not None:
        if params.digest() != digest:
            raise CubeFormatError(f"{source}: radar parameter digest {digest:#x} does not match {params.digest():#x}")
        if (params.num_tx, params.num_rx, params.num_slow, params.num_fast) != (P, Q, L, N):
            raise CubeFormatError(f"{source}: dimensions {(P, Q, L, N)} do not match the radar parameters")
    data = np.frombuffer(buf, dtype=SAMPLE_DTYPE, count=P * Q * L * N, offset=HEADER_SIZE)
    return RawCube(
        data=data.reshape(P, Q, L, N).astype(np.complex128),
        frame_index=frame_index,
        frame_start_s=frame_start_s,
        params=params,
        provenance={"params_digest": digest, "source": str(source)},
    )


def write_cube(path, cube: RawCube) -> None:
    """Write ``cube``; complex128 samples are rounded to single precision."""
    buf = encode_cube(cube)
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(buf)
    os.replace(tmp, path)


def read_cube(path, params=None) -> RawCube:
    """Read a cube file.

    Parameters
    ----------
    path : path-like
    params : RadarParams, optional
        When given, the stored digest and dimensions must match.

    Raises
    ------
    CubeFormatError
        Bad magic or version, truncated or oversized payload, dimension
        overflow or parameter mismatch.
    """
    with open(path, "rb") as fh:
        buf = fh.read()
    return decode_cube(buf, params=params, source=path)


def describe_format() -> str:
    """Human-readable cube layout (printed by the ``formats`` subcommand)."""
    lines = [
        f"cube file, version {VERSION}, little-endian",
        f"  header {HEADER_SIZE} bytes, struct '{HEADER.format}':",
        "    magic        8s   b'ISARCUBE'",
        "    version      u16",
        "    P, Q, L, N   4 x u32  (tx, rx, slow time, fast time)",
        "    frame_index  u32",
        "    frame_start  f64  seconds",
        "    digest       u64  radar parameter digest, 0 if unknown",
        f"  payload P*Q*L*N*{BYTES_PER_SAMPLE} bytes: interleaved (real f32, imag f32), order p, q, l, n (n fastest)",
        f"  e.g. P=3, Q=4, L=128, N=256 -> {payload_size(3, 4, 128, 256)} payload bytes",
    ]
    return "\n".join(lines)
