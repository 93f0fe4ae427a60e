"""Image export: 16-bit PGM and dB-valued CSV, each with an axes sidecar."""

from __future__ import annotations

import os

import numpy as np

from .imaging import RDImage

DB_FLOOR = -120.0
PGM_MAX = 65535
CSV_DECIMALS = 4


def to_db(pixels, db_floor=DB_FLOOR, relative_to_peak=False):
    """``10 log10`` of power pixels, clamped below at ``db_floor``.

    With ``relative_to_peak`` the scale is referenced to the image maximum.
    """
    pixels = np.asarray(pixels, dtype=np.float64)
    if relative_to_peak:
        peak = pixels.max() if pixels.size else 0.0
        if peak <= 0:
            return np.full(pixels.shape, db_floor)
        pixels = pixels / peak
    with np.errstate(divide="ignore"):
        db = 10.0 * np.log10(pixels)
    return np.maximum(db, db_floor)


def pgm_levels(pixels, db_floor=DB_FLOOR) -> np.ndarray:
    """Map ``[peak + db_floor, peak]`` dB linearly onto ``0..65535``."""
    db = to_db(pixels, db_floor, relative_to_peak=True)
    if np.asarray(pixels).max(initial=0.0) <= 0:
        return np.zeros(db.shape, dtype=np.uint16)
    levels = np.rint((db - db_floor) / -db_floor * PGM_MAX)
    return np.clip(levels, 0, PGM_MAX).astype(np.uint16)


def _atomic_write(path, data: bytes):
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)


def axes_path(path) -> str:
    root, _ = os.path.splitext(os.fspath(path))
    return root + ".axes.txt"


def axes_text(img: RDImage, scale: str, db_floor: float) -> str:
    channel = img.channel if isinstance(img.channel, str) else f"{img.channel[0]},{img.channel[1]}"
    rows, cols = img.shape
    items = [
        ("channel", channel),
        ("frame_index", img.frame_index),
        ("rows", rows),
        ("cols", cols),
        ("row_axis", "range bin"),
        ("range_bin_m", repr(float(img.range_bin_m))),
        ("col_axis", "doppler index (1-based, zero Doppler at index cols//2 + 1)"),
        ("doppler_bin_hz", repr(float(img.doppler_bin_hz))),
        ("scale", scale),
        ("db_floor", repr(float(db_floor))),
    ]
    return "".join(f"{k} = {v}\n" for k, v in items)


def read_axes(path) -> dict:
    """Parse a sidecar written next to an exported image."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if "=" in line:
                key, value = (s.strip() for s in line.split("=", 1))
                out[key] = value
    for key in ("rows", "cols", "frame_index"):
        out[key] = int(out[key])
    for key in ("range_bin_m", "doppler_bin_hz", "db_floor"):
        out[key] = float(out[key])
    return out


def export_image(img: RDImage, path, fmt=None, db_floor=DB_FLOOR) -> str:
    """Write ``img`` as PGM or CSV plus an ``.axes.txt`` sidecar.

    Parameters
    ----------
    img : RDImage
    path : path-like
    fmt : {"pgm", "csv"}, optional
        Defaults to the file extension.
    db_floor : float
        PGM: dynamic range below the frame peak. CSV: absolute floor.

    Returns
    -------
    str
        Path of the sidecar.
    """
    fmt = fmt or os.path.splitext(os.fspath(path))[1].lstrip(".").lower()
    if not np.all(np.isfinite(img.pixels)):
        raise ValueError("image has non-finite pixels")
    if fmt == "pgm":
        levels = pgm_levels(img.pixels, db_floor)
        rows, cols = levels.shape
        header = f"P5\n{cols} {rows}\n{PGM_MAX}\n".encode("ascii")
        _atomic_write(path, header + levels.astype(">u2").tobytes())
        scale = "dB relative to frame peak, 0 -> peak + db_floor, 65535 -> peak"
    elif fmt == "csv":
        db = to_db(img.pixels, db_floor)
        body = "\n".join(",".join(f"{v:.{CSV_DECIMALS}f}" for v in row) for row in db) + "\n"
        _atomic_write(path, body.encode("ascii"))
        scale = "10 log10(power), floored at db_floor"
    else:
        raise ValueError(f"unknown image format {fmt!r}; use 'pgm' or 'csv'")
    side = axes_path(path)
    _atomic_write(side, axes_text(img, scale, db_floor).encode("utf-8"))
    return side


def _pgm_tokens(buf):
    """Header tokens and payload offset of a binary PGM (comments allowed)."""
    tokens, pos = [], 0
    while len(tokens) < 4:
        while pos < len(buf) and buf[pos : pos + 1].isspace():
            pos += 1
        if buf[pos : pos + 1] == b"#":
            pos = buf.index(b"\n", pos) + 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos : pos + 1].isspace():
            pos += 1
        tokens.append(buf[start:pos])
    return tokens, pos + 1


def read_pgm(path) -> np.ndarray:
    """Read a 16-bit binary PGM into a ``uint16`` array."""
    with open(path, "rb") as fh:
        buf = fh.read()
    tokens, offset = _pgm_tokens(buf)
    if tokens[0] != b"P5":
        raise ValueError(f"{path}: not a binary PGM")
    cols, rows, maxval = (int(t) for t in tokens[1:])
    dtype = ">u2" if maxval > 255 else "u1"
    data = np.frombuffer(buf, dtype=dtype, count=rows * cols, offset=offset)
    return data.reshape(rows, cols).astype(np.uint16)


def read_csv_image(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", ndmin=2)
