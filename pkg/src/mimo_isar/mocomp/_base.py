from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..imaging import power_image
from ..metrics import image_entropy


@dataclass
class MocompResult:
    """Output of one motion-compensation step on a single channel.

    Attributes
    ----------
    cube : ndarray
        Compensated complex ``[range bin, slow time]`` matrix.
    algorithm : str
        ``"coarse"``, ``"em"``, ``"ccr"``, ``"pga"`` or ``"none"``.
    estimates : dict
        Algorithm-specific motion estimates.
    diagnostics : dict
        ``entropy_trace``, ``iterations``, ``no_target`` and warnings.
    """

    cube: np.ndarray
    algorithm: str
    estimates: dict = field(default_factory=dict)
    diagnostics: dict = field(default_factory=dict)


def profiles_entropy(X) -> float:
    """Entropy of the range-Doppler power image of ``[range, slow]`` profiles."""
    return image_entropy(power_image(X))


def circular_shift(X, shifts):
    """Shift each slow-time column of ``X`` along range by ``shifts[l]`` bins.

    Positive shifts move energy to higher range bins. The DFT of the range
    profiles along range gives back the fast-time samples, and a range
    change of ``s`` bins multiplies fast-time sample ``n`` by
    ``exp(-j 2 pi n s / N)`` (the beat frequency moves). Integer shifts
    reduce to exact rolls and take that path. Both are unitary.
    """
    X = np.asarray(X)
    shifts = np.asarray(shifts, dtype=np.float64)
    if shifts.shape != (X.shape[1],):
        raise ValueError(f"need one shift per column ({X.shape[1]}), got shape {shifts.shape}")
    if np.all(shifts == np.round(shifts)):
        out = np.empty_like(X)
        for col, s in enumerate(shifts.astype(np.int64)):
            out[:, col] = np.roll(X[:, col], s)
        return out
    return np.fft.ifft(np.fft.fft(X, axis=0) * shift_ramp(X.shape[0], shifts), axis=0)


def shift_ramp(n_range, shifts):
    """Fast-time phase ramp, shape ``(n_range,) + shifts.shape``, moving profiles by ``shifts`` bins."""
    n = np.arange(n_range).reshape((n_range,) + (1,) * np.ndim(shifts))
    return np.exp(-2j * np.pi * n * np.asarray(shifts) / n_range)


def has_dominant_scatterer(X, min_peak_to_floor_db) -> bool:
    """True if some range bin's mean power exceeds the median bin by the given margin."""
    if min_peak_to_floor_db is None:
        return True
    profile = np.mean(np.abs(X) ** 2, axis=1)
    peak = profile.max()
    floor = np.median(profile)
    if peak == 0:
        return False
    if floor == 0:
        return True
    return 10 * np.log10(peak / floor) >= min_peak_to_floor_db


def parabolic_peak(y, i):
    """Sub-sample offset of a peak at index ``i`` of circular sequence ``y``."""
    n = len(y)
    ym, y0, yp = y[(i - 1) % n], y[i], y[(i + 1) % n]
    denom = ym - 2 * y0 + yp
    if denom >= 0:
        return 0.0
    return float(np.clip(0.5 * (ym - yp) / denom, -0.5, 0.5))
