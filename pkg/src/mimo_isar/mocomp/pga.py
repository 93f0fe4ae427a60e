"""Phase gradient autofocus over slow time."""

from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_profiles, check_same_shape
from ..exceptions import MocompWarning
from ._base import MocompResult, has_dominant_scatterer, parabolic_peak, profiles_entropy

PEAK_OVERSAMPLE = 8


def remove_linear(phase):
    """Subtract the least-squares constant + linear fit (they only shift the image)."""
    phase = np.asarray(phase, dtype=np.float64)
    x = np.arange(len(phase), dtype=np.float64)
    coef = np.polyfit(x, phase, 1)
    return phase - np.polyval(coef, x)


def rms(x) -> float:
    return float(np.sqrt(np.mean(np.square(x))))


def phase_gradient(g):
    """Per-chirp phase increments ``sum Im{conj(g_l) (g_{l+1} - g_l)} / sum |g_l|**2``."""
    num = np.sum(np.imag(np.conj(g[:, :-1]) * (g[:, 1:] - g[:, :-1])), axis=0)
    den = np.sum(np.abs(g[:, :-1]) ** 2, axis=0)
    return np.divide(num, den, out=np.zeros_like(num), where=den > 0)


class PhaseGradientAutofocus(TransformerMixin, BaseEstimator):
    """Iterative phase gradient autofocus.

    Per iteration: keep the ``num_bins`` range bins with the highest Doppler
    peak, centre each at its Doppler peak (to a fraction of a bin), window
    around the centre (width from the averaged centred intensity,
    ``window_db`` down, never growing between iterations), return to slow time, estimate the phase
    gradient, integrate it, drop its constant + linear part and apply the
    conjugate. Stops when the RMS of an iteration's estimate falls below
    ``rms_tol_rad``.

    Parameters
    ----------
    max_iters : int
    rms_tol_rad : float
    num_bins : int
    window_db : float
    min_window : int
    min_peak_to_floor_db : float or None
        Target-free frames pass through unchanged.
    """

    def __init__(self, max_iters=10, rms_tol_rad=1e-3, num_bins=16, window_db=30.0, min_window=5, min_peak_to_floor_db=6.0):
        self.max_iters = max_iters
        self.rms_tol_rad = rms_tol_rad
        self.num_bins = num_bins
        self.window_db = window_db
        self.min_window = min_window
        self.min_peak_to_floor_db = min_peak_to_floor_db

    def _window_width(self, intensity, previous):
        n = len(intensity)
        thresh = intensity[0] * 10 ** (-self.window_db / 10)
        extent = 0
        while extent < n // 2 and intensity[extent + 1] >= thresh and intensity[-(extent + 1)] >= thresh:
            extent += 1
        width = 2 * extent + 1
        return int(min(previous, max(self.min_window, width)))

    def _iterate(self, X, width, k):
        n_slow = X.shape[1]
        power = np.abs(np.fft.fft(X, axis=1)) ** 2
        rows = np.argsort(-power.max(axis=1), kind="stable")[:k]
        # centre each response on its Doppler peak to a fraction of a bin;
        # a whole-bin roll leaves off-bin peaks straddling two bins, and the
        # window then clips their sidelobes into a spurious phase error
        fine = np.abs(np.fft.fft(X[rows], n=PEAK_OVERSAMPLE * n_slow, axis=1)) ** 2
        centre = np.array([(i + parabolic_peak(f, i)) / PEAK_OVERSAMPLE for f, i in zip(fine, np.argmax(fine, axis=1))])
        l = np.arange(n_slow)
        sel = np.fft.fft(X[rows] * np.exp(-2j * np.pi * np.outer(centre, l) / n_slow), axis=1)  # peak now at column 0
        width = self._window_width(np.sum(np.abs(sel) ** 2, axis=0), width)
        half = width // 2
        mask = np.zeros(n_slow, dtype=bool)
        mask[: half + 1] = True
        if half:
            mask[-half:] = True
        g = np.fft.ifft(sel * mask, axis=1)
        phi = np.concatenate([[0.0], np.cumsum(phase_gradient(g))])
        return remove_linear(phi), width

    def fit(self, X, y=None):
        X = check_profiles(X, min_columns=2, allow_zero=False)
        n_range, n_slow = X.shape
        self.shape_ = X.shape
        self.warnings_ = []
        self.phase_error_ = np.zeros(n_slow)
        self.no_target_ = not has_dominant_scatterer(X, self.min_peak_to_floor_db)
        self.rms_trace_ = []
        self.entropy_trace_ = [profiles_entropy(X)]
        self.n_iter_ = 0
        if self.no_target_:
            return self
        nonzero = int(np.count_nonzero(np.any(X != 0, axis=1)))
        k = int(self.num_bins)
        if nonzero < k:
            msg = f"only {nonzero} non-zero range bins; using k={nonzero} instead of {k}"
            warnings.warn(msg, MocompWarning, stacklevel=2)
            self.warnings_.append(msg)
            k = nonzero
        self.num_bins_used_ = k

        width = n_slow
        current = X
        for it in range(int(self.max_iters)):
            phi, width = self._iterate(current, width, k)
            self.phase_error_ = self.phase_error_ + phi
            current = X * np.exp(-1j * self.phase_error_)[None, :]
            self.n_iter_ = it + 1
            self.rms_trace_.append(rms(phi))
            self.entropy_trace_.append(profiles_entropy(current))
            if self.rms_trace_[-1] < self.rms_tol_rad:
                break
        return self

    def transform(self, X):
        check_is_fitted(self)
        X = check_profiles(X, min_columns=2)
        check_same_shape(X, self.shape_)
        if not np.any(self.phase_error_):
            return X.copy()
        return X * np.exp(-1j * self.phase_error_)[None, :]


def pga_mocomp(profiles, max_iters=10, rms_tol_rad=1e-3, **kwargs) -> MocompResult:
    """Phase gradient autofocus; see :class:`PhaseGradientAutofocus`."""
    est = PhaseGradientAutofocus(max_iters=max_iters, rms_tol_rad=rms_tol_rad, **kwargs)
    out = est.fit_transform(profiles)
    return MocompResult(
        cube=out,
        algorithm="pga",
        estimates={"phase_error": est.phase_error_},
        diagnostics={
            "no_target": est.no_target_,
            "entropy_trace": list(est.entropy_trace_),
            "rms_trace": list(est.rms_trace_),
            "iterations": est.n_iter_,
            "warnings": list(est.warnings_),
        },
    )
