"""Coarse motion compensation: fix the strongest scatterer in range and phase."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_profiles, check_same_shape
from ._base import MocompResult, circular_shift, has_dominant_scatterer, parabolic_peak, profiles_entropy


class CoarseMocomp(TransformerMixin, BaseEstimator):
    """Integer range alignment plus phase flattening on the dominant scatterer.

    ``fit`` finds the dominant range bin (largest slow-time mean power),
    anchors on the column where that bin is strongest, and from there tracks
    the peak column by column, forwards and backwards, moving at most
    ``track_halfwidth`` bins per column. Tracking keeps the correction on one
    scatterer; picking each column's peak independently jumps between
    scatterers of similar strength. The tracked peaks, refined to sub-bin
    precision, are smoothed with a least-squares quadratic in slow time
    (otherwise a scatterer sitting between two bins flips the integer peak
    back and forth under noise). Every column is shifted so the smoothed
    track sits on the centre of the first column's peak bin, and the phase
    of that sample is then removed from every column.

    Shifts are applied as fast-time phase ramps. Fractional shifts are the
    default; rounding them (``subbin=False``) leaves one-bin steps in slow
    time where the track crosses a bin edge, and those steps leak energy
    across the whole Doppler axis.

    Parameters
    ----------
    track_halfwidth : int
        Largest peak move between neighbouring columns, in bins. Residual
        motion walks far less than a bin per chirp loop.
    subbin : bool
        Apply the smoothed shifts exactly instead of rounded to whole bins.
    min_peak_to_floor_db : float or None
        Frames whose dominant bin is not this far above the median bin are
        treated as target-free and passed through unchanged.
    """

    def __init__(self, track_halfwidth=1, subbin=True, min_peak_to_floor_db=6.0):
        self.track_halfwidth = track_halfwidth
        self.subbin = subbin
        self.min_peak_to_floor_db = min_peak_to_floor_db

    def fit(self, X, y=None):
        X = check_profiles(X, allow_zero=False)
        n_range, n_slow = X.shape
        self.shape_ = X.shape
        self.no_target_ = not has_dominant_scatterer(X, self.min_peak_to_floor_db)
        power = np.abs(X) ** 2
        self.dominant_bin_ = int(np.argmax(power.mean(axis=1)))
        if self.no_target_:
            self.shifts_ = np.zeros(n_slow)
            self.phases_ = np.zeros(n_slow)
            self.reference_bin_ = self.dominant_bin_
            return self

        if int(self.track_halfwidth) < 0:
            raise ValueError(f"track_halfwidth must be >= 0, got {self.track_halfwidth}")
        self.anchor_column_ = int(np.argmax(power[self.dominant_bin_]))
        self.peaks_ = self._track(power, self.dominant_bin_, self.anchor_column_)
        self.reference_bin_ = int(self.peaks_[0])
        cols = np.arange(n_slow)
        # unwrap the circular track around the dominant bin before fitting
        offset = (self.peaks_ - self.dominant_bin_ + n_range // 2) % n_range - n_range // 2
        offset = offset + np.array([parabolic_peak(power[:, c], self.peaks_[c]) for c in cols])
        deg = min(2, n_slow - 1)
        self.track_ = np.polyval(np.polyfit(cols, offset, deg), cols) if deg > 0 else offset
        # land the track on the centre of the first column's peak bin
        shifts = np.rint(self.track_[0]) - self.track_
        shifts[np.abs(shifts) < 1e-9] = 0.0  # aligned input stays bit-exact
        self.shifts_ = shifts if self.subbin else np.rint(shifts)
        aligned = circular_shift(X, self.shifts_)
        self.phases_ = np.angle(aligned[self.reference_bin_])
        return self

    def _track(self, power, start_bin, anchor):
        n_range, n_slow = power.shape
        offsets = np.arange(-int(self.track_halfwidth), int(self.track_halfwidth) + 1)
        peaks = np.empty(n_slow, dtype=np.int64)
        peaks[anchor] = start_bin
        for order in (range(anchor + 1, n_slow), range(anchor - 1, -1, -1)):
            prev = start_bin
            for col in order:
                rows = (prev + offsets) % n_range
                prev = int(rows[np.argmax(power[rows, col])])
                peaks[col] = prev
        return peaks

    def transform(self, X):
        check_is_fitted(self)
        X = check_profiles(X)
        check_same_shape(X, self.shape_)
        if self.no_target_:
            return X.copy()
        return circular_shift(X, self.shifts_) * np.exp(-1j * self.phases_)[None, :]


def coarse_mocomp(profiles, **kwargs) -> MocompResult:
    """Coarse MOCOMP of a ``[range, slow]`` matrix; see :class:`CoarseMocomp`."""
    est = CoarseMocomp(**kwargs)
    out = est.fit_transform(profiles)
    return MocompResult(
        cube=out,
        algorithm="coarse",
        estimates={
            "dominant_bin": est.dominant_bin_,
            "reference_bin": est.reference_bin_,
            "peaks": getattr(est, "peaks_", None),
            "shifts": est.shifts_,
            "phases": est.phases_,
        },
        diagnostics={
            "no_target": est.no_target_,
            "iterations": 1,
            "entropy_trace": [profiles_entropy(profiles), profiles_entropy(out)] if np.any(out) else [],
        },
    )
