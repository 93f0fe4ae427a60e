"""Fine motion compensation by minimum-entropy grid search over velocity and acceleration."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import check_profiles, check_same_shape
from ..params import derive_params
from ._base import MocompResult, has_dominant_scatterer, profiles_entropy, shift_ramp

DEFAULT_VELOCITIES = np.round(np.arange(-20, 21) * 0.25, 10)
DEFAULT_ACCELERATIONS = np.round(np.arange(-10, 11) * 0.25, 10)


def _check_grid(values, name):
    values = np.atleast_1d(np.asarray(values, dtype=np.float64))
    if values.ndim != 1 or values.size == 0:
        raise ValueError(f"{name} grid must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(values)):
        raise ValueError(f"{name} grid must be finite")
    if values.size > 1:
        step = np.diff(values)
        if not (np.all(step > 0) or np.all(step < 0)):
            raise ValueError(f"{name} grid must be strictly monotone")
    return values


def motion_phase(velocity, acceleration, n_slow, slow_time_interval, wavelength):
    """Two-way phase ``4 pi / lambda (v t + a t**2 / 2)`` at ``t = l * slow_time_interval``."""
    t = np.arange(n_slow) * slow_time_interval
    return 4 * np.pi / wavelength * (velocity * t + 0.5 * acceleration * t * t)


class EntropyMinimization(TransformerMixin, BaseEstimator):
    """Grid search for the residual radial velocity and acceleration.

    Each candidate ``(v, a)`` multiplies slow-time column ``l`` by
    ``exp(+j 4 pi / lambda (v t_l + a t_l**2 / 2))``, cancelling the
    ``exp(-j 4 pi r(t) / lambda)`` motion phase, and the candidate whose
    range-Doppler image has the lowest entropy wins. Exact ties go to the
    smallest ``|v|`` and then the smallest ``|a|``.

    Parameters
    ----------
    velocities, accelerations : array_like
        Monotone candidate grids in m/s and m/s^2.
    wavelength : float
        Carrier wavelength in metres.
    slow_time_interval : float
        Chirp-loop interval between slow-time columns, in seconds.
    range_bin_m : float or None
        When given, each candidate also undoes the range walk, shifting
        column ``l`` by ``-(m_l - mean(m)) / range_bin_m`` bins with
        ``m_l = v t_l + a t_l**2 / 2``. A linear phase
        alone only moves the Doppler spectrum, so velocities whose Doppler
        difference aliases onto a whole number of bins are otherwise
        indistinguishable; the residual range walk of a wrong candidate
        breaks that tie.
    window : {None, "hann"}
        Fast-time taper used only while scoring candidates. Scatterers lying
        between range bins otherwise leak rectangular-window sidelobes over
        the whole profile, and those sidelobes dominate the entropy.
    min_peak_to_floor_db : float or None
        Target-free frames pass through unchanged.
    """

    def __init__(
        self,
        velocities=DEFAULT_VELOCITIES,
        accelerations=DEFAULT_ACCELERATIONS,
        wavelength=3.8934e-3,
        slow_time_interval=7.8125e-4,
        range_bin_m=None,
        window=None,
        min_peak_to_floor_db=6.0,
    ):
        self.velocities = velocities
        self.accelerations = accelerations
        self.wavelength = wavelength
        self.slow_time_interval = slow_time_interval
        self.range_bin_m = range_bin_m
        self.window = window
        self.min_peak_to_floor_db = min_peak_to_floor_db

    @classmethod
    def from_params(cls, params, migration=True, **kwargs):
        d = derive_params(params)
        return cls(
            wavelength=d.wavelength_m,
            slow_time_interval=d.t_cli_s,
            range_bin_m=d.range_bin_m if migration else None,
            **kwargs,
        )

    def _compensate(self, X_freq, v, a, t):
        """Apply candidates ``v`` (vector) with scalar ``a``; ``X_freq`` is the fast-time data."""
        k = 4 * np.pi / self.wavelength
        motion = np.outer(v, t) + 0.5 * a * t * t  # (V, L)
        if self.range_bin_m:
            # only the walk about the mean position; a common sub-bin offset
            # would otherwise be rewarded for centring straddling scatterers
            walk = motion - motion.mean(axis=1, keepdims=True)
            ramp = np.moveaxis(shift_ramp(X_freq.shape[0], -walk / self.range_bin_m), 0, 1)  # (V, N, L)
            Y = np.fft.ifft(X_freq[None] * ramp, axis=1)
        else:
            Y = np.fft.ifft(X_freq, axis=0)[None]
        return Y * np.exp(1j * k * motion)[:, None, :]

    def fit(self, X, y=None):
        X = check_profiles(X, allow_zero=False)
        v_grid = _check_grid(self.velocities, "velocity")
        a_grid = _check_grid(self.accelerations, "acceleration")
        self.shape_ = X.shape
        self.no_target_ = not has_dominant_scatterer(X, self.min_peak_to_floor_db)
        if self.no_target_:
            self.velocity_, self.acceleration_ = 0.0, 0.0
            self.entropy_surface_ = np.full((v_grid.size, a_grid.size), np.nan)
            return self

        n_slow = X.shape[1]
        t = np.arange(n_slow) * self.slow_time_interval
        X_freq = np.fft.fft(X, axis=0)
        if self.window == "hann":
            X_freq = X_freq * np.hanning(X.shape[0])[:, None]
        elif self.window is not None:
            raise ValueError(f"unknown window {self.window!r}; use None or 'hann'")
        surface = np.empty((v_grid.size, a_grid.size))
        for j, a in enumerate(a_grid):
            spec = np.fft.fft(self._compensate(X_freq, v_grid, a, t), axis=-1, norm="ortho")
            power = spec.real**2 + spec.imag**2
            total = power.sum(axis=(1, 2), keepdims=True)
            prob = power / total
            with np.errstate(divide="ignore", invalid="ignore"):
                plogp = np.where(prob > 0, prob * np.log(prob), 0.0)
            surface[:, j] = -plogp.sum(axis=(1, 2))

        best = surface.min()
        ties = np.argwhere(np.isclose(surface, best, rtol=1e-12, atol=0.0))
        order = sorted(
            (abs(v_grid[i]), abs(a_grid[j]), v_grid[i], a_grid[j], i, j) for i, j in ties
        )
        _, _, v_hat, a_hat, i_hat, j_hat = order[0]
        self.velocity_ = float(v_hat)
        self.acceleration_ = float(a_hat)
        self.best_index_ = (int(i_hat), int(j_hat))
        self.entropy_surface_ = surface
        self.velocity_grid_ = v_grid
        self.acceleration_grid_ = a_grid
        return self

    def correction_phase(self, n_slow):
        check_is_fitted(self)
        return motion_phase(self.velocity_, self.acceleration_, n_slow, self.slow_time_interval, self.wavelength)

    def transform(self, X):
        check_is_fitted(self)
        X = check_profiles(X)
        check_same_shape(X, self.shape_)
        if self.no_target_ or (self.velocity_ == 0 and self.acceleration_ == 0):
            return X.copy()
        t = np.arange(X.shape[1]) * self.slow_time_interval
        return self._compensate(np.fft.fft(X, axis=0), np.array([self.velocity_]), self.acceleration_, t)[0]


def em_mocomp(
    profiles, params=None, velocities=DEFAULT_VELOCITIES, accelerations=DEFAULT_ACCELERATIONS, migration=True, **kwargs
) -> MocompResult:
    """Entropy-minimisation MOCOMP.

    ``params`` supplies wavelength, slow-time interval and (with
    ``migration``) the range bin size; without it pass those directly.
    """
    if params is not None:
        est = EntropyMinimization.from_params(
            params, migration=migration, velocities=velocities, accelerations=accelerations, **kwargs
        )
    else:
        est = EntropyMinimization(velocities=velocities, accelerations=accelerations, **kwargs)
    out = est.fit_transform(profiles)
    diagnostics = {"no_target": est.no_target_, "entropy_surface": est.entropy_surface_}
    if not est.no_target_:
        diagnostics["entropy_trace"] = [profiles_entropy(profiles), float(est.entropy_surface_[est.best_index_])]
        diagnostics["iterations"] = int(est.entropy_surface_.size)
    return MocompResult(
        cube=out,
        algorithm="em",
        estimates={"velocity": est.velocity_, "acceleration": est.acceleration_},
        diagnostics=diagnostics,
    )
