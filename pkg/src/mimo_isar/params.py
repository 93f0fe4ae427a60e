"""Radar waveform and array constants, and the quantities derived from them."""

from __future__ import annotations

import dataclasses
import hashlib
import math
import warnings
from dataclasses import dataclass

from .exceptions import ParameterError, ParameterWarning

SPEED_OF_LIGHT = 299_792_458.0

# Relative slack for the timing inequalities; T_PRI is usually written as a
# rounded decimal of T_CPI / (L * P).
_TIMING_RTOL = 1e-9


@dataclass(frozen=True)
class RadarParams:
    """Configured FMCW / TDM-MIMO radar constants.

    Defaults reproduce the measurement configuration: 77 GHz carrier,
    2 GHz sweep, 128 slow-time by 256 fast-time samples, 0.1 s CPI and a
    9.668 Msps ADC. The chirp slope is chosen so that the maximum
    unambiguous range is 34.4 m; the PRI fills the CPI with 128 chirp loops
    of three transmitters. Element spacings follow the usual half-wavelength
    receive ULA with transmitters four receive spacings apart, giving a
    filled 12-element virtual array.
    """

    carrier_freq_hz: float = 77e9
    bandwidth_hz: float = 2e9
    chirp_slope_hz_per_s: float = 42.128e12
    t_pri_s: float = 0.1 / (128 * 3)
    num_tx: int = 3
    num_rx: int = 4
    d_tx_m: float = 2.0 * SPEED_OF_LIGHT / 77e9
    d_rx_m: float = 0.5 * SPEED_OF_LIGHT / 77e9
    num_slow: int = 128
    num_fast: int = 256
    sample_rate_sps: float = 9.668e6
    t_cpi_s: float = 0.1
    ref_range_m: float = 0.0

    def replace(self, **changes) -> "RadarParams":
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return dataclasses.asdict(self)

    def digest(self) -> int:
        """64-bit digest of the parameter values (used in cube file headers)."""
        text = ";".join(f"{k}={v!r}" for k, v in sorted(self.as_dict().items()))
        return int.from_bytes(hashlib.sha256(text.encode()).digest()[:8], "little")

    @property
    def num_channels(self) -> int:
        return self.num_tx * self.num_rx


@dataclass(frozen=True)
class DerivedParams:
    wavelength_m: float
    t_cli_s: float
    range_bin_m: float
    max_range_m: float
    max_velocity_mps: float
    doppler_res_hz: float
    doppler_bin_hz: float
    ramp_duration_s: float
    sampling_duration_s: float


def _check_invariants(p: RadarParams) -> None:
    positive = {
        "carrier_freq_hz": p.carrier_freq_hz,
        "bandwidth_hz": p.bandwidth_hz,
        "chirp_slope_hz_per_s": p.chirp_slope_hz_per_s,
        "t_pri_s": p.t_pri_s,
        "num_tx": p.num_tx,
        "num_rx": p.num_rx,
        "d_tx_m": p.d_tx_m,
        "d_rx_m": p.d_rx_m,
        "num_slow": p.num_slow,
        "num_fast": p.num_fast,
        "sample_rate_sps": p.sample_rate_sps,
        "t_cpi_s": p.t_cpi_s,
    }
    for name, value in positive.items():
        if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
            raise ParameterError(f"{name} must be finite and > 0, got {value!r}")
    for name in ("num_tx", "num_rx", "num_slow", "num_fast"):
        value = getattr(p, name)
        if int(value) != value:
            raise ParameterError(f"{name} must be an integer, got {value!r}")
    if not (math.isfinite(p.ref_range_m) and p.ref_range_m >= 0):
        raise ParameterError(f"ref_range_m must be finite and >= 0, got {p.ref_range_m!r}")

    t_cli = p.num_tx * p.t_pri_s
    if t_cli > (p.t_cpi_s / p.num_slow) * (1 + _TIMING_RTOL):
        raise ParameterError(
            f"chirp loop interval {t_cli:.6g} s (num_tx * t_pri_s) exceeds "
            f"t_cpi_s / num_slow = {p.t_cpi_s / p.num_slow:.6g} s"
        )
    ramp = p.bandwidth_hz / p.chirp_slope_hz_per_s
    sampling = p.num_fast / p.sample_rate_sps
    if sampling > ramp * (1 + _TIMING_RTOL):
        raise ParameterError(
            f"fast-time sampling window {sampling:.6g} s (num_fast / sample_rate_sps) "
            f"exceeds the active ramp duration {ramp:.6g} s (bandwidth / chirp slope)"
        )


def derive_params(p: RadarParams) -> DerivedParams:
    """Compute derived quantities with the standard FMCW relations.

    Raises
    ------
    ParameterError
        If ``p`` violates a positivity or timing invariant.
    """
    _check_invariants(p)
    wavelength = SPEED_OF_LIGHT / p.carrier_freq_hz
    t_cli = p.num_tx * p.t_pri_s
    max_range = p.sample_rate_sps * SPEED_OF_LIGHT / (2.0 * p.chirp_slope_hz_per_s)
    return DerivedParams(
        wavelength_m=wavelength,
        t_cli_s=t_cli,
        range_bin_m=max_range / p.num_fast,
        max_range_m=max_range,
        max_velocity_mps=wavelength / (4.0 * t_cli),
        doppler_res_hz=1.0 / p.t_cpi_s,
        doppler_bin_hz=1.0 / (p.num_slow * t_cli),
        ramp_duration_s=p.bandwidth_hz / p.chirp_slope_hz_per_s,
        sampling_duration_s=p.num_fast / p.sample_rate_sps,
    )


def validate_params(p: RadarParams, expected: dict | None = None, rtol: float = 0.02) -> list[str]:
    """Return consistency warnings for ``p``.

    Parameters
    ----------
    p : RadarParams
    expected : dict, optional
        Declared values for :class:`DerivedParams` fields (e.g.
        ``{"max_velocity_mps": 5.0}``). Each one that differs from the
        derived value by more than ``rtol`` (relative) produces a warning.
    rtol : float

    Returns
    -------
    list of str
        Empty when everything is consistent; each message is also emitted
        as a :class:`ParameterWarning`. Hard invariant violations are
        not warnings: :class:`ParameterError` propagates from
        :func:`derive_params`.
    """
    derived = derive_params(p)
    messages = []
    for name, value in (expected or {}).items():
        if not hasattr(derived, name):
            messages.append(f"unknown derived quantity '{name}' in expectations")
            continue
        got = getattr(derived, name)
        if not math.isclose(got, value, rel_tol=rtol):
            messages.append(
                f"{name}: derived {got:.6g} differs from expected {value:.6g} "
                f"({100 * (got - value) / value:+.1f}%)"
            )
    if p.t_cpi_s > p.num_slow * derived.t_cli_s * (1 + _TIMING_RTOL):
        messages.append(
            f"CPI {p.t_cpi_s:.6g} s is longer than num_slow chirp loops "
            f"({p.num_slow * derived.t_cli_s:.6g} s); Doppler bin spacing "
            f"{derived.doppler_bin_hz:.6g} Hz differs from 1/T_CPI"
        )
    for msg in messages:
        warnings.warn(msg, ParameterWarning, stacklevel=2)
    return messages


# Values printed in the measurement table, used as expectations by the CLI.
TABLE1_DERIVED = {
    "max_range_m": 34.4,
    "max_velocity_mps": 5.0,
    "doppler_res_hz": 10.0,
}
