"""Dechirped (stretch-processed) TDM-MIMO FMCW data cubes.

Each scatterer contributes, for transmitter ``p``, receiver ``q``, chirp
loop ``l`` and fast-time sample ``n``::

    sigma * u_p * u_q * exp(-j 4 pi r / lambda) * exp(-j 2 pi K 2 (r - r_ref) / c * tau_n)

with ``r`` evaluated at the chirp's own timestamp
``t = frame_start + l T_CLI + p T_PRI`` (stop-and-hop), so Doppler and
range walk follow from the geometry instead of a fixed Doppler term.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .exceptions import SceneError
from .params import SPEED_OF_LIGHT, RadarParams, derive_params
from .scene import Scene, range_azimuth, scatterer_positions

MAX_CUBE_ELEMENTS = 2**31


@dataclass
class RawCube:
    """Complex samples indexed ``[p, q, l, n]`` for one CPI frame."""

    data: np.ndarray
    frame_index: int
    frame_start_s: float
    params: RadarParams | None = None
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.data.ndim != 4:
            raise ValueError(f"cube data must be 4-D [p, q, l, n], got shape {self.data.shape}")
        if self.params is not None:
            expected = (self.params.num_tx, self.params.num_rx, self.params.num_slow, self.params.num_fast)
            if self.data.shape != expected:
                raise ValueError(f"cube shape {self.data.shape} does not match params {expected}")

    @property
    def shape(self):
        return self.data.shape

    def channels(self):
        """``(p, q)`` pairs in p-major order."""
        P, Q = self.data.shape[:2]
        return [(p, q) for p in range(P) for q in range(Q)]


@dataclass(frozen=True)
class NoiseModel:
    """Circular complex Gaussian receiver noise plus the scene's clutter points."""

    noise_power: float = 0.0
    clutter: tuple = ()

    @classmethod
    def from_scene(cls, scene: Scene) -> "NoiseModel":
        return cls(scene.noise_power, scene.clutter)


def frame_start(params: RadarParams, frame_index: int) -> float:
    return frame_index * params.t_cpi_s


def channel_rng(scene: Scene, frame_index: int, p: int, q: int) -> np.random.Generator:
    """Counter-based stream for one (frame, channel); independent of evaluation order."""
    ss = np.random.SeedSequence([int(scene.seed) & 0xFFFFFFFFFFFFFFFF, scene.scene_id, frame_index, p, q])
    return np.random.Generator(np.random.Philox(ss))


def _frame_rng(scene: Scene, frame_index: int) -> np.random.Generator:
    ss = np.random.SeedSequence([int(scene.seed) & 0xFFFFFFFFFFFFFFFF, scene.scene_id, frame_index, 0xF1])
    return np.random.Generator(np.random.Philox(ss))


def _echo(ranges, azimuths, amps, params, derived, p, fast_time, residual_video_phase):
    """Sum of point-scatterer echoes for transmitter ``p`` and every receiver.

    ``ranges``/``azimuths`` have shape ``(B, L)``; returns ``(Q, L, N)``.
    """
    lam = derived.wavelength_m
    K = params.chirp_slope_hz_per_s
    delay = 2.0 * (ranges - params.ref_range_m) / SPEED_OF_LIGHT  # (B, L)
    slow_phase = -4.0 * np.pi * ranges / lam
    if residual_video_phase:
        slow_phase = slow_phase - np.pi * K * delay**2
    sin_az = np.sin(azimuths)
    tx_phase = -2.0 * np.pi * params.d_tx_m * p * sin_az / lam
    q_idx = np.arange(params.num_rx)
    rx = np.exp(-2j * np.pi * params.d_rx_m * q_idx[:, None, None] * sin_az[None] / lam)  # (Q, B, L)
    weight = amps[:, None] * np.exp(1j * (slow_phase + tx_phase))  # (B, L)
    fast = np.exp(-2j * np.pi * K * delay[..., None] * fast_time)  # (B, L, N)
    return np.einsum("qbl,bl,bln->qln", rx, weight, fast, optimize=True)


def synthesize_frame(
    scene: Scene,
    params: RadarParams,
    frame_index: int,
    *,
    tdm_offset: bool = True,
    residual_video_phase: bool = False,
) -> RawCube:
    """Synthesize the dechirped cube for one CPI.

    Parameters
    ----------
    scene : Scene
    params : RadarParams
    frame_index : int
        Frame ``i`` starts at ``i * t_cpi_s``.
    tdm_offset : bool
        Evaluate the target at the exact time of transmitter ``p``'s chirp
        (``+ p T_PRI``). Disable for idealised simultaneous-transmit data.
    residual_video_phase : bool
        Keep the ``exp(-j pi K delay**2)`` term.

    Raises
    ------
    SceneError
        If the frame window leaves the trajectory's time span.
    ValueError
        If the cube would exceed ``MAX_CUBE_ELEMENTS`` samples.
    """
    derived = derive_params(params)
    P, Q, L, N = params.num_tx, params.num_rx, params.num_slow, params.num_fast
    if P * Q * L * N > MAX_CUBE_ELEMENTS:
        raise ValueError(f"cube of {P}x{Q}x{L}x{N} samples exceeds {MAX_CUBE_ELEMENTS} elements")
    if frame_index < 0:
        raise SceneError("frame_index must be >= 0")
    t0 = frame_start(params, frame_index)
    t_last = t0 + (L - 1) * derived.t_cli_s + (P - 1) * params.t_pri_s
    if not scene.covers(t0, t_last):
        raise SceneError(
            f"frame {frame_index} ({t0:.4g}..{t_last:.4g} s) is outside the trajectory of scene {scene.name!r}"
        )

    fast_time = np.arange(N) / params.sample_rate_sps
    slow = t0 + np.arange(L) * derived.t_cli_s
    amps = scene.reflectivities
    if scene.reflectivity_jitter > 0 and len(amps):
        amps = amps * np.abs(1.0 + scene.reflectivity_jitter * _frame_rng(scene, frame_index).standard_normal(len(amps)))

    clutter = np.array([[c.x_local_m, c.y_local_m] for c in scene.clutter]).reshape(-1, 2)
    clutter_amp = np.array([c.reflectivity for c in scene.clutter], dtype=np.float64)
    clutter_r, clutter_az = range_azimuth(clutter)

    data = np.zeros((P, Q, L, N), dtype=np.complex128)
    for p in range(P):
        t = slow + (p * params.t_pri_s if tdm_offset else 0.0)
        if len(amps):
            r, az = range_azimuth(scatterer_positions(scene, t))
            data[p] += _echo(r, az, amps, params, derived, p, fast_time, residual_video_phase)
        if len(clutter_amp):
            r = np.repeat(clutter_r[:, None], L, axis=1)
            az = np.repeat(clutter_az[:, None], L, axis=1)
            data[p] += _echo(r, az, clutter_amp, params, derived, p, fast_time, residual_video_phase)

    if scene.noise_power > 0:
        scale = np.sqrt(scene.noise_power / 2.0)
        for p in range(P):
            for q in range(Q):
                rng = channel_rng(scene, frame_index, p, q)
                noise = rng.standard_normal((L, N, 2))
                data[p, q] += scale * (noise[..., 0] + 1j * noise[..., 1])

    return RawCube(
        data=data,
        frame_index=int(frame_index),
        frame_start_s=t0,
        params=params,
        provenance={"seed": int(scene.seed), "scene": scene.name},
    )


def synthesize_sequence(scene: Scene, params: RadarParams, frame_indices, *, threads: int = 1, **kwargs):
    """Synthesize independent frames; output does not depend on ``threads``."""
    frame_indices = [int(i) for i in frame_indices]
    if threads == 1 or len(frame_indices) < 2:
        return [synthesize_frame(scene, params, i, **kwargs) for i in frame_indices]
    with ThreadPoolExecutor(max_workers=threads or None) as pool:
        return list(pool.map(lambda i: synthesize_frame(scene, params, i, **kwargs), frame_indices))
