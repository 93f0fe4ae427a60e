"""Rigid extended targets, their motion, and stationary clutter.

Geometry is 2-D (ground plane). The radar sits at the origin looking along
+y. A target's centre of gravity follows a cubic-spline trajectory and its
body frame is rotated by the aspect angle ``psi``, measured from the radar
line of sight: the body x-axis points along ``los + psi``. With that
convention the far-field projection

    r_b(t) = R(t) + x_b cos(psi) - y_b sin(psi)

is the first-order expansion of the exact scatterer distance.
"""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline

from .exceptions import SceneError

_T_TOL = 1e-9


@dataclass(frozen=True)
class Scatterer:
    """Point scatterer.

    For target scatterers ``x_local_m``/``y_local_m`` are offsets from the
    centre of gravity in the body frame; for clutter they are absolute
    ground coordinates.
    """

    x_local_m: float
    y_local_m: float
    reflectivity: float = 1.0

    def __post_init__(self):
        if not (math.isfinite(self.reflectivity) and self.reflectivity >= 0):
            raise SceneError(f"reflectivity must be finite and >= 0, got {self.reflectivity}")
        if not (math.isfinite(self.x_local_m) and math.isfinite(self.y_local_m)):
            raise SceneError("scatterer coordinates must be finite")


@dataclass(frozen=True)
class RotationLaw:
    """Aspect angle ``psi(t) = psi0 + alpha t + beta t**2``."""

    psi0_rad: float = 0.0
    alpha_rad_per_s: float = 0.0
    beta_rad_per_s2: float = 0.0

    def __call__(self, t):
        return self.psi0_rad + self.alpha_rad_per_s * t + self.beta_rad_per_s2 * t * t


HEADING = "heading"


@dataclass(frozen=True)
class TrajectorySpec:
    """Time-stamped centre-of-gravity waypoints with cubic-spline interpolation.

    Parameters
    ----------
    waypoints : sequence of (t, x, y)
        Strictly increasing timestamps, at least two rows.
    rotation : RotationLaw or "heading"
        ``"heading"`` aligns the body x-axis with the path tangent.
    """

    waypoints: tuple
    rotation: RotationLaw | str = field(default_factory=RotationLaw)

    def __post_init__(self):
        wp = tuple(tuple(float(v) for v in row) for row in self.waypoints)
        if len(wp) < 2 or any(len(row) != 3 for row in wp):
            raise SceneError("trajectory needs at least 2 waypoints of (t, x, y)")
        times = [row[0] for row in wp]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise SceneError("waypoint timestamps must be strictly increasing")
        if not all(math.isfinite(v) for row in wp for v in row):
            raise SceneError("waypoints must be finite")
        if not (isinstance(self.rotation, RotationLaw) or self.rotation == HEADING):
            raise SceneError(f"rotation must be a RotationLaw or '{HEADING}'")
        object.__setattr__(self, "waypoints", wp)

    @property
    def t_start(self) -> float:
        return self.waypoints[0][0]

    @property
    def t_end(self) -> float:
        return self.waypoints[-1][0]

    @property
    def duration(self) -> float:
        return self.t_end - self.t_start

    @cached_property
    def _spline(self):
        wp = np.array(self.waypoints)
        return CubicSpline(wp[:, 0], wp[:, 1:], axis=0)

    def _check_time(self, t):
        t = np.asarray(t, dtype=np.float64)
        if np.any(t < self.t_start - _T_TOL) or np.any(t > self.t_end + _T_TOL):
            raise SceneError(
                f"time outside trajectory domain [{self.t_start}, {self.t_end}]: "
                f"{np.min(t)}..{np.max(t)}"
            )
        return np.clip(t, self.t_start, self.t_end)

    def position(self, t):
        """Centre-of-gravity position, shape ``t.shape + (2,)``."""
        return self._spline(self._check_time(t))

    def aspect(self, t):
        """Aspect angle ``psi`` of the body x-axis relative to the line of sight."""
        t = self._check_time(t)
        if self.rotation == HEADING:
            pos = self._spline(t)
            vel = self._spline(t, 1)
            heading = np.arctan2(vel[..., 1], vel[..., 0])
            los = np.arctan2(pos[..., 1], pos[..., 0])
            return np.angle(np.exp(1j * (heading - los)))
        return self.rotation(t)


def pose_at(traj: TrajectorySpec, t):
    """Return ``(position, psi)`` of the centre of gravity at time ``t``.

    Raises
    ------
    SceneError
        If ``t`` lies outside the waypoint time span.
    """
    return traj.position(t), traj.aspect(t)


@dataclass(frozen=True)
class Scene:
    """Extended target plus stationary clutter and receiver noise.

    ``trajectory`` may be None only when there are no target scatterers
    (blank scenes).
    """

    name: str
    scatterers: tuple = ()
    trajectory: TrajectorySpec | None = None
    clutter: tuple = ()
    noise_power: float = 0.0
    seed: int = 0
    reflectivity_jitter: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "scatterers", tuple(self.scatterers))
        object.__setattr__(self, "clutter", tuple(self.clutter))
        if not (math.isfinite(self.noise_power) and self.noise_power >= 0):
            raise SceneError(f"noise_power must be >= 0, got {self.noise_power}")
        if self.reflectivity_jitter < 0:
            raise SceneError("reflectivity_jitter must be >= 0")
        if self.scatterers and self.trajectory is None:
            raise SceneError("a scene with target scatterers needs a trajectory")

    @property
    def scene_id(self) -> int:
        """Stable 32-bit identifier used to separate RNG streams between scenes."""
        return zlib.crc32(self.name.encode())

    @property
    def local_offsets(self) -> np.ndarray:
        return np.array([[s.x_local_m, s.y_local_m] for s in self.scatterers]).reshape(-1, 2)

    @property
    def reflectivities(self) -> np.ndarray:
        return np.array([s.reflectivity for s in self.scatterers], dtype=np.float64)

    def covers(self, t0: float, t1: float) -> bool:
        if self.trajectory is None:
            return True
        return (t0 >= self.trajectory.t_start - _T_TOL) and (t1 <= self.trajectory.t_end + _T_TOL)

    def with_seed(self, seed: int) -> "Scene":
        from dataclasses import replace

        return replace(self, seed=int(seed))


def scatterer_positions(scene: Scene, t) -> np.ndarray:
    """Absolute ground positions of every target scatterer.

    Returns
    -------
    ndarray, shape ``(B,) + t.shape + (2,)``
    """
    t = np.asarray(t, dtype=np.float64)
    offsets = scene.local_offsets
    if len(offsets) == 0:
        return np.zeros((0,) + t.shape + (2,))
    centre, psi = pose_at(scene.trajectory, t)
    body = np.arctan2(centre[..., 1], centre[..., 0]) + psi
    c, s = np.cos(body), np.sin(body)
    x = offsets[:, 0].reshape((-1,) + (1,) * t.ndim)
    y = offsets[:, 1].reshape((-1,) + (1,) * t.ndim)
    abs_x = centre[..., 0] + x * c - y * s
    abs_y = centre[..., 1] + x * s + y * c
    return np.stack([abs_x, abs_y], axis=-1)


def range_azimuth(positions: np.ndarray):
    """Range from the origin and azimuth from the +y boresight (positive towards +x)."""
    positions = np.asarray(positions, dtype=np.float64)
    return np.hypot(positions[..., 0], positions[..., 1]), np.arctan2(positions[..., 0], positions[..., 1])


def scatterer_range_azimuth(scene: Scene, b: int, t, mode: str = "exact"):
    """Range and azimuth of target scatterer ``b`` at time ``t``.

    Parameters
    ----------
    mode : {"exact", "projection"}
        ``"exact"`` is the Euclidean distance of the rigidly transformed
        scatterer. ``"projection"`` is the far-field form
        ``R(t) + x_b cos(psi) - y_b sin(psi)``; azimuth is exact in both.
    """
    if not 0 <= b < len(scene.scatterers):
        raise IndexError(f"scatterer index {b} out of range for {len(scene.scatterers)} scatterers")
    pos = scatterer_positions(scene, t)[b]
    r, phi = range_azimuth(pos)
    if mode == "exact":
        return r, phi
    if mode != "projection":
        raise ValueError(f"unknown range mode {mode!r}")
    centre, psi = pose_at(scene.trajectory, t)
    sc = scene.scatterers[b]
    centre_range = np.hypot(centre[..., 0], centre[..., 1])
    return centre_range + sc.x_local_m * np.cos(psi) - sc.y_local_m * np.sin(psi), phi


# ---------------------------------------------------------------------------
# Presets

UTURN_START = (-14.3, 4.9)
UTURN_END = (-14.0, 30.3)
UTURN_DURATION_S = 15.0
# Turning point of the U; the path only has to pass through the two
# surveyed endpoints within the 15 s run.
UTURN_APEX = (-4.0, 17.6)

CAR_LENGTH_M = 3.6
CAR_WIDTH_M = 1.6
CAR_REFLECTIVITY = (
    (0.50, 0.30, 0.25, 0.30, 0.45),
    (0.45, 0.25, 0.20, 0.25, 0.40),
)

_CLUTTER_LAYOUT_SEED = 20240607


def car_scatterers(nx: int = 5, ny: int = 2, length=CAR_LENGTH_M, width=CAR_WIDTH_M, reflectivity=None):
    """``nx`` by ``ny`` grid of scatterers spanning the car footprint."""
    xs = np.linspace(-length / 2, length / 2, nx)
    ys = np.linspace(-width / 2, width / 2, ny)
    if reflectivity is None:
        reflectivity = CAR_REFLECTIVITY if (nx, ny) == (5, 2) else np.full((ny, nx), 0.35)
    return tuple(
        Scatterer(float(x), float(y), float(reflectivity[j][i]))
        for j, y in enumerate(ys)
        for i, x in enumerate(xs)
    )


def road_clutter(n: int = 16, reflectivity: float = 0.04, max_range: float = 33.0):
    """Deterministic field of weak stationary clutter points in front of the radar."""
    rng = np.random.default_rng(_CLUTTER_LAYOUT_SEED)
    r = rng.uniform(3.0, max_range, n)
    az = rng.uniform(-np.pi / 3, np.pi / 3, n)
    amp = reflectivity * rng.uniform(0.5, 1.5, n)
    return tuple(
        Scatterer(float(ri * np.sin(ai)), float(ri * np.cos(ai)), float(a)) for ri, ai, a in zip(r, az, amp)
    )


def uturn_trajectory() -> TrajectorySpec:
    return TrajectorySpec(
        waypoints=(
            (0.0, *UTURN_START),
            (UTURN_DURATION_S / 2, *UTURN_APEX),
            (UTURN_DURATION_S, *UTURN_END),
        ),
        rotation=HEADING,
    )


def single_point_scene(
    range0_m: float = 10.0,
    velocity_mps: float = 0.0,
    acceleration_mps2: float = 0.0,
    azimuth_rad: float = 0.0,
    duration_s: float = 20.0,
    reflectivity: float = 1.0,
    noise_power: float = 0.0,
    clutter=(),
    seed: int = 0,
    name: str = "single-point",
) -> Scene:
    """One scatterer moving radially: ``R(t) = R0 + v t + a t**2 / 2``.

    The quadratic law is sampled at four waypoints, which the cubic spline
    reproduces exactly.
    """
    ts = np.linspace(0.0, duration_s, 4)
    rs = range0_m + velocity_mps * ts + 0.5 * acceleration_mps2 * ts**2
    if np.any(rs <= 0):
        raise SceneError("single-point motion passes through the radar within the duration")
    ux, uy = math.sin(azimuth_rad), math.cos(azimuth_rad)
    waypoints = tuple((float(t), float(r * ux), float(r * uy)) for t, r in zip(ts, rs))
    return Scene(
        name=name,
        scatterers=(Scatterer(0.0, 0.0, reflectivity),),
        trajectory=TrajectorySpec(waypoints, RotationLaw()),
        clutter=tuple(clutter),
        noise_power=noise_power,
        seed=seed,
    )


def builtin_scenarios(seed: int = 0, noise_power: float = 1.0) -> dict:
    """Named scene presets.

    ``"uturn-car"``
        5 x 2 scatterer grid over a 3.6 x 1.6 m car driving a 15 s U-turn
        from (-14.3, 4.9) m to (-14, 30.3) m, plus road clutter and noise.
    ``"blank"``
        Same clutter and noise, no target (noise-floor frames).
    ``"single-point"``
        One stationary noiseless scatterer at 10 m; see
        :func:`single_point_scene` for configurable motion.
    """
    clutter = road_clutter()
    return {
        "uturn-car": Scene(
            name="uturn-car",
            scatterers=car_scatterers(),
            trajectory=uturn_trajectory(),
            clutter=clutter,
            noise_power=noise_power,
            seed=seed,
        ),
        "blank": Scene(name="blank", clutter=clutter, noise_power=noise_power, seed=seed),
        "single-point": single_point_scene(seed=seed),
    }


def get_scenario(name: str, **kwargs) -> Scene:
    presets = builtin_scenarios(**kwargs)
    try:
        return presets[name]
    except KeyError:
        raise SceneError(f"unknown scenario preset {name!r}; choose from {sorted(presets)}") from None
