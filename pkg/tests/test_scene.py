import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimo_isar.exceptions import SceneError
from mimo_isar.scene import (
    HEADING,
    RotationLaw,
    Scatterer,
    Scene,
    TrajectorySpec,
    builtin_scenarios,
    car_scatterers,
    get_scenario,
    pose_at,
    scatterer_positions,
    scatterer_range_azimuth,
    single_point_scene,
)


def straight_scene(scatterers, psi0=0.0, alpha=0.0):
    traj = TrajectorySpec(((0.0, 0.0, 10.0), (10.0, 5.0, 20.0)), RotationLaw(psi0, alpha, 0.0))
    return Scene("straight", tuple(scatterers), traj)


def rigid_oracle(centre, psi, x, y):
    """Absolute scatterer position by explicit rotation of the body frame."""
    los = math.atan2(centre[1], centre[0])
    theta = los + psi
    rot = np.array([[math.cos(theta), -math.sin(theta)], [math.sin(theta), math.cos(theta)]])
    return np.asarray(centre) + rot @ np.array([x, y])


def test_uturn_endpoints_and_duration():
    scene = get_scenario("uturn-car")
    traj = scene.trajectory
    assert traj.duration == 15.0
    np.testing.assert_allclose(pose_at(traj, 0.0)[0], (-14.3, 4.9), atol=1e-12)
    np.testing.assert_allclose(pose_at(traj, 15.0)[0], (-14.0, 30.3), atol=1e-12)


def test_constant_rotation_law():
    traj = TrajectorySpec(((0, 0, 5), (1, 0, 6)), RotationLaw(0.3, 0.0, 0.0))
    _, psi = pose_at(traj, np.linspace(0, 1, 7))
    np.testing.assert_array_equal(psi, 0.3)


def test_out_of_domain_time_raises():
    traj = TrajectorySpec(((0, 0, 5), (1, 0, 6)))
    with pytest.raises(SceneError):
        pose_at(traj, 1.5)
    with pytest.raises(SceneError):
        pose_at(traj, -0.1)


@pytest.mark.parametrize(
    "waypoints",
    [((0, 0, 5),), ((0, 0, 5), (0, 1, 6)), ((1, 0, 5), (0, 1, 6)), ((0, 0, math.inf), (1, 0, 6))],
)
def test_bad_waypoints_rejected(waypoints):
    with pytest.raises(SceneError):
        TrajectorySpec(waypoints)


def test_negative_reflectivity_rejected():
    with pytest.raises(SceneError):
        Scatterer(0.0, 0.0, -0.1)


def test_projection_mode_zero_aspect():
    scene = straight_scene([Scatterer(0.7, 0.0)], psi0=0.0)
    t = np.linspace(0, 10, 5)
    centre, _ = pose_at(scene.trajectory, t)
    r, _ = scatterer_range_azimuth(scene, 0, t, mode="projection")
    np.testing.assert_allclose(r, np.hypot(centre[:, 0], centre[:, 1]) + 0.7, rtol=0, atol=1e-12)


def test_projection_mode_quarter_turn():
    scene = straight_scene([Scatterer(0.0, 0.4)], psi0=math.pi / 2)
    t = np.array([0.0, 3.0, 7.5])
    centre, _ = pose_at(scene.trajectory, t)
    r, _ = scatterer_range_azimuth(scene, 0, t, mode="projection")
    np.testing.assert_allclose(r, np.hypot(centre[:, 0], centre[:, 1]) - 0.4, atol=1e-12)


def test_exact_range_matches_rigid_body_oracle_for_car_at_8_4s():
    scene = get_scenario("uturn-car")
    t = 8.4
    centre, psi = pose_at(scene.trajectory, t)
    for b, sc in enumerate(scene.scatterers):
        pos = rigid_oracle(centre, float(psi), sc.x_local_m, sc.y_local_m)
        r, phi = scatterer_range_azimuth(scene, b, t)
        assert abs(float(r) - math.hypot(*pos)) < 1e-9
        assert abs(float(phi) - math.atan2(pos[0], pos[1])) < 1e-12


def test_projection_is_first_order_of_exact():
    scene = get_scenario("uturn-car")
    t = np.linspace(1, 14, 9)
    for b in range(len(scene.scatterers)):
        exact, _ = scatterer_range_azimuth(scene, b, t)
        approx, _ = scatterer_range_azimuth(scene, b, t, mode="projection")
        # second-order term is bounded by |offset|^2 / (2 R)
        centre, _ = pose_at(scene.trajectory, t)
        bound = 2.0**2 / np.hypot(centre[:, 0], centre[:, 1])
        assert np.all(np.abs(exact - approx) <= bound)


def test_rigid_body_distances_constant():
    scene = get_scenario("uturn-car")
    pos = scatterer_positions(scene, np.linspace(0, 15, 31))  # (B, T, 2)
    d = np.linalg.norm(pos[:, None] - pos[None, :], axis=-1)  # (B, B, T)
    np.testing.assert_allclose(d, np.repeat(d[..., :1], d.shape[-1], axis=-1), atol=1e-9)


@settings(max_examples=40, deadline=None)
@given(
    x=st.floats(-2, 2),
    y=st.floats(-1, 1),
    psi=st.floats(-math.pi, math.pi),
    speed=st.floats(0.1, 3.0),
)
def test_projection_offset_independent_of_speed(x, y, psi, speed):
    t = np.array([0.3, 0.9])
    offsets = []
    for v in (speed, 2 * speed):
        traj = TrajectorySpec(((0.0, 0.0, 10.0), (1.0, 0.0, 10.0 + v)), RotationLaw(psi, 0.0, 0.0))
        scene = Scene("s", (Scatterer(x, y),), traj)
        r, _ = scatterer_range_azimuth(scene, 0, t, mode="projection")
        centre, _ = pose_at(traj, t)
        offsets.append(r - np.hypot(centre[:, 0], centre[:, 1]))
    np.testing.assert_allclose(offsets[0], offsets[1], atol=1e-12)


def test_spline_passes_through_waypoints():
    traj = builtin_scenarios()["uturn-car"].trajectory
    for t, x, y in traj.waypoints:
        np.testing.assert_allclose(traj.position(t), (x, y), atol=1e-12)


def test_heading_mode_follows_tangent():
    traj = TrajectorySpec(((0.0, -5.0, 10.0), (1.0, 0.0, 10.0), (2.0, 5.0, 10.0)), HEADING)
    t = 1.0
    pos = traj.position(t)
    los = math.atan2(pos[1], pos[0])
    # moving along +x, so the body x-axis points along +x
    assert float(traj.aspect(t)) == pytest.approx(np.angle(np.exp(1j * (0.0 - los))), abs=1e-9)


def test_presets():
    presets = builtin_scenarios(seed=3, noise_power=0.5)
    assert set(presets) >= {"uturn-car", "blank", "single-point"}
    blank = presets["blank"]
    assert len(blank.scatterers) == 0 and blank.noise_power > 0
    car = presets["uturn-car"]
    assert len(car.scatterers) == 10
    xs = [s.x_local_m for s in car.scatterers]
    ys = [s.y_local_m for s in car.scatterers]
    assert max(xs) - min(xs) == pytest.approx(3.6)
    assert max(ys) - min(ys) == pytest.approx(1.6)
    assert car.seed == 3
    with pytest.raises(SceneError):
        get_scenario("truck")


def test_single_point_linear_motion_exact():
    scene = single_point_scene(range0_m=12.0, velocity_mps=-0.8, duration_s=10.0)
    t = np.linspace(0, 10, 23)
    r, _ = scatterer_range_azimuth(scene, 0, t)
    np.testing.assert_allclose(r, 12.0 - 0.8 * t, atol=1e-9)


def test_car_grid_shape():
    grid = car_scatterers(4, 3)
    assert len(grid) == 12
    assert all(s.reflectivity == 0.35 for s in grid)
