import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mimo_isar.exceptions import DegenerateInputError, DegenerateMetricWarning
from mimo_isar.imaging import FrameStack, RDImage, mimo_image, range_doppler
from mimo_isar.metrics import (
    ALGORITHMS,
    CellResult,
    comparison_table,
    cov_from_pixels,
    image_entropy,
    improvement_pct,
    noise_floor_cov,
    noise_floor_stats,
    peak_mask,
    scnr_db,
)
from mimo_isar.scene import Scene, single_point_scene
from mimo_isar.synth import synthesize_frame


def test_entropy_single_pixel():
    img = np.zeros((4, 4))
    img[1, 2] = 3.0
    assert image_entropy(img) == 0.0


def test_entropy_uniform():
    assert image_entropy(np.ones((8, 16))) == pytest.approx(math.log(128), rel=1e-12)


def test_entropy_two_pixels():
    img = np.zeros((5, 5))
    img[0, 0] = img[4, 4] = 2.0
    assert image_entropy(img) == pytest.approx(0.6931, abs=1e-4)


def test_entropy_errors():
    with pytest.raises(DegenerateInputError):
        image_entropy(np.zeros((3, 3)))
    with pytest.raises(ValueError):
        image_entropy(-np.ones((3, 3)))


@settings(max_examples=30, deadline=None)
@given(alpha=st.floats(1e-6, 1e6), seed=st.integers(0, 2**32 - 1))
def test_entropy_scale_invariant_and_bounded(alpha, seed):
    img = np.random.default_rng(seed).random((6, 7))
    e = image_entropy(img)
    assert image_entropy(alpha * img) == pytest.approx(e, abs=1e-9)
    assert 0.0 <= e <= math.log(42) + 1e-12


def test_constant_floor_paper_cov_is_infinite():
    with pytest.warns(DegenerateMetricWarning):
        assert noise_floor_cov([RDImage(np.full((4, 4), 2.0))]) == math.inf
    assert noise_floor_cov([RDImage(np.full((4, 4), 2.0))], "conventional") == 0.0


def test_exponential_pixels_conventional_cov_is_one():
    rng = np.random.default_rng(7)
    z = rng.standard_normal(10**6) + 1j * rng.standard_normal(10**6)
    assert cov_from_pixels(np.abs(z) ** 2, "conventional") == pytest.approx(1.0, abs=0.05)


@settings(max_examples=30, deadline=None)
@given(alpha=st.floats(1e-3, 1e3), seed=st.integers(0, 2**32 - 1))
def test_cov_scaling_laws(alpha, seed):
    values = np.random.default_rng(seed).exponential(size=500)
    conv = cov_from_pixels(values, "conventional")
    assert cov_from_pixels(alpha * values, "conventional") == pytest.approx(conv, rel=1e-9)
    raw = cov_from_pixels(values, "paper", normalize=False)
    assert cov_from_pixels(alpha * values, "paper", normalize=False) == pytest.approx(raw / alpha, rel=1e-9)
    # the normalised paper form is what the comparison uses, and it is gain-free
    assert cov_from_pixels(alpha * values, "paper") == pytest.approx(cov_from_pixels(values, "paper"), rel=1e-9)


def test_cov_errors():
    with pytest.raises(ValueError):
        noise_floor_cov([])
    with pytest.raises(ValueError):
        cov_from_pixels([1.0, 2.0], "median")
    with pytest.raises(DegenerateInputError):
        cov_from_pixels(np.zeros(4))


def test_noise_floor_stats_keys():
    stats = noise_floor_stats(FrameStack([RDImage(np.arange(1.0, 7.0).reshape(2, 3))]))
    assert stats["num_pixels"] == 6 and stats["mean_power"] == 3.5
    assert stats["cov_conventional"] == pytest.approx(math.sqrt(35 / 12) / 3.5)


def test_scnr_equal_to_floor_is_zero_db():
    img = RDImage(np.full((4, 4), 3.0))
    mask = np.zeros((4, 4), bool)
    mask[2, 1] = True
    assert scnr_db(img, mask, [img]) == pytest.approx(0.0, abs=1e-12)


def test_scnr_amplitude_law():
    floor = [RDImage(np.ones((8, 8)))]
    img = np.ones((8, 8))
    img[3, 3] = 50.0
    mask = peak_mask(img)
    low = scnr_db(img, mask, floor)
    img[3, 3] *= 100.0  # amplitude x 10
    assert scnr_db(img, mask, floor) - low == pytest.approx(20.0, abs=1e-9)


def test_scnr_errors():
    img = RDImage(np.ones((2, 2)))
    with pytest.raises(ValueError):
        scnr_db(img, np.zeros((2, 2), bool), [img])
    with pytest.raises(ValueError):
        scnr_db(img, np.ones((2, 2), bool), None)
    with pytest.raises(ValueError):
        scnr_db(img, np.ones((3, 2), bool), [img])


def test_mimo_scnr_beats_siso_for_weak_target(params):
    wins = 0
    for seed in range(20):
        scene = single_point_scene(range0_m=10.3, velocity_mps=0.3, azimuth_rad=0.3, reflectivity=0.05, noise_power=1.0, seed=seed)
        blank = synthesize_frame(Scene("floor", (), scene.trajectory, noise_power=1.0, seed=seed + 1000), params, 0)
        cube = synthesize_frame(scene, params, 0)
        siso, mimo = range_doppler(cube, 0, 0), mimo_image(cube)
        s = scnr_db(siso, peak_mask(siso), [range_doppler(blank, 0, 0)])
        m = scnr_db(mimo, peak_mask(mimo), [mimo_image(blank)])
        wins += m >= s
    assert wins >= 19


def test_improvement_examples():
    assert improvement_pct(0.24, 0.15) == pytest.approx(37.5)
    assert improvement_pct(0.3, 0.3) == 0.0
    assert math.isnan(improvement_pct(0.0, 0.1))


def _cells(rng, scale=None):
    out = {}
    for config in ("SISO", "MIMO"):
        for k, algo in enumerate(ALGORITHMS):
            shape = 1.0 if config == "SISO" else 12.0
            blank = FrameStack([RDImage(rng.gamma(shape, 1 / shape, size=(8, 8)) * (1 + k)) for _ in range(2)])
            frames = FrameStack([RDImage(rng.random((8, 8)) + 5 * np.eye(8), frame_index=i) for i in (84, 86)])
            out[(config, algo)] = CellResult(blank, frames)
    return out


def test_comparison_table_structure(rng):
    report = comparison_table(_cells(rng))
    assert report.improvement("SISO", "none") == 0.0
    for config in ("SISO", "MIMO"):
        for algo in ALGORITHMS:
            assert report.cov(config, algo) >= 0
            base = report.cov(config, "none", "conventional")
            want = 100 * (base - report.cov(config, algo, "conventional")) / base
            assert report.improvement(config, algo, "conventional") == pytest.approx(want)
    text = report.render()
    assert "Cross-correlation" in text and "unrounded" in text
    lines = report.to_csv().splitlines()
    assert lines[0].startswith("configuration,algorithm") and len(lines) == 9
    assert report.cells[("MIMO", "em")].frame_indices == [84, 86]


def test_comparison_table_missing_cell(rng):
    cells = _cells(rng)
    del cells[("MIMO", "pga")]
    with pytest.raises(ValueError, match="missing"):
        comparison_table(cells)
    report = comparison_table(cells, require_all=False)
    assert ("MIMO", "pga") not in report.cells


def test_comparison_table_blank_only_is_degenerate(rng):
    cells = {k: CellResult(v.blank) for k, v in _cells(rng).items()}
    report = comparison_table(cells)
    assert report.degenerate
    assert "no target" in report.render()
