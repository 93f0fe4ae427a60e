"""Image-quality metrics and the SISO/MIMO algorithm comparison table."""

from __future__ import annotations

import io
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_image
from .exceptions import DegenerateInputError, DegenerateMetricWarning
from .imaging import FrameStack, RDImage

CONFIGURATIONS = ("SISO", "MIMO")
ALGORITHMS = ("none", "em", "pga", "ccr")
ALGORITHM_LABELS = {
    "none": "No MOCOMP",
    "em": "Entropy minimization",
    "pga": "Phase gradient autofocus",
    "ccr": "Cross-correlation",
}
COV_DEFINITIONS = ("paper", "conventional")


def _pixels(img):
    return check_image(img.pixels if isinstance(img, RDImage) else img)


def image_entropy(img) -> float:
    """Shannon entropy ``-sum p ln p`` of the normalised pixel powers.

    Parameters
    ----------
    img : RDImage or array_like
        Non-negative power image.

    Raises
    ------
    DegenerateInputError
        For an all-zero image.
    """
    pixels = _pixels(img)
    total = pixels.sum()
    if not total > 0:
        raise DegenerateInputError("entropy of an all-zero image is undefined")
    prob = pixels[pixels > 0] / total
    return float(-np.sum(prob * np.log(prob)))


def _stack_pixels(frames) -> np.ndarray:
    if isinstance(frames, FrameStack):
        frames = frames.images
    frames = list(frames)
    if not frames:
        raise ValueError("noise-floor metric needs at least one blank frame")
    return np.concatenate([_pixels(f).ravel() for f in frames])


def cov_from_pixels(values, definition: str = "paper", normalize: bool = True) -> float:
    """Dispersion of pooled noise-floor pixels.

    ``"paper"`` is mean / variance, ``"conventional"`` is std / mean. With
    ``normalize`` the pixels are first scaled to unit mean, which makes the
    paper form comparable between images of different gain (it otherwise
    scales as 1 / gain).
    """
    if definition not in COV_DEFINITIONS:
        raise ValueError(f"unknown CoV definition {definition!r}; choose from {COV_DEFINITIONS}")
    values = np.asarray(values, dtype=np.float64)
    mean = values.mean()
    if not mean > 0:
        raise DegenerateInputError("noise floor has zero mean power")
    if normalize:
        values = values / mean
        mean = 1.0
    var = values.var()
    if definition == "conventional":
        return float(math.sqrt(var) / mean)
    if var == 0:
        warnings.warn("noise floor has zero variance; mean/variance is infinite", DegenerateMetricWarning, stacklevel=3)
        return math.inf
    return float(mean / var)


def noise_floor_cov(blank_frames, definition: str = "paper", normalize: bool = True) -> float:
    """Coefficient of variation of the noise floor pooled over blank frames.

    Parameters
    ----------
    blank_frames : FrameStack or sequence of RDImage
        Frames with no target in view.
    definition : {"paper", "conventional"}
        ``"paper"``: mean / variance (``inf`` plus a
        :class:`DegenerateMetricWarning` when the variance is zero).
        ``"conventional"``: standard deviation / mean.
    normalize : bool
        Scale pooled pixels to unit mean first.
    """
    return cov_from_pixels(_stack_pixels(blank_frames), definition, normalize)


def noise_floor_stats(blank_frames) -> dict:
    values = _stack_pixels(blank_frames)
    return {
        "mean_power": float(values.mean()),
        "variance": float(values.var()),
        "cov_paper": cov_from_pixels(values, "paper"),
        "cov_conventional": cov_from_pixels(values, "conventional"),
        "num_pixels": int(values.size),
    }


def peak_mask(img, db_down: float = 10.0) -> np.ndarray:
    """Boolean mask of pixels within ``db_down`` dB of the image peak."""
    pixels = _pixels(img)
    return pixels >= pixels.max() * 10 ** (-db_down / 10)


def scnr_db(img, target_mask, blank_frames) -> float:
    """``10 log10(mean power inside mask / mean blank-frame power)``."""
    pixels = _pixels(img)
    mask = np.asarray(target_mask, dtype=bool)
    if mask.shape != pixels.shape:
        raise ValueError(f"mask shape {mask.shape} does not match image {pixels.shape}")
    if not mask.any():
        raise ValueError("target mask is empty")
    if blank_frames is None:
        raise ValueError("SCNR needs blank frames for the noise floor")
    floor = _stack_pixels(blank_frames).mean()
    if not floor > 0:
        raise DegenerateInputError("blank frames have zero power")
    return float(10 * np.log10(pixels[mask].mean() / floor))


def improvement_pct(cov_none: float, cov_alg: float) -> float:
    """Relative reduction of CoV versus the uncompensated case, in percent."""
    if not cov_none > 0 or math.isinf(cov_none):
        return math.nan
    return 100.0 * (cov_none - cov_alg) / cov_none


@dataclass
class CellResult:
    """Inputs for one (configuration, algorithm) cell of the comparison."""

    blank: FrameStack
    frames: FrameStack | None = None


@dataclass
class CellMetrics:
    cov: dict
    improvement_pct: dict
    entropy: list = field(default_factory=list)
    scnr_db: list = field(default_factory=list)
    frame_indices: list = field(default_factory=list)
    noise_mean_power: float = math.nan


@dataclass
class MetricsReport:
    """CoV per (configuration, algorithm) with improvements relative to ``none``."""

    cells: dict
    degenerate: bool = False
    primary_definition: str = "paper"

    def cov(self, config: str, algo: str, definition: str | None = None) -> float:
        return self.cells[(config, algo)].cov[definition or self.primary_definition]

    def improvement(self, config: str, algo: str, definition: str | None = None) -> float:
        return self.cells[(config, algo)].improvement_pct[definition or self.primary_definition]

    def render(self) -> str:
        """Plain-text table laid out like the published comparison."""
        out = io.StringIO()
        algos = [a for a in ALGORITHMS if ("SISO", a) in self.cells]
        for definition in (self.primary_definition,) + tuple(d for d in COV_DEFINITIONS if d != self.primary_definition):
            label = "mean/variance" if definition == "paper" else "std/mean"
            out.write(f"Noise-floor coefficient of variation ({definition}: {label}, unit-mean normalised)\n")
            out.write(f"{'Case':<26}{'SISO':>10}{'MIMO':>10}{'% impr. SISO':>15}{'% impr. MIMO':>15}\n")
            for algo in algos:
                s = self.cells[("SISO", algo)]
                m = self.cells[("MIMO", algo)]
                if algo == "none":
                    imp_s = imp_m = "-"
                else:
                    imp_s = f"{s.improvement_pct[definition]:.2f}"
                    imp_m = f"{m.improvement_pct[definition]:.2f}"
                out.write(
                    f"{ALGORITHM_LABELS[algo]:<26}{s.cov[definition]:>10.4f}{m.cov[definition]:>10.4f}"
                    f"{imp_s:>15}{imp_m:>15}\n"
                )
            out.write("\n")
        out.write("Improvements use unrounded CoV values; recomputing them from the rounded table entries can differ.\n")
        if self.degenerate:
            out.write("Degenerate configuration: no target present, noise-floor statistics only.\n")
        else:
            out.write("\nPer-frame image entropy / SCNR (dB)\n")
            for (config, algo), cell in sorted(self.cells.items()):
                parts = [
                    f"{i}:{e:.4f}/{s:.2f}" for i, e, s in zip(cell.frame_indices, cell.entropy, cell.scnr_db)
                ]
                out.write(f"{config:<5}{algo:<5} " + " ".join(parts) + "\n")
        return out.getvalue()

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("configuration,algorithm,cov_paper,cov_conventional,improvement_paper_pct,improvement_conventional_pct,noise_mean_power\n")
        for config in CONFIGURATIONS:
            for algo in ALGORITHMS:
                cell = self.cells.get((config, algo))
                if cell is None:
                    continue
                out.write(
                    f"{config},{algo},{cell.cov['paper']!r},{cell.cov['conventional']!r},"
                    f"{cell.improvement_pct['paper']!r},{cell.improvement_pct['conventional']!r},"
                    f"{cell.noise_mean_power!r}\n"
                )
        return out.getvalue()


def comparison_table(
    results: dict, primary_definition: str = "paper", mask_db_down: float = 10.0, require_all: bool = True
) -> MetricsReport:
    """Build the SISO/MIMO x algorithm comparison.

    Parameters
    ----------
    results : dict
        ``{(configuration, algorithm): CellResult}`` covering all of
        ``{"SISO", "MIMO"} x {"none", "em", "pga", "ccr"}``.
    primary_definition : {"paper", "conventional"}
        CoV used by :meth:`MetricsReport.cov` by default; both are stored.
    mask_db_down : float
        Target mask for SCNR: pixels within this many dB of each frame's peak.
    require_all : bool
        When False, a subset of algorithms is accepted; improvements without
        a matching ``none`` cell are NaN.
    """
    missing = [(c, a) for c in CONFIGURATIONS for a in ALGORITHMS if (c, a) not in results]
    if missing and require_all:
        raise ValueError(f"comparison needs every configuration; missing {missing}")
    cells = {}
    degenerate = True
    for key, res in results.items():
        values = _stack_pixels(res.blank)
        cov = {d: cov_from_pixels(values, d) for d in COV_DEFINITIONS}
        cell = CellMetrics(cov=cov, improvement_pct={}, noise_mean_power=float(values.mean()))
        if res.frames is not None and len(res.frames):
            degenerate = False
            for img in res.frames:
                cell.frame_indices.append(img.frame_index)
                cell.entropy.append(image_entropy(img))
                cell.scnr_db.append(scnr_db(img, peak_mask(img, mask_db_down), res.blank))
        cells[key] = cell
    for (config, algo), cell in cells.items():
        base = cells[(config, "none")].cov if (config, "none") in cells else {d: math.nan for d in COV_DEFINITIONS}
        cell.improvement_pct = {d: (0.0 if algo == "none" else improvement_pct(base[d], cell.cov[d])) for d in COV_DEFINITIONS}
    return MetricsReport(cells=cells, degenerate=degenerate, primary_definition=primary_definition)
