"""Coarse and fine motion compensation on single-channel range profiles.

Every operation takes a complex ``[range bin, slow time]`` matrix (one
``(p, q)`` channel of one frame) and only applies circular range shifts or
per-column phase factors, so signal energy is preserved.
"""

from ._base import MocompResult, circular_shift, profiles_entropy
from .ccr import CrossCorrelationAlignment, ccr_mocomp
from .coarse import CoarseMocomp, coarse_mocomp
from .entropy import EntropyMinimization, em_mocomp
from .pga import PhaseGradientAutofocus, pga_mocomp

FINE_ALGORITHMS = ("em", "ccr", "pga")
ALGORITHMS = ("none",) + FINE_ALGORITHMS


def compensate(profiles, algorithm, params=None, coarse=None, em=None, ccr=None, pga=None):
    """Run the MOCOMP chain for one channel.

    ``"none"`` returns the input untouched; the fine algorithms run after
    coarse MOCOMP. Keyword dicts ``coarse``/``em``/``ccr``/``pga`` forward
    hyperparameters.

    Returns
    -------
    compensated : ndarray
    results : list of MocompResult
        One entry per stage that ran.
    """
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown MOCOMP algorithm {algorithm!r}; choose from {ALGORITHMS}")
    if algorithm == "none":
        return profiles, []
    first = coarse_mocomp(profiles, **(coarse or {}))
    if algorithm == "em":
        second = em_mocomp(first.cube, params, **(em or {}))
    elif algorithm == "ccr":
        second = ccr_mocomp(first.cube, **(ccr or {}))
    else:
        second = pga_mocomp(first.cube, **(pga or {}))
    return second.cube, [first, second]


__all__ = [
    "ALGORITHMS",
    "FINE_ALGORITHMS",
    "CoarseMocomp",
    "CrossCorrelationAlignment",
    "EntropyMinimization",
    "MocompResult",
    "PhaseGradientAutofocus",
    "ccr_mocomp",
    "circular_shift",
    "coarse_mocomp",
    "compensate",
    "em_mocomp",
    "pga_mocomp",
    "profiles_entropy",
]
