"""Input validation helpers shared by the estimators and transforms.

scikit-learn's ``check_array`` rejects complex input, so the complex
profile matrices used throughout are validated here instead.
"""

import numpy as np

from .exceptions import DegenerateInputError


def check_profiles(X, *, min_columns=1, allow_zero=True, copy=False, name="profiles"):
    """Validate a complex ``[range bin, slow time]`` matrix.

    Parameters
    ----------
    X : array_like
        Two-dimensional real or complex array.
    min_columns : int
        Minimum number of slow-time columns.
    allow_zero : bool
        If False, an all-zero matrix raises :class:`DegenerateInputError`.
    copy : bool
        Force a copy even when ``X`` is already complex128.

    Returns
    -------
    numpy.ndarray
        complex128 array of shape ``(n_range, n_slow)``.
    """
    X = np.array(X, dtype=np.complex128, copy=copy or None)
    if X.ndim != 2:
        raise ValueError(f"{name} must be 2-D [range, slow time], got shape {X.shape}")
    if X.shape[0] < 1 or X.shape[1] < min_columns:
        raise ValueError(
            f"{name} needs at least 1 range bin and {min_columns} slow-time columns, "
            f"got shape {X.shape}"
        )
    if not np.all(np.isfinite(X)):
        raise ValueError(f"{name} contains non-finite values")
    if not allow_zero and not np.any(X):
        raise DegenerateInputError(f"{name} is all zero")
    return X


def check_image(pixels, name="image"):
    """Validate a non-negative real 2-D power image and return it as float64."""
    pixels = np.asarray(pixels, dtype=np.float64)
    if pixels.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {pixels.shape}")
    if not np.all(np.isfinite(pixels)):
        raise ValueError(f"{name} contains non-finite values")
    if np.any(pixels < 0):
        raise ValueError(f"{name} has negative pixels")
    return pixels


def check_same_shape(X, shape, name="profiles"):
    if X.shape != tuple(shape):
        raise ValueError(f"{name} shape {X.shape} does not match fitted shape {tuple(shape)}")
