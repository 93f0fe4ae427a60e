"""Range-Doppler imaging and non-coherent integration across channels.

Transform conventions (both orthonormal, so image energy equals input
energy and ``sum(pixels) == N * L * mean(|x|**2)``):

* fast time -> range uses the positive-exponent DFT, because the dechirped
  tone for a scatterer beyond the reference range is ``exp(-j 2 pi f_b tau)``;
  a scatterer ``k`` range bins out therefore lands in bin ``k``.
* slow time -> Doppler uses the ordinary forward DFT followed by
  ``fftshift``; zero Doppler sits at column ``L // 2``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._validation import check_image, check_profiles
from .params import derive_params
from .synth import RawCube

INTEGRATED = "integrated"


@dataclass
class RDImage:
    """Range-Doppler power image, ``pixels[range bin, doppler bin]``."""

    pixels: np.ndarray
    channel: tuple | str = INTEGRATED
    frame_index: int = 0
    range_bin_m: float = 1.0
    doppler_bin_hz: float = 1.0

    def __post_init__(self):
        self.pixels = check_image(self.pixels, name="RDImage pixels")

    @property
    def shape(self):
        return self.pixels.shape

    @property
    def range_axis_m(self) -> np.ndarray:
        return np.arange(self.shape[0]) * self.range_bin_m

    @property
    def doppler_axis_hz(self) -> np.ndarray:
        L = self.shape[1]
        return (np.arange(L) - L // 2) * self.doppler_bin_hz

    @property
    def doppler_index(self) -> np.ndarray:
        """1-based Doppler index as plotted along the horizontal axis."""
        return np.arange(1, self.shape[1] + 1)


@dataclass
class FrameStack:
    """Images of one configuration (a SISO channel or the MIMO integration) over frames."""

    images: list = field(default_factory=list)

    def __post_init__(self):
        self.images = list(self.images)
        if self.images:
            ref = self.images[0]
            for img in self.images[1:]:
                if img.shape != ref.shape:
                    raise ValueError(f"frame stack mixes shapes {ref.shape} and {img.shape}")
                if (img.range_bin_m, img.doppler_bin_hz) != (ref.range_bin_m, ref.doppler_bin_hz):
                    raise ValueError("frame stack mixes axis spacings")

    def __len__(self):
        return len(self.images)

    def __iter__(self):
        return iter(self.images)

    def __getitem__(self, i):
        return self.images[i]

    def append(self, img: RDImage):
        self.images.append(img)
        self.__post_init__()

    def pixels(self) -> np.ndarray:
        return np.stack([img.pixels for img in self.images])


def _window(name, n):
    if name in (None, "none"):
        return None
    if name == "hann":
        return np.hanning(n)
    if name == "hamming":
        return np.hamming(n)
    raise ValueError(f"unknown window {name!r}; use None, 'hann' or 'hamming'")


def _check_channel(cube: RawCube, p, q):
    P, Q = cube.shape[:2]
    if not (0 <= p < P and 0 <= q < Q):
        raise IndexError(f"channel ({p}, {q}) outside {P} x {Q} array")


def fast_to_range(samples, window=None):
    """Fast-time samples ``[..., n]`` to range bins ``[..., k]``."""
    samples = np.asarray(samples)
    w = _window(window, samples.shape[-1])
    if w is not None:
        samples = samples * w
    return np.fft.ifft(samples, axis=-1, norm="ortho")


def range_to_fast(profiles_lk):
    """Inverse of :func:`fast_to_range` (unwindowed)."""
    return np.fft.fft(profiles_lk, axis=-1, norm="ortho")


def range_profiles(cube: RawCube, p: int, q: int, window=None) -> np.ndarray:
    """Range-compress channel ``(p, q)``.

    Returns
    -------
    ndarray, shape ``(N, L)``
        Complex ``[range bin, slow time]`` matrix.
    """
    _check_channel(cube, p, q)
    return fast_to_range(cube.data[p, q], window).T


def profiles_to_cube_channel(profiles) -> np.ndarray:
    """Map a ``[range, slow]`` matrix back to ``[slow, fast]`` samples."""
    return range_to_fast(np.asarray(profiles).T)


def apply_range_window(profiles, window=None):
    """Re-weight range profiles as if the fast-time window had been applied before compression."""
    if _window(window, 1) is None:
        return profiles
    return fast_to_range(range_to_fast(np.asarray(profiles).T), window).T


def doppler_transform(profiles, window=None) -> np.ndarray:
    """Slow-time DFT of ``[range, slow]`` profiles, zero Doppler centred."""
    profiles = np.asarray(profiles)
    w = _window(window, profiles.shape[-1])
    if w is not None:
        profiles = profiles * w
    return np.fft.fftshift(np.fft.fft(profiles, axis=-1, norm="ortho"), axes=-1)


def power_image(profiles, window=None) -> np.ndarray:
    """``|Doppler transform|**2`` of a ``[range, slow]`` matrix."""
    spec = doppler_transform(profiles, window)
    return spec.real**2 + spec.imag**2


def image_from_profiles(profiles, *, channel=INTEGRATED, frame_index=0, params=None, doppler_window=None) -> RDImage:
    profiles = check_profiles(profiles)
    range_bin, doppler_bin = 1.0, 1.0
    if params is not None:
        d = derive_params(params)
        range_bin, doppler_bin = d.range_bin_m, d.doppler_bin_hz
    return RDImage(
        pixels=power_image(profiles, doppler_window),
        channel=channel,
        frame_index=frame_index,
        range_bin_m=range_bin,
        doppler_bin_hz=doppler_bin,
    )


def range_doppler(cube: RawCube, p: int, q: int, window=None, doppler_window=None) -> RDImage:
    """Range-Doppler power image of channel ``(p, q)``."""
    return image_from_profiles(
        range_profiles(cube, p, q, window),
        channel=(p, q),
        frame_index=cube.frame_index,
        params=cube.params,
        doppler_window=doppler_window,
    )


def nci(images) -> RDImage:
    """Non-coherent integration: pixelwise mean of per-channel power images.

    The mean (not the sum) keeps the integrated noise floor at the same
    level as a single channel. Channels are reduced in the given order.
    """
    images = list(images)
    if not images:
        raise ValueError("nci needs at least one image")
    ref = images[0]
    for img in images[1:]:
        if img.shape != ref.shape:
            raise ValueError(f"nci shape mismatch: {ref.shape} vs {img.shape}")
        if img.frame_index != ref.frame_index:
            raise ValueError(f"nci mixes frames {ref.frame_index} and {img.frame_index}")
    stack = np.stack([img.pixels for img in images])
    return RDImage(
        pixels=stack.mean(axis=0),
        channel=INTEGRATED,
        frame_index=ref.frame_index,
        range_bin_m=ref.range_bin_m,
        doppler_bin_hz=ref.doppler_bin_hz,
    )


def mimo_image(cube: RawCube, window=None, doppler_window=None) -> RDImage:
    """NCI over all ``P * Q`` channel images of a cube."""
    return nci(range_doppler(cube, p, q, window, doppler_window) for p, q in cube.channels())
