"""Maximal-overlap discrete wavelet transform (Haar), MRA, and inverse.

All convolutions are circular (indices taken mod N), so every coefficient
series has the same length as the input and the transform commutes with
circular shifts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class WaveletFilter:
    """Wavelet/scaling filter pair in the DWT convention (sum g = sqrt(2), sum h = 0)."""

    name: str
    scaling_coeffs: np.ndarray
    wavelet_coeffs: np.ndarray

    def __post_init__(self):
        g = np.asarray(self.scaling_coeffs, dtype=np.float64)
        h = np.asarray(self.wavelet_coeffs, dtype=np.float64)
        if g.shape != h.shape or g.ndim != 1:
            raise ValueError("scaling and wavelet filters must be 1-D and equal length")
        g.flags.writeable = False
        h.flags.writeable = False
        object.__setattr__(self, "scaling_coeffs", g)
        object.__setattr__(self, "wavelet_coeffs", h)

    @property
    def length(self) -> int:
        return self.scaling_coeffs.size


HAAR = WaveletFilter(
    "haar",
    scaling_coeffs=np.array([1.0, 1.0]) / math.sqrt(2.0),
    wavelet_coeffs=np.array([1.0, -1.0]) / math.sqrt(2.0),
)


@dataclass(frozen=True)
class ModwtCoefficients:
    """Raw transform output: J wavelet series plus the level-J scaling series."""

    wavelet: list  # J arrays of length N
    scaling: np.ndarray  # length N
    levels: int
    filter: WaveletFilter

    @property
    def n(self) -> int:
        return self.scaling.size


@dataclass(frozen=True)
class WaveletDecomposition:
    """MRA form: detail series plus smooth, summing elementwise to the input."""

    details: list  # J arrays of length N
    smooth: np.ndarray
    levels: int
    filter: WaveletFilter
    raw: ModwtCoefficients

    @property
    def n(self) -> int:
        return self.smooth.size

    def bands(self) -> list:
        """Detail bands D_1..D_J followed by the smooth band."""
        return [*self.details, self.smooth]


def default_level_count(n: int) -> int:
    """Detail level count J with J+1 total output series, J+1 = floor(ln N)."""
    if n < 8:
        raise ValueError(f"need at least 8 observations to decompose, got {n}")
    return int(math.floor(math.log(n))) - 1


def equivalent_filter_length(base_length: int, level: int) -> int:
    return (2**level - 1) * (base_length - 1) + 1


def _circular_filter(signal: np.ndarray, taps: np.ndarray, step: int) -> np.ndarray:
    """out[t] = sum_l taps[l] * signal[(t - step*l) mod N]."""
    n = signal.size
    t = np.arange(n)[:, None]
    l = np.arange(taps.size)[None, :]
    idx = np.mod(t - step * l, n)
    return signal[idx] @ taps


def _circular_filter_adjoint(signal: np.ndarray, taps: np.ndarray, step: int) -> np.ndarray:
    """out[t] = sum_l taps[l] * signal[(t + step*l) mod N] (circular correlation)."""
    n = signal.size
    t = np.arange(n)[:, None]
    l = np.arange(taps.size)[None, :]
    idx = np.mod(t + step * l, n)
    return signal[idx] @ taps


def modwt(series, filt: WaveletFilter = HAAR, levels: int | None = None) -> ModwtCoefficients:
    """Pyramid MODWT: per-level circular convolution with the rescaled filters."""
    x = np.asarray(series, dtype=np.float64)
    if x.ndim != 1 or x.size < 1:
        raise ValueError("input must be a non-empty 1-D array")
    if not np.all(np.isfinite(x)):
        raise ValueError("input contains non-finite values")
    n = x.size
    j_levels = default_level_count(n) if levels is None else levels
    if j_levels < 1:
        raise ValueError("level count must be at least 1")
    if equivalent_filter_length(filt.length, j_levels) > n:
        raise ValueError(
            f"equivalent filter at level {j_levels} "
            f"(length {equivalent_filter_length(filt.length, j_levels)}) "
            f"exceeds the series length {n}"
        )

    g = filt.scaling_coeffs / math.sqrt(2.0)
    h = filt.wavelet_coeffs / math.sqrt(2.0)

    wavelet_series = []
    v = x
    for j in range(1, j_levels + 1):
        step = 2 ** (j - 1)
        wavelet_series.append(_circular_filter(v, h, step))
        v = _circular_filter(v, g, step)
    return ModwtCoefficients(wavelet=wavelet_series, scaling=v, levels=j_levels, filter=filt)


def _inverse_pyramid(wavelet: list, scaling: np.ndarray, filt: WaveletFilter) -> np.ndarray:
    """Synthesis pyramid: one circular correlation pair per level, top down."""
    g = filt.scaling_coeffs / math.sqrt(2.0)
    h = filt.wavelet_coeffs / math.sqrt(2.0)
    v = scaling
    for j in range(len(wavelet), 0, -1):
        step = 2 ** (j - 1)
        v = _circular_filter_adjoint(wavelet[j - 1], h, step) + _circular_filter_adjoint(
            v, g, step
        )
    return v


def mra(coeffs: ModwtCoefficients) -> WaveletDecomposition:
    """Details and smooth via per-band inverse: synthesize each band alone."""
    n = coeffs.n
    j_levels = coeffs.levels
    if any(w.size != n for w in coeffs.wavelet):
        raise ValueError("coefficient series have inconsistent lengths")
    zero = np.zeros(n)

    details = []
    for j in range(1, j_levels + 1):
        bands = [coeffs.wavelet[j - 1] if i == j - 1 else zero for i in range(j_levels)]
        details.append(_inverse_pyramid(bands, zero, coeffs.filter))
    smooth = _inverse_pyramid([zero] * j_levels, coeffs.scaling, coeffs.filter)
    return WaveletDecomposition(
        details=details, smooth=smooth, levels=j_levels, filter=coeffs.filter, raw=coeffs
    )


def imodwt(decomposition: WaveletDecomposition) -> np.ndarray:
    """MRA bands recombine additively: sum of details plus the smooth."""
    n = decomposition.n
    if any(d.size != n for d in decomposition.details):
        raise ValueError("band lengths disagree")
    return np.sum(decomposition.details, axis=0) + decomposition.smooth


def decompose(series, filt: WaveletFilter = HAAR, levels: int | None = None) -> WaveletDecomposition:
    """modwt followed by mra."""
    return mra(modwt(series, filt, levels))
