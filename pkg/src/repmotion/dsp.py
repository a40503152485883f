"""Signal-processing primitives on 1-D numpy arrays.

All functions take plain ``float`` arrays; the sampling rate is passed
explicitly where a physical unit (Hz, seconds) is involved.
"""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import DegenerateFitError, InsufficientDataError

# relative magnitude below which a sample (or spectrum) counts as exactly zero
_ZERO_TOL = 1e-10


class Spectrum(NamedTuple):
    bin_width_hz: float
    magnitudes: np.ndarray

    @property
    def frequencies(self) -> np.ndarray:
        return np.arange(len(self.magnitudes)) * self.bin_width_hz


class DominantFrequency(NamedTuple):
    hz: float
    periodic: bool


class PeakSet(NamedTuple):
    indices: np.ndarray
    heights: np.ndarray

    def __len__(self):
        return len(self.indices)


class Peaks(NamedTuple):
    all: PeakSet
    prominent: PeakSet
    weak: PeakSet


class PolyFit(NamedTuple):
    coefficients: np.ndarray  # lowest order first
    residual: float  # sum of squared residuals


def _as_signal(x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1:
        raise ValueError("expected a 1-D signal")
    return x


def is_flat(x, tol: float = _ZERO_TOL) -> bool:
    """True when the signal has (numerically) no variation around its mean."""
    x = _as_signal(x)
    if len(x) == 0:
        return True
    dev = np.abs(x - x.mean()).max()
    return dev <= tol * max(np.abs(x).max(), 1.0)


def zero_crossings(x) -> tuple[int, np.ndarray]:
    """Count sign changes of the mean-removed signal.

    Returns ``(count, indices)`` where each index ``i`` marks a crossing
    between samples ``i - 1`` and ``i``. Samples that are exactly zero take
    the sign of the previous sample. A signal that starts exactly on its
    mean is leaving a crossing, so a leading run of zeros takes the sign
    opposite to the first non-zero sample and counts as a crossing at 0.
    """
    x = _as_signal(x)
    if len(x) < 2:
        return 0, np.empty(0, dtype=int)
    d = x - x.mean()
    scale = np.abs(d).max()
    if scale == 0:
        return 0, np.empty(0, dtype=int)
    sign = np.sign(d)
    sign[np.abs(d) <= _ZERO_TOL * scale] = 0
    nz = np.flatnonzero(sign)
    if len(nz) == 0:
        return 0, np.empty(0, dtype=int)
    leading = nz[0] > 0
    # forward-fill zeros with the previous sign
    idx = np.where(sign != 0, np.arange(len(sign)), 0)
    np.maximum.accumulate(idx, out=idx)
    filled = sign[idx]
    if leading:
        filled[:nz[0]] = -sign[nz[0]]
    crossings = np.flatnonzero(filled[1:] != filled[:-1]) + 1
    if leading:
        # the leading run is a single crossing, placed at its start
        crossings = np.concatenate(([0], crossings[crossings != nz[0]]))
    return len(crossings), crossings


def magnitude_spectrum(x, fps: float) -> Spectrum:
    """One-sided DFT magnitudes of the mean-removed signal."""
    x = _as_signal(x)
    mags = np.abs(np.fft.rfft(x - x.mean()))
    return Spectrum(fps / len(x), mags)


def dominant_frequency(x, fps: float) -> DominantFrequency:
    """Frequency of the largest non-DC spectral bin.

    A flat signal has an all-zero spectrum and reports ``0 Hz`` with
    ``periodic=False``.
    """
    x = _as_signal(x)
    if len(x) < 8:
        raise InsufficientDataError(f"dominant_frequency needs >= 8 samples, got {len(x)}")
    spec = magnitude_spectrum(x, fps)
    mags = spec.magnitudes[1:]
    if mags.max() <= _ZERO_TOL * max(np.abs(x).max(), 1.0) * len(x):
        return DominantFrequency(0.0, False)
    return DominantFrequency(float((np.argmax(mags) + 1) * spec.bin_width_hz), True)


def refined_frequency(x, fps: float, pad_factor: int = 16) -> float:
    """Spectral peak frequency located finer than one bin.

    The mean-removed signal is zero padded to ``pad_factor`` times its
    length and the highest non-DC bin is refined by a parabola through its
    neighbours. Returns 0 for a flat signal.
    """
    x = _as_signal(x)
    if len(x) < 8:
        raise InsufficientDataError(f"refined_frequency needs >= 8 samples, got {len(x)}")
    if is_flat(x):
        return 0.0
    n_fft = len(x) * max(int(pad_factor), 1)
    mags = np.abs(np.fft.rfft(x - x.mean(), n_fft))
    k = int(np.argmax(mags[1:])) + 1
    shift = 0.0
    if k < len(mags) - 1:
        a, b, c = mags[k - 1], mags[k], mags[k + 1]
        den = a - 2 * b + c
        if den < 0:
            shift = 0.5 * (a - c) / den
    return float((k + shift) * fps / n_fft)


def autocorrelation(x, unbiased: bool = False) -> np.ndarray:
    """Normalized autocorrelation ``r(tau)`` for ``tau = 0 .. n-1``.

    The default biased estimator divides every lag by ``r(0)`` and is
    bounded in [-1, 1]. ``unbiased=True`` rescales lag ``tau`` by
    ``n / (n - tau)`` so a clean periodic signal peaks near 1 at every
    period; the result is clipped to [-1, 1]. A flat signal gives
    ``r = [1, 0, 0, ...]``.
    """
    x = _as_signal(x)
    n = len(x)
    if n < 2:
        raise InsufficientDataError("autocorrelation needs >= 2 samples")
    r = np.zeros(n)
    r[0] = 1.0
    if is_flat(x):
        return r
    d = x - x.mean()
    full = np.correlate(d, d, mode="full")[n - 1:]
    r = full / full[0]
    if unbiased:
        r = np.clip(r * n / (n - np.arange(n)), -1.0, 1.0)
    return r


def local_maxima(x) -> np.ndarray:
    """Indices of strict interior local maxima."""
    x = _as_signal(x)
    if len(x) < 3:
        return np.empty(0, dtype=int)
    return np.flatnonzero((x[1:-1] > x[:-2]) & (x[1:-1] > x[2:])) + 1


def classify_peaks(heights, prominence_ratio: float = 0.25) -> tuple[np.ndarray, np.ndarray]:
    """Boolean masks ``(prominent, weak)`` over a sequence of peak heights.

    A peak is prominent when it exceeds each neighbouring peak by at least
    ``prominence_ratio * |own height|``, weak when each neighbour exceeds it
    by that margin. End peaks only have one neighbour; a lone peak has none
    and is neither.
    """
    h = np.asarray(heights, dtype=float)
    n = len(h)
    prominent = np.zeros(n, dtype=bool)
    weak = np.zeros(n, dtype=bool)
    if n < 2:
        return prominent, weak
    margin = prominence_ratio * np.abs(h)
    left = np.concatenate(([np.nan], h[:-1]))
    right = np.concatenate((h[1:], [np.nan]))
    with np.errstate(invalid="ignore"):
        above = lambda nb: np.isnan(nb) | (h - nb >= margin)  # noqa: E731
        below = lambda nb: np.isnan(nb) | (nb - h >= margin)  # noqa: E731
        prominent = above(left) & above(right)
        weak = below(left) & below(right)
    return prominent, weak


def find_peaks(x, prominence_ratio: float = 0.25) -> Peaks:
    if not 0 < prominence_ratio < 1:
        raise ValueError("prominence_ratio must be in (0, 1)")
    x = _as_signal(x)
    idx = local_maxima(x)
    heights = x[idx]
    prom, weak = classify_peaks(heights, prominence_ratio)
    return Peaks(
        PeakSet(idx, heights),
        PeakSet(idx[prom], heights[prom]),
        PeakSet(idx[weak], heights[weak]),
    )


def hann_kernel(length: int) -> np.ndarray:
    """Unit-sum Hann kernel with ``length`` strictly positive taps."""
    if length < 1:
        raise ValueError("kernel length must be >= 1")
    k = np.hanning(length + 2)[1:-1]
    return k / k.sum()


def hann_smooth(x, fps: float, window_s: float) -> np.ndarray:
    """Convolve with a unit-sum Hann kernel of ``round(window_s * fps)`` taps.

    Near the edges the kernel is renormalized over the samples it actually
    covers, so there is no zero-padding pull toward 0 and a constant stays
    constant. Output has the input's length.
    """
    if window_s <= 0:
        raise ValueError("window_s must be positive")
    x = _as_signal(x)
    length = max(int(round(window_s * fps)), 1)
    k = hann_kernel(length)
    if length == 1 or len(x) == 0:
        return x.copy()
    num = np.convolve(x, k, mode="full")
    den = np.convolve(np.ones_like(x), k, mode="full")
    # centre the "full" output on the input samples
    off = (length - 1) // 2
    num = num[off:off + len(x)]
    den = den[off:off + len(x)]
    return num / den


def polyfit(ts, vals, degree: int) -> PolyFit:
    """Least-squares polynomial fit, coefficients lowest order first."""
    ts = _as_signal(ts)
    vals = _as_signal(vals)
    if len(ts) != len(vals):
        raise ValueError("ts and vals differ in length")
    if len(ts) < degree + 1:
        raise InsufficientDataError(f"degree {degree} fit needs >= {degree + 1} samples")
    vander = np.vander(ts, degree + 1, increasing=True)
    coef, _, rank, _ = np.linalg.lstsq(vander, vals, rcond=None)
    if rank < degree + 1:
        raise DegenerateFitError("rank-deficient polynomial fit (too few distinct ts)")
    resid = vals - vander @ coef
    return PolyFit(coef, float(resid @ resid))
