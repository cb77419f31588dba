"""Time-series container, periodogram PSD estimation, and heart-rate readout.

The band-restricted, softmax-normalized power spectrum defined here is the
probability distribution that all transport losses operate on.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, InvalidDataError

# Plausible heart-rate band, ~40..180 bpm.
HR_BAND_HZ = (0.66, 3.0)


@dataclass(eq=False)
class TimeSeries:
    """Uniformly sampled real-valued signal with its sample rate in Hz."""

    samples: np.ndarray
    rate: float

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size < 2:
            raise InvalidArgumentError("TimeSeries needs a 1-D signal with at least 2 samples")
        if not self.rate > 0:
            raise InvalidArgumentError(f"sample rate must be positive, got {self.rate}")
        if not np.all(np.isfinite(self.samples)):
            raise InvalidDataError("TimeSeries samples must be finite")
        self.rate = float(self.rate)

    def __len__(self) -> int:
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.rate


@dataclass(eq=False)
class PowerSpectrum:
    """One-sided power spectrum on a uniform positive-frequency grid."""

    freqs: np.ndarray
    power: np.ndarray
    resolution: float

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=np.float64)
        self.power = np.asarray(self.power, dtype=np.float64)
        if self.freqs.ndim != 1 or self.freqs.size == 0:
            raise InvalidArgumentError("PowerSpectrum needs at least one frequency bin")
        if self.freqs.size != self.power.size:
            raise InvalidArgumentError("freqs and power must have the same length")
        if not self.resolution > 0:
            raise InvalidArgumentError("resolution must be positive")
        if self.freqs[0] <= 0:
            raise InvalidArgumentError("frequencies must be strictly positive")
        if self.freqs.size > 1:
            spacing = np.diff(self.freqs)
            if not np.all(np.abs(spacing - self.resolution) <= 1e-9 * self.resolution):
                raise InvalidArgumentError("frequency grid must be uniform at the stated resolution")
        if not np.all(np.isfinite(self.power)) or np.any(self.power < 0):
            raise InvalidDataError("power values must be finite and nonnegative")
        self.resolution = float(self.resolution)

    def __len__(self) -> int:
        return self.freqs.size


@dataclass(eq=False)
class SpectralDistribution:
    """Probability vector over heart-rate-band frequency bins."""

    freqs: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        self.freqs = np.asarray(self.freqs, dtype=np.float64)
        self.probs = np.asarray(self.probs, dtype=np.float64)
        if self.freqs.shape != self.probs.shape or self.freqs.ndim != 1:
            raise InvalidArgumentError("freqs and probs must be equal-length 1-D arrays")
        if abs(self.probs.sum() - 1.0) > 1e-9:
            raise InvalidDataError("probabilities must sum to 1")
        if np.any(self.probs <= 0):
            raise InvalidDataError("softmax probabilities must be strictly positive")


def default_fft_len(n_samples: int) -> int:
    """Next power of two at least 4x the signal length."""
    if n_samples < 1:
        raise InvalidArgumentError("signal length must be positive")
    return 1 << int(np.ceil(np.log2(4 * n_samples)))


def periodogram_psd(x: TimeSeries, fft_len: int | None = None, window: str = "rect") -> PowerSpectrum:
    """Zero-padded one-sided periodogram of a mean-centered signal.

    The DC bin is dropped so the returned grid is strictly positive;
    resolution is rate / fft_len.
    """
    n = len(x)
    if fft_len is None:
        fft_len = default_fft_len(n)
    if fft_len < n:
        raise InvalidArgumentError(f"fft_len {fft_len} is shorter than the signal ({n} samples)")
    if window not in ("rect", "hann"):
        raise InvalidArgumentError(f"unknown window {window!r}")

    centered = x.samples - x.samples.mean()
    if window == "hann":
        centered = centered * np.hanning(n)

    spectrum = np.fft.rfft(centered, n=fft_len)
    power = (spectrum.real**2 + spectrum.imag**2) / (x.rate * n)
    # One-sided density: double everything except DC and (for even fft_len) Nyquist.
    power[1:] *= 2.0
    if fft_len % 2 == 0:
        power[-1] /= 2.0

    freqs = np.arange(1, power.size) * (x.rate / fft_len)
    return PowerSpectrum(freqs=freqs, power=power[1:], resolution=x.rate / fft_len)


def band_restrict(psd: PowerSpectrum, lo: float = HR_BAND_HZ[0], hi: float = HR_BAND_HZ[1]) -> PowerSpectrum:
    """Keep only the bins with lo <= f <= hi."""
    if not lo < hi:
        raise InvalidArgumentError(f"band limits must satisfy lo < hi, got [{lo}, {hi}]")
    mask = (psd.freqs >= lo) & (psd.freqs <= hi)
    if not mask.any():
        raise InvalidArgumentError(f"band [{lo}, {hi}] Hz does not intersect the spectrum")
    return PowerSpectrum(freqs=psd.freqs[mask], power=psd.power[mask], resolution=psd.resolution)


def spectral_softmax(psd: PowerSpectrum, prescale: str = "unit_max") -> SpectralDistribution:
    """Softmax-normalize a (band-restricted) power spectrum.

    With prescale="unit_max" the power vector is divided by its maximum
    before the softmax, keeping the logits in [0, 1] regardless of signal
    scale; an all-zero spectrum degrades to the uniform distribution.
    """
    if len(psd) < 2:
        raise InvalidArgumentError("spectral softmax needs at least 2 bins")
    if prescale not in ("unit_max", "none"):
        raise InvalidArgumentError(f"unknown prescale {prescale!r}")

    scores = psd.power
    if prescale == "unit_max":
        top = scores.max()
        if top == 0.0:
            probs = np.full(len(psd), 1.0 / len(psd))
            return SpectralDistribution(freqs=psd.freqs.copy(), probs=probs)
        scores = scores / top

    shifted = np.exp(scores - scores.max())
    return SpectralDistribution(freqs=psd.freqs.copy(), probs=shifted / shifted.sum())


def hr_from_psd(psd: PowerSpectrum) -> float:
    """Heart rate in bpm from the maximum-power bin (ties go to the lowest frequency)."""
    if len(psd) == 0:
        raise InvalidArgumentError("empty spectrum")
    return 60.0 * float(psd.freqs[int(np.argmax(psd.power))])
