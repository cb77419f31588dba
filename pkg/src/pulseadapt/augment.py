"""Spatial clip transforms and the temporal frequency resampler.

The six spatial transforms permute pixels frame-by-frame; the resampler
rescales the time axis by a factor r, multiplying the dominant frequency of
a band-limited signal by 1/r.
"""

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidArgumentError, InvalidDataError
from .spectral import TimeSeries


@dataclass(eq=False)
class ClipTensor:
    """t x h x w x c video clip with its frame rate in Hz."""

    data: np.ndarray
    frame_rate: float

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 4:
            raise InvalidArgumentError("clip data must be t x h x w x c")
        t, h, w, c = self.data.shape
        if t < 2 or h < 1 or w < 1 or c != 3:
            raise InvalidArgumentError(f"bad clip shape {self.data.shape}; need t>=2, h,w>=1, c=3")
        if not self.frame_rate > 0:
            raise InvalidArgumentError("frame rate must be positive")
        if not np.all(np.isfinite(self.data)):
            raise InvalidDataError("clip values must be finite")
        self.frame_rate = float(self.frame_rate)

    @property
    def shape(self) -> tuple[int, int, int, int]:
        return self.data.shape


class SpatialAug(enum.Enum):
    ROT0 = "rot0"
    ROT90 = "rot90"
    ROT180 = "rot180"
    ROT270 = "rot270"
    FLIP_H = "flip_h"
    FLIP_V = "flip_v"


def spatial_augment(clip: ClipTensor, aug: SpatialAug) -> ClipTensor:
    """Apply one spatial transform to every frame of a clip."""
    _, h, w, _ = clip.shape
    if aug in (SpatialAug.ROT90, SpatialAug.ROT270) and h != w:
        raise InvalidArgumentError("90/270 degree rotations need square frames")

    if aug is SpatialAug.ROT0:
        out = clip.data
    elif aug is SpatialAug.ROT90:
        out = np.rot90(clip.data, k=1, axes=(1, 2))
    elif aug is SpatialAug.ROT180:
        out = np.rot90(clip.data, k=2, axes=(1, 2))
    elif aug is SpatialAug.ROT270:
        out = np.rot90(clip.data, k=3, axes=(1, 2))
    elif aug is SpatialAug.FLIP_H:
        out = np.flip(clip.data, axis=2)
    else:
        out = np.flip(clip.data, axis=1)
    return ClipTensor(data=np.ascontiguousarray(out), frame_rate=clip.frame_rate)


def pick_spatial_aug(rng: np.random.Generator) -> SpatialAug:
    """Draw one of the six transforms uniformly from a caller-owned generator."""
    members = list(SpatialAug)
    return members[int(rng.integers(len(members)))]


def interp_positions(n_in: int, factor: float) -> tuple[int, np.ndarray, np.ndarray]:
    """Two-tap linear interpolation stencil for resampling by ``factor``.

    Output sample k reads position k/factor of the input. Positions past the
    last input sample extrapolate linearly from the final segment, which
    keeps the tail error second order instead of flat-holding it.
    """
    if not factor > 0:
        raise InvalidArgumentError("resampling factor must be positive")
    out_len = int(round(factor * n_in))
    if out_len < 2:
        raise InvalidArgumentError(f"resampled length {out_len} is too short")
    pos = np.arange(out_len) / factor
    idx0 = np.clip(np.floor(pos).astype(np.intp), 0, n_in - 2)
    frac = pos - idx0
    return out_len, idx0, frac


def frequency_resample(x: TimeSeries, r: float) -> TimeSeries:
    """Rescale the time axis by r, keeping the nominal sample rate.

    The output has round(r * len(x)) samples; a band-limited input's
    dominant frequency scales by 1/r, so r < 1 raises the apparent rate.
    """
    _, idx0, frac = interp_positions(len(x), r)
    s = x.samples
    return TimeSeries(samples=s[idx0] * (1.0 - frac) + s[idx0 + 1] * frac, rate=x.rate)


def fit_length(samples: np.ndarray, n: int) -> np.ndarray:
    """Trim or edge-pad at the tail so the signal has exactly n samples."""
    if samples.size >= n:
        return samples[:n]
    pad = np.full(n - samples.size, samples[-1])
    return np.concatenate((samples, pad))


def resample_roundtrip(
    x: TimeSeries, r: float, transform: Callable[[TimeSeries], TimeSeries] | None = None
) -> TimeSeries:
    """Resample by r, apply a transform, and resample back by 1/r.

    The round trip can land one sample short or long of the input, so the
    tail is trimmed or edge-padded back to the original length.
    """
    inner = frequency_resample(x, r)
    if transform is not None:
        inner = transform(inner)
    back = frequency_resample(inner, 1.0 / r)
    return TimeSeries(samples=fit_length(back.samples, len(x)), rate=x.rate)


def resample_clip(clip: ClipTensor, r: float) -> ClipTensor:
    """Per-pixel temporal resampling of a clip; spatial dims are untouched."""
    t = clip.shape[0]
    _, idx0, frac = interp_positions(t, r)
    w = frac[:, None, None, None]
    data = clip.data[idx0] * (1.0 - w) + clip.data[idx0 + 1] * w
    return ClipTensor(data=data, frame_rate=clip.frame_rate)
