"""Signal utilities over decoded scenes: decimation, slicing, statistics.

Gesture-rate signals sit between visual motion (up to ~100 Hz) and audio
(~10-40 kHz); a gesture recording can feed a visual pipeline by simply
keeping every k-th frame.  Pure decimation is the default; an opt-in boxcar
mean offers a crude anti-alias pre-filter.  Only integer factors are
supported.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import Enum
from typing import NamedTuple

import numpy as np

from .errors import AxisRangeError, EmptySignalError, FactorError, UnknownPathError
from .model import Scene


class RateBand(Enum):
    """Advisory sampling-rate bands, in Hz; they overlap by design."""

    VISUAL = (0.0, 100.0)
    GESTURE = (1.0, 10_000.0)
    AUDIO = (10_000.0, 40_000.0)

    @property
    def hz_range(self) -> tuple[float, float]:
        return self.value

    @property
    def label(self) -> str:
        return self.name.lower()


def classify_rate(freq: float) -> set[RateBand]:
    """Every band whose interval contains freq; may be empty or overlap."""
    if not freq > 0:
        raise ValueError(f"freq must be positive, got {freq}")
    return {band for band in RateBand if band.hz_range[0] <= freq <= band.hz_range[1]}


def _check_factor(factor: int):
    if int(factor) != factor or factor < 1:
        raise FactorError(f"decimation factor must be a positive integer, got {factor}")


def _rescaled(scene: Scene, frames: np.ndarray, factor: int) -> Scene:
    return replace(scene, nb_frame=frames.shape[0], freq=scene.freq / factor)


def decimate(scene: Scene, frames: np.ndarray, factor: int) -> tuple[Scene, np.ndarray]:
    """Keep frames 0, factor, 2*factor, ...; divides the sampling rate by factor.

    Retained samples are preserved bitwise; all structural metadata is kept.
    """
    _check_factor(factor)
    frames = np.asarray(frames, dtype=np.float64)
    kept = frames[::factor].copy()
    return _rescaled(scene, kept, factor), kept


def smooth_decimate(
    scene: Scene, frames: np.ndarray, factor: int
) -> tuple[Scene, np.ndarray]:
    """Decimate with a boxcar pre-filter: each output frame is the mean of its
    window of `factor` input frames (the last window may be shorter)."""
    _check_factor(factor)
    frames = np.asarray(frames, dtype=np.float64)
    n = frames.shape[0]
    if factor == 1 or n == 0:
        return _rescaled(scene, frames[:n].copy(), factor), frames[:n].copy()
    starts = np.arange(0, n, factor)
    sums = np.add.reduceat(frames, starts, axis=0)
    counts = np.minimum(starts + factor, n) - starts
    means = sums / counts[:, None]
    return _rescaled(scene, means, factor), means


@dataclass(frozen=True)
class TrackSlice:
    """One track's samples in frame order, with its channel path and rate."""

    unit: str
    channel: str
    axis: int
    samples: np.ndarray
    freq: float


def track_column(scene: Scene, unit: str, channel: str, axis: int) -> int:
    """Frame-matrix column index of one axis of one channel."""
    column = 0
    for u in scene.units:
        for c in u.channels:
            if u.name == unit and c.name == channel:
                if not 0 <= axis < c.dimension.track_count:
                    raise AxisRangeError(
                        f"axis {axis} out of range for {c.dimension.label} channel "
                        f"{channel!r} ({c.dimension.track_count} tracks)"
                    )
                return column + axis
            column += c.dimension.track_count
    raise UnknownPathError(f"no channel {channel!r} in unit {unit!r}")


def slice_track(
    scene: Scene, frames: np.ndarray, path: tuple[str, str, int]
) -> TrackSlice:
    """Extract one track's column as a TrackSlice."""
    unit, channel, axis = path
    column = track_column(scene, unit, channel, axis)
    frames = np.asarray(frames, dtype=np.float64)
    return TrackSlice(unit, channel, axis, frames[:, column].copy(), scene.freq)


class TrackStats(NamedTuple):
    min: float
    max: float
    mean: float
    rms: float


def track_stats(samples) -> TrackStats:
    """Exact min/max/mean/rms of a non-empty sample vector or TrackSlice."""
    if isinstance(samples, TrackSlice):
        samples = samples.samples
    samples = np.asarray(samples, dtype=np.float64)
    if samples.size == 0:
        raise EmptySignalError("statistics need at least one sample")
    return TrackStats(
        min=float(samples.min()),
        max=float(samples.max()),
        mean=float(samples.mean()),
        rms=float(np.sqrt(np.mean(np.square(samples)))),
    )
