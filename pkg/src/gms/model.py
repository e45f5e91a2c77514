"""Scene data model: scenes, units, channels and the frame matrix contract.

A scene holds ordered units; a unit holds ordered channels; a channel carries
1-3 scalar tracks according to its geometric dimension.  The sampled signal is
a frame matrix of ``nb_frame`` rows by ``scene_track_count`` columns of
physical (scale-applied) float64 values, frame-major: all tracks of frame 0,
then frame 1, and so on.  Within a frame, tracks follow declaration order --
units in order, channels in order, axes within a channel in the order named
by the dimension (x, then y, then z).

One sampling frequency governs every channel of a scene.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Sequence, Union

import numpy as np

from .errors import IllegalCodeError


class Dimension(IntEnum):
    """Geometric dimension of a channel; fixes its track count and axis order.

    The plane through z and x is written ``2Dzx`` here; the spelling ``2Dzy``
    seen in some early descriptions of the format denotes the same plane.
    """

    SCALAR_0D = 0
    AXIS_1DX = 1
    AXIS_1DY = 2
    AXIS_1DZ = 3
    PLANE_2DXY = 4
    PLANE_2DYZ = 5
    PLANE_2DZX = 6
    SPACE_3DXYZ = 7

    @classmethod
    def from_code(cls, code: int) -> "Dimension":
        try:
            return cls(code)
        except ValueError:
            raise IllegalCodeError(f"unknown dimension code {code}") from None

    @classmethod
    def from_label(cls, label: str) -> "Dimension":
        try:
            return _DIMENSION_BY_LABEL[label]
        except KeyError:
            raise IllegalCodeError(f"unknown dimension label {label!r}") from None

    @property
    def track_count(self) -> int:
        return _TRACK_COUNTS[self]

    @property
    def label(self) -> str:
        return _DIMENSION_LABELS[self]


_TRACK_COUNTS = {
    Dimension.SCALAR_0D: 1,
    Dimension.AXIS_1DX: 1,
    Dimension.AXIS_1DY: 1,
    Dimension.AXIS_1DZ: 1,
    Dimension.PLANE_2DXY: 2,
    Dimension.PLANE_2DYZ: 2,
    Dimension.PLANE_2DZX: 2,
    Dimension.SPACE_3DXYZ: 3,
}

_DIMENSION_LABELS = {
    Dimension.SCALAR_0D: "0D",
    Dimension.AXIS_1DX: "1Dx",
    Dimension.AXIS_1DY: "1Dy",
    Dimension.AXIS_1DZ: "1Dz",
    Dimension.PLANE_2DXY: "2Dxy",
    Dimension.PLANE_2DYZ: "2Dyz",
    Dimension.PLANE_2DZX: "2Dzx",
    Dimension.SPACE_3DXYZ: "3Dxyz",
}

_DIMENSION_BY_LABEL = {label: dim for dim, label in _DIMENSION_LABELS.items()}


class VariableType(IntEnum):
    """Physical nature of a channel's signal.

    POSITION and FORCE are fully supported.  The remaining codes are reserved:
    files using them decode and re-encode normally, but the validator flags
    them with an advisory diagnostic.
    """

    POSITION = 0
    FORCE = 1
    ANGLE = 2
    VELOCITY = 3
    ACCELERATION = 4
    TORQUE = 5

    @classmethod
    def from_code(cls, code: int) -> "VariableType":
        try:
            return cls(code)
        except ValueError:
            raise IllegalCodeError(f"unknown variable type code {code}") from None

    @classmethod
    def from_label(cls, label: str) -> "VariableType":
        try:
            return cls[label.upper()]
        except KeyError:
            raise IllegalCodeError(f"unknown variable type label {label!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()

    @property
    def is_intensive(self) -> bool:
        """Effort-like (force, torque) as opposed to space-derived quantities."""
        return self in (VariableType.FORCE, VariableType.TORQUE)

    @property
    def category(self) -> str:
        return "intensive" if self.is_intensive else "extensive"

    @property
    def is_reserved(self) -> bool:
        return self.value >= 2


class SampleType(IntEnum):
    """Storage type of the samples in the frame chunk."""

    FLOAT32 = 0
    FLOAT64 = 1
    LONG = 2

    @classmethod
    def from_code(cls, code: int) -> "SampleType":
        try:
            return cls(code)
        except ValueError:
            raise IllegalCodeError(f"unknown sample type code {code}") from None

    @classmethod
    def from_label(cls, label: str) -> "SampleType":
        try:
            return cls[label.upper()]
        except KeyError:
            raise IllegalCodeError(f"unknown sample type label {label!r}") from None

    @property
    def label(self) -> str:
        return self.name.lower()

    @property
    def byte_width(self) -> int:
        return 8 if self is SampleType.FLOAT64 else 4


@dataclass(frozen=True)
class Channel:
    """A named signal of fixed dimension and variable type."""

    name: str
    dimension: Dimension
    var_type: VariableType


@dataclass(frozen=True)
class Unit:
    """A named group of dynamically correlated channels."""

    name: str
    channels: tuple[Channel, ...]

    def __post_init__(self):
        object.__setattr__(self, "channels", tuple(self.channels))


@dataclass(frozen=True)
class Scene:
    """Root of a document: global sampling metadata plus the unit list."""

    name: str
    nb_frame: int
    freq: float
    sample_type: SampleType
    units: tuple[Unit, ...]
    scale: float = 1.0
    block_size: int = 0

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))


# Advisory sampling band for gesture signals, in Hz.
GESTURE_BAND = (1.0, 10_000.0)


def track_count(channel: Union[Channel, Dimension, int]) -> int:
    """Number of scalar tracks carried by a channel (or dimension, or code)."""
    if isinstance(channel, Channel):
        return channel.dimension.track_count
    return Dimension.from_code(int(channel)).track_count


def scene_track_count(scene: Scene) -> int:
    """Total track count across all channels of all units."""
    return sum(c.dimension.track_count for u in scene.units for c in u.channels)


def frame_byte_size(scene: Scene) -> int:
    """Unpadded byte length of one frame of stored samples."""
    return scene_track_count(scene) * scene.sample_type.byte_width


def padded_frame_stride(scene: Scene) -> int:
    """Byte distance between consecutive frames in the frame chunk payload.

    A block size of 0 means the stride equals the frame size; otherwise the
    stride is the smallest multiple of block_size that fits a frame.  Pad
    bytes inside a stride are zero on write and ignored on read.
    """
    size = frame_byte_size(scene)
    if scene.block_size == 0:
        return size
    return -(-size // scene.block_size) * scene.block_size


@dataclass(frozen=True)
class Violation:
    """One validation finding; advisory findings never fail a plain validate."""

    where: str
    rule: str
    advisory: bool = False

    def __str__(self):
        tag = "advisory" if self.advisory else "fatal"
        return f"[{tag}] {self.where}: {self.rule}"


def _check_name(violations, where, name):
    if len(name.encode("utf-8")) >= 2**16:
        violations.append(Violation(where, "name longer than 65535 bytes"))


def validate_scene(scene: Scene, frames: np.ndarray | None = None) -> list[Violation]:
    """Check every structural invariant; returns findings instead of raising.

    Fatal findings are genuine invariant violations.  Advisory findings flag
    reserved variable types in use and sampling rates outside the usual
    gesture band; they are data quality hints, not errors.
    """
    violations: list[Violation] = []

    _check_name(violations, "scene", scene.name)
    if not (scene.nb_frame >= 0 and scene.nb_frame < 2**32):
        violations.append(Violation("scene", "nb_frame must fit an unsigned 32-bit field"))
    if not (np.isfinite(scene.freq) and scene.freq > 0):
        violations.append(Violation("scene", "freq must be positive and finite"))
    elif not (GESTURE_BAND[0] <= scene.freq <= GESTURE_BAND[1]):
        violations.append(
            Violation(
                "scene",
                f"freq {scene.freq:g} Hz is outside the usual gesture band "
                f"{GESTURE_BAND[0]:g}-{GESTURE_BAND[1]:g} Hz",
                advisory=True,
            )
        )
    if not np.isfinite(scene.scale) or scene.scale == 0:
        violations.append(Violation("scene", "scale must be finite and nonzero"))
    if not (0 <= scene.block_size < 2**32):
        violations.append(Violation("scene", "block_size must fit an unsigned 32-bit field"))
    if not scene.units:
        violations.append(Violation("scene", "must contain at least one unit"))

    seen_units = set()
    for unit in scene.units:
        uwhere = f"unit {unit.name!r}"
        _check_name(violations, uwhere, unit.name)
        if unit.name in seen_units:
            violations.append(Violation(uwhere, "unit name repeated in scene"))
        seen_units.add(unit.name)
        if not unit.channels:
            violations.append(Violation(uwhere, "must contain at least one channel"))
        seen_channels = set()
        for channel in unit.channels:
            cwhere = f"channel {channel.name!r} in {uwhere}"
            _check_name(violations, cwhere, channel.name)
            if not channel.name:
                violations.append(Violation(cwhere, "channel name must be non-empty"))
            if channel.name in seen_channels:
                violations.append(Violation(cwhere, "channel name repeated in unit"))
            seen_channels.add(channel.name)
            if channel.var_type.is_reserved:
                violations.append(
                    Violation(
                        cwhere,
                        f"variable type {channel.var_type.label!r} is reserved",
                        advisory=True,
                    )
                )

    if frames is not None:
        frames = np.asarray(frames)
        tracks = scene_track_count(scene)
        if frames.ndim != 2:
            violations.append(Violation("frames", "frame matrix must be 2-dimensional"))
        else:
            if frames.shape[1] != tracks:
                violations.append(
                    Violation(
                        "frames",
                        f"frame matrix is {frames.shape[1]} tracks wide, "
                        f"scene declares {tracks}",
                    )
                )
            if frames.shape[0] != scene.nb_frame:
                violations.append(
                    Violation(
                        "frames",
                        f"frame matrix has {frames.shape[0]} rows, "
                        f"scene declares nb_frame {scene.nb_frame}",
                    )
                )
            if frames.size and not np.isfinite(frames).all():
                violations.append(Violation("frames", "samples must all be finite"))
            elif (
                frames.size
                and scene.sample_type is SampleType.LONG
                and np.isfinite(scene.scale)
                and scene.scale != 0
            ):
                stored = np.rint(frames / scene.scale)
                if stored.min() < -(2**31) or stored.max() > 2**31 - 1:
                    violations.append(
                        Violation(
                            "frames",
                            "samples do not fit signed 32-bit storage at this scale",
                        )
                    )

    return violations


def fatal_violations(violations: Sequence[Violation]) -> list[Violation]:
    return [v for v in violations if not v.advisory]
