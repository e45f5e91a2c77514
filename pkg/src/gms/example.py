"""Built-in multi-performer reference scene with deterministic test signals.

The scene models six simultaneously captured performers sharing one clock:

    Pianist      8 channels PK1..PK8    position, 1Dz   (8 tracks)
    StickSource  1 channel  SS          position, 3Dxyz (3 tracks)
    Light        1 channel  LS          force,    2Dxy  (2 tracks)
    Dancer       16 channels DP1..DP16  position, 3Dxyz (48 tracks)
    Juggler      BL1 position 3Dxyz; BL2 angle 3Dxyz    (6 tracks)
    Fluid        n channels FL1..FLn    velocity, 0D    (n tracks)

The juggler's 6-degree-of-freedom ball is split into a position channel and a
rotation channel, since channels carry at most three tracks.  Angle and
velocity are reserved variable types, so a validator flags them as advisories
by design.

Signal content is synthetic and reproducible bit for bit: track k (0-based,
declaration order) carries sin(2*pi*(0.5 + 0.1*k)*t) at frame times t, and
tracks of intensive channels are scaled by 10 to mimic force magnitudes.
"""

from __future__ import annotations

import numpy as np

from .codec import GmsDocument
from .model import Channel, Dimension, SampleType, Scene, Unit, VariableType

INTENSIVE_GAIN = 10.0


def example_scene(fluid_n: int = 10, nb_frame: int = 100, freq: float = 1000.0) -> Scene:
    """The reference scene structure with n fluid masses."""
    if fluid_n < 1:
        raise ValueError(f"fluid_n must be at least 1, got {fluid_n}")
    units = (
        Unit(
            "Pianist",
            tuple(
                Channel(f"PK{i}", Dimension.AXIS_1DZ, VariableType.POSITION)
                for i in range(1, 9)
            ),
        ),
        Unit(
            "StickSource",
            (Channel("SS", Dimension.SPACE_3DXYZ, VariableType.POSITION),),
        ),
        Unit("Light", (Channel("LS", Dimension.PLANE_2DXY, VariableType.FORCE),)),
        Unit(
            "Dancer",
            tuple(
                Channel(f"DP{i}", Dimension.SPACE_3DXYZ, VariableType.POSITION)
                for i in range(1, 17)
            ),
        ),
        Unit(
            "Juggler",
            (
                Channel("BL1", Dimension.SPACE_3DXYZ, VariableType.POSITION),
                Channel("BL2", Dimension.SPACE_3DXYZ, VariableType.ANGLE),
            ),
        ),
        Unit(
            "Fluid",
            tuple(
                Channel(f"FL{i}", Dimension.SCALAR_0D, VariableType.VELOCITY)
                for i in range(1, fluid_n + 1)
            ),
        ),
    )
    return Scene(
        name="example-scene",
        nb_frame=nb_frame,
        freq=freq,
        sample_type=SampleType.FLOAT64,
        units=units,
        scale=1.0,
        block_size=0,
    )


def example_frames(scene: Scene) -> np.ndarray:
    """Deterministic per-track sinusoids for any scene."""
    gains = []
    for unit in scene.units:
        for channel in unit.channels:
            gain = INTENSIVE_GAIN if channel.var_type.is_intensive else 1.0
            gains.extend([gain] * channel.dimension.track_count)
    t = np.arange(scene.nb_frame, dtype=np.float64) / scene.freq
    k = np.arange(len(gains), dtype=np.float64)
    values = np.sin(2.0 * np.pi * np.outer(t, 0.5 + 0.1 * k))
    return values * np.asarray(gains)


def example_document(
    fluid_n: int = 10, nb_frame: int = 100, freq: float = 1000.0
) -> GmsDocument:
    """Complete reference document, byte-reproducible across runs."""
    scene = example_scene(fluid_n, nb_frame, freq)
    return GmsDocument(scene=scene, frames=example_frames(scene))
