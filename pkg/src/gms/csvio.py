"""CSV interchange: one column per track plus a JSON sidecar manifest.

The CSV carries a header row of ``unit.channel.axis`` track names and one row
per frame of physical values, printed with shortest round-trip precision so
float64 signals survive the text trip bit for bit.  Everything the CSV cannot
carry (scene name, rate, storage type, scale, block size, the unit/channel
tree) lives in the manifest, which sits next to the CSV with the extension
``.manifest``.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Union

import numpy as np

from .codec import GmsDocument
from .errors import ManifestMismatchError
from .model import Channel, Dimension, SampleType, Scene, Unit, VariableType

PathLike = Union[str, Path]


def manifest_path_for(csv_path: PathLike) -> Path:
    return Path(csv_path).with_suffix(".manifest")


def track_names(scene: Scene) -> list[str]:
    """Column names in declaration order: unit.channel.axis."""
    names = []
    for unit in scene.units:
        for channel in unit.channels:
            for axis in range(channel.dimension.track_count):
                names.append(f"{unit.name}.{channel.name}.{axis}")
    return names


def scene_manifest(scene: Scene) -> dict:
    return {
        "scene": scene.name,
        "freq": scene.freq,
        "sample_type": scene.sample_type.label,
        "scale": scene.scale,
        "block_size": scene.block_size,
        "units": [
            {
                "name": unit.name,
                "channels": [
                    {
                        "name": channel.name,
                        "dimension": channel.dimension.label,
                        "var_type": channel.var_type.label,
                    }
                    for channel in unit.channels
                ],
            }
            for unit in scene.units
        ],
    }


def scene_from_manifest(manifest: dict, nb_frame: int) -> Scene:
    try:
        units = tuple(
            Unit(
                entry["name"],
                tuple(
                    Channel(
                        chan["name"],
                        Dimension.from_label(chan["dimension"]),
                        VariableType.from_label(chan["var_type"]),
                    )
                    for chan in entry["channels"]
                ),
            )
            for entry in manifest["units"]
        )
        return Scene(
            name=manifest["scene"],
            nb_frame=nb_frame,
            freq=float(manifest["freq"]),
            sample_type=SampleType.from_label(manifest["sample_type"]),
            units=units,
            scale=float(manifest["scale"]),
            block_size=int(manifest["block_size"]),
        )
    except (KeyError, TypeError) as exc:
        raise ManifestMismatchError(f"manifest is missing field {exc}") from None


def write_csv(doc: GmsDocument, csv_path: PathLike) -> Path:
    """Write the CSV and its sidecar manifest; returns the manifest path."""
    csv_path = Path(csv_path)
    with csv_path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(track_names(doc.scene))
        for row in doc.frames:
            writer.writerow([repr(float(v)) for v in row])
    manifest = manifest_path_for(csv_path)
    manifest.write_text(json.dumps(scene_manifest(doc.scene), indent=2) + "\n")
    return manifest


def read_csv(csv_path: PathLike) -> GmsDocument:
    """Rebuild a document from a CSV and its sidecar manifest."""
    csv_path = Path(csv_path)
    manifest = json.loads(manifest_path_for(csv_path).read_text())
    with csv_path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ManifestMismatchError(f"{csv_path} has no header row")
    header, body = rows[0], rows[1:]
    scene = scene_from_manifest(manifest, nb_frame=len(body))
    expected = track_names(scene)
    if header != expected:
        raise ManifestMismatchError(
            f"CSV columns disagree with the manifest: got {len(header)} columns "
            f"{header[:3]}..., expected {len(expected)} columns {expected[:3]}..."
        )
    for i, row in enumerate(body):
        if len(row) != len(expected):
            raise ManifestMismatchError(
                f"CSV row {i + 1} has {len(row)} values, expected {len(expected)}"
            )
    frames = np.array(
        [[float(v) for v in row] for row in body], dtype=np.float64
    ).reshape(len(body), len(expected))
    return GmsDocument(scene=scene, frames=frames)
