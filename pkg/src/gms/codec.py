"""Serialize and deserialize complete GMS documents.

On-disk layout, all values big-endian:

    FORM header   'FORM' | u32 fileSize | 4-byte file type
    VERS chunk    u16 versNum | u16 subVersNum
    SCEN chunk    u16 nameLen | name | u32 nbFrame | f64 freq | u16 dataType
                  | f64 scale | u32 blockSize
    UNIT chunk    u16 nameLen | name
    CHAN chunk    u16 nameLen | name | u16 dimension | u16 type
    FRAM chunk    nbFrame strides of raw samples

``fileSize`` counts every byte after the field itself.  Unit and channel
chunks are interleaved: a channel belongs to the most recently declared unit.
The frame chunk holds the signal frame by frame; every frame, including the
last, occupies exactly one stride (see ``padded_frame_stride``), so the frame
chunk payload is exactly ``nbFrame * stride`` bytes.  Stored samples times
``scale`` give physical values; the writer divides by ``scale`` and, for LONG
storage, rounds to nearest with ties to even.

The canonical writer emits the file type ``'GMS '``; the reader also accepts
the legacy spelling ``'GSM '`` and normalizes it on rewrite.
"""

from __future__ import annotations

import io
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import BinaryIO, Union

import numpy as np

from .chunks import ChunkScanner, RawChunk, decode_primitive, encode_primitive, write_chunk
from .errors import (
    BadMagicError,
    FinalizedError,
    GmsWarning,
    OversizeChunkError,
    SampleRangeError,
    SceneValidationError,
    StructureError,
    TruncatedDataError,
    UnsupportedVersionError,
    WidthMismatchError,
)
from .model import (
    Channel,
    Dimension,
    SampleType,
    Scene,
    Unit,
    VariableType,
    fatal_violations,
    frame_byte_size,
    padded_frame_stride,
    scene_track_count,
    validate_scene,
)

FORM_ID = b"FORM"
FILE_TYPE = b"GMS "
ACCEPTED_FILE_TYPES = (b"GMS ", b"GSM ")
CURRENT_VERSION = (0, 1)

_SAMPLE_DTYPES = {
    SampleType.FLOAT32: np.dtype(">f4"),
    SampleType.FLOAT64: np.dtype(">f8"),
    SampleType.LONG: np.dtype(">i4"),
}


@dataclass(eq=False)
class GmsDocument:
    """A decoded file: scene, physical frame values and preserved extras.

    ``frames`` is float64, shape (nb_frame, scene_track_count), frame-major.
    Unknown chunks encountered while reading are kept verbatim and re-emitted
    on rewrite, just before the frame chunk.
    """

    scene: Scene
    frames: np.ndarray = field(repr=False)
    version: tuple[int, int] = CURRENT_VERSION
    unknown_chunks: tuple[RawChunk, ...] = ()

    def __post_init__(self):
        frames = np.ascontiguousarray(self.frames, dtype=np.float64)
        if frames.ndim == 1 and frames.size == 0:
            frames = frames.reshape(0, scene_track_count(self.scene))
        self.frames = frames
        self.version = tuple(self.version)
        self.unknown_chunks = tuple(self.unknown_chunks)

    def __eq__(self, other):
        if not isinstance(other, GmsDocument):
            return NotImplemented
        return (
            self.version == other.version
            and self.scene == other.scene
            and self.unknown_chunks == other.unknown_chunks
            and self.frames.shape == other.frames.shape
            and self.frames.tobytes() == other.frames.tobytes()
        )


# ---------------------------------------------------------------------------
# frame payload packing

def _to_stored(scene: Scene, values: np.ndarray) -> np.ndarray:
    scaled = values / scene.scale
    if scaled.size and not np.isfinite(scaled).all():
        raise SampleRangeError("samples must be finite and representable at this scale")
    kind = scene.sample_type
    if kind is SampleType.LONG:
        stored = np.rint(scaled)
        if stored.size and (stored.min() < -(2**31) or stored.max() > 2**31 - 1):
            raise SampleRangeError("samples do not fit signed 32-bit storage at this scale")
        return stored.astype(_SAMPLE_DTYPES[kind])
    with np.errstate(over="ignore"):
        stored = scaled.astype(_SAMPLE_DTYPES[kind])
    if kind is SampleType.FLOAT32 and stored.size and not np.isfinite(
        stored.astype(np.float64)
    ).all():
        raise SampleRangeError("samples overflow float32 storage")
    return stored


def pack_frames(scene: Scene, values: np.ndarray) -> bytes:
    """Encode physical values as the frame chunk payload, one stride per row."""
    values = np.ascontiguousarray(values, dtype=np.float64)
    n = values.shape[0]
    size = frame_byte_size(scene)
    stride = padded_frame_stride(scene)
    out = np.zeros((n, stride), dtype=np.uint8)
    if size:
        stored = _to_stored(scene, values)
        out[:, :size] = stored.view(np.uint8).reshape(n, size)
    return out.tobytes()


def _frames_from_strides(scene: Scene, payload: bytes, n: int) -> np.ndarray:
    size = frame_byte_size(scene)
    stride = padded_frame_stride(scene)
    tracks = scene_track_count(scene)
    if size == 0:
        return np.zeros((n, 0), dtype=np.float64)
    raw = np.frombuffer(payload, dtype=np.uint8).reshape(n, stride)[:, :size]
    stored = np.ascontiguousarray(raw).view(_SAMPLE_DTYPES[scene.sample_type])
    return stored.reshape(n, tracks).astype(np.float64) * scene.scale


def unpack_frames(scene: Scene, payload: bytes) -> np.ndarray:
    """Decode a frame chunk payload into physical (scale-applied) values."""
    return _frames_from_strides(scene, payload, scene.nb_frame)


# ---------------------------------------------------------------------------
# encoding

def _u16(v) -> bytes:
    return encode_primitive(int(v), "u16")


def _u32(v) -> bytes:
    return encode_primitive(int(v), "u32")


def _f64(v) -> bytes:
    return encode_primitive(float(v), "f64")


def _named_payload(name: str) -> bytearray:
    raw = name.encode("utf-8")
    return bytearray(_u16(len(raw)) + raw)


def _scene_payload(scene: Scene, nb_frame: int) -> bytes:
    p = _named_payload(scene.name)
    p += _u32(nb_frame)
    p += _f64(scene.freq)
    p += _u16(scene.sample_type)
    p += _f64(scene.scale)
    p += _u32(scene.block_size)
    return bytes(p)


def _channel_payload(channel: Channel) -> bytes:
    p = _named_payload(channel.name)
    p += _u16(channel.dimension)
    p += _u16(channel.var_type)
    return bytes(p)


def _declaration_chunks(doc_version: tuple[int, int], scene: Scene, nb_frame: int) -> bytes:
    out = bytearray()
    out += write_chunk(b"VERS", _u16(doc_version[0]) + _u16(doc_version[1]))
    out += write_chunk(b"SCEN", _scene_payload(scene, nb_frame))
    for unit in scene.units:
        out += write_chunk(b"UNIT", bytes(_named_payload(unit.name)))
        for channel in unit.channels:
            out += write_chunk(b"CHAN", _channel_payload(channel))
    return bytes(out)


def _wrap_form(content: bytes) -> bytes:
    form_size = len(FILE_TYPE) + len(content)
    if form_size >= 2**32:
        raise OversizeChunkError("document exceeds the 32-bit FORM size field")
    return FORM_ID + _u32(form_size) + FILE_TYPE + content


def encode_document(doc: GmsDocument) -> bytes:
    """Serialize a document to canonical bytes.

    Raises SceneValidationError when the scene or frames break an invariant.
    """
    if doc.version[0] != 0:
        raise UnsupportedVersionError(
            f"cannot write major version {doc.version[0]}; this writer emits 0.x"
        )
    fatal = fatal_violations(validate_scene(doc.scene, doc.frames))
    if fatal:
        raise SceneValidationError(fatal)
    body = bytearray()
    body += _declaration_chunks(doc.version, doc.scene, doc.scene.nb_frame)
    for chunk in doc.unknown_chunks:
        body += write_chunk(chunk.id, chunk.payload)
    body += write_chunk(b"FRAM", pack_frames(doc.scene, doc.frames))
    return _wrap_form(bytes(body))


# ---------------------------------------------------------------------------
# decoding

class _Cursor:
    """Field reader over one chunk payload, reporting absolute offsets."""

    def __init__(self, payload: bytes, base: int, what: str):
        self.payload = payload
        self.base = base
        self.what = what
        self.pos = 0

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.payload):
            raise TruncatedDataError(
                f"{self.what} payload at offset {self.base + self.pos}: "
                f"needed {n} bytes, got {len(self.payload) - self.pos}"
            )
        data = self.payload[self.pos : self.pos + n]
        self.pos += n
        return data

    def u16(self) -> int:
        return decode_primitive(self.take(2), "u16")

    def u32(self) -> int:
        return decode_primitive(self.take(4), "u32")

    def f64(self) -> float:
        return decode_primitive(self.take(8), "f64")

    def text(self) -> str:
        raw = self.take(self.u16())
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise StructureError(f"{self.what} name is not valid UTF-8") from None

    def warn_trailing(self):
        extra = len(self.payload) - self.pos
        if extra:
            warnings.warn(
                f"{self.what}: ignoring {extra} trailing payload bytes", GmsWarning
            )


@dataclass
class _Header:
    version: tuple[int, int]
    scene: Scene
    unknown: tuple[RawChunk, ...]
    fram_size: int
    fram_payload_offset: int


def _read_form_prefix(f: BinaryIO) -> int:
    head = f.read(12)
    if len(head) < 4 or head[:4] != FORM_ID:
        raise BadMagicError(f"not a GMS file: expected FORM header, got {head[:4]!r}")
    if len(head) < 12:
        raise TruncatedDataError(f"FORM header: needed 12 bytes, got {len(head)}")
    form_size = decode_primitive(head[4:8], "u32")
    file_type = head[8:12]
    if file_type not in ACCEPTED_FILE_TYPES:
        raise BadMagicError(f"unrecognized file type {file_type!r}")
    if form_size < 4:
        raise StructureError("FORM size field smaller than the file type field")
    return form_size


def _read_header(scanner: ChunkScanner) -> _Header:
    version = CURRENT_VERSION
    scene_parts = None
    units: list[tuple[str, list[Channel]]] = []
    unknown: list[RawChunk] = []
    index = 0
    while True:
        pos = scanner.offset
        header = scanner.next_header()
        if header is None:
            missing = "SCEN" if scene_parts is None else "FRAM"
            raise StructureError(f"missing {missing} chunk")
        cid, size = header
        if index == 0 and cid != b"VERS":
            warnings.warn("no VERS chunk; assuming version 0.1", GmsWarning)
        index += 1
        if cid == b"VERS":
            if index != 1:
                raise StructureError(f"VERS chunk at offset {pos} must come first")
            cur = _Cursor(scanner.read_payload(cid, size), pos + 8, "VERS chunk")
            major, minor = cur.u16(), cur.u16()
            cur.warn_trailing()
            if major > 0:
                raise UnsupportedVersionError(
                    f"file declares version {major}.{minor}; only major version 0 is supported"
                )
            version = (major, minor)
        elif cid == b"SCEN":
            if scene_parts is not None:
                raise StructureError(f"more than one SCEN chunk (second at offset {pos})")
            cur = _Cursor(scanner.read_payload(cid, size), pos + 8, "SCEN chunk")
            name = cur.text()
            nb_frame = cur.u32()
            freq = cur.f64()
            sample_type = SampleType.from_code(cur.u16())
            scale = cur.f64()
            block_size = cur.u32()
            cur.warn_trailing()
            scene_parts = (name, nb_frame, freq, sample_type, scale, block_size)
        elif cid == b"UNIT":
            cur = _Cursor(scanner.read_payload(cid, size), pos + 8, "UNIT chunk")
            units.append((cur.text(), []))
            cur.warn_trailing()
        elif cid == b"CHAN":
            cur = _Cursor(scanner.read_payload(cid, size), pos + 8, "CHAN chunk")
            name = cur.text()
            dimension = Dimension.from_code(cur.u16())
            var_type = VariableType.from_code(cur.u16())
            cur.warn_trailing()
            if not units:
                raise StructureError(
                    f"channel {name!r} at offset {pos} declared before any unit"
                )
            units[-1][1].append(Channel(name, dimension, var_type))
        elif cid == b"FRAM":
            if scene_parts is None:
                raise StructureError(f"FRAM chunk at offset {pos} before any SCEN chunk")
            name, nb_frame, freq, sample_type, scale, block_size = scene_parts
            scene = Scene(
                name=name,
                nb_frame=nb_frame,
                freq=freq,
                sample_type=sample_type,
                units=tuple(Unit(uname, tuple(chans)) for uname, chans in units),
                scale=scale,
                block_size=block_size,
            )
            return _Header(version, scene, tuple(unknown), size, scanner.offset)
        else:
            payload = scanner.read_payload(cid, size)
            warnings.warn(
                f"skipping unknown chunk {cid.decode('ascii')!r} at offset {pos} "
                "(preserved for rewrite)",
                GmsWarning,
            )
            unknown.append(RawChunk(cid, payload))


def _check_fram_size(scene: Scene, fram_size: int):
    expected = scene.nb_frame * padded_frame_stride(scene)
    if fram_size != expected:
        raise StructureError(
            f"FRAM payload is {fram_size} bytes; scene declares "
            f"{scene.nb_frame} frames x {padded_frame_stride(scene)}-byte stride "
            f"= {expected} bytes"
        )


def decode_document(data: bytes) -> GmsDocument:
    """Parse a complete file image into a document.

    The inverse of encode_document on well-formed input; unknown chunks are
    retained, and stored samples are multiplied by the scene scale.
    """
    data = bytes(data)
    f = io.BytesIO(data)
    form_size = _read_form_prefix(f)
    expected_total = 8 + form_size
    if len(data) < expected_total:
        raise TruncatedDataError(
            f"file truncated at offset {len(data)}: the FORM header declares "
            f"{expected_total} bytes"
        )
    if len(data) > expected_total and not (
        len(data) == expected_total + 1 and data[-1] == 0
    ):
        raise StructureError(
            f"{len(data) - expected_total} trailing bytes after the FORM payload"
        )
    scanner = ChunkScanner(f, limit=form_size - 4, start_offset=12)
    header = _read_header(scanner)
    _check_fram_size(header.scene, header.fram_size)
    payload = scanner.read_payload(b"FRAM", header.fram_size)
    trailing = scanner.next_header()
    if trailing is not None:
        raise StructureError(
            f"chunk {trailing[0].decode('ascii')!r} after the FRAM chunk"
        )
    frames = unpack_frames(header.scene, payload)
    return GmsDocument(
        scene=header.scene,
        frames=frames,
        version=header.version,
        unknown_chunks=header.unknown,
    )


# ---------------------------------------------------------------------------
# streaming reader

class FrameStream:
    """Sequential, lazy reader over a frame chunk payload.

    Single-consumer: each read returns one frame of physical values and
    advances by exactly one stride.  Iterable.
    """

    def __init__(self, scene: Scene, source: BinaryIO, base_offset: int):
        self.scene = scene
        self.stride = padded_frame_stride(scene)
        self.remaining = scene.nb_frame
        self._file = source
        self._offset = base_offset

    def read_next_frame(self) -> np.ndarray | None:
        """Next frame's tracks in declaration order, or None when exhausted."""
        if self.remaining <= 0:
            return None
        buf = self._file.read(self.stride)
        if len(buf) < self.stride:
            raise TruncatedDataError(
                f"frame payload at offset {self._offset}: needed stride of "
                f"{self.stride} bytes, got {len(buf)} ({self.remaining} frames owed)"
            )
        self._offset += self.stride
        self.remaining -= 1
        return _frames_from_strides(self.scene, buf, 1)[0]

    def __iter__(self):
        return self

    def __next__(self) -> np.ndarray:
        frame = self.read_next_frame()
        if frame is None:
            raise StopIteration
        return frame


def open_frame_stream(
    source: Union[bytes, bytearray, memoryview, BinaryIO, str, Path],
) -> tuple[Scene, FrameStream]:
    """Read the declaration chunks and return a lazy stream over the frames.

    Accepts raw bytes, a binary file object, or a path.  Only the prefix up
    to the FRAM header is parsed; frames are not materialized.
    """
    if isinstance(source, (str, Path)):
        source = open(source, "rb")
    elif isinstance(source, (bytes, bytearray, memoryview)):
        source = io.BytesIO(bytes(source))
    form_size = _read_form_prefix(source)
    scanner = ChunkScanner(source, limit=form_size - 4, start_offset=12)
    header = _read_header(scanner)
    _check_fram_size(header.scene, header.fram_size)
    return header.scene, FrameStream(header.scene, source, scanner.offset)


# ---------------------------------------------------------------------------
# streaming writer

class GmsWriter:
    """Incremental writer: declare the scene up front, append frames, finalize.

    Frame count and chunk sizes are back-patched on finalize; when the sink
    cannot seek, output is buffered in memory and flushed at finalize.
    Usable as a context manager (finalizes on clean exit).
    """

    def __init__(self, sink, scene: Scene, version: tuple[int, int] = CURRENT_VERSION):
        fatal = fatal_violations(validate_scene(scene))
        if fatal:
            raise SceneValidationError(fatal)
        if version[0] != 0:
            raise UnsupportedVersionError(
                f"cannot write major version {version[0]}; this writer emits 0.x"
            )
        self.scene = scene
        self._tracks = scene_track_count(scene)
        self._stride = padded_frame_stride(scene)
        self._count = 0
        self._finalized = False
        self._owns_sink = isinstance(sink, (str, Path))
        self._sink = open(sink, "wb") if self._owns_sink else sink
        self._buffered = not (
            hasattr(self._sink, "seekable") and self._sink.seekable()
        )
        self._out = io.BytesIO() if self._buffered else self._sink
        self._base = 0 if self._buffered else self._out.tell()

        declarations = _declaration_chunks(version, scene, 0)
        self._form_size_at = 4
        scen_name_len = len(scene.name.encode("utf-8"))
        # FORM prefix (12) + VERS chunk (12) + SCEN id/size (8) + name field.
        self._nb_frame_at = 12 + 12 + 8 + 2 + scen_name_len
        self._fram_size_at = 12 + len(declarations) + 4
        self._written = 0
        self._write(FORM_ID + _u32(0) + FILE_TYPE)
        self._write(declarations)
        self._write(b"FRAM" + _u32(0))

    def _write(self, data: bytes):
        self._out.write(data)
        self._written += len(data)

    def append_frames(self, frames) -> int:
        """Append one frame (1-D) or a block of frames (2-D); returns bytes written."""
        if self._finalized:
            raise FinalizedError("writer already finalized")
        frames = np.asarray(frames, dtype=np.float64)
        if frames.ndim == 1:
            frames = frames.reshape(1, -1)
        if frames.ndim != 2 or frames.shape[1] != self._tracks:
            raise WidthMismatchError(
                f"frames have {frames.shape[-1] if frames.ndim else 0} values per row, "
                f"scene declares {self._tracks} tracks"
            )
        self._write(pack_frames(self.scene, frames))
        self._count += frames.shape[0]
        return self._written

    def _patch(self, at: int, value: int):
        self._out.seek(self._base + at)
        self._out.write(_u32(value))

    def finalize(self) -> int:
        """Back-patch sizes and the frame count; returns the final byte length."""
        if self._finalized:
            raise FinalizedError("writer already finalized")
        self._finalized = True
        self._patch(self._form_size_at, self._written - 8)
        self._patch(self._nb_frame_at, self._count)
        self._patch(self._fram_size_at, self._count * self._stride)
        if self._buffered:
            self._sink.write(self._out.getvalue())
        else:
            self._out.seek(self._base + self._written)
        self._sink.flush()
        if self._owns_sink:
            self._sink.close()
        return self._written

    @property
    def frames_written(self) -> int:
        return self._count

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is None:
            self.finalize()
        elif self._owns_sink:
            self._sink.close()
        return False


# ---------------------------------------------------------------------------
# convenience I/O

def load(path: Union[str, Path]) -> GmsDocument:
    """Read and decode one file."""
    return decode_document(Path(path).read_bytes())


def save(doc: GmsDocument, path: Union[str, Path]) -> None:
    """Encode and write one file."""
    Path(path).write_bytes(encode_document(doc))
