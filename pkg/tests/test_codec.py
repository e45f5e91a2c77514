import dataclasses
import io
import struct

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gms.chunks import RawChunk, write_chunk
from gms.codec import (
    FrameStream,
    GmsDocument,
    GmsWriter,
    decode_document,
    encode_document,
    open_frame_stream,
    pack_frames,
)
from gms.errors import (
    BadMagicError,
    FinalizedError,
    GmsWarning,
    IllegalCodeError,
    SampleRangeError,
    SceneValidationError,
    StructureError,
    TruncatedDataError,
    UnsupportedVersionError,
    WidthMismatchError,
)
from gms.model import (
    Channel,
    Dimension,
    SampleType,
    Scene,
    Unit,
    VariableType,
    frame_byte_size,
    padded_frame_stride,
    scene_track_count,
)

# --------------------------------------------------------------------------
# Golden vector for the minimal document, assembled by hand field by field:
# scene "s" at 1000 Hz, one unit "u" with one scalar position channel "c",
# float32 samples, scale 1.0, block size 0, zero frames.
GOLDEN_FORM = bytes.fromhex("464F524D 0000005A 474D5320".replace(" ", ""))
GOLDEN_VERS = bytes.fromhex("56455253 00000004 0000 0001".replace(" ", ""))
GOLDEN_SCEN = bytes.fromhex(
    # id, size 29, nameLen 1, "s", nbFrame 0, freq 1000.0, dataType 0,
    # scale 1.0, blockSize 0, pad
    "5343454E 0000001D 0001 73 00000000 408F400000000000"
    " 0000 3FF0000000000000 00000000 00".replace(" ", "")
)
GOLDEN_UNIT = bytes.fromhex("554E4954 00000003 0001 75 00".replace(" ", ""))
GOLDEN_CHAN = bytes.fromhex("4348414E 00000007 0001 63 0000 0000 00".replace(" ", ""))
GOLDEN_FRAM = bytes.fromhex("4652414D 00000000".replace(" ", ""))
GOLDEN_FILE = GOLDEN_FORM + GOLDEN_VERS + GOLDEN_SCEN + GOLDEN_UNIT + GOLDEN_CHAN + GOLDEN_FRAM


def minimal_scene(nb_frame=0, scale=1.0, sample_type=SampleType.FLOAT32, block_size=0):
    return Scene(
        name="s",
        nb_frame=nb_frame,
        freq=1000.0,
        sample_type=sample_type,
        units=(Unit("u", (Channel("c", Dimension.SCALAR_0D, VariableType.POSITION),)),),
        scale=scale,
        block_size=block_size,
    )


def minimal_document(**kwargs):
    scene = minimal_scene(**kwargs)
    frames = np.zeros((scene.nb_frame, 1))
    return GmsDocument(scene=scene, frames=frames)


def u32(v):
    return struct.pack(">I", v)


def form_file(*chunks, file_type=b"GMS "):
    content = file_type + b"".join(chunks)
    return b"FORM" + u32(len(content)) + content


def scen_payload(name=b"s", nb_frame=0, freq=1000.0, dtype=0, scale=1.0, block=0):
    return (
        struct.pack(">H", len(name)) + name + u32(nb_frame)
        + struct.pack(">d", freq) + struct.pack(">H", dtype)
        + struct.pack(">d", scale) + u32(block)
    )


def chan_payload(name=b"c", dimension=0, var_type=0):
    return (
        struct.pack(">H", len(name)) + name
        + struct.pack(">H", dimension) + struct.pack(">H", var_type)
    )


class TestGoldenVectors:
    def test_minimal_document_bytes(self):
        assert encode_document(minimal_document()) == GOLDEN_FILE

    def test_total_length(self):
        assert len(GOLDEN_FILE) == 98

    def test_decode_golden(self):
        assert decode_document(GOLDEN_FILE) == minimal_document()

    def test_two_frame_payload(self):
        doc = minimal_document(nb_frame=2)
        doc.frames[:] = [[1.0], [2.0]]
        data = encode_document(doc)
        # float32 of 1.0 then 2.0
        assert data[-8:] == bytes.fromhex("3F800000 40000000".replace(" ", ""))

    def test_scale_divides_on_write(self):
        doc = minimal_document(nb_frame=2, scale=0.5)
        doc.frames[:] = [[1.0], [2.0]]
        data = encode_document(doc)
        # stored = physical / scale: 2.0 then 4.0
        assert data[-8:] == bytes.fromhex("40000000 40800000".replace(" ", ""))

    def test_frame_major_track_order(self):
        scene = Scene("s", 2, 500.0, SampleType.FLOAT64, (
            Unit("a", (Channel("p", Dimension.PLANE_2DXY, VariableType.POSITION),)),
            Unit("b", (Channel("q", Dimension.SCALAR_0D, VariableType.FORCE),)),
        ))
        doc = GmsDocument(scene=scene, frames=[[1.0, 2.0, 3.0], [4.0, 5.0, 6.0]])
        data = encode_document(doc)
        expected = b"".join(struct.pack(">d", v) for v in [1, 2, 3, 4, 5, 6])
        assert data[-48:] == expected


class TestDecodeErrors:
    def test_bad_magic(self):
        with pytest.raises(BadMagicError):
            decode_document(b"RIFF" + GOLDEN_FILE[4:])

    def test_unrecognized_file_type(self):
        with pytest.raises(BadMagicError):
            decode_document(form_file(GOLDEN_VERS, file_type=b"AIFF"))

    def test_truncated_file(self):
        with pytest.raises(TruncatedDataError) as exc:
            decode_document(GOLDEN_FILE[:-6])
        assert "offset" in str(exc.value) or "bytes" in str(exc.value)

    def test_truncated_inside_chunk_reports_offset(self):
        # Cut inside the SCEN payload; the FORM size still declares more.
        cut = GOLDEN_FORM + GOLDEN_VERS + GOLDEN_SCEN[:12]
        with pytest.raises(TruncatedDataError) as exc:
            decode_document(cut)
        assert "offset" in str(exc.value)

    def test_orphan_channel(self):
        data = form_file(
            GOLDEN_VERS,
            write_chunk(b"SCEN", scen_payload()),
            write_chunk(b"CHAN", chan_payload(name=b"stray")),
            write_chunk(b"FRAM", b""),
        )
        with pytest.raises(StructureError, match="stray"):
            decode_document(data)

    def test_two_scen_chunks(self):
        data = form_file(
            GOLDEN_VERS,
            write_chunk(b"SCEN", scen_payload()),
            write_chunk(b"SCEN", scen_payload()),
        )
        with pytest.raises(StructureError, match="SCEN"):
            decode_document(data)

    def test_two_fram_chunks(self):
        data = form_file(
            GOLDEN_VERS,
            write_chunk(b"SCEN", scen_payload()),
            write_chunk(b"UNIT", struct.pack(">H", 1) + b"u"),
            write_chunk(b"CHAN", chan_payload()),
            write_chunk(b"FRAM", b""),
            write_chunk(b"FRAM", b""),
        )
        with pytest.raises(StructureError, match="after the FRAM"):
            decode_document(data)

    def test_fram_before_scen(self):
        data = form_file(GOLDEN_VERS, write_chunk(b"FRAM", b""))
        with pytest.raises(StructureError, match="SCEN"):
            decode_document(data)

    def test_missing_fram(self):
        data = form_file(GOLDEN_VERS, write_chunk(b"SCEN", scen_payload()))
        with pytest.raises(StructureError, match="missing FRAM"):
            decode_document(data)

    def test_fram_size_mismatch(self):
        data = form_file(
            GOLDEN_VERS,
            write_chunk(b"SCEN", scen_payload(nb_frame=2)),
            write_chunk(b"UNIT", struct.pack(">H", 1) + b"u"),
            write_chunk(b"CHAN", chan_payload()),
            write_chunk(b"FRAM", b"\x00\x00\x00\x00"),  # 4 bytes, 8 owed
        )
        with pytest.raises(StructureError, match="FRAM payload"):
            decode_document(data)

    def test_unknown_dimension_code(self):
        data = form_file(
            GOLDEN_VERS,
            write_chunk(b"SCEN", scen_payload()),
            write_chunk(b"UNIT", struct.pack(">H", 1) + b"u"),
            write_chunk(b"CHAN", chan_payload(dimension=9)),
            write_chunk(b"FRAM", b""),
        )
        with pytest.raises(IllegalCodeError, match="dimension code 9"):
            decode_document(data)

    def test_unknown_variable_type_code(self):
        data = form_file(
            GOLDEN_VERS,
            write_chunk(b"SCEN", scen_payload()),
            write_chunk(b"UNIT", struct.pack(">H", 1) + b"u"),
            write_chunk(b"CHAN", chan_payload(var_type=6)),
            write_chunk(b"FRAM", b""),
        )
        with pytest.raises(IllegalCodeError, match="variable type"):
            decode_document(data)

    def test_unsupported_major_version(self):
        data = form_file(
            write_chunk(b"VERS", struct.pack(">HH", 1, 0)),
            write_chunk(b"SCEN", scen_payload()),
            write_chunk(b"FRAM", b""),
        )
        with pytest.raises(UnsupportedVersionError):
            decode_document(data)

    def test_vers_not_first(self):
        data = form_file(
            write_chunk(b"SCEN", scen_payload()),
            write_chunk(b"VERS", struct.pack(">HH", 0, 1)),
            write_chunk(b"FRAM", b""),
        )
        with pytest.warns(GmsWarning):
            with pytest.raises(StructureError, match="VERS"):
                decode_document(data)

    def test_trailing_garbage(self):
        with pytest.raises(StructureError, match="trailing"):
            decode_document(GOLDEN_FILE + b"junk")


class TestDecodeTolerance:
    def test_legacy_gsm_file_type(self):
        legacy = GOLDEN_FILE.replace(b"GMS ", b"GSM ", 1)
        doc = decode_document(legacy)
        assert doc == minimal_document()
        # Rewrite normalizes the magic.
        assert encode_document(doc) == GOLDEN_FILE

    def test_missing_vers_warns_and_defaults(self):
        data = form_file(
            write_chunk(b"SCEN", scen_payload()),
            write_chunk(b"UNIT", struct.pack(">H", 1) + b"u"),
            write_chunk(b"CHAN", chan_payload()),
            write_chunk(b"FRAM", b""),
        )
        with pytest.warns(GmsWarning, match="VERS"):
            doc = decode_document(data)
        assert doc.version == (0, 1)

    def test_unknown_chunk_preserved(self):
        extra = write_chunk(b"XTRA", b"opaque bytes!")
        data = (
            GOLDEN_FORM[:4]
            + u32(90 + len(extra))
            + GOLDEN_FORM[8:]
            + GOLDEN_VERS + GOLDEN_SCEN + GOLDEN_UNIT + GOLDEN_CHAN
            + extra
            + GOLDEN_FRAM
        )
        with pytest.warns(GmsWarning, match="XTRA"):
            doc = decode_document(data)
        assert doc.unknown_chunks == (RawChunk(b"XTRA", b"opaque bytes!"),)
        # Unknown chunks are re-emitted before the frame chunk.
        assert encode_document(doc) == data

    def test_minor_version_forward_compatible(self):
        data = form_file(
            write_chunk(b"VERS", struct.pack(">HH", 0, 7)),
            write_chunk(b"SCEN", scen_payload()),
            write_chunk(b"UNIT", struct.pack(">H", 1) + b"u"),
            write_chunk(b"CHAN", chan_payload()),
            write_chunk(b"FRAM", b""),
        )
        assert decode_document(data).version == (0, 7)

    def test_single_trailing_pad_byte_tolerated(self):
        assert decode_document(GOLDEN_FILE + b"\x00") == minimal_document()


class TestEncodeErrors:
    def test_invalid_scene_rejected(self):
        doc = minimal_document()
        bad = dataclasses.replace(doc.scene, freq=0.0)
        with pytest.raises(SceneValidationError, match="freq"):
            encode_document(GmsDocument(scene=bad, frames=doc.frames))

    def test_frame_row_mismatch_rejected(self):
        doc = minimal_document(nb_frame=3)
        with pytest.raises(SceneValidationError):
            encode_document(GmsDocument(scene=doc.scene, frames=np.zeros((2, 1))))

    def test_long_overflow_rejected(self):
        doc = minimal_document(nb_frame=1, sample_type=SampleType.LONG)
        doc.frames[:] = [[3e9]]
        with pytest.raises(SceneValidationError):
            encode_document(doc)

    def test_major_version_rejected(self):
        doc = minimal_document()
        doc.version = (1, 0)
        with pytest.raises(UnsupportedVersionError):
            encode_document(doc)


class TestBlockAlignment:
    def test_stride_384_offsets(self):
        scene = dataclasses.replace(
            _wide_scene(), nb_frame=3, sample_type=SampleType.FLOAT32, block_size=128
        )
        assert frame_byte_size(scene) == 308
        assert padded_frame_stride(scene) == 384
        rng = np.random.default_rng(7)
        frames = rng.uniform(-1, 1, (3, 77)).astype(np.float32).astype(np.float64)
        data = encode_document(GmsDocument(scene=scene, frames=frames))
        payload_at = _fram_payload_offset(data)
        assert data[4:8] == u32(len(data) - 8)
        for f in range(3):
            start = payload_at + 384 * f
            expected = b"".join(struct.pack(">f", v) for v in frames[f])
            assert data[start : start + 308] == expected
            assert data[start + 308 : start + 384] == b"\x00" * 76

    def test_payload_is_three_full_strides(self):
        scene = dataclasses.replace(
            _wide_scene(), nb_frame=3, sample_type=SampleType.FLOAT32, block_size=128
        )
        frames = np.zeros((3, 77))
        payload = pack_frames(scene, frames)
        assert len(payload) == 3 * 384


def _wide_scene():
    """77-track scene: 8x1 + 1x3 + 1x2 + 16x3 + 2x3 + 10x1."""
    from gms.example import example_scene

    return example_scene(10, nb_frame=0, freq=1000.0)


def _fram_payload_offset(data):
    # Independent walk: skip the 12-byte FORM prefix, then hop chunk by chunk.
    pos = 12
    while True:
        cid = data[pos : pos + 4]
        size = struct.unpack(">I", data[pos + 4 : pos + 8])[0]
        if cid == b"FRAM":
            return pos + 8
        pos += 8 + size + (size % 2)


class TestFrameStream:
    def test_remaining_count(self):
        scene = minimal_scene(nb_frame=1000, sample_type=SampleType.FLOAT64)
        frames = np.arange(1000.0).reshape(-1, 1)
        data = encode_document(GmsDocument(scene=scene, frames=frames))
        meta, stream = open_frame_stream(data)
        assert meta == scene
        assert stream.remaining == 1000
        assert stream.read_next_frame() == [0.0]
        assert stream.remaining == 999

    def test_blockwise_offsets(self):
        scene = dataclasses.replace(
            _wide_scene(), nb_frame=3, sample_type=SampleType.FLOAT32, block_size=128
        )
        frames = np.zeros((3, 77))
        frames[:, 0] = [10.0, 20.0, 30.0]
        data = encode_document(GmsDocument(scene=scene, frames=frames))
        payload_at = _fram_payload_offset(data)
        source = io.BytesIO(data)
        _, stream = open_frame_stream(source)
        assert source.tell() == payload_at
        for f, first in enumerate([10.0, 20.0, 30.0]):
            frame = stream.read_next_frame()
            assert frame[0] == first
            assert source.tell() == payload_at + 384 * (f + 1)
        assert stream.read_next_frame() is None

    def test_empty_stream(self):
        _, stream = open_frame_stream(GOLDEN_FILE)
        assert stream.remaining == 0
        assert stream.read_next_frame() is None
        assert list(stream) == []

    def test_long_scale_applied(self):
        scene = minimal_scene(nb_frame=1, sample_type=SampleType.LONG, scale=0.25)
        data = encode_document(GmsDocument(scene=scene, frames=[[1.75]]))
        assert data[-4:] == b"\x00\x00\x00\x07"  # stored = 1.75 / 0.25
        _, stream = open_frame_stream(data)
        assert stream.read_next_frame() == [1.75]

    def test_truncated_stream(self):
        scene = minimal_scene(nb_frame=2, sample_type=SampleType.FLOAT64)
        data = encode_document(GmsDocument(scene=scene, frames=[[1.0], [2.0]]))
        _, stream = open_frame_stream(data[:-4])
        assert stream.read_next_frame() == [1.0]
        with pytest.raises(TruncatedDataError, match="owed"):
            stream.read_next_frame()

    def test_iterates_frames(self):
        scene = minimal_scene(nb_frame=3, sample_type=SampleType.FLOAT64)
        data = encode_document(GmsDocument(scene=scene, frames=[[1.0], [2.0], [3.0]]))
        _, stream = open_frame_stream(data)
        assert [f[0] for f in stream] == [1.0, 2.0, 3.0]

    def test_structural_error_in_prefix(self):
        data = form_file(GOLDEN_VERS, write_chunk(b"FRAM", b""))
        with pytest.raises(StructureError):
            open_frame_stream(data)

    def test_path_source(self, tmp_path):
        path = tmp_path / "t.gms"
        path.write_bytes(GOLDEN_FILE)
        scene, stream = open_frame_stream(path)
        assert scene.name == "s"
        assert isinstance(stream, FrameStream)


class TestWriter:
    def test_append_then_finalize(self):
        scene = minimal_scene(nb_frame=0, sample_type=SampleType.FLOAT64)
        sink = io.BytesIO()
        writer = GmsWriter(sink, scene)
        writer.append_frames([[1.0], [2.0]])
        writer.append_frames([3.0])
        writer.finalize()
        doc = decode_document(sink.getvalue())
        assert doc.scene.nb_frame == 3
        assert doc.frames.tolist() == [[1.0], [2.0], [3.0]]

    def test_matches_batch_encoder(self):
        scene = dataclasses.replace(
            _wide_scene(), nb_frame=4, sample_type=SampleType.FLOAT32, block_size=128
        )
        frames = example_frames_for(scene)
        sink = io.BytesIO()
        with GmsWriter(sink, dataclasses.replace(scene, nb_frame=0)) as writer:
            for row in frames:
                writer.append_frames(row)
        assert sink.getvalue() == encode_document(GmsDocument(scene=scene, frames=frames))

    def test_width_mismatch(self):
        writer = GmsWriter(io.BytesIO(), minimal_scene())
        with pytest.raises(WidthMismatchError):
            writer.append_frames([[1.0, 2.0]])
        writer.finalize()

    def test_zero_frames_valid(self):
        sink = io.BytesIO()
        GmsWriter(sink, minimal_scene()).finalize()
        assert decode_document(sink.getvalue()).scene.nb_frame == 0

    def test_finalize_twice(self):
        writer = GmsWriter(io.BytesIO(), minimal_scene())
        writer.finalize()
        with pytest.raises(FinalizedError):
            writer.finalize()

    def test_append_after_finalize(self):
        writer = GmsWriter(io.BytesIO(), minimal_scene())
        writer.finalize()
        with pytest.raises(FinalizedError):
            writer.append_frames([0.0])

    def test_unseekable_sink(self):
        class PipeSink:
            def __init__(self):
                self.chunks = []

            def seekable(self):
                return False

            def write(self, data):
                self.chunks.append(bytes(data))

            def flush(self):
                pass

        scene = minimal_scene(sample_type=SampleType.FLOAT64)
        direct = io.BytesIO()
        w1 = GmsWriter(direct, scene)
        w1.append_frames([[5.0], [6.0]])
        w1.finalize()

        pipe = PipeSink()
        w2 = GmsWriter(pipe, scene)
        w2.append_frames([[5.0], [6.0]])
        w2.finalize()
        assert b"".join(pipe.chunks) == direct.getvalue()

    def test_path_sink(self, tmp_path):
        path = tmp_path / "out.gms"
        writer = GmsWriter(path, minimal_scene(sample_type=SampleType.FLOAT64))
        writer.append_frames([[1.5]])
        writer.finalize()
        assert decode_document(path.read_bytes()).frames.tolist() == [[1.5]]

    def test_invalid_scene_rejected(self):
        with pytest.raises(SceneValidationError):
            GmsWriter(io.BytesIO(), dataclasses.replace(minimal_scene(), scale=0.0))

    def test_returns_byte_count(self):
        writer = GmsWriter(io.BytesIO(), minimal_scene(sample_type=SampleType.FLOAT64))
        before = writer.append_frames([[1.0]])
        after = writer.append_frames([[2.0]])
        assert after == before + 8


def example_frames_for(scene):
    rng = np.random.default_rng(21)
    raw = rng.uniform(-100, 100, (scene.nb_frame, scene_track_count(scene)))
    return raw.astype(np.float32).astype(np.float64)


class TestQuantization:
    def test_long_round_trip_error_bound(self):
        scene = minimal_scene(nb_frame=200, sample_type=SampleType.LONG, scale=0.01)
        rng = np.random.default_rng(99)
        values = rng.uniform(-40.0, 40.0, (200, 1))
        doc = GmsDocument(scene=scene, frames=values)
        decoded = decode_document(encode_document(doc))
        assert np.abs(decoded.frames - values).max() <= 0.005

    def test_non_finite_rejected_by_packer(self):
        scene = minimal_scene(nb_frame=1, sample_type=SampleType.FLOAT64)
        with pytest.raises(SampleRangeError):
            pack_frames(scene, np.array([[np.inf]]))

    def test_float32_overflow_rejected(self):
        scene = minimal_scene(nb_frame=1)
        with pytest.raises(SampleRangeError):
            pack_frames(scene, np.array([[1e39]]))


# --------------------------------------------------------------------------
# Randomized document round trips.  Scales are powers of two so that the
# physical <-> stored conversion is exact and bitwise equality is meaningful.

_NAME_POOL = ("track", "unité", "θ", "k")


@st.composite
def documents(draw):
    n_units = draw(st.integers(1, 4))
    units = []
    for i in range(n_units):
        channels = tuple(
            Channel(
                f"{draw(st.sampled_from(_NAME_POOL))}{j}",
                draw(st.sampled_from(list(Dimension))),
                draw(st.sampled_from(list(VariableType))),
            )
            for j in range(draw(st.integers(1, 4)))
        )
        units.append(Unit(f"u{i}", channels))
    sample_type = draw(st.sampled_from(list(SampleType)))
    scene = Scene(
        name=draw(st.sampled_from(_NAME_POOL)),
        nb_frame=draw(st.integers(0, 12)),
        freq=draw(st.floats(1.0, 10_000.0, allow_nan=False)),
        sample_type=sample_type,
        units=tuple(units),
        scale=draw(st.sampled_from([0.25, 0.5, 1.0, 2.0, 8.0, -0.5])),
        block_size=draw(st.sampled_from([0, 1, 4, 128, 4096])),
    )
    rng = np.random.default_rng(draw(st.integers(0, 2**31)))
    shape = (scene.nb_frame, scene_track_count(scene))
    if sample_type is SampleType.LONG:
        stored = rng.integers(-(2**31) + 1, 2**31 - 1, shape).astype(np.float64)
    elif sample_type is SampleType.FLOAT32:
        stored = rng.uniform(-1e3, 1e3, shape).astype(np.float32).astype(np.float64)
    else:
        stored = rng.uniform(-1e6, 1e6, shape)
    unknown = ()
    if draw(st.booleans()):
        unknown = (RawChunk(b"XTRA", draw(st.binary(max_size=9))),)
    return GmsDocument(scene=scene, frames=stored * scene.scale, unknown_chunks=unknown)


@settings(max_examples=60, deadline=None)
@given(doc=documents())
@pytest.mark.filterwarnings("ignore::gms.errors.GmsWarning")
def test_document_round_trip(doc):
    data = encode_document(doc)
    decoded = decode_document(data)
    assert decoded == doc
    # Canonical bytes: re-encoding a decoded writer file is the identity.
    assert encode_document(decoded) == data
