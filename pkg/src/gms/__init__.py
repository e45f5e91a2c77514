"""Codec and tooling for the GMS gesture/motion signal file format.

GMS stores sampled gesture and motion signals in a big-endian, IFF-style
chunked binary container: a scene of named units, each grouping correlated
channels of 1-3 scalar tracks, sampled at one shared rate.
"""

from .chunks import (
    KNOWN_CHUNK_IDS,
    RawChunk,
    decode_primitive,
    encode_primitive,
    scan_chunks,
    write_chunk,
)
from .codec import (
    ACCEPTED_FILE_TYPES,
    CURRENT_VERSION,
    FILE_TYPE,
    FrameStream,
    GmsDocument,
    GmsWriter,
    decode_document,
    encode_document,
    load,
    open_frame_stream,
    pack_frames,
    save,
    unpack_frames,
)
from .errors import (
    AxisRangeError,
    BadMagicError,
    ChunkError,
    EmptySignalError,
    FactorError,
    FinalizedError,
    FormatError,
    GmsError,
    GmsWarning,
    IllegalCodeError,
    MalformedChunkIdError,
    ManifestMismatchError,
    OversizeChunkError,
    SampleRangeError,
    SceneValidationError,
    StructureError,
    TruncatedDataError,
    UnknownPathError,
    UnsupportedVersionError,
    WidthMismatchError,
)
from .example import example_document, example_frames, example_scene
from .model import (
    Channel,
    Dimension,
    SampleType,
    Scene,
    Unit,
    VariableType,
    Violation,
    fatal_violations,
    frame_byte_size,
    padded_frame_stride,
    scene_track_count,
    track_count,
    validate_scene,
)
from .signal import (
    RateBand,
    TrackSlice,
    TrackStats,
    classify_rate,
    decimate,
    slice_track,
    smooth_decimate,
    track_column,
    track_stats,
)

__version__ = "0.1.0"
