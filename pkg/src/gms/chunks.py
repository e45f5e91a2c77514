"""IFF-style chunk layer: big-endian primitives and tagged, size-prefixed records.

A chunk is a 4-byte ASCII identifier, an unsigned 32-bit payload size and the
payload itself.  The size counts payload bytes only; a chunk with an odd-sized
payload is followed by a single zero pad byte so that the next chunk header
starts on an even offset.  All multi-byte values are big-endian.

This layer knows nothing about what the chunks mean.
"""

from __future__ import annotations

import io
import struct
from dataclasses import dataclass
from typing import BinaryIO, Iterator, Union

from .errors import MalformedChunkIdError, OversizeChunkError, TruncatedDataError

KNOWN_CHUNK_IDS = (b"FORM", b"VERS", b"SCEN", b"UNIT", b"CHAN", b"FRAM")

_PRIMITIVES = {
    "u16": struct.Struct(">H"),
    "i32": struct.Struct(">i"),
    "u32": struct.Struct(">I"),
    "f32": struct.Struct(">f"),
    "f64": struct.Struct(">d"),
}

PRIMITIVE_KINDS = tuple(_PRIMITIVES)
PRIMITIVE_WIDTHS = {kind: s.size for kind, s in _PRIMITIVES.items()}

ByteSource = Union[bytes, bytearray, memoryview, BinaryIO]


def encode_primitive(value, kind: str) -> bytes:
    """Encode one value as big-endian bytes; kind is one of PRIMITIVE_KINDS."""
    return _PRIMITIVES[kind].pack(value)


def decode_primitive(data: bytes, kind: str):
    """Inverse of encode_primitive; the input must be exactly the kind's width."""
    fmt = _PRIMITIVES[kind]
    if len(data) != fmt.size:
        raise TruncatedDataError(
            f"{kind} needs {fmt.size} bytes, got {len(data)}"
        )
    return fmt.unpack(data)[0]


def check_chunk_id(chunk_id: bytes, offset: int | None = None) -> bytes:
    """Validate that chunk_id is exactly 4 printable ASCII bytes."""
    chunk_id = bytes(chunk_id)
    where = "" if offset is None else f" at offset {offset}"
    if len(chunk_id) != 4:
        raise MalformedChunkIdError(f"chunk id {chunk_id!r}{where} is not 4 bytes")
    if any(b < 0x20 or b > 0x7E for b in chunk_id):
        raise MalformedChunkIdError(
            f"chunk id {chunk_id!r}{where} contains non-printable bytes"
        )
    return chunk_id


@dataclass(frozen=True)
class RawChunk:
    """One decoded chunk. The declared size always equals len(payload)."""

    id: bytes
    payload: bytes

    @property
    def declared_size(self) -> int:
        return len(self.payload)


def write_chunk(chunk_id: bytes, payload: bytes) -> bytes:
    """Serialize one chunk: id, size, payload, plus a pad byte for odd sizes."""
    chunk_id = check_chunk_id(chunk_id)
    size = len(payload)
    if size >= 2**32:
        raise OversizeChunkError(f"payload of {size} bytes exceeds 32-bit size field")
    out = bytearray(chunk_id)
    out += encode_primitive(size, "u32")
    out += payload
    if size % 2:
        out += b"\0"
    return bytes(out)


class ChunkScanner:
    """Sequential chunk reader over a byte source.

    Tracks the absolute byte offset for error messages.  When ``limit`` is
    given, scanning stops cleanly once that many bytes have been consumed;
    otherwise it stops at end of stream.  The scanner owns its source and is
    single-consumer.
    """

    def __init__(self, source: ByteSource, limit: int | None = None, start_offset: int = 0):
        if isinstance(source, (bytes, bytearray, memoryview)):
            source = io.BytesIO(bytes(source))
        self._file = source
        self._limit = limit
        self._start = start_offset
        self.offset = start_offset

    def _remaining(self) -> int | None:
        if self._limit is None:
            return None
        return self._limit - (self.offset - self._start)

    def _read_exact(self, n: int, what: str) -> bytes:
        data = self._file.read(n)
        start = self.offset
        self.offset += len(data)
        if len(data) < n:
            raise TruncatedDataError(
                f"{what} at offset {start}: needed {n} bytes, got {len(data)}"
            )
        return data

    def next_header(self) -> tuple[bytes, int] | None:
        """Read the next (id, declared size) pair, or None at end of payload."""
        remaining = self._remaining()
        if remaining is not None and remaining <= 0:
            return None
        start = self.offset
        head = self._file.read(8)
        self.offset += len(head)
        if not head and remaining is None:
            return None
        if len(head) < 8:
            raise TruncatedDataError(
                f"chunk header at offset {start}: needed 8 bytes, got {len(head)}"
            )
        chunk_id = check_chunk_id(head[:4], offset=start)
        size = decode_primitive(head[4:], "u32")
        remaining = self._remaining()
        if remaining is not None and size > remaining:
            raise TruncatedDataError(
                f"chunk {chunk_id.decode('ascii')!r} at offset {start}: "
                f"declares {size} bytes, {remaining} remain"
            )
        return chunk_id, size

    def read_payload(self, chunk_id: bytes, size: int) -> bytes:
        """Read a chunk payload and skip its pad byte when the size is odd."""
        payload = self._read_exact(size, f"chunk {chunk_id.decode('ascii')!r} payload")
        if size % 2:
            # A missing pad at end of stream is tolerated.
            pad = self._file.read(1)
            self.offset += len(pad)
        return payload


def scan_chunks(source: ByteSource, limit: int | None = None) -> Iterator[RawChunk]:
    """Yield chunks in file order from a FORM payload region."""
    scanner = ChunkScanner(source, limit=limit)
    while (header := scanner.next_header()) is not None:
        chunk_id, size = header
        yield RawChunk(chunk_id, scanner.read_payload(chunk_id, size))
