"""Fixed-width TLV framing shared by the packet and object codecs.

Every block is ``type (1 byte) | length (4 bytes, big-endian) | value``.
"""

from __future__ import annotations

import struct
from typing import Iterator

HEADER = struct.Struct(">BI")
HEADER_SIZE = HEADER.size


class TlvError(ValueError):
    """Raised by the low-level reader; callers re-raise as their own error type."""


def block(tlv_type: int, value: bytes) -> bytes:
    return HEADER.pack(tlv_type, len(value)) + value


def read_block(buf: bytes | memoryview, offset: int = 0) -> tuple[int, memoryview, int]:
    """Read one block at ``offset``; return ``(type, value, next_offset)``."""
    view = memoryview(buf)
    if len(view) - offset < HEADER_SIZE:
        raise TlvError(f"truncated TLV header at offset {offset}")
    tlv_type, length = HEADER.unpack_from(view, offset)
    start = offset + HEADER_SIZE
    end = start + length
    if end > len(view):
        raise TlvError(f"length {length} of type 0x{tlv_type:02x} overruns buffer")
    return tlv_type, view[start:end], end


def iter_blocks(buf: bytes | memoryview) -> Iterator[tuple[int, memoryview]]:
    offset = 0
    while offset < len(buf):
        tlv_type, value, offset = read_block(buf, offset)
        yield tlv_type, value


def read_single(buf: bytes | memoryview, expected_type: int) -> memoryview:
    """Read exactly one block of ``expected_type`` spanning the whole buffer."""
    tlv_type, value, end = read_block(buf)
    if tlv_type != expected_type:
        raise TlvError(f"expected type 0x{expected_type:02x}, got 0x{tlv_type:02x}")
    if end != len(buf):
        raise TlvError(f"{len(buf) - end} trailing bytes")
    return value


def uint_be(value: bytes | memoryview, width: int) -> int:
    if len(value) != width:
        raise TlvError(f"expected {width}-byte integer, got {len(value)} bytes")
    return int.from_bytes(value, "big")
