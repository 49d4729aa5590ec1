"""Torrent-file segments, file manifests, and name classification.

Namespace::

    /NTORRENT/<torrent>/torrent-file/<seg#>/<digest>
    /NTORRENT/<torrent>/<file-path>/manifest/<manifest#>/<digest>
    /NTORRENT/<torrent>/<file-path>/data/<packet#>/<digest>
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

from . import tlv
from .ndn import T_NAME, ContentType, Name, decode_name, encode_name

ROOT = "NTORRENT"
TORRENT_FILE = "torrent-file"
MANIFEST = "manifest"
DATA = "data"

T_SEGMENT = 0x80
T_SEGMENT_NUMBER = 0x81
T_CATALOG_ENTRY = 0x82
T_NEXT_SEGMENT = 0x83

T_MANIFEST = 0x90
T_MANIFEST_NUMBER = 0x91
T_FILE_PATH = 0x92
T_SUB_CATALOG_ENTRY = 0x93
T_NEXT_MANIFEST = 0x94


class MalformedObject(ValueError):
    """Payload bytes that do not decode to a valid torrent object."""


class InterestType(enum.Enum):
    TORRENT_SEGMENT = "torrent-segment"
    FILE_MANIFEST = "file-manifest"
    DATA_PACKET = "data-packet"
    UNKNOWN = "unknown"


CONTENT_TYPE_OF = {
    InterestType.TORRENT_SEGMENT: ContentType.TORRENT_SEGMENT,
    InterestType.FILE_MANIFEST: ContentType.FILE_MANIFEST,
    InterestType.DATA_PACKET: ContentType.DATA_PACKET,
}


def torrent_prefix(torrent_name: str) -> Name:
    return Name.of(ROOT, torrent_name)


def segment_name(torrent_name: str, number: int) -> Name:
    return Name.of(ROOT, torrent_name, TORRENT_FILE, number)


def manifest_name(torrent_name: str, file_path: str, number: int) -> Name:
    return Name.of(ROOT, torrent_name, file_path, MANIFEST, number)


def packet_name(torrent_name: str, file_path: str, number: int) -> Name:
    return Name.of(ROOT, torrent_name, file_path, DATA, number)


def classify_name(n: Name) -> InterestType:
    comps = n.components
    if len(comps) > 2 and comps[2] == TORRENT_FILE.encode():
        return InterestType.TORRENT_SEGMENT
    if len(comps) > 3:
        if comps[3] == MANIFEST.encode():
            return InterestType.FILE_MANIFEST
        if comps[3] == DATA.encode():
            return InterestType.DATA_PACKET
    return InterestType.UNKNOWN


def _check_full(names, what: str) -> None:
    for n in names:
        if not n.is_full:
            raise ValueError(f"{what} entry {n} is not a full name")


@dataclass(frozen=True)
class TorrentFileSegment:
    segment_number: int
    manifest_catalog: tuple[Name, ...]
    next_segment_ptr: Name | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "manifest_catalog", tuple(self.manifest_catalog))
        if not 0 <= self.segment_number < 2**64:
            raise ValueError(f"segment number out of range: {self.segment_number}")
        if not self.manifest_catalog:
            raise ValueError("manifest catalog must be nonempty")
        _check_full(self.manifest_catalog, "catalog")
        if self.next_segment_ptr is not None:
            _check_full([self.next_segment_ptr], "next-segment")


@dataclass(frozen=True)
class FileManifest:
    manifest_number: int
    file_path: str
    sub_manifest_catalog: tuple[Name, ...]
    next_manifest_ptr: Name | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "sub_manifest_catalog", tuple(self.sub_manifest_catalog))
        if not 0 <= self.manifest_number < 2**64:
            raise ValueError(f"manifest number out of range: {self.manifest_number}")
        if not self.sub_manifest_catalog:
            raise ValueError("sub-manifest catalog must be nonempty")
        _check_full(self.sub_manifest_catalog, "sub-catalog")
        if self.next_manifest_ptr is not None:
            _check_full([self.next_manifest_ptr], "next-manifest")


def encode_torrent_segment(s: TorrentFileSegment) -> bytes:
    parts = [tlv.block(T_SEGMENT_NUMBER, s.segment_number.to_bytes(8, "big"))]
    parts += [tlv.block(T_CATALOG_ENTRY, encode_name(n)) for n in s.manifest_catalog]
    if s.next_segment_ptr is not None:
        parts.append(tlv.block(T_NEXT_SEGMENT, encode_name(s.next_segment_ptr)))
    return tlv.block(T_SEGMENT, b"".join(parts))


def encode_manifest(m: FileManifest) -> bytes:
    parts = [
        tlv.block(T_MANIFEST_NUMBER, m.manifest_number.to_bytes(8, "big")),
        tlv.block(T_FILE_PATH, m.file_path.encode("utf-8")),
    ]
    parts += [tlv.block(T_SUB_CATALOG_ENTRY, encode_name(n)) for n in m.sub_manifest_catalog]
    if m.next_manifest_ptr is not None:
        parts.append(tlv.block(T_NEXT_MANIFEST, encode_name(m.next_manifest_ptr)))
    return tlv.block(T_MANIFEST, b"".join(parts))


def _embedded_name(value: memoryview) -> Name:
    name = decode_name(tlv.read_single(value, T_NAME))
    if not name.is_full:
        raise tlv.TlvError(f"embedded name {name} lacks a digest component")
    return name


def _split_fields(body, head: tuple[int, ...], repeated: int, tail: int):
    """Check the fixed field order ``head, repeated*, tail?``."""
    blocks = list(tlv.iter_blocks(body))
    if len(blocks) < len(head) or tuple(t for t, _ in blocks[: len(head)]) != head:
        raise tlv.TlvError("missing or misordered header fields")
    fixed = [v for _, v in blocks[: len(head)]]
    rest = blocks[len(head):]
    entries = []
    while rest and rest[0][0] == repeated:
        entries.append(rest.pop(0)[1])
    ptr = None
    if rest and rest[0][0] == tail:
        ptr = rest.pop(0)[1]
    if rest:
        raise tlv.TlvError(f"unexpected field 0x{rest[0][0]:02x}")
    return fixed, entries, ptr


def decode_torrent_segment(b: bytes) -> TorrentFileSegment:
    try:
        body = tlv.read_single(b, T_SEGMENT)
        (number,), entries, ptr = _split_fields(
            body, (T_SEGMENT_NUMBER,), T_CATALOG_ENTRY, T_NEXT_SEGMENT
        )
        if not entries:
            raise tlv.TlvError("empty manifest catalog")
        return TorrentFileSegment(
            tlv.uint_be(number, 8),
            tuple(_embedded_name(e) for e in entries),
            _embedded_name(ptr) if ptr is not None else None,
        )
    except (tlv.TlvError, ValueError) as exc:
        raise MalformedObject(str(exc)) from None


def decode_manifest(b: bytes) -> FileManifest:
    try:
        body = tlv.read_single(b, T_MANIFEST)
        (number, path), entries, ptr = _split_fields(
            body, (T_MANIFEST_NUMBER, T_FILE_PATH), T_SUB_CATALOG_ENTRY, T_NEXT_MANIFEST
        )
        if not entries:
            raise tlv.TlvError("empty sub-manifest catalog")
        return FileManifest(
            tlv.uint_be(number, 8),
            bytes(path).decode("utf-8"),
            tuple(_embedded_name(e) for e in entries),
            _embedded_name(ptr) if ptr is not None else None,
        )
    except (tlv.TlvError, ValueError) as exc:
        raise MalformedObject(str(exc)) from None
