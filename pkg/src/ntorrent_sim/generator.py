"""Deterministic synthesis of pretend files and their torrent metadata.

Objects are built bottom-up: data packets first, then manifests from the last
one backwards, then torrent-file segments from the last one backwards.  Every
pointer and catalog entry can therefore embed the real implicit digest of an
object that already exists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .ndn import ContentType, Data, Name
from .torrent import (
    FileManifest,
    TorrentFileSegment,
    encode_manifest,
    encode_torrent_segment,
    manifest_name,
    packet_name,
    segment_name,
)

DUMMY_BYTE = b"A"


@dataclass(frozen=True)
class TorrentParams:
    torrent_name: str = "demo"
    num_files: int = 2
    file_size: int = 1024
    packet_size: int = 256
    names_per_manifest: int = 3
    names_per_segment: int = 3

    def __post_init__(self) -> None:
        if not self.torrent_name or "/" in self.torrent_name:
            raise ValueError(f"invalid torrent name {self.torrent_name!r}")
        for f in ("num_files", "file_size", "packet_size", "names_per_manifest", "names_per_segment"):
            value = getattr(self, f)
            if not isinstance(value, int) or value < 1:
                raise ValueError(f"{f} must be a positive integer, got {value!r}")

    @property
    def packets_per_file(self) -> int:
        return math.ceil(self.file_size / self.packet_size)

    @property
    def manifests_per_file(self) -> int:
        return math.ceil(self.packets_per_file / self.names_per_manifest)

    @property
    def total_packets(self) -> int:
        return self.num_files * self.packets_per_file

    @property
    def total_manifests(self) -> int:
        return self.num_files * self.manifests_per_file

    @property
    def total_segments(self) -> int:
        return math.ceil(self.total_manifests / self.names_per_segment)

    def file_paths(self) -> list[str]:
        return [f"file{k}" for k in range(self.num_files)]


@dataclass(frozen=True)
class TorrentBundle:
    torrent_segments: tuple[Data, ...]
    manifests: tuple[Data, ...]
    data_packets: tuple[Data, ...]
    first_segment_name: Name

    def all_objects(self) -> tuple[Data, ...]:
        return self.torrent_segments + self.manifests + self.data_packets

    def full_names(self) -> list[Name]:
        return [d.full_name for d in self.all_objects()]


def generate_file_bytes(file_size: int) -> bytes:
    if file_size < 1:
        raise ValueError("file_size must be >= 1")
    return DUMMY_BYTE * file_size


def packetize_file(file: bytes, packet_size: int, torrent_name: str, file_path: str) -> list[Data]:
    if packet_size < 1:
        raise ValueError("packet_size must be >= 1")
    return [
        Data(packet_name(torrent_name, file_path, k), ContentType.DATA_PACKET, file[off:off + packet_size])
        for k, off in enumerate(range(0, len(file), packet_size))
    ]


def _chunks(seq, size: int):
    return [seq[i:i + size] for i in range(0, len(seq), size)]


def build_manifests(packets: list[list[Data]], names_per_manifest: int, torrent_name: str) -> list[Data]:
    """Manifests for every file, in file order, chained within each file."""
    out: list[Data] = []
    for file_packets in packets:
        if not file_packets:
            raise ValueError("every file needs at least one packet")
        file_path = file_packets[0].wire_name[2].decode("utf-8")
        catalogs = _chunks([p.full_name for p in file_packets], names_per_manifest)
        built: list[Data] = []
        next_ptr = None
        for k in range(len(catalogs) - 1, -1, -1):
            m = FileManifest(k, file_path, tuple(catalogs[k]), next_ptr)
            d = Data(manifest_name(torrent_name, file_path, k), ContentType.FILE_MANIFEST, encode_manifest(m))
            built.append(d)
            next_ptr = d.full_name
        out.extend(reversed(built))
    return out


def build_torrent_segments(manifest_data: list[Data], names_per_segment: int, torrent_name: str) -> tuple[list[Data], Name]:
    if not manifest_data:
        raise ValueError("at least one manifest is required")
    catalogs = _chunks([m.full_name for m in manifest_data], names_per_segment)
    built: list[Data] = []
    next_ptr = None
    for k in range(len(catalogs) - 1, -1, -1):
        s = TorrentFileSegment(k, tuple(catalogs[k]), next_ptr)
        d = Data(segment_name(torrent_name, k), ContentType.TORRENT_SEGMENT, encode_torrent_segment(s))
        built.append(d)
        next_ptr = d.full_name
    built.reverse()
    return built, built[0].full_name


def build_torrent(params: TorrentParams) -> TorrentBundle:
    content = generate_file_bytes(params.file_size)
    per_file = [
        packetize_file(content, params.packet_size, params.torrent_name, path)
        for path in params.file_paths()
    ]
    manifests = build_manifests(per_file, params.names_per_manifest, params.torrent_name)
    segments, first = build_torrent_segments(manifests, params.names_per_segment, params.torrent_name)
    return TorrentBundle(
        tuple(segments),
        tuple(manifests),
        tuple(p for packets in per_file for p in packets),
        first,
    )
