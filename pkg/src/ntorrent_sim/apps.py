"""Producer and consumer applications driven by the simulator's event loop.

The consumer fetches in three phases: every torrent-file segment (following
the next-segment pointers), then every manifest named in the segment
catalogs, then every data packet named in the manifest sub-catalogs.  Interests
for a phase go out in one burst once the previous phase is complete.
"""

from __future__ import annotations

import enum
import logging
import random
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Union

from .generator import TorrentBundle, TorrentParams, build_torrent
from .ndn import ContentType, Data, Interest, Name
from .torrent import (
    CONTENT_TYPE_OF,
    InterestType,
    classify_name,
    decode_manifest,
    decode_torrent_segment,
    torrent_prefix,
)

log = logging.getLogger(__name__)


class AppError(RuntimeError):
    pass


class AlreadyRequested(AppError):
    """The consumer tried to request a name twice."""


class DigestMismatch(AppError):
    """Received data does not hash to the digest of the requested name."""

    def __init__(self, expected: Name, received: Name) -> None:
        super().__init__(f"digest mismatch: requested {expected}, received data hashing to {received}")
        self.expected = expected
        self.received = received


class UnsolicitedData(AppError):
    """Data arrived for a name the consumer is not waiting for."""


class ChainError(AppError):
    """Metadata objects are inconsistent with each other."""


class Phase(enum.Enum):
    FETCHING_TORRENT_FILE = "fetching-torrent-file"
    FETCHING_MANIFESTS = "fetching-manifests"
    FETCHING_DATA = "fetching-data"
    DONE = "done"


@dataclass(frozen=True)
class ExpressInterest:
    name: Name


@dataclass(frozen=True)
class Completed:
    pass


AppAction = Union[ExpressInterest, Completed]


class Producer:
    """Serves every object of a bundle by exact full-name match."""

    def __init__(self, bundle: TorrentBundle, torrent_name: str) -> None:
        self.bundle = bundle
        self.served_prefix = torrent_prefix(torrent_name)
        self.lookup: dict[Name, Data] = {d.full_name: d for d in bundle.all_objects()}
        self.requests: Counter[InterestType] = Counter()

    @classmethod
    def from_params(cls, params: TorrentParams) -> Producer:
        return cls(build_torrent(params), params.torrent_name)

    def on_interest(self, i: Interest) -> Data | None:
        kind = classify_name(i.name)
        self.requests[kind] += 1
        data = self.lookup.get(i.name)
        log.debug("producer: %s interest %s -> %s", kind.value, i.name, "hit" if data else "miss")
        return data


@dataclass
class Consumer:
    params: TorrentParams
    echo: Callable[[str], None] | None = None

    first_segment_name: Name | None = None
    phase: Phase | None = None
    pending: set[Name] = field(default_factory=set)
    requested: set[Name] = field(default_factory=set)
    received_segments: list[Data] = field(default_factory=list)
    received_manifests: list[Data] = field(default_factory=list)
    received_packets: list[Data] = field(default_factory=list)
    manifest_queue: list[Name] = field(default_factory=list)
    data_queue: list[Name] = field(default_factory=list)
    completed: bool = False

    def start(self) -> list[AppAction]:
        if self.phase is not None:
            raise AppError("consumer already started")
        # Stand-in for copying the .torrent out of band: regenerate it locally
        # and keep only the name of its first segment.
        self.first_segment_name = build_torrent(self.params).first_segment_name
        self.phase = Phase.FETCHING_TORRENT_FILE
        return [ExpressInterest(self.first_segment_name)]

    def make_interest(self, name: Name, rng: random.Random) -> Interest:
        if name in self.requested:
            raise AlreadyRequested(str(name))
        interest = Interest(name, rng.getrandbits(32))
        self.requested.add(name)
        self.pending.add(name)
        return interest

    def _express_unrequested(self, names) -> list[AppAction]:
        return [ExpressInterest(n) for n in names if n not in self.requested]

    def on_data(self, d: Data) -> list[AppAction]:
        name = d.full_name
        if name not in self.pending:
            expected = sorted(n for n in self.pending if n.wire_name == d.wire_name)
            if expected:
                # Forget the request so a retry would be accounted as fresh.
                self.pending.discard(expected[0])
                self.requested.discard(expected[0])
                raise DigestMismatch(expected[0], name)
            raise UnsolicitedData(str(name))

        kind = classify_name(name)
        if CONTENT_TYPE_OF.get(kind) != d.content_type:
            raise ChainError(f"{name} classified as {kind.value} but carries {d.content_type.name}")
        self.pending.discard(name)

        if d.content_type is ContentType.TORRENT_SEGMENT:
            return self._on_segment(d)
        if d.content_type is ContentType.FILE_MANIFEST:
            return self._on_manifest(d)
        return self._on_packet(d)

    def _on_segment(self, d: Data) -> list[AppAction]:
        segment = decode_torrent_segment(d.payload)
        self.received_segments.append(d)
        for n in segment.manifest_catalog:
            if n not in self.manifest_queue:
                self.manifest_queue.append(n)
        if segment.next_segment_ptr is not None:
            return self._express_unrequested([segment.next_segment_ptr])
        self.phase = Phase.FETCHING_MANIFESTS
        return self._express_unrequested(self.manifest_queue)

    def _on_manifest(self, d: Data) -> list[AppAction]:
        manifest = decode_manifest(d.payload)
        if d.full_name not in self.manifest_queue:
            raise ChainError(f"manifest {d.full_name} is not in any torrent-file catalog")
        if manifest.next_manifest_ptr is not None and manifest.next_manifest_ptr not in self.manifest_queue:
            raise ChainError(f"next-manifest pointer {manifest.next_manifest_ptr} is not catalogued")
        self.received_manifests.append(d)
        for n in manifest.sub_manifest_catalog:
            if n not in self.data_queue:
                self.data_queue.append(n)
        if len(self.received_manifests) < len(self.manifest_queue):
            return []
        self.phase = Phase.FETCHING_DATA
        return self._express_unrequested(self.data_queue)

    def _on_packet(self, d: Data) -> list[AppAction]:
        self.received_packets.append(d)
        if self.echo is not None:
            self.echo(f"{d.wire_name}: {d.payload.decode('utf-8', 'replace')}")
        if len(self.received_packets) < len(self.data_queue):
            return []
        self.phase = Phase.DONE
        self.completed = True
        return [Completed()]
