"""NDN packet model, wire codec, implicit digests and forwarding tables.

Names are tuples of byte components.  A *full* name ends in an implicit
digest component ``sha256digest=<64 lowercase hex>``; a *wire* name does not.
Data packets carry only their wire name, and the digest is computed over the
encoded packet, so the digest never appears inside the bytes it names.
"""

from __future__ import annotations

import enum
import hashlib
import re
from collections import OrderedDict
from dataclasses import dataclass, field
from functools import cached_property
from typing import Union

from . import tlv

# Packet TLV type codes
T_INTEREST = 0x05
T_DATA = 0x06
T_NAME = 0x01
T_COMPONENT = 0x02
T_NONCE = 0x0A
T_CONTENT_TYPE = 0x14
T_PAYLOAD = 0x15

DIGEST_TAG = b"sha256digest="
DIGEST_SIZE = 32
_DIGEST_RE = re.compile(rb"sha256digest=[0-9a-f]{64}\Z")

# Face 0 is the node-local application; link faces are numbered from 1.
APP_FACE = 0
DEFAULT_PIT_LIFETIME = 4.0


class MalformedPacket(ValueError):
    """Wire bytes that are not the image of ``encode_packet``."""


def compute_implicit_digest(wire: bytes) -> bytes:
    return hashlib.sha256(wire).digest()


def digest_component(digest: bytes) -> bytes:
    if len(digest) != DIGEST_SIZE:
        raise ValueError(f"digest must be {DIGEST_SIZE} bytes, got {len(digest)}")
    return DIGEST_TAG + digest.hex().encode("ascii")


def is_digest_component(component: bytes) -> bool:
    return _DIGEST_RE.match(component) is not None


@dataclass(frozen=True, order=True)
class Name:
    """Ordered, nonempty sequence of nonempty byte components."""

    components: tuple[bytes, ...]

    def __post_init__(self) -> None:
        comps = tuple(
            c.encode("utf-8") if isinstance(c, str) else bytes(c) for c in self.components
        )
        if not comps:
            raise ValueError("a name needs at least one component")
        if any(len(c) == 0 for c in comps):
            raise ValueError("name components must be nonempty")
        object.__setattr__(self, "components", comps)

    @classmethod
    def parse(cls, uri: str) -> Name:
        """Build from ``/a/b/c`` notation (no percent-escaping)."""
        return cls(tuple(p for p in uri.split("/") if p))

    @classmethod
    def of(cls, *parts: str | bytes | int) -> Name:
        return cls(tuple(str(p) if isinstance(p, int) else p for p in parts))

    def __str__(self) -> str:
        return "/" + "/".join(c.decode("utf-8", "backslashreplace") for c in self.components)

    def __repr__(self) -> str:
        return f"Name({str(self)!r})"

    def __len__(self) -> int:
        return len(self.components)

    def __getitem__(self, index: int) -> bytes:
        return self.components[index]

    def append(self, *parts: str | bytes | int) -> Name:
        return Name(self.components + Name.of(*parts).components)

    def with_digest(self, digest: bytes) -> Name:
        return Name(self.components + (digest_component(digest),))

    @property
    def is_full(self) -> bool:
        return is_digest_component(self.components[-1])

    @property
    def digest(self) -> bytes | None:
        if not self.is_full:
            return None
        return bytes.fromhex(self.components[-1][len(DIGEST_TAG):].decode("ascii"))

    @property
    def wire_name(self) -> Name:
        """The name with its digest component stripped (identity for wire names)."""
        return Name(self.components[:-1]) if self.is_full else self

    def is_prefix_of(self, other: Name) -> bool:
        n = len(self.components)
        return n <= len(other.components) and other.components[:n] == self.components


class ContentType(enum.IntEnum):
    TORRENT_SEGMENT = 0
    FILE_MANIFEST = 1
    DATA_PACKET = 2


@dataclass(frozen=True)
class Interest:
    name: Name
    nonce: int

    def __post_init__(self) -> None:
        if not self.name.is_full:
            raise ValueError(f"interest name must be a full name: {self.name}")
        if not 0 <= self.nonce < 2**32:
            raise ValueError(f"nonce out of 32-bit range: {self.nonce}")

    @cached_property
    def wire(self) -> bytes:
        return encode_packet(self)


@dataclass(frozen=True)
class Data:
    wire_name: Name
    content_type: ContentType
    payload: bytes

    def __post_init__(self) -> None:
        if self.wire_name.is_full:
            raise ValueError(f"data carries a wire name, got full name {self.wire_name}")
        object.__setattr__(self, "content_type", ContentType(self.content_type))
        object.__setattr__(self, "payload", bytes(self.payload))

    @cached_property
    def wire(self) -> bytes:
        return encode_packet(self)

    @cached_property
    def full_name(self) -> Name:
        return self.wire_name.with_digest(compute_implicit_digest(self.wire))


Packet = Union[Interest, Data]


# ---------------------------------------------------------------------------
# Wire codec


def encode_name(name: Name) -> bytes:
    return tlv.block(T_NAME, b"".join(tlv.block(T_COMPONENT, c) for c in name.components))


def decode_name(value: bytes | memoryview) -> Name:
    """Decode the *value* of a Name block."""
    comps = []
    for tlv_type, comp in tlv.iter_blocks(value):
        if tlv_type != T_COMPONENT:
            raise tlv.TlvError(f"unexpected type 0x{tlv_type:02x} inside Name")
        comps.append(bytes(comp))
    try:
        return Name(tuple(comps))
    except ValueError as exc:
        raise tlv.TlvError(str(exc)) from None


def encode_packet(p: Packet) -> bytes:
    if isinstance(p, Interest):
        body = encode_name(p.name) + tlv.block(T_NONCE, p.nonce.to_bytes(4, "big"))
        return tlv.block(T_INTEREST, body)
    if isinstance(p, Data):
        body = (
            encode_name(p.wire_name)
            + tlv.block(T_CONTENT_TYPE, bytes([int(p.content_type)]))
            + tlv.block(T_PAYLOAD, p.payload)
        )
        return tlv.block(T_DATA, body)
    raise TypeError(f"not a packet: {type(p).__name__}")


def _fields(body: memoryview, layout: tuple[int, ...]) -> list[memoryview]:
    blocks = list(tlv.iter_blocks(body))
    types = tuple(t for t, _ in blocks)
    if types != layout:
        raise tlv.TlvError(
            "field layout " + ",".join(f"0x{t:02x}" for t in types)
            + " != " + ",".join(f"0x{t:02x}" for t in layout)
        )
    return [v for _, v in blocks]


def decode_packet(b: bytes) -> Packet:
    try:
        tlv_type, body, end = tlv.read_block(b)
        if end != len(b):
            raise tlv.TlvError(f"{len(b) - end} trailing bytes")
        if tlv_type == T_INTEREST:
            name_v, nonce_v = _fields(body, (T_NAME, T_NONCE))
            name = decode_name(name_v)
            if not name.is_full:
                raise tlv.TlvError("interest name lacks a digest component")
            return Interest(name, tlv.uint_be(nonce_v, 4))
        if tlv_type == T_DATA:
            name_v, ctype_v, payload_v = _fields(body, (T_NAME, T_CONTENT_TYPE, T_PAYLOAD))
            name = decode_name(name_v)
            if name.is_full:
                raise tlv.TlvError("data name must not carry a digest component")
            code = tlv.uint_be(ctype_v, 1)
            if code not in ContentType._value2member_map_:
                raise tlv.TlvError(f"unknown content type {code}")
            return Data(name, ContentType(code), bytes(payload_v))
        raise tlv.TlvError(f"unknown packet type 0x{tlv_type:02x}")
    except tlv.TlvError as exc:
        raise MalformedPacket(str(exc)) from None


# ---------------------------------------------------------------------------
# Content Store, PIT, FIB


class ContentStore:
    """Unbounded exact-match cache keyed by full name, in insertion order."""

    def __init__(self) -> None:
        self._entries: OrderedDict[Name, Data] = OrderedDict()

    def insert(self, d: Data) -> None:
        self._entries.setdefault(d.full_name, d)

    def lookup(self, name: Name) -> Data | None:
        return self._entries.get(name)

    def names(self) -> list[Name]:
        return list(self._entries)

    def items(self):
        return self._entries.items()

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, name: object) -> bool:
        return name in self._entries


class PitResult(enum.Enum):
    NEW_ENTRY = "new"
    AGGREGATED = "aggregated"
    DUPLICATE_NONCE = "duplicate-nonce"


@dataclass
class PitEntry:
    name: Name
    faces: set[int]
    nonces: set[int]
    expiry: float


class Pit:
    def __init__(self, lifetime: float = DEFAULT_PIT_LIFETIME) -> None:
        self.lifetime = lifetime
        self._entries: dict[Name, PitEntry] = {}

    def _live(self, name: Name, now: float | None) -> PitEntry | None:
        entry = self._entries.get(name)
        if entry is not None and now is not None and now > entry.expiry:
            del self._entries[name]
            return None
        return entry

    def on_interest(self, i: Interest, face: int, now: float) -> PitResult:
        entry = self._live(i.name, now)
        if entry is None:
            self._entries[i.name] = PitEntry(i.name, {face}, {i.nonce}, now + self.lifetime)
            return PitResult.NEW_ENTRY
        if i.nonce in entry.nonces:
            return PitResult.DUPLICATE_NONCE
        entry.faces.add(face)
        entry.nonces.add(i.nonce)
        return PitResult.AGGREGATED

    def on_data(self, d: Data, now: float | None = None) -> set[int]:
        """Consume the entry matching ``d`` and return its downstream faces."""
        entry = self._live(d.full_name, now)
        if entry is None:
            return set()
        del self._entries[d.full_name]
        return entry.faces

    def pending_for_wire_name(self, wire_name: Name, now: float | None = None) -> list[Name]:
        """Live entries sharing ``wire_name``; used to tell corrupted data from unsolicited."""
        return [
            n for n in list(self._entries)
            if n.wire_name == wire_name and self._live(n, now) is not None
        ]

    def purge(self, now: float) -> None:
        for name in list(self._entries):
            self._live(name, now)

    def entries(self) -> list[PitEntry]:
        return list(self._entries.values())

    def get(self, name: Name) -> PitEntry | None:
        return self._entries.get(name)

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, name: object) -> bool:
        return name in self._entries


class Fib:
    def __init__(self) -> None:
        self._routes: dict[tuple[bytes, ...], list[int]] = {}

    def add_route(self, prefix: Name, face: int) -> None:
        faces = self._routes.setdefault(prefix.components, [])
        if face not in faces:
            faces.append(face)

    def routes(self) -> dict[Name, list[int]]:
        return {Name(k): list(v) for k, v in self._routes.items()}

    def lpm(self, name: Name) -> int | None:
        comps = name.components
        for n in range(len(comps), 0, -1):
            faces = self._routes.get(comps[:n])
            if faces:
                return faces[0]
        return None

    def __len__(self) -> int:
        return len(self._routes)


# ---------------------------------------------------------------------------
# Forwarder


@dataclass
class FaceCounters:
    interests_in: int = 0
    interests_out: int = 0
    data_in: int = 0
    data_out: int = 0
    bytes_in: int = 0
    bytes_out: int = 0

    def __iadd__(self, other: FaceCounters) -> FaceCounters:
        for f in self.__dataclass_fields__:
            setattr(self, f, getattr(self, f) + getattr(other, f))
        return self


class DropReason(enum.Enum):
    NO_ROUTE = "no-route"
    DUPLICATE_NONCE = "duplicate-nonce"
    UNSOLICITED = "unsolicited"
    DIGEST_MISMATCH = "digest-mismatch"


@dataclass(frozen=True)
class SendInterest:
    interest: Interest
    face: int


@dataclass(frozen=True)
class SendData:
    data: Data
    face: int


@dataclass(frozen=True)
class DeliverToApp:
    packet: Packet


@dataclass(frozen=True)
class Drop:
    packet: Packet
    reason: DropReason
    # For digest mismatches: the pending full names that share the wire name.
    expected: tuple[Name, ...] = ()


Action = Union[SendInterest, SendData, DeliverToApp, Drop]


@dataclass
class NodeState:
    """Forwarding state of one node: CS, PIT, FIB, app registrations, face counters."""

    node_id: str
    cs: ContentStore = field(default_factory=ContentStore)
    pit: Pit = field(default_factory=Pit)
    fib: Fib = field(default_factory=Fib)
    app_prefixes: list[Name] = field(default_factory=list)
    faces: dict[int, FaceCounters] = field(default_factory=dict)

    def counters(self, face: int) -> FaceCounters:
        return self.faces.setdefault(face, FaceCounters())

    def totals(self) -> FaceCounters:
        total = FaceCounters()
        for face, c in sorted(self.faces.items()):
            if face != APP_FACE:
                total += c
        return total

    def serves(self, name: Name) -> bool:
        return any(p.is_prefix_of(name) for p in self.app_prefixes)

    def count_out(self, action: Action) -> None:
        if isinstance(action, SendInterest) and action.face != APP_FACE:
            c = self.counters(action.face)
            c.interests_out += 1
            c.bytes_out += len(action.interest.wire)
        elif isinstance(action, SendData) and action.face != APP_FACE:
            c = self.counters(action.face)
            c.data_out += 1
            c.bytes_out += len(action.data.wire)


def node_on_interest(node: NodeState, i: Interest, in_face: int, now: float) -> list[Action]:
    if in_face != APP_FACE:
        c = node.counters(in_face)
        c.interests_in += 1
        c.bytes_in += len(i.wire)

    cached = node.cs.lookup(i.name)
    if cached is not None:
        action: Action = DeliverToApp(cached) if in_face == APP_FACE else SendData(cached, in_face)
        node.count_out(action)
        return [action]

    result = node.pit.on_interest(i, in_face, now)
    if result is PitResult.DUPLICATE_NONCE:
        return [Drop(i, DropReason.DUPLICATE_NONCE)]
    if result is PitResult.AGGREGATED:
        return []

    if in_face != APP_FACE and node.serves(i.name):
        return [DeliverToApp(i)]
    out_face = node.fib.lpm(i.name)
    if out_face is None or out_face == in_face:
        return [Drop(i, DropReason.NO_ROUTE)]
    action = SendInterest(i, out_face)
    node.count_out(action)
    return [action]


def node_on_data(node: NodeState, d: Data, in_face: int, now: float | None = None) -> list[Action]:
    if in_face != APP_FACE:
        c = node.counters(in_face)
        c.data_in += 1
        c.bytes_in += len(d.wire)

    faces = node.pit.on_data(d, now)
    if not faces:
        expected = node.pit.pending_for_wire_name(d.wire_name, now)
        if expected:
            return [Drop(d, DropReason.DIGEST_MISMATCH, tuple(expected))]
        return [Drop(d, DropReason.UNSOLICITED)]

    node.cs.insert(d)
    actions: list[Action] = []
    for face in sorted(faces - {APP_FACE}):
        action = SendData(d, face)
        node.count_out(action)
        actions.append(action)
    if APP_FACE in faces:
        actions.append(DeliverToApp(d))
    return actions
