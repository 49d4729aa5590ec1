"""Discrete-event core: event queue, FIFO point-to-point links, routing, traces.

Nodes process packets in zero simulated time; only links consume time.  A
link serializes packets per direction in FIFO order at ``data_rate`` and then
adds ``latency``.  Events with equal timestamps pop in insertion order, so a
run is fully determined by its topology, parameters and seed.
"""

from __future__ import annotations

import csv
import enum
import heapq
import io
import random
from collections import deque
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, TextIO, Union

from .apps import AppError, Completed, Consumer, DigestMismatch, ExpressInterest, Phase, Producer
from .generator import TorrentParams, build_torrent
from .ndn import (
    APP_FACE,
    DEFAULT_PIT_LIFETIME,
    Data,
    DeliverToApp,
    Drop,
    DropReason,
    Fib,
    Interest,
    MalformedPacket,
    Name,
    NodeState,
    Packet,
    Pit,
    SendData,
    SendInterest,
    decode_packet,
    encode_packet,
    node_on_data,
    node_on_interest,
)
from .torrent import torrent_prefix

DEFAULT_DATA_RATE_BPS = 1_000_000
DEFAULT_LATENCY_S = 0.010


class UnreachableProducer(RuntimeError):
    pass


class Role(enum.Enum):
    PRODUCER = "producer"
    CONSUMER = "consumer"
    ROUTER = "router"


def node_sort_key(node_id: str):
    """Numeric ids sort numerically and before non-numeric ones."""
    return (0, int(node_id), "") if node_id.isdigit() else (1, 0, node_id)


# ---------------------------------------------------------------------------
# Links and topology


@dataclass
class Link:
    a: str
    b: str
    data_rate: float = DEFAULT_DATA_RATE_BPS
    latency: float = DEFAULT_LATENCY_S
    face_a: int = 0
    face_b: int = 0
    busy_until: list[float] = field(default_factory=lambda: [0.0, 0.0])

    def __post_init__(self) -> None:
        if self.data_rate <= 0:
            raise ValueError(f"data rate must be positive, got {self.data_rate}")
        if self.latency < 0:
            raise ValueError(f"latency must be non-negative, got {self.latency}")

    def delay(self, nbytes: int, direction: int, now: float) -> tuple[float, float]:
        """Queue ``nbytes`` in ``direction`` (0 = a->b, 1 = b->a); return (start, arrival)."""
        if nbytes < 1:
            raise ValueError("cannot send an empty packet")
        start = max(now, self.busy_until[direction])
        transmission = nbytes * 8 / self.data_rate
        self.busy_until[direction] = start + transmission
        return start, start + transmission + self.latency


def link_delay(link: Link, nbytes: int, direction: int, now: float) -> tuple[float, float]:
    return link.delay(nbytes, direction, now)


@dataclass
class Topology:
    roles: dict[str, Role] = field(default_factory=dict)
    links: list[Link] = field(default_factory=list)

    def add_node(self, node_id: str, role: Role = Role.ROUTER) -> None:
        self.roles[node_id] = role

    def add_link(self, a: str, b: str, data_rate: float = DEFAULT_DATA_RATE_BPS,
                 latency: float = DEFAULT_LATENCY_S) -> Link:
        for n in (a, b):
            if n not in self.roles:
                raise ValueError(f"link references unknown node {n!r}")
        if a == b:
            raise ValueError(f"self-loop on node {a!r}")
        link = Link(a, b, data_rate, latency)
        link.face_a = self._next_face(a)
        link.face_b = self._next_face(b)
        self.links.append(link)
        return link

    def _next_face(self, node: str) -> int:
        return 1 + sum((l.a == node) + (l.b == node) for l in self.links)

    @classmethod
    def two_node(cls, data_rate: float = DEFAULT_DATA_RATE_BPS, latency: float = DEFAULT_LATENCY_S) -> Topology:
        t = cls()
        t.add_node("0", Role.PRODUCER)
        t.add_node("1", Role.CONSUMER)
        t.add_link("0", "1", data_rate, latency)
        return t

    @property
    def producers(self) -> list[str]:
        return sorted((n for n, r in self.roles.items() if r is Role.PRODUCER), key=node_sort_key)

    @property
    def consumers(self) -> list[str]:
        return sorted((n for n, r in self.roles.items() if r is Role.CONSUMER), key=node_sort_key)

    def neighbors(self, node: str) -> list[tuple[int, str]]:
        """(local face, peer node) pairs of ``node``."""
        out = []
        for l in self.links:
            if l.a == node:
                out.append((l.face_a, l.b))
            elif l.b == node:
                out.append((l.face_b, l.a))
        return out

    def ports(self) -> dict[tuple[str, int], tuple[Link, int]]:
        """(node, face) -> (link, direction of transmission from that face)."""
        ports = {}
        for l in self.links:
            ports[(l.a, l.face_a)] = (l, 0)
            ports[(l.b, l.face_b)] = (l, 1)
        return ports


def compute_routes(topology: Topology, prefix: Name) -> dict[str, Fib]:
    """Shortest hop-count routes toward the nearest producer, ties to the lowest next-hop id."""
    dist: dict[str, int] = {}
    queue = deque()
    for p in topology.producers:
        dist[p] = 0
        queue.append(p)
    while queue:
        node = queue.popleft()
        for _, peer in topology.neighbors(node):
            if peer not in dist:
                dist[peer] = dist[node] + 1
                queue.append(peer)

    unreachable = [c for c in topology.consumers if c not in dist]
    if unreachable or not topology.producers:
        raise UnreachableProducer(f"no path to a producer from {unreachable or topology.consumers}")

    fibs = {}
    for node in topology.roles:
        fib = Fib()
        if node in dist:
            if dist[node] == 0:
                fib.add_route(prefix, APP_FACE)
            else:
                face, _ = min(
                    ((f, peer) for f, peer in topology.neighbors(node) if dist.get(peer) == dist[node] - 1),
                    key=lambda fp: (node_sort_key(fp[1]), fp[0]),
                )
                fib.add_route(prefix, face)
        fibs[node] = fib
    return fibs


# ---------------------------------------------------------------------------
# Events and traces


@dataclass(frozen=True)
class PacketArrival:
    node: str
    face: int
    wire: bytes


@dataclass(frozen=True)
class AppTimer:
    node: str


@dataclass(frozen=True, order=True)
class Event:
    time: float
    sequence: int
    kind: Union[PacketArrival, AppTimer] = field(compare=False)


@dataclass(frozen=True)
class TraceRecord:
    time: float
    node: str
    dir: str
    kind: str
    name: str
    bytes: int


TRACE_HEADER = ("time", "node", "dir", "kind", "name", "bytes")


def write_trace(records: Iterable[TraceRecord], out: TextIO) -> None:
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(TRACE_HEADER)
    for r in records:
        writer.writerow((f"{r.time:.9f}", r.node, r.dir, r.kind, r.name, r.bytes))


def trace_to_csv(records: Iterable[TraceRecord]) -> str:
    buf = io.StringIO()
    write_trace(records, buf)
    return buf.getvalue()


class Outcome(enum.Enum):
    COMPLETED = "completed"
    IDLE = "idle"
    TIMED_OUT = "timed_out"
    ABORTED = "aborted"


@dataclass
class RunResult:
    outcome: Outcome
    completion_time: float | None
    end_time: float
    error: str | None = None
    pending: dict[str, list[str]] = field(default_factory=dict)


Tamper = Callable[[str, Packet, bytes], bytes]


def flip_payload_byte(wire: bytes, index: int = 0) -> bytes:
    """Re-encode a Data packet with one payload bit flipped."""
    d = decode_packet(wire)
    if not isinstance(d, Data):
        return wire
    payload = bytearray(d.payload)
    payload[index % len(payload)] ^= 0x01
    return encode_packet(Data(d.wire_name, d.content_type, bytes(payload)))


def corrupt_nth_data(n: int, index: int = 0) -> Tamper:
    """Tamper hook that corrupts the ``n``-th Data transmission (0-based) of the run."""
    seen = 0

    def tamper(node: str, packet: Packet, wire: bytes) -> bytes:
        nonlocal seen
        if not isinstance(packet, Data):
            return wire
        seen += 1
        return flip_payload_byte(wire, index) if seen - 1 == n else wire

    return tamper


# ---------------------------------------------------------------------------
# Simulation


class Simulation:
    def __init__(
        self,
        topology: Topology,
        params: TorrentParams,
        seed: int = 0,
        pit_lifetime: float = DEFAULT_PIT_LIFETIME,
        tamper: Tamper | None = None,
        echo: Callable[[str], None] | None = None,
        install_routes: bool = True,
    ) -> None:
        self.topology = topology
        self.params = params
        self.seed = seed
        self.tamper = tamper
        self.echo = echo
        self.rng = random.Random(seed)
        self.now = 0.0
        self.trace: list[TraceRecord] = []
        self.drops: list[tuple[float, str, Drop]] = []
        self.phase_history: dict[str, list[tuple[Phase, float]]] = {}
        self.completion_times: dict[str, float] = {}
        self._queue: list[Event] = []
        self._seq = 0
        self._error: AppError | None = None

        self.nodes = {n: NodeState(n, pit=Pit(pit_lifetime)) for n in topology.roles}
        self._ports = topology.ports()
        self.prefix = torrent_prefix(params.torrent_name)
        if install_routes:
            for n, fib in compute_routes(topology, self.prefix).items():
                self.nodes[n].fib = fib

        self.producers: dict[str, Producer] = {}
        if topology.producers:
            bundle = build_torrent(params)
            for n in topology.producers:
                self.producers[n] = Producer(bundle, params.torrent_name)
                self.nodes[n].app_prefixes.append(self.producers[n].served_prefix)
        self.consumers: dict[str, Consumer] = {}
        for n in topology.consumers:
            self.attach_consumer(n, 0.0)

    def attach_consumer(self, node: str, start_time: float | None = None) -> Consumer:
        """Start a fresh consumer app on ``node`` at ``start_time`` (default: now)."""
        consumer = Consumer(self.params, echo=self.echo)
        self.consumers[node] = consumer
        self.phase_history[node] = []
        self.completion_times.pop(node, None)
        self.schedule(self.now if start_time is None else start_time, AppTimer(node))
        return consumer

    def schedule(self, time: float, kind: Union[PacketArrival, AppTimer]) -> Event:
        event = Event(time, self._seq, kind)
        self._seq += 1
        heapq.heappush(self._queue, event)
        return event

    @property
    def queue_empty(self) -> bool:
        return not self._queue

    def run(self, max_time: float = 60.0) -> RunResult:
        if max_time <= 0:
            raise ValueError("max_time must be positive")
        timed_out = False
        while self._queue and self._error is None:
            if self._queue[0].time > max_time:
                timed_out = True
                break
            event = heapq.heappop(self._queue)
            self.now = event.time
            if isinstance(event.kind, AppTimer):
                self._start_consumer(event.kind.node)
            else:
                self._on_arrival(event.kind)

        if self._error is not None:
            outcome = Outcome.ABORTED
        elif self.consumers and all(c.completed for c in self.consumers.values()):
            outcome = Outcome.COMPLETED
        elif timed_out:
            outcome = Outcome.TIMED_OUT
        else:
            outcome = Outcome.IDLE
        return RunResult(
            outcome=outcome,
            completion_time=max(self.completion_times.values()) if outcome is Outcome.COMPLETED else None,
            end_time=self.now,
            error=f"{type(self._error).__name__}: {self._error}" if self._error else None,
            pending={n: sorted(str(p) for p in c.pending) for n, c in self.consumers.items() if c.pending},
        )

    # -- dispatch --------------------------------------------------------

    def _on_arrival(self, ev: PacketArrival) -> None:
        node = self.nodes[ev.node]
        try:
            packet = decode_packet(ev.wire)
        except MalformedPacket:
            self.trace.append(TraceRecord(self.now, ev.node, "recv", "malformed", "", len(ev.wire)))
            return
        if isinstance(packet, Interest):
            self._record(ev.node, "recv", packet, len(ev.wire))
            self._handle(ev.node, node_on_interest(node, packet, ev.face, self.now))
        else:
            self._record(ev.node, "recv", packet, len(ev.wire))
            self._handle(ev.node, node_on_data(node, packet, ev.face, self.now))

    def _handle(self, node_id: str, actions) -> None:
        node = self.nodes[node_id]
        for action in actions:
            if isinstance(action, (SendInterest, SendData)):
                self._transmit(node_id, action.face, action.interest if isinstance(action, SendInterest) else action.data)
            elif isinstance(action, DeliverToApp):
                if isinstance(action.packet, Interest):
                    producer = self.producers.get(node_id)
                    data = producer.on_interest(action.packet) if producer else None
                    if data is not None:
                        self._handle(node_id, node_on_data(node, data, APP_FACE, self.now))
                else:
                    self._deliver_data(node_id, action.packet)
            elif isinstance(action, Drop):
                self.drops.append((self.now, node_id, action))
                if action.reason is DropReason.DIGEST_MISMATCH:
                    self._on_digest_mismatch(node_id, action)
            if self._error is not None:
                return

    def _on_digest_mismatch(self, node_id: str, drop: Drop) -> None:
        consumer = self.consumers.get(node_id)
        if consumer is not None:
            # The consumer re-checks the digest itself and raises.
            self._deliver_data(node_id, drop.packet)
        if self._error is None:
            self._error = DigestMismatch(drop.expected[0], drop.packet.full_name)

    def _deliver_data(self, node_id: str, d: Data) -> None:
        consumer = self.consumers.get(node_id)
        if consumer is None:
            return
        self._app_call(node_id, lambda: consumer.on_data(d))

    def _start_consumer(self, node_id: str) -> None:
        self._app_call(node_id, self.consumers[node_id].start)

    def _app_call(self, node_id: str, call) -> None:
        consumer = self.consumers[node_id]
        before = consumer.phase
        try:
            actions = call()
        except (AppError, ValueError) as exc:
            self._error = exc if isinstance(exc, AppError) else AppError(str(exc))
            return
        if consumer.phase is not before:
            self.phase_history[node_id].append((consumer.phase, self.now))
        node = self.nodes[node_id]
        for action in actions:
            if isinstance(action, ExpressInterest):
                try:
                    interest = consumer.make_interest(action.name, self.rng)
                except AppError as exc:
                    self._error = exc
                    return
                self._handle(node_id, node_on_interest(node, interest, APP_FACE, self.now))
            elif isinstance(action, Completed):
                self.completion_times[node_id] = self.now
            if self._error is not None:
                return

    def _transmit(self, node_id: str, face: int, packet: Packet) -> None:
        link, direction = self._ports[(node_id, face)]
        wire = packet.wire
        if self.tamper is not None:
            wire = self.tamper(node_id, packet, wire)
        _, arrival = link.delay(len(wire), direction, self.now)
        self._record(node_id, "send", packet, len(wire))
        peer, peer_face = (link.b, link.face_b) if direction == 0 else (link.a, link.face_a)
        self.schedule(arrival, PacketArrival(peer, peer_face, wire))

    def _record(self, node_id: str, direction: str, packet: Packet, nbytes: int) -> None:
        if isinstance(packet, Interest):
            kind, name = "interest", packet.name
        else:
            kind, name = "data", packet.full_name
        self.trace.append(TraceRecord(self.now, node_id, direction, kind, str(name), nbytes))

    # -- inspection ------------------------------------------------------

    def snapshot(self, node_id: str) -> dict:
        node = self.nodes[node_id]
        live = [e for e in node.pit.entries() if e.expiry >= self.now]
        return {
            "node": node_id,
            "time": self.now,
            "cs": [str(n) for n in node.cs.names()],
            "pit": [
                {"name": str(e.name), "faces": sorted(e.faces), "nonces": sorted(e.nonces), "expiry": e.expiry}
                for e in live
            ],
            "faces": {str(f): asdict(c) for f, c in sorted(node.faces.items())},
            "counters": asdict(node.totals()),
        }

    def trace_csv(self) -> str:
        return trace_to_csv(self.trace)
