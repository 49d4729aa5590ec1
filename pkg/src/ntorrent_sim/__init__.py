"""nTorrent file distribution over a simulated NDN forwarding plane."""

from .apps import Consumer, DigestMismatch, Phase, Producer
from .engine import Outcome, Simulation, Topology, compute_routes, link_delay
from .generator import TorrentBundle, TorrentParams, build_torrent
from .ndn import (
    ContentType,
    Data,
    Interest,
    MalformedPacket,
    Name,
    compute_implicit_digest,
    decode_packet,
    encode_packet,
)
from .scenario import ScenarioConfig, parse_config, run_scenario, simulate
from .torrent import (
    FileManifest,
    InterestType,
    MalformedObject,
    TorrentFileSegment,
    classify_name,
)

__all__ = [
    "Consumer", "DigestMismatch", "Phase", "Producer",
    "Outcome", "Simulation", "Topology", "compute_routes", "link_delay",
    "TorrentBundle", "TorrentParams", "build_torrent",
    "ContentType", "Data", "Interest", "MalformedPacket", "Name",
    "compute_implicit_digest", "decode_packet", "encode_packet",
    "ScenarioConfig", "parse_config", "run_scenario", "simulate",
    "FileManifest", "InterestType", "MalformedObject", "TorrentFileSegment", "classify_name",
]

__version__ = "0.1.0"
