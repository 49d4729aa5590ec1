"""The ``ntorrent-simple`` scenario: configuration, topology files, run, report."""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Callable, Sequence

from .engine import (
    DEFAULT_DATA_RATE_BPS,
    Outcome,
    Role,
    RunResult,
    Simulation,
    Tamper,
    Topology,
    node_sort_key,
)
from .generator import TorrentParams
from .ndn import Name
from .torrent import InterestType, classify_name

TWO_NODE = "two-node"

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INCOMPLETE = 3
EXIT_IO = 4


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ScenarioConfig:
    num_files: int = 2
    file_size: int = 1024
    packet_size: int = 256
    names_per_manifest: int = 3
    names_per_segment: int = 3
    torrent_name: str = "demo"
    data_rate_bps: float = float(DEFAULT_DATA_RATE_BPS)
    latency_ms: float = 10.0
    topology: str = TWO_NODE
    seed: int = 0
    max_sim_time_s: float = 60.0
    trace_out: str | None = None
    report_out: str | None = None
    print_payloads: bool = False

    def __post_init__(self) -> None:
        for f in ("num_files", "file_size", "packet_size", "names_per_manifest",
                  "names_per_segment", "data_rate_bps", "max_sim_time_s"):
            if getattr(self, f) <= 0:
                raise ConfigError(f"{f} must be positive, got {getattr(self, f)}")
        if self.latency_ms < 0:
            raise ConfigError(f"latency_ms must be non-negative, got {self.latency_ms}")
        if not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed}")

    @property
    def torrent_params(self) -> TorrentParams:
        return TorrentParams(
            torrent_name=self.torrent_name,
            num_files=self.num_files,
            file_size=self.file_size,
            packet_size=self.packet_size,
            names_per_manifest=self.names_per_manifest,
            names_per_segment=self.names_per_segment,
        )


# ---------------------------------------------------------------------------
# Command line


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise ConfigError(message)


def _positive(kind):
    def convert(text: str):
        try:
            value = kind(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"invalid {kind.__name__} value: {text!r}") from None
        if value <= 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return value
    return convert


def _non_negative_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid float value: {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be non-negative, got {text}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid int value: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    d = ScenarioConfig()
    p = _Parser(
        prog="ntorrent-simple",
        description="Simulate nTorrent file distribution over NDN (producer -> consumer).",
        epilog="Defaults are artifact choices; the original scenario publishes none.",
    )
    p.add_argument("--num-files", type=_positive(int), default=d.num_files, help="pretend files in the torrent (default %(default)s)")
    p.add_argument("--file-size", type=_positive(int), default=d.file_size, help="bytes per file (default %(default)s)")
    p.add_argument("--packet-size", type=_positive(int), default=d.packet_size, help="payload bytes per data packet (default %(default)s)")
    p.add_argument("--names-per-segment", type=_positive(int), default=d.names_per_segment, help="manifest names per torrent-file segment (default %(default)s)")
    p.add_argument("--names-per-manifest", type=_positive(int), default=d.names_per_manifest, help="packet names per file manifest (default %(default)s)")
    p.add_argument("--data-rate-bps", type=_positive(float), default=d.data_rate_bps, help="link data rate in bit/s (default %(default)s)")
    p.add_argument("--latency-ms", type=_non_negative_float, default=d.latency_ms, help="link propagation delay in ms (default %(default)s)")
    p.add_argument("--topology", default=d.topology, help=f"'{TWO_NODE}' or a topology file path (default %(default)s)")
    p.add_argument("--seed", type=_seed, default=d.seed, help="nonce generator seed (default %(default)s)")
    p.add_argument("--max-sim-time", type=_positive(float), default=d.max_sim_time_s, help="simulated-time budget in seconds (default %(default)s)")
    p.add_argument("--trace-out", default=None, help="write the CSV event trace here")
    p.add_argument("--report-out", default=None, help="write the JSON report here instead of stdout")
    p.add_argument("--print-payloads", action="store_true", help="echo received data payloads to stderr")
    return p


def parse_config(argv: Sequence[str] | None = None) -> ScenarioConfig:
    ns = build_parser().parse_args(argv)
    return ScenarioConfig(
        num_files=ns.num_files,
        file_size=ns.file_size,
        packet_size=ns.packet_size,
        names_per_manifest=ns.names_per_manifest,
        names_per_segment=ns.names_per_segment,
        data_rate_bps=ns.data_rate_bps,
        latency_ms=ns.latency_ms,
        topology=ns.topology,
        seed=ns.seed,
        max_sim_time_s=ns.max_sim_time,
        trace_out=ns.trace_out,
        report_out=ns.report_out,
        print_payloads=ns.print_payloads,
    )


# ---------------------------------------------------------------------------
# Topology files


def parse_topology(text: str, default_rate: float = DEFAULT_DATA_RATE_BPS,
                   default_latency_ms: float = 10.0) -> Topology:
    """Parse the line format ``node <id>``, ``link <a> <b> [<bps> <latency_ms>]``,
    ``producer <id>``, ``consumer <id>``; ``#`` starts a comment."""
    topo = Topology()
    links: list[tuple[int, list[str]]] = []
    roles: dict[str, Role] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        words = raw.split("#", 1)[0].split()
        if not words:
            continue
        keyword, args = words[0], words[1:]
        if keyword == "node" and len(args) == 1:
            topo.add_node(args[0])
        elif keyword in ("producer", "consumer") and len(args) == 1:
            roles[args[0]] = Role(keyword)
        elif keyword == "link" and len(args) in (2, 4):
            links.append((lineno, args))
        else:
            raise ConfigError(f"topology line {lineno}: cannot parse {raw.strip()!r}")

    for node, role in roles.items():
        if node not in topo.roles:
            topo.add_node(node)
        topo.roles[node] = role
    for lineno, args in links:
        try:
            rate = float(args[2]) if len(args) == 4 else default_rate
            latency_ms = float(args[3]) if len(args) == 4 else default_latency_ms
            topo.add_link(args[0], args[1], rate, latency_ms / 1000.0)
        except ValueError as exc:
            raise ConfigError(f"topology line {lineno}: {exc}") from None

    if not topo.producers:
        raise ConfigError("topology declares no producer")
    if not topo.consumers:
        raise ConfigError("topology declares no consumer")
    return topo


def load_topology(cfg: ScenarioConfig) -> Topology:
    if cfg.topology == TWO_NODE:
        return Topology.two_node(cfg.data_rate_bps, cfg.latency_ms / 1000.0)
    try:
        text = Path(cfg.topology).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"--topology: cannot read {cfg.topology}: {exc}") from None
    return parse_topology(text, cfg.data_rate_bps, cfg.latency_ms)


# ---------------------------------------------------------------------------
# Run and report


@dataclass
class RunReport:
    outcome: str
    completion_time_s: float | None
    seed: int
    params: dict
    nodes: list[dict]
    consumer: dict
    error: str | None = None

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, doc: dict) -> RunReport:
        return cls(**{f.name: doc.get(f.name) for f in fields(cls)})


@dataclass
class ScenarioRun:
    """Everything a run produces: the report plus the live simulation for inspection."""

    report: RunReport
    result: RunResult
    simulation: Simulation
    trace_csv: str = field(repr=False, default="")


def build_report(cfg: ScenarioConfig, sim: Simulation, result: RunResult) -> RunReport:
    nodes = []
    for node_id in sorted(sim.nodes, key=node_sort_key):
        state = sim.nodes[node_id]
        snap = sim.snapshot(node_id)
        nodes.append({
            "id": node_id,
            "role": sim.topology.roles[node_id].value,
            "counters": snap["counters"],
            "cs_size": len(state.cs),
            "pit_size": len(snap["pit"]),
        })
    consumer_doc: dict = {"node": None, "phases": [], "segments": 0, "manifests": 0, "packets": 0, "cs_size": 0}
    if sim.consumers:
        node_id = min(sim.consumers, key=node_sort_key)
        c = sim.consumers[node_id]
        consumer_doc = {
            "node": node_id,
            "phases": [{"phase": p.value, "enter_time_s": t} for p, t in sim.phase_history[node_id]],
            "segments": len(c.received_segments),
            "manifests": len(c.received_manifests),
            "packets": len(c.received_packets),
            "cs_size": len(sim.nodes[node_id].cs),
        }
    params = asdict(cfg.torrent_params)
    params.update(data_rate_bps=cfg.data_rate_bps, latency_ms=cfg.latency_ms,
                  topology=cfg.topology, max_sim_time_s=cfg.max_sim_time_s)
    return RunReport(
        outcome=result.outcome.value,
        completion_time_s=result.completion_time,
        seed=cfg.seed,
        params=params,
        nodes=nodes,
        consumer=consumer_doc,
        error=result.error,
    )


def simulate(cfg: ScenarioConfig, tamper: Tamper | None = None,
             echo: Callable[[str], None] | None = None) -> ScenarioRun:
    """Build and run the scenario without touching the filesystem."""
    topology = load_topology(cfg)
    sim = Simulation(topology, cfg.torrent_params, seed=cfg.seed, tamper=tamper, echo=echo)
    result = sim.run(cfg.max_sim_time_s)
    return ScenarioRun(build_report(cfg, sim, result), result, sim, sim.trace_csv())


def emit_report(report: RunReport, path: str | None = None) -> str:
    text = json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")
    return text


def run_scenario(cfg: ScenarioConfig, tamper: Tamper | None = None) -> RunReport:
    """Run, then write trace and report files when the config names them."""
    echo = (lambda line: print(line, file=sys.stderr)) if cfg.print_payloads else None
    run = simulate(cfg, tamper=tamper, echo=echo)
    if cfg.trace_out is not None:
        Path(cfg.trace_out).write_text(run.trace_csv, encoding="utf-8")
    if cfg.report_out is not None:
        emit_report(run.report, cfg.report_out)
    return run.report


def count_consumer_data_recv(trace_csv: str, consumer: str) -> dict[InterestType, int]:
    """Tally data arrivals at ``consumer`` by object type, from a CSV trace."""
    counts = {t: 0 for t in InterestType}
    for row in csv.DictReader(io.StringIO(trace_csv)):
        if row["node"] == consumer and row["dir"] == "recv" and row["kind"] == "data":
            counts[classify_name(Name.parse(row["name"]))] += 1
    return counts


def exit_code_for(outcome: str) -> int:
    return EXIT_OK if outcome == Outcome.COMPLETED.value else EXIT_INCOMPLETE
