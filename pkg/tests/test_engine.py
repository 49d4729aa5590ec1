import csv
import io
from collections import Counter

import pytest

from ntorrent_sim.engine import (
    Link,
    Outcome,
    Role,
    Simulation,
    Topology,
    UnreachableProducer,
    compute_routes,
    link_delay,
)
from ntorrent_sim.generator import TorrentParams, build_torrent
from ntorrent_sim.ndn import APP_FACE, Name

PARAMS = TorrentParams()
PREFIX = Name.parse("/NTORRENT/demo")


def line_topology():
    t = Topology()
    t.add_node("A", Role.PRODUCER)
    t.add_node("B")
    t.add_node("C", Role.CONSUMER)
    t.add_link("A", "B")
    t.add_link("B", "C")
    return t


# -- links -------------------------------------------------------------------


def test_link_delay_idle_then_fifo():
    link = Link("a", "b", data_rate=1e6, latency=0.010)
    assert link_delay(link, 1250, 0, 0.0) == pytest.approx((0.0, 0.020), abs=1e-12)
    start, arrival = link_delay(link, 1250, 0, 0.0)
    assert start == pytest.approx(0.010) and arrival == pytest.approx(0.030)


def test_link_directions_independent():
    link = Link("a", "b", data_rate=1e6, latency=0.010)
    link_delay(link, 1250, 0, 0.0)
    assert link_delay(link, 1250, 1, 0.0)[1] == pytest.approx(0.020)


def test_zero_latency_is_serialization_only():
    link = Link("a", "b", data_rate=8000, latency=0.0)
    assert link_delay(link, 10, 0, 1.0) == (1.0, 1.01)


def test_link_validation():
    with pytest.raises(ValueError):
        Link("a", "b", data_rate=0)
    with pytest.raises(ValueError):
        Link("a", "b", latency=-1)
    with pytest.raises(ValueError):
        link_delay(Link("a", "b"), 0, 0, 0.0)


# -- routing -----------------------------------------------------------------


def test_routes_two_node():
    fibs = compute_routes(Topology.two_node(), PREFIX)
    assert fibs["1"].lpm(PREFIX.append("x")) == 1
    assert fibs["0"].lpm(PREFIX.append("x")) == APP_FACE


def test_routes_line():
    fibs = compute_routes(line_topology(), PREFIX)
    # B's face 1 is the A-B link
    assert fibs["B"].lpm(PREFIX) == 1
    assert fibs["C"].lpm(PREFIX) == 1


def test_routes_diamond_tie_breaks_to_lower_id():
    t = Topology()
    t.add_node("1", Role.PRODUCER)
    for n in ("4", "3", "2"):
        t.add_node(n)
    t.add_node("5", Role.CONSUMER)
    t.add_link("5", "3")  # consumer face 1 -> node 3
    t.add_link("5", "2")  # consumer face 2 -> node 2
    t.add_link("3", "1")
    t.add_link("2", "1")
    t.add_link("4", "5")
    fibs = compute_routes(t, PREFIX)
    assert fibs["5"].lpm(PREFIX) == 2
    assert fibs["4"].lpm(PREFIX) == 1


def test_routes_unreachable():
    t = Topology()
    t.add_node("0", Role.PRODUCER)
    t.add_node("1", Role.CONSUMER)
    with pytest.raises(UnreachableProducer):
        compute_routes(t, PREFIX)


# -- runs --------------------------------------------------------------------


@pytest.fixture
def done():
    sim = Simulation(Topology.two_node(), PARAMS, seed=1)
    return sim, sim.run(60.0)


def test_two_node_completes(done):
    sim, result = done
    assert result.outcome is Outcome.COMPLETED
    assert result.completion_time > 0
    assert sim.queue_empty
    c = sim.consumers["1"]
    assert (len(c.received_segments), len(c.received_manifests), len(c.received_packets)) == (2, 4, 8)


def test_snapshots_at_completion(done):
    sim, _ = done
    bundle = build_torrent(PARAMS)
    consumer = sim.snapshot("1")
    assert set(consumer["cs"]) == {str(n) for n in bundle.full_names()}
    assert consumer["pit"] == [] and sim.snapshot("0")["pit"] == []
    assert sim.snapshot("0")["counters"]["data_out"] == consumer["counters"]["data_in"] == 14
    assert consumer["counters"]["interests_out"] == sim.snapshot("0")["counters"]["interests_in"] == 14


def test_trace_causality(done):
    sim, _ = done
    # replay every send through a fresh copy of the link and match it to the next recv
    link = Link("0", "1", sim.topology.links[0].data_rate, sim.topology.links[0].latency)
    sends = [r for r in sim.trace if r.dir == "send"]
    recvs = [r for r in sim.trace if r.dir == "recv"]
    assert len(sends) == len(recvs) == 28
    expected = Counter()
    for r in sends:
        direction = 0 if r.node == "0" else 1
        _, arrival = link.delay(r.bytes, direction, r.time)
        expected[(r.name, r.kind, arrival)] += 1
    got = Counter((r.name, r.kind, r.time) for r in recvs)
    assert got == expected
    times = [r.time for r in sim.trace]
    assert times == sorted(times)


def test_conservation_per_direction(done):
    sim, _ = done
    sent = Counter((r.node, r.kind) for r in sim.trace if r.dir == "send")
    recv = Counter((r.node, r.kind) for r in sim.trace if r.dir == "recv")
    assert sent[("1", "interest")] == recv[("0", "interest")] == 14
    assert sent[("0", "data")] == recv[("1", "data")] == 14


def test_phase_history(done):
    sim, result = done
    phases = [p.value for p, _ in sim.phase_history["1"]]
    assert phases == ["fetching-torrent-file", "fetching-manifests", "fetching-data", "done"]
    assert sim.phase_history["1"][-1][1] == result.completion_time


def test_idle_when_nothing_answers():
    t = Topology()
    t.add_node("0")
    t.add_node("1", Role.CONSUMER)
    t.add_link("0", "1")
    sim = Simulation(t, PARAMS, install_routes=False)
    result = sim.run(60.0)
    assert result.outcome is Outcome.IDLE
    assert result.pending == {"1": [str(build_torrent(PARAMS).first_segment_name)]}


def test_timed_out():
    sim = Simulation(Topology.two_node(), PARAMS)
    assert sim.run(0.000001).outcome is Outcome.TIMED_OUT


def test_run_rejects_nonpositive_budget():
    with pytest.raises(ValueError):
        Simulation(Topology.two_node(), PARAMS).run(0)


def test_multi_hop_caches_at_router():
    sim = Simulation(line_topology(), PARAMS, seed=3)
    assert sim.run().outcome is Outcome.COMPLETED
    bundle = build_torrent(PARAMS)
    assert set(sim.snapshot("B")["cs"]) == {str(n) for n in bundle.full_names()}
    for n in "ABC":
        assert sim.snapshot(n)["pit"] == []


def test_csv_trace_format(done):
    sim, _ = done
    rows = list(csv.reader(io.StringIO(sim.trace_csv())))
    assert rows[0] == ["time", "node", "dir", "kind", "name", "bytes"]
    assert rows[1][0] == "0.000000000"
    assert all(len(r[0].split(".")[1]) == 9 for r in rows[1:])


def test_deterministic_trace():
    a = Simulation(Topology.two_node(), PARAMS, seed=5)
    b = Simulation(Topology.two_node(), PARAMS, seed=5)
    a.run()
    b.run()
    assert a.trace_csv() == b.trace_csv()


def test_aggregation_two_consumers_one_router():
    t = Topology()
    t.add_node("P", Role.PRODUCER)
    t.add_node("R")
    t.add_node("C1", Role.CONSUMER)
    t.add_node("C2", Role.CONSUMER)
    t.add_link("P", "R")
    t.add_link("R", "C1")
    t.add_link("R", "C2")
    sim = Simulation(t, PARAMS, seed=11)
    assert sim.run().outcome is Outcome.COMPLETED
    # both consumers start together, so the router aggregates and the producer serves each object once
    assert sim.snapshot("P")["counters"]["data_out"] == 14
    assert sim.snapshot("C1")["counters"]["data_in"] == sim.snapshot("C2")["counters"]["data_in"] == 14
