#!/usr/bin/env python3
"""A router between producer and consumer caches everything it forwards.

After the first consumer finishes, a second consumer behind the same router
fetches the whole torrent without a single interest reaching the producer.
"""

from ntorrent_sim import Outcome, Simulation, TorrentParams, Topology
from ntorrent_sim.engine import Role


def main():
    topo = Topology()
    topo.add_node("P", Role.PRODUCER)
    topo.add_node("R")
    topo.add_node("C1", Role.CONSUMER)
    topo.add_node("C2")
    topo.add_link("P", "R", data_rate=10e6, latency=0.020)
    topo.add_link("R", "C1", data_rate=1e6, latency=0.005)
    topo.add_link("R", "C2", data_rate=1e6, latency=0.005)

    sim = Simulation(topo, TorrentParams(), seed=3)
    first = sim.run()
    assert first.outcome is Outcome.COMPLETED
    print(f"C1 done at {first.completion_time:.6f} s; router CS holds {len(sim.nodes['R'].cs)} objects")
    print("producer counters:", sim.snapshot("P")["counters"])

    start = sim.now
    sim.attach_consumer("C2")
    second = sim.run()
    assert second.outcome is Outcome.COMPLETED
    print(f"\nC2 done after {second.completion_time - start:.6f} s")
    print("producer counters:", sim.snapshot("P")["counters"], "(unchanged)")


if __name__ == "__main__":
    main()
