#!/usr/bin/env python3
"""How packet size and catalog sizes shape the transfer.

Smaller packets mean more data packets, longer manifest catalogs, and more
per-packet header overhead; larger catalogs mean fewer metadata objects.
"""

from ntorrent_sim import ScenarioConfig, simulate


def main():
    print(f"{'packet':>6} {'npm':>4} {'nps':>4} | {'segs':>4} {'mans':>4} {'pkts':>4} | {'bytes':>6} {'time (s)':>9}")
    for packet_size in (64, 256, 1024):
        for names in (2, 8):
            cfg = ScenarioConfig(file_size=4096, packet_size=packet_size,
                                 names_per_manifest=names, names_per_segment=names)
            report = simulate(cfg).report
            c = report.consumer
            producer = next(n for n in report.nodes if n["role"] == "producer")
            print(f"{packet_size:6d} {names:4d} {names:4d} | {c['segments']:4d} {c['manifests']:4d} "
                  f"{c['packets']:4d} | {producer['counters']['bytes_out']:6d} {report.completion_time_s:9.4f}")


if __name__ == "__main__":
    main()
