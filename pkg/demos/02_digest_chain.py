#!/usr/bin/env python3
"""Walk the torrent metadata the way a consumer does and check every digest.

The torrent file is split into segments; each segment lists manifest names and
points at the next segment.  Each manifest lists data-packet names and points
at the next manifest of the same file.  Every name ends in the SHA-256 of the
object it names, so following the chain from the first segment name verifies
the whole torrent.
"""

from ntorrent_sim import TorrentParams, build_torrent
from ntorrent_sim.torrent import decode_manifest, decode_torrent_segment


def main():
    params = TorrentParams(num_files=2, file_size=1000, packet_size=256,
                           names_per_manifest=3, names_per_segment=3)
    bundle = build_torrent(params)
    store = {d.full_name: d for d in bundle.all_objects()}

    print("torrent identifier:", bundle.first_segment_name, "\n")

    name = bundle.first_segment_name
    manifests = []
    while name is not None:
        data = store[name]
        assert data.full_name == name  # the digest in the name matches the bytes
        segment = decode_torrent_segment(data.payload)
        print(f"segment {segment.segment_number}: {len(segment.manifest_catalog)} manifests")
        manifests.extend(segment.manifest_catalog)
        name = segment.next_segment_ptr

    for m_name in manifests:
        m = decode_manifest(store[m_name].payload)
        sizes = [len(store[p].payload) for p in m.sub_manifest_catalog]
        chained = "-> next" if m.next_manifest_ptr else "(last)"
        print(f"  {m.file_path} manifest {m.manifest_number}: packet sizes {sizes} {chained}")

    print(f"\n{len(bundle.torrent_segments)} segments, {len(bundle.manifests)} manifests, "
          f"{len(bundle.data_packets)} data packets")


if __name__ == "__main__":
    main()
