"""Hypothesis strategies for names, packets and torrent objects."""

from hypothesis import strategies as st

from ntorrent_sim.ndn import ContentType, Data, Interest, Name
from ntorrent_sim.torrent import FileManifest, TorrentFileSegment

components = st.binary(min_size=1, max_size=12)
digests = st.binary(min_size=32, max_size=32)
wire_names = st.lists(components, min_size=1, max_size=6).map(lambda cs: Name(tuple(cs))).filter(
    lambda n: not n.is_full
)
full_names = st.builds(lambda n, d: n.with_digest(d), wire_names, digests)
nonces = st.integers(min_value=0, max_value=2**32 - 1)

interests = st.builds(Interest, full_names, nonces)
datas = st.builds(Data, wire_names, st.sampled_from(list(ContentType)), st.binary(max_size=300))
packets = st.one_of(interests, datas)

segments = st.builds(
    TorrentFileSegment,
    st.integers(min_value=0, max_value=2**64 - 1),
    st.lists(full_names, min_size=1, max_size=5).map(tuple),
    st.one_of(st.none(), full_names),
)
manifests = st.builds(
    FileManifest,
    st.integers(min_value=0, max_value=2**64 - 1),
    st.text(min_size=1, max_size=16),
    st.lists(full_names, min_size=1, max_size=5).map(tuple),
    st.one_of(st.none(), full_names),
)
