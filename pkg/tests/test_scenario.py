import json
import subprocess
import sys

import pytest

from ntorrent_sim.cli import main
from ntorrent_sim.engine import corrupt_nth_data
from ntorrent_sim.scenario import (
    ConfigError,
    RunReport,
    ScenarioConfig,
    count_consumer_data_recv,
    emit_report,
    parse_config,
    parse_topology,
    run_scenario,
    simulate,
)
from ntorrent_sim.torrent import InterestType

LINE = """\
# producer - router - consumer
node 0
node 1
node 2
link 0 1 1000000 10
link 1 2 2000000 5
producer 0
consumer 2
"""


def test_defaults():
    cfg = parse_config([])
    assert cfg == ScenarioConfig()
    assert (cfg.num_files, cfg.file_size, cfg.packet_size) == (2, 1024, 256)
    assert (cfg.names_per_manifest, cfg.names_per_segment) == (3, 3)
    assert cfg.data_rate_bps == 1e6 and cfg.latency_ms == 10.0 and cfg.max_sim_time_s == 60.0


def test_flags_reflected():
    cfg = parse_config(["--names-per-segment", "5", "--seed", "7"])
    assert cfg.names_per_segment == 5 and cfg.seed == 7


@pytest.mark.parametrize(
    "argv, flag",
    [
        (["--packet-size", "0"], "--packet-size"),
        (["--num-files", "x"], "--num-files"),
        (["--latency-ms", "-1"], "--latency-ms"),
        (["--seed", "-3"], "--seed"),
        (["--bogus"], "--bogus"),
    ],
)
def test_bad_flags(argv, flag):
    with pytest.raises(ConfigError, match=flag):
        parse_config(argv)


def test_parse_topology():
    t = parse_topology(LINE)
    assert t.producers == ["0"] and t.consumers == ["2"]
    assert [(l.a, l.b, l.data_rate, l.latency) for l in t.links] == [
        ("0", "1", 1e6, 0.010),
        ("1", "2", 2e6, 0.005),
    ]


@pytest.mark.parametrize(
    "text",
    [
        "node 0\nnode 1\nlink 0 1\nconsumer 1\n",  # no producer
        "node 0\nnode 1\nlink 0 1\nproducer 0\n",  # no consumer
        "node 0\nlink 0 9\nproducer 0\nconsumer 0\n",  # unknown node
        "node 0\nfrobnicate\n",
        "node 0\nnode 1\nlink 0 1 fast 10\nproducer 0\nconsumer 1\n",
    ],
)
def test_bad_topology(text):
    with pytest.raises(ConfigError):
        parse_topology(text)


def test_topology_file_without_producer(tmp_path):
    path = tmp_path / "t.txt"
    path.write_text("node 0\nnode 1\nlink 0 1\nconsumer 1\n")
    with pytest.raises(ConfigError):
        run_scenario(ScenarioConfig(topology=str(path)))
    assert main(["--topology", str(path)]) == 2


def test_default_run():
    report = run_scenario(ScenarioConfig())
    assert report.outcome == "completed"
    assert (report.consumer["packets"], report.consumer["manifests"], report.consumer["segments"]) == (8, 4, 2)
    assert report.completion_time_s > 0


def test_total_interest_count():
    run = simulate(ScenarioConfig())
    sent = [r for r in run.simulation.trace if r.node == "1" and r.dir == "send" and r.kind == "interest"]
    assert len(sent) == 2 + 4 + 8


def test_report_trace_cross_check():
    run = simulate(ScenarioConfig(seed=4))
    counts = count_consumer_data_recv(run.trace_csv, "1")
    assert counts[InterestType.DATA_PACKET] == run.report.consumer["packets"]
    assert counts[InterestType.FILE_MANIFEST] == run.report.consumer["manifests"]
    assert counts[InterestType.TORRENT_SEGMENT] == run.report.consumer["segments"]


def test_report_round_trip(tmp_path):
    report = run_scenario(ScenarioConfig())
    path = tmp_path / "r.json"
    text = emit_report(report, str(path))
    assert path.read_text() == text
    assert RunReport.from_dict(json.loads(text)) == report
    doc = json.loads(text)
    assert list(doc) == sorted(doc)
    assert set(doc) >= {"outcome", "completion_time_s", "seed", "params", "nodes", "consumer"}
    assert set(doc["nodes"][0]) == {"id", "role", "counters", "cs_size", "pit_size"}
    assert {"phases", "segments", "manifests", "packets"} <= set(doc["consumer"])


def test_emit_report_stdout(capsys):
    report = run_scenario(ScenarioConfig())
    emit_report(report)
    assert json.loads(capsys.readouterr().out)["outcome"] == "completed"


def test_seed_changes_trace_not_timing():
    a = simulate(ScenarioConfig(seed=1))
    b = simulate(ScenarioConfig(seed=2))
    assert a.report.completion_time_s == b.report.completion_time_s
    assert a.report.consumer == b.report.consumer
    assert [n["counters"] for n in a.report.nodes] == [n["counters"] for n in b.report.nodes]
    assert a.trace_csv == b.trace_csv  # nonces are not part of the trace; sizes are fixed-width


def test_line_topology_file(tmp_path):
    path = tmp_path / "line.txt"
    path.write_text(LINE)
    report = run_scenario(ScenarioConfig(topology=str(path)))
    assert report.outcome == "completed"
    router = next(n for n in report.nodes if n["id"] == "1")
    assert router["role"] == "router" and router["cs_size"] == 14


# -- exit codes --------------------------------------------------------------


def test_exit_ok(tmp_path, capsys):
    trace, rep = tmp_path / "t.csv", tmp_path / "r.json"
    assert main(["--trace-out", str(trace), "--report-out", str(rep)]) == 0
    assert trace.read_text().startswith("time,node,dir,kind,name,bytes\n")
    assert json.loads(rep.read_text())["outcome"] == "completed"
    assert capsys.readouterr().out == ""


def test_exit_config_error(capsys):
    assert main(["--packet-size", "0"]) == 2
    assert "--packet-size" in capsys.readouterr().err


def test_exit_unreachable(tmp_path):
    path = tmp_path / "t.txt"
    path.write_text("node 0\nnode 1\nproducer 0\nconsumer 1\n")
    assert main(["--topology", str(path)]) == 2


def test_exit_timeout(capsys):
    assert main(["--max-sim-time", "0.000001"]) == 3
    assert json.loads(capsys.readouterr().out)["outcome"] == "timed_out"


def test_exit_corruption(capsys):
    assert main([], tamper=corrupt_nth_data(0)) == 3
    captured = capsys.readouterr()
    doc = json.loads(captured.out)
    assert doc["outcome"] == "aborted" and doc["error"].startswith("DigestMismatch")
    assert "DigestMismatch" in captured.err


def test_exit_io_error(tmp_path):
    assert main(["--report-out", str(tmp_path / "missing" / "r.json")]) == 4
    assert main(["--trace-out", str(tmp_path)]) == 4


def test_print_payloads(capsys):
    assert main(["--print-payloads", "--num-files", "1", "--file-size", "3", "--report-out", "/dev/null"]) == 0
    assert capsys.readouterr().err.strip() == "/NTORRENT/demo/file0/data/0: AAA"


def test_module_entry_point(tmp_path):
    out = subprocess.run(
        [sys.executable, "-m", "ntorrent_sim", "--seed", "3"], capture_output=True, text=True, check=False
    )
    assert out.returncode == 0
    assert json.loads(out.stdout)["seed"] == 3
