import csv
import json

import pytest

from spanemu.cli.cli import EXIT_FAILED, EXIT_INVALID, EXIT_OK, main
from spanemu.core.operations import expand_suite, parse_stretch_mode
from spanemu.errors import InvalidConfigError
from spanemu.utils import console


def build_c5(config_file, out):
    return main(
        ["--config", config_file, "-q", "build", "--algo", "centralized", "--gen", "cycle:5",
         "--eps", "0.5", "--kappa", "2", "--out", str(out)]
    )


def verify_args(config_file, out):
    return [
        "--config", config_file, "-q", "verify",
        "--graph", str(out / "graph.txt"),
        "--emulator", str(out / "emulator.txt"),
        "--schedule", str(out / "schedule.json"),
        "--transcript", str(out / "build_transcript.jsonl"),
    ]


def test_build_writes_artifacts(config_file, tmp_path):
    out = tmp_path / "run"
    assert build_c5(config_file, out) == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["edges"] == 5
    assert summary["n"] == 5
    assert summary["charges"]["balanced"]
    assert (out / "emulator.txt").read_text().startswith("5 5 emulator\n")
    assert (out / "build_transcript.jsonl").exists()
    assert not (out / "sim_transcript.jsonl").exists()


def test_distributed_build_writes_a_simulation_transcript(config_file, tmp_path):
    out = tmp_path / "run"
    code = main(
        ["--config", config_file, "-q", "build", "--algo", "distributed", "--mode", "seq",
         "--gen", "grid:3x3", "--kappa", "3", "--rho", "0.45", "--out", str(out)]
    )
    assert code == EXIT_OK
    summary = json.loads((out / "summary.json").read_text())
    assert summary["bandwidth"]["passed"]
    assert summary["rounds"] > 0
    assert 0 < summary["ruling_round_constant"] <= 3.0
    assert (out / "sim_transcript.jsonl").exists()


def test_spanner_needs_rho(config_file, tmp_path):
    code = main(
        ["--config", config_file, "-q", "build", "--algo", "spanner", "--gen", "cycle:8",
         "--kappa", "3", "--out", str(tmp_path)]
    )
    assert code == EXIT_INVALID


def test_infeasible_spanner_is_refused(config_file, tmp_path):
    code = main(
        ["--config", config_file, "-q", "build", "--algo", "spanner", "--gen", "cycle:8",
         "--kappa", "3", "--rho", "0.45", "--out", str(tmp_path)]
    )
    assert code == 3


def test_verify_round_trip(config_file, tmp_path):
    out = tmp_path / "run"
    assert build_c5(config_file, out) == EXIT_OK
    assert main(verify_args(config_file, out)) == EXIT_OK
    report = json.loads((out / "verify_report.json").read_text())
    assert report["passed"]
    assert report["transcript_matches_h"]
    assert report["stretch"]["pairs"] == 10


def test_verify_catches_a_tampered_weight(config_file, tmp_path):
    out = tmp_path / "run"
    assert build_c5(config_file, out) == EXIT_OK
    emulator = out / "emulator.txt"
    emulator.write_text(emulator.read_text().replace("\n0 1 1\n", "\n0 1 2\n"))
    assert main(verify_args(config_file, out)) == EXIT_FAILED
    report = json.loads((out / "verify_report.json").read_text())
    assert not report["soundness"]["passed"]
    assert not report["transcript_matches_h"]


def test_verify_rejects_missing_schedule(config_file, tmp_path):
    out = tmp_path / "run"
    assert build_c5(config_file, out) == EXIT_OK
    args = verify_args(config_file, out)
    del args[args.index("--schedule"):args.index("--schedule") + 2]
    assert main(args) == EXIT_INVALID


def test_bench(config_file, tmp_path):
    suite = tmp_path / "suite.yaml"
    suite.write_text(
        "runs:\n"
        "  - gen: cycle:5\n"
        "    algo: centralized\n"
        "    kappa: [2, 3]\n"
        "  - gen: star:8\n"
    )
    out = tmp_path / "bench"
    assert main(["--config", config_file, "-q", "bench", "--suite", str(suite), "--out", str(out)]) == EXIT_OK
    with open(out / "bench.csv", newline="") as f:
        rows = list(csv.DictReader(f))
    assert [(r["graph"], r["kappa"]) for r in rows] == [("cycle:5", "2"), ("cycle:5", "3"), ("star:8", "2")]
    assert all(r["violations"] == "0" for r in rows)
    assert rows[0]["edges"] == "5"


def test_bench_needs_a_suite(config_file):
    assert main(["--config", config_file, "-q", "bench"]) == EXIT_INVALID


def test_no_command():
    assert main([]) == EXIT_INVALID


def test_missing_config_file(tmp_path):
    assert main(["--config", str(tmp_path / "none.yaml"), "-q", "bench", "--suite", "x"]) == EXIT_INVALID


def test_init(tmp_path):
    path = tmp_path / "conf" / "spanemu.yaml"
    assert main(["init", "--path", str(path)]) == EXIT_OK
    assert path.exists()
    assert main(["init", "--path", str(path)]) == EXIT_OK


def test_parse_stretch_mode():
    assert parse_stretch_mode("exhaustive") == ("exhaustive", None)
    assert parse_stretch_mode("sampled:16") == ("sampled", 16)
    assert parse_stretch_mode("sampled") == ("sampled", None)
    for bad in ("sampled:0", "sampled:x", "all"):
        with pytest.raises(InvalidConfigError):
            parse_stretch_mode(bad)


def test_expand_suite():
    defaults = {"algo": "centralized", "mode": "sim", "kappa": 2, "eps": 0.5, "rho": None, "seed": 0}
    runs = expand_suite({"runs": [{"gen": "cycle:5", "seed": [1, 2]}]}, defaults)
    assert [r["seed"] for r in runs] == [1, 2]
    assert runs[0]["algo"] == "centralized"
    with pytest.raises(InvalidConfigError):
        expand_suite({"runs": []}, defaults)
    with pytest.raises(InvalidConfigError):
        expand_suite({"runs": [{"kappa": 2}]}, defaults)
    with pytest.raises(InvalidConfigError):
        expand_suite({"runs": [{"gen": "cycle:5", "colour": "red"}]}, defaults)


def test_build_announces_the_algorithm(config_file, tmp_path, capsys):
    code = main(
        ["--config", config_file, "build", "--algo", "centralized", "--gen", "cycle:5",
         "--kappa", "2", "--out", str(tmp_path)]
    )
    assert code == EXIT_OK
    assert f"Building {console.highlight('centralized')} on" in capsys.readouterr().out
