import json
import subprocess
import sys
from pathlib import Path

import pytest

from sliptsim.cli import OUT_ENV_VAR, main

SCENARIOS = Path(__file__).resolve().parents[1] / "scenarios"
DEMO = str(SCENARIOS / "turbulent_demo.json")


@pytest.fixture(autouse=True)
def _no_ambient_out(monkeypatch):
    monkeypatch.delenv(OUT_ENV_VAR, raising=False)


def test_run_writes_metrics_and_trace(tmp_path, capsys):
    rc = main(["run", "--scenario", DEMO, "--out", str(tmp_path)])
    assert rc == 0
    out = capsys.readouterr().out
    assert "scenario " in out and "harvested" in out
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert metrics["seed"] == 7
    assert "buoy" in metrics["nodes"]
    trace = (tmp_path / "trace.csv").read_text()
    assert trace.startswith("time,node_id,event_kind,phase,")
    assert not list(tmp_path.glob("*.tmp"))  # atomic writes leave no temp files


def test_run_jsonl_format_and_seed_override(tmp_path):
    rc = main(["run", "--scenario", DEMO, "--out", str(tmp_path),
               "--format", "jsonl", "--seed", "123"])
    assert rc == 0
    assert not (tmp_path / "trace.csv").exists()
    rows = [json.loads(line)
            for line in (tmp_path / "trace.jsonl").read_text().splitlines()]
    assert rows and rows[-1]["event_kind"] == "end"
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert metrics["seed"] == 123


def test_out_env_var_fallback_and_flag_priority(tmp_path, monkeypatch):
    env_dir = tmp_path / "env"
    flag_dir = tmp_path / "flag"
    monkeypatch.setenv(OUT_ENV_VAR, str(env_dir))
    assert main(["run", "--scenario", DEMO]) == 0
    assert (env_dir / "metrics.json").exists()
    assert main(["run", "--scenario", DEMO, "--out", str(flag_dir)]) == 0
    assert (flag_dir / "metrics.json").exists()


def test_run_without_out_prints_only(tmp_path, capsys):
    rc = main(["run", "--scenario", DEMO])
    assert rc == 0
    assert "harvested" in capsys.readouterr().out
    assert not list(tmp_path.iterdir())


def test_missing_scenario_file_is_a_clean_failure(tmp_path, capsys):
    rc = main(["run", "--scenario", str(tmp_path / "nope.json")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_usage_errors_exit_2():
    with pytest.raises(SystemExit) as e:
        main(["run"])  # --scenario is required
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["run", "--scenario", DEMO, "--format", "xml"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["explode"])
    assert e.value.code == 2


def test_validate_good_and_bad(tmp_path, capsys):
    assert main(["validate", "--scenario", DEMO]) == 0
    assert "scenario is valid" in capsys.readouterr().out

    bad = tmp_path / "bad.json"
    cfg = json.loads(Path(DEMO).read_text())
    cfg["transmitters"][0]["power"] = "5kg"
    cfg["nodes"][0]["store"]["capacty"] = "1J"
    bad.write_text(json.dumps(cfg))
    assert main(["validate", "--scenario", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "2 issue(s) found" in err
    assert "transmitters[0].power" in err


def test_validate_only_skips_the_run(tmp_path, capsys):
    rc = main(["run", "--scenario", DEMO, "--out", str(tmp_path),
               "--validate-only"])
    assert rc == 0
    assert "scenario is valid" in capsys.readouterr().out
    assert not (tmp_path / "metrics.json").exists()


def test_sweep_table_and_files(tmp_path, capsys):
    rc = main(["sweep", "--scenario", DEMO, "--out", str(tmp_path),
               "--param", "transmitters[0].power", "--values", "1mW,2mW,4mW"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("value,harvested_J,decoded_bits\n")
    table = (tmp_path / "sweep.csv").read_text()
    lines = table.strip().splitlines()
    assert len(lines) == 4
    harvested = [float(line.split(",")[1]) for line in lines[1:]]
    assert harvested[0] < harvested[1] < harvested[2]
    for i in range(3):
        per_run = json.loads((tmp_path / f"metrics_{i}.json").read_text())
        assert per_run["nodes"]["buoy"]["harvested_J"] == pytest.approx(harvested[i])
    assert not list(tmp_path.glob("*.tmp"))


def test_sweep_rejects_bad_param_paths(capsys):
    rc = main(["sweep", "--scenario", DEMO,
               "--param", "transmitters[9].power", "--values", "1W"])
    assert rc == 1
    assert "error:" in capsys.readouterr().err
    rc = main(["sweep", "--scenario", DEMO, "--param", "transmitters[0].power",
               "--values", ""])
    assert rc == 1


def test_module_entry_point_runs():
    proc = subprocess.run(
        [sys.executable, "-m", "sliptsim.cli", "validate", "--scenario", DEMO],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "scenario is valid" in proc.stdout
