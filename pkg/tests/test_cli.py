import json
from pathlib import Path
import subprocess
import sys

import pytest
import yaml

from msnet.cli import main, report
from msnet.errors import MissingArtifacts
from msnet.scenario import load, parse

ROOT = Path(__file__).resolve().parents[1]
SCENARIOS = ROOT / "scenarios"

CASE1_MODEL = {
    "kind": "tandem",
    "marks": {"per_station": [{"kind": "exponential", "rate": 2.0},
                              {"kind": "exponential", "rate": 3.0}]},
}


def scenario(tmp_path, name="s", task="ThetaStar", params=None, arrival=None, model=None, **extra):
    doc = {"name": name, "seed": 7, "task": task, "model": model or CASE1_MODEL,
           "arrival": arrival or {"kind": "exponential", "rate": 1.0},
           "task_params": params or {}, **extra}
    path = tmp_path / f"{name}.yaml"
    path.write_text(yaml.safe_dump(doc))
    return path


def tree(d: Path) -> dict:
    return {str(p.relative_to(d)): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


@pytest.mark.parametrize("path", sorted(SCENARIOS.rglob("*.yaml")), ids=lambda p: p.name)
def test_golden_scenarios_validate(path):
    sc = load(path)
    assert sc.seed >= 0 and sc.hash == load(path).hash


def test_case1_verify_golden(tmp_path, capsys):
    out = tmp_path / "case1"
    assert main(["run", str(SCENARIOS / "case1_tandem_independent.yaml"), "--output-dir", str(out)]) == 0
    doc = json.loads((out / "verify.json").read_text())
    assert doc["analytic"]["theta_star"] == 1.0
    lo, hi = doc["theta_star"]["bracket"]
    assert lo <= 1.0 <= hi
    assert abs(doc["tail"]["fit"]["rate"] - 1.0) <= 0.1
    assert doc["pass"] is True and doc["schema_version"] == 1


def test_negative_rate_names_field(tmp_path, capsys):
    path = scenario(tmp_path, arrival={"kind": "exponential", "rate": -1.0})
    assert main(["run", str(path), "--output-dir", str(tmp_path / "o")]) == 1
    err = capsys.readouterr().err
    assert "arrival.rate" in err


def test_bad_station_law_names_field(tmp_path, capsys):
    model = {"kind": "tandem", "marks": {"per_station": [{"kind": "uniform", "lo": 2.0, "hi": 1.0}]}}
    path = scenario(tmp_path, model=model)
    assert main(["run", str(path)]) == 1
    assert "model.marks.per_station[0]" in capsys.readouterr().err


def test_missing_seed(tmp_path, capsys):
    path = scenario(tmp_path)
    doc = yaml.safe_load(path.read_text())
    del doc["seed"]
    path.write_text(yaml.safe_dump(doc))
    assert main(["run", str(path)]) == 1
    assert "seed" in capsys.readouterr().err


def test_unstable_instance(tmp_path, capsys):
    path = scenario(tmp_path, task="Verify", arrival={"kind": "exponential", "rate": 3.0})
    assert main(["run", str(path), "--output-dir", str(tmp_path / "o")]) == 1
    assert "Unstable" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_unknown_parameter_rejected(tmp_path, capsys):
    path = scenario(tmp_path, task="Gamma", params={"L": 4})
    assert main(["run", str(path)]) == 1
    assert "task_params.L" in capsys.readouterr().err


def test_missing_file(tmp_path, capsys):
    assert main(["run", str(tmp_path / "nope.yaml")]) == 1


def test_task_artifacts(tmp_path):
    out = tmp_path / "out"
    runs = [
        ("g", "Gamma", {"n_schedule": [1, 8], "replicas": 500}, ["gamma.csv", "gamma.json"]),
        ("l", "Lambda", {"n": 4, "thetas": [0.0, 0.5], "replicas": 1000}, ["lambda.csv", "lambda.json"]),
        ("t", "ThetaStar", {"n_schedule": [1, 2, 4], "replicas": 2000, "gamma_replicas": 200},
         ["theta_n.csv", "theta_star.json"]),
        ("s", "Tail", {"count": 20000, "ccdf": True}, ["tail_sample.csv", "slope_fit.json", "ccdf.csv"]),
        ("b", "Bounds", {"L": 8, "batches": 4, "replicas": 500}, ["bounds.json"]),
    ]
    for name, task, params, files in runs:
        path = scenario(tmp_path, name=name, task=task, params=params)
        assert main(["run", str(path), "--output-dir", str(out / name)]) == 0
        for f in files:
            text = (out / name / f).read_text()
            if f.endswith(".json"):
                doc = json.loads(text)
                assert doc["schema_version"] == 1 and doc["seed"] == 7 and len(doc["scenario_hash"]) == 64
            else:
                first, header = text.splitlines()[:2]
                assert first.startswith(f"# scenario={name} scenario_hash=") and first.endswith("seed=7")
                assert "," in header or header == "Z"
    lam = (out / "l" / "lambda.csv").read_text().splitlines()
    assert lam[1] == "n,theta,value,stderr,samples,divergent,ess"
    assert lam[2].startswith("4,0,0,0,1000,0,")
    bounds = json.loads((out / "b" / "bounds.json").read_text())["bounds"]
    assert bounds["lower_violations"] == 0 and bounds["upper_violations"] == 0


def test_output_dir_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("MSNET_OUTPUT_DIR", str(tmp_path / "env"))
    path = scenario(tmp_path, name="envrun", task="Gamma", params={"n_schedule": [2], "replicas": 100})
    assert main(["run", str(path)]) == 0
    assert (tmp_path / "env" / "envrun" / "gamma.csv").exists()


def test_hash_ignores_output_dir(tmp_path):
    a = parse(yaml.safe_load(scenario(tmp_path, name="h").read_text()))
    b = parse({**a.raw, "output_dir": "/elsewhere"})
    c = parse({**a.raw, "seed": 8})
    assert a.hash == b.hash != c.hash


def test_deterministic_across_workers(tmp_path):
    params = {"n_schedule": [1, 2, 4], "replicas": 9000, "gamma_replicas": 300, "count": 20000}
    path = scenario(tmp_path, name="det", task="Verify", params=params)
    dirs = []
    for i, w in enumerate(["1", "3", "1"]):
        d = tmp_path / f"run{i}"
        main(["run", str(path), "--output-dir", str(d), "--workers", w])
        dirs.append(tree(d))
    assert dirs[0] == dirs[1] == dirs[2]
    assert set(dirs[0]) == {"verify.json", "theta_n.csv"}


def test_report_empty_dir(tmp_path, capsys):
    with pytest.raises(MissingArtifacts):
        report(tmp_path)
    assert main(["report", str(tmp_path)]) == 1
    assert "MissingArtifacts" in capsys.readouterr().err


def test_report_shows_phase_transition_and_is_idempotent(tmp_path, capsys):
    out = tmp_path / "sweep"
    common = {"kind": "tandem", "marks": {"dependence": "common", "stations": 2,
                                          "law": {"kind": "exponential", "rate": 1.0}}}
    for i in range(1, 10):
        path = scenario(tmp_path, name=f"lam0{i}", task="ThetaStar", model=common,
                        arrival={"kind": "exponential", "rate": i / 10},
                        params={"n_schedule": [1, 2, 4, 8, 16, 32, 64], "replicas": 4000,
                                "gamma_replicas": 100, "min_ess": 50})
        assert main(["run", str(path), "--output-dir", str(out / f"lam0{i}")]) == 0
    capsys.readouterr()
    assert main(["report", str(out)]) == 0
    first = capsys.readouterr().out
    assert main(["report", str(out)]) == 0
    assert capsys.readouterr().out == first
    rows = {line.split()[0]: line.split() for line in first.splitlines()[1:]}
    analytic = [float(rows[f"lam0{i}"][1]) for i in range(1, 10)]
    assert analytic == pytest.approx([0.5] * 5 + [0.4, 0.3, 0.2, 0.1])
    assert rows["lam05"][2] == "TandemCommon_ServiceDominated"
    assert rows["lam06"][2] == "TandemCommon_QueueDominated"


def test_module_entry_point(tmp_path):
    path = scenario(tmp_path, name="m", task="Gamma", params={"n_schedule": [1], "replicas": 100})
    res = subprocess.run([sys.executable, "-m", "msnet", "run", str(path), "--output-dir",
                          str(tmp_path / "m")], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    res = subprocess.run([sys.executable, "-m", "msnet", "report", str(tmp_path / "m")],
                         capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("instance")
