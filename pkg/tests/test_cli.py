import json

import pytest

from sxgraphs import io as rio
from sxgraphs.cli import EXIT_ACCEPT, EXIT_CONFIG, EXIT_GATE, EXIT_OK, ExperimentConfig, main
from sxgraphs.errors import ConfigError
from sxgraphs.experiments import load_manifest


def write_cfg(path, d):
    path.write_text(json.dumps(d))
    return str(path)


def test_construct_deterministic(tmp_path):
    cfg = write_cfg(tmp_path / "c.json", {"family": "schreier_p1",
                                          "params": {"t": 11, "generators": {"random": 2}}})
    assert main(["construct", "--config", cfg, "--seed", "3", "--out", str(tmp_path / "a")]) == 0
    assert main(["construct", "--config", cfg, "--seed", "3", "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "graph.json").read_bytes()
    assert a == (tmp_path / "b" / "graph.json").read_bytes()
    g = json.loads(a)
    assert g["meta"]["seed"] == 3 and g["meta"]["family"] == "schreier_p1"
    assert main(["construct", "--config", cfg, "--seed", "4", "--out", str(tmp_path / "c")]) == 0
    assert (tmp_path / "c" / "graph.json").read_bytes() != a


def test_construct_config_errors(tmp_path, capsys):
    out = str(tmp_path / "g.json")
    rr = write_cfg(tmp_path / "r.json", {"family": "random_regular", "params": {"n": 5, "degree": 3}})
    assert main(["construct", "--config", rr, "--seed", "1", "--out", out]) == EXIT_CONFIG
    assert main(["construct", "--config", rr, "--out", out]) == EXIT_CONFIG  # no seed
    bad = write_cfg(tmp_path / "b.json", {"family": "preset", "params": {"name": "k4"}, "color": 1})
    assert main(["construct", "--config", bad, "--out", out]) == EXIT_CONFIG
    fam = write_cfg(tmp_path / "f.json", {"family": "torus"})
    assert main(["construct", "--config", fam, "--out", out]) == EXIT_CONFIG
    assert main(["construct", "--config", str(tmp_path / "missing.json"), "--out", out]) == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err


def test_config_object():
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"params": {}})
    with pytest.raises(ConfigError):
        ExperimentConfig.from_dict({"family": "preset", "analyses": ["spectrum", "magic"]})
    cfg = ExperimentConfig.from_dict({"family": "preset", "params": {"name": "petersen"}})
    assert cfg.as_dict()["k_max"] == 10


def _k4(tmp_path):
    cfg = write_cfg(tmp_path / "k4.json", {"family": "preset", "params": {"name": "complete_k4"}})
    assert main(["construct", "--config", cfg, "--out", str(tmp_path / "k4")]) == 0
    return str(tmp_path / "k4" / "graph.json")


def test_analyze_outputs(tmp_path):
    g = _k4(tmp_path)
    out = tmp_path / "an"
    code = main(["analyze", g, "--analyses", "spectrum,density,paths,zeta,walk,geometry,bs,"
                 "equivalence", "--out", str(out), "--k-max", "6"])
    assert code == EXIT_OK
    index = rio.read_json(out / "index.json")
    assert index["errors"] == {}
    for e in index["outputs"]:
        assert rio.sha256_file(out / e["file"]) == e["sha256"]
    names = {e["file"] for e in index["outputs"]}
    assert {"spectrum.csv", "paths.csv", "zeta.csv", "walk.csv"} <= names
    spec = (out / "spectrum.csv").read_text().splitlines()
    assert len(spec) == 5
    # reruns give identical bytes
    out2 = tmp_path / "an2"
    main(["analyze", g, "--analyses", "spectrum,paths,zeta", "--out", str(out2), "--k-max", "6"])
    for f in ("spectrum.csv", "paths.csv", "zeta.csv"):
        assert (out / f).read_bytes() == (out2 / f).read_bytes()


def test_analyze_gates(tmp_path, capsys):
    cfg = write_cfg(tmp_path / "r.json", {"family": "random_regular",
                                          "params": {"n": 200, "degree": 4}, "seed": 2})
    main(["construct", "--config", cfg, "--out", str(tmp_path / "r")])
    g = str(tmp_path / "r" / "graph.json")
    out = tmp_path / "gated"
    code = main(["analyze", g, "--analyses", "spectrum,walk", "--dense-limit", "50",
                 "--out", str(out)])
    assert code == EXIT_GATE
    index = rio.read_json(out / "index.json")
    assert "spectrum" in index["errors"]
    assert any(e["analysis"] == "walk" for e in index["outputs"])
    assert "gated spectrum" in capsys.readouterr().err
    assert main(["analyze", g, "--out", str(out)]) == EXIT_CONFIG  # no analyses


def test_reproduce(tmp_path, capsys):
    out = tmp_path / "rep"
    assert main(["reproduce", "zeta_suite", "--out", str(out)]) == EXIT_OK
    res = rio.read_json(out / "zeta_suite.json")
    assert res["passed"] and res["manifest_version"] == load_manifest()["version"]
    assert "PASS" in capsys.readouterr().out
    index = rio.read_json(out / "index.json")
    assert index["manifest_version"] == load_manifest()["version"]
    for e in index["outputs"]:
        assert rio.sha256_file(out / e["file"]) == e["sha256"]
    # stale results from another manifest version are refused
    index["manifest_version"] = 999
    (out / "index.json").write_text(json.dumps(index))
    assert main(["reproduce", "zeta_suite", "--out", str(out)]) == EXIT_CONFIG
    assert main(["reproduce", "nonsense", "--out", str(tmp_path / "x")]) == EXIT_CONFIG


def test_reproduce_failure_exit(tmp_path, monkeypatch):
    import sxgraphs.cli as cli
    manifest = load_manifest()

    def failing(name, m):
        return {"name": name, "manifest_version": m["version"], "params": {}, "data": [],
                "checks": [{"check": "x", "passed": False, "value": 1, "threshold": 0}],
                "passed": False}

    monkeypatch.setattr(cli, "run_experiment", failing)
    assert main(["reproduce", "zeta_suite", "--out", str(tmp_path)]) == EXIT_ACCEPT
    assert rio.read_json(tmp_path / "index.json")["manifest_version"] == manifest["version"]
