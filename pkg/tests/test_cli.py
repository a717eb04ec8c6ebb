import csv
import io
import json

import numpy as np
import pytest

from hiercoded import cli
from hiercoded.config import load_config, pad_to_divisible, parse_config, unpad
from hiercoded.errors import ConfigError
from hiercoded.hierarchical import HierarchicalPlan

from conftest import CONFIGS

SMALL_CONFIGS = sorted(p for p in CONFIGS.glob("*.json") if p.name != "straggler_sweep.json")


def small_sweep(tmp_path, **overrides):
    doc = {
        "matrix": {"nx": 100, "nz": 10, "ny": 10},
        "pad": True,
        "n_workers": 16,
        "strategy": {"name": "profile", "L": 4, "k_mean": 11},
        "sim": {"straggler_prob": 0.5, "straggler_slowdown": 2.0,
                "time_model": {"kind": "shifted_exponential", "shift": 2e-9, "rate": 1e9},
                "seed": 5, "trials": 60},
        "sweep": {"k_mean": 11},
    }
    doc.update(overrides)
    path = tmp_path / "sweep.json"
    path.write_text(json.dumps(doc))
    return path


def test_plan_layered_8431(capsys):
    assert cli.main(["plan", str(CONFIGS / "layered_8431.json")]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["k_r"] == [[8, 8], [4, 4], [3, 3], [1, 1]]
    assert doc["sum_rate"] == {"k_total": 16, "r": 16}
    assert doc["L"] == 4


def test_plan_flat_polynomial(tmp_path):
    out = tmp_path / "plan.json"
    assert cli.main(["plan", str(CONFIGS / "flat_polynomial.json"), "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["k_r"] == [[4, 4]]
    assert doc["layers"][0]["category"] == "{x,y}"


def test_plan_matdot_has_no_sum_rate():
    doc = cli.cmd_plan(CONFIGS / "matdot.json", out=None)
    assert doc["sum_rate"] is None
    assert doc["layers"][0]["category"] == "{z}"


def test_empty_config_exit_1(tmp_path, capsys):
    path = tmp_path / "empty.json"
    path.write_text("{}")
    assert cli.main(["plan", str(path)]) == 1
    assert "empty" in capsys.readouterr().err


def test_bad_json_reports_line(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "matrix": {"nx": 4,,}\n}\n')
    with pytest.raises(ConfigError, match=r"bad.json:2:.*matrix"):
        load_config(path)


def test_unknown_strategy_exit_1(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"matrix": {"nx": 4, "nz": 2, "ny": 2}, "n_workers": 2,
                                "strategy": {"name": "spiral"}}))
    assert cli.main(["plan", str(path)]) == 1


@pytest.mark.parametrize("path", SMALL_CONFIGS, ids=lambda p: p.stem)
@pytest.mark.parametrize("seed", [0, 1, 7, 42])
def test_roundtrip_shipped_configs(path, seed):
    report = cli.roundtrip(load_config(path), seed)
    assert report["passed"], report


def test_roundtrip_large_config():
    report = cli.roundtrip(load_config(CONFIGS / "straggler_sweep.json"), 0)
    assert report["passed"] and len(report["thresholds"]) == 12


def test_roundtrip_replication_is_exact():
    assert cli.roundtrip(load_config(CONFIGS / "replication.json"), 3)["relative_error"] == 0.0


def test_roundtrip_too_few_results_exit_2(capsys):
    assert cli.main(["roundtrip", str(CONFIGS / "flat_polynomial.json"), "--max-results", "3"]) == 2
    assert "need 4" in capsys.readouterr().err


def test_roundtrip_cli_ok(capsys):
    assert cli.main(["roundtrip", str(CONFIGS / "matdot.json"), "--seed", "2"]) == 0
    assert json.loads(capsys.readouterr().out)["passed"]


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_sweep_rows(tmp_path, capsys, caplog):
    path = small_sweep(tmp_path)
    assert cli.main(["sweep", str(path), "--layers", "1,2,0,4"]) == 0
    rows = _rows(capsys.readouterr().out)
    assert "skipping L=0" in caplog.text
    by = {(r["scheme"], int(r["L"])): r for r in rows}
    assert by[("skipped", 0)]["trials"] == "0"
    # L = 1: the hierarchical plan is the flat code
    assert by[("hierarchical", 1)]["mean"] == by[("polynomial", 1)]["mean"]
    # uncoded does not depend on L
    assert len({r["mean"] for r in rows if r["scheme"] == "uncoded"}) == 1
    for L in (1, 2, 4):
        assert float(by[("sum_rate", L)]["mean"]) <= float(by[("hierarchical", L)]["mean"])


def test_sweep_to_file_is_reproducible(tmp_path):
    path = small_sweep(tmp_path)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    cli.cmd_sweep(path, [1, 4], a)
    cli.cmd_sweep(path, [1, 4], b)
    assert a.read_bytes() == b.read_bytes()


def test_sweep_rejects_unmatched_strategy(tmp_path, capsys):
    path = small_sweep(tmp_path, sweep={"k_mean": 11, "strategy": "geometric"})
    rows = cli.cmd_sweep(path, [2], "-")
    assert rows[0][0] == "skipped"


def test_pad_to_divisible_examples(rng):
    a, b = rng.standard_normal((8, 3)), rng.standard_normal((3, 5))
    pa, pb, dims = pad_to_divisible(a, b, (4, 1, 5))
    assert pa is a and pb is b and dims == (8, 3, 5)
    a = rng.standard_normal((10, 3))
    pa, pb, dims = pad_to_divisible(a, b, (4, 2, 1))
    assert pa.shape == (12, 4) and pb.shape == (4, 5)
    assert not pa[10:].any() and not pa[:, 3].any()
    np.testing.assert_allclose(unpad(pa @ pb, dims), a @ b)


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_config_plan_json_roundtrip(path):
    plan = load_config(path).build()
    assert HierarchicalPlan.from_json(plan.to_json()) == plan


def test_parse_config_errors():
    with pytest.raises(ConfigError, match="missing required field"):
        parse_config({"matrix": {"nx": 1, "nz": 1, "ny": 1}})
    with pytest.raises(ConfigError, match="scheme"):
        parse_config({"matrix": {"nx": 1, "nz": 1, "ny": 1}, "n_workers": 1,
                      "scheme": "lt", "strategy": {"name": "uniform", "L": 1}})
    with pytest.raises(ConfigError, match="sim"):
        parse_config({"matrix": {"nx": 1, "nz": 1, "ny": 1}, "n_workers": 1,
                      "strategy": {"name": "uniform", "L": 1}, "sim": {"straggler_prob": 3}})
