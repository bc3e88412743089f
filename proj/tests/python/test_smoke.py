import json

import pytest

import vmplace

DEFAULT = ["12U8G", "24U16G", "48U32G", "96U64G", "2U4G", "4U8G", "8U16G",
           "16U32G", "32U64G", "2U8G", "4U16G", "8U32G"]


def test_version():
    assert vmplace.__version__


def test_categorize():
    assert vmplace.categorize("12U8G") == "cpu-intensive"
    assert vmplace.categorize("2U8G") == "mem-intensive"


def test_alw_examples():
    assert vmplace.alw(13, 10, ["12U8G"]) == (1, 2)
    assert vmplace.alw(5, 8, ["12U8G"]) == (5, 8)


@pytest.mark.parametrize("lam", [0.0, 0.5, 1.0])
def test_default_plan(lam):
    plan = vmplace.solve_assignment(DEFAULT, lam=lam)
    assert (plan["c1"], plan["m1"], plan["c2"], plan["m2"]) == (96, 64, 32, 96)
    assert plan["objective"] == 0.0


def test_run_experiment_deterministic():
    cfg = json.dumps({"pms": [5], "schedulers": ["ff"], "scenarios": 4,
                      "synth": {"length": 2000}})
    a = vmplace.run_experiment(cfg)
    assert a == vmplace.run_experiment(cfg)
    rows = [l for l in a.splitlines() if l and not l.startswith("#")]
    assert len(rows) == 3


def test_bad_config_raises():
    with pytest.raises(vmplace._core.Error):
        vmplace.run_experiment('{"pmz": 3}')


def test_gen_trace_and_cli(tmp_path):
    path = tmp_path / "t.csv"
    vmplace.gen_trace(str(path), length=500, seed=2)
    assert len(path.read_text().splitlines()) >= 500
    code, out, _ = vmplace.cli(["run", "--trace", str(path), "--pms", "4",
                                "--scenarios", "3", "--scheduler", "bf"])
    assert code == 0
    assert "BF+RA" in out
    code, _, err = vmplace.cli(["run", "--trace", str(tmp_path / "missing.csv")])
    assert code == 2
    assert "missing.csv" in err
