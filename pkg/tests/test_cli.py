import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from netspread.cli import main


def write(tmp_path, obj, name="c.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


def read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


COMPLETE = {"family": "complete", "M": 8, "p": 1.0, "q": 2.0, "I0": 0.0}


def test_simulate_csv(tmp_path):
    cfg = write(tmp_path, {"network": COMPLETE, "horizon": 2, "grid": 5, "replicates": 500, "seed": 1})
    out = tmp_path / "s.csv"
    assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert header == ["t", "mean_f", "std_err"] and data.shape == (5, 3)


def test_simulate_repeat_is_byte_identical(tmp_path):
    cfg = write(tmp_path, {"network": COMPLETE, "horizon": 2, "grid": 7, "replicates": 3000})
    outs = [tmp_path / f"{i}.csv" for i in range(3)]
    for out, w in zip(outs, ("1", "1", "2")):
        assert main(["simulate", "--config", cfg, "--seed", "5", "--workers", w, "--out", str(out)]) == 0
    assert outs[0].read_bytes() == outs[1].read_bytes() == outs[2].read_bytes()


def test_missing_network_exit_2(tmp_path, capsys):
    cfg = write(tmp_path, {"grid": 5})
    assert main(["simulate", "--config", cfg]) == 2
    assert "network" in capsys.readouterr().err


def test_invalid_network_exit_2(tmp_path):
    cfg = write(tmp_path, {"network": {"family": "complete", "M": 3, "p": 0.0, "q": 1.0, "I0": 0.0}})
    assert main(["master", "--config", cfg]) == 2
    assert main(["master", "--config", cfg, "--override", "--out", str(tmp_path / "o.csv")]) == 0


def test_master_backends_agree(tmp_path):
    cfg = write(tmp_path, {"network": COMPLETE, "horizon": 4, "grid": 21})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["master", "--config", cfg, "--backend", "exact", "--out", str(a)]) == 0
    assert main(["master", "--config", cfg, "--backend", "reduced", "--out", str(b)]) == 0
    assert np.abs(read_csv(a)[1] - read_csv(b)[1]).max() < 1e-7


def test_master_per_node(tmp_path):
    cfg = write(tmp_path, {"network": {**COMPLETE, "M": 3}, "grid": 3})
    out = tmp_path / "o.csv"
    assert main(["master", "--config", cfg, "--backend", "exact", "--per-node", "--out", str(out)]) == 0
    assert read_csv(out)[0] == ["t", "f", "f_1", "f_2", "f_3"]


def test_exact_cap_exit_3(tmp_path):
    net = {"family": "general", "M": 20, "p": 0.1, "edges": [{"from": 0, "to": 1, "schedule": 1.0}]}
    cfg = write(tmp_path, {"network": net})
    assert main(["master", "--config", cfg, "--backend", "exact"]) == 3


def test_circle_reduced(tmp_path):
    cfg = write(tmp_path, {"network": {"family": "circle", "M": 4, "p": 0.5, "qL": 1.0}, "grid": 6})
    out = tmp_path / "o.csv"
    assert main(["master", "--config", cfg, "--out", str(out)]) == 0
    assert read_csv(out)[1].shape == (6, 2)


def test_limit_family_mismatch(tmp_path):
    cfg = write(tmp_path, {"network": COMPLETE})
    assert main(["limit", "--config", cfg, "--family", "onedim"]) == 2
    assert main(["limit", "--config", cfg, "--family", "compartmental", "--out", str(tmp_path / "l.csv")]) == 0


@pytest.mark.parametrize(
    "net, M_list",
    [
        ({"family": "complete", "M": 2, "p": 0.1, "q": 1.0}, [2, 10, 30, 200]),
        ({"family": "circle", "M": 2, "p": 0.1, "qL": 1.0}, [2, 4, 6, 8]),
        ({"family": "two-groups", "M": 2, "p1": 0.1, "p2": 0.2, "q1": 1.0, "q2": 2.0}, [2, 8, 20, 80]),
    ],
)
def test_sweep_columns_increase(tmp_path, net, M_list):
    cfg = write(tmp_path, {"network": net, "M_list": M_list, "grid": "1,2,3,4,5"})
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--config", cfg, "--tol", "1e-12,1e-14", "--out", str(out)]) == 0
    header, data = read_csv(out)
    assert header == ["t", *[f"f_M{m}" for m in M_list], "f_limit"]
    assert np.all(np.diff(data[:, 1:], axis=1) > 0)


def test_sweep_needs_M_list(tmp_path):
    assert main(["sweep", "--config", write(tmp_path, {"network": COMPLETE})]) == 2


def test_verify_single_suite(tmp_path):
    out = tmp_path / "v.json"
    assert main(["verify", "--suite", "reduction", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["passed"] and rep["checks"] and all("/reduction/" in c["name"] for c in rep["checks"])


def test_verify_lists_validation_with_override(tmp_path):
    cfg = write(tmp_path, {"network": {"family": "complete", "M": 3, "p": 1.0, "q": -1.0}, "override": True})
    out = tmp_path / "v.json"
    assert main(["verify", "--config", cfg, "--suite", "equivalence", "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert "negative-rate" in [i["code"] for i in rep["validation"]["issues"]]


def test_verify_bounds_only(tmp_path):
    out = tmp_path / "v.json"
    main(["verify", "--suite", "bounds", "--out", str(out)])
    names = [c["name"] for c in json.loads(out.read_text())["checks"]]
    assert names and all("/bounds/" in n for n in names)


def test_module_entry_point(tmp_path):
    cfg = write(tmp_path, {"network": COMPLETE, "grid": 3})
    res = subprocess.run([sys.executable, "-m", "netspread", "limit", "--config", cfg], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.splitlines()[0] == "t,f"
    # full round-trip precision
    assert all(float(format(float(x), ".17g")) == float(x) for x in res.stdout.splitlines()[2].split(","))


def test_usage_error_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["master", "--backend", "nope"])
    assert exc.value.code == 2
