import json
import os

import numpy as np
import pytest

from mixlab.cli import main


def _run(args):
    rc = main(args)
    return 0 if rc is None else rc


def test_build_example1(tmp_path):
    out = str(tmp_path / "out")
    assert _run(["--out-dir", out, "build", "--example", "1", "--n", "10"]) == 0
    files = os.listdir(out)
    assert any(f.endswith(".edges") for f in files)
    assert any(f.endswith(".roles.json") for f in files)
    kernel = [f for f in files if f.endswith(".kernel.json")]
    assert kernel
    with open(os.path.join(out, kernel[0])) as fh:
        summary = json.load(fh)
    assert summary  # row sums were validated at build time


def test_build_seeded_byte_identical(tmp_path):
    outs = []
    for name in ("o1", "o2"):
        out = str(tmp_path / name)
        assert _run(["--seed", "7", "--out-dir", out, "build",
                     "--example", "4", "--n", "2", "--L", "2"]) == 0
        blob = b""
        for f in sorted(os.listdir(out)):
            with open(os.path.join(out, f), "rb") as fh:
                blob += f.encode() + fh.read()
        outs.append(blob)
    assert outs[0] == outs[1]


def test_build_odd_depth_exit_code(tmp_path):
    rc = _run(["--out-dir", str(tmp_path), "build",
               "--example", "4", "--n", "3"])
    assert rc == 2


def test_distances_csv_monotone_and_l1_identity(tmp_path):
    out = str(tmp_path / "out")
    assert _run(["--out-dir", out, "distances", "--example", "basic",
                 "--n", "8", "--metric", "tv", "separation", "lp1",
                 "--horizon", "120"]) == 0
    curves = {}
    for f in os.listdir(out):
        if not f.endswith(".csv"):
            continue
        with open(os.path.join(out, f)) as fh:
            rows = fh.read().strip().splitlines()[1:]
        vals = [float(r.split(",")[1]) for r in rows]
        curves[f] = vals
    tv = next(v for k, v in curves.items() if "tv" in k)
    sep = next(v for k, v in curves.items() if "separation" in k)
    l1 = next(v for k, v in curves.items() if "lp" in k)
    assert all(b <= a + 1e-10 for a, b in zip(tv, tv[1:]))
    assert all(b <= a + 1e-10 for a, b in zip(sep, sep[1:]))
    assert np.abs(np.array(l1) - 2 * np.array(tv)).max() < 1e-12


def test_distances_empty_metric_list_is_noop(tmp_path):
    out = str(tmp_path / "out")
    assert _run(["--out-dir", out, "distances", "--example", "basic",
                 "--n", "6", "--metric"]) == 0
    assert not [f for f in os.listdir(out)] if os.path.isdir(out) else True


def test_verify_report_schema(tmp_path):
    report = str(tmp_path / "report.json")
    assert _run(["--out-dir", str(tmp_path), "verify", "all",
                 "--chains", "3", "--out", report]) == 0
    with open(report) as fh:
        rows = json.load(fh)
    assert rows
    for row in rows:
        assert set(row) >= {"check_id", "params", "slack", "pass"}
        assert row["pass"]


def test_verify_only_filter(tmp_path):
    report = str(tmp_path / "report.json")
    assert _run(["--out-dir", str(tmp_path), "verify", "all", "--chains", "8",
                 "--only", "cheeger", "--out", report]) == 0
    with open(report) as fh:
        rows = json.load(fh)
    assert rows
    assert all(r["check_id"].startswith("cheeger") for r in rows)


def test_sweep_outputs(tmp_path):
    out = str(tmp_path / "out")
    assert _run(["--out-dir", out, "sweep", "--example", "basic",
                 "--n-grid", "15", "30", "--metric", "tv"]) == 0
    csvs = [f for f in os.listdir(out) if f.endswith(".csv")]
    jsons = [f for f in os.listdir(out) if f.endswith(".json")]
    assert csvs and jsons
    with open(os.path.join(out, jsons[0])) as fh:
        rep = json.load(fh)
    assert rep["verdict"] in ("cutoff-trend", "no-cutoff-trend",
                              "inconclusive")
    with open(os.path.join(out, csvs[0])) as fh:
        header = fh.readline().strip()
    assert header.split(",") == ["n", "eps", "ratio", "window"]


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"example": "basic", "n": 6}))
    out = str(tmp_path / "out")
    # config supplies the example; the explicit --n flag wins over the config
    assert _run(["--config", str(cfg), "--out-dir", out, "build",
                 "--example", "basic", "--n", "8"]) == 0
    assert any("basic" in f for f in os.listdir(out))


def test_ld_psi_csv(tmp_path):
    out = str(tmp_path / "out")
    assert _run(["--out-dir", out, "ld", "psi", "--s", "1", "6", "9"]) == 0
    csvs = [f for f in os.listdir(out) if f.endswith(".csv")]
    assert csvs
    with open(os.path.join(out, csvs[0])) as fh:
        lines = fh.read().strip().splitlines()
    vals = {float(r.split(",")[0]): float(r.split(",")[1])
            for r in lines[1:]}
    assert vals[6.0] == pytest.approx(0.0, abs=1e-9)
    assert vals[1.0] == pytest.approx(np.log(3.0), abs=1e-8)
