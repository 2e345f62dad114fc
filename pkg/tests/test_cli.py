import csv
import io
import json

import numpy as np
import pytest

from stgst.cli import main
from stgst.classify import classify
from stgst.experiments import (
    bench_separable_vs_joint,
    emit_plot_data,
    epsilon_sweep,
    flops_estimate,
    loglog_slope,
    snr_sweep,
    spatial_shift_for,
    training_ratio_sweep,
)
from stgst.data import generate_synthetic_dataset, transform_dataset
from stgst.graph import kinect20_skeleton
from stgst.scattering import ScatteringConfig, build_banks


@pytest.fixture
def cfg_path(tmp_path):
    p = tmp_path / "cfg.json"
    p.write_text(json.dumps({"mode": "separable", "Js": 2, "Jt": 2, "L": 2, "spatial_family": "itersine"}))
    return p


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    return code, capsys.readouterr().out


def test_graph_build(tmp_path, capsys):
    edges = tmp_path / "e.json"
    edges.write_text(json.dumps({"n": 3, "edges": [[0, 1, 1], [1, 2, 1]]}))
    code, out = run(capsys, "graph", "build", "--edges", edges, "--shift", "normalized_laplacian", "--eig")
    d = json.loads(out)
    assert code == 0 and d["symmetric"]
    np.testing.assert_allclose(d["eigvals"], [0, 1, 2], atol=1e-12)


def test_dims(cfg_path, capsys):
    code, out = run(capsys, "dims", "--config", cfg_path, "--n", 20, "--t", 8)
    assert code == 0 and int(out) == 5 * 8


def test_pipeline_is_deterministic(tmp_path, cfg_path, capsys):
    data = tmp_path / "data"
    assert run(capsys, "synth", "--samples", 12, "--n", 20, "--t", 16, "--seed", 4, "--out-dir", data)[0] == 0
    outs = []
    for name in ("a.csv", "b.csv"):
        code, _ = run(capsys, "transform", "--config", cfg_path, "--manifest", data / "manifest.json", "--out", tmp_path / name)
        assert code == 0
        outs.append((tmp_path / name).read_bytes())
    assert outs[0] == outs[1]
    accs = [run(capsys, "classify", "--features", tmp_path / "a.csv", "--k", 3)[1] for _ in range(2)]
    assert accs[0] == accs[1] and 0.0 <= float(accs[0]) <= 1.0


@pytest.mark.parametrize("check", ["frame", "theorem1", "theorem2", "permutation", "spectral-equivalence", "wavelet-stability"])
def test_verify_checks(check, capsys):
    code, out = run(capsys, "verify", check, "--trials", 2, "--seed", 3, "--t", 12)
    reports = json.loads(out)
    assert code == 0
    for r in reports:
        assert {"check", "lhs", "rhs", "margin", "pass", "seed", "trials"} <= set(r)
        assert r["pass"] and r["seed"] == 3 and r["trials"] == 2


def test_verify_epsilon_option(capsys):
    code, out = run(capsys, "verify", "theorem2", "--epsilon", 0.02, "--trials", 1, "--t", 8)
    reports = json.loads(out)
    assert code == 0 and reports[0]["lhs"] == 0.0 and reports[1]["details"]["epsilons"] == [0.02]


def test_errors_exit_nonzero(tmp_path, capsys):
    assert main(["dims", "--config", str(tmp_path / "missing.json"), "--n", "3", "--t", "3"]) == 2
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"L": 0}))
    assert main(["dims", "--config", str(bad), "--n", "3", "--t", "3"]) == 2


def test_bench_cli(tmp_path, capsys):
    out = tmp_path / "b.csv"
    code, _ = run(capsys, "bench", "--sizes", "4x6,5x8", "--repeats", 1, "--out", out)
    rows = list(csv.DictReader(io.StringIO(out.read_text())))
    assert code == 0 and {r["mode"] for r in rows} == {"separable", "joint-strong"}
    assert all(float(r["wall_time_seconds"]) > 0 for r in rows)


def test_plot_data_cli(tmp_path, cfg_path, capsys):
    code, out = run(capsys, "plot-data", "epsilon_sweep", "--config", cfg_path, "--t", 8)
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and float(rows[0]["x"]) == 0.0 and float(rows[0]["lhs"]) == 0.0


# ------------------------------------------------------------ experiments


def test_bench_result_csv_and_guard():
    cfgs = [ScatteringConfig(L=2), ScatteringConfig(mode="joint", J=4, L=2)]
    res = bench_separable_vs_joint([(3, 4), (80, 70)], cfgs[1:], repeats=1)
    assert len(res.rows) == 1 and "skipped" in res.notes[0]
    assert res.to_csv().splitlines()[0] == "N,T,mode,wall_time_seconds,flops_estimate"
    assert flops_estimate(cfgs[0], 10, 50) < flops_estimate(cfgs[1], 10, 50)


def test_loglog_slope_exact():
    sizes = [(1, 10), (2, 10), (4, 10)]
    assert loglog_slope(sizes, [3 * (n * t) ** 2 for n, t in sizes]) == pytest.approx(2.0)


def test_sweeps():
    ds = generate_synthetic_dataset(20, 6, 16, seed=0)
    cfg = ScatteringConfig(Js=2, Jt=2, L=2)
    banks = build_banks(cfg, ds.graph, 16)
    F = transform_dataset(ds, cfg, banks)
    text = training_ratio_sweep(F, ds.labels, [0.3, 0.5], k=3)
    assert text.splitlines()[0] == "x,accuracy" and len(text.splitlines()) == 3
    snr = list(csv.DictReader(io.StringIO(snr_sweep(ds, cfg, banks, [float("inf"), 10.0], k=3))))
    assert float(snr[0]["accuracy"]) == classify(F, ds.labels, "knn", 3, 0.5, 0)
    with pytest.raises(ValueError):
        emit_plot_data("nope")


def test_epsilon_sweep_zero_row():
    cfg = ScatteringConfig(Js=2, Jt=2, L=2, spatial_family="itersine", temporal_family="itersine")
    g = kinect20_skeleton()
    banks = build_banks(cfg, g, 8)
    X = np.random.default_rng(0).standard_normal((20, 8))
    rows = list(csv.DictReader(io.StringIO(epsilon_sweep(cfg, banks, X, spatial_shift_for(cfg, g), [0.0, 0.05]))))
    assert float(rows[0]["lhs"]) == 0.0
    assert float(rows[1]["lhs"]) <= float(rows[1]["rhs"])
