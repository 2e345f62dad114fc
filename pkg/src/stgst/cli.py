"""``stgst`` command line interface."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import experiments
from .classify import classify
from .data import (
    generate_synthetic_dataset,
    load_dataset,
    read_features_csv,
    save_dataset,
    transform_dataset,
    write_features_csv,
)
from .graph import ShiftKind, eigendecompose, kinect20_skeleton, load_graph, make_shift
from .scattering import ScatteringConfig, build_banks, feature_dimension
from . import stability as st

VERIFY_CHECKS = ("frame", "theorem1", "theorem2", "permutation", "spectral-equivalence", "wavelet-stability")


def _cmd_graph_build(args):
    g = load_graph(args.edges)
    S = make_shift(g, args.shift)
    out = {"kind": S.kind.value, "n": S.n, "symmetric": S.symmetric, "matrix": S.matrix.tolist()}
    if args.eig and S.symmetric:
        S = eigendecompose(S)
        out["eigvals"] = S.eigvals.tolist()
        out["eigvecs"] = S.eigvecs.tolist()
    text = json.dumps(out)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)
    return 0


def _cmd_dims(args):
    cfg = ScatteringConfig.load(args.config)
    print(feature_dimension(cfg, args.n, args.t, args.channels))
    return 0


def _spatial_graph(cfg, fallback=None):
    if cfg.spatial_graph:
        return load_graph(cfg.spatial_graph)
    return fallback if fallback is not None else kinect20_skeleton()


def _cmd_transform(args):
    cfg = ScatteringConfig.load(args.config)
    ds = load_dataset(args.manifest)
    graph = load_graph(args.graph) if args.graph else _spatial_graph(cfg, ds.graph)
    if graph.n != ds.n_spatial:
        raise SystemExit(f"spatial graph has {graph.n} nodes, dataset has {ds.n_spatial}")
    banks = build_banks(cfg, graph, ds.n_time)
    F = transform_dataset(ds, cfg, banks)
    write_features_csv(args.out, ds.ids, ds.labels, F)
    return 0


def _verify_reports(check, cfg, args):
    graph = _spatial_graph(cfg)
    T = int(cfg.extra.get("T", args.t))
    N = graph.n
    seed = args.seed
    X = np.random.default_rng([seed, 999]).standard_normal((N, T))
    if check == "spectral-equivalence":
        return st.check_spectral_equivalence(args.trials, seed)
    banks = build_banks(cfg, graph, T)
    S = experiments.spatial_shift_for(cfg, graph)
    if check == "frame":
        return [st.verify_frame_sandwich(banks["spatial"], banks["temporal"], args.trials, seed)]
    if check == "theorem1":
        snrs = args.snr or [10.0, 20.0, 30.0]
        return [st.signal_stability_suite(cfg, banks, X, snrs, args.trials, seed)]
    if check == "theorem2":
        eps = args.epsilon or [0.01, 0.05, 0.1]
        zero = st.check_structure_stability(cfg, banks, X, st.StructurePerturbation(np.zeros((N, N)), 0.0), S)
        zero.check = "theorem2-zero"
        return [zero, st.structure_stability_suite(cfg, banks, X, S, eps, args.trials, seed)]
    if check == "permutation":
        reports = []
        for k in range(args.trials):
            perm = st.trial_rng(seed, k).permutation(N)
            reports.append(st.check_permutation_invariance(cfg, banks, X, perm, S))
        return [st.worst_case(reports, "permutation", seed, args.trials)]
    if check == "wavelet-stability":
        eps = args.epsilon or [0.1, 0.05, 0.025]
        reports = []
        for k in range(args.trials):
            r = st.trial_rng(seed, k).uniform(0, 1, N)
            r[0] = 0.0
            direction = 1 - min(eps) * r
            reports.append(
                st.wavelet_stability_sweep(S, banks["spatial"], banks["temporal"], direction, eps)
            )
        return [st.worst_case(reports, "wavelet-stability", seed, args.trials)]
    raise ValueError(check)


def _cmd_verify(args):
    cfg = ScatteringConfig.load(args.config) if args.config else ScatteringConfig(
        spatial_family="itersine", temporal_family="itersine"
    )
    reports = _verify_reports(args.check, cfg, args)
    out = []
    for r in reports:
        d = r.to_json()
        d["seed"] = args.seed
        d["trials"] = args.trials
        out.append(d)
    print(json.dumps(out, indent=1))
    return 0 if all(r.passed for r in reports) else 1


def _parse_sizes(text):
    sizes = []
    for part in text.split(","):
        n, t = part.lower().split("x")
        sizes.append((int(n), int(t)))
    return sizes


def _cmd_bench(args):
    base = ScatteringConfig.load(args.config) if args.config else ScatteringConfig()
    cfgs = []
    for mode in args.modes.split(","):
        d = base.to_dict()
        if mode == "separable":
            d["mode"] = "separable"
        elif mode.startswith("joint-"):
            d.update(mode="joint", product=mode.split("-", 1)[1], J=base.Js * base.Jt)
        else:
            raise SystemExit(f"unknown mode {mode!r}")
        cfgs.append(ScatteringConfig.from_dict(d))
    result = experiments.bench_separable_vs_joint(_parse_sizes(args.sizes), cfgs, args.repeats, args.seed)
    for note in result.notes:
        print(note, file=sys.stderr)
    text = result.to_csv()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def _cmd_classify(args):
    _, labels, F = read_features_csv(args.features)
    acc = classify(F, labels, args.method, args.k, args.train_fraction, args.seed)
    print(f"{acc:.6f}")
    return 0


def _cmd_synth(args):
    ds = generate_synthetic_dataset(
        args.samples, args.n, args.t, args.channels, args.classes, args.seed, args.noise
    )
    path = save_dataset(ds, args.out_dir)
    print(path)
    return 0


def _cmd_plot_data(args):
    if args.kind == "training_ratio_sweep":
        _, labels, F = read_features_csv(args.features)
        ratios = [round(0.1 * i, 1) for i in range(1, 10)]
        text = experiments.training_ratio_sweep(F, labels, ratios, args.k, args.seed)
    else:
        cfg = ScatteringConfig.load(args.config)
        if args.kind == "snr_sweep":
            ds = load_dataset(args.manifest)
            graph = _spatial_graph(cfg, ds.graph)
            banks = build_banks(cfg, graph, ds.n_time)
            snrs = [float("inf"), 30.0, 20.0, 10.0, 0.0]
            text = experiments.snr_sweep(ds, cfg, banks, snrs, args.k, 0.5, args.seed)
        else:
            graph = _spatial_graph(cfg)
            T = int(cfg.extra.get("T", args.t))
            banks = build_banks(cfg, graph, T)
            X = np.random.default_rng([args.seed, 999]).standard_normal((graph.n, T))
            S = experiments.spatial_shift_for(cfg, graph)
            text = experiments.epsilon_sweep(cfg, banks, X, S, [0.0, 0.01, 0.02, 0.05, 0.1, 0.2], args.seed)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="stgst", description="Spatio-temporal graph scattering transform")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("graph", help="graph utilities")
    gsub = g.add_subparsers(dest="graph_command", required=True)
    gb = gsub.add_parser("build", help="derive a shift matrix from an edge list")
    gb.add_argument("--edges", required=True)
    gb.add_argument("--shift", default="adjacency", choices=[k.value for k in ShiftKind])
    gb.add_argument("--eig", action="store_true", help="include the eigendecomposition")
    gb.add_argument("--out")
    gb.set_defaults(func=_cmd_graph_build)

    d = sub.add_parser("dims", help="feature dimension of a config")
    d.add_argument("--config", required=True)
    d.add_argument("--n", type=int, required=True)
    d.add_argument("--t", type=int, required=True)
    d.add_argument("--channels", type=int, default=1)
    d.set_defaults(func=_cmd_dims)

    t = sub.add_parser("transform", help="scattering features for a dataset")
    t.add_argument("--config", required=True)
    t.add_argument("--manifest", required=True)
    t.add_argument("--graph", help="spatial graph JSON (overrides config and manifest)")
    t.add_argument("--out", required=True)
    t.set_defaults(func=_cmd_transform)

    v = sub.add_parser("verify", help="numerical certification checks")
    v.add_argument("check", choices=VERIFY_CHECKS)
    v.add_argument("--config")
    v.add_argument("--epsilon", type=float, action="append")
    v.add_argument("--snr", type=float, action="append")
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--t", type=int, default=32, help="frames when the config has no T")
    v.set_defaults(func=_cmd_verify)

    b = sub.add_parser("bench", help="separable vs joint timing")
    b.add_argument("--modes", default="separable,joint-strong")
    b.add_argument("--sizes", default="10x50,15x70,20x100")
    b.add_argument("--repeats", type=int, default=5)
    b.add_argument("--config")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--out")
    b.set_defaults(func=_cmd_bench)

    c = sub.add_parser("classify", help="k-NN / nearest-centroid accuracy on a feature CSV")
    c.add_argument("--features", required=True)
    c.add_argument("--method", default="knn", choices=["knn", "nearest_centroid"])
    c.add_argument("--k", type=int, default=5)
    c.add_argument("--train-fraction", type=float, default=0.5)
    c.add_argument("--seed", type=int, default=0)
    c.set_defaults(func=_cmd_classify)

    s = sub.add_parser("synth", help="write a synthetic dataset")
    s.add_argument("--classes", type=int, default=2)
    s.add_argument("--samples", type=int, default=200)
    s.add_argument("--n", type=int, default=20)
    s.add_argument("--t", type=int, default=64)
    s.add_argument("--channels", type=int, default=1)
    s.add_argument("--noise", type=float, default=0.1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir", required=True)
    s.set_defaults(func=_cmd_synth)

    pd = sub.add_parser("plot-data", help="CSV series for accuracy and stability plots")
    pd.add_argument("kind", choices=["training_ratio_sweep", "snr_sweep", "epsilon_sweep"])
    pd.add_argument("--features")
    pd.add_argument("--config")
    pd.add_argument("--manifest")
    pd.add_argument("--k", type=int, default=5)
    pd.add_argument("--t", type=int, default=32)
    pd.add_argument("--seed", type=int, default=0)
    pd.add_argument("--out")
    pd.set_defaults(func=_cmd_plot_data)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"stgst: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
