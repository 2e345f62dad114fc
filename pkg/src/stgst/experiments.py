"""Separable-vs-joint timing benchmark and sweep data for plots."""
from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .classify import classify
from .data import Dataset, Sample, transform_dataset
from .graph import eigendecompose, make_shift, random_graph
from .product import MAX_JOINT_NODES
from .scattering import ScatteringConfig, build_banks, default_shift_kind, scatter, tree_size
from .stability import StructurePerturbation, SignalPerturbation, check_structure_stability, trial_rng


@dataclass
class BenchResult:
    rows: list = field(default_factory=list)  # (N, T, mode, seconds, flops)
    notes: list = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(["N", "T", "mode", "wall_time_seconds", "flops_estimate"])
        for N, T, mode, sec, flops in self.rows:
            w.writerow([N, T, mode, f"{sec:.6e}", int(flops)])
        return buf.getvalue()

    def times(self, mode: str) -> list:
        return [(N, T, sec) for N, T, m, sec, _ in self.rows if m == mode]


def flops_estimate(cfg: ScatteringConfig, N: int, T: int) -> float:
    """Multiply-adds for one pass: filter applications times cost per application."""
    applications = tree_size(cfg.n_children, cfg.L) - 1
    if cfg.mode == "separable":
        return 2.0 * applications * (N * N * T + N * T * T)
    return 2.0 * applications * (N * T) ** 2


def _mode_name(cfg: ScatteringConfig) -> str:
    return "separable" if cfg.mode == "separable" else f"joint-{cfg.product}"


def bench_separable_vs_joint(sizes, cfgs, repeats: int = 5, seed: int = 0) -> BenchResult:
    """Median wall time of one scattering pass per config and size, banks prebuilt."""
    result = BenchResult()
    for N, T in sizes:
        rng = np.random.default_rng([seed, N, T])
        g = random_graph(N, min(1.0, 3.0 / N), rng)
        X = rng.standard_normal((N, T))
        for cfg in cfgs:
            mode = _mode_name(cfg)
            if cfg.mode == "joint" and N * T > MAX_JOINT_NODES:
                result.notes.append(f"skipped {mode} at N={N}, T={T}: N*T exceeds {MAX_JOINT_NODES}")
                continue
            banks = build_banks(cfg, g, T)
            scatter(X, cfg, banks)
            samples = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                scatter(X, cfg, banks)
                samples.append(time.perf_counter() - t0)
            sec = max(float(np.median(samples)), 1e-12)
            result.rows.append((N, T, mode, sec, flops_estimate(cfg, N, T)))
    return result


def loglog_slope(sizes, seconds) -> float:
    """Least-squares slope of log(time) against log(N*T)."""
    x = np.log([N * T for N, T in sizes])
    return float(np.polyfit(x, np.log(seconds), 1)[0])


# ------------------------------------------------------------ plot data


def _csv(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    return buf.getvalue()


def training_ratio_sweep(features, labels, ratios, k: int = 5, seed: int = 0) -> str:
    rows = [(float(r), classify(features, labels, "knn", k, r, seed)) for r in ratios]
    return _csv(["x", "accuracy"], rows)


def snr_sweep(ds: Dataset, cfg: ScatteringConfig, banks: dict, snrs, k=5, train_fraction=0.5, seed=0) -> str:
    """Accuracy with additive noise at each SNR (dB); ``inf`` means no noise."""
    labels = ds.labels
    rows = []
    for snr in snrs:
        if np.isinf(snr):
            noisy = ds
        else:
            samples = []
            for i, s in enumerate(ds.samples):
                d = SignalPerturbation.from_snr(s.signal, snr, trial_rng(seed, i)).delta
                samples.append(Sample(s.id, s.label, s.signal + d))
            noisy = replace(ds, samples=samples)
        F = transform_dataset(noisy, cfg, banks)
        rows.append((float(snr), classify(F, labels, "knn", k, train_fraction, seed)))
    return _csv(["x", "accuracy"], rows)


def epsilon_sweep(cfg: ScatteringConfig, banks: dict, X, spatial_shift, epsilons, seed=0) -> str:
    """Structure-stability lhs/rhs along one fixed diagonal perturbation direction."""
    N = spatial_shift.n
    positive = [e for e in epsilons if e > 0]
    spread = min(positive) if positive else 0.0
    r = trial_rng(seed, 0).uniform(0, 1, N)
    r[0] = 0.0
    direction = 1 - spread * r
    rows = []
    for e in epsilons:
        p = StructurePerturbation(np.diag(e / 2 * direction), e)
        rep = check_structure_stability(cfg, banks, X, p, spatial_shift)
        rows.append((float(e), rep.lhs, rep.rhs))
    return _csv(["x", "lhs", "rhs"], rows)


def spatial_shift_for(cfg: ScatteringConfig, graph):
    S = make_shift(graph, cfg.spatial_shift or default_shift_kind(cfg.spatial_family))
    return eigendecompose(S) if S.symmetric else S


def emit_plot_data(kind: str, **params) -> str:
    """Dispatch to one of the sweep generators by name."""
    sweeps = {
        "training_ratio_sweep": training_ratio_sweep,
        "snr_sweep": snr_sweep,
        "epsilon_sweep": epsilon_sweep,
    }
    if kind not in sweeps:
        raise ValueError(f"unknown plot data kind {kind!r}")
    return sweeps[kind](**params)
