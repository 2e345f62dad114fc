"""Dataset ingestion, synthetic data and feature CSV I/O."""
from __future__ import annotations

import csv
import json
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .graph import Graph, ShiftKind, eigendecompose, load_graph, make_shift, random_graph
from .scattering import ScatteringConfig, scatter

log = logging.getLogger(__name__)


@dataclass(eq=False)
class Sample:
    id: str
    label: int
    signal: np.ndarray  # (C, N, T)


@dataclass(eq=False)
class Dataset:
    samples: list
    n_spatial: int
    n_time: int
    channels: int
    pad_lengths: dict = field(default_factory=dict)
    graph: Optional[Graph] = None

    def __post_init__(self):
        if not self.samples:
            raise ValueError("empty dataset")
        for s in self.samples:
            if s.signal.shape != (self.channels, self.n_spatial, self.n_time):
                raise ValueError(f"sample {s.id} has shape {s.signal.shape}")
            if s.label < 0:
                raise ValueError(f"sample {s.id} has negative label {s.label}")

    @property
    def labels(self) -> np.ndarray:
        return np.array([s.label for s in self.samples], dtype=int)

    @property
    def ids(self) -> list:
        return [s.id for s in self.samples]

    def __len__(self):
        return len(self.samples)


def _read_sample_csv(path: Path, C: int, N: int) -> dict:
    entries = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["channel", "node", "time", "value"]:
            raise ValueError(f"{path}:1: expected header 'channel,node,time,value'")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                if len(row) != 4:
                    raise ValueError("expected 4 fields")
                c, n, t, v = int(row[0]), int(row[1]), int(row[2]), float(row[3])
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed row {row!r} ({exc})") from None
            if not 0 <= n < N:
                raise ValueError(f"{path}:{lineno}: node index {n} out of range for N={N}")
            if not 0 <= c < C:
                raise ValueError(f"{path}:{lineno}: channel {c} out of range for C={C}")
            if t < 0:
                raise ValueError(f"{path}:{lineno}: negative time index {t}")
            entries[(c, n, t)] = v
    return entries


def load_dataset(manifest_path) -> Dataset:
    """Load a manifest plus one long-format CSV per sample.

    Clips are zero-padded at the end to the longest clip in the dataset; the
    pad length of each sample is kept in ``Dataset.pad_lengths``.
    """
    manifest_path = Path(manifest_path)
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    root = manifest_path.parent
    N = int(manifest["n_spatial"])
    C = int(manifest.get("channels", 1))
    items = manifest.get("samples", [])
    if not items:
        raise ValueError("empty dataset")
    raw = []
    for item in items:
        entries = _read_sample_csv(root / item["path"], C, N)
        length = 1 + max((t for (_, _, t) in entries), default=-1)
        raw.append((str(item["id"]), int(item["label"]), entries, length))
    T = max(r[3] for r in raw)
    if T < 1:
        raise ValueError("dataset has no time samples")
    samples, pads = [], {}
    for sid, label, entries, length in raw:
        X = np.zeros((C, N, T))
        for (c, n, t), v in entries.items():
            X[c, n, t] = v
        pads[sid] = T - length
        if T - length:
            log.info("sample %s padded by %d frames", sid, T - length)
        samples.append(Sample(sid, label, X))
    graph = load_graph(root / manifest["graph"]) if manifest.get("graph") else None
    return Dataset(samples, N, T, C, pads, graph)


def save_dataset(ds: Dataset, out_dir) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    items = []
    for s in ds.samples:
        name = f"{s.id}.csv"
        with open(out / name, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["channel", "node", "time", "value"])
            C, N, T = s.signal.shape
            for c in range(C):
                for n in range(N):
                    for t in range(T):
                        w.writerow([c, n, t, repr(float(s.signal[c, n, t]))])
        items.append({"id": s.id, "label": int(s.label), "path": name})
    manifest = {"n_spatial": ds.n_spatial, "channels": ds.channels, "samples": items}
    if ds.graph is not None:
        with open(out / "graph.json", "w") as fh:
            json.dump(ds.graph.to_json(), fh)
        manifest["graph"] = "graph.json"
    path = out / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=1)
    return path


def generate_synthetic_dataset(
    n_samples: int,
    N: int,
    T: int,
    C: int = 1,
    n_classes: int = 2,
    seed: int = 0,
    noise: float = 0.1,
    n_modes: int = 4,
) -> Dataset:
    """Smooth graph signals oscillating at a class-specific temporal frequency.

    Every sample draws a fresh low graph-frequency spatial pattern (a random
    mix of the ``n_modes`` smoothest Laplacian eigenvectors of a random
    graph) and a random phase, so per-node energy carries no class
    information; only the temporal frequency does.
    """
    if min(n_samples, N, T, C, n_classes) < 1:
        raise ValueError("synthetic dataset parameters must be positive")
    rng = np.random.default_rng(seed)
    graph = random_graph(N, min(1.0, 3.0 / max(N, 1)), rng)
    basis = eigendecompose(make_shift(graph, ShiftKind.NORMALIZED_LAPLACIAN)).eigvecs[:, : min(n_modes, N)]
    # cycles per frame, spread across the band the temporal wavelets resolve
    freqs = np.linspace(0.06, 0.36, n_classes) if n_classes > 1 else np.array([0.1])
    t = np.arange(T)
    samples = []
    for i in range(n_samples):
        label = i % n_classes
        X = np.empty((C, N, T))
        for c in range(C):
            pattern = basis @ rng.standard_normal(basis.shape[1])
            pattern *= np.sqrt(N) / max(np.linalg.norm(pattern), 1e-12)
            wave = np.cos(2 * np.pi * freqs[label] * t + rng.uniform(0, 2 * np.pi))
            X[c] = np.outer(pattern, wave) + noise * rng.standard_normal((N, T))
        samples.append(Sample(f"s{i:05d}", label, X))
    return Dataset(samples, N, T, C, {s.id: 0 for s in samples}, graph)


def worker_count() -> int:
    env = os.environ.get("STGST_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def transform_dataset(ds: Dataset, cfg: ScatteringConfig, banks: dict, workers: Optional[int] = None) -> np.ndarray:
    """Feature matrix with one row per sample, in dataset order.

    Samples are independent, so the thread count never changes the result.
    """
    workers = worker_count() if workers is None else workers

    def one(s):
        try:
            return scatter(s.signal, cfg, banks).vector
        except ValueError as exc:
            raise ValueError(f"sample {s.id}: {exc}") from exc

    if workers <= 1 or len(ds) == 1:
        rows = [one(s) for s in ds.samples]
    else:
        with ThreadPoolExecutor(workers) as pool:
            rows = list(pool.map(one, ds.samples))
    return np.vstack(rows)


def write_features_csv(path, ids, labels, F) -> None:
    F = np.asarray(F)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sample_id", "label"] + [f"f{i}" for i in range(F.shape[1])])
        for sid, label, row in zip(ids, labels, F):
            w.writerow([sid, int(label)] + [repr(float(v)) for v in row])


def read_features_csv(path):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header[:2] != ["sample_id", "label"]:
            raise ValueError(f"{path}: expected header starting with sample_id,label")
        ids, labels, rows = [], [], []
        for r in reader:
            ids.append(r[0])
            labels.append(int(r[1]))
            rows.append([float(v) for v in r[2:]])
    return ids, np.array(labels, dtype=int), np.array(rows, dtype=float).reshape(len(ids), -1)
