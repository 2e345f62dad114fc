"""Spatial/temporal graphs, graph shifts and the space-major flattening rule."""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass, replace
from typing import Iterable, Optional

import numpy as np


class ShiftKind(str, enum.Enum):
    ADJACENCY = "adjacency"
    NORMALIZED_ADJACENCY = "normalized_adjacency"
    LAZY_RANDOM_WALK = "lazy_random_walk"
    NORMALIZED_LAPLACIAN = "normalized_laplacian"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected weighted graph stored as a dense adjacency matrix."""

    n: int
    adjacency: np.ndarray

    def __post_init__(self):
        A = _frozen(self.adjacency)
        if A.shape != (self.n, self.n):
            raise ValueError(f"adjacency must be {self.n}x{self.n}, got {A.shape}")
        if not np.all(np.isfinite(A)):
            raise ValueError("adjacency has non-finite entries")
        if not np.array_equal(A, A.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(A < 0):
            raise ValueError("negative edge weights are not supported")
        if np.any(np.diag(A) != 0):
            raise ValueError("self-loops are not allowed")
        object.__setattr__(self, "adjacency", A)

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=0)

    def to_json(self) -> dict:
        i, j = np.nonzero(np.triu(self.adjacency))
        edges = [[int(a), int(b), float(self.adjacency[a, b])] for a, b in zip(i, j)]
        return {"n": self.n, "edges": edges}


@dataclass(frozen=True, eq=False)
class ShiftMatrix:
    """A concrete graph shift, optionally carrying its eigendecomposition.

    ``eigvals`` are ascending and ``eigvecs`` holds the matching orthonormal
    eigenvectors as columns. Both are only available for symmetric shifts.
    """

    kind: ShiftKind
    matrix: np.ndarray
    symmetric: bool
    eigvals: Optional[np.ndarray] = None
    eigvecs: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))
        if self.eigvals is not None:
            object.__setattr__(self, "eigvals", _frozen(self.eigvals))
            object.__setattr__(self, "eigvecs", _frozen(self.eigvecs))

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def has_eig(self) -> bool:
        return self.eigvals is not None


def build_line_graph(T: int) -> Graph:
    """Path graph connecting consecutive time stamps."""
    if T < 1:
        raise ValueError(f"line graph needs T >= 1, got {T}")
    A = np.zeros((T, T))
    idx = np.arange(T - 1)
    A[idx, idx + 1] = 1.0
    A[idx + 1, idx] = 1.0
    return Graph(T, A)


def build_graph_from_edges(n: int, edges: Iterable) -> Graph:
    """Build a graph from ``(i, j, w)`` triples; a repeated edge keeps the last weight."""
    if n < 1:
        raise ValueError(f"node count must be positive, got {n}")
    A = np.zeros((n, n))
    for e in edges:
        i, j, w = int(e[0]), int(e[1]), float(e[2])
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
        if i == j:
            raise ValueError(f"self-loop at node {i}")
        if not w > 0:
            raise ValueError(f"edge ({i}, {j}) has non-positive weight {w}")
        A[i, j] = A[j, i] = w
    return Graph(n, A)


def load_graph(path) -> Graph:
    with open(path) as fh:
        doc = json.load(fh)
    return build_graph_from_edges(doc["n"], doc.get("edges", []))


# Kinect v1 joint order: hip_center, spine, shoulder_center, head, then
# left arm (4-7), right arm (8-11), left leg (12-15), right leg (16-19).
KINECT20_EDGES = [
    (0, 1), (1, 2), (2, 3),
    (2, 4), (4, 5), (5, 6), (6, 7),
    (2, 8), (8, 9), (9, 10), (10, 11),
    (0, 12), (12, 13), (13, 14), (14, 15),
    (0, 16), (16, 17), (17, 18), (18, 19),
]


def kinect20_skeleton() -> Graph:
    """20-joint skeleton tree in Kinect v1 joint order."""
    return build_graph_from_edges(20, [(i, j, 1.0) for i, j in KINECT20_EDGES])


def random_graph(n: int, p: float, rng: np.random.Generator, weighted: bool = False) -> Graph:
    """Erdos-Renyi graph with a spanning path added so no node is isolated."""
    upper = np.triu(rng.random((n, n)) < p, k=1).astype(float)
    idx = np.arange(n - 1)
    upper[idx, idx + 1] = 1.0
    if weighted:
        upper *= rng.uniform(0.5, 1.5, size=upper.shape)
    return Graph(n, upper + upper.T)


def _inv_or_zero(d: np.ndarray, power: float) -> np.ndarray:
    out = np.zeros_like(d)
    pos = d > 0
    out[pos] = d[pos] ** power
    return out


def make_shift(g: Graph, kind) -> ShiftMatrix:
    """Derive a graph shift from the adjacency.

    Isolated nodes get a zero entry in ``D^-1`` / ``D^-1/2``, so under the lazy
    random walk they keep half their mass on themselves.
    """
    kind = ShiftKind(kind)
    A = g.adjacency
    n = g.n
    if kind is ShiftKind.ADJACENCY:
        return ShiftMatrix(kind, A.copy(), True)
    if kind is ShiftKind.NORMALIZED_ADJACENCY:
        lmax = np.abs(np.linalg.eigvalsh(A)).max() if n else 0.0
        S = A / lmax if lmax > 0 else A.copy()
        return ShiftMatrix(kind, S, True)
    d = g.degrees
    if kind is ShiftKind.LAZY_RANDOM_WALK:
        S = 0.5 * (np.eye(n) + A * _inv_or_zero(d, -1.0)[None, :])
        return ShiftMatrix(kind, S, bool(np.array_equal(S, S.T)))
    dinv = _inv_or_zero(d, -0.5)
    S = np.eye(n) - dinv[:, None] * A * dinv[None, :]
    S = 0.5 * (S + S.T)
    return ShiftMatrix(kind, S, True)


def eigendecompose(s: ShiftMatrix) -> ShiftMatrix:
    """Return a copy of ``s`` with ascending eigenvalues and sign-fixed eigenvectors.

    Each eigenvector is flipped so that its largest-magnitude component is
    positive (the first such component on ties).
    """
    if not s.symmetric:
        raise ValueError("eigendecomposition requires a symmetric shift")
    lam, V = np.linalg.eigh(s.matrix)
    cols = np.arange(V.shape[1])
    lead = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[lead, cols])
    signs[signs == 0] = 1.0
    V = V * signs[None, :]
    return replace(s, eigvals=lam, eigvecs=V)


def flatten(Z: np.ndarray) -> np.ndarray:
    """Row-major (space-major) vectorization: entry (s, t) goes to s*T + t."""
    Z = np.asarray(Z)
    if Z.ndim != 2:
        raise ValueError(f"expected an N x T matrix, got shape {Z.shape}")
    return Z.reshape(-1).copy()


def unflatten(z: np.ndarray, N: int, T: int) -> np.ndarray:
    z = np.asarray(z)
    if z.ndim != 1 or z.size != N * T:
        raise ValueError(f"vector of length {z.size} cannot be reshaped to {N}x{T}")
    return z.reshape(N, T).copy()
