"""Kronecker, Cartesian and strong products of a spatial and a temporal graph.

Node (s, t) of the product sits at index ``s*T + t``, the same convention as
:func:`stgst.graph.flatten`, so every operator below acts on flattened
spatio-temporal signals directly.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .graph import Graph, ShiftMatrix

MAX_JOINT_NODES = 5000


class ProductKind(str, enum.Enum):
    KRONECKER = "kronecker"
    CARTESIAN = "cartesian"
    STRONG = "strong"


@dataclass(frozen=True, eq=False)
class ProductGraph:
    kind: ProductKind
    n_spatial: int
    n_time: int
    adjacency: np.ndarray

    def as_graph(self) -> Graph:
        return Graph(self.n_spatial * self.n_time, self.adjacency)


def _check_size(N: int, T: int):
    if N * T > MAX_JOINT_NODES:
        raise ValueError(
            f"joint product graph with N*T={N * T} exceeds the dense limit of {MAX_JOINT_NODES} nodes"
        )


def _combine(Ms: np.ndarray, Mt: np.ndarray, kind: ProductKind) -> np.ndarray:
    N, T = Ms.shape[0], Mt.shape[0]
    kron = np.kron(Ms, Mt)
    if kind is ProductKind.KRONECKER:
        return kron
    cart = np.kron(Ms, np.eye(T)) + np.kron(np.eye(N), Mt)
    if kind is ProductKind.CARTESIAN:
        return cart
    return kron + cart


def product(As: Graph, At: Graph, kind) -> ProductGraph:
    kind = ProductKind(kind)
    _check_size(As.n, At.n)
    A = _combine(As.adjacency, At.adjacency, kind)
    A.setflags(write=False)
    return ProductGraph(kind, As.n, At.n, A)


def joint_eigenvalues(lam_s: np.ndarray, lam_t: np.ndarray, kind) -> np.ndarray:
    """Joint spectrum in flatten order from the two factor spectra."""
    kind = ProductKind(kind)
    ls = np.asarray(lam_s)[:, None]
    lt = np.asarray(lam_t)[None, :]
    if kind is ProductKind.KRONECKER:
        out = ls * lt
    elif kind is ProductKind.CARTESIAN:
        out = ls + lt
    else:
        out = ls * lt + ls + lt
    return out.reshape(-1)


def joint_fourier_basis(Ss: ShiftMatrix, St: ShiftMatrix):
    """Shared Fourier basis ``V_s (x) V_t`` and the eigenvalue pairs in flatten order.

    Returns
    -------
    V : ndarray, shape (N*T, N*T)
    pairs : ndarray, shape (N*T, 2)
        Row ``s*T + t`` holds ``(lambda_s[s], lambda_t[t])``.
    """
    if not (Ss.has_eig and St.has_eig):
        raise ValueError("both shifts need an eigendecomposition")
    _check_size(Ss.n, St.n)
    V = np.kron(Ss.eigvecs, St.eigvecs)
    ls, lt = np.meshgrid(Ss.eigvals, St.eigvals, indexing="ij")
    pairs = np.column_stack([ls.reshape(-1), lt.reshape(-1)])
    return V, pairs


def product_shift(Ss: ShiftMatrix, St: ShiftMatrix, kind) -> ShiftMatrix:
    """Joint shift built from the two factor shifts with the product formula.

    When both factors carry eigendecompositions the joint one is assembled
    from them (sorted ascending) instead of decomposing the NT x NT matrix.
    """
    kind = ProductKind(kind)
    _check_size(Ss.n, St.n)
    S = _combine(Ss.matrix, St.matrix, kind)
    symmetric = Ss.symmetric and St.symmetric
    if symmetric and Ss.has_eig and St.has_eig:
        V, _ = joint_fourier_basis(Ss, St)
        lam = joint_eigenvalues(Ss.eigvals, St.eigvals, kind)
        order = np.argsort(lam, kind="stable")
        return ShiftMatrix(kind, S, True, lam[order], V[:, order])
    return ShiftMatrix(kind, S, symmetric)
