"""Spatio-temporal graph scattering transform.

The transform grows a scattering tree: the root holds the input signal and
every node at depth < L-1 spawns one child per wavelet (a pair ``(j1, j2)``
in separable mode, a single ``j`` in joint mode) by filtering followed by
the absolute value. Each node is pooled into a feature vector.

Feature layout is fixed: channel-major, then breadth-first over tree depth,
then lexicographic in the (1-based) path within a depth.
"""
from __future__ import annotations

import enum
import itertools
import json
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .graph import Graph, ShiftKind, build_line_graph, eigendecompose, make_shift
from .product import ProductKind, product, product_shift
from .wavelets import Family, FilterBank, build_bank

# parents filtered per batch; fixed so results never depend on scheduling
_CHUNK = 64


class Pooling(str, enum.Enum):
    SPATIAL_AVG = "spatial_avg"
    TEMPORAL_AVG = "temporal_avg"
    FULL_AVG = "full_avg"


@dataclass
class ScatteringConfig:
    mode: str = "separable"
    L: int = 3
    Js: int = 2
    Jt: int = 2
    J: int = 4
    product: Optional[str] = None
    spatial_family: str = "geometric"
    temporal_family: str = "geometric"
    joint_family: str = "geometric"
    pooling: str = "spatial_avg"
    linear_bypass: bool = False
    keep_tree_signals: bool = False
    spatial_shift: Optional[str] = None
    temporal_shift: Optional[str] = None
    monic_cubic_scale_range: tuple = (2.0, 40.0)
    spatial_coeffs: Optional[list] = None
    temporal_coeffs: Optional[list] = None
    joint_coeffs: Optional[list] = None
    spatial_graph: Optional[str] = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in ("separable", "joint"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.L < 1:
            raise ValueError("L must be >= 1")
        if self.mode == "separable":
            if self.Js < 1 or self.Jt < 1:
                raise ValueError("Js and Jt must be >= 1")
            Family(self.spatial_family)
            Family(self.temporal_family)
        else:
            if self.J < 1:
                raise ValueError("J must be >= 1")
            self.product = ProductKind(self.product or "strong").value
            Family(self.joint_family)
        Pooling(self.pooling)
        self.monic_cubic_scale_range = tuple(self.monic_cubic_scale_range)

    @property
    def n_children(self) -> int:
        return self.Js * self.Jt if self.mode == "separable" else self.J

    @classmethod
    def from_dict(cls, d: dict) -> "ScatteringConfig":
        known = set(cls.__dataclass_fields__) - {"extra"}
        kw = {k: v for k, v in d.items() if k in known}
        kw["extra"] = {k: v for k, v in d.items() if k not in known}
        return cls(**kw)

    @classmethod
    def load(cls, path) -> "ScatteringConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(d.pop("extra"))
        d["monic_cubic_scale_range"] = list(self.monic_cubic_scale_range)
        return d


@dataclass(eq=False)
class FeatureMap:
    """Pooled scattering features.

    ``phi`` has shape ``(C, n_entries, d)``; entry ``i`` belongs to ``paths[i]``.
    """

    paths: list
    phi: np.ndarray
    signals: Optional[list] = None

    @property
    def entries(self):
        return [(p, self.phi[:, i, :].reshape(-1)) for i, p in enumerate(self.paths)]

    @property
    def vector(self) -> np.ndarray:
        return self.phi.reshape(-1)

    @property
    def total_dim(self) -> int:
        return self.phi.size


def tree_size(J: int, L: int) -> int:
    return sum(J**l for l in range(L))


def feature_dimension(cfg: ScatteringConfig, N: int, T: int, C: int = 1) -> int:
    per_entry = {Pooling.SPATIAL_AVG: T, Pooling.TEMPORAL_AVG: N, Pooling.FULL_AVG: 1}
    return C * per_entry[Pooling(cfg.pooling)] * tree_size(cfg.n_children, cfg.L)


def pool(Z, mode) -> np.ndarray:
    """Average a node signal over space, time or both.

    Works on a single ``N x T`` matrix or a stack of shape ``(M, N, T)``.
    """
    Z = np.asarray(Z, dtype=float)
    mode = Pooling(mode)
    if mode is Pooling.SPATIAL_AVG:
        return Z.mean(axis=-2)
    if mode is Pooling.TEMPORAL_AVG:
        return Z.mean(axis=-1)
    out = Z.mean(axis=(-2, -1))
    return out[..., None] if Z.ndim > 2 else out


def nonlinearity_apply(Z, bypass: bool = False) -> np.ndarray:
    return np.asarray(Z) if bypass else np.abs(Z)


def tree_paths(Js: int, Jt: Optional[int], L: int) -> list:
    """Canonical node order: breadth-first, lexicographic within a depth."""
    steps = (
        list(itertools.product(range(1, Js + 1), range(1, Jt + 1)))
        if Jt is not None
        else list(range(1, Js + 1))
    )
    paths = [()]
    layer = [()]
    for _ in range(1, L):
        layer = [p + (s,) for p in layer for s in steps]
        paths.extend(layer)
    return paths


def _as_channels(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 2:
        X = X[None]
    if X.ndim != 3:
        raise ValueError(f"signal must be N x T or C x N x T, got shape {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ValueError("signal has non-finite entries")
    return X


def _grow(root, children_of, L: int, pooling: Pooling, keep: bool):
    """Breadth-first expansion shared by the separable and joint transforms."""
    feats = [pool(root[None], pooling)]
    kept = [root[None]] if keep else None
    layer = root[None]
    for depth in range(1, L):
        last = depth == L - 1
        nxt = []
        for start in range(0, layer.shape[0], _CHUNK):
            kids = children_of(layer[start : start + _CHUNK])
            feats.append(pool(kids, pooling))
            if not last or keep:
                nxt.append(kids)
        if nxt:
            layer = np.concatenate(nxt)
            if keep:
                kept.append(layer)
    return np.concatenate(feats), kept


def scatter_separable(
    X, cfg: ScatteringConfig, spatial_bank: FilterBank, temporal_bank: FilterBank
) -> FeatureMap:
    """Separable transform: children ``|H_j1 Z G_j2^T|`` for every ``(j1, j2)``."""
    X = _as_channels(X)
    C, N, T = X.shape
    if spatial_bank.J != cfg.Js or temporal_bank.J != cfg.Jt:
        raise ValueError(
            f"banks have {spatial_bank.J}x{temporal_bank.J} filters, config expects {cfg.Js}x{cfg.Jt}"
        )
    if spatial_bank.n != N or temporal_bank.n != T:
        raise ValueError(
            f"signal is {N}x{T} but banks act on {spatial_bank.n} nodes and {temporal_bank.n} time stamps"
        )
    Hs = spatial_bank.stack()
    GsT = temporal_bank.stack().transpose(0, 2, 1)
    pooling = Pooling(cfg.pooling)

    def children_of(Z):
        A = np.matmul(Hs[None], Z[:, None])  # (P, Js, N, T)
        Y = np.matmul(A[:, :, None], GsT[None, None])  # (P, Js, Jt, N, T)
        return nonlinearity_apply(Y.reshape(-1, N, T), cfg.linear_bypass)

    phis, kept = [], []
    for c in range(C):
        phi, signals = _grow(X[c], children_of, cfg.L, pooling, cfg.keep_tree_signals)
        phis.append(phi)
        kept.append(signals)
    paths = tree_paths(cfg.Js, cfg.Jt, cfg.L)
    return FeatureMap(paths, np.stack(phis), kept if cfg.keep_tree_signals else None)


def scatter_joint(X, cfg: ScatteringConfig, joint_bank: FilterBank) -> FeatureMap:
    """Joint transform on a product graph; node signals are length-NT vectors."""
    X = _as_channels(X)
    C, N, T = X.shape
    if joint_bank.n != N * T:
        raise ValueError(f"joint bank acts on {joint_bank.n} nodes, signal has N*T={N * T}")
    if joint_bank.J != cfg.J:
        raise ValueError(f"joint bank has {joint_bank.J} filters, config expects {cfg.J}")
    HsT = joint_bank.stack().transpose(0, 2, 1)
    pooling = Pooling(cfg.pooling)

    def children_of(Z):
        z = Z.reshape(Z.shape[0], N * T)
        Y = np.matmul(z[None], HsT)  # (J, P, NT)
        Y = Y.transpose(1, 0, 2).reshape(-1, N, T)
        return nonlinearity_apply(Y, cfg.linear_bypass)

    phis, kept = [], []
    for c in range(C):
        phi, signals = _grow(X[c], children_of, cfg.L, pooling, cfg.keep_tree_signals)
        phis.append(phi)
        kept.append(signals)
    paths = tree_paths(cfg.J, None, cfg.L)
    return FeatureMap(paths, np.stack(phis), kept if cfg.keep_tree_signals else None)


def scatter(X, cfg: ScatteringConfig, banks: dict) -> FeatureMap:
    if cfg.mode == "separable":
        return scatter_separable(X, cfg, banks["spatial"], banks["temporal"])
    return scatter_joint(X, cfg, banks["joint"])


# ------------------------------------------------------------ bank setup


def default_shift_kind(family) -> ShiftKind:
    if Family(family) is Family.GEOMETRIC:
        return ShiftKind.LAZY_RANDOM_WALK
    return ShiftKind.NORMALIZED_LAPLACIAN


def _modality_bank(g: Graph, family, J, shift_kind, coeffs, cfg) -> FilterBank:
    S = make_shift(g, shift_kind or default_shift_kind(family))
    family = Family(family)
    if S.symmetric:
        S = eigendecompose(S)
    kw = {}
    if family is Family.MONIC_CUBIC:
        kw["scale_range"] = cfg.monic_cubic_scale_range
    if family is Family.CUSTOM_POLY:
        if not coeffs:
            raise ValueError("custom_poly family needs coefficient lists in the config")
        kw["coeffs"] = coeffs
    return build_bank(S, family, J, **kw)


def build_banks(cfg: ScatteringConfig, spatial_graph: Graph, T: int) -> dict:
    """Materialize the filter banks a config needs for an ``N``-node graph and ``T`` frames.

    The temporal graph is always the line graph on ``T`` stamps. In joint mode,
    geometric banks diffuse on the lazy walk of the product graph; the other
    families use the product of the two factor shifts, whose eigenbasis is the
    Kronecker product of the factor bases.
    """
    line = build_line_graph(T)
    if cfg.mode == "separable":
        return {
            "spatial": _modality_bank(
                spatial_graph, cfg.spatial_family, cfg.Js, cfg.spatial_shift, cfg.spatial_coeffs, cfg
            ),
            "temporal": _modality_bank(
                line, cfg.temporal_family, cfg.Jt, cfg.temporal_shift, cfg.temporal_coeffs, cfg
            ),
        }
    family = Family(cfg.joint_family)
    if family is Family.GEOMETRIC:
        pg = product(spatial_graph, line, cfg.product)
        S = make_shift(pg.as_graph(), cfg.spatial_shift or ShiftKind.LAZY_RANDOM_WALK)
    else:
        kind = cfg.spatial_shift or default_shift_kind(family)
        Ss = eigendecompose(make_shift(spatial_graph, kind))
        St = eigendecompose(make_shift(line, cfg.temporal_shift or kind))
        S = product_shift(Ss, St, cfg.product)
    kw = {}
    if family is Family.MONIC_CUBIC:
        kw["scale_range"] = cfg.monic_cubic_scale_range
    if family is Family.CUSTOM_POLY:
        if not cfg.joint_coeffs:
            raise ValueError("custom_poly family needs joint_coeffs in the config")
        kw["coeffs"] = cfg.joint_coeffs
    return {"joint": build_bank(S, family, cfg.J, **kw)}
