"""Numerical certification of frame and stability bounds of the scattering transform.

Each check returns a :class:`StabilityReport` comparing a measured quantity
(``lhs``) against a bound (``rhs``) built from the measured constants of the
banks actually in use, never from idealized values.
"""
from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .graph import ShiftKind, ShiftMatrix, eigendecompose, flatten, make_shift, random_graph
from .product import ProductKind, joint_eigenvalues, joint_fourier_basis, product_shift
from .scattering import Pooling, ScatteringConfig, scatter, tree_size
from .wavelets import FilterBank, PolynomialFilter, apply_joint, apply_separable, rebuild_bank

REPORT_RTOL = 1e-9
FRAME_RTOL = 1e-6
PERMUTATION_ATOL = 1e-10


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Generator for one Monte Carlo trial; independent of execution order."""
    return np.random.default_rng([int(seed), int(trial)])


@dataclass
class StabilityReport:
    check: str
    lhs: float
    rhs: float
    seed: Optional[int] = None
    trials: int = 1
    certifiable: bool = True
    details: dict = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        if not self.certifiable:
            return True
        return bool(self.lhs <= self.rhs * (1 + REPORT_RTOL) if self.rhs >= 0 else self.lhs <= self.rhs)

    @property
    def inputs_digest(self) -> str:
        parts = [f"{k}={v}" for k, v in sorted(self.details.items()) if not isinstance(v, (list, dict))]
        return f"{self.check}(seed={self.seed}, trials={self.trials}; " + ", ".join(parts) + ")"

    def to_json(self) -> dict:
        def num(v):
            return float(v) if np.isfinite(v) else None

        return {
            "check": self.check,
            "lhs": num(self.lhs),
            "rhs": num(self.rhs),
            "margin": num(self.margin),
            "pass": self.passed,
            "certifiable": self.certifiable,
            "seed": self.seed,
            "trials": self.trials,
            "details": json.loads(json.dumps(self.details, default=float)),
        }


def worst_case(reports, check, seed, trials, **details) -> StabilityReport:
    """Fold per-trial reports into the one with the smallest relative margin."""
    def slack(r):
        return r.margin / r.rhs if r.rhs > 0 else r.margin

    failed = [r for r in reports if not r.passed]
    worst = min(failed or reports, key=slack)
    details = {**worst.details, **details, "violations": len(failed)}
    return StabilityReport(check, worst.lhs, worst.rhs, seed, trials, worst.certifiable, details)


# ----------------------------------------------------------- perturbations


@dataclass(frozen=True, eq=False)
class SignalPerturbation:
    delta: np.ndarray

    @classmethod
    def from_snr(cls, X, snr_db: float, rng: np.random.Generator) -> "SignalPerturbation":
        """Gaussian noise rescaled so that ``10 log10(||X||^2 / ||delta||^2) = snr_db``."""
        X = np.asarray(X, dtype=float)
        raw = rng.standard_normal(X.shape)
        scale = np.linalg.norm(X) / np.linalg.norm(raw) * 10 ** (-snr_db / 20)
        return cls(raw * scale)


def snr_db(X, delta) -> float:
    return float(10 * np.log10(np.sum(np.square(X)) / np.sum(np.square(delta))))


@dataclass(frozen=True, eq=False)
class StructurePerturbation:
    """Relative perturbation ``S -> S + E^T S + S E`` with eigenvalue limits on ``E``.

    With eigenvalues sorted by magnitude, ``|m_N| <= eps/2`` and
    ``|m_i/m_N - 1| <= eps`` must hold. ``E = 0`` is accepted for any ``eps``.
    """

    E: np.ndarray
    epsilon: float

    def __post_init__(self):
        E = np.array(self.E, dtype=float)
        if E.ndim != 2 or E.shape[0] != E.shape[1]:
            raise ValueError("E must be square")
        if self.epsilon < 0:
            raise ValueError("epsilon must be non-negative")
        m = np.linalg.eigvals(E) if np.count_nonzero(E - np.diag(np.diag(E))) else np.diag(E)
        m = m[np.argsort(np.abs(m), kind="stable")]
        top = m[-1]
        if top != 0:
            tol = 1e-12
            if abs(top) > self.epsilon / 2 + tol:
                raise ValueError(f"largest eigenvalue magnitude {abs(top):.3g} exceeds eps/2={self.epsilon / 2:.3g}")
            spread = np.max(np.abs(m / top - 1))
            if spread > self.epsilon + tol:
                raise ValueError(f"eigenvalue spread {spread:.3g} exceeds eps={self.epsilon:.3g}")
        if not self.is_diagonal:
            warnings.warn("non-diagonal structure perturbations are experimental", stacklevel=2)
        E.setflags(write=False)
        object.__setattr__(self, "E", E)

    @property
    def is_diagonal(self) -> bool:
        E = np.asarray(self.E)
        return not np.count_nonzero(E - np.diag(np.diag(E)))


def diagonal_perturbation(N: int, epsilon: float, rng: np.random.Generator, spread=None) -> StructurePerturbation:
    """Random valid diagonal ``E``: largest entry ``+-eps/2``, the rest within ``spread``."""
    spread = epsilon if spread is None else spread
    r = rng.uniform(0, 1, N)
    r[rng.integers(N)] = 0.0
    sign = rng.choice([-1.0, 1.0])
    m = sign * epsilon / 2 * (1 - min(spread, 1.0) * r)
    return StructurePerturbation(np.diag(m), epsilon)


def perturb_structure(Ss: ShiftMatrix, p: StructurePerturbation) -> ShiftMatrix:
    S = Ss.matrix
    E = p.E
    if E.shape != S.shape:
        raise ValueError(f"E of shape {E.shape} does not match shift {S.shape}")
    Shat = S + E.T @ S + S @ E
    symmetric = bool(np.max(np.abs(Shat - Shat.T), initial=0.0) <= 1e-12)
    if symmetric:
        Shat = 0.5 * (Shat + Shat.T)
    return ShiftMatrix(Ss.kind, Shat, symmetric)


def as_permutation_matrix(P) -> np.ndarray:
    """Accept a permutation matrix or an index array ``pi`` (giving ``P = I[:, pi]``)."""
    P = np.asarray(P)
    if P.ndim == 1:
        n = P.size
        if sorted(P.tolist()) != list(range(n)):
            raise ValueError("index array is not a permutation")
        return np.eye(n)[:, P]
    P = P.astype(float)
    ok = (
        P.ndim == 2
        and P.shape[0] == P.shape[1]
        and np.all((P == 0) | (P == 1))
        and np.all(P.sum(axis=0) == 1)
        and np.all(P.sum(axis=1) == 1)
    )
    if not ok:
        raise ValueError("P is not a permutation matrix")
    return P


# ----------------------------------------------------------------- checks


def _frame_upper(cfg: ScatteringConfig, banks: dict) -> float:
    if cfg.mode == "separable":
        return banks["spatial"].frame_upper * banks["temporal"].frame_upper
    return banks["joint"].frame_upper


def _separable_energy(Hs, Gs, Z) -> float:
    Y = np.matmul(np.matmul(Hs[:, None], Z[None, None]), Gs.transpose(0, 2, 1)[None])
    return float(np.sum(np.square(Y)))


def verify_frame_sandwich(
    spatial_bank: FilterBank, temporal_bank: FilterBank, trials: int = 100, seed: int = 0
) -> StabilityReport:
    """Check ``A1^2 A2^2 ||Z||^2 <= sum ||H Z G^T||^2 <= B1^2 B2^2 ||Z||^2`` on random ``Z``.

    ``lhs`` is the worst excursion of the energy ratio outside the band
    (widened by a relative 1e-6), so a passing report has ``lhs <= 0``.
    """
    lo = (spatial_bank.frame_lower * temporal_bank.frame_lower) ** 2
    hi = (spatial_bank.frame_upper * temporal_bank.frame_upper) ** 2
    Hs, Gs = spatial_bank.stack(), temporal_bank.stack()
    N, T = spatial_bank.n, temporal_bank.n
    ratios = []
    for k in range(trials):
        Z = trial_rng(seed, k).standard_normal((N, T))
        ratios.append(_separable_energy(Hs, Gs, Z) / np.sum(Z**2))
    ratios = np.array(ratios)
    excess = np.maximum(ratios - hi * (1 + FRAME_RTOL), lo * (1 - FRAME_RTOL) - ratios)
    return StabilityReport(
        "frame",
        float(excess.max()),
        0.0,
        seed,
        trials,
        details={
            "lower": lo,
            "upper": hi,
            "min_ratio": float(ratios.min()),
            "max_ratio": float(ratios.max()),
        },
    )


def _require_spatial_avg(cfg):
    if Pooling(cfg.pooling) is not Pooling.SPATIAL_AVG:
        raise ValueError("stability bounds are stated for spatial_avg pooling")


def _dims(X):
    X = np.asarray(X)
    return X.shape[-2], X.shape[-1]


def check_signal_stability(cfg: ScatteringConfig, banks: dict, X, perturbation) -> StabilityReport:
    """Signal stability: normalized feature deviation against the frame-based bound.

    Multi-channel signals are handled by summing the per-channel bounds in
    quadrature, which keeps the same form with ``||delta||`` over all channels.
    """
    _require_spatial_avg(cfg)
    delta = perturbation.delta if isinstance(perturbation, SignalPerturbation) else np.asarray(perturbation)
    X = np.asarray(X, dtype=float)
    if delta.shape != X.shape:
        raise ValueError(f"perturbation shape {delta.shape} does not match signal {X.shape}")
    N, T = _dims(X)
    J, L = cfg.n_children, cfg.L
    B = _frame_upper(cfg, banks)
    nodes = tree_size(J, L)
    dev = scatter(X, cfg, banks).vector - scatter(X + delta, cfg, banks).vector
    lhs = np.linalg.norm(dev) / np.sqrt(T * nodes)
    growth = sum(B ** (2 * l) for l in range(L))
    rhs = np.sqrt(growth / nodes) * np.linalg.norm(delta) / np.sqrt(N * T)
    return StabilityReport(
        "theorem1", float(lhs), float(rhs), details={"B": B, "snr_db": snr_db(X, delta) if np.any(delta) else None}
    )


def signal_stability_suite(cfg, banks, X, snr_list: Sequence[float], trials: int, seed: int) -> StabilityReport:
    reports = []
    for k in range(trials):
        rng = trial_rng(seed, k)
        for snr in snr_list:
            reports.append(check_signal_stability(cfg, banks, X, SignalPerturbation.from_snr(X, snr, rng)))
    return worst_case(reports, "theorem1", seed, trials, snr_list=list(snr_list))


def structure_stability_bound(epsilon, C, D, B, N, T, J, L, x_norm) -> float:
    nodes = tree_size(J, L)
    growth = sum(l**2 * (B**2 * J) ** l for l in range(L))
    return float(epsilon * C * D / (B * np.sqrt(N * T)) * np.sqrt(growth / nodes) * x_norm)


def check_structure_stability(
    cfg: ScatteringConfig, banks: dict, X, p: StructurePerturbation, spatial_shift: ShiftMatrix
) -> StabilityReport:
    """Structure stability under ``S_s -> S_s + E^T S_s + S_s E``.

    The spatial bank is rebuilt on the perturbed shift with the same scalar
    kernels. Banks lacking an integral-Lipschitz constant, or with a vanishing
    frame bound, are reported as not certifiable.
    """
    _require_spatial_avg(cfg)
    if cfg.mode != "separable":
        raise ValueError("structure stability is checked for the separable transform")
    X = np.asarray(X, dtype=float)
    N, T = _dims(X)
    sb, tb = banks["spatial"], banks["temporal"]
    C, D = sb.lipschitz_C, tb.spectral_D
    B = _frame_upper(cfg, banks)
    J, L = cfg.n_children, cfg.L
    details = {"epsilon": p.epsilon, "C": C, "D": D, "B": B}

    Shat = perturb_structure(spatial_shift, p)
    perturbed = {"spatial": rebuild_bank(sb, Shat), "temporal": tb}
    dev = scatter(X, cfg, banks).vector - scatter(X, cfg, perturbed).vector
    lhs = float(np.linalg.norm(dev) / np.sqrt(T * tree_size(J, L)))
    if C is None or D is None or B < 1e-12:
        return StabilityReport("theorem2", lhs, np.inf, certifiable=False, details=details)
    rhs = structure_stability_bound(p.epsilon, C, D, B, N, T, J, L, np.linalg.norm(X))
    return StabilityReport("theorem2", lhs, rhs, details=details)


def structure_stability_suite(
    cfg, banks, X, spatial_shift, epsilons: Sequence[float], trials: int, seed: int
) -> StabilityReport:
    N = spatial_shift.n
    reports = []
    for k in range(trials):
        rng = trial_rng(seed, k)
        for eps in epsilons:
            p = diagonal_perturbation(N, eps, rng)
            reports.append(check_structure_stability(cfg, banks, X, p, spatial_shift))
    return worst_case(reports, "theorem2", seed, trials, epsilons=list(epsilons))


def check_permutation_invariance(
    cfg: ScatteringConfig, banks: dict, X, P, spatial_shift: ShiftMatrix
) -> StabilityReport:
    """Features of ``(S_s, X)`` against ``(P^T S_s P, P^T X)`` with banks rebuilt on the relabelled graph."""
    P = as_permutation_matrix(P)
    X = np.asarray(X, dtype=float)
    if P.shape[0] != spatial_shift.n:
        raise ValueError("permutation size does not match the spatial graph")
    Sp = ShiftMatrix(spatial_shift.kind, P.T @ spatial_shift.matrix @ P, spatial_shift.symmetric)
    permuted = dict(banks)
    permuted["spatial"] = rebuild_bank(banks["spatial"], Sp)
    Xp = np.einsum("ki,...kt->...it", P, X)
    dev = np.abs(scatter(X, cfg, banks).vector - scatter(Xp, cfg, permuted).vector)
    return StabilityReport("permutation", float(dev.max()), PERMUTATION_ATOL)


def check_wavelet_stability(
    spatial_bank: FilterBank,
    perturbed_bank: FilterBank,
    temporal_bank: FilterBank,
    epsilon: float,
    C: float,
    D: float,
    kappa: float = 0.0,
) -> StabilityReport:
    """Largest ``||H(S) (x) G - H(S_hat) (x) G||_2`` over filter pairs against ``eps C D + kappa eps^2``.

    Uses ``||A (x) B||_2 = ||A||_2 ||B||_2``.
    """
    dH = max(float(np.linalg.norm(a - b, 2)) for a, b in zip(spatial_bank.filters, perturbed_bank.filters))
    nG = max(float(np.linalg.norm(G, 2)) for G in temporal_bank.filters)
    lhs = dH * nG
    rhs = epsilon * C * D + kappa * epsilon**2
    return StabilityReport(
        "wavelet-stability", lhs, rhs, details={"epsilon": epsilon, "C": C, "D": D, "kappa": kappa}
    )


def wavelet_stability_sweep(
    spatial_shift: ShiftMatrix,
    spatial_bank: FilterBank,
    temporal_bank: FilterBank,
    direction: np.ndarray,
    epsilons: Sequence[float] = (0.1, 0.05, 0.025),
) -> StabilityReport:
    """Fit the quadratic remainder on the larger ``eps`` and test it on the smallest.

    ``direction`` is a diagonal (vector) with max magnitude 1 and relative
    spread no larger than ``min(epsilons)``; ``E = eps/2 * diag(direction)``.
    """
    C = spatial_bank.lipschitz_C
    D = temporal_bank.spectral_D
    if C is None:
        return StabilityReport("wavelet-stability", np.nan, np.inf, certifiable=False)
    eps = sorted(epsilons, reverse=True)
    devs = []
    for e in eps:
        p = StructurePerturbation(np.diag(e / 2 * np.asarray(direction)), e)
        Hhat = rebuild_bank(spatial_bank, perturb_structure(spatial_shift, p))
        devs.append(check_wavelet_stability(spatial_bank, Hhat, temporal_bank, e, C, D).lhs)
    fit = [(d - e * C * D) / e**2 for d, e in zip(devs[:-1], eps[:-1])]
    kappa = max(0.0, max(fit))
    report = StabilityReport(
        "wavelet-stability",
        devs[-1],
        eps[-1] * C * D + kappa * eps[-1] ** 2,
        details={"epsilons": eps, "deviations": devs, "kappa": kappa, "C": C, "D": D},
    )
    return report


def check_spectral_equivalence(trials: int = 10, seed: int = 0, max_size: int = 6) -> list:
    """Horner filtering on product shifts against the spectral form, plus ``H X G^T`` against ``(H (x) G) x``.

    Deviations are measured as max absolute error relative to ``max(1, |reference|)``.
    """
    worst = {kind: 0.0 for kind in ProductKind}
    worst_sep = 0.0
    for k in range(trials):
        rng = trial_rng(seed, k)
        N, T = rng.integers(2, max_size + 1, size=2)
        Ss = eigendecompose(make_shift(random_graph(int(N), 0.5, rng, weighted=True), ShiftKind.ADJACENCY))
        St = eigendecompose(make_shift(random_graph(int(T), 0.5, rng, weighted=True), ShiftKind.ADJACENCY))
        V, _ = joint_fourier_basis(Ss, St)
        x = rng.standard_normal(N * T)
        h = PolynomialFilter(tuple(rng.standard_normal(3)))
        for kind in ProductKind:
            S = product_shift(Ss, St, kind)
            lam = joint_eigenvalues(Ss.eigvals, St.eigvals, kind)
            ref = V @ (h(lam) * (V.T @ x))
            err = np.max(np.abs(apply_joint(x, h, S) - ref)) / max(1.0, np.max(np.abs(ref)))
            worst[kind] = max(worst[kind], float(err))
        X = rng.standard_normal((N, T))
        H = rng.standard_normal((N, N))
        G = rng.standard_normal((T, T))
        ref = np.kron(H, G) @ flatten(X)
        err = np.max(np.abs(flatten(apply_separable(X, H, G)) - ref)) / max(1.0, np.max(np.abs(ref)))
        worst_sep = max(worst_sep, float(err))
    reports = [
        StabilityReport(f"spectral-equivalence-{kind.value}", worst[kind], 1e-8, seed, trials)
        for kind in ProductKind
    ]
    reports.append(StabilityReport("separable-kronecker", worst_sep, 1e-10, seed, trials))
    return reports
