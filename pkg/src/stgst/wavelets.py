"""Graph wavelet filter banks and spatio-temporal filtering.

Three wavelet families are provided, all materialized as dense operators:

* ``geometric``: diffusion wavelets ``S^(2^(j-1)) - S^(2^j)`` on a lazy random walk.
* ``monic_cubic``: dilations of a piecewise cubic band-pass kernel.
* ``itersine``: overlapping sine-of-cosine windows forming a tight frame.

A ``custom_poly`` family wraps user supplied polynomial filters.
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .graph import ShiftKind, ShiftMatrix, eigendecompose

MAX_GEOMETRIC_J = 62


class Family(str, enum.Enum):
    GEOMETRIC = "geometric"
    MONIC_CUBIC = "monic_cubic"
    ITERSINE = "itersine"
    CUSTOM_POLY = "custom_poly"


@dataclass(frozen=True)
class PolynomialFilter:
    """Coefficients ``h_0 .. h_{K-1}`` of ``sum_k h_k S^k``."""

    coeffs: tuple

    def __post_init__(self):
        c = tuple(float(v) for v in self.coeffs)
        if len(c) < 1:
            raise ValueError("polynomial filter needs at least one coefficient")
        if not any(c):
            raise ValueError("polynomial filter has only zero coefficients")
        object.__setattr__(self, "coeffs", c)

    @property
    def K(self) -> int:
        return len(self.coeffs)

    def __call__(self, lam):
        return np.polynomial.polynomial.polyval(lam, self.coeffs)

    def derivative(self, lam):
        d = np.polynomial.polynomial.polyder(self.coeffs)
        return np.polynomial.polynomial.polyval(lam, d)


@dataclass(frozen=True, eq=False)
class Kernel:
    """Scalar spectral response with an (optional) analytic derivative."""

    f: Callable[[np.ndarray], np.ndarray]
    df: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, lam):
        return self.f(np.asarray(lam, dtype=float))

    def derivative(self, lam, step: float = 1e-5):
        lam = np.asarray(lam, dtype=float)
        if self.df is not None:
            return self.df(lam)
        return (self.f(lam + step) - self.f(lam - step)) / (2 * step)


@dataclass(frozen=True, eq=False)
class FilterBank:
    family: Family
    filters: tuple
    frame_lower: float
    frame_upper: float
    kernels: Optional[tuple] = None
    domain: Optional[tuple] = None
    lipschitz_C: Optional[float] = None
    spectral_D: Optional[float] = None
    params: dict = field(default_factory=dict)

    @property
    def J(self) -> int:
        return len(self.filters)

    @property
    def n(self) -> int:
        return self.filters[0].shape[0]

    def stack(self) -> np.ndarray:
        return np.stack(self.filters)


# ---------------------------------------------------------------- kernels


def monic_cubic(lam):
    """Base band-pass kernel: linear below 1, cubic on [1, 2], ``2/lam`` above 2."""
    lam = np.asarray(lam, dtype=float)
    cubic = -5 + 11 * lam - 6 * lam**2 + lam**3
    with np.errstate(divide="ignore"):
        tail = 2.0 / np.where(lam > 2, lam, 1.0)
    return np.where(lam < 1, lam, np.where(lam <= 2, cubic, tail))


def monic_cubic_derivative(lam):
    lam = np.asarray(lam, dtype=float)
    cubic = 11 - 12 * lam + 3 * lam**2
    tail = -2.0 / np.where(lam > 2, lam, 1.0) ** 2
    return np.where(lam < 1, 1.0, np.where(lam <= 2, cubic, tail))


def itersine(u, j: int, J: int):
    """Itersine window ``j`` (1-based) of ``J`` in the unit-spaced variable ``u``.

    Windows are centred at ``(j-1)/2`` with support ``[j/2 - 1, j/2]``. The
    squared responses sum to one on ``[0, (J-1)/2]``; the first and last
    windows are held at 1 outside that interval so the bank stays tight for
    any argument.
    """
    u = np.asarray(u, dtype=float)
    c = (j - 1) / 2
    val = np.sin(0.5 * np.pi * np.cos(np.pi * (u - c)) ** 2)
    val = np.where((u >= j / 2 - 1) & (u <= j / 2), val, 0.0)
    if j == 1:
        val = np.where(u < 0, 1.0, val)
    if j == J:
        val = np.where(u > (J - 1) / 2, 1.0, val)
    return val


def itersine_derivative(u, j: int, J: int):
    u = np.asarray(u, dtype=float)
    c = (j - 1) / 2
    w = np.pi * (u - c)
    d = -0.5 * np.pi**2 * np.sin(2 * w) * np.cos(0.5 * np.pi * np.cos(w) ** 2)
    d = np.where((u >= j / 2 - 1) & (u <= j / 2), d, 0.0)
    if j == 1:
        d = np.where(u < 0, 0.0, d)
    if j == J:
        d = np.where(u > (J - 1) / 2, 0.0, d)
    return d


def _monic_kernel(t: float, lo: float) -> Kernel:
    return Kernel(
        lambda lam: monic_cubic(t * (lam - lo)),
        lambda lam: t * monic_cubic_derivative(t * (lam - lo)),
    )


def _itersine_kernel(j: int, J: int, a: float, lo: float) -> Kernel:
    return Kernel(
        lambda lam: itersine(a * (lam - lo), j, J),
        lambda lam: a * itersine_derivative(a * (lam - lo), j, J),
    )


def _poly_kernel(p: PolynomialFilter) -> Kernel:
    return Kernel(p, p.derivative)


# ------------------------------------------------------------- filtering


def _matrix(S) -> np.ndarray:
    return S.matrix if isinstance(S, ShiftMatrix) else np.asarray(S, dtype=float)


def spectral_filter(S: ShiftMatrix, kernel) -> np.ndarray:
    """Materialize ``V diag(kernel(lambda)) V^T``."""
    if not S.has_eig:
        raise ValueError("spectral filtering needs an eigendecomposition")
    V = S.eigvecs
    return (V * kernel(S.eigvals)[None, :]) @ V.T


def polynomial_matrix(S, p: PolynomialFilter) -> np.ndarray:
    """Dense ``sum_k h_k S^k`` by Horner's rule."""
    M = _matrix(S)
    n = M.shape[0]
    out = p.coeffs[-1] * np.eye(n)
    for c in reversed(p.coeffs[:-1]):
        out = M @ out
        out[np.diag_indices(n)] += c
    return out


def apply_separable(X, H, G) -> np.ndarray:
    """Separable spatio-temporal filtering ``H X G^T``."""
    X = np.asarray(X, dtype=float)
    H = np.asarray(H, dtype=float)
    G = np.asarray(G, dtype=float)
    if X.ndim != 2:
        raise ValueError(f"X must be N x T, got shape {X.shape}")
    N, T = X.shape
    if H.shape != (N, N) or G.shape != (T, T):
        raise ValueError(f"filter shapes {H.shape}, {G.shape} do not match X of shape {X.shape}")
    return H @ X @ G.T


def apply_joint(x, filt: PolynomialFilter, S) -> np.ndarray:
    """Joint filtering ``sum_k h_k S^k x`` with one mat-vec per coefficient.

    ``x`` may also be a 2-D array whose columns are filtered together.
    """
    M = _matrix(S)
    x = np.asarray(x, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1] or x.shape[0] != M.shape[0]:
        raise ValueError(f"signal of length {x.shape[0]} does not match shift of shape {M.shape}")
    y = filt.coeffs[-1] * x
    for c in reversed(filt.coeffs[:-1]):
        y = M @ y + c * x
    return y


# ------------------------------------------------------------ constants


def estimate_frame_bounds(filters) -> tuple:
    """Frame bounds ``(A, B)`` from the extreme eigenvalues of ``sum_j H_j^T H_j``."""
    if isinstance(filters, FilterBank):
        filters = filters.filters
    gram = sum(H.T @ H for H in filters)
    ev = np.linalg.eigvalsh(0.5 * (gram + gram.T))
    return float(np.sqrt(max(ev[0], 0.0))), float(np.sqrt(max(ev[-1], 0.0)))


def estimate_kernel_constants(bank: FilterBank, grid_size: int = 1000) -> tuple:
    """Integral-Lipschitz constant C and spectral bound D of a bank.

    Both are maxima over the filters and a uniform grid on ``bank.domain``:
    ``C = max |lam h'(lam)|`` and ``D = max |h(lam)|``. Banks without a scalar
    kernel (diffusion wavelets on an asymmetric walk) return ``C = None`` and
    fall back to ``D = max_j ||H_j||_2``.
    """
    if grid_size < 100:
        raise ValueError("grid_size must be at least 100")
    if bank.kernels is None or bank.domain is None:
        D = max(float(np.linalg.norm(H, 2)) for H in bank.filters)
        return None, D
    lo, hi = bank.domain
    grid = np.linspace(lo, hi, grid_size)
    step = 1e-5 * max(hi - lo, 1.0)
    C = max(float(np.max(np.abs(grid * k.derivative(grid, step)))) for k in bank.kernels)
    D = max(float(np.max(np.abs(k(grid)))) for k in bank.kernels)
    return C, D


def _finish(family, filters, kernels, domain, params, grid_size=1000) -> FilterBank:
    filters = tuple(np.ascontiguousarray(F) for F in filters)
    for F in filters:
        F.setflags(write=False)
    A, B = estimate_frame_bounds(filters)
    bank = FilterBank(family, filters, A, B, kernels, domain, params=params)
    C, D = estimate_kernel_constants(bank, grid_size)
    return FilterBank(family, filters, A, B, kernels, domain, C, D, params)


def _spectrum_range(S: ShiftMatrix) -> tuple:
    lam = S.eigvals
    return float(lam[0]), float(lam[-1])


# --------------------------------------------------------------- builders


def build_geometric_bank(S: ShiftMatrix, J: int) -> FilterBank:
    """Diffusion wavelets ``S^(2^(j-1)) (I - S^(2^(j-1)))`` for ``j = 1..J``."""
    if J < 1:
        raise ValueError(f"J must be >= 1, got {J}")
    if J > MAX_GEOMETRIC_J:
        raise ValueError(f"J={J} overflows the diffusion exponent 2^J")
    if S.kind is not ShiftKind.LAZY_RANDOM_WALK:
        warnings.warn(f"geometric wavelets expect a lazy random walk, got {S.kind}", stacklevel=2)
    M = S.matrix
    power = M.copy()
    filters = []
    for _ in range(J):
        squared = power @ power
        filters.append(power - squared)
        power = squared
    kernels = domain = None
    if S.symmetric:
        if not S.has_eig:
            S = eigendecompose(S)
        kernels = tuple(
            _poly_kernel(PolynomialFilter(_geometric_coeffs(j))) for j in range(1, J + 1)
        )
        domain = _spectrum_range(S)
    return _finish(Family.GEOMETRIC, filters, kernels, domain, {"J": J})


def _geometric_coeffs(j: int) -> list:
    a, b = 2 ** (j - 1), 2**j
    c = [0.0] * (b + 1)
    c[a], c[b] = 1.0, -1.0
    return c


def build_spectral_bank(
    S: ShiftMatrix,
    family,
    J: int,
    scale_range: Sequence[float] = (2.0, 40.0),
    domain: Optional[Sequence[float]] = None,
) -> FilterBank:
    """Monic Cubic or Itersine bank over a symmetric shift.

    The kernels are placed on ``domain`` (defaults to the spectrum range of
    ``S``). Passing the domain of an existing bank reproduces the same scalar
    kernels on a different shift, which is what perturbation analysis needs.

    Monic Cubic scales are log-spaced so that ``t_1 * width = scale_range[0]``
    and ``t_J * width = scale_range[1]``, with eigenvalues shifted to start at
    zero. Itersine maps the domain affinely onto ``[0, (J-1)/2]``.
    """
    family = Family(family)
    if J < 1:
        raise ValueError(f"J must be >= 1, got {J}")
    if not S.symmetric:
        raise ValueError("spectral wavelets need a symmetric shift")
    if not S.has_eig:
        S = eigendecompose(S)
    lo, hi = (float(domain[0]), float(domain[1])) if domain is not None else _spectrum_range(S)
    width = hi - lo
    if family is Family.MONIC_CUBIC:
        if J < 2:
            raise ValueError("monic_cubic banks need J >= 2")
        if width <= 0:
            raise ValueError("monic_cubic scale placement needs a non-constant spectrum")
        scales = np.geomspace(scale_range[0], scale_range[1], J) / width
        kernels = tuple(_monic_kernel(float(t), lo) for t in scales)
        params = {"J": J, "scale_range": tuple(scale_range)}
    elif family is Family.ITERSINE:
        a = (J - 1) / 2 / width if width > 0 else 0.0
        kernels = tuple(_itersine_kernel(j, J, a, lo) for j in range(1, J + 1))
        params = {"J": J}
    else:
        raise ValueError(f"{family.value} is not a spectral family")
    filters = [spectral_filter(S, k) for k in kernels]
    filters = [0.5 * (F + F.T) for F in filters]
    return _finish(family, filters, kernels, (lo, hi), params)


def build_polynomial_bank(S: ShiftMatrix, coeff_lists) -> FilterBank:
    """Bank of explicit polynomial filters; kernels are exact on symmetric shifts."""
    polys = [p if isinstance(p, PolynomialFilter) else PolynomialFilter(tuple(p)) for p in coeff_lists]
    if not polys:
        raise ValueError("custom polynomial bank needs at least one filter")
    filters = [polynomial_matrix(S, p) for p in polys]
    kernels = tuple(_poly_kernel(p) for p in polys)
    if S.symmetric:
        if not S.has_eig:
            S = eigendecompose(S)
        domain = _spectrum_range(S)
    else:
        ev = np.linalg.eigvals(S.matrix).real
        domain = (float(ev.min()), float(ev.max()))
    return _finish(
        Family.CUSTOM_POLY, filters, kernels, domain, {"coeffs": [p.coeffs for p in polys]}
    )


def build_bank(S: ShiftMatrix, family, J: int = None, **kw) -> FilterBank:
    family = Family(family)
    if family is Family.GEOMETRIC:
        return build_geometric_bank(S, J)
    if family is Family.CUSTOM_POLY:
        return build_polynomial_bank(S, kw["coeffs"])
    return build_spectral_bank(S, family, J, **kw)


def rebuild_bank(bank: FilterBank, S: ShiftMatrix) -> FilterBank:
    """Same family, scales and scalar kernels as ``bank``, evaluated on a new shift."""
    if bank.family is Family.GEOMETRIC:
        return build_geometric_bank(S, bank.params["J"])
    if bank.family is Family.CUSTOM_POLY:
        return build_polynomial_bank(S, bank.params["coeffs"])
    kw = {"domain": bank.domain}
    if bank.family is Family.MONIC_CUBIC:
        kw["scale_range"] = bank.params["scale_range"]
    return build_spectral_bank(S, bank.family, bank.params["J"], **kw)


def coefficient_matrices(h, g) -> tuple:
    """Coefficient grids of a length-3 strong-product filter and a separable one.

    Entry ``(i, j)`` multiplies ``Lambda_s^i (x) Lambda_t^j``. ``C1`` expands
    ``sum_k h_k (ls*lt + ls + lt)^k`` and ``C2 = h g^T``.
    """
    h = np.asarray(h, dtype=float)
    g = np.asarray(g, dtype=float)
    if h.shape != (3,) or g.shape != (3,):
        raise ValueError("coefficient matrices are defined for length-3 filters")
    h0, h1, h2 = h
    C1 = np.array(
        [
            [h0, h1, h2],
            [h1, h1 + 2 * h2, 2 * h2],
            [h2, 2 * h2, h2],
        ]
    )
    return C1, np.outer(h, g)
