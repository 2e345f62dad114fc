import numpy as np
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_symmetric_shift
from stgst.graph import ShiftKind, ShiftMatrix, build_graph_from_edges, eigendecompose, make_shift, random_graph
from stgst.wavelets import (
    Family,
    FilterBank,
    Kernel,
    PolynomialFilter,
    apply_joint,
    apply_separable,
    build_bank,
    build_geometric_bank,
    build_polynomial_bank,
    build_spectral_bank,
    coefficient_matrices,
    estimate_frame_bounds,
    estimate_kernel_constants,
    itersine,
    monic_cubic,
    monic_cubic_derivative,
    polynomial_matrix,
    rebuild_bank,
)

K2 = build_graph_from_edges(2, [(0, 1, 1.0)])
P3 = build_graph_from_edges(3, [(0, 1, 1.0), (1, 2, 1.0)])


def identity_bank(n=3):
    return FilterBank(
        Family.CUSTOM_POLY, (np.eye(n),), 1.0, 1.0, (Kernel(lambda x: np.ones_like(x)),), (0.0, 2.0)
    )


# ------------------------------------------------------------- geometric


def test_geometric_k2_is_zero():
    bank = build_geometric_bank(make_shift(K2, "lazy_random_walk"), 2)
    assert bank.J == 2
    for H in bank.filters:
        np.testing.assert_allclose(H, np.zeros((2, 2)), atol=1e-15)
    assert (bank.frame_lower, bank.frame_upper) == (0.0, 0.0)


@pytest.mark.parametrize("J", [1, 3, 5])
def test_geometric_identity_is_zero(J):
    with pytest.warns(UserWarning):
        bank = build_geometric_bank(ShiftMatrix(ShiftKind.ADJACENCY, np.eye(4), True), J)
    assert all(not H.any() for H in bank.filters)


def test_geometric_p3_first_filter():
    S = make_shift(P3, "lazy_random_walk").matrix
    S2 = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            S2[i, j] = sum(S[i, k] * S[k, j] for k in range(3))
    H1 = build_geometric_bank(make_shift(P3, "lazy_random_walk"), 1).filters[0]
    np.testing.assert_allclose(H1, S - S2, atol=1e-15)


@pytest.mark.parametrize("J", [1, 2, 4, 6])
def test_geometric_telescopes(J):
    S = make_shift(random_graph(10, 0.3, np.random.default_rng(J)), "lazy_random_walk")
    bank = build_geometric_bank(S, J)
    total = sum(bank.filters)
    np.testing.assert_allclose(total, S.matrix - np.linalg.matrix_power(S.matrix, 2**J), atol=1e-12)
    assert bank.lipschitz_C is None and bank.spectral_D > 0


def test_geometric_bad_J():
    S = make_shift(K2, "lazy_random_walk")
    with pytest.raises(ValueError):
        build_geometric_bank(S, 0)
    with pytest.raises(ValueError):
        build_geometric_bank(S, 200)


# ------------------------------------------------------------ monic cubic


def test_monic_cubic_knots():
    assert monic_cubic(1.0) == pytest.approx(1.0)
    assert monic_cubic(2.0) == pytest.approx(1.0)
    assert -5 + 11 * 1 - 6 + 1 == 1 and -5 + 22 - 24 + 8 == 1
    assert 1.0 * monic_cubic_derivative(1.0) == pytest.approx(2.0)


def test_monic_cubic_derivative_matches_sympy():
    x = sympy.symbols("x")
    cubic = -5 + 11 * x - 6 * x**2 + x**3
    d = sympy.lambdify(x, sympy.diff(cubic, x))
    for v in np.linspace(1.0, 2.0, 7):
        assert monic_cubic_derivative(v) == pytest.approx(d(v))
    assert monic_cubic_derivative(3.0) == pytest.approx(-2 / 9)


def test_monic_cubic_bank_scales():
    S = random_symmetric_shift(12, 4)
    bank = build_spectral_bank(S, "monic_cubic", 4)
    lo, hi = bank.domain
    assert bank.J == 4
    # band-pass only: every kernel vanishes at the bottom of the spectrum
    assert bank.frame_lower == pytest.approx(0.0, abs=1e-7)
    assert bank.kernels[0](hi) == pytest.approx(monic_cubic(2.0))
    assert bank.kernels[-1](hi) == pytest.approx(monic_cubic(40.0))
    with pytest.raises(ValueError):
        build_spectral_bank(S, "monic_cubic", 1)


# -------------------------------------------------------------- itersine


@pytest.mark.parametrize("J", [2, 3, 4, 7])
def test_itersine_windows_square_sum(J):
    u = np.linspace(-1, (J - 1) / 2 + 1, 2001)
    total = sum(itersine(u, j, J) ** 2 for j in range(1, J + 1))
    np.testing.assert_allclose(total, 1.0, atol=1e-12)


def test_itersine_k2_laplacian_j2():
    S = eigendecompose(make_shift(K2, ShiftKind.NORMALIZED_LAPLACIAN))
    bank = build_spectral_bank(S, "itersine", 2)
    gram = sum(H.T @ H for H in bank.filters)
    np.testing.assert_allclose(gram, np.eye(2), atol=1e-6)


@settings(max_examples=20, deadline=None)
@given(n=st.integers(2, 50), seed=st.integers(0, 10**6), J=st.integers(1, 8))
def test_itersine_tight_on_random_graphs(n, seed, J):
    S = random_symmetric_shift(n, seed)
    bank = build_spectral_bank(S, "itersine", J)
    x = np.random.default_rng(seed).standard_normal(n)
    ratio = sum(np.sum((H @ x) ** 2) for H in bank.filters) / np.sum(x**2)
    assert abs(ratio - 1) <= 1e-6
    assert abs(bank.frame_lower - 1) <= 1e-6 and abs(bank.frame_upper - 1) <= 1e-6


def test_itersine_j4_kernel_bound():
    bank = build_spectral_bank(random_symmetric_shift(20, 1), "itersine", 4)
    _, D = estimate_kernel_constants(bank)
    assert D <= 1 + 1e-9


def test_spectral_bank_requires_symmetric():
    with pytest.raises(ValueError):
        build_spectral_bank(make_shift(P3, "lazy_random_walk"), "itersine", 2)


# ------------------------------------------------------- frames/constants


def test_frame_sandwich_random_vectors():
    S = random_symmetric_shift(15, 9)
    bank = build_spectral_bank(S, "monic_cubic", 3)
    A, B = estimate_frame_bounds(bank)
    X = np.random.default_rng(0).standard_normal((100, 15))
    for x in X:
        e = sum(np.sum((H @ x) ** 2) for H in bank.filters) / np.sum(x**2)
        assert A**2 * (1 - 1e-9) <= e <= B**2 * (1 + 1e-9)


def test_frame_bounds_trivial_banks():
    assert estimate_frame_bounds([np.eye(3)]) == (1.0, 1.0)
    assert estimate_frame_bounds([np.zeros((2, 2))] * 2) == (0.0, 0.0)


def test_kernel_constants_identity_kernel():
    assert estimate_kernel_constants(identity_bank()) == (0.0, 1.0)
    with pytest.raises(ValueError):
        estimate_kernel_constants(identity_bank(), grid_size=10)


def test_kernel_constants_geometric_fallback():
    S = make_shift(P3, "lazy_random_walk")
    bank = build_geometric_bank(S, 2)
    C, D = estimate_kernel_constants(bank)
    assert C is None
    assert D == pytest.approx(max(np.linalg.norm(H, 2) for H in bank.filters))


def test_rebuild_bank_keeps_kernels():
    S = random_symmetric_shift(8, 2)
    bank = build_spectral_bank(S, "monic_cubic", 3)
    again = rebuild_bank(bank, S)
    for a, b in zip(bank.filters, again.filters):
        np.testing.assert_array_equal(a, b)
    assert again.domain == bank.domain


# --------------------------------------------------------- filtering ops


def test_apply_separable_trivial(rng):
    X = rng.standard_normal((3, 4))
    np.testing.assert_array_equal(apply_separable(X, np.eye(3), np.eye(4)), X)
    assert not apply_separable(X, np.zeros((3, 3)), np.eye(4)).any()
    assert not apply_separable(X, np.eye(3), np.zeros((4, 4))).any()
    with pytest.raises(ValueError):
        apply_separable(X, np.eye(4), np.eye(4))


def test_apply_joint_trivial(rng):
    S = rng.standard_normal((5, 5))
    x = rng.standard_normal(5)
    np.testing.assert_array_equal(apply_joint(x, PolynomialFilter((1.0,)), S), x)
    np.testing.assert_allclose(apply_joint(x, PolynomialFilter((0.0, 1.0)), S), S @ x)
    with pytest.raises(ValueError):
        apply_joint(np.ones(4), PolynomialFilter((1.0,)), S)


def test_horner_matches_power_sum(rng):
    S = rng.standard_normal((6, 6)) / 3
    c = rng.standard_normal(5)
    ref = sum(ck * np.linalg.matrix_power(S, k) for k, ck in enumerate(c))
    np.testing.assert_allclose(polynomial_matrix(S, PolynomialFilter(tuple(c))), ref, atol=1e-12)


def test_polynomial_filter_validation():
    with pytest.raises(ValueError):
        PolynomialFilter(())
    with pytest.raises(ValueError):
        PolynomialFilter((0.0, 0.0))


def test_custom_polynomial_bank():
    S = random_symmetric_shift(6, 3)
    bank = build_bank(S, "custom_poly", coeffs=[[0, 1], [1, -1]])
    np.testing.assert_allclose(bank.filters[0], S.matrix)
    C, D = bank.lipschitz_C, bank.spectral_D
    lam_max = max(abs(S.eigvals[0]), abs(S.eigvals[-1]))
    assert C == pytest.approx(lam_max, rel=1e-6)
    assert D == pytest.approx(max(lam_max, max(abs(1 - S.eigvals[0]), abs(1 - S.eigvals[-1]))), rel=1e-3)
    with pytest.raises(ValueError):
        build_polynomial_bank(S, [])


# ----------------------------------------------------- coefficient grids


def sympy_coefficient_grid(h):
    ls, lt = sympy.symbols("ls lt")
    expr = sympy.expand(sum(hk * (ls * lt + ls + lt) ** k for k, hk in enumerate(h)))
    poly = sympy.Poly(expr, ls, lt)
    C = np.zeros((3, 3))
    for (i, j), v in poly.terms():
        C[i, j] = float(v)
    return C


@pytest.mark.parametrize("h", [(1, 0, 0), (0, 0, 1), (0.3, -1.2, 2.5), (2, 3, 5)])
def test_c1_matches_symbolic_expansion(h):
    C1, _ = coefficient_matrices(h, (1, 0, 0))
    np.testing.assert_allclose(C1, sympy_coefficient_grid(h), atol=1e-14)


def test_coefficient_matrix_examples():
    C1, C2 = coefficient_matrices([1, 0, 0], [1, 0, 0])
    corner = np.zeros((3, 3))
    corner[0, 0] = 1
    np.testing.assert_array_equal(C1, corner)
    np.testing.assert_array_equal(C2, corner)
    C1, _ = coefficient_matrices([0, 0, 1], [1, 0, 0])
    np.testing.assert_array_equal(C1, [[0, 0, 1], [0, 2, 2], [1, 2, 1]])
    with pytest.raises(ValueError):
        coefficient_matrices([1, 2], [1, 2, 3])


@given(
    h=st.lists(st.floats(-10, 10), min_size=3, max_size=3),
    g=st.lists(st.floats(-10, 10), min_size=3, max_size=3),
)
def test_coefficient_matrix_structure(h, g):
    C1, C2 = coefficient_matrices(h, g)
    np.testing.assert_array_equal(C1, C1.T)
    s = np.linalg.svd(C2, compute_uv=False)
    assert s[1] <= 1e-10 * max(s[0], 1e-300)
