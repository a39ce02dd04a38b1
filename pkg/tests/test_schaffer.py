"""Block-unitary dilations on Hilbert space and the cross-validation bridge."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dilations.linalg import OperatorMatrix, operator_residual
from dilations.schaffer import (_streamed_powers, cross_validate, defect_root,
                                schaffer_dilation, spectral_norm)


def _random_contraction(rng, d, scale=0.9):
    a = rng.standard_normal((d, d))
    return OperatorMatrix(scale * a / np.linalg.svd(a)[1][0])


def test_zero_scalar_halmos():
    dil = schaffer_dilation(OperatorMatrix(np.zeros((1, 1))), 1)
    u = dil.U.to_ndarray()
    assert np.array_equal(u, np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert dil.compression(0)[0, 0] == 1.0
    assert dil.compression(1)[0, 0] == 0.0


def test_identity_dilates_to_block_diagonal():
    eye = OperatorMatrix(np.eye(3))
    dil = schaffer_dilation(eye, 2)
    for n in range(3):
        assert operator_residual(dil.compression(n), eye) == 0.0
    assert dil.orthogonality_defect() < 1e-14


def test_defect_root_scalar():
    got = defect_root(OperatorMatrix(np.array([[0.5]])))[0, 0]
    assert abs(got - math.sqrt(3) / 4 * 2) < 1e-12
    assert abs(got - math.sqrt(1 - 0.25)) < 1e-12


def test_defect_root_squares_back():
    rng = np.random.default_rng(11)
    T = _random_contraction(rng, 4)
    D = defect_root(T)
    t = T.to_ndarray()
    lhs = D.to_ndarray() @ D.to_ndarray()
    assert np.max(np.abs(lhs - (np.eye(4) - t.T @ t))) < 1e-10


def test_defect_root_rejects_expansion():
    with pytest.raises(ValueError):
        defect_root(OperatorMatrix(np.array([[2.0]])))


def test_halmos_block_layout():
    rng = np.random.default_rng(7)
    T = _random_contraction(rng, 2)
    t = T.to_ndarray()
    dil = schaffer_dilation(T, 1)
    u = dil.U.to_ndarray()
    assert u.shape == (4, 4)
    d_t = defect_root(T).to_ndarray()
    d_tt = defect_root(T.transpose()).to_ndarray()
    assert np.max(np.abs(u[:2, :2] - t)) == 0.0
    assert np.max(np.abs(u[:2, 2:] - d_tt)) < 1e-12
    assert np.max(np.abs(u[2:, :2] - d_t)) < 1e-12
    assert np.max(np.abs(u[2:, 2:] + t.T)) == 0.0


def test_tall_block_layout():
    rng = np.random.default_rng(9)
    d, N = 2, 3
    T = _random_contraction(rng, d)
    t = T.to_ndarray()
    u = schaffer_dilation(T, N).U.to_ndarray()
    assert u.shape == ((N + 1) * d, (N + 1) * d)
    assert np.max(np.abs(u[:d, :d] - t)) == 0.0
    assert np.max(np.abs(u[:d, N * d:] - defect_root(T.transpose()).to_ndarray())) < 1e-12
    assert np.max(np.abs(u[d:2 * d, :d] - defect_root(T).to_ndarray())) < 1e-12
    assert np.max(np.abs(u[d:2 * d, N * d:] + t.T)) == 0.0
    for j in range(2, N + 1):
        block = u[j * d:(j + 1) * d, (j - 1) * d:j * d]
        assert np.array_equal(block, np.eye(d))
    # all remaining blocks vanish
    mask = np.ones_like(u, dtype=bool)
    mask[:2 * d, :d] = False
    mask[:2 * d, N * d:] = False
    for j in range(2, N + 1):
        mask[j * d:(j + 1) * d, (j - 1) * d:j * d] = False
    assert np.max(np.abs(u[mask])) == 0.0


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(1, 6), st.integers(1, 6))
def test_dilation_is_unitary_and_compresses(seed, d, N):
    rng = np.random.default_rng(seed)
    T = _random_contraction(rng, d)
    dil = schaffer_dilation(T, N)
    assert dil.orthogonality_defect() <= 1e-10
    for n in range(N + 1):
        assert operator_residual(dil.compression(n), T.power(n)) <= 1e-9


def test_compression_breaks_past_n():
    # the 2x2 reflection squares to the identity, so n = 2 compresses to 1
    dil = schaffer_dilation(OperatorMatrix(np.array([[0.5]])), 1)
    u = dil.U.to_ndarray()
    assert np.max(np.abs(u @ u - np.eye(2))) < 1e-12
    assert abs(dil.compression(2)[0, 0] - 1.0) < 1e-12
    assert abs(dil.compression(2)[0, 0] - 0.25) == pytest.approx(0.75, abs=1e-12)


def test_rejects_expanding_input():
    with pytest.raises(ValueError):
        schaffer_dilation(OperatorMatrix(np.array([[1.5]])), 2)
    with pytest.raises(ValueError):
        schaffer_dilation(OperatorMatrix(np.ones((2, 3))), 1)


def test_spectral_norm_matches_numpy():
    rng = np.random.default_rng(3)
    a = rng.standard_normal((4, 4))
    assert spectral_norm(OperatorMatrix(a)) == pytest.approx(
        np.linalg.norm(a, 2), abs=1e-10)


def test_cross_validate_orthogonal_input():
    theta = 0.7
    rot = OperatorMatrix(np.array([[math.cos(theta), -math.sin(theta)],
                                   [math.sin(theta), math.cos(theta)]]))
    report = cross_validate(rot, 3)
    assert report.max_oracle <= 1e-10
    assert report.max_decomposition <= 1e-10
    assert report.reconstruction_error <= 1e-10
    assert abs(report.weight_sum - 1) <= 1e-12


def test_cross_validate_random_contraction():
    rng = np.random.default_rng(21)
    T = _random_contraction(rng, 3)
    report = cross_validate(T, 3)
    assert report.d == 3 and report.N == 3
    assert len(report.oracle_residuals) == 4
    assert report.max_oracle <= 1e-9
    assert report.max_decomposition <= 1e-6
    assert report.rationalization_error <= 1e-8


def test_cross_validate_caps():
    with pytest.raises(ValueError):
        cross_validate(OperatorMatrix(np.zeros((6, 6))), 2)
    with pytest.raises(ValueError):
        cross_validate(OperatorMatrix(np.zeros((2, 2))), 5)


def test_streamed_powers_match_small_dense():
    """Chunked streaming equals the dense block computation it replaces."""
    rng = np.random.default_rng(17)
    d, N = 2, 2
    T = _random_contraction(rng, d)
    from dilations.isometries import (decompose_contraction,
                                      rationalize_decomposition)
    decomp = decompose_contraction(T)
    weights, _ = rationalize_decomposition(decomp, 10 ** 9)
    factors = [f.to_ndarray() for f in decomp.factors]
    streamed = _streamed_powers(factors, list(weights), N, N, chunk=3)
    onepass = _streamed_powers(factors, list(weights), N, N, chunk=10 ** 6)
    for a, b in zip(streamed, onepass):
        assert np.max(np.abs(a - b)) < 1e-12
    target = sum(float(w) * f for w, f in zip(weights, factors))
    for n in range(N + 1):
        assert np.max(np.abs(streamed[n] - np.linalg.matrix_power(target, n))) < 1e-9
