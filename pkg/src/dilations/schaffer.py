"""Classical unitary N-dilation of a real contraction, used as an oracle.

The block layout is the Schaeffer/Egervary one on N+1 blocks of size d:
row 0 is [T, 0, ..., 0, D(T^t)], row 1 is [D(T), 0, ..., 0, -T^t], and rows
2..N carry the identity one block below the diagonal.  For N = 1 the
subdiagonal rows are absent and the matrix is the plain Halmos form
[[T, D(T^t)], [D(T), -T^t]].  Compressing U^n back to block 0 reproduces
T^n for every n up to N, which makes this construction an independent check
on the convex-combination pipeline in the Hilbert case p = 2.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .builders import ConvexCombination, build_n_dilation, compressed_power
from .isometries import decompose_contraction, rationalize_decomposition
from .linalg import EXACT, OperatorMatrix, PNorm, sym_eig

_NORM_TOL = 1e-12
_EIG_FLOOR = -1e-10
_STACK_BYTES_CAP = 64 * 2 ** 20
_CROSS_DIM_CAP = 5
_CROSS_POWER_CAP = 4
_CROSS_SNAP_DENOMINATOR = 10 ** 9


def spectral_norm(T: OperatorMatrix) -> float:
    """Largest singular value, from the eigenvalues of T^t T."""
    t = T.to_float() if T.mode == EXACT else T
    evals, _ = sym_eig(t.transpose() @ t)
    return math.sqrt(max(evals[-1], 0.0))


def defect_root(T: OperatorMatrix) -> OperatorMatrix:
    """The defect operator (I - T^t T)^(1/2) of a contraction.

    Eigenvalues of I - T^t T are clamped into [0, 1] before rooting;
    negatives below -1e-10 mean T is genuinely expanding and raise.
    """
    t = T.to_float() if T.mode == EXACT else T
    if not t.is_square:
        raise ValueError("defect operator needs a square matrix")
    d = t.rows
    gram = t.transpose() @ t
    body = OperatorMatrix(np.eye(d) - gram.to_ndarray())
    evals, vecs = sym_eig(body)
    if evals[0] < _EIG_FLOOR:
        raise ValueError(f"not a contraction: defect eigenvalue {evals[0]:.3e}")
    roots = np.array([math.sqrt(min(max(e, 0.0), 1.0)) for e in evals])
    v = vecs.to_ndarray()
    return OperatorMatrix((v * roots) @ v.T)


@dataclass(frozen=True)
class UnitaryNDilation:
    """Orthogonal matrix on N+1 blocks whose corner powers reproduce T^n."""

    U: OperatorMatrix
    d: int
    N: int

    @property
    def block_range(self) -> tuple[int, int]:
        """Index range of block 0, where T lives under compression."""
        return (0, self.d)

    def compression(self, n: int) -> OperatorMatrix:
        """Top-left d x d corner of U^n."""
        if n < 0:
            raise ValueError("nonnegative powers only")
        arr = np.linalg.matrix_power(self.U.to_ndarray(), n)
        return OperatorMatrix(arr[: self.d, : self.d].copy())

    def orthogonality_defect(self) -> float:
        u = self.U.to_ndarray()
        return float(np.max(np.abs(u.T @ u - np.eye(u.shape[0]))))


def schaffer_dilation(T: OperatorMatrix, N: int) -> UnitaryNDilation:
    """Block unitary N-dilation of a contraction on R^d.

    Requires the spectral norm of T to be at most 1 (up to 1e-12, then
    clamped inside the defect roots).
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    t = T.to_float() if T.mode == EXACT else T
    if not t.is_square:
        raise ValueError("need a square matrix")
    nrm = spectral_norm(t)
    if nrm > 1.0 + _NORM_TOL:
        raise ValueError(f"spectral norm {nrm:.12g} exceeds 1")
    d = t.rows
    a = t.to_ndarray()
    dt = defect_root(t).to_ndarray()
    dtt = defect_root(t.transpose()).to_ndarray()
    big = d * (N + 1)
    u = np.zeros((big, big))
    u[0:d, 0:d] = a
    u[0:d, N * d:] = dtt
    u[d:2 * d, 0:d] = dt
    u[d:2 * d, N * d:] = -a.T
    for j in range(2, N + 1):
        u[j * d:(j + 1) * d, (j - 1) * d:j * d] = np.eye(d)
    return UnitaryNDilation(OperatorMatrix(u), d, N)


@dataclass(frozen=True)
class CrossValidationReport:
    """Residual curves of the two dilation routes against the powers of T.

    The oracle curve comes from compressing the block unitary; the
    decomposition curve goes through the sign-flip convex combination of
    orthogonal matrices and the cyclic dilation built from it, so it also
    absorbs the weight-snapping error.
    """

    d: int
    N: int
    oracle_residuals: tuple[float, ...]
    decomposition_residuals: tuple[float, ...]
    reconstruction_error: float
    weight_sum: float
    rationalization_error: float

    @property
    def max_oracle(self) -> float:
        return max(self.oracle_residuals)

    @property
    def max_decomposition(self) -> float:
        return max(self.decomposition_residuals)


def _streamed_powers(factors: list[np.ndarray], weights: list[Fraction],
                     N: int, n_max: int, chunk: int = 4096) -> list[np.ndarray]:
    """Compressed powers of the cyclic dilation, block-streamed.

    Mathematically identical to building the full block-diagonal operator
    and compressing, but only `chunk` alpha-blocks are materialized at a
    time, so large m^N stays affordable.
    """
    m = len(factors)
    d = factors[0].shape[0]
    s = N * d
    out = [np.zeros((d, d)) for _ in range(n_max + 1)]
    alphas = itertools.product(range(m), repeat=N)
    while True:
        batch = list(itertools.islice(alphas, chunk))
        if not batch:
            break
        b = len(batch)
        stack = np.zeros((b, s, s))
        coeffs = np.empty(b)
        for idx, alpha in enumerate(batch):
            w = Fraction(1)
            for k in range(N):
                stack[idx, k * d:(k + 1) * d,
                      ((k + 1) % N) * d:(((k + 1) % N) + 1) * d] = factors[alpha[k]]
                w *= weights[alpha[k]]
            coeffs[idx] = float(w / N)
        power = np.broadcast_to(np.eye(s), (b, s, s)).copy()
        for n in range(n_max + 1):
            if n:
                power = np.matmul(power, stack)
            sums = power.reshape(b, N, d, N, d).sum(axis=(1, 3))
            out[n] += np.einsum("b,bij->ij", coeffs, sums)
    return out


def cross_validate(T: OperatorMatrix, N: int,
                   snap_denominator: int = _CROSS_SNAP_DENOMINATOR) -> CrossValidationReport:
    """Run both dilation routes on a Hilbert-space contraction and compare.

    Route one decomposes T into a convex combination of orthogonal matrices
    (weights snapped to rationals) and compresses the cyclic dilation built
    from it; route two compresses the classical block unitary.  The report
    holds one residual per power n = 0..N for each route.
    """
    t = T.to_float() if T.mode == EXACT else T
    if not t.is_square:
        raise ValueError("need a square matrix")
    d = t.rows
    if d > _CROSS_DIM_CAP:
        raise ValueError(f"cross validation supports d <= {_CROSS_DIM_CAP}")
    if not 1 <= N <= _CROSS_POWER_CAP:
        raise ValueError(f"cross validation supports 1 <= N <= {_CROSS_POWER_CAP}")

    a = t.to_ndarray()
    targets = [np.linalg.matrix_power(a, n) for n in range(N + 1)]

    oracle = schaffer_dilation(t, N)
    oracle_res = tuple(
        float(np.max(np.abs(oracle.compression(n).to_ndarray() - targets[n])))
        for n in range(N + 1))

    decomp = decompose_contraction(t)
    weight_sum = float(sum(decomp.weights))
    recon_err = float(np.max(np.abs(decomp.reconstruct().to_ndarray() - a)))
    rat_weights, rat_err = rationalize_decomposition(decomp, snap_denominator)
    m = len(rat_weights)
    stack_bytes = (m ** N) * (N * d) ** 2 * 8
    if stack_bytes <= _STACK_BYTES_CAP:
        combo = ConvexCombination(tuple(decomp.factors), tuple(rat_weights))
        triple = build_n_dilation(combo, N, PNorm(2))
        decomp_res = tuple(
            float(np.max(np.abs(compressed_power(triple, n).to_ndarray() - targets[n])))
            for n in range(N + 1))
    else:
        factors = [f.to_ndarray() for f in decomp.factors]
        compressed = _streamed_powers(factors, rat_weights, N, N)
        decomp_res = tuple(
            float(np.max(np.abs(compressed[n] - targets[n])))
            for n in range(N + 1))
    return CrossValidationReport(d, N, oracle_res, decomp_res,
                                 recon_err, weight_sum, rat_err)
