"""Invertible isometries of finite l^p spaces, and contraction decompositions.

For p other than 2 the invertible isometries of a finite l^p space are the
signed permutation matrices, so isometry testing away from the Hilbert case
is a structural pattern check, done exactly when the entries are exact.  At
p = 2 the isometries are the orthogonal matrices and a Gram identity is the
right test.

The Hilbert-space route to dilations starts from an SVD: any contraction is
an average of orthogonal matrices obtained by flipping signs of its singular
values, with product weights built from (1 +- sigma_k)/2.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .linalg import (EXACT, FLOAT64, ModeError, OperatorMatrix, PNorm,
                     is_exact_scalar, sym_eig)

_SIGNED_PERM_CAP = 5
_DECOMP_DIM_CAP = 8
_SVD_DIM_CAP = 16
_WEIGHT_DROP = 1e-14
_ISO_TOL = 1e-10


@dataclass(frozen=True)
class SignedPermutation:
    """Maps basis vector e_j to signs[j] * e_{perm[j]} (0-based)."""

    perm: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        d = len(self.perm)
        if sorted(self.perm) != list(range(d)):
            raise ValueError("perm must be a bijection of 0..d-1")
        if len(self.signs) != d or any(s not in (1, -1) for s in self.signs):
            raise ValueError("signs must be +-1, one per column")

    @property
    def dim(self) -> int:
        return len(self.perm)

    def matrix(self, mode: str = EXACT) -> OperatorMatrix:
        d = self.dim
        rows = [[0] * d for _ in range(d)]
        for j in range(d):
            rows[self.perm[j]][j] = self.signs[j]
        m = OperatorMatrix(rows)
        return m.to_float() if mode == FLOAT64 else m


def all_permutations(d: int, cap: int = _SIGNED_PERM_CAP) -> list[SignedPermutation]:
    """The d! permutation operators, in lexicographic order of their maps."""
    if d > cap:
        raise ValueError(f"dimension {d} above enumeration cap {cap}")
    plus = (1,) * d
    return [SignedPermutation(p, plus) for p in itertools.permutations(range(d))]


def all_signed_permutations(d: int, cap: int = _SIGNED_PERM_CAP) -> list[SignedPermutation]:
    """All 2^d * d! signed permutation operators, deterministically ordered."""
    if d > cap:
        raise ValueError(f"dimension {d} above enumeration cap {cap}")
    out = []
    for p in itertools.permutations(range(d)):
        for signs in itertools.product((1, -1), repeat=d):
            out.append(SignedPermutation(p, signs))
    return out


def _signed_perm_pattern_exact(T: OperatorMatrix) -> bool:
    d = T.rows
    col_hits = [0] * d
    for i in range(d):
        row_hits = 0
        for j in range(d):
            x = T[i, j]
            if x != 0:
                if abs(x) != 1:
                    return False
                row_hits += 1
                col_hits[j] += 1
        if row_hits != 1:
            return False
    return all(c == 1 for c in col_hits)


def _signed_perm_pattern_float(T: OperatorMatrix, tol: float) -> bool:
    a = T.to_ndarray()
    d = a.shape[0]
    col_hits = [0] * d
    for i in range(d):
        row_hits = 0
        for j in range(d):
            x = abs(a[i, j])
            if x > tol:
                if abs(x - 1.0) > tol:
                    return False
                row_hits += 1
                col_hits[j] += 1
        if row_hits != 1:
            return False
    return all(c == 1 for c in col_hits)


def is_lp_isometry(T: OperatorMatrix, norm: PNorm, tol: float = _ISO_TOL) -> bool:
    """Decide whether T is an invertible isometry of l^p in dimension d.

    p = 2: Gram check T^t T = I (exact, or within tol for float entries).
    p != 2: T must be a signed permutation matrix; for float entries the
    pattern is read with the same tolerance.
    """
    if not T.is_square:
        raise ValueError("isometry test needs a square matrix")
    if norm.p == 2:
        gram = T.transpose() @ T
        eye = OperatorMatrix.identity(T.rows, T.mode)
        if T.mode == EXACT:
            return gram == eye
        return float(np.max(np.abs(gram.to_ndarray() - np.eye(T.rows)))) <= tol
    if T.mode == EXACT:
        return _signed_perm_pattern_exact(T)
    return _signed_perm_pattern_float(T, tol)


def svd(T: OperatorMatrix) -> tuple[OperatorMatrix, list[float], OperatorMatrix]:
    """Singular value decomposition T = U diag(sigma) V^t, sigma descending.

    Built on the symmetric eigensolver applied to T^t T.  Columns of U for
    vanishing singular values are completed to an orthonormal basis by
    Gram-Schmidt, which covers defective inputs such as nilpotent matrices.
    """
    if not T.is_square:
        raise ValueError("svd implemented for square matrices")
    d = T.rows
    if d > _SVD_DIM_CAP:
        raise ValueError(f"dimension {d} above svd cap {_SVD_DIM_CAP}")
    a = T.to_ndarray()
    evals, vmat = sym_eig(OperatorMatrix(a.T @ a))
    order = list(range(d - 1, -1, -1))   # ascending -> descending
    v = vmat.to_ndarray()[:, order]
    sigma = [math.sqrt(max(evals[i], 0.0)) for i in order]
    scale = max(sigma[0], 1.0)
    u = np.zeros((d, d))
    for i in range(d):
        if sigma[i] > 1e-12 * scale:
            col = a @ v[:, i] / sigma[i]
            for k in range(i):
                col = col - (u[:, k] @ col) * u[:, k]
            u[:, i] = col / math.sqrt(float(col @ col))
        else:
            sigma[i] = 0.0
            # rank deficient: complete with the basis vector whose residual
            # after projecting out the columns found so far is largest
            best, best_nrm = None, 0.0
            for cand in range(d):
                col = np.zeros(d)
                col[cand] = 1.0
                for k in range(i):
                    col = col - (u[:, k] @ col) * u[:, k]
                nrm = math.sqrt(float(col @ col))
                if nrm > best_nrm:
                    best, best_nrm = col, nrm
            if best is None or best_nrm < 1e-8:
                raise ArithmeticError("basis completion failed")
            u[:, i] = best / best_nrm
    return OperatorMatrix(u), sigma, OperatorMatrix(v)


@dataclass(frozen=True)
class OrthogonalDecomposition:
    """A contraction written as a convex combination of orthogonal matrices."""

    terms: tuple[tuple[float, OperatorMatrix], ...]

    @property
    def weights(self) -> list[float]:
        return [w for w, _ in self.terms]

    @property
    def factors(self) -> list[OperatorMatrix]:
        return [f for _, f in self.terms]

    def reconstruct(self) -> OperatorMatrix:
        acc = np.zeros(self.terms[0][1].shape)
        for w, f in self.terms:
            acc = acc + w * f.to_ndarray()
        return OperatorMatrix(acc)


def decompose_contraction(T: OperatorMatrix, tol: float = 1e-9) -> OrthogonalDecomposition:
    """Write a norm-contraction as a convex combination of orthogonal matrices.

    Flip each singular value to +-1: the factor for a sign pattern s is
    U diag(s) V^t and its weight is the product of (1 + s_k sigma_k)/2.
    Weights below 1e-14 are dropped; at most 2^d terms survive.
    """
    if T.mode != FLOAT64:
        T = T.to_float()
    if not T.is_square:
        raise ValueError("decomposition needs a square matrix")
    d = T.rows
    if d > _DECOMP_DIM_CAP:
        raise ValueError(f"dimension {d} above decomposition cap {_DECOMP_DIM_CAP}")
    u, sigma, v = svd(T)
    if sigma[0] > 1.0 + tol:
        raise ValueError(f"operator norm {sigma[0]:.12g} exceeds 1 + tol")
    sigma = [min(s, 1.0) for s in sigma]
    ua, va = u.to_ndarray(), v.to_ndarray()
    terms = []
    for pattern in itertools.product((1.0, -1.0), repeat=d):
        w = 1.0
        for s, sg in zip(pattern, sigma):
            w *= 0.5 * (1.0 + s * sg)
        if w < _WEIGHT_DROP:
            continue
        factor = ua @ np.diag(pattern) @ va.T
        terms.append((w, OperatorMatrix(factor)))
    return OrthogonalDecomposition(tuple(terms))


def rationalize_decomposition(decomp: OrthogonalDecomposition,
                              max_denominator: int = 64
                              ) -> tuple[list[Fraction], float]:
    """Snap decomposition weights to fractions and renormalize to sum 1.

    Returns the exact weights and the largest absolute snapping error
    (measured after renormalization, so it is the honest figure).
    """
    snapped = [Fraction(w).limit_denominator(max_denominator) for w in decomp.weights]
    total = sum(snapped)
    if total == 0:
        raise ValueError("all weights snapped to zero")
    snapped = [w / total for w in snapped]
    err = max(abs(float(s) - w) for s, w in zip(snapped, decomp.weights))
    return snapped, err
