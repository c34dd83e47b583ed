"""Finite-dimensional unital *-algebras given by structure constants.

An element is a complex coefficient vector over a fixed basis ``e_i`` with
``e_i e_j = sum_k c[i, j, k] e_k``.  The star is antilinear and is stored as a
matrix ``S`` acting after entrywise conjugation, ``a* = S @ conj(a)``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .report import DEFAULT_TOL, CheckResult, DimensionError, InvalidModel, frozen, make_check


def _einsum(*args):
    return np.einsum(*args, optimize=True)


@dataclass(frozen=True)
class Algebra:
    dim: int
    basis_labels: tuple[str, ...]
    structure_constants: np.ndarray
    unit: np.ndarray
    star: np.ndarray

    @property
    def left_mult(self) -> np.ndarray:
        """Stack of matrices ``L[i]`` with ``L[i] @ b = e_i b``."""
        return np.transpose(self.structure_constants, (0, 2, 1))

    @property
    def right_mult(self) -> np.ndarray:
        """Stack of matrices ``R[j]`` with ``R[j] @ a = a e_j``."""
        return np.transpose(self.structure_constants, (1, 2, 0))

    def left(self, a) -> np.ndarray:
        return _einsum("i,ikj->kj", _vec(self, a), self.left_mult)

    def right(self, b) -> np.ndarray:
        return _einsum("j,jki->ki", _vec(self, b), self.right_mult)

    def basis_vector(self, i: int) -> np.ndarray:
        e = np.zeros(self.dim, dtype=complex)
        e[i] = 1.0
        return e

    def index(self, label: str) -> int:
        return self.basis_labels.index(label)

    def element(self, **coeffs) -> np.ndarray:
        """Build an element from ``label=coefficient`` keywords."""
        a = np.zeros(self.dim, dtype=complex)
        for k, v in coeffs.items():
            a[self.index(k)] += v
        return a


@dataclass(frozen=True)
class Functional:
    """Linear functional ``a -> sum_i weights[i] * a[i]``."""

    weights: np.ndarray

    def __call__(self, a) -> complex:
        return complex(np.dot(self.weights, a))


def _vec(A: Algebra, a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.shape != (A.dim,):
        raise DimensionError(f"expected coefficient vector of length {A.dim}, got shape {a.shape}")
    return a


def make_algebra(labels: Sequence[str], structure_constants, unit, star, tol: float = DEFAULT_TOL) -> Algebra:
    """Validate and freeze an algebra; raises InvalidModel on any broken axiom."""
    c = np.asarray(structure_constants, dtype=complex)
    n = len(labels)
    if len(set(labels)) != n:
        raise InvalidModel("basis labels must be distinct")
    if c.shape != (n, n, n):
        raise InvalidModel(f"structure constants must have shape {(n, n, n)}")
    u = np.asarray(unit, dtype=complex)
    S = np.asarray(star, dtype=complex)
    if u.shape != (n,) or S.shape != (n, n):
        raise InvalidModel("unit/star have wrong shape")

    assoc = _einsum("ijp,pkq->ijkq", c, c) - _einsum("jkp,ipq->ijkq", c, c)
    if np.abs(assoc).max(initial=0) > tol:
        raise InvalidModel("structure constants are not associative")
    eye = np.eye(n)
    if np.abs(_einsum("i,ijk->jk", u, c) - eye).max() > tol or np.abs(_einsum("j,ijk->ik", u, c) - eye).max() > tol:
        raise InvalidModel("unit is not a two-sided identity")
    if np.abs(S @ S.conj() - eye).max() > tol:
        raise InvalidModel("star does not square to the identity")
    # (e_i e_j)* = e_j* e_i*
    lhs = _einsum("kq,ijq->ijk", S, c.conj())
    rhs = _einsum("pj,qi,pqk->ijk", S, S, c)
    if np.abs(lhs - rhs).max() > tol:
        raise InvalidModel("star is not an anti-homomorphism")
    return Algebra(n, tuple(labels), frozen(c), frozen(u), frozen(S))


def make_function_algebra(vertices: Sequence) -> Algebra:
    """Complex functions on a finite set, basis of delta functions."""
    labels = [str(v) for v in vertices]
    if not labels:
        raise InvalidModel("need at least one vertex")
    if len(set(labels)) != len(labels):
        raise InvalidModel(f"duplicate vertex labels in {list(vertices)}")
    n = len(labels)
    c = np.zeros((n, n, n))
    for i in range(n):
        c[i, i, i] = 1.0
    return make_algebra(labels, c, np.ones(n), np.eye(n))


def make_matrix_algebra(n: int) -> Algebra:
    """M_n(C) with matrix-unit basis E_ij ordered row-major."""
    if n < 1:
        raise InvalidModel("n must be positive")
    sep = "" if n < 10 else ","
    labels = [f"E{i + 1}{sep}{j + 1}" for i in range(n) for j in range(n)]
    N = n * n
    c = np.zeros((N, N, N))
    S = np.zeros((N, N))
    for i in range(n):
        for j in range(n):
            S[j * n + i, i * n + j] = 1.0
            for l in range(n):
                c[i * n + j, j * n + l, i * n + l] = 1.0
    unit = np.eye(n).reshape(-1)
    return make_algebra(labels, c, unit, S)


def matrix_to_element(M) -> np.ndarray:
    """Coefficients of a square matrix in the E_ij basis of make_matrix_algebra."""
    return np.asarray(M, dtype=complex).reshape(-1).copy()


def element_to_matrix(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    n = int(round(np.sqrt(a.size)))
    return a.reshape(n, n)


def mul(A: Algebra, a, b) -> np.ndarray:
    return _einsum("i,j,ijk->k", _vec(A, a), _vec(A, b), A.structure_constants)


def star(A: Algebra, a) -> np.ndarray:
    return A.star @ _vec(A, a).conj()


def commutator(A: Algebra, a, b) -> np.ndarray:
    return mul(A, a, b) - mul(A, b, a)


def integrate(F: Functional, a) -> complex:
    a = np.asarray(a, dtype=complex)
    if a.shape != F.weights.shape:
        raise DimensionError(f"expected length {F.weights.size}, got {a.shape}")
    return F(a)


def make_functional(A: Algebra, weights) -> Functional:
    w = np.asarray(weights, dtype=complex)
    if w.shape != (A.dim,):
        raise DimensionError(f"functional needs {A.dim} weights")
    return Functional(frozen(w))


def measure_functional(A: Algebra, mu: Sequence[float]) -> Functional:
    """``∫a = Σ μ_x a(x)`` on a function algebra."""
    return make_functional(A, mu)


def trace_functional(A: Algebra, n: int | None = None) -> Functional:
    """Normalised trace (1/n) Tr on a matrix algebra built by make_matrix_algebra."""
    n = n or int(round(np.sqrt(A.dim)))
    return make_functional(A, np.eye(n).reshape(-1) / n)


def check_trace(F: Functional, A: Algebra, tol: float = DEFAULT_TOL) -> CheckResult:
    """Max over basis pairs of |∫(e_i e_j) − ∫(e_j e_i)|."""
    vals = _einsum("ijk,k->ij", A.structure_constants, F.weights)
    res = float(np.abs(vals - vals.T).max(initial=0.0))
    return make_check("trace", res, tol)


def check_star_preserving_functional(F: Functional, A: Algebra, tol: float = DEFAULT_TOL) -> CheckResult:
    res = float(np.abs(F.weights @ A.star - F.weights.conj()).max(initial=0.0))
    return make_check("functional_star", res, tol)


def positivity_form(F: Functional, A: Algebra) -> np.ndarray:
    """Gram matrix ``M[i, j] = ∫(e_i* e_j)`` of the form (a, b) -> ∫(a* b)."""
    return _einsum("pi,pjk,k->ij", A.star, A.structure_constants, F.weights)
