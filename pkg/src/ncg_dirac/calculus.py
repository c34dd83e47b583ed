"""First-order differential calculi over finite-dimensional *-algebras.

Both backends materialise every module map as a matrix on underlying complex
vector spaces:

* ``A``        dimension ``n`` (algebra basis),
* ``Ω¹``       dimension ``m`` (arrows, or ``e_c s^i`` ordered block by ``s^i``),
* ``Ω¹⊗_AΩ¹``  dimension ``p`` (two-steps, or ``e_c s^i⊗s^j``).

Every basis element ``t_k`` of ``Ω¹⊗_AΩ¹`` is recorded as one elementary
tensor ``left_factor[k] ⊗ right_factor[k]``; maps out of triple tensor products
are evaluated on these representatives.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Hashable, Sequence

import numpy as np

from .algebra import Algebra, make_function_algebra
from .report import DEFAULT_TOL, DimensionError, InvalidModel, frozen


def _einsum(*args):
    return np.einsum(*args, optimize=True)


@dataclass(frozen=True, kw_only=True)
class Calculus:
    algebra: Algebra
    kind: str
    one_form_labels: tuple[str, ...]
    tensor_labels: tuple[str, ...]
    d: np.ndarray
    left1: np.ndarray
    right1: np.ndarray
    star1: np.ndarray
    left2: np.ndarray
    right2: np.ndarray
    tensor: np.ndarray
    left_factor: np.ndarray
    right_factor: np.ndarray
    theta: np.ndarray
    dagger: np.ndarray

    @property
    def n(self) -> int:
        return self.algebra.dim

    @property
    def m(self) -> int:
        return len(self.one_form_labels)

    @property
    def p(self) -> int:
        return len(self.tensor_labels)

    def left_action(self, a) -> np.ndarray:
        """Matrix of ω ↦ aω on Ω¹."""
        return _einsum("i,ijk->jk", np.asarray(a, dtype=complex), self.left1)

    def right_action(self, a) -> np.ndarray:
        return _einsum("i,ijk->jk", np.asarray(a, dtype=complex), self.right1)

    def left_action2(self, a) -> np.ndarray:
        return _einsum("i,ijk->jk", np.asarray(a, dtype=complex), self.left2)

    def right_action2(self, a) -> np.ndarray:
        return _einsum("i,ijk->jk", np.asarray(a, dtype=complex), self.right2)

    def tensor_left(self, omega) -> np.ndarray:
        """Matrix of η ↦ ω⊗η  (shape p×m)."""
        return _einsum("tuv,u->tv", self.tensor, np.asarray(omega, dtype=complex))

    def tensor_right(self, eta) -> np.ndarray:
        """Matrix of ω ↦ ω⊗η  (shape p×m)."""
        return _einsum("tuv,v->tu", self.tensor, np.asarray(eta, dtype=complex))


@dataclass(frozen=True, kw_only=True)
class GraphCalculus(Calculus):
    vertices: tuple
    arrows: tuple[tuple[int, int], ...]
    two_steps: tuple[tuple[int, int, int], ...]
    arrow_index: dict
    step_index: dict

    def vertex_index(self, v) -> int:
        return self.vertices.index(v)

    def arrow(self, x, y) -> int:
        """Index of ω_{x→y} given vertex labels."""
        return self.arrow_index[(self.vertex_index(x), self.vertex_index(y))]

    def step(self, x, w, y) -> int:
        return self.step_index[(self.vertex_index(x), self.vertex_index(w), self.vertex_index(y))]

    def intermediates(self, i: int, j: int) -> list[int]:
        """Vertex indices w with a two-step i→w→j (the basis of Ω²_{i,j})."""
        return [w for (x, w, y) in self.two_steps if x == i and y == j]

    def out_neighbours(self, i: int) -> list[int]:
        return [y for (x, y) in self.arrows if x == i]

    def in_neighbours(self, i: int) -> list[int]:
        return [x for (x, y) in self.arrows if y == i]


@dataclass(frozen=True)
class WedgeData:
    """Degree-two data on a free calculus with central basis.

    ``wedge[q, i, j]`` gives ``s^i∧s^j = Σ_q wedge[q, i, j] e^q`` for a central
    basis ``e^q`` of Ω², and ``d_basis[i, q]`` is the algebra coefficient of
    ``e^q`` in ``d s^i``.
    """

    wedge: np.ndarray
    d_basis: np.ndarray

    @property
    def rank(self) -> int:
        return self.wedge.shape[0]


@dataclass(frozen=True, kw_only=True)
class FreeCalculus(Calculus):
    rank: int
    basis_names: tuple[str, ...]
    star_matrix: np.ndarray
    theta_coeffs: np.ndarray
    wedge: WedgeData | None = None

    def one_form(self, coeffs) -> np.ndarray:
        """Flatten k algebra coefficients (Σ a_i s^i) into an Ω¹ vector."""
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (self.rank, self.n):
            raise DimensionError(f"expected ({self.rank}, {self.n}) coefficients")
        return coeffs.reshape(-1)

    def two_tensor(self, coeffs) -> np.ndarray:
        """Flatten coefficients c[i, j] (algebra elements) of Σ c_ij s^i⊗s^j."""
        coeffs = np.asarray(coeffs, dtype=complex)
        if coeffs.shape != (self.rank, self.rank, self.n):
            raise DimensionError(f"expected ({self.rank}, {self.rank}, {self.n}) coefficients")
        return coeffs.reshape(-1)

    def split(self, omega) -> np.ndarray:
        return np.asarray(omega).reshape(self.rank, self.n)


def _dagger_matrix(tensor, star1, lf, rf) -> np.ndarray:
    # †(ω⊗η) = η*⊗ω*, evaluated on the elementary representatives
    sl = lf.conj() @ star1.T
    sr = rf.conj() @ star1.T
    return _einsum("tuv,ku,kv->tk", tensor, sr, sl)


def validate_calculus(calc: Calculus, tol: float = DEFAULT_TOL, probes: int = 3) -> None:
    """Raise InvalidModel unless all first-order calculus axioms hold.

    Multilinear identities are evaluated on seeded random probe elements, so
    each check costs a few matrix-vector products; a nonzero identity survives
    random probing with probability one.
    """
    A = calc.algebra
    n, m, p = calc.n, calc.m, calc.p
    rng = np.random.default_rng(20240515)

    def rand(size):
        return rng.standard_normal(size) + 1j * rng.standard_normal(size)

    def require(msg, res):
        if res > tol:
            raise InvalidModel(f"{msg} (residual {res:.3e})")

    def sup(x):
        return float(np.abs(x).max(initial=0.0))

    require("unit does not act as identity on Ω¹",
            max(sup(calc.left_action(A.unit) - np.eye(m)), sup(calc.right_action(A.unit) - np.eye(m))))
    require("calculus is not inner with the given θ", sup(calc.d - (calc.right1 @ calc.theta).T + (calc.left1 @ calc.theta).T))
    require("θ* ≠ −θ", sup(calc.star1 @ calc.theta.conj() + calc.theta))
    require("d does not commute with *", sup(calc.d @ A.star - calc.star1 @ calc.d.conj()))
    require("tensor basis representatives do not reproduce the basis",
            sup(_einsum("tuv,ku,kv->tk", calc.tensor, calc.left_factor, calc.right_factor) - np.eye(p)))
    for _ in range(probes):
        a, b = rand(n), rand(n)
        w, v = rand(m), rand(m)
        T = rand(p)
        scale = max(1.0, np.linalg.norm(a) * np.linalg.norm(b) * np.linalg.norm(w))
        La, Lb, Ra, Rb = calc.left_action(a), calc.left_action(b), calc.right_action(a), calc.right_action(b)
        ab = _einsum("i,j,ijk->k", a, b, A.structure_constants)
        require("left action on Ω¹ is not a homomorphism", sup(La @ (Lb @ w) - calc.left_action(ab) @ w) / scale)
        require("right action on Ω¹ is not a homomorphism", sup(Rb @ (Ra @ w) - calc.right_action(ab) @ w) / scale)
        require("left and right actions on Ω¹ do not commute", sup(La @ (Rb @ w) - Rb @ (La @ w)) / scale)
        require("d violates the Leibniz rule", sup(calc.d @ ab - Rb @ (calc.d @ a) - La @ (calc.d @ b)) / scale)
        S1 = calc.star1
        astar = A.star @ a.conj()
        require("star on Ω¹ is not an involution", sup(S1 @ (S1 @ w.conj()).conj() - w) / scale)
        require("star on Ω¹ is not a skew-bimodule map",
                max(sup(S1 @ (La @ w).conj() - calc.right_action(astar) @ (S1 @ w.conj())),
                    sup(S1 @ (Ra @ w).conj() - calc.left_action(astar) @ (S1 @ w.conj()))) / scale)
        require("tensor map is not A-balanced",
                sup(tensor_product(calc, Ra @ w, v) - tensor_product(calc, w, La @ v)) / scale)
        require("bimodule structure on Ω¹⊗Ω¹ inconsistent with the tensor map",
                max(sup(calc.left_action2(a) @ tensor_product(calc, w, v) - tensor_product(calc, La @ w, v)),
                    sup(calc.right_action2(a) @ tensor_product(calc, w, v) - tensor_product(calc, w, Ra @ v))) / scale)
        require("† is not an involution", sup(calc.dagger @ (calc.dagger @ T.conj()).conj() - T) / max(1.0, np.linalg.norm(T)))


# --------------------------------------------------------------------------- graph


def build_graph_calculus(vertices: Sequence[Hashable], arrows: Sequence[tuple], tol: float = DEFAULT_TOL) -> GraphCalculus:
    """Calculus of a bidirected graph; Ω¹ has basis ω_{x→y}, Ω¹⊗Ω¹ the two-steps."""
    vertices = tuple(vertices)
    A = make_function_algebra(vertices)
    vidx = {v: i for i, v in enumerate(vertices)}
    arrow_set = set()
    for arr in arrows:
        x, y = arr[0], arr[1]
        if x not in vidx or y not in vidx:
            raise InvalidModel(f"arrow {x}->{y} uses an unknown vertex")
        if x == y:
            raise InvalidModel(f"self-loop at {x} is not allowed")
        arrow_set.add((vidx[x], vidx[y]))
    for (i, j) in arrow_set:
        if (j, i) not in arrow_set:
            raise InvalidModel(f"arrow {vertices[i]}->{vertices[j]} has no reverse arrow")
    arrow_list = tuple(sorted(arrow_set))
    aidx = {a: k for k, a in enumerate(arrow_list)}
    out = {i: sorted(j for (x, j) in arrow_list if x == i) for i in range(len(vertices))}
    steps = tuple(sorted((x, w, y) for (x, w) in arrow_list for y in out[w]))
    sidx = {s: k for k, s in enumerate(steps)}

    n, m, p = len(vertices), len(arrow_list), len(steps)
    d = np.zeros((m, n))
    L1 = np.zeros((n, m, m))
    R1 = np.zeros((n, m, m))
    S1 = np.zeros((m, m))
    for k, (x, y) in enumerate(arrow_list):
        d[k, y] += 1.0
        d[k, x] -= 1.0
        L1[x, k, k] = 1.0
        R1[y, k, k] = 1.0
        S1[aidx[(y, x)], k] = -1.0
    L2 = np.zeros((n, p, p))
    R2 = np.zeros((n, p, p))
    P = np.zeros((p, m, m))
    lf = np.zeros((p, m))
    rf = np.zeros((p, m))
    for k, (x, w, y) in enumerate(steps):
        L2[x, k, k] = 1.0
        R2[y, k, k] = 1.0
        P[k, aidx[(x, w)], aidx[(w, y)]] = 1.0
        lf[k, aidx[(x, w)]] = 1.0
        rf[k, aidx[(w, y)]] = 1.0
    theta = np.ones(m)
    labels1 = tuple(f"{vertices[x]}->{vertices[y]}" for (x, y) in arrow_list)
    labels2 = tuple(f"{vertices[x]}->{vertices[w]}->{vertices[y]}" for (x, w, y) in steps)
    calc = GraphCalculus(
        algebra=A, kind="graph", one_form_labels=labels1, tensor_labels=labels2,
        d=frozen(d), left1=frozen(L1), right1=frozen(R1), star1=frozen(S1),
        left2=frozen(L2), right2=frozen(R2), tensor=frozen(P),
        left_factor=frozen(lf), right_factor=frozen(rf), theta=frozen(theta),
        dagger=frozen(_dagger_matrix(P, S1, lf, rf)),
        vertices=vertices, arrows=arrow_list, two_steps=steps, arrow_index=aidx, step_index=sidx,
    )
    validate_calculus(calc, tol)
    return calc


def graph_one_form(calc: GraphCalculus, coeffs: dict) -> np.ndarray:
    """Ω¹ vector from ``{(x, y): value}`` keyed by vertex labels."""
    w = np.zeros(calc.m, dtype=complex)
    for (x, y), v in coeffs.items():
        w[calc.arrow(x, y)] += v
    return w


# --------------------------------------------------------------------------- free


def build_free_calculus(
    A: Algebra,
    k: int,
    theta_coeffs,
    star_matrix,
    wedge: WedgeData | None = None,
    basis_names: Sequence[str] | None = None,
    tol: float = DEFAULT_TOL,
) -> FreeCalculus:
    """Inner calculus with central basis s^1..s^k and θ = Σ θ_i s^i.

    ``star_matrix[i, j]`` gives ``(s^i)* = Σ_j S_ij s^j``.
    """
    n = A.dim
    th = np.asarray(theta_coeffs, dtype=complex)
    S = np.asarray(star_matrix, dtype=complex)
    if th.shape != (k, n):
        raise InvalidModel(f"theta_coeffs must have shape ({k}, {n})")
    if S.shape != (k, k):
        raise InvalidModel(f"star_matrix must be {k}×{k}")
    names = tuple(basis_names or [f"s{i + 1}" for i in range(k)])
    m, p = k * n, k * k * n
    LA, RA = A.left_mult, A.right_mult
    ik, ik2 = np.eye(k), np.eye(k * k)
    L1 = np.stack([np.kron(ik, LA[a]) for a in range(n)])
    R1 = np.stack([np.kron(ik, RA[a]) for a in range(n)])
    L2 = np.stack([np.kron(ik2, LA[a]) for a in range(n)])
    R2 = np.stack([np.kron(ik2, RA[a]) for a in range(n)])
    S1 = np.kron(S.T, A.star)
    c = A.structure_constants
    P = np.zeros((k, k, n, k, n, k, n), dtype=complex)
    for i in range(k):
        for j in range(k):
            P[i, j, :, i, :, j, :] = np.transpose(c, (2, 0, 1))
    P = P.reshape(p, m, m)
    lf = np.zeros((k, k, n, k, n))
    rf = np.zeros((k, k, n, k, n), dtype=complex)
    for i in range(k):
        for j in range(k):
            lf[i, j, :, i, :] = np.eye(n)
            rf[i, j, :, j, :] = A.unit
    lf = lf.reshape(p, m)
    rf = rf.reshape(p, m)
    theta = th.reshape(-1)
    # d a = [θ, a] = Σ_i (θ_i a − a θ_i) s^i
    d = np.concatenate([_einsum("j,jak->ka", th[i], c) - _einsum("j,ajk->ka", th[i], c) for i in range(k)])
    labels1 = tuple(f"{A.basis_labels[cc]}*{names[i]}" for i in range(k) for cc in range(n))
    labels2 = tuple(f"{A.basis_labels[cc]}*{names[i]}(x){names[j]}" for i in range(k) for j in range(k) for cc in range(n))
    calc = FreeCalculus(
        algebra=A, kind="free", one_form_labels=labels1, tensor_labels=labels2,
        d=frozen(d), left1=frozen(L1), right1=frozen(R1), star1=frozen(S1),
        left2=frozen(L2), right2=frozen(R2), tensor=frozen(P),
        left_factor=frozen(lf), right_factor=frozen(rf), theta=frozen(theta),
        dagger=frozen(_dagger_matrix(P, S1, lf, rf)),
        rank=k, basis_names=names, star_matrix=frozen(S), theta_coeffs=frozen(th), wedge=wedge,
    )
    validate_calculus(calc, tol)
    return calc


def inner_wedge_data(A: Algebra, wedge, theta_coeffs) -> WedgeData:
    """Wedge data with d s^i = θ∧s^i + s^i∧θ (inner in degree two)."""
    W = np.asarray(wedge, dtype=complex)
    th = np.asarray(theta_coeffs, dtype=complex)
    # d s^i = Σ_j θ_j (s^j∧s^i + s^i∧s^j), coefficients on the left
    ds = _einsum("qji,ja->iqa", W, th) + _einsum("qij,ja->iqa", W, th)
    return WedgeData(frozen(W), frozen(ds))


def wedge_matrix(calc: FreeCalculus) -> np.ndarray:
    """Matrix of ∧: Ω¹⊗Ω¹ → Ω², Ω² indexed by (q, c) ↦ q·n + c."""
    if calc.wedge is None:
        raise InvalidModel("calculus has no wedge data")
    W = calc.wedge.wedge
    n, k, r = calc.n, calc.rank, calc.wedge.rank
    M = _einsum("qij,cd->qcijd", W, np.eye(n))
    return M.reshape(r * n, k * k * n)


def exterior_d1(calc: FreeCalculus) -> np.ndarray:
    """Matrix of d: Ω¹ → Ω², d(a s^i) = da∧s^i + a ds^i."""
    if calc.wedge is None:
        raise InvalidModel("calculus has no wedge data")
    W, ds = calc.wedge.wedge, calc.wedge.d_basis
    n, k, r = calc.n, calc.rank, calc.wedge.rank
    c = calc.algebra.structure_constants
    da = calc.d.reshape(k, n, n)  # [j, coeff, c]
    out = _einsum("qji,jac->qaic", W, da) + _einsum("cbx,iqb->qxic", c, ds)
    return out.reshape(r * n, k * n)


# --------------------------------------------------------------------------- operations


def differential(calc: Calculus, a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    if a.shape != (calc.n,):
        raise DimensionError(f"expected length {calc.n}")
    return calc.d @ a


def star_one_form(calc: Calculus, omega) -> np.ndarray:
    omega = np.asarray(omega, dtype=complex)
    if omega.shape != (calc.m,):
        raise DimensionError(f"expected length {calc.m}")
    return calc.star1 @ omega.conj()


def tensor_star(calc: Calculus, T) -> np.ndarray:
    """† = flip∘(*⊗*) on Ω¹⊗_AΩ¹."""
    T = np.asarray(T, dtype=complex)
    if T.shape != (calc.p,):
        raise DimensionError(f"expected length {calc.p}")
    return calc.dagger @ T.conj()


def tensor_product(calc: Calculus, omega, eta) -> np.ndarray:
    return _einsum("tuv,u,v->t", calc.tensor, np.asarray(omega, dtype=complex), np.asarray(eta, dtype=complex))
