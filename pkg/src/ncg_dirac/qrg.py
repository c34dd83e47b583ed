"""Quantum metrics, bimodule connections, divergence and the compatibility checks.

Only the inverse metric ``( , ): Ω¹⊗_AΩ¹ → A`` is ever stored, as an ``n×p``
matrix.  A connection is a pair of matrices ``∇: Ω¹ → Ω¹⊗_AΩ¹`` (``p×m``) and
``σ`` (``p×p``); antilinear maps are a matrix applied after conjugation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .algebra import Functional
from .calculus import Calculus, FreeCalculus, GraphCalculus, exterior_d1, wedge_matrix
from .report import DEFAULT_TOL, CheckResult, InvalidModel, NotApplicable, frozen, make_check, norm


def _einsum(*args):
    return np.einsum(*args, optimize=True)


@dataclass(frozen=True)
class QuantumMetric:
    calc: Calculus
    pairing: np.ndarray
    weights: Mapping[int, complex] | None = None  # graph: arrow index -> λ
    g_inv: np.ndarray | None = None  # free: (s^i, s^j)

    def __call__(self, T) -> np.ndarray:
        return self.pairing @ np.asarray(T, dtype=complex)

    def pair(self, omega, eta) -> np.ndarray:
        """(ω, η) as an algebra element."""
        return self.pairing @ _einsum("tuv,u,v->t", self.calc.tensor, omega, eta)

    def lam(self, x: int, y: int) -> complex:
        """λ_{x→y} by vertex indices (graph metrics only)."""
        return self.weights[self.calc.arrow_index[(x, y)]]


@dataclass(frozen=True)
class Connection:
    calc: Calculus
    nabla: np.ndarray
    sigma: np.ndarray
    provenance: str = "explicit"
    alpha: np.ndarray | None = None

    @property
    def sigma_invertible(self) -> bool:
        return bool(np.linalg.cond(self.sigma) < 1e12)


def _is_bimodule_map(X, l_src, r_src, l_dst, r_dst) -> float:
    res_l = _einsum("uv,avw->auw", X, l_src) - _einsum("auv,vw->auw", l_dst, X)
    res_r = _einsum("uv,avw->auw", X, r_src) - _einsum("auv,vw->auw", r_dst, X)
    return max(np.abs(res_l).max(initial=0.0), np.abs(res_r).max(initial=0.0))


def bimodule_map_residual(calc: Calculus, X, src: str, dst: str) -> float:
    """Max deviation of X from commuting with both actions; src/dst in {'A','1','2'}."""
    acts = {"A": (calc.algebra.left_mult, calc.algebra.right_mult), "1": (calc.left1, calc.right1), "2": (calc.left2, calc.right2)}
    return _is_bimodule_map(np.asarray(X), *acts[src], *acts[dst])


def bimodule_map_space(calc: Calculus, src: str = "1", dst: str = "2", tol: float = 1e-9) -> np.ndarray:
    """Basis of all bimodule maps between two of A, Ω¹, Ω¹⊗Ω¹ (small models only).

    Returned as an array of shape (dim, rows, cols).
    """
    acts = {"A": (calc.algebra.left_mult, calc.algebra.right_mult), "1": (calc.left1, calc.right1), "2": (calc.left2, calc.right2)}
    ls, rs = acts[src]
    ld, rd = acts[dst]
    rows, cols = ld.shape[1], ls.shape[1]
    eqs = []
    for a in range(ls.shape[0]):
        for s_, d_ in ((ls[a], ld[a]), (rs[a], rd[a])):
            # vec(X S − D X) with row-major vec
            eqs.append(np.kron(np.eye(rows), s_.T) - np.kron(d_, np.eye(cols)))
    M = np.concatenate(eqs)
    _, sv, vh = np.linalg.svd(M)
    sv = np.concatenate([sv, np.zeros(vh.shape[0] - sv.size)])
    null = vh[sv < tol].conj()
    return null.reshape(-1, rows, cols)


# --------------------------------------------------------------------------- metrics


def make_metric(calc: Calculus, data, allow_nonreal: bool = False, tol: float = DEFAULT_TOL) -> QuantumMetric:
    """Build ( , ) from arrow weights λ (graph) or a k×k matrix g^{ij} (free)."""
    if isinstance(calc, GraphCalculus):
        if isinstance(data, Mapping):
            weights = {}
            for key, v in data.items():
                weights[calc.arrow(*key)] = complex(v)
            if len(weights) != calc.m:
                raise InvalidModel("need exactly one weight per arrow")
        else:
            vals = list(data)
            if len(vals) != calc.m:
                raise InvalidModel(f"need {calc.m} arrow weights, got {len(vals)}")
            weights = {k: complex(v) for k, v in enumerate(vals)}
        G = np.zeros((calc.n, calc.p), dtype=complex)
        for k, lam in weights.items():
            if abs(lam) <= tol:
                raise InvalidModel(f"zero weight on arrow {calc.one_form_labels[k]}")
            if abs(lam.imag) > tol and not allow_nonreal:
                raise InvalidModel(f"non-real weight on arrow {calc.one_form_labels[k]}")
            x, y = calc.arrows[k]
            G[x, calc.step_index[(x, y, x)]] = lam
        metric = QuantumMetric(calc, frozen(G), weights=weights)
    elif isinstance(calc, FreeCalculus):
        g = np.asarray(data, dtype=complex)
        k = calc.rank
        if g.shape != (k, k):
            raise InvalidModel(f"g_inv must be {k}×{k}")
        if np.linalg.cond(g) > 1e12:
            raise InvalidModel("inverse metric is singular")
        n = calc.n
        G = _einsum("ij,cd->dijc", g, np.eye(n)).reshape(n, k * k * n)
        metric = QuantumMetric(calc, frozen(G), g_inv=frozen(g))
    else:
        raise InvalidModel(f"unsupported calculus {type(calc).__name__}")
    res = bimodule_map_residual(calc, metric.pairing, "2", "A")
    if res > tol:
        raise InvalidModel(f"( , ) is not a bimodule map (residual {res:.3e})")
    return metric


# --------------------------------------------------------------------------- connections


def leibniz_residuals(calc: Calculus, nabla, sigma) -> tuple[float, float]:
    """Max residuals of the left and right Leibniz rules over basis a, ω."""
    P, d = calc.tensor, calc.d
    # da⊗ω and ω⊗da as p×m matrices, one per algebra basis element
    da_l = _einsum("tuv,ua->atv", P, d)
    da_r = _einsum("tuv,va->atu", P, d)
    left = _einsum("tu,auv->atv", nabla, calc.left1) - _einsum("ats,su->atu", calc.left2, nabla) - da_l
    right = (
        _einsum("tu,auv->atv", nabla, calc.right1)
        - _einsum("ats,su->atu", calc.right2, nabla)
        - _einsum("ts,asu->atu", sigma, da_r)
    )
    return float(np.abs(left).max(initial=0.0)), float(np.abs(right).max(initial=0.0))


def make_connection(calc: Calculus, nabla, sigma, provenance: str = "explicit", alpha=None, tol: float = DEFAULT_TOL) -> Connection:
    nabla = np.asarray(nabla, dtype=complex)
    sigma = np.asarray(sigma, dtype=complex)
    if nabla.shape != (calc.p, calc.m) or sigma.shape != (calc.p, calc.p):
        raise InvalidModel("connection matrices have the wrong shape")
    res = bimodule_map_residual(calc, sigma, "2", "2")
    if res > tol:
        raise InvalidModel(f"σ is not a bimodule map (residual {res:.3e})")
    left, right = leibniz_residuals(calc, nabla, sigma)
    if max(left, right) > tol:
        raise InvalidModel(f"connection violates Leibniz rules (left {left:.3e}, right {right:.3e})")
    return Connection(calc, frozen(nabla), frozen(sigma), provenance, None if alpha is None else frozen(alpha))


def graph_sigma_matrix(calc: GraphCalculus, blocks: Mapping | None = None) -> np.ndarray:
    """σ from matrices σ_{x,y} on each Ω²_{x,y}; absent blocks are the identity.

    ``blocks[(x, y)][z, w]`` is the coefficient of ω_{x→z→y} in σ(ω_{x→w→y}),
    rows and columns ordered as ``calc.intermediates``; keys are vertex labels.
    """
    S = np.eye(calc.p, dtype=complex)
    for (x, y), blk in (blocks or {}).items():
        i, j = calc.vertex_index(x), calc.vertex_index(y)
        mids = calc.intermediates(i, j)
        blk = np.asarray(blk, dtype=complex)
        if blk.shape != (len(mids), len(mids)):
            raise InvalidModel(f"σ block for ({x},{y}) must be {len(mids)}×{len(mids)}")
        idx = [calc.step_index[(i, w, j)] for w in mids]
        S[np.ix_(idx, idx)] = blk
    return S


def graph_sigma_block(calc: GraphCalculus, sigma, i: int, j: int) -> np.ndarray:
    """The σ_{i,j} block (vertex indices), rows/cols ordered as ``calc.intermediates``."""
    idx = [calc.step_index[(i, w, j)] for w in calc.intermediates(i, j)]
    return np.asarray(sigma)[np.ix_(idx, idx)]


def free_sigma_matrix(calc: FreeCalculus, coeffs) -> np.ndarray:
    """σ on Ω¹⊗Ω¹ from its values on s^i⊗s^j.

    ``coeffs`` is either a complex k²×k² matrix (column (i,j) holds the
    coefficients of σ(s^i⊗s^j) on s^k⊗s^l) or a (k², k², n) array of
    algebra-valued left coefficients.
    """
    k, n = calc.rank, calc.n
    C = np.asarray(coeffs, dtype=complex)
    if C.shape == (k * k, k * k):
        C = _einsum("xy,b->xyb", C, calc.algebra.unit)
    if C.shape != (k * k, k * k, n):
        raise InvalidModel("σ coefficients have the wrong shape")
    c = calc.algebra.structure_constants
    # σ(e_c s^i⊗s^j) = Σ e_c b s^k⊗s^l
    S = _einsum("xyb,cbd->xdyc", C, c)
    return S.reshape(k * k * n, k * k * n)


def make_bare_connection(calc: Calculus, tol: float = DEFAULT_TOL) -> Connection:
    """∇ω = θ⊗ω − ω⊗θ with σ = id."""
    return make_inner_connection(calc, np.eye(calc.p), provenance="bare", tol=tol)


def make_inner_connection(calc: Calculus, sigma, alpha=None, provenance: str = "inner", tol: float = DEFAULT_TOL) -> Connection:
    """∇ω = θ⊗ω − σ(ω⊗θ) + α(ω) for bimodule maps σ and α.

    ``sigma`` may be a full p×p matrix, graph block data (a mapping) or free
    basis coefficients (see free_sigma_matrix).
    """
    if isinstance(sigma, Mapping):
        sigma = graph_sigma_matrix(calc, sigma)
    sigma = np.asarray(sigma, dtype=complex)
    if sigma.shape != (calc.p, calc.p) and isinstance(calc, FreeCalculus):
        sigma = free_sigma_matrix(calc, sigma)
    res = bimodule_map_residual(calc, sigma, "2", "2")
    if res > tol:
        raise InvalidModel(f"σ is not a bimodule map (residual {res:.3e})")
    nabla = calc.tensor_left(calc.theta) - sigma @ calc.tensor_right(calc.theta)
    if alpha is not None:
        alpha = np.asarray(alpha, dtype=complex)
        res = bimodule_map_residual(calc, alpha, "1", "2")
        if res > tol:
            raise InvalidModel(f"α is not a bimodule map (residual {res:.3e})")
        nabla = nabla + alpha
    return make_connection(calc, nabla, sigma, provenance, alpha, tol)


def connection_from_basis(calc: FreeCalculus, christoffel, sigma, provenance: str = "explicit", tol: float = DEFAULT_TOL) -> Connection:
    """Extend ∇s^i = Σ Γ[i, k, l] s^k⊗s^l to Ω¹ by the left Leibniz rule.

    ``christoffel`` has shape (k, k, k) (complex constants) or (k, k, k, n)
    (algebra-valued left coefficients).
    """
    k, n = calc.rank, calc.n
    Gm = np.asarray(christoffel, dtype=complex)
    if Gm.shape == (k, k, k):
        Gm = _einsum("ikl,b->iklb", Gm, calc.algebra.unit)
    if Gm.shape != (k, k, k, n):
        raise InvalidModel("Christoffel data has the wrong shape")
    sigma = np.asarray(sigma, dtype=complex)
    if sigma.shape != (calc.p, calc.p):
        sigma = free_sigma_matrix(calc, sigma)
    c = calc.algebra.structure_constants
    # e_c ∇s^i
    N = _einsum("iklb,cbd->kldic", Gm, c).reshape(calc.p, calc.m)
    # + d e_c ⊗ s^i
    da = calc.d.reshape(k, n, n)  # [j, coeff, c]
    extra = np.zeros((k, k, n, k, n), dtype=complex)
    for i in range(k):
        extra[:, i, :, i, :] += da
    N = N + extra.reshape(calc.p, calc.m)
    return make_connection(calc, N, sigma, provenance, tol=tol)


# --------------------------------------------------------------------------- derived maps


def divergence_matrix(metric: QuantumMetric, conn: Connection) -> np.ndarray:
    """δ = ( , )∘∇ as an n×m matrix."""
    return metric.pairing @ conn.nabla


def divergence(metric: QuantumMetric, conn: Connection, omega) -> np.ndarray:
    return divergence_matrix(metric, conn) @ np.asarray(omega, dtype=complex)


def laplacian_matrix(metric: QuantumMetric, conn: Connection) -> np.ndarray:
    """Δ = ( , )∇d = δd on A."""
    return divergence_matrix(metric, conn) @ metric.calc.d


def laplacian(metric: QuantumMetric, conn: Connection, a) -> np.ndarray:
    return laplacian_matrix(metric, conn) @ np.asarray(a, dtype=complex)


def one_form_laplacian(metric: QuantumMetric, conn: Connection) -> np.ndarray:
    """dδ on Ω¹ (the Ω¹ block of the square of d + δ)."""
    return metric.calc.d @ divergence_matrix(metric, conn)


def _right_contraction(metric: QuantumMetric) -> np.ndarray:
    """K[u, k, v]: (id⊗( , )) of t_k⊗ω_v, i.e. left_factor[k]·(right_factor[k], ω_v)."""
    calc = metric.calc
    A_kv = _einsum("bt,tuv,ku->bkv", metric.pairing, calc.tensor, calc.right_factor)
    RL = _einsum("bus,ks->buk", calc.right1, calc.left_factor)
    return _einsum("bkv,buk->ukv", A_kv, RL)


def contracted_tensor_connection(metric: QuantumMetric, conn: Connection) -> np.ndarray:
    """(id⊗( , ))∘∇_{Ω¹⊗Ω¹} as an m×p matrix, where
    ∇_{Ω¹⊗Ω¹} = ∇⊗id + (σ⊗id)(id⊗∇)."""
    calc = metric.calc
    N, sig = conn.nabla, conn.sigma
    lf, rf = calc.left_factor, calc.right_factor
    K = _right_contraction(metric)
    KR = _einsum("uqv,kv->uqk", K, rf)
    NL = N @ lf.T
    NR = N @ rf.T
    term1 = _einsum("qk,uqk->uk", NL, KR)
    p = calc.p
    PLL = _einsum("tuv,ku,jv->tkj", calc.tensor, lf, lf)
    SPLL = (sig @ PLL.reshape(p, p * p)).reshape(p, p, p)
    X = np.transpose(SPLL, (0, 2, 1)) * NR[None]  # [q, j, k]
    term2 = KR.reshape(-1, p * p) @ X.reshape(p * p, p)
    return term1 + term2


def connection_laplacian(metric: QuantumMetric, conn: Connection) -> np.ndarray:
    """(id⊗( , ))∇_{Ω¹⊗Ω¹}∇ on Ω¹; equals dδ when ∇ is metric compatible."""
    return contracted_tensor_connection(metric, conn) @ conn.nabla


def graph_divergence_closed_form(metric: QuantumMetric, conn: Connection) -> np.ndarray:
    """δω_{x→y} = λ_{y→x}δ_y − (Σ_z λ_{x→z} σ_{x,x}{}^z{}_y) δ_x, evaluated arrow by arrow."""
    calc = metric.calc
    out = np.zeros((calc.n, calc.m), dtype=complex)
    for k, (x, y) in enumerate(calc.arrows):
        mids = calc.intermediates(x, x)
        blk = graph_sigma_block(calc, conn.sigma, x, x)
        col = mids.index(y)
        out[y, k] += metric.lam(y, x)
        out[x, k] -= sum(metric.lam(x, z) * blk[r, col] for r, z in enumerate(mids))
    return out


# --------------------------------------------------------------------------- checks


def check_star_preserving(calc: Calculus, conn: Connection, tol: float = DEFAULT_TOL) -> CheckResult:
    """∇∘* = σ∘†∘∇; detail also reports the (σ∘†)² = id residual."""
    lhs = conn.nabla @ calc.star1
    rhs = conn.sigma @ calc.dagger @ conn.nabla.conj()
    X = conn.sigma @ calc.dagger
    sq = norm(X @ X.conj() - np.eye(calc.p))
    return make_check("star_preserving", norm(lhs - rhs), tol, f"(σ†)²−id residual {sq:.3e}")


def sigma_dagger_square_residual(calc: Calculus, conn: Connection) -> float:
    X = conn.sigma @ calc.dagger
    return norm(X @ X.conj() - np.eye(calc.p))


def check_sigma_symmetric(metric: QuantumMetric, conn: Connection, tol: float = DEFAULT_TOL) -> CheckResult:
    G = metric.pairing
    return make_check("sigma_symmetric", norm(G @ conn.sigma - G), tol)


def check_metric_reality(metric: QuantumMetric, tol: float = DEFAULT_TOL) -> CheckResult:
    """*∘( , ) = ( , )∘†."""
    calc = metric.calc
    G = metric.pairing
    return make_check("metric_reality", norm(calc.algebra.star @ G.conj() - G @ calc.dagger), tol)


def check_minimal_reality(metric: QuantumMetric, conn: Connection, tol: float = DEFAULT_TOL) -> CheckResult:
    """Combined condition (ω, η)* = ( , )σ(η*⊗ω*) needed for J."""
    calc = metric.calc
    G = metric.pairing
    lhs = calc.algebra.star @ G.conj()
    rhs = G @ conn.sigma @ calc.dagger
    return make_check("minimal_reality", norm(lhs - rhs), tol)


def check_metric_compatible(metric: QuantumMetric, conn: Connection, tol: float = DEFAULT_TOL) -> CheckResult:
    """d( , ) = (id⊗( , ))∇_{Ω¹⊗Ω¹} on every basis two-tensor."""
    if not conn.sigma_invertible:
        raise NotApplicable("σ is not invertible")
    lhs = metric.calc.d @ metric.pairing
    rhs = contracted_tensor_connection(metric, conn)
    return make_check("metric_compatible", norm(lhs - rhs), tol)


def check_torsion_free(calc: Calculus, conn: Connection, tol: float = DEFAULT_TOL) -> CheckResult:
    """∧∇ − d = 0 on Ω¹; detail reports ∧(id + σ)."""
    if not isinstance(calc, FreeCalculus) or calc.wedge is None:
        raise NotApplicable("torsion needs a free calculus with wedge relations")
    W = wedge_matrix(calc)
    tor = norm(W @ conn.nabla - exterior_d1(calc))
    sym = norm(W @ (np.eye(calc.p) + conn.sigma))
    return make_check("torsion_free", max(tor, sym), tol, f"torsion {tor:.3e}, ∧(id+σ) {sym:.3e}")


def check_divergence_compatible(F: Functional, metric: QuantumMetric, conn: Connection, tol: float = DEFAULT_TOL) -> CheckResult:
    """∫∘δ = 0 on Ω¹; on graphs also μ_yλ_{y→x} = μ_xλ_{x→y}."""
    res = norm(F.weights @ divergence_matrix(metric, conn))
    detail = ""
    calc = metric.calc
    if isinstance(calc, GraphCalculus):
        mu = F.weights
        rel = max(abs(mu[y] * metric.lam(y, x) - mu[x] * metric.lam(x, y)) for (x, y) in calc.arrows)
        detail = f"μλ relation residual {rel:.3e}"
        res = max(res, rel) if np.allclose(conn.sigma, np.eye(calc.p)) else res
    return make_check("divergence_compatible", res, tol, detail)


def check_delta_star(metric: QuantumMetric, conn: Connection, tol: float = DEFAULT_TOL) -> CheckResult:
    """δ(ω*) = (δω)*."""
    calc = metric.calc
    delta = divergence_matrix(metric, conn)
    return make_check("delta_star", norm(delta @ calc.star1 - calc.algebra.star @ delta.conj()), tol)
