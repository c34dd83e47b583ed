"""Coupling to a trivial line bundle E = A: α-modified connections, D_α, J_α and the right-handed package.

With Ω¹⊗_A A identified with Ω¹, a bimodule connection on A is fixed by
α = ζ(θ) + α₀ for a bimodule map ζ on Ω¹ and a central 1-form α₀.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .calculus import Calculus, FreeCalculus, GraphCalculus
from .qrg import Connection, bimodule_map_residual, check_metric_reality, check_star_preserving, make_connection
from .report import DEFAULT_TOL, CheckResult, InvalidModel, NotApplicable, VerificationReport, frozen, make_check, norm
from .spinor import SpinorPackage


@dataclass(frozen=True)
class GaugeData:
    calc: Calculus
    zeta: np.ndarray
    alpha0: np.ndarray
    alpha: np.ndarray

    @property
    def nabla_A(self) -> np.ndarray:
        """m×n matrix of a ↦ da + aα."""
        return self.calc.d + np.einsum("buv,v->ub", self.calc.left1, self.alpha)

    @property
    def sigma_A(self) -> np.ndarray:
        """a⊗ω ↦ a(id − ζ)ω, as a matrix on Ω¹."""
        return np.eye(self.calc.m) - self.zeta


@dataclass(frozen=True)
class RightPackage:
    nabla_R: np.ndarray
    delta_R: np.ndarray
    D_R: np.ndarray
    dagger_map: np.ndarray  # antilinear: φ ↦ dagger_map @ conj(φ)


def _zeta_matrix(calc: Calculus, zeta) -> np.ndarray:
    m = calc.m
    if zeta is None:
        return np.zeros((m, m), dtype=complex)
    if isinstance(calc, GraphCalculus) and isinstance(zeta, Mapping):
        Z = np.zeros((m, m), dtype=complex)
        for (x, y), v in zeta.items():
            k = calc.arrow(x, y)
            Z[k, k] = v
        return Z
    Z = np.asarray(zeta, dtype=complex)
    if isinstance(calc, GraphCalculus) and Z.shape == (m,):
        return np.diag(Z)
    if isinstance(calc, FreeCalculus) and Z.shape == (calc.rank, calc.rank):
        # ζ(s^i) = Σ_j Z[i, j] s^j
        return np.kron(Z.T, np.eye(calc.n))
    if Z.shape != (m, m):
        raise InvalidModel("ζ has the wrong shape")
    return Z


def make_gauge(calc: Calculus, zeta=None, alpha0=None, tol: float = DEFAULT_TOL) -> GaugeData:
    """Gauge data from a bimodule map ζ and a central 1-form α₀ (zero on graphs)."""
    Z = _zeta_matrix(calc, zeta)
    res = bimodule_map_residual(calc, Z, "1", "1")
    if res > tol:
        raise InvalidModel(f"ζ is not a bimodule map (residual {res:.3e})")
    a0 = np.zeros(calc.m, dtype=complex) if alpha0 is None else np.asarray(alpha0, dtype=complex)
    if isinstance(calc, FreeCalculus) and a0.shape == (calc.rank,):
        a0 = np.kron(a0, calc.algebra.unit)
    if a0.shape != (calc.m,):
        raise InvalidModel("α₀ has the wrong shape")
    central = max(norm(calc.left1[a] @ a0 - calc.right1[a] @ a0) for a in range(calc.n))
    if central > tol:
        raise InvalidModel(f"α₀ is not central (residual {central:.3e})")
    alpha = Z @ calc.theta + a0
    return GaugeData(calc, frozen(Z), frozen(a0), frozen(alpha))


def gauged_connection(conn: Connection, gauge: GaugeData, tol: float = DEFAULT_TOL) -> Connection:
    """∇_α ω = ∇ω + σ(ω⊗α) with σ_α(ω⊗η) = σ(ω⊗(id − ζ)η)."""
    calc = conn.calc
    nabla = conn.nabla + conn.sigma @ calc.tensor_right(gauge.alpha)
    right = (np.eye(calc.m) - gauge.zeta) @ calc.right_factor.T
    id_zeta = np.einsum("tuv,ku,vk->tk", calc.tensor, calc.left_factor, right)
    return make_connection(calc, nabla, conn.sigma @ id_zeta, provenance=f"gauged {conn.provenance}", tol=tol)


def gauged_j(pkg: SpinorPackage, gauge: GaugeData) -> np.ndarray:
    """Matrix part of J_α(a + ω) = a* + (id − ζ)(ω*)."""
    n = pkg.calc.n
    J = np.array(pkg.J)
    J[n:, n:] = (np.eye(pkg.calc.m) - gauge.zeta) @ pkg.calc.star1
    return J


def gauged_dirac(pkg: SpinorPackage, gauge: GaugeData, tol: float = DEFAULT_TOL) -> SpinorPackage:
    """D_α(a + ω) = ∇_A a + ( , )∇_α ω with J replaced by J_α; γ and the inner product unchanged."""
    calc, G = pkg.calc, pkg.metric.pairing
    conn = gauged_connection(pkg.conn, gauge, tol)
    n, m = calc.n, calc.m
    D = np.block([[np.zeros((n, n)), G @ conn.nabla], [gauge.nabla_A, np.zeros((m, m))]])
    return pkg.replace(D=D, J=gauged_j(pkg, gauge), conn=conn, variant="gauged")


def gauged_dirac_shortcut(pkg: SpinorPackage, gauge: GaugeData) -> np.ndarray:
    """D + aα + (ω, α); equals D_α when the metric is σ-symmetric."""
    calc, G = pkg.calc, pkg.metric.pairing
    n, m = calc.n, calc.m
    lower = np.einsum("buv,v->ub", calc.left1, gauge.alpha)
    upper = G @ calc.tensor_right(gauge.alpha)
    return pkg.D + np.block([[np.zeros((n, n)), upper], [lower, np.zeros((m, m))]])


def graph_gauged_dirac_closed_form(pkg: SpinorPackage, gauge: GaugeData) -> np.ndarray:
    """D_α(δ_x) = Dδ_x + Σ_{x→y} α_{x→y}ω_{x→y},  D_α(ω_{x→y}) = Dω_{x→y} + λ_{x→y}α_{y→x}δ_x."""
    calc = pkg.calc
    if not isinstance(calc, GraphCalculus):
        raise NotApplicable("closed form is for graph calculi")
    n = calc.n
    D = np.array(pkg.D, dtype=complex)
    for k, (x, y) in enumerate(calc.arrows):
        D[n + k, x] += gauge.alpha[k]
        D[x, n + k] += pkg.metric.lam(x, y) * gauge.alpha[calc.arrow_index[(y, x)]]
    return D


def graph_gauged_connection_closed_form(conn: Connection, gauge: GaugeData) -> np.ndarray:
    """∇_α ω_{x→y} = ∇ω_{x→y} + Σ_{y→z} α_{y→z} Σ_{x→w→z} σ_{x,z}{}^w{}_y ω_{x→w→z}."""
    calc = conn.calc
    N = np.array(conn.nabla, dtype=complex)
    for k, (x, y) in enumerate(calc.arrows):
        for z in calc.out_neighbours(y):
            src = calc.step_index[(x, y, z)]
            for w in calc.intermediates(x, z):
                dst = calc.step_index[(x, w, z)]
                N[dst, k] += gauge.alpha[calc.arrow_index[(y, z)]] * conn.sigma[dst, src]
    return N


def gauge_report(pkg: SpinorPackage, gauge: GaugeData, tol: float = DEFAULT_TOL) -> VerificationReport:
    """Checks on the α-coupled operators: generic vs shortcut D_α, J_α² and the J_α–D_α relation."""
    gp = gauged_dirac(pkg, gauge, tol)
    Ja, Da = gp.J, gp.D
    eye = np.eye(pkg.N)
    checks = (
        make_check("gauged_dirac_shortcut", norm(Da - gauged_dirac_shortcut(pkg, gauge)), tol, "D_α = D + aα + (ω, α)"),
        make_check("j_alpha_squared", norm(Ja @ Ja.conj() - eye), tol, "J_α² = id", required=False),
        make_check("j_alpha_commutes_d_alpha", norm(Ja @ Da.conj() - Da @ Ja), tol, "J_αD_α = D_αJ_α", required=False),
    )
    return VerificationReport(checks)


# --------------------------------------------------------------------------- right-handed operators


def right_dirac(pkg: SpinorPackage) -> RightPackage:
    """∇^R = σ⁻¹∇, δ^R = ( , )∇^R, D^R = d + δ^R, with † = (a ↦ a*, ω ↦ ω*)."""
    conn = pkg.conn
    if not conn.sigma_invertible:
        raise NotApplicable("σ is not invertible")
    calc = pkg.calc
    nabla_R = np.linalg.solve(conn.sigma, conn.nabla)
    delta_R = pkg.metric.pairing @ nabla_R
    n, m = calc.n, calc.m
    D_R = np.block([[np.zeros((n, n)), delta_R], [calc.d, np.zeros((m, m))]])
    return RightPackage(frozen(nabla_R), frozen(delta_R), frozen(D_R), frozen(pkg.J))


def check_dagger_intertwine(pkg: SpinorPackage, rpkg: RightPackage, tol: float = DEFAULT_TOL) -> CheckResult:
    """†∘D = D^R∘† on S; detail notes when ∇ is not *-preserving or the metric is not real."""
    calc = pkg.calc
    res = norm(rpkg.dagger_map @ pkg.D.conj() - rpkg.D_R @ rpkg.dagger_map)
    star_ok = check_star_preserving(calc, pkg.conn, tol).passed
    real_ok = check_metric_reality(pkg.metric, tol).passed
    detail = "" if star_ok and real_ok else "hypotheses unmet"
    return make_check("dagger_intertwine", res, tol, detail)


def check_right_isometry(pkg: SpinorPackage, tol: float = DEFAULT_TOL) -> CheckResult:
    """⟨φ†, ψ†⟩^R = ⟨ψ, φ⟩; for E = A the right-handed inner product has the same matrix as ⟨ , ⟩."""
    M, Jm = pkg.gram, pkg.J
    return make_check("right_isometry", norm(Jm.conj().T @ M @ Jm - M.T), tol)
