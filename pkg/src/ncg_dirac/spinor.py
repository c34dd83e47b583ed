"""The spinor module S = A ⊕ Ω¹: Dirac operator d + δ, J, γ, inner product and axiom checks.

Coordinates on S put the algebra block first and the Ω¹ block second, so
every operator is an N×N matrix with N = n + m.  J is antilinear and stored as
the matrix ``J`` with ``Jφ = J @ conj(φ)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .algebra import Functional, check_trace, positivity_form
from .calculus import Calculus, FreeCalculus
from .qrg import (
    Connection,
    QuantumMetric,
    bimodule_map_residual,
    check_divergence_compatible,
    contracted_tensor_connection,
    divergence_matrix,
    laplacian_matrix,
    leibniz_residuals,
    one_form_laplacian,
)
from .report import DEFAULT_TOL, CheckResult, InvalidModel, NotApplicable, VerificationReport, frozen, make_check, norm

KERNEL_TOL = 1e-7


@dataclass(frozen=True)
class SpinorPackage:
    calc: Calculus
    metric: QuantumMetric
    conn: Connection
    functional: Functional
    left_action: np.ndarray
    right_action: np.ndarray
    D: np.ndarray
    J: np.ndarray
    gamma: np.ndarray
    gram: np.ndarray
    variant: str = "geometric"

    @property
    def N(self) -> int:
        return self.D.shape[0]

    def apply_J(self, phi) -> np.ndarray:
        return self.J @ np.asarray(phi, dtype=complex).conj()

    def clifford(self, omega) -> np.ndarray:
        """Matrix of φ ↦ ω▷φ, with ω▷(a + η) = ωa + (ω, η)."""
        return clifford_action(self.calc, self.metric, omega)

    def replace(self, **changes) -> "SpinorPackage":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update({k: frozen(v) if isinstance(v, np.ndarray) else v for k, v in changes.items()})
        return SpinorPackage(**fields)


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: tuple
    kernel_dim: int
    hermitian_ok: bool
    warning: str = ""


def _blocks(a, b, c, d) -> np.ndarray:
    return np.block([[a, b], [c, d]])


def clifford_action(calc: Calculus, metric: QuantumMetric, omega) -> np.ndarray:
    omega = np.asarray(omega, dtype=complex)
    n, m = calc.n, calc.m
    to_forms = np.einsum("buv,v->ub", calc.right1, omega)  # a ↦ ωa
    to_alg = metric.pairing @ calc.tensor_left(omega)  # η ↦ (ω, η)
    return _blocks(np.zeros((n, n)), to_alg, to_forms, np.zeros((m, m)))


def one_form_gram(calc: Calculus, metric: QuantumMetric, F: Functional) -> np.ndarray:
    """B[u, v] = ∫(ω_u*, ω_v)."""
    return np.einsum("b,bt,tqv,qu->uv", F.weights, metric.pairing, calc.tensor, calc.star1, optimize=True)


def build_spinor(calc: Calculus, metric: QuantumMetric, conn: Connection, F: Functional) -> SpinorPackage:
    n, m = calc.n, calc.m
    zn, zm = np.zeros((n, n)), np.zeros((m, m))
    znm, zmn = np.zeros((n, m)), np.zeros((m, n))
    delta = divergence_matrix(metric, conn)
    D = _blocks(zn, delta, calc.d, zm)
    J = _blocks(calc.algebra.star, znm, zmn, calc.star1)
    gamma = _blocks(np.eye(n), znm, zmn, -np.eye(m))
    gram = _blocks(positivity_form(F, calc.algebra), znm, zmn, one_form_gram(calc, metric, F))
    left = np.stack([scipy.linalg.block_diag(calc.algebra.left_mult[a], calc.left1[a]) for a in range(n)])
    right = np.stack([scipy.linalg.block_diag(calc.algebra.right_mult[a], calc.right1[a]) for a in range(n)])
    return SpinorPackage(
        calc, metric, conn, F, frozen(left), frozen(right), frozen(D), frozen(J), frozen(gamma), frozen(gram)
    )


def spinor_from_model(bundle, connection: str | None = None) -> SpinorPackage:
    """SpinorPackage of a models.ModelBundle, optionally with one of its named alternates."""
    conn = bundle.conn if connection is None else bundle.alternates[connection]
    return build_spinor(bundle.calc, bundle.metric, conn, bundle.functional)


# --------------------------------------------------------------------------- free-backend extras


def clifford_matrices(pkg: SpinorPackage) -> np.ndarray:
    """Coefficient-level matrices C^i of s^i▷ on (φ_0, φ_1, …, φ_k); C^i[0][j] = g^{ij}, C^i[j][0] = δ_ij."""
    calc = pkg.calc
    if not isinstance(calc, FreeCalculus):
        raise NotApplicable("Clifford matrices need a free calculus")
    k = calc.rank
    g = pkg.metric.g_inv
    C = np.zeros((k, k + 1, k + 1), dtype=complex)
    for i in range(k):
        C[i, 0, 1:] = g[i]
        C[i, 1 + i, 0] = 1.0
    return C


def clifford_trace_residual(pkg: SpinorPackage) -> float:
    """max |Tr(C^iC^j) − g^{ij} − g^{ji}|."""
    C = clifford_matrices(pkg)
    g = pkg.metric.g_inv
    tr = np.einsum("iab,jba->ij", C, C)
    return float(np.abs(tr - g - g.T).max())


def partial_derivatives(calc: FreeCalculus) -> np.ndarray:
    """∂_i = [θ_i, ·] as n×n matrices."""
    L, R = calc.algebra.left_mult, calc.algebra.right_mult
    return np.stack([np.einsum("a,aij->ij", th, L) - np.einsum("a,aij->ij", th, R) for th in calc.theta_coeffs])


def inner_form_operator(pkg: SpinorPackage) -> np.ndarray:
    """Σ_i C^i ⊗ ∂_i on S coordinates."""
    C = clifford_matrices(pkg)
    dd = partial_derivatives(pkg.calc)
    return sum(np.kron(C[i], dd[i]) for i in range(C.shape[0]))


def check_inner_form(pkg: SpinorPackage, tol: float = DEFAULT_TOL) -> CheckResult:
    """D = Σ_i C^i ∂_i as an operator identity."""
    return make_check("inner_form", norm(pkg.D - inner_form_operator(pkg)), tol)


# --------------------------------------------------------------------------- verifier


def _positivity(pkg: SpinorPackage, tol: float) -> CheckResult:
    n = pkg.calc.n
    M = pkg.gram
    herm = (M + M.conj().T) / 2
    low_a = float(np.linalg.eigvalsh(herm[:n, :n]).min())
    low_1 = float(np.linalg.eigvalsh(herm[n:, n:]).min()) if pkg.calc.m else np.inf
    low = min(low_a, low_1)
    detail = f"min eigenvalue A-block {low_a:.6g}, Ω¹-block {low_1:.6g}"
    return CheckResult("positivity", bool(low > tol), max(0.0, tol - low), detail)


def _extended_trace(pkg: SpinorPackage, tol: float) -> CheckResult:
    calc, F = pkg.calc, pkg.functional
    alg = check_trace(F, calc.algebra, tol).residual
    B = np.einsum("b,bt,tuv->uv", F.weights, pkg.metric.pairing, calc.tensor, optimize=True)
    forms = float(np.abs(B - B.T).max(initial=0.0))
    return make_check("extended_trace", max(alg, forms), tol, f"algebra {alg:.3e}, one-forms {forms:.3e}")


def covariance_residual(pkg: SpinorPackage) -> tuple[float, float]:
    """Residuals of ∇̈(▷) = 0 on A-valued and Ω¹-valued spinors.

    On φ = a it reduces to the right Leibniz rule, on φ = η to
    d(ω, η) = (id⊗( , ))∇_{Ω¹⊗Ω¹}(ω⊗η).
    """
    calc, metric, conn = pkg.calc, pkg.metric, pkg.conn
    _, right = leibniz_residuals(calc, conn.nabla, conn.sigma)
    forms = norm(calc.d @ metric.pairing - contracted_tensor_connection(metric, conn))
    return right, forms


def verify_spectral_triple(pkg: SpinorPackage, F: Functional | None = None, tol: float = DEFAULT_TOL) -> VerificationReport:
    if F is not None and F is not pkg.functional:
        pkg = build_spinor(pkg.calc, pkg.metric, pkg.conn, F).replace(D=pkg.D, J=pkg.J, variant=pkg.variant)
    calc, metric = pkg.calc, pkg.metric
    D, Jm, gam, M = pkg.D, pkg.J, pkg.gamma, pkg.gram
    L, R = pkg.left_action, pkg.right_action
    N = pkg.N
    eye = np.eye(N)
    checks = []

    comm = D @ L - L @ D
    cliff = np.stack([clifford_action(calc, metric, calc.d[:, a]) for a in range(calc.n)])
    checks.append(make_check("dirac_commutator", np.abs(comm - cliff).max(initial=0.0), tol, "[D,a] = (da)▷"))

    # JbJ⁻¹ is linear with matrix J conj(b) J⁻¹
    opp = Jm @ L.conj() @ np.linalg.inv(Jm)
    first = comm[:, None] @ opp[None] - opp[None] @ comm[:, None]
    checks.append(make_check("first_order", np.abs(first).max(initial=0.0), tol, "[[D,a], JbJ⁻¹] = 0"))
    cmt = L[:, None] @ opp[None] - opp[None] @ L[:, None]
    checks.append(make_check("commutant", np.abs(cmt).max(initial=0.0), tol, "[a, JbJ⁻¹] = 0"))

    gl = gam @ L - L @ gam
    checks.append(make_check("gamma_commutes", np.abs(gl).max(initial=0.0), tol, "[γ, a] = 0"))
    checks.append(make_check("j_squared", norm(Jm @ Jm.conj() - eye), tol, "J² = id"))
    checks.append(make_check("gamma_squared", norm(gam @ gam - eye), tol, "γ² = id"))
    checks.append(make_check("gamma_anticommutes_d", norm(D @ gam + gam @ D), tol, "Dγ = −γD"))
    checks.append(make_check("j_gamma", norm(Jm @ gam.conj() - gam @ Jm), tol, "Jγ = γJ"))
    checks.append(make_check("j_commutes_d", norm(Jm @ D.conj() - D @ Jm), tol, "JD = DJ"))
    checks.append(make_check("gram_hermitian", norm(M - M.conj().T), tol))
    checks.append(make_check("d_antihermitian", norm(M @ D + D.conj().T @ M), tol, "⟨φ, Dψ⟩ = −⟨Dφ, ψ⟩"))
    checks.append(make_check("gamma_hermitian", norm(M @ gam - gam.conj().T @ M), tol))
    checks.append(make_check("j_isometry", norm(Jm.conj().T @ M @ Jm - M.T), tol, "⟨Jφ, Jψ⟩ = ⟨ψ, φ⟩"))
    star = calc.algebra.star
    adj = max(
        norm(M @ L[a] - np.einsum("b,bij->ij", star[:, a], L).conj().T @ M) for a in range(calc.n)
    )
    checks.append(make_check("adjointness", adj, tol, "⟨φ, aψ⟩ = ⟨a*φ, ψ⟩"))
    checks.append(_positivity(pkg, tol))
    checks.append(_extended_trace(pkg, tol))
    div = check_divergence_compatible(pkg.functional, metric, pkg.conn, tol)
    checks.append(div)

    if pkg.variant == "geometric":
        lap = scipy.linalg.block_diag(laplacian_matrix(metric, pkg.conn), one_form_laplacian(metric, pkg.conn))
        checks.append(make_check("d_squared_laplacian", norm(D @ D - lap), tol, "D² = Δ_A ⊕ Δ_Ω¹"))
        right, forms = covariance_residual(pkg)
        if pkg.conn.sigma_invertible:
            cross = f"metric compatible: {forms < tol}"
        else:
            cross = "metric compatibility not applicable"
        checks.append(make_check("clifford_covariance", max(right, forms), tol, cross, required=False))

    return VerificationReport(tuple(checks))


def minimal_reality_residual(pkg: SpinorPackage) -> float:
    """∫((ω,η)*) = ∫(( , )σ(η*⊗ω*)) over basis pairs: the weakest condition for the J-isometry on Ω¹."""
    calc, G, F = pkg.calc, pkg.metric.pairing, pkg.functional
    w = F.weights
    lhs = np.einsum("b,bt,tuv->uv", w, calc.algebra.star @ G.conj(), calc.tensor, optimize=True)
    rhs = np.einsum("b,bt,tuv->uv", w, G @ pkg.conn.sigma @ calc.dagger, calc.tensor, optimize=True)
    return float(np.abs(lhs - rhs).max(initial=0.0))


# --------------------------------------------------------------------------- spectra


def spectrum(pkg: SpinorPackage, tol: float = DEFAULT_TOL, kernel_tol: float = KERNEL_TOL) -> Spectrum:
    """Eigenvalues of iD, in a gram-orthonormal frame when D is antihermitian for a positive gram."""
    D, M = pkg.D, pkg.gram
    anti = norm(M @ D + D.conj().T @ M) < tol
    herm_gram = norm(M - M.conj().T) < tol
    chol = None
    if herm_gram:
        try:
            chol = np.linalg.cholesky((M + M.conj().T) / 2)
        except np.linalg.LinAlgError:
            chol = None
    if anti and chol is not None:
        Lh = chol.conj().T
        H = 1j * Lh @ D @ np.linalg.inv(Lh)
        ev = np.sort(np.linalg.eigvalsh((H + H.conj().T) / 2))
        kernel = int(np.sum(np.abs(ev) < kernel_tol))
        return Spectrum(tuple(float(x) for x in ev), kernel, True)
    warning = "gram is not positive definite; raw-frame eigenvalues" if chol is None else "D is not antihermitian"
    ev = np.linalg.eigvals(1j * D)
    ev = sorted(ev, key=lambda z: (round(z.real, 12), round(z.imag, 12)))
    kernel = int(sum(abs(z) < kernel_tol for z in ev))
    return Spectrum(tuple(complex(z) for z in ev), kernel, False, warning)


# --------------------------------------------------------------------------- α_S modification


def modified_dirac_alpha_s(pkg: SpinorPackage, alpha0, alpha, tol: float = DEFAULT_TOL) -> tuple[SpinorPackage, VerificationReport]:
    """D(a + ω) + aα₀ + ( , )α(ω) together with the three conditions keeping J, γ and the inner product."""
    calc, G = pkg.calc, pkg.metric.pairing
    alpha0 = np.asarray(alpha0, dtype=complex)
    alpha = np.asarray(alpha, dtype=complex)
    if alpha0.shape != (calc.m,) or alpha.shape != (calc.p, calc.m):
        raise InvalidModel("α₀ must be a 1-form and α a map Ω¹ → Ω¹⊗Ω¹")
    central = max(norm(calc.left1[a] @ alpha0 - calc.right1[a] @ alpha0) for a in range(calc.n))
    if central > tol:
        raise InvalidModel(f"α₀ is not central (residual {central:.3e})")
    res = bimodule_map_residual(calc, alpha, "1", "2")
    if res > tol:
        raise InvalidModel(f"α is not a bimodule map (residual {res:.3e})")
    n, m = calc.n, calc.m
    lower = np.einsum("buv,v->ub", calc.left1, alpha0)
    shift = _blocks(np.zeros((n, n)), G @ alpha, lower, np.zeros((m, m)))
    new = pkg.replace(D=pkg.D + shift, variant="alpha_s")
    conds = (
        make_check("alpha0_selfadjoint", norm(calc.star1 @ alpha0.conj() - alpha0), tol, "α₀* = α₀"),
        make_check("alpha_star", norm(alpha @ calc.star1 - pkg.conn.sigma @ calc.dagger @ alpha.conj()), tol, "α∘* = σ∘†∘α"),
        make_check("alpha_metric", norm(G @ alpha + G @ calc.tensor_left(alpha0)), tol, "( , )α + (α₀, ) = 0"),
    )
    report = verify_spectral_triple(new, tol=tol)
    return new, VerificationReport(conds + report.checks)
