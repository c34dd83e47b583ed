"""Ready-made (calculus, metric, connection, functional) bundles for the worked examples."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .algebra import Functional, make_matrix_algebra, measure_functional, trace_functional
from .calculus import FreeCalculus, GraphCalculus, WedgeData, build_free_calculus, build_graph_calculus, inner_wedge_data
from .qrg import (
    Connection,
    QuantumMetric,
    connection_from_basis,
    make_bare_connection,
    make_inner_connection,
    make_metric,
)
from .report import DEFAULT_TOL, InvalidModel, frozen

MODEL_KINDS = ("graph", "an_chain", "polygon", "m2", "fuzzy_sphere")

_DESCRIPTIONS = {
    "graph": "weighted bidirected graph, bare or σ-block connection, automatic measure",
    "an_chain": "A_n Dynkin chain with q-integer measure",
    "polygon": "n-gon with edge-symmetric weights, bare or quantum Levi-Civita connection",
    "m2": "M_2(C) with the two metrics and their quantum Levi-Civita connections",
    "fuzzy_sphere": "reduced fuzzy sphere M_n(C) with a constant metric",
}


@dataclass(frozen=True)
class ModelBundle:
    kind: str
    calc: object
    metric: QuantumMetric
    conn: Connection
    functional: Functional
    alternates: Mapping[str, Connection] = field(default_factory=dict)
    notes: Mapping[str, object] = field(default_factory=dict)

    def with_connection(self, name: str) -> "ModelBundle":
        return ModelBundle(self.kind, self.calc, self.metric, self.alternates[name], self.functional, self.alternates, self.notes)


def describe_models() -> list[tuple[str, str]]:
    return [(k, _DESCRIPTIONS[k]) for k in MODEL_KINDS]


# --------------------------------------------------------------------------- graphs


def _graph_weights(calc: GraphCalculus, weights) -> dict:
    """Normalise weights (scalar, per-arrow sequence or {(x, y): λ}) to a label-keyed dict."""
    labels = [(calc.vertices[x], calc.vertices[y]) for (x, y) in calc.arrows]
    if np.isscalar(weights):
        return {key: weights for key in labels}
    if isinstance(weights, Mapping):
        out = {}
        for key in labels:
            if key in weights:
                out[key] = weights[key]
            elif (key[1], key[0]) in weights and len(weights) * 2 == len(labels):
                out[key] = weights[(key[1], key[0])]  # one weight per edge
            else:
                raise InvalidModel(f"missing weight for arrow {key[0]}->{key[1]}")
        return out
    vals = list(weights)
    if len(vals) != len(labels):
        raise InvalidModel(f"need {len(labels)} arrow weights, got {len(vals)}")
    return dict(zip(labels, vals))


def auto_measure(calc: GraphCalculus, metric: QuantumMetric, tol: float = 1e-9) -> np.ndarray:
    """Solve μ_y λ_{y→x} = μ_x λ_{x→y} by spanning-tree propagation, root of each component set to 1."""
    n = calc.n
    mu = np.full(n, np.nan)
    parent = {}
    for root in range(n):
        if not np.isnan(mu[root]):
            continue
        mu[root] = 1.0
        parent[root] = None
        stack = [root]
        while stack:
            x = stack.pop()
            for y in calc.out_neighbours(x):
                val = (mu[x] * metric.lam(x, y) / metric.lam(y, x)).real
                if np.isnan(mu[y]):
                    mu[y] = val
                    parent[y] = x
                    stack.append(y)
                elif abs(mu[y] - val) > tol * max(1.0, abs(val)):
                    raise InvalidModel(f"weights admit no divergence-compatible measure: cycle {_cycle(calc, parent, x, y)}")
    return mu


def _cycle(calc, parent, x, y) -> str:
    def path(v):
        out = [v]
        while parent[out[-1]] is not None:
            out.append(parent[out[-1]])
        return out

    px, py = path(x), path(y)
    common = next(v for v in px if v in py)
    loop = px[: px.index(common) + 1][::-1] + py[: py.index(common)]
    return "->".join(str(calc.vertices[v]) for v in loop + [loop[0]])


def model_weighted_graph(
    vertices: Sequence,
    arrows: Sequence,
    weights,
    mu="auto",
    connection="bare",
    allow_nonreal: bool = False,
    tol: float = DEFAULT_TOL,
) -> ModelBundle:
    """General weighted graph.

    ``connection`` is "bare" or σ-block data ``{(x, y): matrix}`` (see
    ``qrg.graph_sigma_matrix``).  ``mu`` is "auto" or one weight per vertex.
    """
    calc = build_graph_calculus(vertices, arrows, tol)
    metric = make_metric(calc, _graph_weights(calc, weights), allow_nonreal=allow_nonreal, tol=tol)
    bare = make_bare_connection(calc, tol)
    alternates = {"bare": bare}
    if isinstance(connection, str):
        if connection != "bare":
            raise InvalidModel(f"unknown graph connection {connection!r}")
        conn = bare
    else:
        conn = make_inner_connection(calc, connection, provenance="inner", tol=tol)
        alternates["inner"] = conn
    if isinstance(mu, str):
        if mu != "auto":
            raise InvalidModel(f"unknown measure option {mu!r}")
        mu_vals = auto_measure(calc, metric)
    else:
        mu_vals = np.asarray(mu, dtype=float)
        if mu_vals.shape != (calc.n,):
            raise InvalidModel("need one measure value per vertex")
    F = measure_functional(calc.algebra, mu_vals)
    return ModelBundle("graph", calc, metric, conn, F, alternates, {"mu": tuple(mu_vals)})


def q_integer(i: int, n: int) -> float:
    """Symmetric q-integer (i)_q at q = e^{iπ/(n+1)}, via the sine ratio."""
    return float(np.sin(i * np.pi / (n + 1)) / np.sin(np.pi / (n + 1)))


def model_an_chain(n: int, h: Sequence[float] | None = None, tol: float = DEFAULT_TOL) -> ModelBundle:
    """Path 1, 2, …, n with λ_{i→i+1} = 1/h_i, λ_{i+1→i} = 1/(φ_i h_i), μ_i = (i)_q."""
    if n < 2:
        raise InvalidModel("A_n chain needs n ≥ 2")
    h = [-1.0] * (n - 1) if h is None else [float(v) for v in h]
    if len(h) != n - 1:
        raise InvalidModel(f"need {n - 1} edge values h_i")
    if any(v >= 0 for v in h):
        raise InvalidModel("h_i must be negative for a positive inner product")
    vertices = list(range(1, n + 1))
    weights = {}
    for i in range(1, n):
        phi = q_integer(i + 1, n) / q_integer(i, n)
        weights[(i, i + 1)] = 1.0 / h[i - 1]
        weights[(i + 1, i)] = 1.0 / (phi * h[i - 1])
    arrows = list(weights)
    mu = [q_integer(i, n) for i in vertices]
    bundle = model_weighted_graph(vertices, arrows, weights, mu=mu, tol=tol)
    return ModelBundle("an_chain", bundle.calc, bundle.metric, bundle.conn, bundle.functional, bundle.alternates, {"mu": tuple(mu), "h": tuple(h)})


def polygon_sigma(calc: GraphCalculus, metric: QuantumMetric) -> np.ndarray:
    """σ of the natural connection on an n-gon: ρ_± on straight two-steps, swap on back-and-forth ones."""
    n = calc.n
    S = np.zeros((calc.p, calc.p))
    for k, (x, w, y) in enumerate(calc.two_steps):
        if x == y:
            back = (x, (2 * x - w) % n, x)
            S[calc.step_index[back], k] = 1.0
        else:
            S[k, k] = (metric.lam(x, w) / metric.lam(w, y)).real
    return S


def model_polygon(n: int, lam=-1.0, connection: str = "bare", tol: float = DEFAULT_TOL) -> ModelBundle:
    """n-gon with edge-symmetric weights λ (scalar or one per edge {i, i+1})."""
    if n < 3:
        raise InvalidModel("a polygon needs n ≥ 3")
    lams = [float(lam)] * n if np.isscalar(lam) else [float(v) for v in lam]
    if len(lams) != n:
        raise InvalidModel(f"need {n} edge weights")
    weights = {}
    for i in range(n):
        j = (i + 1) % n
        weights[(i, j)] = lams[i]
        weights[(j, i)] = lams[i]
    calc = build_graph_calculus(list(range(n)), list(weights), tol)
    metric = make_metric(calc, weights, tol=tol)
    bare = make_bare_connection(calc, tol)
    qlc = make_inner_connection(calc, polygon_sigma(calc, metric), provenance="qlc", tol=tol)
    alternates = {"bare": bare, "qlc": qlc}
    if connection not in alternates:
        raise InvalidModel(f"unknown polygon connection {connection!r}")
    F = measure_functional(calc.algebra, np.ones(n))
    return ModelBundle("polygon", calc, metric, alternates[connection], F, alternates, {"n": n, "lambda": tuple(lams)})


# --------------------------------------------------------------------------- M_2


def m2_calculus(tol: float = DEFAULT_TOL) -> FreeCalculus:
    """M_2 with central basis s, t, θ = E12 s + E21 t, s* = −t; s∧t = t∧s, s∧s = t∧t = 0."""
    A = make_matrix_algebra(2)
    th = np.array([A.element(E12=1), A.element(E21=1)])
    wedge = np.array([[[0.0, 1.0], [1.0, 0.0]]])
    return build_free_calculus(A, 2, th, [[0, -1], [-1, 0]], wedge=inner_wedge_data(A, wedge, th), basis_names=("s", "t"), tol=tol)


def _m2_case_i_qlc(calc: FreeCalculus, tol: float) -> Connection:
    flip = np.zeros((4, 4))
    for i in range(2):
        for j in range(2):
            flip[j * 2 + i, i * 2 + j] = 1.0
    return make_inner_connection(calc, -flip, provenance="qlc", tol=tol)


def _m2_case_ii_qlc(calc: FreeCalculus, rho: complex, tol: float) -> Connection:
    A = calc.algebra
    E12, E21 = A.element(E12=1), A.element(E21=1)
    s, t = 0, 1
    G = np.zeros((2, 2, 2, 4), dtype=complex)
    # ∇s = 2E21 t⊗s + ρE21(t⊗t − s⊗s) − ρE12(s⊗t − t⊗s)
    G[s, t, s] += 2 * E21
    G[s, t, t] += rho * E21
    G[s, s, s] -= rho * E21
    G[s, s, t] -= rho * E12
    G[s, t, s] += rho * E12
    # ∇t = 2E12 s⊗t + ρE12(t⊗t − s⊗s) − ρE21(s⊗t − t⊗s)
    G[t, s, t] += 2 * E12
    G[t, t, t] += rho * E12
    G[t, s, s] -= rho * E12
    G[t, s, t] -= rho * E21
    G[t, t, s] += rho * E21
    ss, st, ts, tt = 0, 1, 2, 3
    S = np.zeros((4, 4), dtype=complex)  # column = input s^i⊗s^j
    S[ss, ss], S[st, ss], S[ts, ss] = 1, rho, -rho
    S[tt, tt], S[st, tt], S[ts, tt] = 1, rho, -rho
    S[ts, st], S[ss, st], S[tt, st] = -1, rho, -rho
    S[st, ts], S[ss, ts], S[tt, ts] = -1, rho, -rho
    return connection_from_basis(calc, G, S, provenance="qlc", tol=tol)


def model_m2(case: str = "ii", lam: float = -1.0, rho: complex = 0.0, connection: str = "qlc", tol: float = DEFAULT_TOL) -> ModelBundle:
    """M_2 with Case (i) (s,t) = −λ, (t,s) = λ or Case (ii) (s,s) = (t,t) = λ; ∫ = ½Tr."""
    case = str(case).lower()
    rho = complex(rho)
    lam = complex(lam)
    if abs(lam.imag) > tol or lam == 0:
        raise InvalidModel("λ must be real and nonzero")
    lam = lam.real
    calc = m2_calculus(tol)
    if case == "i":
        if rho != 0:
            raise InvalidModel("ρ only parametrises Case (ii)")
        metric = make_metric(calc, [[0, -lam], [lam, 0]], tol=tol)
        qlc = _m2_case_i_qlc(calc, tol)
    elif case == "ii":
        if abs(rho.real) > tol:
            raise InvalidModel(f"ρ must be imaginary, got {rho}")
        metric = make_metric(calc, [[lam, 0], [0, lam]], tol=tol)
        qlc = _m2_case_ii_qlc(calc, 1j * rho.imag, tol)
    else:
        raise InvalidModel(f"unknown M_2 case {case!r}")
    alternates = {"bare": make_bare_connection(calc, tol), "qlc": qlc}
    if connection not in alternates:
        raise InvalidModel(f"unknown M_2 connection {connection!r}")
    F = trace_functional(calc.algebra, 2)
    return ModelBundle("m2", calc, metric, alternates[connection], F, alternates, {"case": case, "lambda": lam, "rho": rho})


# --------------------------------------------------------------------------- fuzzy sphere


def spin_matrices(n: int) -> np.ndarray:
    """Spin-(n−1)/2 generators J^1, J^2, J^3 with [J^i, J^j] = iε_{ijk}J^k."""
    j = (n - 1) / 2
    m = j - np.arange(n)
    jp = np.zeros((n, n), dtype=complex)
    for r in range(1, n):
        jp[r - 1, r] = np.sqrt(j * (j + 1) - m[r] * (m[r] + 1))
    jm = jp.conj().T
    return np.array([(jp + jm) / 2, (jp - jm) / 2j, np.diag(m).astype(complex)])


def levi_civita() -> np.ndarray:
    eps = np.zeros((3, 3, 3))
    for i, j, k in ((0, 1, 2), (1, 2, 0), (2, 0, 1)):
        eps[i, j, k] = 1.0
        eps[i, k, j] = -1.0
    return eps


def fuzzy_calculus(n: int, tol: float = DEFAULT_TOL) -> FreeCalculus:
    """Reduced fuzzy sphere M_n with x^i = (2/n)J^i, (s^i)* = s^i, θ = Σ x^i s^i/(2iλ_P), λ_P = 1/n."""
    if n < 2:
        raise InvalidModel("fuzzy sphere needs n ≥ 2")
    A = make_matrix_algebra(n)
    lp = 1.0 / n
    x = 2 * lp * spin_matrices(n)
    th = np.array([xi.reshape(-1) / (2j * lp) for xi in x])
    eps = levi_civita()
    # s^k∧s^l = ε_{qkl} e^q and ds^i = −½ε_{ikl}s^k∧s^l = −e^i
    ds = -np.einsum("iq,a->iqa", np.eye(3), A.unit)
    wedge = WedgeData(frozen(eps), frozen(ds))
    return build_free_calculus(A, 3, th, np.eye(3), wedge=wedge, basis_names=("s1", "s2", "s3"), tol=tol)


def fuzzy_coordinates(n: int) -> np.ndarray:
    """x^1, x^2, x^3 as n×n matrices."""
    return (2.0 / n) * spin_matrices(n)


def fuzzy_christoffel(g_inv) -> np.ndarray:
    """Γ[i, k, l] with ∇s^i = Σ Γ[i,k,l] s^k⊗s^l, Γ = −½g^{ij}(2ε_{jlm}g_{mk} + Tr(g)ε_{jkl})."""
    g_inv = np.asarray(g_inv, dtype=float)
    g = np.linalg.inv(g_inv)
    eps = levi_civita()
    inner = 2 * np.einsum("jlm,mk->jkl", eps, g) + np.trace(g) * eps
    return -0.5 * np.einsum("ij,jkl->ikl", g_inv, inner)


def model_fuzzy_sphere(n: int, g_inv=None, connection: str = "qlc", tol: float = DEFAULT_TOL) -> ModelBundle:
    g_inv = np.eye(3) if g_inv is None else np.asarray(g_inv, dtype=float)
    if g_inv.shape != (3, 3) or np.abs(g_inv - g_inv.T).max() > tol:
        raise InvalidModel("g_inv must be a real symmetric 3×3 matrix")
    if np.linalg.eigvalsh(g_inv).min() <= 0:
        raise InvalidModel("g_inv must be positive definite")
    calc = fuzzy_calculus(n, tol)
    metric = make_metric(calc, g_inv, tol=tol)
    flip = np.zeros((9, 9))
    for i in range(3):
        for j in range(3):
            flip[j * 3 + i, i * 3 + j] = 1.0
    qlc = connection_from_basis(calc, fuzzy_christoffel(g_inv), flip, provenance="qlc", tol=tol)
    alternates = {"bare": make_bare_connection(calc, tol), "qlc": qlc}
    if connection not in alternates:
        raise InvalidModel(f"unknown fuzzy-sphere connection {connection!r}")
    F = trace_functional(calc.algebra, n)
    return ModelBundle("fuzzy_sphere", calc, metric, alternates[connection], F, alternates, {"n": n, "lambda_P": 1.0 / n})
