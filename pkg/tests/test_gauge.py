import numpy as np
import pytest

from ncg_dirac.calculus import graph_one_form
from ncg_dirac.gauge import (
    check_dagger_intertwine,
    check_right_isometry,
    gauge_report,
    gauged_connection,
    gauged_dirac,
    gauged_j,
    graph_gauged_connection_closed_form,
    graph_gauged_dirac_closed_form,
    make_gauge,
    right_dirac,
)
from ncg_dirac.models import model_fuzzy_sphere, model_m2, model_polygon, model_weighted_graph
from ncg_dirac.qrg import check_sigma_symmetric
from ncg_dirac.report import InvalidModel, NotApplicable
from ncg_dirac.spinor import spinor_from_model

from conftest import TRIANGLE_ARROWS, two_node


def test_trivial_gauge(pair):
    g = make_gauge(pair.calc)
    assert not g.alpha.any()
    assert np.array_equal(g.nabla_A, pair.calc.d)


def test_graph_alpha_from_zeta(pair):
    g = make_gauge(pair.calc, {("x", "y"): 2.0, ("y", "x"): 1j})
    assert np.allclose(g.alpha, graph_one_form(pair.calc, {("x", "y"): 2.0, ("y", "x"): 1j}))


def test_graph_rejects_alpha0(pair):
    with pytest.raises(InvalidModel):
        make_gauge(pair.calc, alpha0=[1.0, 0.0])


def test_non_bimodule_zeta_rejected(triangle):
    Z = np.ones((triangle.calc.m, triangle.calc.m))
    with pytest.raises(InvalidModel):
        make_gauge(triangle.calc, Z)


def test_free_central_alpha0(m2_ii):
    g = make_gauge(m2_ii.calc, alpha0=[1.0, -1.0])
    assert np.allclose(g.alpha, np.r_[m2_ii.calc.algebra.unit, -m2_ii.calc.algebra.unit])


def test_zero_alpha_is_identity(m2_ii):
    pkg = spinor_from_model(m2_ii)
    gp = gauged_dirac(pkg, make_gauge(m2_ii.calc))
    assert np.array_equal(gp.D, pkg.D)
    assert np.array_equal(gp.J, pkg.J)


def test_two_node_closed_form():
    b = two_node()
    pkg = spinor_from_model(b)
    g = make_gauge(b.calc, {("x", "y"): 1.0, ("y", "x"): 0.0})
    gp = gauged_dirac(pkg, g)
    assert np.abs(gp.D - graph_gauged_dirac_closed_form(pkg, g)).max() < 1e-12
    dx = np.r_[1, 0, 0, 0]
    wxy = np.r_[0, 0, 1, 0]
    assert np.allclose(gp.D @ dx, pkg.D @ dx + wxy)
    assert np.allclose(gp.D @ wxy, pkg.D @ wxy)


def test_gauged_j_on_arrow():
    b = two_node()
    pkg = spinor_from_model(b)
    g = make_gauge(b.calc, {("x", "y"): 0.0, ("y", "x"): 0.25})
    J = gauged_j(pkg, g)
    out = J @ np.r_[0, 0, 1, 0].conj()
    assert np.allclose(out, np.r_[0, 0, 0, 0.25 - 1])


def test_graph_connection_closed_form(rng):
    b = model_weighted_graph([0, 1, 2], TRIANGLE_ARROWS, -1.0,
                             connection={(0, 0): np.eye(2) + 0.2 * rng.standard_normal((2, 2))})
    vals = rng.standard_normal(6) + 1j * rng.standard_normal(6)
    g = make_gauge(b.calc, vals)
    N = gauged_connection(b.conn, g).nabla
    assert np.abs(N - graph_gauged_connection_closed_form(b.conn, g)).max() < 1e-12


def test_gauge_report_shortcut(triangle):
    pkg = spinor_from_model(triangle)
    g = make_gauge(triangle.calc, np.linspace(0.1, 0.6, 6))
    rep = gauge_report(pkg, g)
    assert rep["gauged_dirac_shortcut"].passed


def test_right_dirac_bare_is_d(triangle):
    pkg = spinor_from_model(triangle)
    r = right_dirac(pkg)
    assert np.allclose(r.D_R, pkg.D)


def test_right_dirac_case_ii(m2_ii):
    pkg = spinor_from_model(m2_ii)
    r = right_dirac(pkg)
    assert np.allclose(r.delta_R, pkg.D[: pkg.calc.n, pkg.calc.n:])


def test_right_dirac_singular_sigma():
    b = model_weighted_graph([0, 1, 2], TRIANGLE_ARROWS, -1.0, connection={(0, 0): np.zeros((2, 2))})
    with pytest.raises(NotApplicable):
        right_dirac(spinor_from_model(b))


@pytest.mark.parametrize("build", [
    lambda: model_m2("i", -1.0),
    lambda: model_m2("ii", -1.0, 1j),
    lambda: model_fuzzy_sphere(2),
    lambda: model_polygon(5, [-1.0, -2.0, -1.0, -3.0, -1.5], "qlc"),
])
def test_dagger_intertwine(build):
    b = build()
    pkg = spinor_from_model(b)
    r = check_dagger_intertwine(pkg, right_dirac(pkg))
    assert r.passed and r.detail == ""


def test_dagger_intertwine_annotated():
    b = model_weighted_graph([0, 1, 2], TRIANGLE_ARROWS, -1.0, connection={(0, 1): [[2.0]]})
    pkg = spinor_from_model(b)
    r = check_dagger_intertwine(pkg, right_dirac(pkg))
    assert r.detail == "hypotheses unmet"
    assert np.isfinite(r.residual)


def test_right_isometry(triangle, m2_ii):
    assert check_right_isometry(spinor_from_model(triangle)).passed
    assert check_sigma_symmetric(m2_ii.metric, m2_ii.conn).passed
