import numpy as np
import pytest

from ncg_dirac.algebra import make_matrix_algebra
from ncg_dirac.calculus import (
    build_free_calculus,
    build_graph_calculus,
    differential,
    exterior_d1,
    graph_one_form,
    star_one_form,
    tensor_product,
    tensor_star,
)
from ncg_dirac.models import fuzzy_calculus, fuzzy_coordinates, levi_civita, m2_calculus
from ncg_dirac.report import InvalidModel

from conftest import TRIANGLE_ARROWS


def test_two_node_enumeration():
    c = build_graph_calculus(["x", "y"], [("x", "y"), ("y", "x")])
    assert c.one_form_labels == ("x->y", "y->x")
    assert c.tensor_labels == ("x->y->x", "y->x->y")


def test_triangle_enumeration():
    c = build_graph_calculus([0, 1, 2], TRIANGLE_ARROWS)
    assert (c.m, c.p) == (6, 12)
    for (x, w, y) in c.two_steps:
        assert (x, w) in c.arrow_index and (w, y) in c.arrow_index


@pytest.mark.parametrize("arrows", [[("x", "y")], [("x", "x"), ("x", "y"), ("y", "x")], [("x", "z"), ("z", "x")]])
def test_bad_graphs(arrows):
    with pytest.raises(InvalidModel):
        build_graph_calculus(["x", "y"], arrows)


def test_graph_differential():
    c = build_graph_calculus(["x", "y"], [("x", "y"), ("y", "x")])
    dx = differential(c, c.algebra.element(x=1))
    assert np.allclose(dx, graph_one_form(c, {("y", "x"): 1, ("x", "y"): -1}))
    assert np.allclose(differential(c, c.algebra.unit), 0)


def test_graph_star_and_dagger():
    c = build_graph_calculus(["x", "y"], [("x", "y"), ("y", "x")])
    w = graph_one_form(c, {("x", "y"): 1j})
    assert np.allclose(star_one_form(c, w), graph_one_form(c, {("y", "x"): 1j}))
    t = tensor_product(c, graph_one_form(c, {("x", "y"): 1}), graph_one_form(c, {("y", "x"): 1}))
    assert np.allclose(tensor_star(c, t), t)


def test_m2_calculus():
    c = m2_calculus()
    A = c.algebra
    s = c.one_form([A.unit, np.zeros(4)])
    t = c.one_form([np.zeros(4), A.unit])
    assert np.allclose(star_one_form(c, s), -t)
    assert np.allclose(star_one_form(c, c.theta), -c.theta)
    st = tensor_product(c, s, t)
    assert np.allclose(tensor_star(c, st), st)
    ss = tensor_product(c, s, s)
    assert np.allclose(tensor_star(c, ss), tensor_product(c, t, t))


def test_theta_must_be_antiselfadjoint():
    A = make_matrix_algebra(2)
    th = np.array([A.element(E11=1.0, E22=-1.0)])
    with pytest.raises(InvalidModel):
        build_free_calculus(A, 1, th, np.eye(1))


def test_fuzzy_differential_of_coordinates():
    n = 3
    c = fuzzy_calculus(n)
    x = fuzzy_coordinates(n)
    eps = levi_civita()
    for i in range(3):
        dx = c.split(differential(c, x[i].ravel()))
        expect = np.einsum("jk,jab->kab", eps[i], x).reshape(3, -1)
        assert np.allclose(dx, expect)


def test_fuzzy_d_squared_vanishes():
    c = fuzzy_calculus(3)
    assert np.abs(exterior_d1(c) @ c.d).max() < 1e-12
    m = m2_calculus()
    assert np.abs(exterior_d1(m) @ m.d).max() < 1e-12


def test_dagger_involution_random(rng):
    c = m2_calculus()
    for _ in range(100):
        T = rng.standard_normal(c.p) + 1j * rng.standard_normal(c.p)
        assert np.allclose(tensor_star(c, tensor_star(c, T)), T)


def test_antilinearity(rng):
    c = m2_calculus()
    w = rng.standard_normal(c.m) + 1j * rng.standard_normal(c.m)
    z = complex(rng.standard_normal(), rng.standard_normal())
    assert np.allclose(star_one_form(c, z * w), np.conj(z) * star_one_form(c, w))
