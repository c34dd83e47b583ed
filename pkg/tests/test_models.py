import numpy as np
import pytest

from ncg_dirac.calculus import differential
from ncg_dirac.models import (
    MODEL_KINDS,
    describe_models,
    fuzzy_coordinates,
    model_an_chain,
    model_fuzzy_sphere,
    model_m2,
    model_polygon,
    model_weighted_graph,
    q_integer,
    spin_matrices,
)
from ncg_dirac.qrg import divergence_matrix
from ncg_dirac.report import InvalidModel

from conftest import TRIANGLE_ARROWS, two_node


def test_kinds_listed():
    kinds = [k for k, _ in describe_models()]
    assert kinds == list(MODEL_KINDS)
    assert len(kinds) == 5


def test_auto_measure_two_node():
    b = two_node(-1.0, -2.0)
    assert np.allclose(b.notes["mu"], [1.0, 0.5])


def test_inconsistent_cycle_rejected():
    w = {(0, 1): -1.0, (1, 0): -2.0, (1, 2): -1.0, (2, 1): -1.0, (0, 2): -1.0, (2, 0): -1.0}
    with pytest.raises(InvalidModel, match="cycle"):
        model_weighted_graph([0, 1, 2], TRIANGLE_ARROWS, w)


def test_edge_weights_shared_by_both_arrows():
    b = model_weighted_graph(["x", "y"], [("x", "y"), ("y", "x")], {("x", "y"): -3.0})
    assert b.metric.lam(0, 1) == b.metric.lam(1, 0) == -3.0


@pytest.mark.parametrize("n", [2, 3, 6, 11])
def test_q_integers(n):
    assert q_integer(1, n) == pytest.approx(1.0)
    assert q_integer(n, n) == pytest.approx(1.0)
    for i in range(1, n + 1):
        assert q_integer(i, n) == pytest.approx(q_integer(n + 1 - i, n))
        assert q_integer(i, n) > 0


def test_an_chain_three():
    b = model_an_chain(3)
    assert np.allclose(b.notes["mu"], [1, np.sqrt(2), 1])
    assert np.abs(b.functional.weights @ divergence_matrix(b.metric, b.conn)).max() < 1e-12


def test_an_chain_rejects_positive_h():
    with pytest.raises(InvalidModel):
        model_an_chain(3, [-1.0, 0.5])
    with pytest.raises(InvalidModel):
        model_an_chain(3, [-1.0])


def test_polygon_shapes():
    b = model_polygon(4)
    assert (b.calc.n, b.calc.m, b.calc.p) == (4, 8, 16)
    with pytest.raises(InvalidModel):
        model_polygon(2)
    with pytest.raises(InvalidModel):
        model_polygon(4, connection="levi")


def test_polygon_qlc_sigma_constant_weight_is_swap_on_returns():
    b = model_polygon(5, connection="qlc")
    c, S = b.calc, b.conn.sigma
    k = c.step_index[(0, 1, 0)]
    assert S[c.step_index[(0, 4, 0)], k] == 1
    straight = c.step_index[(0, 1, 2)]
    assert S[straight, straight] == 1


def test_m2_parameters():
    with pytest.raises(InvalidModel):
        model_m2("i", -1.0, 1j)
    with pytest.raises(InvalidModel):
        model_m2("ii", -1.0, 1.0)
    with pytest.raises(InvalidModel):
        model_m2("iii")
    with pytest.raises(InvalidModel):
        model_m2("ii", 0.0)
    b = model_m2("ii", -1.0, 1j)
    assert b.functional.weights[0] == pytest.approx(0.5)


def test_spin_matrices_commutators():
    for n in (2, 3, 4):
        J = spin_matrices(n)
        assert np.allclose(J[0] @ J[1] - J[1] @ J[0], 1j * J[2])
        casimir = sum(j @ j for j in J)
        jj = (n - 1) / 2
        assert np.allclose(casimir, jj * (jj + 1) * np.eye(n))


def test_fuzzy_radius_two():
    x = fuzzy_coordinates(2)
    assert np.allclose(sum(xi @ xi for xi in x), 0.75 * np.eye(2))


def test_fuzzy_dirac_on_coordinate():
    b = model_fuzzy_sphere(2)
    c = b.calc
    x = fuzzy_coordinates(2)
    dx1 = c.split(differential(c, x[0].ravel()))
    assert np.allclose(dx1[0], 0)
    assert np.allclose(dx1[1], -x[2].ravel())
    assert np.allclose(dx1[2], x[1].ravel())


def test_fuzzy_metric_validation():
    with pytest.raises(InvalidModel):
        model_fuzzy_sphere(2, np.diag([1.0, -1.0, 1.0]))
    with pytest.raises(InvalidModel):
        model_fuzzy_sphere(2, np.array([[1.0, 0.2, 0], [0, 1, 0], [0, 0, 1]]))
    with pytest.raises(InvalidModel):
        model_fuzzy_sphere(1)
