import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from ncg_dirac.algebra import make_matrix_algebra, mul, star
from ncg_dirac.calculus import tensor_star
from ncg_dirac.models import model_fuzzy_sphere, model_m2, model_polygon, model_weighted_graph
from ncg_dirac.qrg import (
    check_delta_star,
    check_metric_reality,
    check_sigma_symmetric,
    check_star_preserving,
    make_inner_connection,
    sigma_dagger_square_residual,
)
from ncg_dirac.spinor import spectrum, spinor_from_model, verify_spectral_triple

from conftest import TRIANGLE_ARROWS

seeds = st.integers(0, 2**32 - 1)
negative = st.floats(-5.0, -0.1)


def random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


@given(seeds, st.integers(2, 4))
def test_matrix_algebra_star_antimultiplicative(seed, n):
    rng = np.random.default_rng(seed)
    A = make_matrix_algebra(n)
    a, b = random_complex(rng, A.dim), random_complex(rng, A.dim)
    assert np.allclose(star(A, mul(A, a, b)), mul(A, star(A, b), star(A, a)))
    assert np.allclose(star(A, star(A, a)), a)


@given(st.lists(negative, min_size=3, max_size=8))
@settings(deadline=None, max_examples=30)
def test_polygon_spectrum_is_paired(lams):
    b = model_polygon(len(lams), lams)
    sp = spectrum(spinor_from_model(b))
    ev = np.array(sp.eigenvalues)
    assert sp.hermitian_ok
    assert np.allclose(np.sort(ev), np.sort(-ev), atol=1e-9)


@given(st.integers(3, 8), negative)
@settings(deadline=None, max_examples=20)
def test_polygon_kernel_dimension(n, lam):
    sp = spectrum(spinor_from_model(model_polygon(n, lam)))
    assert sp.kernel_dim == n + 2


@given(st.lists(negative, min_size=3, max_size=3), seeds)
@settings(deadline=None, max_examples=30)
def test_sigma_symmetry_iff_j_commutes(lams, seed):
    rng = np.random.default_rng(seed)
    w = {(0, 1): lams[0], (1, 2): lams[1], (0, 2): lams[2]}
    blocks = {}
    for x in range(3):
        if rng.random() < 0.5:
            blocks[(x, x)] = np.eye(2) + 0.5 * rng.standard_normal((2, 2))
    b = model_weighted_graph([0, 1, 2], TRIANGLE_ARROWS, w, connection=blocks)
    pkg = spinor_from_model(b)
    rep = verify_spectral_triple(pkg, b.functional)
    assert check_sigma_symmetric(b.metric, b.conn).passed == rep["j_commutes_d"].passed


@given(seeds)
@settings(deadline=None, max_examples=30)
def test_star_preserving_implies_sigma_dagger_involution(seed):
    rng = np.random.default_rng(seed)
    # real diagonal σ blocks of ±1 are star preserving iff they square to one
    blocks = {(x, y): np.diag(rng.choice([-1.0, 1.0, 2.0], size=1)) for (x, y) in [(0, 1), (1, 0)]}
    b = model_weighted_graph([0, 1, 2], TRIANGLE_ARROWS, -1.0, connection=blocks)
    if check_star_preserving(b.calc, b.conn).passed:
        assert sigma_dagger_square_residual(b.calc, b.conn) < 1e-9


@given(seeds)
@settings(deadline=None, max_examples=20)
def test_reality_star_preserving_and_symmetry_give_delta_star(seed):
    rng = np.random.default_rng(seed)
    builders = [
        lambda: model_m2("ii", -float(rng.uniform(0.5, 2)), 1j * float(rng.uniform(-1, 1))),
        lambda: model_m2("i", -float(rng.uniform(0.5, 2))),
        lambda: model_polygon(4, list(-rng.uniform(0.5, 2, 4)), "qlc"),
    ]
    b = builders[int(rng.integers(len(builders)))]()
    hyp = (
        check_metric_reality(b.metric).passed
        and check_star_preserving(b.calc, b.conn).passed
        and check_sigma_symmetric(b.metric, b.conn).passed
    )
    if hyp:
        assert check_delta_star(b.metric, b.conn).passed


@given(seeds)
@settings(deadline=None, max_examples=20)
def test_tensor_dagger_involution_fuzzy(seed):
    rng = np.random.default_rng(seed)
    c = model_fuzzy_sphere(2).calc
    T = random_complex(rng, c.p)
    assert np.allclose(tensor_star(c, tensor_star(c, T)), T)


@given(seeds)
@settings(deadline=None, max_examples=20)
def test_structural_axioms_any_graph_sigma(seed):
    rng = np.random.default_rng(seed)
    blocks = {(x, x): np.eye(2) + 0.3 * random_complex(rng, 2, 2) for x in range(3)}
    b = model_weighted_graph([0, 1, 2], TRIANGLE_ARROWS, -1.0, connection=blocks)
    rep = verify_spectral_triple(spinor_from_model(b), b.functional)
    for name in ("dirac_commutator", "first_order", "commutant", "j_squared", "gamma_anticommutes_d", "j_gamma"):
        assert rep[name].passed, name


@given(seeds)
@settings(deadline=None, max_examples=10)
def test_inner_connection_alpha_zero_matches_sigma_only(seed):
    rng = np.random.default_rng(seed)
    b = model_polygon(3)
    S = np.eye(b.calc.p) * (1 + rng.random())
    c1 = make_inner_connection(b.calc, S)
    c2 = make_inner_connection(b.calc, S, alpha=np.zeros((b.calc.p, b.calc.m)))
    assert np.array_equal(c1.nabla, c2.nabla)
