"""Geometric Dirac operators D = d + δ on A ⊕ Ω¹ built from quantum Riemannian geometry data."""
from .algebra import (
    Algebra,
    Functional,
    check_trace,
    integrate,
    make_function_algebra,
    make_matrix_algebra,
    measure_functional,
    mul,
    star,
    trace_functional,
)
from .calculus import (
    FreeCalculus,
    GraphCalculus,
    build_free_calculus,
    build_graph_calculus,
    differential,
    star_one_form,
    tensor_star,
)
from .gauge import (
    GaugeData,
    RightPackage,
    check_dagger_intertwine,
    gauged_connection,
    gauged_dirac,
    make_gauge,
    right_dirac,
)
from .models import (
    ModelBundle,
    model_an_chain,
    model_fuzzy_sphere,
    model_m2,
    model_polygon,
    model_weighted_graph,
)
from .qrg import (
    Connection,
    QuantumMetric,
    check_delta_star,
    check_divergence_compatible,
    check_metric_compatible,
    check_metric_reality,
    check_sigma_symmetric,
    check_star_preserving,
    check_torsion_free,
    divergence,
    laplacian,
    make_bare_connection,
    make_inner_connection,
    make_metric,
)
from .report import CheckResult, DimensionError, InvalidModel, NotApplicable, VerificationReport
from .spinor import (
    SpinorPackage,
    Spectrum,
    build_spinor,
    clifford_matrices,
    modified_dirac_alpha_s,
    spectrum,
    spinor_from_model,
    verify_spectral_triple,
)

__version__ = "0.1.0"
