"""Command-line interface: ``ncg-dirac check|spectrum|export|models``.

Exit codes: 0 when every required check passes (and every ``expect`` entry
matches), 1 when a check fails, 2 on invalid input.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import models
from .gauge import check_dagger_intertwine, gauge_report, make_gauge, right_dirac
from .qrg import (
    check_delta_star,
    check_metric_compatible,
    check_metric_reality,
    check_minimal_reality,
    check_sigma_symmetric,
    check_star_preserving,
    check_torsion_free,
)
from .report import DEFAULT_TOL, CheckResult, InvalidModel, NotApplicable, VerificationReport, make_check
from .spinor import minimal_reality_residual, spectrum, spinor_from_model, verify_spectral_triple

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2
EXPORTABLE = ("D", "gamma", "gram", "J")

_REQUIRED_FIELDS = {
    "graph": ("vertices",),
    "an_chain": ("n",),
    "polygon": ("n",),
    "m2": ("case",),
    "fuzzy_sphere": ("n",),
}
_ALLOWED_FIELDS = {
    "graph": {"vertices", "arrows", "edges", "lambda", "mu", "connection"},
    "an_chain": {"n", "h"},
    "polygon": {"n", "lambda", "connection"},
    "m2": {"case", "lambda", "rho", "connection"},
    "fuzzy_sphere": {"n", "g_inv", "connection"},
}


class SpecError(ValueError):
    def __init__(self, messages):
        self.messages = list(messages)
        super().__init__("; ".join(self.messages))


@dataclass(frozen=True)
class ModelSpec:
    kind: str
    params: dict
    gauge: dict | None = None
    tolerance: float | None = None
    expect: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)


# --------------------------------------------------------------------------- parsing


def parse_complex(value) -> complex:
    """Accept numbers, [re, im] pairs and strings such as "1i", "-0.5+2i" or "3j"."""
    if isinstance(value, bool):
        raise ValueError(f"not a number: {value!r}")
    if isinstance(value, (int, float)):
        z = complex(value)
    elif isinstance(value, (list, tuple)) and len(value) == 2 and all(isinstance(v, (int, float)) for v in value):
        z = complex(value[0], value[1])
    elif isinstance(value, str):
        text = value.strip().replace(" ", "").replace("i", "j")
        if text in ("j", "+j", "-j"):
            text = text.replace("j", "1j")
        z = complex(text)
    else:
        raise ValueError(f"not a complex number: {value!r}")
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise ValueError(f"non-finite number: {value!r}")
    return z


def _real(value, name, errors):
    try:
        z = parse_complex(value)
    except ValueError as exc:
        errors.append(f"{name}: {exc}")
        return None
    if z.imag != 0:
        errors.append(f"{name}: expected a real number, got {value!r}")
        return None
    return z.real


def parse_model_dict(data) -> ModelSpec:
    errors = []
    if not isinstance(data, dict):
        raise SpecError(["top level must be a JSON object"])
    kind = data.get("model")
    if kind not in models.MODEL_KINDS:
        raise SpecError([f"unknown model kind {kind!r}; expected one of {', '.join(models.MODEL_KINDS)}"])
    extra_blocks = [k for k in models.MODEL_KINDS if k in data and k != kind]
    if extra_blocks:
        errors.append(f"only the {kind!r} block may be present, found {extra_blocks}")
    params = data.get(kind)
    if not isinstance(params, dict):
        raise SpecError(errors + [f"missing {kind!r} parameter block"])
    for name in _REQUIRED_FIELDS[kind]:
        if name not in params:
            errors.append(f"{kind}.{name} is required")
    for name in params:
        if name not in _ALLOWED_FIELDS[kind]:
            errors.append(f"{kind}.{name} is not a recognised field")
    if kind == "graph" and "arrows" not in params and "edges" not in params:
        errors.append("graph needs 'arrows' or 'edges'")
    tol = None
    if "tolerance" in data:
        tol = _real(data["tolerance"], "tolerance", errors)
        if tol is not None and tol <= 0:
            errors.append("tolerance must be positive")
    expect = data.get("expect", {})
    if not isinstance(expect, dict) or not all(isinstance(v, bool) for v in expect.values()):
        errors.append("expect must map check names to booleans")
        expect = {}
    gauge = data.get("gauge")
    if gauge is not None and not isinstance(gauge, dict):
        errors.append("gauge must be an object")
    if errors:
        raise SpecError(errors)
    return ModelSpec(kind, params, gauge, tol, dict(expect), data)


def parse_model_file(path) -> ModelSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise SpecError([f"cannot read {path}: {exc.strerror}"]) from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError([f"{path}: invalid JSON ({exc})"]) from exc
    return parse_model_dict(data)


# --------------------------------------------------------------------------- building


def _graph_arrows(p):
    if "arrows" in p:
        return [tuple(a) for a in p["arrows"]]
    out = []
    for e in p["edges"]:
        out += [(e[0], e[1]), (e[1], e[0])]
    return out


def _graph_weights(p, arrows):
    lam = p.get("lambda", -1.0)
    if isinstance(lam, list):
        weights = {}
        for item in lam:
            if not isinstance(item, list) or len(item) != 3:
                raise SpecError(["graph.lambda entries must be [x, y, value]"])
            weights[(item[0], item[1])] = parse_complex(item[2])
        return weights
    return parse_complex(lam).real


def _graph_connection(p):
    conn = p.get("connection", "bare")
    if isinstance(conn, str):
        return conn
    if isinstance(conn, dict) and "sigma" in conn:
        blocks = {}
        for x, y, matrix in conn["sigma"]:
            blocks[(x, y)] = np.array([[parse_complex(v) for v in row] for row in matrix])
        return blocks
    raise SpecError(["graph.connection must be 'bare' or {'sigma': [[x, y, matrix], ...]}"])


def build_model(spec: ModelSpec, tol: float = DEFAULT_TOL) -> models.ModelBundle:
    p = spec.params
    if spec.kind == "graph":
        arrows = _graph_arrows(p)
        mu = p.get("mu", "auto")
        return models.model_weighted_graph(p["vertices"], arrows, _graph_weights(p, arrows), mu=mu, connection=_graph_connection(p), tol=tol)
    if spec.kind == "an_chain":
        h = p.get("h")
        if h is not None and not isinstance(h, list):
            h = [h] * (int(p["n"]) - 1)
        return models.model_an_chain(int(p["n"]), h, tol=tol)
    if spec.kind == "polygon":
        lam = p.get("lambda", -1.0)
        lam = [parse_complex(v).real for v in lam] if isinstance(lam, list) else parse_complex(lam).real
        return models.model_polygon(int(p["n"]), lam, p.get("connection", "bare"), tol=tol)
    if spec.kind == "m2":
        return models.model_m2(str(p["case"]), parse_complex(p.get("lambda", -1.0)), parse_complex(p.get("rho", 0)), p.get("connection", "qlc"), tol=tol)
    g = p.get("g_inv")
    return models.model_fuzzy_sphere(int(p["n"]), None if g is None else np.array(g, dtype=float), p.get("connection", "qlc"), tol=tol)


def _build_gauge(spec: ModelSpec, bundle, tol):
    g = spec.gauge or {}
    calc = bundle.calc
    zeta = g.get("zeta")
    if zeta is not None:
        if spec.kind in ("graph", "an_chain", "polygon"):
            vals = {}
            for item in zeta:
                vals[(item[0], item[1])] = parse_complex(item[2])
            # vertex labels in JSON are whatever the model uses; integers stay integers
            zeta = vals
        else:
            zeta = np.array([[parse_complex(v) for v in row] for row in zeta])
    alpha0 = g.get("alpha0")
    if alpha0 is not None:
        alpha0 = np.array([parse_complex(v) for v in alpha0])
    return make_gauge(calc, zeta, alpha0, tol)


def resolve_tolerance(cli_tol, spec: ModelSpec | None) -> float:
    """--tol, then the model file tolerance, then NCG_DIRAC_TOL, then the built-in default."""
    if cli_tol is not None:
        return cli_tol
    if spec is not None and spec.tolerance is not None:
        return spec.tolerance
    env = os.environ.get("NCG_DIRAC_TOL")
    if env:
        try:
            value = float(env)
        except ValueError as exc:
            raise SpecError([f"NCG_DIRAC_TOL is not a number: {env!r}"]) from exc
        if value <= 0:
            raise SpecError(["NCG_DIRAC_TOL must be positive"])
        return value
    return DEFAULT_TOL


# --------------------------------------------------------------------------- commands


def _informational(bundle, pkg, tol) -> list[CheckResult]:
    calc, metric, conn = bundle.calc, bundle.metric, bundle.conn
    out = [
        check_star_preserving(calc, conn, tol),
        check_sigma_symmetric(metric, conn, tol),
        check_metric_reality(metric, tol),
        check_minimal_reality(metric, conn, tol),
        make_check("minimal_reality_integrated", minimal_reality_residual(pkg), tol, "under ∫ only"),
        check_delta_star(metric, conn, tol),
    ]
    for fn in (lambda: check_metric_compatible(metric, conn, tol), lambda: check_torsion_free(calc, conn, tol)):
        try:
            out.append(fn())
        except (NotApplicable, InvalidModel):
            pass
    return [CheckResult(c.name, c.passed, c.residual, c.detail, required=False) for c in out]


def run_checks(spec: ModelSpec, tol: float) -> tuple[VerificationReport, object]:
    bundle = build_model(spec, tol)
    pkg = spinor_from_model(bundle)
    checks = list(verify_spectral_triple(pkg, tol=tol).checks)
    checks += _informational(bundle, pkg, tol)
    if spec.gauge is not None:
        gauge = _build_gauge(spec, bundle, tol)
        sym = check_sigma_symmetric(bundle.metric, bundle.conn, tol).passed
        for c in gauge_report(pkg, gauge, tol).checks:
            req = c.required and (sym or c.name != "gauged_dirac_shortcut")
            checks.append(CheckResult(c.name, c.passed, c.residual, c.detail, req))
        try:
            c = check_dagger_intertwine(pkg, right_dirac(pkg), tol)
            checks.append(CheckResult(c.name, c.passed, c.residual, c.detail, required=not c.detail))
        except NotApplicable:
            pass
    return VerificationReport(tuple(checks)), pkg


def _fmt(x: float) -> str:
    if not math.isfinite(x):
        return "null"
    text = format(x, ".15g")
    return "0" if text == "-0" else text


def _sci(x: float) -> str:
    return format(x, ".14e") if math.isfinite(x) else "null"


class _Raw(str):
    """Preformatted JSON number token."""


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """Deterministic JSON: sorted keys, 15 significant digits for floats."""
    pad, inner = " " * (indent * _level), " " * (indent * (_level + 1))
    if isinstance(obj, _Raw):
        return str(obj)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{json.dumps(str(k), ensure_ascii=False)}: {dumps(obj[k], indent, _level + 1)}" for k in sorted(obj, key=str)]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + dumps(v, indent, _level + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def check_document(spec: ModelSpec, report: VerificationReport, tol: float) -> tuple[dict, int]:
    unknown = sorted(set(spec.expect) - set(report.names()))
    if unknown:
        raise SpecError([f"expect names unknown checks: {', '.join(unknown)}"])
    rows = []
    ok = True
    for c in report.checks:
        row = {"name": c.name, "passed": c.passed, "residual": _Raw(_sci(c.residual)), "detail": c.detail, "required": c.required}
        if c.name in spec.expect:
            row["expected"] = spec.expect[c.name]
            ok &= c.passed == spec.expect[c.name]
        elif c.required:
            ok &= c.passed
        rows.append(row)
    doc = {"model": spec.raw, "tolerance": tol, "checks": rows, "passed": bool(ok), "expect": spec.expect}
    return doc, EXIT_OK if ok else EXIT_FAIL


def cmd_check(args) -> int:
    spec = parse_model_file(args.spec)
    tol = resolve_tolerance(args.tol, spec)
    report, _ = run_checks(spec, tol)
    doc, code = check_document(spec, report, tol)
    if args.json:
        print(dumps(doc))
    else:
        for row, c in zip(doc["checks"], report.checks):
            line = c.line()
            if "expected" in row:
                line += f" [expected {'pass' if row['expected'] else 'fail'}]"
            print(line)
        print("overall:", "PASS" if code == EXIT_OK else "FAIL")
    return code


def _fmt_eig(z) -> str:
    if isinstance(z, complex):
        re, im = _fmt(z.real), _fmt(abs(z.imag))
        return re if z.imag == 0 else f"{re}{'-' if z.imag < 0 else '+'}{im}i"
    return _fmt(z)


def spectrum_document(spec: ModelSpec, tol: float) -> dict:
    bundle = build_model(spec, tol)
    pkg = spinor_from_model(bundle)
    sp = spectrum(pkg, tol)
    cleaned = [0.0 if abs(z) < 1e-7 else z for z in sp.eigenvalues]
    doc = {"kernel_dim": sp.kernel_dim, "hermitian_ok": sp.hermitian_ok, "warning": sp.warning}
    if sp.hermitian_ok:
        doc["eigenvalues"] = [float(z) for z in cleaned]
    else:
        doc["eigenvalues"] = [[complex(z).real, complex(z).imag] for z in cleaned]
    if spec.kind == "polygon" and sp.hermitian_ok:
        lams = bundle.notes["lambda"]
        if len(set(lams)) == 1:
            scale = math.sqrt(-lams[0])
            doc["ratios"] = [float(z) / scale for z in cleaned]
    return doc


def cmd_spectrum(args) -> int:
    spec = parse_model_file(args.spec)
    tol = resolve_tolerance(args.tol, spec)
    doc = spectrum_document(spec, tol)
    if args.format == "json":
        print(dumps(doc))
        return EXIT_OK
    if doc["hermitian_ok"]:
        print(" ".join(_fmt(z) for z in doc["eigenvalues"]))
    else:
        print(" ".join(_fmt_eig(complex(*z)) for z in doc["eigenvalues"]))
    print(f"kernel_dim {doc['kernel_dim']}")
    if "ratios" in doc:
        print("ratios " + " ".join(_fmt(r) for r in doc["ratios"]))
    if doc["warning"]:
        print(f"warning: {doc['warning']}")
    return EXIT_OK


def _matrix(M) -> list:
    # repr gives the shortest string that round-trips to the same double
    return [[_Raw(f"[{float(z.real)!r}, {float(z.imag)!r}]") for z in row] for row in np.asarray(M, dtype=complex)]


def export_document(spec: ModelSpec, what: str, tol: float) -> dict:
    bundle = build_model(spec, tol)
    pkg = spinor_from_model(bundle)
    calc = bundle.calc
    basis = [f"A:{lab}" for lab in calc.algebra.basis_labels] + [f"Omega1:{lab}" for lab in calc.one_form_labels]
    names = EXPORTABLE if what == "all" else (what,)
    mats = {"D": pkg.D, "gamma": pkg.gamma, "gram": pkg.gram, "J": pkg.J}
    doc = {"basis": basis, "dimension": pkg.N, "matrices": {k: _matrix(mats[k]) for k in names}}
    if "J" in names:
        doc["J_convention"] = "antilinear: J(phi) = J @ conj(phi)"
    return doc


def load_export(text: str) -> dict[str, np.ndarray]:
    """Matrices of an export document as complex arrays."""
    data = json.loads(text)
    return {k: np.array([[complex(re, im) for re, im in row] for row in v]) for k, v in data["matrices"].items()}


def cmd_export(args) -> int:
    spec = parse_model_file(args.spec)
    tol = resolve_tolerance(args.tol, spec)
    print(dumps(export_document(spec, args.what, tol)))
    return EXIT_OK


def cmd_models(args) -> int:
    for kind, text in models.describe_models():
        print(f"{kind:<13} {text}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ncg-dirac", description="Dirac operators from quantum Riemannian geometry data.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="verify the spectral-triple axioms for a model")
    p.add_argument("spec")
    p.add_argument("--tol", type=float)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("spectrum", help="eigenvalues of iD")
    p.add_argument("spec")
    p.add_argument("--tol", type=float)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_spectrum)

    p = sub.add_parser("export", help="dump D, gamma, gram or J as JSON")
    p.add_argument("spec")
    p.add_argument("--tol", type=float)
    p.add_argument("--what", choices=EXPORTABLE + ("all",), default="all")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("models", help="list the built-in model kinds")
    p.set_defaults(func=cmd_models)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INVALID if exc.code else EXIT_OK
    if getattr(args, "tol", None) is not None and not args.tol > 0:
        print("error: --tol must be positive", file=sys.stderr)
        return EXIT_INVALID
    try:
        return args.func(args)
    except SpecError as exc:
        for msg in exc.messages:
            print(f"error: {msg}", file=sys.stderr)
        return EXIT_INVALID
    except (InvalidModel, KeyError, TypeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
