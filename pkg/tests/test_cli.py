import json

import numpy as np
import pytest

from ncg_dirac.cli import (
    SpecError,
    build_model,
    load_export,
    main,
    parse_complex,
    parse_model_dict,
    resolve_tolerance,
)
from ncg_dirac.report import DEFAULT_TOL
from ncg_dirac.spinor import spinor_from_model

TWO_NODE = {"model": "graph", "graph": {"vertices": ["x", "y"], "edges": [["x", "y"]], "lambda": -1}}


@pytest.fixture
def write(tmp_path):
    def _write(doc, name="spec.json"):
        path = tmp_path / name
        path.write_text(json.dumps(doc))
        return str(path)
    return _write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize("value, expected", [
    ("1i", 1j), ("i", 1j), ("-0.5i", -0.5j), ([0, 2], 2j), (3, 3), ("2", 2),
])
def test_parse_complex(value, expected):
    assert parse_complex(value) == expected


@pytest.mark.parametrize("value", ["abc", [1, 2, 3], float("nan"), None])
def test_parse_complex_rejects(value):
    with pytest.raises(ValueError):
        parse_complex(value)


def test_parse_valid_specs():
    spec = parse_model_dict({"model": "polygon", "polygon": {"n": 3, "lambda": -1, "connection": "qlc"}})
    assert spec.kind == "polygon"
    spec = parse_model_dict({"model": "m2", "m2": {"case": "ii", "lambda": -1, "rho": "1i"}})
    assert build_model(spec).notes["rho"] == 1j


@pytest.mark.parametrize("doc", [
    {"model": "torus", "torus": {}},
    {"model": "polygon"},
    {"model": "polygon", "polygon": {"lambda": -1}},
    {"model": "polygon", "polygon": {"n": 3}, "m2": {}},
    {"model": "polygon", "polygon": {"n": 3, "colour": 1}},
    {"model": "polygon", "polygon": {"n": 3}, "tolerance": -1},
])
def test_parse_invalid_specs(doc):
    with pytest.raises(SpecError):
        parse_model_dict(doc)


def test_missing_reverse_arrow_exits_2(write, capsys):
    path = write({"model": "graph", "graph": {"vertices": ["x", "y"], "arrows": [["x", "y"]]}})
    code, _, err = run(capsys, "check", path)
    assert code == 2
    assert "reverse" in err


def test_unreadable_file_exits_2(tmp_path, capsys):
    code, _, err = run(capsys, "check", str(tmp_path / "nope.json"))
    assert code == 2 and err
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(capsys, "check", str(bad))[0] == 2


def test_usage_error_exits_2(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys, "check")[0] == 2


@pytest.mark.parametrize("doc", [
    {"model": "polygon", "polygon": {"n": 5, "lambda": -1, "connection": "qlc"}},
    {"model": "fuzzy_sphere", "fuzzy_sphere": {"n": 3}},
    {"model": "an_chain", "an_chain": {"n": 6}},
    TWO_NODE,
])
def test_check_passes(write, capsys, doc):
    code, out, _ = run(capsys, "check", write(doc))
    assert code == 0
    assert out.strip().endswith("overall: PASS")


def test_check_m2_case_i_fails(write, capsys):
    code, out, _ = run(capsys, "check", write({"model": "m2", "m2": {"case": "i", "lambda": -1}}))
    assert code == 1
    assert "[FAIL] positivity" in out


def test_check_m2_case_i_with_documented_expectation(write, capsys):
    doc = {"model": "m2", "m2": {"case": "i", "lambda": -1},
           "expect": {"extended_trace": False, "positivity": False}}
    code, _, _ = run(capsys, "check", write(doc))
    assert code == 0


def test_check_m2_case_i_with_complete_expectation(write, capsys):
    names = ["extended_trace", "positivity", "d_antihermitian", "j_isometry", "divergence_compatible"]
    doc = {"model": "m2", "m2": {"case": "i", "lambda": -1}, "expect": {k: False for k in names}}
    code, out, _ = run(capsys, "check", write(doc), "--json")
    assert code == 0
    report = json.loads(out)
    assert report["expect"]["positivity"] is False
    assert report["passed"] is True


def test_unknown_expect_name(write, capsys):
    doc = dict(TWO_NODE, expect={"no_such_check": True})
    assert run(capsys, "check", write(doc))[0] == 2


def test_check_json_deterministic(write, capsys):
    path = write({"model": "m2", "m2": {"case": "ii", "lambda": -1, "rho": "1i"}})
    code1, out1, _ = run(capsys, "check", path, "--json")
    code2, out2, _ = run(capsys, "check", path, "--json")
    assert out1 == out2
    doc = json.loads(out1)
    assert list(doc) == sorted(doc)
    row = doc["checks"][0]
    assert set(row) == {"name", "passed", "residual", "detail", "required"}
    assert "e" in out1.split('"residual": ')[1].split(",")[0]


def test_gauge_checks_reported(write, capsys):
    doc = dict(TWO_NODE, gauge={"zeta": [["x", "y", 1]]})
    code, out, _ = run(capsys, "check", write(doc), "--json")
    names = [r["name"] for r in json.loads(out)["checks"]]
    assert "gauged_dirac_shortcut" in names and "dagger_intertwine" in names
    assert code == 0


def test_spectrum_two_node(write, capsys):
    code, out, _ = run(capsys, "spectrum", write(TWO_NODE))
    lines = out.splitlines()
    assert code == 0
    assert lines[0] == "-2 0 0 2"
    assert lines[1] == "kernel_dim 2"


def test_spectrum_triangle_scaling(write, capsys):
    docs = [{"model": "polygon", "polygon": {"n": 3, "lambda": lam}} for lam in (-1, -4)]
    specs = [json.loads(run(capsys, "spectrum", write(d, f"t{i}.json"), "--format", "json")[1]) for i, d in enumerate(docs)]
    assert specs[0]["kernel_dim"] == specs[1]["kernel_dim"] == 5
    a, b = np.array(specs[0]["eigenvalues"]), np.array(specs[1]["eigenvalues"])
    assert np.allclose(b, 2 * a, rtol=1e-9)
    assert np.allclose(specs[0]["ratios"], specs[1]["ratios"])


def test_spectrum_indefinite_warns(write, capsys):
    code, out, _ = run(capsys, "spectrum", write({"model": "m2", "m2": {"case": "i", "lambda": -1}}))
    assert code == 0
    assert "warning" in out


def test_export_sizes(write, capsys):
    code, out, _ = run(capsys, "export", write({"model": "m2", "m2": {"case": "ii", "lambda": -1, "rho": "1i"}}), "--what", "D")
    assert code == 0
    D = load_export(out)["D"]
    assert D.shape == (12, 12)
    code, out, _ = run(capsys, "export", write({"model": "polygon", "polygon": {"n": 4, "lambda": -1}}), "--what", "gamma")
    gam = load_export(out)["gamma"]
    assert np.array_equal(gam, np.diag([1] * 4 + [-1] * 8))


def test_export_round_trip_bit_identical(write, capsys):
    doc = {"model": "polygon", "polygon": {"n": 5, "lambda": [-1, -2.5, -1 / 3, -3, -1.7], "connection": "qlc"}}
    _, out, _ = run(capsys, "export", write(doc), "--what", "all")
    loaded = load_export(out)
    pkg = spinor_from_model(build_model(parse_model_dict(doc)))
    for name, M in (("D", pkg.D), ("gamma", pkg.gamma), ("gram", pkg.gram), ("J", pkg.J)):
        assert np.array_equal(loaded[name], M)
    meta = json.loads(out)
    assert meta["basis"][0] == "A:0" and meta["basis"][5].startswith("Omega1:")


def test_models_lists_five(capsys):
    code, out, _ = run(capsys, "models")
    assert code == 0
    assert [line.split()[0] for line in out.splitlines()] == ["graph", "an_chain", "polygon", "m2", "fuzzy_sphere"]


def test_tolerance_precedence(monkeypatch):
    spec = parse_model_dict(dict(TWO_NODE, tolerance=1e-6))
    bare = parse_model_dict(TWO_NODE)
    monkeypatch.delenv("NCG_DIRAC_TOL", raising=False)
    assert resolve_tolerance(None, bare) == DEFAULT_TOL
    monkeypatch.setenv("NCG_DIRAC_TOL", "1e-4")
    assert resolve_tolerance(None, bare) == 1e-4
    assert resolve_tolerance(None, spec) == 1e-6
    assert resolve_tolerance(1e-3, spec) == 1e-3


def test_env_tolerance_used_by_check(write, capsys, monkeypatch):
    path = write({"model": "m2", "m2": {"case": "ii", "lambda": -1, "rho": "1i"}})
    monkeypatch.setenv("NCG_DIRAC_TOL", "1e-9")
    _, out, _ = run(capsys, "check", path, "--json")
    assert json.loads(out)["tolerance"] == 1e-9
    monkeypatch.setenv("NCG_DIRAC_TOL", "oops")
    assert run(capsys, "check", path)[0] == 2
