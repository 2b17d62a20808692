import csv
import json
import re

import numpy as np
import pytest

from aperiodica import svg
from aperiodica.cli import EXIT_INVALID, EXIT_OK, EXIT_THRESHOLD, main
from aperiodica.construct import default_window, enumerate_model_set
from aperiodica.exact import Golden
from aperiodica.io import load_scheme, load_window, points_csv, scheme_to_json
from aperiodica.window import Box, EmptyWindow, Interval, window_from_json


def read_csv(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    head = json.loads(lines[0][2:])
    rows = list(csv.DictReader(lines[1:]))
    return head, rows


# -- serialization -------------------------------------------------------------------

def test_window_json_roundtrip():
    for w in (Interval(Golden(-1), Golden(-1, 1)), Box([0, 0], [1, 2]), EmptyWindow(1, False)):
        back = window_from_json(json.loads(json.dumps(w.to_json())))
        assert back.to_json() == w.to_json()
    assert load_window(json.dumps(Interval(Golden(0), Golden(0, 1)).to_json())).exact


def test_scheme_json_roundtrip(fib):
    s = load_scheme(json.dumps(scheme_to_json(fib)))
    assert s.rank == fib.rank and np.allclose(s.embedding_matrix(), fib.embedding_matrix())


def test_points_csv_marks_boundary(fib, fib_window):
    ps = enumerate_model_set(fib, fib_window, 10)
    text = points_csv(ps)
    head = json.loads(text.splitlines()[0][2:])
    assert head["n_points"] == len(ps) == 16
    rows = list(csv.DictReader(text.splitlines()[1:]))
    assert sum("boundary" in r["flags"] for r in rows) == 2


# -- exit codes ----------------------------------------------------------------------

def test_generate_ok_and_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main(["generate", "--radius", "80", "--out-dir", str(d), "--svg"]) == EXIT_OK
    for name in ("points.csv", "scatter.svg", "report.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    head, rows = read_csv(a / "points.csv")
    assert len(rows) == head["n_points"] > 0


def test_generate_empty_window(tmp_path):
    w = json.dumps(EmptyWindow(1, False).to_json())
    assert main(["generate", "--window", w, "--out-dir", str(tmp_path)]) == EXIT_OK
    head, rows = read_csv(tmp_path / "points.csv")
    assert rows == [] and head["n_points"] == 0


def test_invalid_inputs(tmp_path):
    box = json.dumps(Box([0, 0], [1, 1]).to_json())
    assert main(["diffract", "--window", box, "--out-dir", str(tmp_path)]) == EXIT_INVALID
    assert main(["generate", "--radius", "-3", "--out-dir", str(tmp_path)]) == EXIT_INVALID
    assert main(["generate", "--window", str(tmp_path / "missing.json"), "--out-dir", str(tmp_path)]) == EXIT_INVALID
    assert main(["generate", "--scheme", "nonesuch", "--out-dir", str(tmp_path)]) == EXIT_INVALID
    # a p-adic window with a real internal space
    padic = json.dumps({"kind": "coset_union", "p": 2, "m": 1, "cosets": [{"rep": [0], "k": 1}]})
    assert main(["generate", "--window", padic, "--out-dir", str(tmp_path)]) == EXIT_INVALID
    broken = json.dumps({"kind": "coset_union", "p": 2, "m": 1, "cosets": [[[0], 1]]})
    assert main(["generate", "--window", broken, "--out-dir", str(tmp_path)]) == EXIT_INVALID


def test_threshold_failure(tmp_path):
    code = main(["diffract", "--radius", "200", "--peak-tol", "1e-9", "--out-dir", str(tmp_path)])
    assert code == EXIT_THRESHOLD
    assert json.loads((tmp_path / "report.json").read_text())["passed"] is False


def test_analyze_report(tmp_path):
    assert main(["analyze", "--radius", "150", "--out-dir", str(tmp_path)]) == EXIT_OK
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["meyer"]["value"] == pytest.approx(2 - (1 + 5 ** 0.5) / 2)
    assert rep["density"] == pytest.approx(rep["predicted_density"], rel=0.02)


# -- demos ----------------------------------------------------------------------------

def test_demo_fibonacci(tmp_path):
    assert main(["demo", "fibonacci", "--out-dir", str(tmp_path)]) == EXIT_OK
    for name in ("points.csv", "spectrum.csv", "scatter.svg", "spectrum.svg", "report.json"):
        assert (tmp_path / name).stat().st_size > 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["top_peak_error"] < 0.02 and rep["passed"]
    # the tallest stem of the spectrum plot sits at k = 0
    _, rows = read_csv(tmp_path / "spectrum.csv")
    k = np.array([float(r["k0"]) for r in rows])
    text = (tmp_path / "spectrum.svg").read_text()
    stems = [(float(x), float(y)) for x, y in re.findall(r'<line x1="([-\d.]+)"[^>]*y2="([-\d.]+)" stroke="navy"', text)]
    x_top = min(stems, key=lambda s: s[1])[0]
    x_zero = svg.M + (0 - k.min()) / (k.max() - k.min()) * (svg.W - 2 * svg.M)
    assert x_top == pytest.approx(x_zero, abs=0.5)


def test_demo_robinson_type1_even(tmp_path):
    assert main(["demo", "robinson", "--radius", "24", "--out-dir", str(tmp_path)]) == EXIT_OK
    _, rows = read_csv(tmp_path / "points.csv")
    X = np.array([[float(r["x0"]), float(r["x1"])] for r in rows])
    assert len(X) > 0 and np.all(X % 2 == 0)
    circles = (tmp_path / "scatter.svg").read_text().count("<circle")
    assert circles == len(X)


def test_demo_visible(tmp_path):
    assert main(["demo", "visible", "--radius", "60", "--out-dir", str(tmp_path)]) == EXIT_OK
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["density"] == pytest.approx(rep["expected_density"], rel=0.05)


# -- svg ------------------------------------------------------------------------------

def test_svg_empty_has_axes_only():
    for text in (svg.scatter_svg(np.zeros((0, 2))), svg.stem_svg(np.zeros((0, 1)), [])):
        assert "<svg" in text and text.rstrip().endswith("</svg>")
        assert "<circle" not in text and "navy" not in text


def test_svg_deterministic(fib):
    ps = enumerate_model_set(fib, default_window(fib), 30)
    assert svg.scatter_svg(ps.physical, "x") == svg.scatter_svg(ps.physical.copy(), "x")
    assert svg.scatter_svg(ps.physical).count("<circle") == len(ps)
