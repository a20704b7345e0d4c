import json
import math
import xml.etree.ElementTree as ET

import pytest

from overlap_sbm import experiments as ex
from overlap_sbm.spectral_engine import SizeGuardError
from overlap_sbm.svg import FigureSpec, Layer, MissingColumn, render
from overlap_sbm.tables import fmt, read_csv

SMALL = dict(n_nodes=400, n_samples=2, top_k=3, alpha_step=0.25, sample_alphas=(0.0, 0.5, 1.0))


def plan(experiment_id, **kw):
    return ex.ExperimentPlan(experiment_id, **(SMALL | kw))


def test_plan_round_trip():
    p = plan("eigencurve_alpha", seed=42, c2_curves=(12, 18))
    assert ex.ExperimentPlan.from_dict(json.loads(json.dumps(p.to_dict()))) == p


def test_plan_rejects_unknown():
    with pytest.raises(ValueError):
        ex.ExperimentPlan("fig99")
    with pytest.raises(ValueError):
        ex.ExperimentPlan.from_dict({"experiment_id": "sigma_sweep", "bogus": 1})


def test_point_seed_stable_and_independent_of_grid():
    a = ex.point_seed(42, "phase_diagram", 18, 3, 0)
    assert a == ex.point_seed(42, "phase_diagram", 18, 3, 0)
    assert a != ex.point_seed(42, "phase_diagram", 18, 3, 1)
    assert a != ex.point_seed(43, "phase_diagram", 18, 3, 0)
    assert 0 <= a < 2**63


def test_eigencurve_deterministic(tmp_path):
    p = plan("eigencurve_alpha", seed=7)
    ex.write_artifacts(ex.run_experiment(p), tmp_path / "a")
    ex.write_artifacts(ex.run_experiment(p), tmp_path / "b")
    assert (tmp_path / "a" / "data.csv").read_bytes() == (tmp_path / "b" / "data.csv").read_bytes()
    rows = read_csv(tmp_path / "a" / "data.csv")
    assert [r["alpha"] for r in rows] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert rows[0]["lambda_bulk"] == pytest.approx(6.0, abs=1e-9)
    sampled = [r for r in rows if r["emp_1"] is not None]
    assert len(sampled) == 3 and all(r["n_ok"] == 2 for r in sampled)
    # stderr present whenever more than one sample
    assert all(r["emp_1_se"] is not None and r["accuracy_se"] is not None for r in sampled)
    meta = json.loads((tmp_path / "a" / "meta.json").read_text())
    assert meta["master_seed"] == 7 and meta["plan"]["n_nodes"] == 400
    assert ex.ExperimentPlan.from_dict(meta["plan"]) == p
    ET.parse(tmp_path / "a" / "eigencurve_alpha.svg")


def test_parallel_matches_serial():
    serial = ex.run_experiment(plan("eigencurve_alpha", seed=3))
    parallel = ex.run_experiment(plan("eigencurve_alpha", seed=3, jobs=2))
    for a, b in zip(serial.rows, parallel.rows):
        assert [fmt(a.get(h)) for h in serial.header] == [fmt(b.get(h)) for h in serial.header]


def test_phase_diagram_feasibility_and_boundary(tmp_path):
    p = plan("phase_diagram", grid_step=0.25, c2_curves=(12, 18))
    res = ex.run_experiment(p)
    emp = [r for r in res.rows if r["kind"] == "empirical"]
    assert emp
    for r in emp:
        assert float(r["c2"]) == int(r["c2"])
        assert r["c1"] * (r["sigma"] * r["alpha"] + 2) == pytest.approx(r["c2"] * (1 + r["alpha"] + r["epsilon"]), rel=1e-12)
        assert 0.5 <= r["accuracy"] <= 1.0
    # structureless corner: epsilon = 1, alpha = 0 is undetectable
    corner = [r for r in res.rows if r["kind"] == "replica" and r["alpha"] == 0.0 and r["epsilon"] == 1.0]
    assert corner and corner[0]["detectable"] is False
    paths = ex.write_artifacts(res, tmp_path)
    b = read_csv(paths["boundary"])
    assert [r["epsilon"] for r in b] == [0.0, 0.25, 0.5, 0.75, 1.0]
    assert b[1]["alpha_boundary"] == pytest.approx(0.29, abs=0.01)
    ET.parse(paths["phase_diagram.svg"])


def test_bimodal_compare_columns():
    res = ex.run_experiment(plan("bimodal_compare", sample_alphas=(0.5,)))
    mid = next(r for r in res.rows if r["alpha"] == 0.5)
    assert mid["bimodal_detectable"] is True
    assert mid["bulk_rel_dev"] == pytest.approx(abs(mid["bimodal_bulk"] - mid["lambda_bulk"]) / mid["lambda_bulk"])
    assert math.isfinite(mid["bimodal_emp_1"]) and math.isfinite(mid["emp_1"])


def test_sigma_sweep_panels():
    res = ex.run_experiment(ex.ExperimentPlan("sigma_sweep", alpha_step=0.25))
    assert {r["panel"] for r in res.rows} == {"a", "b"}
    assert len(res.rows) == 2 * 5 * 5
    assert [f[0] for f in res.figures] == ["sigma_sweep_a.svg", "sigma_sweep_b.svg"]


def test_approximation_study_small():
    p = plan("approximation_study", canonical_c1=(10,), micro_c1=(6,), sample_alphas=(0.0, 0.5))
    res = ex.run_experiment(p)
    assert [(r["arm"], r["c1"], r["c2"]) for r in res.rows] == [("canonical", 10, 18.0), ("canonical", 10, 18.0), ("microcanonical", 6, 11.0), ("microcanonical", 6, 11.0)]
    assert all(math.isfinite(r["rel_dev"]) for r in res.rows)


def test_spectrum_histogram(tmp_path):
    res = ex.run_experiment(plan("spectrum_histogram", n_nodes=1000))
    strong, weak = res.rows
    assert strong["gap"] > 1.0
    assert weak["gap"] < 0.5
    paths = ex.write_artifacts(res, tmp_path)
    assert sum(r["count"] for r in read_csv(paths["hist_strong.csv"])) == 999


def test_spectrum_histogram_size_guard():
    with pytest.raises(SizeGuardError):
        ex.run_experiment(plan("spectrum_histogram", n_nodes=5000))


def test_failures_recorded_not_raised():
    out = ex.measure({"model": "overlap_micro", "c1": 6, "c2": 11, "alpha": 1.0, "sigma": 2, "n": 999, "seed": 0, "k": 2, "tol": 1e-8})
    assert out["note"].startswith("InfeasibleParameters") and all(math.isnan(v) for v in out["eigs"])
    s = ex.summarize([out, out], 2, True)
    assert s["n_ok"] == 0 and math.isnan(s["emp_1"])


# --- SVG ---------------------------------------------------------------------------


def test_empty_table_svg_has_axes():
    spec = FigureSpec("empty", "alpha", "eigenvalue", [Layer("alpha", "lambda_det")])
    root = ET.fromstring(render([], spec))
    tags = [el.tag.split("}")[1] for el in root.iter()]
    assert tags[0] == "svg" and "text" in tags and "rect" in tags
    assert "polyline" not in tags and "circle" not in tags


def test_missing_column():
    spec = FigureSpec("t", "x", "y", [Layer("x", "nope")])
    with pytest.raises(MissingColumn):
        render([{"x": 1, "y": 2}], spec)


def test_svg_styles_and_gaps():
    table = [{"x": 0, "y": 1, "z": 0.6}, {"x": 1, "y": None, "z": 0.9}, {"x": 2, "y": 3, "z": 1.0}, {"x": 3, "y": 4, "z": 0.5}]
    spec = FigureSpec("t", "x", "y", [Layer("x", "y", "dashed", label="bulk"), Layer("x", "y", "dots", color_by="z")])
    root = ET.fromstring(render(table, spec))
    lines = [el for el in root.iter() if el.tag.endswith("polyline")]
    # the missing value splits the curve; the single-point stub is dropped
    assert len(lines) == 1 and lines[0].get("stroke-dasharray") == "7,5"
    assert len([el for el in root.iter() if el.tag.endswith("circle")]) == 3
