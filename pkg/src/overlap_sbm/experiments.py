"""End-to-end reproductions: replica predictions paired with sampled spectra.

Each ``run_*`` function takes an :class:`ExperimentPlan` and returns an
:class:`ExperimentResult`; :func:`write_artifacts` materialises it as
``data.csv``, ``boundary.csv`` (when present), ``meta.json`` and SVG panels.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import subprocess
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import replica_solver as rs
from . import spectral_engine as se
from .sbm_models import (
    BimodalParams,
    InfeasibleParameters,
    build_overlap_params,
    overlap_params_from_degrees,
    sample_bimodal,
    sample_canonical,
    sample_overlap_canonical,
    sample_overlap_microcanonical,
    two_block_affinity,
    planted_labels,
)
from .svg import FigureSpec, Layer, bars_table, emit_svg
from .tables import write_csv

log = logging.getLogger(__name__)

EXPERIMENTS = ("spectrum_histogram", "phase_diagram", "eigencurve_alpha", "bimodal_compare", "sigma_sweep", "approximation_study")
_TENTHS = tuple(round(0.1 * i, 10) for i in range(11))


@dataclass
class ExperimentPlan:
    """Everything needed to rerun an experiment bit-identically (serial mode)."""

    experiment_id: str
    c1: float = 10.0
    c2: float = 18.0
    sigma: float = 2.0
    n_nodes: int = 10_000
    n_samples: int = 10
    seed: int = 0
    top_k: int = 10
    eig_tol: float = se.DEFAULT_TOL
    solver_tol: float = rs.DEFAULT_TOL
    alpha_step: float = 0.01
    sample_alphas: tuple = _TENTHS
    grid_step: float = 0.02
    alpha_max: float = 1.0
    c2_curves: tuple = tuple(range(11, 20))
    sigma_list: tuple = (0.0, 0.5, 1.0, 1.5, 2.0)
    fixed: float = 0.3
    canonical_c1: tuple = (10, 14, 18, 22, 26, 30)
    micro_c1: tuple = (3, 4, 5, 6)
    c2_ratio: float = 1.8
    epsilon_strong: float = 0.05
    epsilon_weak: float = 1.0
    bins: int = 60
    jobs: int = 1

    def __post_init__(self):
        if self.experiment_id not in EXPERIMENTS:
            raise ValueError(f"unknown experiment {self.experiment_id!r}; choose from {', '.join(EXPERIMENTS)}")
        if self.n_samples < 1 or self.n_nodes < 3:
            raise ValueError("need n_samples >= 1 and n_nodes >= 3")

    def to_dict(self) -> dict:
        return {k: list(v) if isinstance(v, tuple) else v for k, v in asdict(self).items()}

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentPlan":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown plan keys: {sorted(unknown)}")
        return cls(**{k: tuple(v) if isinstance(v, list) else v for k, v in data.items()})


@dataclass
class ExperimentResult:
    plan: ExperimentPlan
    header: list
    rows: list
    boundary: list | None = None
    figures: list = field(default_factory=list)  # (file name, FigureSpec, table)
    extra_tables: dict = field(default_factory=dict)  # file name -> (header, rows)


def point_seed(master: int, experiment_id: str, *index) -> int:
    """Seed of one replicate at one grid point, independent of the grid size."""
    key = "|".join(str(v) for v in (int(master), experiment_id, *index)).encode()
    return int.from_bytes(hashlib.blake2b(key, digest_size=8).digest(), "little") & (2**63 - 1)


def version_string() -> str:
    from importlib.metadata import PackageNotFoundError, version

    try:
        base = version("artifact")
    except PackageNotFoundError:
        base = "0+unknown"
    try:
        desc = subprocess.run(
            ["git", "describe", "--always", "--dirty", "--tags"],
            cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5, check=True,
        ).stdout.strip()
    except (OSError, subprocess.SubprocessError):
        desc = ""
    return f"{base}+{desc}" if desc else base


def _grid(lo, hi, step):
    n = int(round((hi - lo) / step))
    return [round(lo + i * step, 12) for i in range(n + 1)]


# --- empirical measurements ------------------------------------------------------


def measure(task: dict) -> dict:
    """Top-k eigenvalues and sign-partition accuracy of one sampled graph.

    ``task["model"]`` is ``overlap_micro``, ``overlap_canon``, ``bimodal`` or
    ``two_block``. Failures are returned as a note, never raised.
    """
    model, seed, k = task["model"], task["seed"], task["k"]
    try:
        if model == "overlap_micro":
            g, labels = sample_overlap_microcanonical(task["c1"], task["c2"], task["alpha"], task["sigma"], task["n"], seed)
            scorer = se.overlap_accuracy
        elif model == "overlap_canon":
            p = overlap_params_from_degrees(task["c1"], task["c2"], task["alpha"], task["sigma"], task["n"])
            g, labels = sample_overlap_canonical(p, seed)
            scorer = se.overlap_accuracy
        elif model == "bimodal":
            p = overlap_params_from_degrees(task["c1"], task["c2"], task["alpha"], task["sigma"], task["n"])
            g, labels, _ = sample_bimodal(BimodalParams.matching(p), seed)
            scorer = se.two_block_accuracy
        elif model == "two_block":
            labels = planted_labels([task["n"] // 2, task["n"] - task["n"] // 2])
            g = sample_canonical(two_block_affinity(task["c1"], task["epsilon"], task["n"]), labels, seed)
            scorer = se.two_block_accuracy
        else:
            raise ValueError(f"unknown model {model!r}")
        res = se.top_k_eigenvalues(se.ModularityOperator(g), k, task["tol"], seed)
        acc = scorer(se.partition_by_sign(res), labels).accuracy
        return {"eigs": res.eigenvalues.tolist(), "accuracy": acc, "note": ""}
    except (InfeasibleParameters, se.NonConverged, ValueError, RuntimeError) as exc:
        return {"eigs": [math.nan] * k, "accuracy": math.nan, "note": f"{type(exc).__name__}: {exc}"}


def run_tasks(tasks: list, jobs: int = 1) -> list:
    """Results in task order; ``jobs > 1`` fans out over processes."""
    if jobs <= 1 or len(tasks) < 2:
        return [measure(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(measure, tasks, chunksize=1))


def _mean_se(values):
    v = np.asarray([x for x in values if x is not None and math.isfinite(x)], dtype=float)
    if len(v) == 0:
        return math.nan, math.nan
    return float(v.mean()), float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else math.nan


def summarize(results: list, k: int, detectable: bool | None = None) -> dict:
    """Per-rank mean and standard error, accuracy, and the bulk-edge proxy."""
    out = {}
    eigs = np.array([r["eigs"] for r in results], dtype=float).reshape(len(results), k)
    for j in range(k):
        out[f"emp_{j + 1}"], out[f"emp_{j + 1}_se"] = _mean_se(eigs[:, j])
    out["accuracy"], out["accuracy_se"] = _mean_se([r["accuracy"] for r in results])
    if detectable is not None and k >= 2:
        col = 1 if detectable else 0
        out["bulk_proxy"], out["bulk_proxy_se"] = _mean_se(eigs[:, col])
    notes = sorted({r["note"] for r in results if r["note"]})
    out["n_ok"] = int(sum(1 for r in results if not r["note"]))
    out["note"] = "; ".join(notes)
    return out


def _emp_columns(k, proxy=True):
    cols = []
    for j in range(k):
        cols += [f"emp_{j + 1}", f"emp_{j + 1}_se"]
    cols += ["accuracy", "accuracy_se"]
    if proxy:
        cols += ["bulk_proxy", "bulk_proxy_se"]
    return cols + ["n_ok"]


# --- replica helpers ------------------------------------------------------------------

REPLICA_COLUMNS = ["c1", "c2", "alpha", "epsilon", "sigma", "lambda_det", "lambda_bulk", "detectable", "residual_det", "residual_und", "d_value"]


def replica_row(params, tol=rs.DEFAULT_TOL) -> dict:
    """Both branches at one overlap-model point; failed branches become NaN."""
    row = {"c1": params.c1, "c2": params.c2, "alpha": params.alpha, "epsilon": params.epsilon, "sigma": params.sigma}
    try:
        rep = rs.classify(params, tol)
    except rs.SolverError as exc:
        row.update(lambda_det=math.nan, lambda_bulk=math.nan, detectable=None, residual_det=math.nan, residual_und=math.nan, d_value=math.nan)
        row["note"] = f"{type(exc).__name__}: {exc}"
        return row
    det = rep.detectable_solution
    row.update(
        lambda_det=math.nan if rep.lambda_isolated is None else rep.lambda_isolated,
        lambda_bulk=rep.lambda_bulk_edge,
        detectable=rep.detectable,
        residual_det=math.nan if det is None else det.residual,
        residual_und=rep.bulk_solution.residual,
        d_value=rep.d_value,
        note="",
    )
    return row


def _bimodal_row(params, tol) -> dict:
    try:
        rep = rs.classify_bimodal(BimodalParams.matching(params), tol)
    except rs.SolverError as exc:
        return {"bimodal_det": math.nan, "bimodal_bulk": math.nan, "bimodal_detectable": None, "bimodal_note": str(exc)}
    det = math.nan if rep.lambda_isolated is None else rep.lambda_isolated
    return {"bimodal_det": det, "bimodal_bulk": rep.lambda_bulk_edge, "bimodal_detectable": rep.detectable, "bimodal_note": ""}


def _feasible_alpha(plan, alpha):
    try:
        return overlap_params_from_degrees(plan.c1, plan.c2, alpha, plan.sigma, plan.n_nodes)
    except InfeasibleParameters:
        return None


def _is_integer(x):
    return float(x) == int(x)


# --- experiments ----------------------------------------------------------------------


def run_phase_diagram(plan: ExperimentPlan) -> ExperimentResult:
    """Replica phase diagram on the (epsilon, alpha) grid plus empirical accuracy dots.

    Empirical dots sit on the integer-c2 constraint curves, where the
    microcanonical model is realisable.
    """
    step = plan.grid_step
    eps_grid = _grid(0.0, 1.0, step)
    alpha_grid = _grid(0.0, plan.alpha_max, step)
    rows = []
    for e in eps_grid:
        for a in alpha_grid:
            try:
                p = build_overlap_params(plan.c1, a, e, plan.sigma, plan.n_nodes)
            except InfeasibleParameters as exc:
                rows.append({"kind": "replica", "c1": plan.c1, "alpha": a, "epsilon": e, "sigma": plan.sigma, "note": str(exc)})
                continue
            rows.append({"kind": "replica", **replica_row(p, plan.solver_tol)})
    tasks, where = [], []
    for c2 in plan.c2_curves:
        for ia, a in enumerate(alpha_grid):
            try:
                p = overlap_params_from_degrees(plan.c1, c2, a, plan.sigma, plan.n_nodes)
            except InfeasibleParameters:
                continue
            where.append((c2, a, p))
            for r in range(plan.n_samples):
                s = point_seed(plan.seed, plan.experiment_id, int(c2), ia, r)
                tasks.append({"model": "overlap_micro", "c1": int(plan.c1), "c2": int(c2), "alpha": a, "sigma": plan.sigma, "n": plan.n_nodes, "seed": s, "k": 1, "tol": plan.eig_tol})
    results = run_tasks(tasks, plan.jobs)
    for i, (c2, a, p) in enumerate(where):
        chunk = results[i * plan.n_samples : (i + 1) * plan.n_samples]
        summary = summarize(chunk, 1)
        rows.append({"kind": "empirical", **replica_row(p, plan.solver_tol), **summary})
    boundary = []
    for bp in rs.phase_boundary(plan.c1, plan.sigma, eps_grid, "alpha", plan.alpha_max, plan.solver_tol):
        boundary.append({"epsilon": bp.fixed, "alpha_boundary": bp.boundary, "note": bp.note})
    header = ["kind", *REPLICA_COLUMNS, "accuracy", "accuracy_se", "emp_1", "emp_1_se", "n_ok", "note"]
    fig = FigureSpec(
        f"Detectability phase diagram (c1={plan.c1:g}, sigma={plan.sigma:g})", "epsilon", "alpha",
        [
            Layer("epsilon", "alpha", "dots", color_by="accuracy", where={"kind": "empirical"}, label="accuracy (blue 0.5, orange 1)"),
            Layer("epsilon", "alpha_boundary", "solid", color="black", label="replica boundary"),
        ],
        xlim=(0.0, 1.0), ylim=(0.0, plan.alpha_max),
    )
    table = [r for r in rows if r["kind"] == "empirical"] + [{"epsilon": b["epsilon"], "alpha_boundary": b["alpha_boundary"], "alpha": None, "accuracy": None, "kind": "boundary"} for b in boundary]
    return ExperimentResult(plan, header, rows, boundary, [("phase_diagram.svg", fig, table)])


def _curve_rows(plan, with_bimodal=False):
    alphas = sorted(set(_grid(0.0, 1.0, plan.alpha_step)) | {round(a, 12) for a in plan.sample_alphas})
    rows, sampled = [], []
    for a in alphas:
        p = _feasible_alpha(plan, a)
        if p is None:
            rows.append({"alpha": a, "c1": plan.c1, "c2": plan.c2, "sigma": plan.sigma, "note": "infeasible: epsilon outside [0, 1]"})
            continue
        row = replica_row(p, plan.solver_tol)
        if with_bimodal:
            row.update(_bimodal_row(p, plan.solver_tol))
            b, o = row["bimodal_bulk"], row["lambda_bulk"]
            row["bulk_rel_dev"] = abs(b - o) / o if math.isfinite(b) and math.isfinite(o) else math.nan
        rows.append(row)
        if any(abs(a - s) < 1e-9 for s in plan.sample_alphas):
            sampled.append((len(rows) - 1, a))
    return rows, sampled


def _sample_curve(plan, rows, sampled, model, prefix=""):
    k = plan.top_k
    tasks = []
    for idx, (row_i, a) in enumerate(sampled):
        for r in range(plan.n_samples):
            s = point_seed(plan.seed, plan.experiment_id, model, idx, r)
            tasks.append({"model": model, "c1": int(plan.c1), "c2": int(plan.c2), "alpha": a, "sigma": plan.sigma, "n": plan.n_nodes, "seed": s, "k": k, "tol": plan.eig_tol})
    results = run_tasks(tasks, plan.jobs)
    for idx, (row_i, a) in enumerate(sampled):
        chunk = results[idx * plan.n_samples : (idx + 1) * plan.n_samples]
        det = rows[row_i].get("bimodal_detectable" if model == "bimodal" else "detectable")
        summary = summarize(chunk, k, bool(det) if det is not None else None)
        note = summary.pop("note")
        rows[row_i].update({prefix + key: v for key, v in summary.items()})
        if note:
            rows[row_i]["note"] = "; ".join(x for x in (rows[row_i].get("note"), note) if x)


def _dots(k, prefix="", color="#2ca02c", label="empirical top eigenvalues"):
    return [Layer("alpha", f"{prefix}emp_{j + 1}", "dots", color=color, label=label if j == 0 else "") for j in range(k)]


def run_eigencurve(plan: ExperimentPlan) -> ExperimentResult:
    """Isolated eigenvalue, bulk edge and empirical top-k along alpha at fixed c2."""
    rows, sampled = _curve_rows(plan)
    _sample_curve(plan, rows, sampled, "overlap_micro")
    header = [*REPLICA_COLUMNS, *_emp_columns(plan.top_k), "note"]
    fig = FigureSpec(
        f"Leading eigenvalues (c1={plan.c1:g}, c2={plan.c2:g}, sigma={plan.sigma:g})", "alpha", "eigenvalue",
        [Layer("alpha", "lambda_det", "solid", "#d62728", "isolated (replica)"), Layer("alpha", "lambda_bulk", "dashed", "#d62728", "bulk edge (replica)"), *_dots(plan.top_k)],
        xlim=(0.0, 1.0),
    )
    return ExperimentResult(plan, header, rows, None, [("eigencurve_alpha.svg", fig, rows)])


def run_bimodal_compare(plan: ExperimentPlan) -> ExperimentResult:
    """Overlap model against its degree-matched bimodal control along alpha."""
    rows, sampled = _curve_rows(plan, with_bimodal=True)
    _sample_curve(plan, rows, sampled, "overlap_micro")
    _sample_curve(plan, rows, sampled, "bimodal", prefix="bimodal_")
    emp = _emp_columns(plan.top_k)
    header = [*REPLICA_COLUMNS, "bimodal_det", "bimodal_bulk", "bimodal_detectable", "bulk_rel_dev", *emp, *("bimodal_" + c for c in emp), "note"]
    fig = FigureSpec(
        f"Overlapping vs bimodal SBM (c1={plan.c1:g}, c2={plan.c2:g}, sigma={plan.sigma:g})", "alpha", "eigenvalue",
        [
            Layer("alpha", "lambda_det", "solid", "#d62728", "overlap isolated"),
            Layer("alpha", "lambda_bulk", "dashed", "#d62728", "overlap bulk edge"),
            Layer("alpha", "bimodal_det", "solid", "#8c564b", "bimodal isolated"),
            Layer("alpha", "bimodal_bulk", "dashed", "#8c564b", "bimodal bulk edge"),
            *_dots(plan.top_k, "", "#2ca02c", "overlap empirical"),
            *_dots(plan.top_k, "bimodal_", "#1f77b4", "bimodal empirical"),
        ],
        xlim=(0.0, 1.0),
    )
    return ExperimentResult(plan, header, rows, None, [("bimodal_compare.svg", fig, rows)])


def run_sigma_sweep(plan: ExperimentPlan) -> ExperimentResult:
    """Replica curves per sigma: alpha swept at epsilon = fixed, and epsilon swept at alpha = fixed."""
    grid = _grid(0.0, 1.0, plan.alpha_step)
    rows = []
    for panel, swept in (("a", "alpha"), ("b", "epsilon")):
        for r in rs.sigma_sweep(plan.c1, plan.sigma_list, grid, plan.fixed, swept, plan.solver_tol):
            alpha, eps = (r.swept, plan.fixed) if swept == "alpha" else (plan.fixed, r.swept)
            rows.append({
                "panel": panel, "sigma": r.sigma, "alpha": alpha, "epsilon": eps, "c2": r.c2,
                "lambda_det": r.lambda_det, "lambda_bulk": r.lambda_bulk, "detectable": r.detectable,
            })
    header = ["panel", "sigma", "alpha", "epsilon", "c2", "lambda_det", "lambda_bulk", "detectable"]
    palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2"]
    figs = []
    for panel, xcol, title in (("a", "alpha", f"epsilon = {plan.fixed:g}"), ("b", "epsilon", f"alpha = {plan.fixed:g}")):
        layers = []
        for i, s in enumerate(plan.sigma_list):
            col = palette[i % len(palette)]
            layers.append(Layer(xcol, "lambda_det", "solid", col, f"sigma={s:g}", where={"panel": panel, "sigma": float(s)}))
            layers.append(Layer(xcol, "lambda_bulk", "dashed", col, "", where={"panel": panel, "sigma": float(s)}))
        figs.append((f"sigma_sweep_{panel}.svg", FigureSpec(f"c1={plan.c1:g}, {title}", xcol, "eigenvalue", layers, xlim=(0.0, 1.0)), rows))
    return ExperimentResult(plan, header, rows, None, figs)


def predicted_leading(params, tol=rs.DEFAULT_TOL):
    """Replica value of the largest eigenvalue: isolated if detectable, else the bulk edge."""
    rep = rs.classify(params, tol)
    return (rep.lambda_isolated if rep.detectable else rep.lambda_bulk_edge), rep.detectable


def run_approximation_study(plan: ExperimentPlan) -> ExperimentResult:
    """Replica vs empirical largest eigenvalue for canonical and microcanonical samples.

    The canonical arm uses ``c2 = c2_ratio * c1``; the microcanonical arm
    rounds it to an integer. Epsilon follows from the constraint.
    """
    arms = [("canonical", "overlap_canon", c1, plan.c2_ratio * c1) for c1 in plan.canonical_c1]
    arms += [("microcanonical", "overlap_micro", c1, float(round(plan.c2_ratio * c1))) for c1 in plan.micro_c1]
    points, tasks = [], []
    for ai, (arm, model, c1, c2) in enumerate(arms):
        for ia, a in enumerate(plan.sample_alphas):
            try:
                p = overlap_params_from_degrees(c1, c2, a, plan.sigma, plan.n_nodes)
                lam, det = predicted_leading(p, plan.solver_tol)
            except (InfeasibleParameters, rs.SolverError) as exc:
                points.append(({"arm": arm, "c1": c1, "c2": c2, "alpha": a, "note": str(exc)}, False))
                continue
            points.append(({"arm": arm, "c1": c1, "c2": c2, "alpha": a, "epsilon": p.epsilon, "sigma": plan.sigma, "lambda_pred": lam, "detectable": det}, True))
            for r in range(plan.n_samples):
                s = point_seed(plan.seed, plan.experiment_id, ai, ia, r)
                tasks.append({"model": model, "c1": c1 if model == "overlap_canon" else int(c1), "c2": c2 if model == "overlap_canon" else int(c2), "alpha": a, "sigma": plan.sigma, "n": plan.n_nodes, "seed": s, "k": 1, "tol": plan.eig_tol})
    results = run_tasks(tasks, plan.jobs)
    rows, pos = [], 0
    for row, ok in points:
        if ok:
            chunk = results[pos : pos + plan.n_samples]
            pos += plan.n_samples
            mean, err = _mean_se([r["eigs"][0] for r in chunk])
            row.update(emp_mean=mean, emp_se=err, rel_dev=(mean - row["lambda_pred"]) / row["lambda_pred"])
            row["note"] = "; ".join(sorted({r["note"] for r in chunk if r["note"]}))
        rows.append(row)
    header = ["arm", "c1", "c2", "alpha", "epsilon", "sigma", "lambda_pred", "detectable", "emp_mean", "emp_se", "rel_dev", "note"]
    palette = ["#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"]
    figs = []
    for arm, c1s in (("canonical", plan.canonical_c1), ("microcanonical", plan.micro_c1)):
        layers = []
        for i, c1 in enumerate(c1s):
            col = palette[i % len(palette)]
            layers.append(Layer("alpha", "lambda_pred", "solid", col, f"c1={c1:g}", where={"arm": arm, "c1": c1}))
            layers.append(Layer("alpha", "emp_mean", "dots", col, "", where={"arm": arm, "c1": c1}))
        figs.append((f"approximation_{arm}.svg", FigureSpec(f"Largest eigenvalue, {arm} SBM", "alpha", "eigenvalue", layers), rows))
    return ExperimentResult(plan, header, rows, None, figs)


def run_spectrum_histogram(plan: ExperimentPlan) -> ExperimentResult:
    """Full modularity spectra of a strongly and a weakly structured two-block SBM."""
    if plan.n_nodes > se.DENSE_LIMIT:
        raise se.SizeGuardError(f"spectrum_histogram uses the dense oracle; set n_nodes <= {se.DENSE_LIMIT}")
    rows, extra, figs = [], {}, []
    for name, eps in (("strong", plan.epsilon_strong), ("weak", plan.epsilon_weak)):
        labels = planted_labels([plan.n_nodes // 2, plan.n_nodes - plan.n_nodes // 2])
        g = sample_canonical(two_block_affinity(plan.c1, eps, plan.n_nodes), labels, point_seed(plan.seed, plan.experiment_id, name))
        ev = se.dense_spectrum_oracle(g)
        cbar = 2 * g.m / g.n_nodes
        left, right, counts = se.histogram(ev[1:], plan.bins)
        extra[f"hist_{name}.csv"] = (["bin_left", "bin_right", "count"], list(zip(left.tolist(), right.tolist(), counts.tolist())))
        rows.append({
            "case": name, "epsilon": eps, "c_mean": cbar, "lambda_1": ev[0], "lambda_2": ev[1],
            "bulk_edge_ref": 2 * math.sqrt(max(cbar - 1, 0.0)), "gap": ev[0] - ev[1],
        })
        figs.append((
            f"spectrum_{name}.svg",
            FigureSpec(f"Modularity spectrum, {name} structure (epsilon={eps:g}); lambda_1={ev[0]:.3f}", "eigenvalue", "count", [Layer("x", "y", "solid", "#1f77b4")]),
            bars_table(left, right, counts),
        ))
    header = ["case", "epsilon", "c_mean", "lambda_1", "lambda_2", "bulk_edge_ref", "gap"]
    return ExperimentResult(plan, header, rows, None, figs, extra)


RUNNERS = {
    "phase_diagram": run_phase_diagram,
    "eigencurve_alpha": run_eigencurve,
    "bimodal_compare": run_bimodal_compare,
    "sigma_sweep": run_sigma_sweep,
    "approximation_study": run_approximation_study,
    "spectrum_histogram": run_spectrum_histogram,
}


def run_experiment(plan: ExperimentPlan) -> ExperimentResult:
    return RUNNERS[plan.experiment_id](plan)


def write_artifacts(result: ExperimentResult, out_dir, extra_meta: dict | None = None) -> dict:
    """Write data.csv, boundary.csv, meta.json and the SVG panels; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"data": write_csv(out / "data.csv", result.header, result.rows)}
    if result.boundary is not None:
        paths["boundary"] = write_csv(out / "boundary.csv", ["epsilon", "alpha_boundary", "note"], result.boundary)
    for name, (header, rows) in result.extra_tables.items():
        paths[name] = write_csv(out / name, header, rows)
    for name, spec, table in result.figures:
        paths[name] = emit_svg(table, spec, out / name)
    meta = {
        "experiment_id": result.plan.experiment_id,
        "plan": result.plan.to_dict(),
        "master_seed": result.plan.seed,
        "version": version_string(),
        "solver": {"eig_tol": result.plan.eig_tol, "max_matvecs": se.MAX_MATVECS, "saddle_tol": result.plan.solver_tol, "eigensolver": "arpack-lanczos"},
        "files": sorted(p.name for p in map(Path, paths.values())),
    }
    meta.update(extra_meta or {})
    (out / "meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    paths["meta"] = out / "meta.json"
    return paths
