"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 numerical failure, 3 I/O failure.
Errors are reported on stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import experiments as ex
from . import replica_solver as rs
from . import spectral_engine as se
from .graph import GraphError, read_edgelist, write_edgelist
from .sbm_models import (
    BimodalParams,
    InfeasibleParameters,
    RewireStall,
    build_overlap_params,
    overlap_params_from_degrees,
    planted_labels,
    sample_bimodal,
    sample_canonical,
    sample_overlap_canonical,
    sample_overlap_microcanonical,
    two_block_affinity,
)
from .tables import fmt, write_csv

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 1, 2, 3

DEFAULTS = {
    "sample": dict(model="overlap", ensemble="microcanonical", c1=10.0, c2=18.0, alpha=0.5, epsilon="auto", sigma=2.0, n=10_000, out="graph.txt"),
    "spectrum": dict(graph=None, k=10, tol=se.DEFAULT_TOL, max_matvecs=se.MAX_MATVECS, out="spectrum.csv", vector_out=None, hist_out=None, bins=60),
    "accuracy": dict(graph=None, tol=se.DEFAULT_TOL),
    "replica": dict(model="overlap", c1=10.0, c2=None, alpha=0.0, epsilon="auto", sigma=2.0, tol=rs.DEFAULT_TOL, alphas=None, append=None),
    "boundary": dict(c1=10.0, sigma=2.0, sweep="alpha", grid="0:1:0.02", alpha_max=1.0, xtol=1e-4, tol=rs.DEFAULT_TOL, out="boundary.csv"),
    "experiment": dict(experiment_id=None, out_dir=None, plan={}),
}
# experiment flags that map onto ExperimentPlan fields
PLAN_FLAGS = {"c1": "c1", "c2": "c2", "sigma": "sigma", "n": "n_nodes", "samples": "n_samples", "top_k": "top_k", "jobs": "jobs", "alpha_step": "alpha_step", "grid_step": "grid_step", "fixed": "fixed"}
OUTPUT_KEYS = ("out", "vector_out", "hist_out", "append", "out_dir")


class UsageError(Exception):
    pass


@dataclass
class CliConfig:
    subcommand: str
    params: dict = field(default_factory=dict)
    seed: int = 0
    outputs: dict = field(default_factory=dict)
    format: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return json.loads(json.dumps(asdict(self)))

    @classmethod
    def from_dict(cls, data: dict) -> "CliConfig":
        return cls(data["subcommand"], dict(data.get("params", {})), int(data.get("seed", 0)), dict(data.get("outputs", {})), dict(data.get("format", {})))


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _grid(text) -> list[float]:
    """``start:stop:step`` (inclusive) or a comma-separated list."""
    if text is None:
        return []
    if isinstance(text, (list, tuple)):
        return [float(v) for v in text]
    if ":" in text:
        parts = [float(v) for v in text.split(":")]
        if len(parts) != 3 or parts[2] <= 0:
            raise UsageError(f"bad grid {text!r}; expected start:stop:step")
        n = int(round((parts[1] - parts[0]) / parts[2]))
        return [round(parts[0] + i * parts[2], 12) for i in range(n + 1)]
    return [float(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="overlap-sbm", description="Spectral detectability of overlapping stochastic block models.")
    p.add_argument("--config", help="JSON file with parameter values (flags take precedence)")
    p.add_argument("--seed", type=int, default=None, help="master seed (default 0)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    s = sub.add_parser("sample", help="sample a graph and write an edge list plus JSON sidecar")
    s.add_argument("--model", choices=["canonical", "microcanonical", "overlap", "bimodal"])
    s.add_argument("--ensemble", choices=["canonical", "microcanonical"], help="overlap model ensemble")
    for name in ("c1", "c2", "alpha", "sigma"):
        s.add_argument(f"--{name}", type=float)
    s.add_argument("--epsilon", help="a number in [0, 1], or 'auto' to derive it from c1, c2, alpha, sigma")
    s.add_argument("--n", type=int)
    s.add_argument("--out")

    s = sub.add_parser("spectrum", help="top-k modularity eigenvalues of a stored graph")
    s.add_argument("--graph")
    s.add_argument("--k", type=int)
    s.add_argument("--tol", type=float)
    s.add_argument("--max-matvecs", dest="max_matvecs", type=int)
    s.add_argument("--out")
    s.add_argument("--vector-out", dest="vector_out")
    s.add_argument("--hist-out", dest="hist_out", help="dense full-spectrum histogram CSV (N <= 2000)")
    s.add_argument("--bins", type=int)

    s = sub.add_parser("accuracy", help="sign-partition accuracy of a stored graph against its planted labels")
    s.add_argument("--graph")
    s.add_argument("--tol", type=float)

    s = sub.add_parser("replica", help="solve the saddle-point equations at one point or along an alpha list")
    s.add_argument("--model", choices=["overlap", "bimodal"])
    for name in ("c1", "c2", "alpha", "sigma", "tol"):
        s.add_argument(f"--{name}", type=float)
    s.add_argument("--epsilon")
    s.add_argument("--alphas", help="sweep mode: start:stop:step or comma list")
    s.add_argument("--append", help="append rows to this CSV")

    s = sub.add_parser("boundary", help="detectability boundary along grid lines")
    for name in ("c1", "sigma", "alpha_max", "xtol", "tol"):
        s.add_argument(f"--{name.replace('_', '-')}", dest=name, type=float)
    s.add_argument("--sweep", choices=["alpha", "epsilon"])
    s.add_argument("--grid")
    s.add_argument("--out")

    s = sub.add_parser("experiment", help="run a figure reproduction and write its artifact set")
    s.add_argument("experiment_id", choices=ex.EXPERIMENTS)
    for flag in ("c1", "c2", "sigma", "alpha_step", "grid_step", "fixed"):
        s.add_argument(f"--{flag.replace('_', '-')}", dest=flag, type=float)
    for flag in ("n", "samples", "top_k", "jobs"):
        s.add_argument(f"--{flag.replace('_', '-')}", dest=flag, type=int)
    s.add_argument("--out-dir", dest="out_dir")
    return p


def resolve_config(argv=None) -> CliConfig:
    """Merge defaults, then the JSON config file, then explicit flags."""
    ns = build_parser().parse_args(argv)
    cmd = ns.subcommand
    params = dict(DEFAULTS[cmd])
    seed = 0
    fmt_flags = {"verbose": bool(ns.verbose)}
    if ns.config:
        text = Path(ns.config).read_text(encoding="utf-8")  # OSError -> exit 3
        try:
            conf = json.loads(text)
        except json.JSONDecodeError as exc:
            raise UsageError(f"config file is not valid JSON: {exc}") from exc
        if "params" in conf or "subcommand" in conf:
            seed = int(conf.get("seed", seed))
            conf = {**conf.get("params", {}), **conf.get("outputs", {})}
        else:
            seed = int(conf.pop("seed", seed))
        for key, val in conf.items():
            if cmd == "experiment" and key not in params:
                params["plan"] = {**params["plan"], key: val}
            elif key in params:
                params[key] = val
            else:
                raise UsageError(f"config key {key!r} does not apply to '{cmd}'")
    for key, val in vars(ns).items():
        if key in ("config", "seed", "verbose", "subcommand") or val is None:
            continue
        if cmd == "experiment" and key in PLAN_FLAGS:
            params["plan"] = {**params["plan"], PLAN_FLAGS[key]: val}
        else:
            params[key] = val
    if ns.seed is not None:
        seed = ns.seed
    outputs = {k: params.pop(k) for k in OUTPUT_KEYS if k in params}
    return CliConfig(cmd, params, seed, outputs, fmt_flags)


# --- subcommands --------------------------------------------------------------------


def _epsilon(p):
    if p["epsilon"] in (None, "auto"):
        if p.get("c2") is None:
            raise UsageError("--epsilon auto needs --c2")
        return None
    try:
        return float(p["epsilon"])
    except ValueError:
        raise UsageError(f"--epsilon must be a number or 'auto', got {p['epsilon']!r}") from None


def _overlap_params(p, n, alpha=None):
    alpha = p["alpha"] if alpha is None else alpha
    if p["c1"] is None or p["c1"] <= 0:
        raise UsageError("--c1 must be positive")
    eps = _epsilon(p)
    if eps is None:
        return overlap_params_from_degrees(p["c1"], p["c2"], alpha, p["sigma"], n)
    return build_overlap_params(p["c1"], alpha, eps, p["sigma"], n)


def _int_degree(x, name):
    if x is None or float(x) != int(x):
        raise InfeasibleParameters(f"{name} must be an integer for microcanonical sampling (got {x})")
    return int(x)


def cmd_sample(cfg: CliConfig) -> int:
    p, seed, n = cfg.params, cfg.seed, int(cfg.params["n"])
    model = p["model"]
    classes = None
    if p["c1"] is None or p["c1"] <= 0:
        raise UsageError("--c1 must be positive")
    if model == "canonical":
        if p["epsilon"] in (None, "auto"):
            raise UsageError("two-block models need a numeric --epsilon")
        eps = _epsilon(p)
        labels = planted_labels([n // 2, n - n // 2])
        graph = sample_canonical(two_block_affinity(p["c1"], eps, n), labels, seed)
        info = {"c": p["c1"], "epsilon": eps}
    elif model == "microcanonical":
        if p["epsilon"] == "auto":
            raise UsageError("two-block models need a numeric --epsilon")
        c = _int_degree(p["c1"], "c1")
        bp = BimodalParams(n, c, c, 1.0, 0.0, float(p["epsilon"]))
        graph, labels, _ = sample_bimodal(bp, seed)
        info = bp.as_dict()
    elif model == "overlap":
        op = _overlap_params(p, n)
        if p["ensemble"] == "canonical":
            graph, labels = sample_overlap_canonical(op, seed)
        else:
            graph, labels = sample_overlap_microcanonical(_int_degree(op.c1, "c1"), _int_degree(round(op.c2, 9), "c2"), op.alpha, op.sigma, n, seed)
        info = {**op.as_dict(), "ensemble": p["ensemble"]}
    else:
        # no degree-balance constraint here: c2 and a numeric epsilon are taken as given
        eps = _epsilon(p)
        c2 = p["c2"] if p["c2"] is not None else _overlap_params(p, n).c2
        if eps is None:
            eps = _overlap_params(p, n).epsilon
        b2 = p["alpha"] / (2.0 + p["alpha"])
        bp = BimodalParams(n, _int_degree(p["c1"], "c1"), _int_degree(round(c2, 9), "c2"), 1.0 - b2, b2, eps)
        graph, labels, classes = sample_bimodal(bp, seed)
        info = bp.as_dict()
    meta = {"labels": labels, "model": model, "params": info, "seed": seed, "config": cfg.to_dict()}
    if classes is not None:
        meta["degree_classes"] = classes
    out = cfg.outputs["out"]
    sidecar = write_edgelist(graph, out, meta)
    print(json.dumps({"n": graph.n_nodes, "m": graph.m, "edges": str(out), "sidecar": str(sidecar)}))
    return EXIT_OK


def _load_graph(p):
    if not p.get("graph"):
        raise UsageError("--graph is required")
    return read_edgelist(p["graph"])


def cmd_spectrum(cfg: CliConfig) -> int:
    p = cfg.params
    graph, side = _load_graph(p)
    op = se.ModularityOperator(graph)
    res = se.top_k_eigenvalues(op, int(p["k"]), float(p["tol"]), cfg.seed, int(p["max_matvecs"]))
    se.write_spectrum_csv(res, cfg.outputs["out"])
    if cfg.outputs.get("vector_out"):
        planted = np.asarray(side.get("labels", np.zeros(graph.n_nodes, int)))
        se.write_eigenvector_csv(res, planted, cfg.outputs["vector_out"])
    if cfg.outputs.get("hist_out"):
        se.write_histogram_csv(se.dense_spectrum_oracle(graph), cfg.outputs["hist_out"], int(p["bins"]))
    print(json.dumps({"eigenvalues": res.eigenvalues.tolist(), **res.solver_meta}))
    return EXIT_OK


def cmd_accuracy(cfg: CliConfig) -> int:
    graph, side = _load_graph(cfg.params)
    if "labels" not in side:
        raise UsageError("graph sidecar has no planted labels")
    planted = np.asarray(side["labels"])
    res = se.leading_eigenpair(se.ModularityOperator(graph), float(cfg.params["tol"]), cfg.seed)
    labels = se.partition_by_sign(res)
    score = se.overlap_accuracy(labels, planted) if (planted == 3).any() else se.two_block_accuracy(labels, planted)
    print(json.dumps({"accuracy": score.accuracy, "n_scored": score.n_scored, "lambda_1": res.leading_value}))
    return EXIT_OK


REPLICA_HEADER = ["model", *ex.REPLICA_COLUMNS, "note"]


def _replica_point(p, alpha) -> dict:
    op = _overlap_params(p, 10**9, alpha)
    if p["model"] == "overlap":
        row = ex.replica_row(op, float(p["tol"]))
    else:
        rep = rs.classify_bimodal(BimodalParams.matching(op), float(p["tol"]))
        det = rep.detectable_solution
        row = {
            "c1": op.c1, "c2": op.c2, "alpha": op.alpha, "epsilon": op.epsilon, "sigma": op.sigma,
            "lambda_det": math.nan if rep.lambda_isolated is None else rep.lambda_isolated,
            "lambda_bulk": rep.lambda_bulk_edge, "detectable": rep.detectable,
            "residual_det": math.nan if det is None else det.residual, "residual_und": rep.bulk_solution.residual,
            "d_value": rep.d_value, "note": "",
        }
    row["model"] = p["model"]
    return row


def cmd_replica(cfg: CliConfig) -> int:
    p = cfg.params
    sweep = p.get("alphas") is not None
    alphas = _grid(p["alphas"]) if sweep else [float(p["alpha"])]
    rows, failed = [], False
    for a in alphas:
        try:
            row = _replica_point(p, a)
        except (InfeasibleParameters, rs.SolverError) as exc:
            if not sweep:
                raise
            row = {"model": p["model"], "c1": p["c1"], "c2": p["c2"], "alpha": a, "sigma": p["sigma"], "note": str(exc)}
        if row.get("note"):
            failed = True
        rows.append(row)
    body = [[fmt(r.get(h)) for h in REPLICA_HEADER] for r in rows]
    csv.writer(sys.stdout, lineterminator="\n").writerows([REPLICA_HEADER, *body])
    if cfg.outputs.get("append"):
        path = Path(cfg.outputs["append"])
        new = not path.exists() or path.stat().st_size == 0
        with path.open("a", newline="", encoding="utf-8") as fh:
            csv.writer(fh, lineterminator="\n").writerows([REPLICA_HEADER, *body] if new else body)
    if failed and not sweep:
        return _fail(EXIT_NUMERIC, "numerical", rs.SolverError(rows[0]["note"]))
    return EXIT_OK


def cmd_boundary(cfg: CliConfig) -> int:
    p = cfg.params
    grid = _grid(p["grid"])
    pts = rs.phase_boundary(float(p["c1"]), float(p["sigma"]), grid, p["sweep"], float(p["alpha_max"]), float(p["tol"]), float(p["xtol"]))
    fixed, moving = ("epsilon", "alpha") if p["sweep"] == "alpha" else ("alpha", "epsilon")
    rows = [{fixed: b.fixed, f"{moving}_boundary": b.boundary, "note": b.note} for b in pts]
    write_csv(cfg.outputs["out"], [fixed, f"{moving}_boundary", "note"], rows)
    print(json.dumps({"points": len(rows), "found": sum(b.boundary is not None for b in pts), "out": str(cfg.outputs["out"])}))
    return EXIT_OK


def cmd_experiment(cfg: CliConfig) -> int:
    p = cfg.params
    plan = ex.ExperimentPlan.from_dict({**p["plan"], "experiment_id": p["experiment_id"], "seed": cfg.seed})
    out_dir = cfg.outputs.get("out_dir") or f"runs/{plan.experiment_id}"
    result = ex.run_experiment(plan)
    paths = ex.write_artifacts(result, out_dir, {"config": cfg.to_dict()})
    flagged = sum(1 for r in result.rows if r.get("note"))
    print(json.dumps({"out_dir": str(out_dir), "rows": len(result.rows), "flagged_rows": flagged, "files": sorted(Path(v).name for v in paths.values())}))
    return EXIT_OK


COMMANDS = {"sample": cmd_sample, "spectrum": cmd_spectrum, "accuracy": cmd_accuracy, "replica": cmd_replica, "boundary": cmd_boundary, "experiment": cmd_experiment}


def _fail(code, kind, exc) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "kind": kind, "message": str(exc)}) + "\n")
    return code


def main(argv=None) -> int:
    try:
        cfg = resolve_config(argv)
        logging.basicConfig(level=logging.INFO if cfg.format.get("verbose") else logging.WARNING)
        return COMMANDS[cfg.subcommand](cfg)
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except (UsageError, InfeasibleParameters) as exc:
        return _fail(EXIT_USAGE, "usage", exc)
    except (OSError, GraphError) as exc:
        return _fail(EXIT_IO, "io", exc)
    except (rs.SolverError, se.NonConverged, RewireStall, ArithmeticError) as exc:
        return _fail(EXIT_NUMERIC, "numerical", exc)
    except ValueError as exc:
        return _fail(EXIT_USAGE, "usage", exc)


if __name__ == "__main__":
    sys.exit(main())
