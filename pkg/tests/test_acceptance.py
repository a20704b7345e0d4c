"""Acceptance criteria 1-8.

Each test prints one ``CRITERION n PASS|FAIL`` line with the measured values,
then asserts. The Monte-Carlo criteria (2, 3, 6) run at N = 10^4 with 10
seeds in serial mode and take several minutes in total.
"""

import math
import time

import numpy as np
import pytest

from overlap_sbm import experiments as ex
from overlap_sbm import replica_solver as rs
from overlap_sbm.sbm_models import (
    BimodalParams,
    build_overlap_params,
    overlap_microcanonical_spec,
    overlap_params_from_degrees,
    planted_labels,
    sample_bimodal,
    sample_canonical,
    sample_overlap_canonical,
    sample_overlap_microcanonical,
    two_block_affinity,
)
from overlap_sbm.spectral_engine import (
    ModularityOperator,
    dense_spectrum_oracle,
    overlap_accuracy,
    top_k_eigenvalues,
)

pytestmark = pytest.mark.acceptance

C1, C2, SIGMA, N, SEEDS = 10, 18, 2.0, 10_000, 10
TENTHS = tuple(round(0.1 * i, 10) for i in range(11))


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\nCRITERION {n} {'PASS' if ok else 'FAIL'}: {detail}")
        return ok

    return emit


def line(alpha, c1=C1, c2=C2, sigma=SIGMA):
    return overlap_params_from_degrees(c1, c2, alpha, sigma, 10**9)


def test_criterion_1_endpoint_exactness(report):
    t0 = time.perf_counter()
    b0 = rs.solve_undetectable(line(0.0)).phi
    b1 = rs.solve_undetectable(line(1.0)).phi
    elapsed = time.perf_counter() - t0
    e0, e1 = abs(b0 - 2 * math.sqrt(C1 - 1)), abs(b1 - 2 * math.sqrt(C2 - 1))
    ok = e0 <= 1e-6 and e1 <= 1e-6 and elapsed < 1.0
    report(1, ok, f"bulk(0)={b0:.9f} vs {2 * math.sqrt(C1 - 1):.9f} (err {e0:.2e}); bulk(1)={b1:.9f} vs {2 * math.sqrt(C2 - 1):.9f} (err {e1:.2e}); {elapsed:.3f}s")
    assert ok


def test_criterion_2_eigencurve_reproduction(report):
    plan = ex.ExperimentPlan("eigencurve_alpha", c1=C1, c2=C2, sigma=SIGMA, n_nodes=N, n_samples=SEEDS, top_k=2, alpha_step=0.1, sample_alphas=TENTHS)
    rows = [r for r in ex.run_experiment(plan).rows if r.get("emp_1") is not None]
    det_dev, bulk_dev = [], []
    for r in rows:
        if r["detectable"]:
            det_dev.append((r["alpha"], abs(r["emp_1"] - r["lambda_det"]) / r["lambda_det"]))
        bulk_dev.append((r["alpha"], abs(r["bulk_proxy"] - r["lambda_bulk"]) / r["lambda_bulk"]))
    worst_det = max(det_dev, key=lambda t: t[1])
    worst_bulk = max(bulk_dev, key=lambda t: t[1])
    ok = len(rows) == 11 and all(r["n_ok"] == SEEDS for r in rows) and worst_det[1] < 0.02 and worst_bulk[1] < 0.03
    report(2, ok, f"{len(det_dev)} detectable points, max |emp_1/lambda_det - 1| = {worst_det[1]:.4f} at alpha={worst_det[0]:g}; max |bulk proxy/lambda_bulk - 1| = {worst_bulk[1]:.4f} at alpha={worst_bulk[0]:g}")
    assert ok


def test_criterion_3_accuracy_boundary(report):
    step = 0.02
    alphas = [round(step * i, 10) for i in range(int(round(1 / step)) + 1)]
    tasks = []
    for ia, a in enumerate(alphas):
        for r in range(SEEDS):
            tasks.append({"model": "overlap_micro", "c1": C1, "c2": C2, "alpha": a, "sigma": SIGMA, "n": N, "seed": ex.point_seed(0, "criterion_3", ia, r), "k": 1, "tol": 1e-8})
    results = ex.run_tasks(tasks)
    means, ses = [], []
    for ia in range(len(alphas)):
        m, s = ex._mean_se([res["accuracy"] for res in results[ia * SEEDS : (ia + 1) * SEEDS]])
        means.append(m)
        ses.append(s)
    first = next((a for a, m, s in zip(alphas, means, ses) if m - 0.5 <= 2 * s), None)
    replica = rs.bisect_boundary(lambda a: rs.classify(line(a)).detectable, 0.0, 1.0, 1e-6)
    # diagnostic only: where the accuracy curve falls fastest
    drops = np.diff(means)
    steep = alphas[int(np.argmin(drops)) + 1]
    ok = first is not None and abs(first - replica) <= step
    report(3, ok, f"first alpha within 2 se of 0.5: {first}; replica boundary {replica:.4f}; min mean accuracy {min(means):.4f} (se {ses[int(np.argmin(means))]:.4f}); steepest drop ends at alpha={steep:g}")
    assert ok


def test_criterion_4_bimodal_comparison(report):
    alphas = [round(0.01 * i, 10) for i in range(101)]
    below, devs = [], []
    for a in alphas:
        p = line(a)
        bim = rs.classify_bimodal(BimodalParams.matching(p))
        bulk = rs.solve_undetectable(p).phi
        if not (bim.lambda_isolated is not None and bim.lambda_isolated > bim.lambda_bulk_edge):
            below.append(a)
        devs.append(abs(bim.lambda_bulk_edge - bulk) / bulk)
    end0, end1 = devs[0] * rs.solve_undetectable(line(0.0)).phi, devs[-1] * rs.solve_undetectable(line(1.0)).phi
    interior = devs[1:-1]
    imax = int(np.argmax(interior)) + 1
    ok = not below and end0 <= 1e-6 and end1 <= 1e-6 and max(interior) < 0.02
    report(4, ok, f"isolated above bulk on all {len(alphas)} points: {not below}; endpoint |diff| alpha=0: {end0:.2e}, alpha=1: {end1:.2e}; max interior rel. deviation {max(interior):.4f} at alpha={alphas[imax]:g}")
    assert ok


def test_criterion_5_sigma_dependence(report):
    t0 = time.perf_counter()
    rows = rs.sigma_sweep(C1, (0.0, 0.5, 1.0, 1.5, 2.0), [0.5], fixed=0.3, swept="alpha")
    elapsed = time.perf_counter() - t0
    bulk = [r.lambda_bulk for r in rows]
    det = [r.lambda_det for r in rows]
    increasing = all(b is not None for b in bulk) and all(x < y for x, y in zip(bulk, bulk[1:]))
    bulk_var = (max(bulk) - min(bulk)) / min(bulk) if increasing else math.nan
    defined = [d for d in det if d is not None]
    det_var = (max(defined) - min(defined)) / min(defined) if defined else math.nan
    ok = increasing and len(defined) == len(det) and det_var < bulk_var and elapsed < 10
    shown = ", ".join("none" if d is None else f"{d:.4f}" for d in det)
    report(5, ok, f"bulk {', '.join(f'{b:.4f}' for b in bulk)} (increasing: {increasing}, variation {bulk_var:.4f}); lambda_det {shown} (variation over defined points {det_var:.4f}); {elapsed:.2f}s")
    assert ok


def test_criterion_6_approximation_study(report):
    plan = ex.ExperimentPlan("approximation_study", c1=C1, sigma=SIGMA, n_nodes=N, n_samples=SEEDS, sample_alphas=TENTHS, canonical_c1=(30,), micro_c1=(3, 6), c2_ratio=1.8)
    rows = ex.run_experiment(plan).rows

    def worst(arm, c1):
        sel = [r for r in rows if r["arm"] == arm and r["c1"] == c1]
        assert all(not r.get("note") for r in sel), [r["note"] for r in sel if r.get("note")]
        return max(abs(r["rel_dev"]) for r in sel)

    m6, m3, c30 = worst("microcanonical", 6), worst("microcanonical", 3), worst("canonical", 30)
    ok = m6 < 0.02 and m3 > 0.02 and c30 < 0.02
    report(6, ok, f"max |rel dev|: microcanonical c1=6 {m6:.4f} (need < 0.02), c1=3 {m3:.4f} (need > 0.02), canonical c1=30 {c30:.4f} (need < 0.02)")
    assert ok


def test_criterion_7_property_suites(report):
    failures = []
    n = 500
    p = build_overlap_params(10, 0.5, 1 / 6, 2, n)
    labels = planted_labels([n // 2, n - n // 2])
    graphs = {
        "canonical": sample_canonical(two_block_affinity(8, 0.3, n), labels, 1),
        "overlap_canonical": sample_overlap_canonical(p, 2)[0],
        "microcanonical": sample_overlap_microcanonical(10, 18, 0.5, 2, n, 3)[0],
        "bimodal": sample_bimodal(BimodalParams.matching(p), 4)[0],
    }
    for name, g in graphs.items():
        op = ModularityOperator(g)
        if np.abs(op.matvec(np.ones(n))).max() > 1e-12 * np.linalg.norm(op.d):
            failures.append(f"row sum {name}")
        dense = dense_spectrum_oracle(g)
        d = g.degrees.astype(float)
        if abs(dense.sum() + np.sum(d**2) / d.sum()) > 1e-8:
            failures.append(f"trace {name}")
        sparse = top_k_eigenvalues(op, 10, seed=1).eigenvalues
        if np.abs(sparse - dense[:10]).max() > 1e-6:
            failures.append(f"sparse vs dense {name}")
    for c1, c2, a, nn in [(10, 18, 0.5, 2000), (10, 18, 0.3, 3001), (6, 11, 1.0, 1000)]:
        spec = overlap_microcanonical_spec(c1, c2, a, 2, nn)
        g, lab = sample_overlap_microcanonical(c1, c2, a, 2, nn, 5)
        u, v = g.edges()
        e = np.zeros((3, 3), dtype=np.int64)
        np.add.at(e, (lab[u] - 1, lab[v] - 1), 1)
        e = e + e.T - np.diag(np.diag(e))
        if not (np.array_equal(g.degrees, spec.degrees) and np.array_equal(e, spec.edge_counts)):
            failures.append(f"microcanonical exactness {(c1, c2, a, nn)}")
    rng = np.random.default_rng(0)
    planted = planted_labels([40, 20, 40])
    for _ in range(200):
        t = rng.integers(1, 3, 100)
        s = overlap_accuracy(t, planted).accuracy
        if s != overlap_accuracy(3 - t, planted).accuracy or s < 0.5:
            failures.append("accuracy invariance/floor")
            break
    for c1, a, eps, s in rng.uniform([1.5, 0, 0, 0], [60, 3, 1, 4], size=(200, 4)):
        q = build_overlap_params(c1, a, eps, s, 10**9)
        if q.constraint_residual() > 1e-12:
            failures.append("constraint closure")
            break
    for eps in (0.0, 0.1, 0.3):
        q = build_overlap_params(10, 0.0, eps, 2, 10**9)
        bp = BimodalParams(10**9, 10, 18, 1.0, 0.0, eps)
        if abs(rs.solve_bimodal_detectable(bp).phi - rs.solve_detectable(q).phi) > 1e-8 or abs(rs.solve_bimodal_undetectable(bp).phi - rs.solve_undetectable(q).phi) > 1e-8:
            failures.append(f"bimodal cross-solver eps={eps}")
    worst = 0.0
    for a in TENTHS:
        rep = rs.classify(line(a))
        sols = [rep.bulk_solution] + ([rep.detectable_solution] if rep.detectable_solution is not None else [])
        brep = rs.classify_bimodal(BimodalParams.matching(line(a)))
        sols += [brep.bulk_solution] + ([brep.detectable_solution] if brep.detectable_solution is not None else [])
        worst = max(worst, *(s.residual for s in sols))
    if worst > 1e-10:
        failures.append(f"Newton residual {worst:.2e}")
    ok = not failures
    report(7, ok, f"row-sum, trace, sparse-vs-dense (4 samplers), microcanonical exactness, accuracy invariance, closure, cross-solver, residuals (max {worst:.1e}); failures: {failures or 'none'}")
    assert ok


def test_criterion_8_bimodal_closure_validation(report):
    n, seeds = 2000, 3
    devs = []
    for a in (0.25, 0.5, 0.75):
        p = overlap_params_from_degrees(C1, C2, a, SIGMA, n)
        bp = BimodalParams.matching(p)
        phi = rs.solve_bimodal_undetectable(bp).phi
        det = rs.classify_bimodal(bp).detectable
        emp = []
        for s in range(seeds):
            g = sample_bimodal(bp, ex.point_seed(0, "criterion_8", int(a * 100), s))[0]
            ev = dense_spectrum_oracle(g)
            emp.append(ev[1] if det else ev[0])
        m = float(np.mean(emp))
        devs.append((a, phi, m, abs(m - phi) / phi))
    ok = all(d[3] < 0.05 for d in devs)
    detail = "; ".join(f"alpha={a:g}: closure {phi:.4f} vs dense {m:.4f} ({d:.4f})" for a, phi, m, d in devs)
    report(8, ok, detail + ("" if ok else "; criterion 4 interior claims are not validated"))
    assert ok
