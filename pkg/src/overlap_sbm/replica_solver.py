"""Saddle-point (EMA) equations for the leading modularity eigenvalue.

Both the overlapping SBM and the bimodal SBM reduce to the same two-class
system.  A *class* groups the nodes that share one precision parameter
``a_k`` (blocks 1 and 3 of the overlap model form one class by symmetry).
With ``h_k`` the incoming-message precision and ``delta_k = a_k - h_k``::

    a_1 + (c_1 - 1) h_1 = a_2 + (c_2 - 1) h_2              (= phi)
    1 / delta_k = sum_l pi_kl a_l / (a_k a_l - 1)            k = 1, 2

closed by one of

    det(I - T) = 0,  T_kl = (c_k - 1) delta_k S_kl / (a_k a_l - 1)   detectable
    det(M) = 0                                                          undetectable

where ``pi`` is the class-to-class edge-end distribution, ``S`` its
community-antisymmetric part and ``M`` the second-moment matrix.  The
predicted eigenvalue is ``phi``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np

from .sbm_models import BimodalParams, OverlapParams, build_overlap_params

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-12


class SolverError(RuntimeError):
    pass


class NoDetectableRoot(SolverError):
    pass


class NoBulkRoot(SolverError):
    pass


class NoRootInBracket(SolverError):
    pass


class SingularDenominator(ArithmeticError):
    pass


class Branch(str, Enum):
    DETECTABLE = "detectable"
    UNDETECTABLE = "undetectable"


@dataclass(frozen=True)
class ClassSystem:
    """Two-class EMA system.

    weights: population fraction of each class (a zero weight marks an empty class).
    """

    degrees: tuple
    mixing: tuple
    signed: tuple
    weights: tuple

    @property
    def single(self) -> bool:
        return self.weights[1] == 0.0


def overlap_system(params: OverlapParams) -> ClassSystem:
    a, e, s = params.alpha, params.epsilon, params.sigma
    pi = np.array(
        [
            [(1 + e) / (1 + a + e), a / (1 + a + e)],
            [2 / (s * a + 2), s * a / (s * a + 2)],
        ]
    )
    g = (1 - e) / (1 + a + e)
    signed = np.array([[g, 0.0], [0.0, 0.0]])
    return ClassSystem((params.c1, params.c2), _pairs(pi), _pairs(signed), (2 * params.p1, params.p2))


def bimodal_system(params: BimodalParams) -> ClassSystem:
    c = np.array([params.c1, params.c2], dtype=float)
    b = np.array([params.b1, params.b2])
    ends = b * c / (b @ c)
    pi = np.vstack([ends, ends])
    gamma = (1 - params.epsilon) / (1 + params.epsilon)
    return ClassSystem((float(params.c1), float(params.c2)), _pairs(pi), _pairs(gamma * pi), (params.b1, params.b2))


def _pairs(m):
    return tuple(tuple(float(v) for v in row) for row in np.asarray(m))


# --- residuals and Jacobian -------------------------------------------------


def _common(z, sys):
    a1, a2, h1, h2 = z
    c1, c2 = sys.degrees
    (p11, p12), (p21, p22) = sys.mixing
    d1, d2 = a1 - h1, a2 - h2
    P11, P12, P22 = a1 * a1 - 1, a1 * a2 - 1, a2 * a2 - 1
    r = [
        a1 + (c1 - 1) * h1 - a2 - (c2 - 1) * h2,
        1 / d1 - p11 * a1 / P11 - p12 * a2 / P12,
        1 / d2 - p21 * a1 / P12 - p22 * a2 / P22,
    ]
    J = [
        [1.0, -1.0, c1 - 1, -(c2 - 1)],
        [-1 / d1**2 + p11 * (a1 * a1 + 1) / P11**2 + p12 * a2 * a2 / P12**2, p12 / P12**2, 1 / d1**2, 0.0],
        [p21 / P12**2, -1 / d2**2 + p21 * a1 * a1 / P12**2 + p22 * (a2 * a2 + 1) / P22**2, 0.0, 1 / d2**2],
    ]
    return r, J


def _det_closure(z, sys):
    """det(I - T) and its gradient."""
    a1, a2, h1, h2 = z
    c1, c2 = sys.degrees
    (s11, s12), (s21, s22) = sys.signed
    d1, d2 = a1 - h1, a2 - h2
    P11, P12, P22 = a1 * a1 - 1, a1 * a2 - 1, a2 * a2 - 1
    k1, k2 = (c1 - 1) * d1, (c2 - 1) * d2
    T11, T12, T21, T22 = k1 * s11 / P11, k1 * s12 / P12, k2 * s21 / P12, k2 * s22 / P22
    g1, g2 = c1 - 1, c2 - 1
    dT11 = (g1 * s11 * (1 / P11 - 2 * a1 * d1 / P11**2), 0.0, -g1 * s11 / P11, 0.0)
    dT12 = (g1 * s12 * (1 / P12 - d1 * a2 / P12**2), -g1 * s12 * d1 * a1 / P12**2, -g1 * s12 / P12, 0.0)
    dT21 = (-g2 * s21 * d2 * a2 / P12**2, g2 * s21 * (1 / P12 - d2 * a1 / P12**2), 0.0, -g2 * s21 / P12)
    dT22 = (0.0, g2 * s22 * (1 / P22 - 2 * a2 * d2 / P22**2), 0.0, -g2 * s22 / P22)
    val = (1 - T11) * (1 - T22) - T12 * T21
    grad = [
        -dT11[m] * (1 - T22) - (1 - T11) * dT22[m] - dT12[m] * T21 - T12 * dT21[m] for m in range(4)
    ]
    return val, grad


def _second_moment(z, sys):
    """Row-scaled second-moment matrix entries and their gradients.

    Row k is multiplied by ``(c_k - 1) delta_k^2 / c_k`` so the diagonal
    penalty becomes -1; the determinant keeps its sign and zero set.
    """
    a1, a2, h1, h2 = z
    c1, c2 = sys.degrees
    (p11, p12), (p21, p22) = sys.mixing
    d1, d2 = a1 - h1, a2 - h2
    P11, P12, P22 = a1 * a1 - 1, a1 * a2 - 1, a2 * a2 - 1
    Q12 = 1 / P12**2
    U1 = p11 * (a1 * a1 + 1) / P11**2 + p12 * a2 * a2 * Q12
    U2 = p22 * (a2 * a2 + 1) / P22**2 + p21 * a1 * a1 * Q12
    dU1 = (-2 * p11 * a1 * (a1 * a1 + 3) / P11**3 - 2 * p12 * a2**3 / P12**3, -2 * p12 * a2 / P12**3, 0.0, 0.0)
    dU2 = (-2 * p21 * a1 / P12**3, -2 * p22 * a2 * (a2 * a2 + 3) / P22**3 - 2 * p21 * a1**3 / P12**3, 0.0, 0.0)
    dQ12 = (-2 * a2 / P12**3, -2 * a1 / P12**3, 0.0, 0.0)
    s1, s2 = (c1 - 1) * d1 * d1 / c1, (c2 - 1) * d2 * d2 / c2
    e1, e2 = 2 * (c1 - 1) * d1 / c1, 2 * (c2 - 1) * d2 / c2
    ds1 = (e1, 0.0, -e1, 0.0)
    ds2 = (0.0, e2, 0.0, -e2)
    N = ((s1 * U1 - 1, s1 * p12 * Q12), (s2 * p21 * Q12, s2 * U2 - 1))
    dN = [
        (
            (ds1[m] * U1 + s1 * dU1[m], p12 * (ds1[m] * Q12 + s1 * dQ12[m])),
            (p21 * (ds2[m] * Q12 + s2 * dQ12[m]), ds2[m] * U2 + s2 * dU2[m]),
        )
        for m in range(4)
    ]
    return N, dN


def second_moment_matrix(z, sys: ClassSystem) -> np.ndarray:
    """Row-scaled second-moment matrix at ``z = (a1, a2, a1_hat, a2_hat)``."""
    return np.array(_second_moment(tuple(float(v) for v in z), sys)[0])


def _und_closure(z, sys):
    N, dN = _second_moment(z, sys)
    (n11, n12), (n21, n22) = N
    val = n11 * n22 - n12 * n21
    grad = [d[0][0] * n22 + n11 * d[1][1] - d[0][1] * n21 - n12 * d[1][0] for d in dN]
    return val, grad


def residual(z, sys: ClassSystem, branch: Branch):
    """Residual vector and analytic Jacobian of the four-equation system."""
    z = tuple(float(v) for v in z)
    r, J = _common(z, sys)
    v, g = _det_closure(z, sys) if branch is Branch.DETECTABLE else _und_closure(z, sys)
    return np.array([*r, v]), np.array([*J, g])


def admissible(z, sys: ClassSystem, a_max=1e4) -> bool:
    """Physical region: 1 < a_k < a_max and 0 < a_hat_k < a_k."""
    a1, a2, h1, h2 = z
    if not (1.0 < a1 < a_max and 1.0 < a2 < a_max):
        return False
    return 0.0 < h1 < a1 and 0.0 < h2 < a2


# --- damped Newton ----------------------------------------------------------


@dataclass
class NewtonResult:
    z: np.ndarray
    residual: float
    iterations: int
    converged: bool


def damped_newton(z0, sys, branch, tol=DEFAULT_TOL, max_iter=100, max_halvings=30) -> NewtonResult:
    """Newton iteration with step halving until the residual norm decreases.

    Steps that leave the admissible region (a_k > 1, a_1 a_2 > 1) are halved too.
    """
    z = np.array(z0, dtype=float)
    if not admissible(z, sys):
        return NewtonResult(z, math.inf, 0, False)
    r, J = residual(z, sys, branch)
    norm = np.max(np.abs(r))
    for it in range(1, max_iter + 1):
        if norm <= tol:
            return NewtonResult(z, norm, it - 1, True)
        try:
            step = np.linalg.solve(J, -r)
        except np.linalg.LinAlgError:
            return NewtonResult(z, norm, it, False)
        t = 1.0
        for _ in range(max_halvings + 1):
            trial = z + t * step
            if admissible(trial, sys):
                rt, Jt = residual(trial, sys, branch)
                nt = np.max(np.abs(rt))
                if nt < norm or nt <= tol:
                    break
            t *= 0.5
        else:
            return NewtonResult(z, norm, it, False)
        z, r, J, norm = trial, rt, Jt, nt
    return NewtonResult(z, norm, max_iter, norm <= tol)


# --- closed forms for a single populated class ------------------------------


def _single_class(sys: ClassSystem, branch: Branch):
    c = sys.degrees[0]
    if branch is Branch.DETECTABLE:
        a = sys.signed[0][0] / sys.mixing[0][0] * (c - 1)
        if not a > 1.0:
            raise NoDetectableRoot(f"single-class precision {a:.6g} <= 1")
    else:
        if not c > 2.0:
            raise NoBulkRoot(f"degree {c} too small for a bulk edge")
        a = math.sqrt(c - 1)
    return a, 1.0 / a


def _single_residual(a, h, c, branch, sys):
    r1 = 1.0 / (a - h) - a / (a * a - 1)
    if branch is Branch.DETECTABLE:
        s = sys.signed[0][0] / sys.mixing[0][0]
        r2 = 1.0 - (c - 1) * (a - h) * s / (a * a - 1)
    else:
        r2 = (c - 1) * (a - h) ** 2 / c * (a * a + 1) / (a * a - 1) ** 2 - 1.0
    return max(abs(r1), abs(r2))


# --- public solution containers ---------------------------------------------


@dataclass(frozen=True)
class SaddleSolution:
    """Solved precision parameters of one branch.

    For an empty overlap block (alpha == 0) the block-2 fields are NaN.
    """

    a1: float
    a2: float
    a1_hat: float
    a2_hat: float
    phi: float
    branch: Branch
    residual: float
    d_value: float = math.nan
    iterations: int = 0
    perron: float = math.nan

    @property
    def lam(self) -> float:
        return self.phi

    @property
    def z(self) -> np.ndarray:
        return np.array([self.a1, self.a2, self.a1_hat, self.a2_hat])

    def phi_by_class(self, degrees) -> tuple:
        c1, c2 = degrees
        return (self.a1 + (c1 - 1) * self.a1_hat, self.a2 + (c2 - 1) * self.a2_hat)


BimodalSaddle = SaddleSolution


@dataclass(frozen=True)
class DetectabilityReport:
    d_value: float
    detectable: bool
    lambda_isolated: float | None
    lambda_bulk_edge: float
    detectable_solution: SaddleSolution | None = None
    bulk_solution: SaddleSolution | None = None

    @property
    def gap(self) -> float:
        if self.lambda_isolated is None:
            return math.nan
        return self.lambda_isolated - self.lambda_bulk_edge


# --- branch solvers -----------------------------------------------------------


def _finish(sys, z, branch, res, iterations) -> SaddleSolution:
    c1, c2 = sys.degrees
    a1, a2, h1, h2 = (float(v) for v in z)
    phi = a1 + (c1 - 1) * h1
    d = perron = math.nan
    if not sys.single:
        d = float(_und_closure(tuple(float(v) for v in z), sys)[0])
        perron = perron_value(z, sys)
    return SaddleSolution(a1, a2, h1, h2, phi, branch, float(res), d, iterations, perron)


def _solve_single(sys, branch) -> SaddleSolution:
    a, h = _single_class(sys, branch)
    c = sys.degrees[0]
    res = _single_residual(a, h, c, branch, sys)
    # one-class analogue of the sign convention: positive on the detectable side
    d = a * a - (c - 1)
    return SaddleSolution(a, math.nan, h, math.nan, a + (c - 1) * h, branch, res, d, 0, -d)


def _attach_second_class(sys: ClassSystem, a1, h1):
    """Block-2 variables of a vanishing second class coupled only to class 1."""
    c1, c2 = sys.degrees
    phi = a1 + (c1 - 1) * h1
    h2 = 1.0 / a1
    a2 = phi - (c2 - 1) * h2
    return np.array([a1, a2, h1, h2])


def solve_detectable_system(family, target, tol=DEFAULT_TOL, n_steps=20, max_refine=12) -> SaddleSolution:
    """Continue the detectable root from an empty second class to ``target``.

    ``family(tau)`` returns the ClassSystem at homotopy parameter tau in
    [0, 1]; tau = 0 must have an empty second class, tau = 1 is the target.
    """
    sys_t = family(1.0)
    if sys_t.single:
        return _solve_single(sys_t, Branch.DETECTABLE)
    start = family(0.0)
    a1, h1 = _single_class(start, Branch.DETECTABLE)
    z = _attach_second_class(start, a1, h1)
    tau, step = 0.0, 1.0 / n_steps
    total_iter = 0
    refinements = 0
    while tau < 1.0:
        nxt = min(1.0, tau + step)
        res = damped_newton(z, family(nxt), Branch.DETECTABLE, tol=tol)
        total_iter += res.iterations
        if res.converged and np.max(np.abs(res.z - z)) < 0.5 * max(1.0, np.max(np.abs(z))):
            z, tau = res.z, nxt
            step = min(step * 1.5, 1.0 / n_steps)
        else:
            refinements += 1
            step *= 0.25
            if refinements > max_refine or step < 1e-6:
                raise NoDetectableRoot(f"continuation stalled at tau={tau:.4g}")
    return _finish(sys_t, z, Branch.DETECTABLE, res.residual, total_iter)


def _ladder(sys: ClassSystem, n=7):
    c = max(sys.degrees)
    grid = np.geomspace(1.05, max(2.0, 1.5 * math.sqrt(c) + 1.0), n)
    for a1 in grid[::-1]:
        for a2 in grid[::-1]:
            if a1 * a2 <= 1.0:
                continue
            (p11, p12), (p21, p22) = sys.mixing
            h1 = a1 - 1.0 / (p11 * a1 / (a1 * a1 - 1) + p12 * a2 / (a1 * a2 - 1))
            h2 = a2 - 1.0 / (p21 * a1 / (a1 * a2 - 1) + p22 * a2 / (a2 * a2 - 1))
            yield np.array([a1, a2, h1, h2])


def perron_value(z, sys: ClassSystem) -> float:
    """Largest eigenvalue of the row-scaled second-moment matrix.

    The off-diagonal entries are positive, so this eigenvalue carries the
    positive eigenvector.  A bulk-edge root makes it zero; the isolated root
    is detectable while it is still negative.
    """
    (n11, n12), (n21, n22) = _second_moment(tuple(float(v) for v in z), sys)[0]
    half = 0.5 * (n11 + n22)
    disc = 0.25 * (n11 - n22) ** 2 + n12 * n21
    return half + math.sqrt(max(disc, 0.0))


def solve_undetectable_system(sys: ClassSystem, tol=DEFAULT_TOL, hint=None) -> SaddleSolution:
    """Bulk-edge root: the admissible root whose zero mode is the Perron mode.

    Roots where the *smaller* second-moment eigenvalue vanishes have a
    sign-changing null vector (negative second moments) and are discarded.
    """
    if sys.single:
        return _solve_single(sys, Branch.UNDETECTABLE)
    seeds = [] if hint is None else [np.asarray(hint, float)]
    best = None
    for z0 in [*seeds, *_ladder(sys)]:
        res = damped_newton(z0, sys, Branch.UNDETECTABLE, tol=tol)
        if not res.converged or np.trace(second_moment_matrix(res.z, sys)) >= 0:
            continue
        best = res
        break
    if best is None:
        raise NoBulkRoot("no admissible undetectable root from any initial point")
    return _finish(sys, best.z, Branch.UNDETECTABLE, best.residual, best.iterations)


# --- overlapping SBM ----------------------------------------------------------


def _overlap_family(params: OverlapParams):
    def family(tau):
        a = tau * params.alpha
        c2 = params.c1 * (params.sigma * a + 2) / (1 + a + params.epsilon)
        p = replace(params, alpha=a, c2=c2)
        return overlap_system(p)

    return family


def _require_degrees(c1, c2):
    if not (c1 > 1 and c2 > 1):
        raise SolverError(f"saddle equations need c1 > 1 and c2 > 1 (got {c1}, {c2})")


def solve_detectable(params: OverlapParams, tol=DEFAULT_TOL) -> SaddleSolution:
    """Isolated-eigenvalue branch of the overlap model.

    The root is continued in alpha from the empty-overlap solution
    ``a1 = (1-eps)/(1+eps) (c1-1)`` at fixed (c1, epsilon, sigma).
    """
    _require_degrees(params.c1, params.c2)
    return solve_detectable_system(_overlap_family(params), 1.0, tol=tol)


def solve_undetectable(params: OverlapParams, tol=DEFAULT_TOL, hint=None) -> SaddleSolution:
    """Bulk-edge branch of the overlap model (second-moment determinant closure)."""
    _require_degrees(params.c1, params.c2)
    return solve_undetectable_system(overlap_system(params), tol=tol, hint=hint)


def detectability_D(a1, a2, a1_hat, a2_hat, params: OverlapParams) -> float:
    """Determinant ``M11 M22 - M12 M21`` of the overlap-model second-moment matrix."""
    a, e, s = params.alpha, params.epsilon, params.sigma
    c1, c2 = params.c1, params.c2
    p12 = a1 * a2 - 1
    for name, v in (("a1^2-1", a1 * a1 - 1), ("a2^2-1", a2 * a2 - 1), ("a1*a2-1", p12), ("a1-a1_hat", a1 - a1_hat), ("a2-a2_hat", a2 - a2_hat)):
        if v == 0:
            raise SingularDenominator(f"{name} vanishes")
    m11 = (1 + e) * (a1**2 + 1) / (a1**2 - 1) ** 2 + a * a2**2 / p12**2 - (1 + a + e) / (a1 - a1_hat) ** 2 * c1 / (c1 - 1)
    m12 = a / p12**2
    m21 = 2 / p12**2
    m22 = 2 * a1**2 / p12**2 + s * a * (a2**2 + 1) / (a2**2 - 1) ** 2 - (s * a + 2) / (a2 - a2_hat) ** 2 * c2 / (c2 - 1)
    return m11 * m22 - m12 * m21


def _classify(det_solver, und_solver) -> DetectabilityReport:
    und = und_solver()
    try:
        det = det_solver()
    except SolverError:
        return DetectabilityReport(math.nan, False, None, und.phi, None, und)
    # every second-moment eigenvalue negative: D > 0 and Perron value < 0
    detectable = det.d_value > 0 and det.perron < 0
    return DetectabilityReport(det.d_value, bool(detectable), det.phi, und.phi, det, und)


def classify(params: OverlapParams, tol=DEFAULT_TOL) -> DetectabilityReport:
    """Detectable iff the continued isolated-eigenvalue root has D > 0."""
    rep = _classify(lambda: solve_detectable(params, tol), lambda: solve_undetectable(params, tol))
    det = rep.detectable_solution
    if det is not None and det.a2 == det.a2:
        rep = replace(rep, d_value=detectability_D(det.a1, det.a2, det.a1_hat, det.a2_hat, params))
    return rep


# --- bimodal SBM --------------------------------------------------------------


def _bimodal_family(params: BimodalParams):
    def family(tau):
        b2 = tau * params.b2
        return bimodal_system(replace(params, b1=1.0 - b2, b2=b2))

    return family


def solve_bimodal_detectable(params: BimodalParams, tol=DEFAULT_TOL) -> SaddleSolution:
    """Isolated-eigenvalue branch of the bimodal SBM (one precision per degree class)."""
    if not params.epsilon < 1:
        raise NoRootInBracket("no community structure at epsilon = 1")
    _require_degrees(params.c1, params.c2)
    try:
        return solve_detectable_system(_bimodal_family(params), 1.0, tol=tol)
    except NoDetectableRoot as exc:
        raise NoRootInBracket(str(exc)) from exc


def solve_bimodal_undetectable(params: BimodalParams, tol=DEFAULT_TOL) -> SaddleSolution:
    _require_degrees(params.c1, params.c2)
    try:
        return solve_undetectable_system(bimodal_system(params), tol=tol)
    except NoBulkRoot as exc:
        raise NoRootInBracket(str(exc)) from exc


def classify_bimodal(params: BimodalParams, tol=DEFAULT_TOL) -> DetectabilityReport:
    return _classify(lambda: solve_bimodal_detectable(params, tol), lambda: solve_bimodal_undetectable(params, tol))


# --- sweeps ---------------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryPoint:
    fixed: float
    boundary: float | None
    note: str = ""


def _is_detectable(c1, alpha, epsilon, sigma, tol):
    try:
        params = build_overlap_params(c1, alpha, epsilon, sigma, n_nodes=10**9)
    except ValueError:
        return None
    return classify(params, tol).detectable


def bisect_boundary(pred, lo, hi, xtol=1e-4):
    """Bisect a boolean predicate with pred(lo) != pred(hi); returns the midpoint estimate."""
    f_lo = pred(lo)
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if pred(mid) == f_lo:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def phase_boundary(c1, sigma, grid, sweep="alpha", alpha_max=1.0, tol=DEFAULT_TOL, xtol=1e-4, n_scan=21):
    """Detectability boundary along grid lines of the (epsilon, alpha) plane.

    ``sweep="alpha"``: for each epsilon in ``grid`` find the boundary alpha in
    [0, alpha_max].  ``sweep="epsilon"``: for each alpha in ``grid`` find the
    boundary epsilon in [0, 1].  A coarse scan brackets the first sign change,
    then bisection narrows it to ``xtol``.
    """
    out = []
    for fixed in grid:
        if sweep == "alpha":
            pred = lambda x, f=fixed: _is_detectable(c1, x, f, sigma, tol)
            lo, hi = 0.0, alpha_max
        else:
            pred = lambda x, f=fixed: _is_detectable(c1, f, x, sigma, tol)
            lo, hi = 0.0, 1.0
        xs = np.linspace(lo, hi, n_scan)
        vals = [pred(x) for x in xs]
        found = None
        for i in range(n_scan - 1):
            if vals[i] is None or vals[i + 1] is None:
                continue
            if vals[i] != vals[i + 1]:
                found = bisect_boundary(pred, xs[i], xs[i + 1], xtol)
                break
        if found is None:
            state = "detectable" if all(v for v in vals if v is not None) else "undetectable"
            out.append(BoundaryPoint(float(fixed), None, f"no sign change; {state} on whole line"))
        else:
            out.append(BoundaryPoint(float(fixed), float(found)))
    return out


@dataclass(frozen=True)
class SigmaSweepRow:
    sigma: float
    swept: float
    c2: float
    lambda_det: float | None
    lambda_bulk: float | None
    detectable: bool | None


def sigma_sweep(c1, sigma_list, grid, fixed=0.3, swept="alpha", tol=DEFAULT_TOL):
    """Isolated eigenvalue and bulk edge per sigma along an alpha (or epsilon) grid.

    Failed branches are recorded as None.
    """
    rows = []
    for s in sigma_list:
        for x in grid:
            alpha, eps = (x, fixed) if swept == "alpha" else (fixed, x)
            try:
                p = build_overlap_params(c1, alpha, eps, s, n_nodes=10**9)
            except ValueError:
                rows.append(SigmaSweepRow(s, x, math.nan, None, None, None))
                continue
            try:
                und = solve_undetectable(p, tol).phi
            except SolverError:
                und = None
            try:
                det_sol = solve_detectable(p, tol)
                det, ok = det_sol.phi, det_sol.d_value > 0 and det_sol.perron < 0
            except SolverError:
                det, ok = None, False
            detectable = None if und is None else bool(det is not None and ok)
            rows.append(SigmaSweepRow(float(s), float(x), p.c2, det, und, detectable))
    return rows
