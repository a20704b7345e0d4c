"""Parameter bundles for the overlapping, microcanonical and bimodal block models."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class InfeasibleParameters(ValueError):
    """Raised when a parameter combination cannot define a valid model."""


@dataclass(frozen=True)
class OverlapParams:
    """Three-block overlapping SBM: two community blocks around one overlap block.

    ``c2`` is not free: it follows from the degree-balance constraint
    ``c1 * (sigma * alpha + 2) == c2 * (1 + alpha + epsilon)``.
    """

    n_nodes: int
    c1: float
    c2: float
    alpha: float
    epsilon: float
    sigma: float

    @property
    def p1(self) -> float:
        return 1.0 / (2.0 + self.alpha)

    @property
    def p2(self) -> float:
        return self.alpha * self.p1

    @property
    def block_fractions(self) -> np.ndarray:
        return np.array([self.p1, self.p2, self.p1])

    def constraint_residual(self) -> float:
        """Relative violation of the degree-balance constraint."""
        lhs = self.c1 * (self.sigma * self.alpha + 2.0)
        rhs = self.c2 * (1.0 + self.alpha + self.epsilon)
        return abs(lhs - rhs) / max(abs(lhs), abs(rhs))

    def mean_degree(self) -> float:
        return 2 * self.p1 * self.c1 + self.p2 * self.c2

    def as_dict(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "c1": self.c1,
            "c2": self.c2,
            "alpha": self.alpha,
            "epsilon": self.epsilon,
            "sigma": self.sigma,
        }


def _check_common(c1, alpha, sigma, n_nodes):
    if not c1 > 0:
        raise InfeasibleParameters(f"c1 must be positive, got {c1}")
    if alpha < 0:
        raise InfeasibleParameters(f"alpha must be non-negative, got {alpha}")
    if sigma < 0:
        raise InfeasibleParameters(f"sigma must be non-negative, got {sigma}")
    if n_nodes < 3:
        raise InfeasibleParameters(f"need at least 3 nodes, got {n_nodes}")


def _check_epsilon(epsilon):
    if not 0.0 <= epsilon <= 1.0:
        raise InfeasibleParameters(f"epsilon must lie in [0, 1], got {epsilon}")


def build_overlap_params(c1, alpha, epsilon, sigma, n_nodes=10_000) -> OverlapParams:
    """Overlap parameters with ``c2`` derived from the degree-balance constraint.

    Raises InfeasibleParameters for epsilon outside [0, 1] or when some
    affinity entry would exceed 1 at ``n_nodes``.
    """
    _check_common(c1, alpha, sigma, n_nodes)
    _check_epsilon(epsilon)
    c2 = c1 * (sigma * alpha + 2.0) / (1.0 + alpha + epsilon)
    params = OverlapParams(int(n_nodes), float(c1), float(c2), float(alpha), float(epsilon), float(sigma))
    overlap_affinity(params)  # feasibility check
    return params


def epsilon_from_degrees(c1, c2, alpha, sigma) -> float:
    """Solve the degree-balance constraint for epsilon (may fall outside [0, 1])."""
    return c1 * (sigma * alpha + 2.0) / c2 - 1.0 - alpha


def overlap_params_from_degrees(c1, c2, alpha, sigma, n_nodes=10_000) -> OverlapParams:
    """Overlap parameters on a fixed-``c2`` line, epsilon implied by the constraint."""
    eps = epsilon_from_degrees(c1, c2, alpha, sigma)
    # clip rounding noise at the ends of the assortative range
    if -1e-12 < eps < 0.0:
        eps = 0.0
    elif 1.0 < eps < 1.0 + 1e-12:
        eps = 1.0
    return build_overlap_params(c1, alpha, eps, sigma, n_nodes)


@dataclass(frozen=True)
class AffinityMatrix:
    rho: np.ndarray
    block_fractions: np.ndarray

    def __post_init__(self):
        rho = np.asarray(self.rho, dtype=float)
        if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
            raise ValueError("affinity matrix must be square")
        if not np.allclose(rho, rho.T):
            raise ValueError("affinity matrix must be symmetric")
        if rho.min() < 0:
            raise InfeasibleParameters("negative edge probability")
        if rho.max() > 1:
            raise InfeasibleParameters(f"edge probability {rho.max():g} exceeds 1")
        p = np.asarray(self.block_fractions, dtype=float)
        if p.shape != (rho.shape[0],) or abs(p.sum() - 1.0) > 1e-9:
            raise ValueError("block fractions must match the matrix and sum to 1")
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "block_fractions", p)

    @property
    def n_blocks(self) -> int:
        return self.rho.shape[0]


def overlap_affinity(params: OverlapParams) -> AffinityMatrix:
    """3x3 affinity ``rho_in * [[1, 1, eps], [1, sigma, 1], [eps, 1, 1]]``.

    ``rho_in`` is calibrated so a block-1 node has expected degree ``c1``.
    """
    p1, a, e = params.p1, params.alpha, params.epsilon
    rho_in = params.c1 / (params.n_nodes * p1 * (1.0 + a + e))
    shape = np.array([[1.0, 1.0, e], [1.0, params.sigma, 1.0], [e, 1.0, 1.0]])
    return AffinityMatrix(rho_in * shape, params.block_fractions)


def two_block_affinity(c, epsilon, n_nodes) -> AffinityMatrix:
    """Equal-size two-block SBM with mean degree ``c`` and ``rho_out = epsilon * rho_in``."""
    _check_epsilon(epsilon)
    rho_in = 2.0 * c / (n_nodes * (1.0 + epsilon))
    return AffinityMatrix(rho_in * np.array([[1.0, epsilon], [epsilon, 1.0]]), np.array([0.5, 0.5]))


def block_sizes(n_nodes: int, fractions) -> np.ndarray:
    """Largest-remainder rounding of ``n_nodes * fractions``.

    For the symmetric three-block layout (p1 == p3) the rounding residue is
    given to the middle block so that blocks 1 and 3 stay equal.
    """
    p = np.asarray(fractions, dtype=float)
    raw = n_nodes * p
    if len(p) == 3 and math.isclose(p[0], p[2]):
        outer = int(math.floor(raw[0] + 1e-9))
        return np.array([outer, n_nodes - 2 * outer, outer])
    sizes = np.floor(raw + 1e-9).astype(int)
    short = n_nodes - sizes.sum()
    order = np.argsort(-(raw - sizes), kind="stable")
    sizes[order[:short]] += 1
    return sizes


def planted_labels(sizes) -> np.ndarray:
    """Contiguous 1-based block labels for the given block sizes."""
    return np.repeat(np.arange(1, len(sizes) + 1), sizes)


def mmsbm_equivalent_sigma(epsilon: float) -> float:
    """Overlap density at which the propensity-vector MMSBM equals the overlapping SBM.

    Ranges over [1, 2] for epsilon in [0, 1].
    """
    _check_epsilon(epsilon)
    return 2.0 / (1.0 + epsilon)


@dataclass(frozen=True)
class MicrocanonicalSpec:
    """Exact degree sequence plus exact block-pair edge counts.

    ``edge_counts[k, l]`` is the number of edges between blocks k and l; the
    diagonal holds the number of internal edges (not half-edges).
    """

    block_labels: np.ndarray
    degrees: np.ndarray
    edge_counts: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.block_labels, dtype=np.int64)
        d = np.asarray(self.degrees, dtype=np.int64)
        e = np.asarray(self.edge_counts, dtype=np.int64)
        if t.shape != d.shape:
            raise ValueError("labels and degrees must have the same length")
        if t.min() < 1 or t.max() > e.shape[0]:
            raise ValueError("block labels must lie in 1..K")
        if e.shape[0] != e.shape[1] or (e != e.T).any() or (e < 0).any():
            raise ValueError("edge counts must be a symmetric non-negative matrix")
        if (d < 0).any():
            raise ValueError("degrees must be non-negative")
        stubs = np.bincount(t - 1, weights=d, minlength=e.shape[0]).astype(np.int64)
        need = e.sum(axis=1) + np.diag(e)
        if (stubs != need).any():
            raise InfeasibleParameters(f"block stub counts {stubs.tolist()} do not match edge counts {need.tolist()}")
        object.__setattr__(self, "block_labels", t)
        object.__setattr__(self, "degrees", d)
        object.__setattr__(self, "edge_counts", e)

    @property
    def n_nodes(self) -> int:
        return len(self.block_labels)

    @property
    def n_blocks(self) -> int:
        return self.edge_counts.shape[0]

    @property
    def n_edges(self) -> int:
        return int(np.triu(self.edge_counts).sum())

    @classmethod
    def from_degrees(cls, block_labels, degrees, cross_counts: dict):
        """Build a spec from per-node degrees and the off-diagonal edge counts.

        Internal edge counts are whatever half-edges remain in each block.
        """
        t = np.asarray(block_labels, dtype=np.int64)
        d = np.asarray(degrees, dtype=np.int64)
        k = int(t.max())
        e = np.zeros((k, k), dtype=np.int64)
        for (a, b), n in cross_counts.items():
            e[a - 1, b - 1] = e[b - 1, a - 1] = n
        stubs = np.bincount(t - 1, weights=d, minlength=k).astype(np.int64)
        rest = stubs - e.sum(axis=1)
        if (rest < 0).any() or (rest % 2).any():
            raise InfeasibleParameters(f"remaining half-edges per block {rest.tolist()} must be even and >= 0")
        e[np.diag_indices(k)] = rest // 2
        return cls(t, d, e)


def _nearest_with_parity(x: float, parity: int) -> int:
    lo = int(math.floor(x))
    cands = [n for n in (lo - 1, lo, lo + 1, lo + 2) if n >= 0 and n % 2 == parity % 2]
    return min(cands, key=lambda n: (abs(n - x), n))


def overlap_microcanonical_spec(c1: int, c2: int, alpha: float, sigma: float, n_nodes: int) -> MicrocanonicalSpec:
    """Microcanonical counterpart of the overlapping SBM.

    Blocks 1 and 3 have every degree equal to ``c1``; block 2 every degree
    ``c2``. Cross-block edge counts follow the proportions
    ``e13 : e12 = epsilon : alpha`` with epsilon from the constraint; rounding
    keeps every count integral and every block's half-edge total even.
    """
    if int(c1) != c1 or int(c2) != c2 or c1 <= 0 or c2 <= 0:
        raise InfeasibleParameters("microcanonical degrees must be positive integers")
    c1, c2 = int(c1), int(c2)
    eps = epsilon_from_degrees(c1, c2, alpha, sigma)
    if not -1e-12 <= eps <= 1 + 1e-12:
        raise InfeasibleParameters(f"implied epsilon {eps:.6g} outside [0, 1]")
    eps = min(max(eps, 0.0), 1.0)
    sizes = block_sizes(n_nodes, [1 / (2 + alpha), alpha / (2 + alpha), 1 / (2 + alpha)])
    n1, n2, _ = (int(s) for s in sizes)
    labels = planted_labels(sizes)
    degrees = np.where(labels == 2, c2, c1)
    s1, s2 = n1 * c1, n2 * c2
    if s2 % 2:
        raise InfeasibleParameters("overlap block half-edge count n2*c2 is odd")
    # realised alpha may differ slightly from the requested one after rounding
    alpha_r = n2 / n1
    unit = s1 / (1.0 + alpha_r + eps)
    # block 2 spends 2*e12 half-edges on the two community blocks
    e12 = min(int(round(alpha_r * unit)), s2 // 2, s1) if n2 else 0
    # block-1 leftover s1 - e12 - e13 must be even
    e13 = _nearest_with_parity(eps * unit, (s1 - e12) % 2)
    e13 = min(e13, s1 - e12 - ((s1 - e12) % 2))
    return MicrocanonicalSpec.from_degrees(labels, degrees, {(1, 2): e12, (2, 3): e12, (1, 3): e13})


@dataclass(frozen=True)
class BimodalParams:
    """Two equal blocks, each node of degree c1 or c2 independently of its block."""

    n_nodes: int
    c1: int
    c2: int
    b1: float
    b2: float
    epsilon: float

    def __post_init__(self):
        _check_epsilon(self.epsilon)
        if abs(self.b1 + self.b2 - 1.0) > 1e-12 or min(self.b1, self.b2) < 0:
            raise InfeasibleParameters("degree-class fractions must be non-negative and sum to 1")
        if self.c1 <= 0 or self.c2 <= 0:
            raise InfeasibleParameters("degrees must be positive")

    def mean_degree(self) -> float:
        return self.b1 * self.c1 + self.b2 * self.c2

    def mean_sq_degree(self) -> float:
        return self.b1 * self.c1**2 + self.b2 * self.c2**2

    @property
    def e11(self) -> float:
        """Expected number of edges inside one block."""
        return self.n_nodes * self.mean_degree() / (4.0 * (1.0 + self.epsilon))

    @classmethod
    def matching(cls, params: OverlapParams) -> "BimodalParams":
        """Bimodal control with the same degree classes as an overlap model."""
        b2 = params.alpha / (2.0 + params.alpha)
        return cls(params.n_nodes, params.c1, params.c2, 1.0 - b2, b2, params.epsilon)

    def as_dict(self) -> dict:
        return {
            "n_nodes": self.n_nodes,
            "c1": self.c1,
            "c2": self.c2,
            "b1": self.b1,
            "b2": self.b2,
            "epsilon": self.epsilon,
        }


# --- samplers -------------------------------------------------------------------


class RewireStall(RuntimeError):
    """Loops or parallel edges survived the cleanup swap budget."""

    def __init__(self, defects: int, proposals: int):
        super().__init__(f"{defects} loop/multi-edge defects left after {proposals} swap proposals")
        self.defects = defects
        self.proposals = proposals


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent Philox stream for ``(seed, key)``; the same pair always gives the same stream."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed), spawn_key=tuple(key))))


def _triu_pairs(r: np.ndarray, n: int):
    """Row-major index ``r`` of the strict upper triangle of an n x n matrix -> (i, j)."""
    r = np.asarray(r, dtype=np.int64)
    i = (n - 2 - np.floor(np.sqrt(-8.0 * r + 4.0 * n * (n - 1) - 7) / 2.0 - 0.5)).astype(np.int64)
    start = lambda k: k * (2 * n - k - 1) // 2
    # guard the float estimate against off-by-one at row boundaries
    i = np.where(r < start(i), i - 1, i)
    i = np.where(r >= start(i + 1), i + 1, i)
    return i, r - start(i) + i + 1


def sample_canonical(affinity: AffinityMatrix, labels, seed: int):
    """Independent edges with probability ``rho[t_i, t_j]``.

    Per block pair the edge count is drawn from its binomial law and the
    edges are a uniform subset of the candidate pairs, so the cost is
    O(m + K^2) rather than O(N^2).
    """
    from .graph import SparseGraph

    t = np.asarray(labels, dtype=np.int64)
    n = len(t)
    k_blocks = affinity.rho.shape[0]
    members = [np.flatnonzero(t == k + 1) for k in range(k_blocks)]
    us, vs = [], []
    for k in range(k_blocks):
        for l in range(k, k_blocks):
            rho = float(affinity.rho[k, l])
            nk, nl = len(members[k]), len(members[l])
            total = nk * (nk - 1) // 2 if k == l else nk * nl
            if rho <= 0 or total == 0:
                continue
            rng = substream(seed, k, l)
            count = rng.binomial(total, rho)
            idx = rng.choice(total, size=count, replace=False)
            if k == l:
                i, j = _triu_pairs(idx, nk)
            else:
                i, j = np.divmod(idx, nl)
            us.append(members[k][i])
            vs.append(members[l][j])
    u = np.concatenate(us) if us else np.zeros(0, np.int64)
    v = np.concatenate(vs) if vs else np.zeros(0, np.int64)
    return SparseGraph.from_edges(n, u, v)


def sample_overlap_canonical(params: OverlapParams, seed: int):
    """Canonical overlapping SBM; returns ``(graph, planted_labels)``."""
    labels = planted_labels(block_sizes(params.n_nodes, params.block_fractions))
    return sample_canonical(overlap_affinity(params), labels, seed), labels


def _stub_match(spec: MicrocanonicalSpec, seed: int):
    """Random stub matching per block pair; the result may hold loops and multi-edges."""
    t, d, e = spec.block_labels, spec.degrees, spec.edge_counts
    k_blocks = spec.n_blocks
    parts = []
    for k in range(k_blocks):
        nodes = np.flatnonzero(t == k + 1)
        stubs = np.repeat(nodes, d[nodes])
        substream(seed, 0, k).shuffle(stubs)
        sizes = [2 * e[k, k] if l == k else e[k, l] for l in range(k_blocks)]
        parts.append(np.split(stubs, np.cumsum(sizes)[:-1]))
    us, vs = [], []
    for k in range(k_blocks):
        for l in range(k, k_blocks):
            if k == l:
                s = parts[k][k]
                us.append(s[0::2])
                vs.append(s[1::2])
            else:
                us.append(parts[k][l])
                vs.append(parts[l][k])
    return np.concatenate(us).astype(np.int64), np.concatenate(vs).astype(np.int64)


def sample_microcanonical(spec: MicrocanonicalSpec, seed: int, cleanup_factor: float = 50.0, random_factor: float = 10.0):
    """Simple graph with the exact degree sequence and block-pair edge counts of ``spec``.

    Stub matching is followed by block-preserving double-edge swaps: first
    until no loop or parallel edge remains (at most ``cleanup_factor * m``
    proposals, else :class:`RewireStall`), then ``random_factor * m``
    proposals that keep the graph simple.
    """
    from . import _rewire
    from .graph import SparseGraph

    n = spec.n_nodes
    eu, ev = _stub_match(spec, seed)
    m = len(eu)
    if m == 0:
        return SparseGraph.from_edges(n, eu, ev)
    ptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(spec.degrees, out=ptr[1:])
    # rows in node order; a loop lists its node twice in its own row
    src = np.concatenate([eu, ev])
    adj = np.concatenate([ev, eu])[np.argsort(src, kind="stable")]
    block = spec.block_labels.astype(np.int64)
    rng = substream(seed, 1)
    chunk = 1 << 16

    def run(budget, strict, defects):
        done = 0
        while done < budget and (strict or defects > 0):
            size = int(min(chunk, budget - done))
            i1 = rng.integers(0, m, size)
            i2 = rng.integers(0, m, size)
            fl = rng.integers(0, 4, size)
            _, defects, used = _rewire.swap_pass(eu, ev, adj, ptr, block, i1, i2, fl, strict, defects)
            done += used
        return defects, done

    defects, used = run(int(cleanup_factor * m), False, int(_rewire.count_defects(adj, ptr)))
    if defects:
        raise RewireStall(defects, used)
    run(int(random_factor * m), True, 0)
    return SparseGraph.from_edges(n, eu, ev)


def sample_overlap_microcanonical(c1: int, c2: int, alpha: float, sigma: float, n_nodes: int, seed: int, **kw):
    """Microcanonical overlapping SBM; returns ``(graph, planted_labels)``."""
    spec = overlap_microcanonical_spec(c1, c2, alpha, sigma, n_nodes)
    return sample_microcanonical(spec, seed, **kw), spec.block_labels


def bimodal_spec(params: BimodalParams, seed: int) -> tuple[MicrocanonicalSpec, np.ndarray]:
    """Random degree assignment for the bimodal SBM and the matching edge counts.

    The number of degree-``c2`` nodes uses the same rounding as the overlap
    block of the degree-matched overlapping SBM, so both have identical
    degree sums. Their positions are uniform over all nodes, independent of
    the block labels.
    """
    if int(params.c1) != params.c1 or int(params.c2) != params.c2:
        raise InfeasibleParameters("bimodal degrees must be integers")
    n = params.n_nodes
    n_c2 = int(block_sizes(n, [params.b1 / 2, params.b2, params.b1 / 2])[1])
    labels = planted_labels([n // 2, n - n // 2])
    classes = np.ones(n, dtype=np.int64)
    classes[substream(seed, 2).choice(n, size=n_c2, replace=False)] = 2
    degrees = np.where(classes == 2, int(params.c2), int(params.c1))
    s = np.bincount(labels - 1, weights=degrees, minlength=2).astype(np.int64)
    if (s[0] + s[1]) % 2:
        raise InfeasibleParameters("total degree is odd")
    eps = params.epsilon
    # epsilon is measured against intra-block half-edges: s_k = (1 + eps) * half_k
    e12 = _nearest_with_parity(eps * s.mean() / (1.0 + eps), int(s[0] % 2))
    # both block totals share the parity of e12, so this clamp keeps it
    e12 = min(e12, int(s.min()))
    return MicrocanonicalSpec.from_degrees(labels, degrees, {(1, 2): e12}), classes


def sample_bimodal(params: BimodalParams, seed: int, **kw):
    """Bimodal SBM; returns ``(graph, planted_labels, degree_classes)``."""
    spec, classes = bimodal_spec(params, seed)
    return sample_microcanonical(spec, seed, **kw), spec.block_labels, classes
