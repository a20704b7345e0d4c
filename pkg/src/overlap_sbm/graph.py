"""Undirected simple graphs in compressed adjacency form, plus edge-list I/O."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp


class GraphError(ValueError):
    """Raised for self-loops, parallel edges or malformed edge data."""


@dataclass(frozen=True, eq=False)
class SparseGraph:
    """CSR neighbour lists, sorted within each row.

    Build with :meth:`from_edges`; the constructor trusts its inputs.
    """

    indptr: np.ndarray
    indices: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.indptr) - 1

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    @property
    def m(self) -> int:
        return len(self.indices) // 2

    def neighbors(self, i: int) -> np.ndarray:
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    @classmethod
    def from_edges(cls, n_nodes: int, u, v) -> "SparseGraph":
        """Graph from an undirected edge list; rejects loops and duplicates."""
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        if u.shape != v.shape:
            raise GraphError("edge endpoint arrays differ in length")
        if len(u) and (min(u.min(), v.min()) < 0 or max(u.max(), v.max()) >= n_nodes):
            raise GraphError("edge endpoint out of range")
        if (u == v).any():
            raise GraphError("self-loop in edge list")
        lo, hi = np.minimum(u, v), np.maximum(u, v)
        keys = lo * n_nodes + hi
        if len(np.unique(keys)) != len(keys):
            raise GraphError("parallel edge in edge list")
        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.lexsort((dst, src))
        src, dst = src[order], dst[order]
        indptr = np.zeros(n_nodes + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n_nodes), out=indptr[1:])
        return cls(indptr, dst.astype(np.int32))

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Each edge once as ``(u, v)`` with ``u < v``, lexicographically sorted."""
        src = np.repeat(np.arange(self.n_nodes), self.degrees)
        keep = src < self.indices
        return src[keep], self.indices[keep].astype(np.int64)

    def adjacency(self) -> sp.csr_matrix:
        data = np.ones(len(self.indices), dtype=np.float64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(self.n_nodes, self.n_nodes))

    def validate(self) -> None:
        """Check symmetry, sortedness and the absence of loops and duplicates."""
        a = self.adjacency()
        if (a != a.T).nnz:
            raise GraphError("adjacency is not symmetric")
        if a.diagonal().any():
            raise GraphError("self-loop present")
        for i in range(self.n_nodes):
            row = self.neighbors(i)
            if len(row) > 1 and (np.diff(row) <= 0).any():
                raise GraphError(f"row {i} not strictly increasing")


def write_edgelist(graph: SparseGraph, path, meta: dict | None = None) -> Path:
    """Write ``u v`` lines (0-indexed) and a JSON sidecar ``<path>.json``.

    The sidecar always carries ``n``, ``m`` and ``degrees``; ``meta`` may add
    ``labels``, ``model``, ``params`` and ``seed``.
    """
    path = Path(path)
    u, v = graph.edges()
    with path.open("w", encoding="utf-8") as fh:
        for a, b in zip(u.tolist(), v.tolist()):
            fh.write(f"{a} {b}\n")
    side = {"n": graph.n_nodes, "m": graph.m, "degrees": graph.degrees.tolist()}
    for key, val in (meta or {}).items():
        side[key] = val.tolist() if isinstance(val, np.ndarray) else val
    sidecar = path.with_name(path.name + ".json")
    sidecar.write_text(json.dumps(side, indent=1), encoding="utf-8")
    return sidecar


def read_edgelist(path) -> tuple[SparseGraph, dict]:
    """Inverse of :func:`write_edgelist`."""
    path = Path(path)
    side = json.loads(path.with_name(path.name + ".json").read_text(encoding="utf-8"))
    data = np.loadtxt(path, dtype=np.int64, ndmin=2)
    if data.size == 0:
        data = np.zeros((0, 2), dtype=np.int64)
    graph = SparseGraph.from_edges(int(side["n"]), data[:, 0], data[:, 1])
    if graph.m != side["m"]:
        raise GraphError(f"edge count {graph.m} disagrees with sidecar m={side['m']}")
    return graph, side
