"""Community-detection baselines and partition similarity."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import connected_components

from . import _kernels
from .analysis import modularity
from .errors import UndefinedInputError, ValidationError
from .graph import Graph, Partition

__all__ = ["DetectionResult", "label_propagation", "maximize_modularity", "nmi"]

MAX_LP_SWEEPS = 100
MAX_LEVELS = 100


@dataclass(frozen=True, eq=False)
class DetectionResult:
    partition: Partition
    method: str
    gamma: float | None
    iterations: int
    Q: float


def _dense_labels(labels):
    _, inv = np.unique(labels, return_inverse=True)
    return inv.astype(np.int64)


def label_propagation(g: Graph, rng: np.random.Generator, max_sweeps: int = MAX_LP_SWEEPS) -> DetectionResult:
    """Asynchronous label propagation.

    Nodes, in a fresh random order each sweep, adopt the label most frequent
    among their neighbours, breaking ties uniformly at random. Stops once
    every node holds one of its neighbourhood's modal labels, or after
    ``max_sweeps`` sweeps. ``Q`` is reported at ``gamma = 1``.
    """
    n = g.node_count
    if n == 0:
        raise UndefinedInputError("label propagation needs a non-empty graph")
    indptr, indices = g.csr
    labels = np.arange(n, dtype=np.int64)
    sweeps = 0
    while sweeps < max_sweeps:
        order = rng.permutation(n).astype(np.int64)
        u = rng.random(n)
        _kernels.lp_sweep(indptr, indices, labels, order, u)
        sweeps += 1
        if _kernels.lp_stable(indptr, indices, labels):
            break
    p = Partition(_dense_labels(labels), g.degrees)
    q = modularity(g, p, 1.0) if g.m else float("nan")
    return DetectionResult(p, "label_propagation", None, sweeps, q)


def _split_disconnected(adj: sparse.csr_matrix, comm: np.ndarray) -> np.ndarray:
    """Relabel so every community is a connected component of its induced subgraph."""
    coo = adj.tocoo()
    keep = comm[coo.row] == comm[coo.col]
    inner = sparse.csr_matrix((coo.data[keep], (coo.row[keep], coo.col[keep])), shape=adj.shape)
    _, comp = connected_components(inner, directed=False)
    # components never straddle communities, so comp alone is a valid labelling
    return _dense_labels(comp)


def _aggregate(adj: sparse.csr_matrix, comm: np.ndarray, k: int) -> sparse.csr_matrix:
    member = sparse.csr_matrix(
        (np.ones(comm.size), (comm, np.arange(comm.size))), shape=(k, comm.size)
    )
    return (member @ adj @ member.T).tocsr()


def maximize_modularity(
    g: Graph, gamma: float, rng: np.random.Generator, max_levels: int = MAX_LEVELS
) -> DetectionResult:
    """Louvain-style maximization of generalized modularity at resolution ``gamma``.

    Each level runs local moves to a fixed point, splits any community that
    is not internally connected, then aggregates communities into weighted
    super-nodes. The loop ends when a level merges nothing.
    """
    if g.m == 0:
        raise UndefinedInputError("modularity maximization needs at least one edge")
    if gamma <= 0:
        raise ValidationError("gamma must be positive")
    n = g.node_count
    rows = np.concatenate([g.edges[:, 0], g.edges[:, 1]])
    cols = np.concatenate([g.edges[:, 1], g.edges[:, 0]])
    adj = sparse.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
    m2 = 2.0 * g.m
    node_comm = np.arange(n, dtype=np.int64)
    levels = 0
    for levels in range(1, max_levels + 1):
        size = adj.shape[0]
        adj.sort_indices()
        indptr = adj.indptr.astype(np.int64)
        indices = adj.indices.astype(np.int64)
        weights = adj.data.astype(np.float64)
        strength = np.asarray(adj.sum(axis=1)).ravel()
        comm = np.arange(size, dtype=np.int64)
        order = rng.permutation(size).astype(np.int64)
        _kernels.local_moves(indptr, indices, weights, strength, comm, order, float(gamma), m2)
        comm = _split_disconnected(adj, _dense_labels(comm))
        k = int(comm.max()) + 1
        node_comm = comm[node_comm]
        if k == size:
            break
        adj = _aggregate(adj, comm, k)
    # final connectivity pass on the original graph
    base = sparse.csr_matrix((np.ones(rows.size), (rows, cols)), shape=(n, n))
    node_comm = _split_disconnected(base, node_comm)
    p = Partition(node_comm, g.degrees)
    q = modularity(g, p, gamma)
    # the components partition (one community on a connected graph) is a
    # valid answer too; keep it when the heuristic did worse
    comps = Partition(_dense_labels(connected_components(base, directed=False)[1]), g.degrees)
    q_comps = modularity(g, comps, gamma)
    if q_comps > q:
        p, q = comps, q_comps
    return DetectionResult(p, "modularity", float(gamma), levels, q)


def _entropy(counts, n):
    pk = counts[counts > 0] / n
    return float(-(pk * np.log(pk)).sum())


def nmi(p1: Partition, p2: Partition) -> float:
    """Normalized mutual information ``I / ((H1 + H2) / 2)``.

    Two zero-entropy partitions give 1.0; one zero-entropy partition against
    a non-trivial one gives 0.0.
    """
    if p1.node_count != p2.node_count:
        raise ValidationError(
            f"partitions cover different node sets ({p1.node_count} vs {p2.node_count})"
        )
    n = p1.node_count
    a, b = p1.assignment, p2.assignment
    h1 = _entropy(np.bincount(a), n)
    h2 = _entropy(np.bincount(b), n)
    if h1 == 0.0 and h2 == 0.0:
        return 1.0
    if h1 == 0.0 or h2 == 0.0:
        return 0.0
    joint = sparse.coo_matrix((np.ones(n), (a, b))).tocsr()
    joint.sum_duplicates()
    nij = joint.data
    rows = np.repeat(np.arange(joint.shape[0]), np.diff(joint.indptr))
    ni = np.bincount(a)[rows]
    nj = np.bincount(b)[joint.indices]
    mi = float(np.sum(nij / n * np.log(nij * n / (ni * nj))))
    return float(min(1.0, max(0.0, 2.0 * mi / (h1 + h2))))
