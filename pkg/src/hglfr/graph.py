"""Core graph, partition and hierarchy containers.

All node and community ids are dense 0-based integers. Arrays held by these
objects are flagged read-only, so instances can be shared freely.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import SelfLoopError, ValidationError

__all__ = [
    "Graph",
    "Partition",
    "Hierarchy",
    "build_graph",
    "inter_community_edge_counts",
    "coarsen",
]


def _frozen(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph.

    ``edges`` is an ``(m, 2)`` int array of canonical ``(min, max)`` pairs in
    construction order. Use :func:`build_graph` rather than calling this
    directly; the constructor trusts its inputs.
    """

    node_count: int
    edges: np.ndarray
    degrees: np.ndarray = field(repr=False)

    @property
    def m(self) -> int:
        return int(self.edges.shape[0])

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Adjacency as ``(indptr, indices)``; neighbour lists are sorted."""
        n = self.node_count
        src = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        dst = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        order = np.lexsort((dst, src))
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        return _frozen(indptr), _frozen(dst[order].astype(np.int64))

    def neighbors(self, v: int) -> np.ndarray:
        indptr, indices = self.csr
        return indices[indptr[v] : indptr[v + 1]]

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(v)) for u, v in self.edges}

    def to_networkx(self):
        import networkx as nx

        g = nx.Graph()
        g.add_nodes_from(range(self.node_count))
        g.add_edges_from(map(tuple, self.edges.tolist()))
        return g


def build_graph(node_count: int, edge_list: Iterable[Sequence[int]]) -> Graph:
    """Build a :class:`Graph`, dropping duplicate edges.

    Raises
    ------
    SelfLoopError
        If any pair has identical endpoints.
    ValidationError
        If a node id falls outside ``[0, node_count)``.
    """
    if node_count < 1:
        raise ValidationError(f"node_count must be positive, got {node_count}")
    arr = np.asarray(list(edge_list) if not isinstance(edge_list, np.ndarray) else edge_list)
    if arr.size == 0:
        arr = np.zeros((0, 2), dtype=np.int64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValidationError("edge_list must contain node pairs")
    arr = arr.astype(np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= node_count):
        bad = arr[(arr < 0).any(axis=1) | (arr >= node_count).any(axis=1)][0]
        raise ValidationError(f"edge {tuple(bad.tolist())} has a node id outside [0, {node_count})")
    loops = arr[:, 0] == arr[:, 1]
    if loops.any():
        raise SelfLoopError(f"self-loop on node {int(arr[loops][0, 0])}")
    canon = np.sort(arr, axis=1)
    # np.unique sorts; keep first-occurrence order for reproducibility
    _, first = np.unique(canon[:, 0] * node_count + canon[:, 1], return_index=True)
    canon = canon[np.sort(first)]
    degrees = np.bincount(canon.ravel(), minlength=node_count).astype(np.int64)
    return Graph(node_count, _frozen(canon), _frozen(degrees))


@dataclass(frozen=True, eq=False)
class Partition:
    """Assignment of every node to exactly one community ``0..C-1``.

    ``community_degrees`` (total degree per community) is only available when
    the partition was built with node degrees, e.g. via :meth:`for_graph`.
    """

    assignment: np.ndarray
    node_degrees: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        a = np.asarray(self.assignment)
        if a.ndim != 1 or a.size == 0:
            raise ValidationError("assignment must be a non-empty 1-d array")
        if not np.issubdtype(a.dtype, np.integer):
            raise ValidationError("community ids must be integers")
        a = a.astype(np.int64)
        if a.min() < 0:
            raise ValidationError("community ids must be non-negative")
        present = np.bincount(a)
        if (present == 0).any():
            raise ValidationError("community ids must be dense (0..C-1 all present)")
        object.__setattr__(self, "assignment", _frozen(a))
        if self.node_degrees is not None:
            d = np.asarray(self.node_degrees, dtype=np.int64)
            if d.shape != a.shape:
                raise ValidationError("node_degrees length does not match assignment")
            object.__setattr__(self, "node_degrees", _frozen(d))

    @classmethod
    def from_labels(cls, labels: Sequence, node_degrees=None) -> tuple["Partition", list]:
        """Relabel arbitrary hashable labels to dense ids (sorted label order).

        Returns the partition and the list mapping dense id -> original label.
        """
        uniq, inverse = np.unique(np.asarray(labels), return_inverse=True)
        return cls(inverse.astype(np.int64), node_degrees), uniq.tolist()

    @classmethod
    def for_graph(cls, g: Graph, assignment) -> "Partition":
        a = np.asarray(assignment)
        if a.shape != (g.node_count,):
            raise ValidationError(
                f"partition covers {a.size} nodes but graph has {g.node_count}"
            )
        return cls(a, g.degrees)

    @classmethod
    def single(cls, n: int, node_degrees=None) -> "Partition":
        return cls(np.zeros(n, dtype=np.int64), node_degrees)

    @classmethod
    def singletons(cls, n: int, node_degrees=None) -> "Partition":
        return cls(np.arange(n, dtype=np.int64), node_degrees)

    @property
    def node_count(self) -> int:
        return int(self.assignment.size)

    @cached_property
    def n_communities(self) -> int:
        return int(self.assignment.max()) + 1

    @cached_property
    def community_sizes(self) -> np.ndarray:
        return _frozen(np.bincount(self.assignment, minlength=self.n_communities))

    @cached_property
    def community_degrees(self) -> np.ndarray:
        if self.node_degrees is None:
            raise ValidationError("partition was built without node degrees")
        return _frozen(
            np.bincount(self.assignment, weights=self.node_degrees, minlength=self.n_communities)
            .round()
            .astype(np.int64)
        )

    def members(self, c: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == c)

    def groups(self) -> list[np.ndarray]:
        order = np.argsort(self.assignment, kind="stable")
        bounds = np.cumsum(self.community_sizes)[:-1]
        return np.split(order, bounds)

    def same_as(self, other: "Partition") -> bool:
        return np.array_equal(self.assignment, other.assignment)


def _check_universe(g: Graph, p: Partition):
    if p.node_count != g.node_count:
        raise ValidationError(
            f"partition covers {p.node_count} nodes but graph has {g.node_count}"
        )


def inter_community_edge_counts(g: Graph, p: Partition) -> np.ndarray:
    """Symmetric ``C x C`` matrix of edge counts between communities.

    Entry ``(r, r)`` counts edges inside ``r``; entry ``(r, s)`` counts edges
    with one end in ``r`` and the other in ``s``.
    """
    _check_universe(g, p)
    c = p.n_communities
    a = p.assignment
    cu, cv = a[g.edges[:, 0]], a[g.edges[:, 1]]
    counts = np.zeros((c, c), dtype=np.int64)
    np.add.at(counts, (cu, cv), 1)
    off = counts.copy()
    np.fill_diagonal(off, 0)
    return np.diag(np.diag(counts)) + off + off.T


def coarsen(p_fine: Partition, grouping: Mapping[int, int] | Sequence[int] | np.ndarray) -> Partition:
    """Merge fine communities according to ``grouping`` (community -> group id).

    Group ids must be dense. The result keeps the node degrees of ``p_fine``.
    """
    c = p_fine.n_communities
    if isinstance(grouping, Mapping):
        missing = [r for r in range(c) if r not in grouping]
        if missing:
            raise ValidationError(f"grouping has no group id for community {missing[0]}")
        table = np.array([grouping[r] for r in range(c)], dtype=np.int64)
    else:
        table = np.asarray(grouping, dtype=np.int64)
        if table.shape != (c,):
            raise ValidationError(
                f"grouping defines {table.size} entries for {c} communities"
            )
    return Partition(table[p_fine.assignment], p_fine.node_degrees)


@dataclass(frozen=True, eq=False)
class Hierarchy:
    """Nested node-level partitions, finest (ground truth) first.

    ``parents[i][r]`` is the community at level ``i + 1`` containing
    community ``r`` of level ``i``.
    """

    levels: tuple[Partition, ...]
    parents: tuple[np.ndarray, ...]

    @classmethod
    def from_levels(cls, levels: Sequence[Partition]) -> "Hierarchy":
        """Derive the parent maps and validate the coarsening chain."""
        levels = tuple(levels)
        if not levels:
            raise ValidationError("hierarchy needs at least one level")
        parents = []
        for i, (fine, coarse) in enumerate(zip(levels, levels[1:])):
            if fine.node_count != coarse.node_count:
                raise ValidationError(f"levels {i} and {i + 1} cover different node sets")
            parent = np.full(fine.n_communities, -1, dtype=np.int64)
            parent[fine.assignment] = coarse.assignment
            if not np.array_equal(parent[fine.assignment], coarse.assignment):
                raise ValidationError(f"level {i} is not nested inside level {i + 1}")
            parents.append(_frozen(parent))
        h = cls(levels, tuple(parents))
        h.validate()
        return h

    @classmethod
    def from_parents(cls, base: Partition, parents: Sequence[Sequence[int]]) -> "Hierarchy":
        levels = [base]
        for parent in parents:
            levels.append(coarsen(levels[-1], parent))
        return cls.from_levels(levels)

    @property
    def depth(self) -> int:
        return len(self.levels)

    def validate(self):
        """Strict coarsening chain ending in a single community."""
        for i, (fine, coarse) in enumerate(zip(self.levels, self.levels[1:])):
            if coarse.n_communities >= fine.n_communities:
                raise ValidationError(
                    f"level {i + 1} has {coarse.n_communities} communities, "
                    f"not fewer than level {i} ({fine.n_communities})"
                )
            parent = self.parents[i]
            if not np.array_equal(parent[fine.assignment], coarse.assignment):
                raise ValidationError(f"level {i} is not nested inside level {i + 1}")
        if self.depth > 1 and self.levels[-1].n_communities != 1:
            raise ValidationError("top hierarchy level must contain a single community")
