"""Text formats for graphs, partitions and hierarchies.

Edge list
    One edge per line, two whitespace-separated integer node ids. Lines
    starting with ``#`` are comments; a ``# nodes: N`` comment declares the
    node count so isolated nodes survive a round trip.
Partition
    One line per node, ``node_id<TAB>community_id``.
Hierarchy
    JSON document ``{"schema": ..., "levels": [{"level": i, "parents":
    {community_id: parent_id, ...}}, ...]}``; entry ``i`` maps communities of
    level ``i`` to communities of level ``i + 1``.
"""

from __future__ import annotations

import json
import re
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .graph import Graph, Hierarchy, Partition, build_graph

HIERARCHY_SCHEMA = "hglfr-hierarchy/1"

_NODES_RE = re.compile(r"#\s*nodes:\s*(\d+)")


def write_edgelist(g: Graph, path, labels=None):
    path = Path(path)
    with path.open("w") as fh:
        fh.write(f"# nodes: {g.node_count}\n")
        for u, v in g.edges.tolist():
            if labels is not None:
                u, v = labels[u], labels[v]
            fh.write(f"{u} {v}\n")


def read_edgelist(path) -> tuple[Graph, list[int]]:
    """Read an edge list, remapping node ids to dense 0-based ids.

    Returns the graph and ``labels`` where ``labels[i]`` is the original id of
    dense node ``i``. Files written by :func:`write_edgelist` round-trip with
    identity labels.
    """
    declared = None
    pairs = []
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            if s.startswith("#"):
                m = _NODES_RE.match(s)
                if m:
                    declared = int(m.group(1))
                continue
            parts = s.split()
            if len(parts) < 2:
                raise ValidationError(f"{path}:{lineno}: expected two node ids")
            try:
                pairs.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: node ids must be integers") from None
    arr = np.array(pairs, dtype=np.int64).reshape(-1, 2)
    if declared is not None and (arr.size == 0 or (arr.min() >= 0 and arr.max() < declared)):
        return build_graph(declared, arr), list(range(declared))
    labels, inverse = np.unique(arr.ravel(), return_inverse=True)
    if labels.size == 0:
        raise ValidationError(f"{path}: no edges and no node count")
    return build_graph(labels.size, inverse.reshape(-1, 2)), labels.tolist()


def write_partition(p: Partition, path, labels=None):
    with Path(path).open("w") as fh:
        for v, c in enumerate(p.assignment.tolist()):
            fh.write(f"{labels[v] if labels is not None else v}\t{c}\n")


def read_partition(path, labels=None, node_degrees=None) -> Partition:
    """Read a partition file.

    ``labels`` (dense id -> original node id, as returned by
    :func:`read_edgelist`) maps file node ids back to dense ids. Community
    labels are remapped to dense ids in sorted order.
    """
    rows = {}
    with Path(path).open() as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            parts = s.split()
            if len(parts) != 2:
                raise ValidationError(f"{path}:{lineno}: expected 'node<TAB>community'")
            rows[int(parts[0])] = parts[1]
    index = {lab: i for i, lab in enumerate(labels)} if labels is not None else None
    n = len(labels) if labels is not None else len(rows)
    comm = [None] * n
    for node, c in rows.items():
        i = index.get(node) if index is not None else node
        if i is None or not 0 <= i < n:
            raise ValidationError(f"{path}: node {node} is not in the graph")
        comm[i] = c
    if any(c is None for c in comm):
        missing = comm.index(None)
        raise ValidationError(f"{path}: no community for node {labels[missing] if labels else missing}")
    try:
        keys = [int(c) for c in comm]
    except ValueError:
        keys = comm
    p, _ = Partition.from_labels(keys, node_degrees)
    return p


def hierarchy_document(h: Hierarchy) -> dict:
    return {
        "schema": HIERARCHY_SCHEMA,
        "levels": [
            {"level": i, "parents": {str(r): int(par) for r, par in enumerate(parent.tolist())}}
            for i, parent in enumerate(h.parents)
        ],
    }


def write_hierarchy(h: Hierarchy, path):
    Path(path).write_text(json.dumps(hierarchy_document(h), indent=1, sort_keys=True) + "\n")


def read_hierarchy(path, base: Partition) -> Hierarchy:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema") != HIERARCHY_SCHEMA:
        raise ValidationError(f"{path}: unsupported hierarchy schema {doc.get('schema')!r}")
    levels = sorted(doc["levels"], key=lambda d: d["level"])
    parents = []
    for d in levels:
        mapping = {int(k): int(v) for k, v in d["parents"].items()}
        parents.append([mapping[r] for r in range(len(mapping))])
    return Hierarchy.from_parents(base, parents)
