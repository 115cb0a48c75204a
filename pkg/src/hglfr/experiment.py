"""Per-network experiment steps shared by the command line and the test suite."""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np
from scipy import stats

from .analysis import achieved_mu, gamma_sweep, modularity, omega_matrix, resolution_window
from .config import Cell
from .detection import label_propagation, maximize_modularity, nmi
from .errors import UndefinedInputError
from .graph import Graph, Partition
from .io import write_edgelist, write_hierarchy, write_partition
from .wiring import GeneratedNetwork, generate

__all__ = [
    "BIN_WIDTH",
    "realize",
    "window_summary",
    "mu_bin",
    "d_bin",
    "detect",
    "mean_ci",
    "half_crossing",
    "write_network",
    "write_csv",
    "fmt",
    "sweep_rows",
]

BIN_WIDTH = 0.05


def realize(cell: Cell, seed: np.random.SeedSequence) -> tuple[GeneratedNetwork, float | None]:
    """Generate one realization of ``cell``; returns the network and the drawn ``S``."""
    rng = np.random.default_rng(seed)
    S = None
    if cell.mode == "HGLFR":
        lo, hi = cell.S
        S = float(rng.uniform(lo, hi)) if hi > lo else float(lo)
    net = generate(cell.params, cell.hierarchy_params(S) if S is not None else None, rng)
    return net, S


def window_summary(g: Graph, p: Partition) -> dict:
    """Achieved mixing plus the resolution window of ``p``; window fields are None when undefined."""
    out = {"mu": achieved_mu(g, p), "lower": None, "upper": None, "D": None, "min_omega_ii": None}
    try:
        omega = omega_matrix(g, p)
        w = resolution_window(omega)
    except UndefinedInputError:
        return out
    out.update(lower=w.lower, upper=w.upper, D=w.D, min_omega_ii=float(omega.diagonal.min()))
    return out


def mu_bin(mu: float, width: float = BIN_WIDTH) -> float | None:
    """Centre of the left-closed bin holding ``mu``, or None outside ``[width/2, 1 - width/2)``."""
    if not width / 2 <= mu < 1 - width / 2:
        return None
    k = math.floor((mu + width / 2) / width)
    return round(k * width, 10)


def d_bin(D: float, width: float) -> float:
    """Left edge of the width-``width`` bin holding ``D``."""
    return round(math.floor(D / width) * width, 10)


def detect(g: Graph, truth: Partition, method: str, gamma: float | None, seed) -> dict:
    rng = np.random.default_rng(seed)
    if method == "label_propagation":
        res = label_propagation(g, rng)
    elif method == "modularity":
        res = maximize_modularity(g, gamma, rng)
    else:
        raise ValueError(f"unknown method {method!r}")
    return {"method": method, "gamma": res.gamma, "nmi": nmi(res.partition, truth), "Q": res.Q}


def mean_ci(values, level: float = 0.95) -> tuple[float, float, float]:
    """Mean and Student-t confidence interval; the interval collapses to the mean for one value."""
    x = np.asarray(values, dtype=np.float64)
    if x.size == 0:
        return math.nan, math.nan, math.nan
    mean = float(np.mean(x))
    if x.size == 1:
        return mean, mean, mean
    half = float(stats.t.ppf(0.5 + level / 2, x.size - 1) * np.std(x, ddof=1) / math.sqrt(x.size))
    return mean, mean - half, mean + half


def half_crossing(x, y) -> float | None:
    """First ``x`` where ``y`` falls to halfway between its best and worst values.

    ``x`` must be increasing. Linear interpolation between neighbouring
    points; None if ``y`` is flat.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    top, bottom = y.max(), y.min()
    if top == bottom:
        return None
    half = (top + bottom) / 2
    start = int(np.argmax(y))
    for i in range(start, y.size - 1):
        if y[i + 1] <= half:
            if y[i] == y[i + 1]:
                return float(x[i + 1])
            return float(x[i] + (y[i] - half) * (x[i + 1] - x[i]) / (y[i] - y[i + 1]))
    return None


def fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return str(v)


def write_csv(path, header, rows):
    """Write dict ``rows`` under ``header``; floats use ``repr`` so they re-read exactly."""
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(row.get(h)) for h in header])


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return _jsonable(v.tolist())
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (np.floating,)):
        return float(v)
    return v


def write_network(net: GeneratedNetwork, out, extra: dict | None = None) -> dict:
    """Write the edge list, one partition per level, the hierarchy and metadata."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    g = net.graph
    write_edgelist(g, out / "edges.txt")
    for i, level in enumerate(net.hierarchy.levels):
        write_partition(level, out / f"partition_l{i}.tsv")
    write_hierarchy(net.hierarchy, out / "hierarchy.json")
    summary = window_summary(g, net.ground_truth)
    meta = dict(net.metadata)
    meta.update(
        nodes=g.node_count,
        edges=g.m,
        levels=net.hierarchy.depth,
        achieved_mu=summary["mu"],
        D=summary["D"],
        window_lower=summary["lower"],
        window_upper=summary["upper"],
        Q_levels=[modularity(g, p, 1.0) for p in net.hierarchy.levels],
        dropped_stubs=meta["dropped_internal_stubs"] + meta["dropped_external_stubs"],
    )
    if extra:
        meta.update(extra)
    meta = _jsonable(meta)
    (out / "metadata.json").write_text(json.dumps(meta, indent=1, sort_keys=True) + "\n")
    return meta


def sweep_rows(g: Graph, partitions, gammas):
    res = gamma_sweep(g, partitions, gammas)
    return res, [
        {"gamma": gamma, "partition_id": j, "Q": q, "is_argmax": flag} for gamma, j, q, flag in res.rows()
    ]
