"""Partition quality: generalized modularity, the Omega density matrix and the resolution window."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DegenerateCommunityError, UndefinedInputError, UndefinedWindowError, ValidationError
from .graph import Graph, Partition, inter_community_edge_counts

__all__ = [
    "OmegaMatrix",
    "ResolutionWindow",
    "SweepResult",
    "modularity",
    "modularity_line",
    "omega_matrix",
    "resolution_window",
    "achieved_mu",
    "community_mu",
    "gamma_grid",
    "gamma_sweep",
]


def _aggregates(g: Graph, p: Partition):
    if g.m == 0:
        raise UndefinedInputError("modularity is undefined for a graph without edges")
    if p.node_count != g.node_count:
        raise ValidationError(f"partition covers {p.node_count} nodes but graph has {g.node_count}")
    a = p.assignment
    same = a[g.edges[:, 0]] == a[g.edges[:, 1]]
    e_in = np.bincount(a[g.edges[same, 0]], minlength=p.n_communities).astype(np.float64)
    K = np.bincount(a, weights=g.degrees, minlength=p.n_communities)
    return e_in, K


def modularity_line(g: Graph, p: Partition) -> tuple[float, float]:
    """``(intercept, slope)`` with ``Q(gamma) = intercept + slope * gamma``."""
    e_in, K = _aggregates(g, p)
    m = g.m
    return float(e_in.sum() / m), float(-np.sum((K / (2.0 * m)) ** 2))


def modularity(g: Graph, p: Partition, gamma: float = 1.0) -> float:
    """Generalized modularity ``Q = sum_r e_r / m - gamma * (K_r / 2m)**2``.

    ``e_r`` is the number of edges inside community ``r`` and ``K_r`` its
    total degree.
    """
    intercept, slope = modularity_line(g, p)
    return intercept + gamma * slope


@dataclass(frozen=True, eq=False)
class OmegaMatrix:
    """Ratio of actual to configuration-model expected edges between communities."""

    values: np.ndarray

    @property
    def size(self) -> int:
        return self.values.shape[0]

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.values)

    def off_diagonal(self) -> np.ndarray:
        return self.values[~np.eye(self.size, dtype=bool)]


@dataclass(frozen=True)
class ResolutionWindow:
    lower: float
    upper: float

    @property
    def D(self) -> float:
        return self.upper - self.lower


def omega_matrix(g: Graph, p: Partition) -> OmegaMatrix:
    """Omega matrix of ``p`` on ``g``.

    The expected count is ``K_r**2 / 4m`` inside a community and
    ``K_r * K_s / 2m`` between two communities.
    """
    if g.m == 0:
        raise UndefinedInputError("Omega is undefined for a graph without edges")
    counts = inter_community_edge_counts(g, p).astype(np.float64)
    K = np.bincount(p.assignment, weights=g.degrees, minlength=p.n_communities)
    if (K == 0).any():
        r = int(np.flatnonzero(K == 0)[0])
        raise DegenerateCommunityError(f"community {r} has zero total degree")
    m2 = 2.0 * g.m
    expected = np.outer(K, K) / m2
    np.fill_diagonal(expected, K**2 / (2.0 * m2))
    return OmegaMatrix(counts / expected)


def resolution_window(omega: OmegaMatrix | np.ndarray) -> ResolutionWindow:
    """Window ``(max off-diagonal, min diagonal)``; its width is ``D``."""
    values = omega.values if isinstance(omega, OmegaMatrix) else np.asarray(omega, dtype=np.float64)
    if values.ndim != 2 or values.shape[0] != values.shape[1]:
        raise ValidationError("Omega must be a square matrix")
    c = values.shape[0]
    if c < 2:
        raise UndefinedWindowError("the resolution window needs at least two communities")
    off = values[~np.eye(c, dtype=bool)]
    return ResolutionWindow(lower=float(off.max()), upper=float(np.diag(values).min()))


def achieved_mu(g: Graph, p: Partition) -> float:
    """Fraction of edges whose endpoints lie in different communities."""
    if g.m == 0:
        raise UndefinedInputError("mixing is undefined for a graph without edges")
    if p.node_count != g.node_count:
        raise ValidationError(f"partition covers {p.node_count} nodes but graph has {g.node_count}")
    a = p.assignment
    return float(np.mean(a[g.edges[:, 0]] != a[g.edges[:, 1]]))


def community_mu(g: Graph, p: Partition) -> np.ndarray:
    """Per-community external fraction: external stubs of ``r`` over ``K_r``."""
    e_in, K = _aggregates(g, p)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(K > 0, 1.0 - 2.0 * e_in / K, 0.0)


def gamma_grid(start: float = 0.05, stop: float = 20.0, points: int = 200, scale: str = "log") -> np.ndarray:
    if points < 1:
        raise ValidationError("gamma grid needs at least one point")
    if scale == "log":
        if start <= 0 or stop <= 0:
            raise ValidationError("log-spaced gamma grid needs positive bounds")
        return np.geomspace(start, stop, points)
    if scale == "lin":
        return np.linspace(start, stop, points)
    raise ValidationError(f"unknown gamma grid scale {scale!r}")


@dataclass(frozen=True, eq=False)
class SweepResult:
    """Modularity of each partition over a gamma grid.

    ``Q[j, t]`` is partition ``j`` at ``gammas[t]``; ``argmax[t]`` is the
    envelope partition at ``gammas[t]``.
    """

    gammas: np.ndarray
    Q: np.ndarray
    argmax: np.ndarray

    def intervals(self) -> list[tuple[float, float] | None]:
        """Per partition, the ``(min, max)`` grid gamma where it is the envelope."""
        out = []
        for j in range(self.Q.shape[0]):
            hit = self.gammas[self.argmax == j]
            out.append((float(hit.min()), float(hit.max())) if hit.size else None)
        return out

    def rows(self):
        for t, gamma in enumerate(self.gammas):
            for j in range(self.Q.shape[0]):
                yield float(gamma), j, float(self.Q[j, t]), bool(self.argmax[t] == j)


def gamma_sweep(g: Graph, partitions: Sequence[Partition], gammas) -> SweepResult:
    """Evaluate every partition on every gamma and find the upper envelope.

    Ties go to the partition with fewer communities.
    """
    if not partitions:
        raise ValidationError("gamma_sweep needs at least one partition")
    gammas = np.asarray(gammas, dtype=np.float64)
    if gammas.size == 0:
        raise ValidationError("gamma grid is empty")
    lines = np.array([modularity_line(g, p) for p in partitions])
    Q = lines[:, :1] + lines[:, 1:] * gammas[None, :]
    sizes = np.array([p.n_communities for p in partitions])
    best = Q.max(axis=0)
    tied = np.isclose(Q, best[None, :], rtol=0, atol=1e-12)
    rank = np.where(tied, sizes[:, None], np.iinfo(np.int64).max)
    return SweepResult(gammas, Q, np.argmin(rank, axis=0))
