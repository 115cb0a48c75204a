"""Stochastic pre-wiring steps: degrees, community sizes, hierarchy, mixing, placement.

Every function takes an explicit :class:`numpy.random.Generator`; nothing
here touches global random state.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import GenerationError, ParameterError
from .graph import Partition

__all__ = [
    "GeneratorParams",
    "HierarchyParams",
    "HierarchySkeleton",
    "MixingSchedule",
    "MU_CLAMP",
    "PARAMETRIZATIONS",
    "sample_power_law_degrees",
    "sample_community_sizes",
    "sample_hierarchy",
    "assign_mixing",
    "flat_mixing",
    "assign_nodes",
]

MODES = ("LFR", "GLFR", "HGLFR")

#: Upper clamp for any sampled mixing fraction and for a community's row sum.
MU_CLAMP = 0.99


@dataclass(frozen=True)
class GeneratorParams:
    N: int
    avg_degree: float
    k_max: int
    tau1: float
    tau2: float
    c_min: int
    c_max: int
    mode: str = "LFR"
    mu: float = 0.1
    delta_mu: float = 0.0
    seed: int | None = None

    def validate(self):
        if self.mode not in MODES:
            raise ParameterError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.N < 2:
            raise ParameterError("N must be at least 2")
        if not 0 < self.avg_degree <= self.k_max:
            raise ParameterError("need 0 < avg_degree <= k_max")
        if self.k_max >= self.N:
            raise ParameterError(f"k_max ({self.k_max}) must be smaller than N ({self.N})")
        if self.tau1 <= 1 or self.tau2 <= 1:
            raise ParameterError("power-law exponents tau1, tau2 must exceed 1")
        if not 1 <= self.c_min <= self.c_max <= self.N:
            raise ParameterError("need 1 <= c_min <= c_max <= N")
        if self.mode != "HGLFR":
            if not 0 < self.mu < 1:
                raise ParameterError(f"mu must lie in (0, 1), got {self.mu}")
            if self.delta_mu < 0:
                raise ParameterError("delta_mu must be non-negative")
            lo, hi = _clamped_interval(self.mu, self.delta_mu if self.mode == "GLFR" else 0.0)
            if lo > hi:
                raise ParameterError(f"mixing interval [{lo}, {hi}] is empty after clamping")
        return self


@dataclass(frozen=True)
class HierarchyParams:
    """Hierarchy shape and per-level mixing.

    ``mu_levels[i]`` is the fraction of a community's degree wired to the
    communities it first shares a group with at grouping level ``i``. Level
    ``L - 1`` is the whole network.
    """

    L: int
    S: float
    mu_levels: tuple[float, ...]
    delta_levels: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "mu_levels", tuple(float(x) for x in self.mu_levels))
        object.__setattr__(self, "delta_levels", tuple(float(x) for x in self.delta_levels))

    def validate(self):
        if self.L < 1:
            raise ParameterError("L must be at least 1")
        if not 0 < self.S <= 1:
            raise ParameterError(f"S must lie in (0, 1], got {self.S}")
        if len(self.mu_levels) != self.L or len(self.delta_levels) != self.L:
            raise ParameterError(f"mu_levels and delta_levels must both have length L={self.L}")
        for i, (mu, d) in enumerate(zip(self.mu_levels, self.delta_levels)):
            if not 0 <= mu < 1:
                raise ParameterError(f"mu_levels[{i}] must lie in [0, 1), got {mu}")
            if d < 0:
                raise ParameterError(f"delta_levels[{i}] must be non-negative")
            lo, hi = _clamped_interval(mu, d)
            if lo > hi:
                raise ParameterError(f"level {i} mixing interval is empty after clamping")
        return self


# Named hierarchical parametrizations (three levels each).
PARAMETRIZATIONS = {
    "Low": ((0.33, 0.03, 0.027), (0.03, 0.01, 0.002)),
    "Medium": ((0.4, 0.2, 0.1), (0.1, 0.1, 0.1)),
    "High": ((0.8, 0.6, 0.3), (0.2, 0.2, 0.2)),
}


def _clamped_interval(mu, delta):
    return max(0.0, mu - delta), min(MU_CLAMP, mu + delta)


# --------------------------------------------------------------------------
# power laws


def _powerlaw_weights(x_min: float, hi: int, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Discrete power-law weights k**-tau on the integers of [x_min, hi].

    A fractional ``x_min`` puts the point ``floor(x_min)`` in with a partial
    weight, which makes the mean continuous and monotone in ``x_min``.
    """
    lo = int(np.floor(x_min))
    support = np.arange(lo, hi + 1, dtype=np.float64)
    w = support**-tau
    if lo < x_min:
        w[0] *= 1.0 - (x_min - lo)
    return support.astype(np.int64), w / w.sum()


def _powerlaw_mean(x_min, hi, tau):
    s, p = _powerlaw_weights(x_min, hi, tau)
    return float(s @ p)


def _solve_k_min(avg, k_max, tau):
    lo_mean = _powerlaw_mean(1.0, k_max, tau)
    if avg < lo_mean * 0.98 or avg > k_max:
        raise ParameterError(
            f"average degree {avg} is unreachable with k_max={k_max}, tau1={tau} "
            f"(feasible range [{lo_mean:.3f}, {k_max}])"
        )
    if avg <= lo_mean:
        return 1.0
    if avg >= k_max:
        return float(k_max)
    return brentq(lambda x: _powerlaw_mean(x, k_max, tau) - avg, 1.0, float(k_max), xtol=1e-10)


def _draw(support, probs, size, rng):
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return support[np.searchsorted(cdf, rng.random(size), side="right")]


def sample_power_law_degrees(params: GeneratorParams, rng: np.random.Generator) -> np.ndarray:
    """Sample ``N`` node degrees from a discrete power law on ``[k_min, k_max]``.

    ``k_min`` is solved numerically so that the distribution mean equals
    ``avg_degree``. If the degree sum comes out odd, one node is bumped by one.
    """
    k_min = _solve_k_min(params.avg_degree, params.k_max, params.tau1)
    support, probs = _powerlaw_weights(k_min, params.k_max, params.tau1)
    degrees = _draw(support, probs, params.N, rng)
    if degrees.sum() % 2:
        room = np.flatnonzero(degrees < params.k_max)
        if room.size:
            degrees[room[rng.integers(room.size)]] += 1
        else:
            degrees[rng.integers(degrees.size)] -= 1
    return degrees


def sample_community_sizes(
    params: GeneratorParams, rng: np.random.Generator, max_attempts: int = 1000
) -> list[int]:
    """Power-law community sizes in ``[c_min, c_max]`` that sum exactly to ``N``.

    Sizes are drawn until the running sum reaches ``N``; the last one is cut
    to fit and, if that leaves it below ``c_min``, folded into the others.
    """
    n, c_min, c_max = params.N, params.c_min, params.c_max
    if n < c_min:
        raise ParameterError(f"N={n} is smaller than c_min={c_min}")
    if -(-n // c_max) * c_min > n:
        raise ParameterError(f"no community count covers N={n} with sizes in [{c_min}, {c_max}]")
    support, probs = _powerlaw_weights(float(c_min), c_max, params.tau2)
    for _ in range(max_attempts):
        sizes = []
        total = 0
        while total < n:
            s = int(_draw(support, probs, 1, rng)[0])
            sizes.append(s)
            total += s
        sizes[-1] -= total - n
        if sizes[-1] >= c_min:
            return sizes
        rest = sizes.pop()
        # fold the short remainder into communities with room, neighbours first
        for j in range(len(sizes) - 1, -1, -1):
            take = min(rest, c_max - sizes[j])
            sizes[j] += take
            rest -= take
            if rest == 0:
                return sizes
    raise ParameterError(f"could not draw community sizes summing to N={n}")


# --------------------------------------------------------------------------
# hierarchy


@dataclass(frozen=True, eq=False)
class HierarchySkeleton:
    """Community-level grouping chain.

    ``groupings[i][c]`` is the group of community ``c`` at grouping level
    ``i``; the last level holds a single group. Group ids are dense per level.
    """

    n_communities: int
    groupings: tuple[np.ndarray, ...]

    @property
    def L(self) -> int:
        return len(self.groupings)

    def level(self, i: int) -> np.ndarray:
        """Groups at level ``i``; level ``-1`` is the communities themselves."""
        if i < 0:
            return np.arange(self.n_communities)
        return self.groupings[i]

    def group_counts(self) -> list[int]:
        return [int(g.max()) + 1 for g in self.groupings]

    @cached_property
    def gains(self) -> np.ndarray:
        """``(C, L)`` bool: community gains new sibling communities at level i."""
        out = np.zeros((self.n_communities, self.L), dtype=bool)
        prev = np.ones(self.n_communities, dtype=np.int64)
        for i, g in enumerate(self.groupings):
            cur = np.bincount(g)[g]
            out[:, i] = cur > prev
            prev = cur
        return out

    def merges(self, i: int) -> list[tuple[int, list[np.ndarray]]]:
        """Groups at level ``i`` formed from two or more level ``i - 1`` groups.

        Returns ``(group_id, classes)`` where each class is the array of
        communities that were already together one level below.
        """
        below = self.level(i - 1)
        out = []
        for grp in range(int(self.groupings[i].max()) + 1):
            comms = np.flatnonzero(self.groupings[i] == grp)
            subs = np.unique(below[comms])
            if subs.size > 1:
                out.append((grp, [comms[below[comms] == s] for s in subs]))
        return out

    def validate(self):
        counts = [self.n_communities] + self.group_counts()
        if any(b >= a for a, b in zip(counts, counts[1:])) and self.n_communities > 1:
            raise ParameterError(f"group counts {counts} do not strictly decrease")
        if counts[-1] != 1:
            raise ParameterError("top grouping level must be a single group")
        for i in range(1, self.L):
            below, above = self.groupings[i - 1], self.groupings[i]
            lut = np.full(int(below.max()) + 1, -1)
            lut[below] = above
            if not np.array_equal(lut[below], above):
                raise ParameterError(f"grouping level {i - 1} is not nested in level {i}")


def _dense(labels):
    _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    return rank[inv]


def sample_hierarchy(
    base_community_count: int, hp: HierarchyParams, rng: np.random.Generator
) -> HierarchySkeleton:
    """Sample the grouping chain above the ground-truth communities.

    Each level is built from the previous one in a single pass: every group,
    visited in random order, merges into a uniformly chosen other group with
    probability ``S``. A pass without merges gets one forced merge, and
    merging stops early if too few groups would remain for the levels above.
    """
    c, L = base_community_count, hp.L
    if c == 1 and L == 1:
        return HierarchySkeleton(1, (np.zeros(1, dtype=np.int64),))
    if c < L + 1:
        raise ParameterError(
            f"{c} communities cannot support {L} strictly coarser grouping levels"
        )
    prev = np.arange(c, dtype=np.int64)
    groupings = []
    for i in range(L):
        if i == L - 1:
            groupings.append(np.zeros(c, dtype=np.int64))
            break
        n_prev = int(prev.max()) + 1
        min_groups = L - i
        root = np.arange(n_prev)

        def find(x):
            while root[x] != x:
                root[x] = root[root[x]]
                x = root[x]
            return x

        count = n_prev
        for g in rng.permutation(n_prev):
            if count <= min_groups:
                break
            if rng.random() < hp.S:
                r = find(g)
                others = [x for x in range(n_prev) if root[x] == x and x != r]
                root[r] = others[rng.integers(len(others))]
                count -= 1
        if count == n_prev:
            a, b = rng.choice(n_prev, size=2, replace=False)
            root[find(a)] = find(b)
        labels = np.array([find(x) for x in range(n_prev)])
        prev = _dense(labels[prev])
        groupings.append(prev)
    sk = HierarchySkeleton(c, tuple(groupings))
    sk.validate()
    return sk


# --------------------------------------------------------------------------
# mixing


@dataclass(frozen=True, eq=False)
class MixingSchedule:
    """Realised mixing fraction ``mu[c, i]`` of community ``c`` toward level ``i``."""

    mu: np.ndarray
    rescaled: np.ndarray = field(default=None, repr=False)

    @property
    def n_communities(self) -> int:
        return self.mu.shape[0]

    @property
    def external(self) -> np.ndarray:
        return self.mu.sum(axis=1)

    @property
    def internal(self) -> np.ndarray:
        return 1.0 - self.external

    def permuted(self, order) -> "MixingSchedule":
        return MixingSchedule(self.mu[order], None if self.rescaled is None else self.rescaled[order])


def assign_mixing(
    skeleton: HierarchySkeleton, hp: HierarchyParams, rng: np.random.Generator
) -> MixingSchedule:
    """Sample ``mu[c, i]`` uniformly from the clamped level-``i`` interval.

    A community only receives a level-``i`` fraction if it gains new siblings
    there; every community gains at the top level. Rows whose total would
    reach :data:`MU_CLAMP` are scaled down proportionally (flagged in
    ``rescaled``) so each community keeps a positive internal fraction.
    """
    if skeleton.L != hp.L:
        raise ParameterError(f"skeleton has {skeleton.L} levels but params specify {hp.L}")
    intervals = [_clamped_interval(m, d) for m, d in zip(hp.mu_levels, hp.delta_levels)]
    for i, (lo, hi) in enumerate(intervals):
        if lo > hi:
            raise ParameterError(f"level {i} mixing interval [{lo}, {hi}] is empty")
    gains = skeleton.gains
    mu = np.zeros(gains.shape)
    for c in range(gains.shape[0]):
        for i in range(gains.shape[1]):
            if gains[c, i]:
                lo, hi = intervals[i]
                mu[c, i] = lo if lo == hi else rng.uniform(lo, hi)
    total = mu.sum(axis=1)
    over = total >= MU_CLAMP
    if over.any():
        mu[over] *= (MU_CLAMP - 1e-9) / total[over, None]
    return MixingSchedule(mu, over)


def flat_mixing(n_communities: int, mu: float, delta: float, rng: np.random.Generator) -> MixingSchedule:
    """Single-level schedule with ``mu_c ~ U[mu - delta, mu + delta]`` (clamped)."""
    hp = HierarchyParams(1, 1.0, (mu,), (delta,))
    sk = sample_hierarchy(n_communities, hp, rng)
    return assign_mixing(sk, hp, rng)


# --------------------------------------------------------------------------
# node placement


def assign_nodes(
    degrees: np.ndarray,
    sizes: Sequence[int],
    schedule: MixingSchedule,
    rng: np.random.Generator,
    max_sweeps: int = 100,
) -> Partition:
    """Place nodes into communities subject to ``k * (1 - mu_c) < |c| - 1``.

    Nodes go to a uniformly chosen admissible community with free capacity.
    When none has room, the node takes the seat of a random resident of an
    admissible community, and the evicted node is queued again.

    Raises
    ------
    GenerationError
        If some node fits no community at all, or nodes are still homeless
        after ``max_sweeps * N`` placement attempts.
    """
    degrees = np.asarray(degrees)
    sizes = np.asarray(sizes, dtype=np.int64)
    n = degrees.size
    if sizes.sum() != n:
        raise ParameterError(f"community sizes sum to {sizes.sum()}, expected {n}")
    if sizes.size != schedule.n_communities:
        raise ParameterError("schedule and sizes disagree on the number of communities")
    accept = degrees[:, None] * schedule.internal[None, :] < (sizes - 1)[None, :]
    nowhere = np.flatnonzero(~accept.any(axis=1))
    if nowhere.size:
        v = int(nowhere[0])
        raise GenerationError(
            f"node {v} (degree {int(degrees[v])}) fits no community: its internal degree "
            f"exceeds every community's size - 1"
        )
    members = [[] for _ in range(sizes.size)]
    free = sizes.copy()
    homeless = deque(rng.permutation(n).tolist())
    budget = max_sweeps * n
    while homeless:
        if budget == 0:
            v = homeless[0]
            raise GenerationError(
                f"node {v} (degree {int(degrees[v])}) still unplaced after {max_sweeps} sweeps"
            )
        budget -= 1
        v = homeless.popleft()
        cands = np.flatnonzero(accept[v] & (free > 0))
        if cands.size:
            c = cands[rng.integers(cands.size)]
            members[c].append(v)
            free[c] -= 1
            continue
        cands = np.flatnonzero(accept[v])
        c = cands[rng.integers(cands.size)]
        j = rng.integers(len(members[c]))
        homeless.append(members[c][j])
        members[c][j] = v
    assignment = np.empty(n, dtype=np.int64)
    for c, vs in enumerate(members):
        assignment[vs] = c
    return Partition(assignment, degrees)
