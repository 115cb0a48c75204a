"""Edge realisation: configuration-model internal wiring and hierarchy-weighted external wiring."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import GenerationError, ParameterError, ValidationError
from .graph import Graph, Hierarchy, Partition, build_graph, coarsen
from .sampling import (
    GeneratorParams,
    HierarchyParams,
    HierarchySkeleton,
    MixingSchedule,
    assign_mixing,
    assign_nodes,
    sample_community_sizes,
    sample_hierarchy,
    sample_power_law_degrees,
)

__all__ = [
    "StubLedger",
    "GeneratedNetwork",
    "build_ledger",
    "balance_communities",
    "wire_internal",
    "wire_external",
    "generate",
]

log = logging.getLogger(__name__)

MAX_RETRIES = 10
REWIRE_ATTEMPTS = 50


def _canon(u, v):
    return (u, v) if u < v else (v, u)


@dataclass
class StubLedger:
    """Per-node stub budgets: ``internal[v]`` and ``external[v, level]``.

    Budgets are mutated in place by the wiring steps (spilled stubs move up a
    level); ``initial`` keeps the per-node totals at construction time.
    """

    internal: np.ndarray
    external: np.ndarray
    initial: np.ndarray = field(repr=False)

    @property
    def total(self) -> np.ndarray:
        return self.internal + self.external.sum(axis=1)


def _largest_remainder(x: np.ndarray, cap: np.ndarray) -> np.ndarray:
    """Round ``x`` so the total equals ``round(x.sum())``, no entry above ``cap``."""
    base = np.floor(x).astype(np.int64)
    base = np.minimum(base, cap)
    extra = int(round(x.sum())) - int(base.sum())
    if extra > 0:
        order = np.argsort(-(x - base), kind="stable")
        order = order[base[order] < cap[order]][:extra]
        base[order] += 1
    return base


def build_ledger(
    degrees: np.ndarray,
    partition: Partition,
    schedule: MixingSchedule,
    rng: np.random.Generator,
) -> StubLedger:
    """Split each node's target degree into internal and per-level external stubs.

    Per community and level, the external stub total is ``round(mu[c, i] * K_c)``
    and is spread over nodes by largest remainder. Internal stubs take the
    rest of each node's degree. An odd internal total in a community is fixed
    by moving one stub of a random node to its top-level external budget.
    """
    degrees = np.asarray(degrees, dtype=np.int64)
    n, L = degrees.size, schedule.mu.shape[1]
    external = np.zeros((n, L), dtype=np.int64)
    for c, nodes in enumerate(partition.groups()):
        k = degrees[nodes]
        used = np.zeros(nodes.size, dtype=np.int64)
        for i in range(L):
            mu = schedule.mu[c, i]
            if mu <= 0:
                continue
            share = _largest_remainder(k * mu, k - used)
            external[nodes, i] = share
            used += share
    internal = degrees - external.sum(axis=1)
    for c, nodes in enumerate(partition.groups()):
        if internal[nodes].sum() % 2 == 0:
            continue
        cand = nodes[internal[nodes] > 0]
        v = cand[rng.integers(cand.size)]
        internal[v] -= 1
        if schedule.mu[c, L - 1] > 0:
            external[v, L - 1] += 1
    return StubLedger(internal, external, degrees.copy())


# --------------------------------------------------------------------------
# matching helpers


def _realize(pairs, rng, attempts, cls=None, present=None):
    """Turn stub pairs into simple edges, rewiring collisions.

    A self-loop or repeated pair ``(u, v)`` is swapped against a random
    partner ``(a, b)`` into ``(u, a), (v, b)``. The partner is either an
    accepted edge or another colliding pair, so two collisions can resolve
    each other. After ``attempts`` failed tries the pair is dropped. ``cls``
    (node -> class), when given, forbids swaps that would join two nodes of
    the same class. ``present`` holds edges placed earlier that must not be
    repeated; it is updated in place.

    Returns the edge list and the number of dropped stubs.
    """
    edges = []
    if present is None:
        present = set()
    pending = []
    for u, v in pairs:
        e = _canon(u, v)
        if u == v or e in present:
            pending.append((u, v))
        else:
            present.add(e)
            edges.append(e)
    dropped = 0
    while pending:
        u, v = pending.pop()
        if u != v and _canon(u, v) not in present:
            # an earlier swap removed the edge this pair collided with
            present.add(_canon(u, v))
            edges.append(_canon(u, v))
            continue
        placed = False
        for _ in range(attempts):
            pool = len(edges) + len(pending)
            if pool == 0:
                break
            j = int(rng.integers(pool))
            a, b = edges[j] if j < len(edges) else pending[j - len(edges)]
            if rng.random() < 0.5:
                a, b = b, a
            if u == a or v == b:
                continue
            if cls is not None and (cls[u] == cls[a] or cls[v] == cls[b]):
                continue
            e1, e2 = _canon(u, a), _canon(v, b)
            if e1 == e2 or e1 in present or e2 in present:
                continue
            if j < len(edges):
                present.discard(edges[j])
                edges[j] = e1
            else:
                pending.pop(j - len(edges))
                edges.append(e1)
            edges.append(e2)
            present.add(e1)
            present.add(e2)
            placed = True
            break
        if not placed:
            dropped += 2
    return edges, dropped


def wire_internal(
    nodes: np.ndarray,
    budget: np.ndarray,
    rng: np.random.Generator,
    rewire_attempts: int = REWIRE_ATTEMPTS,
) -> tuple[list[tuple[int, int]], int]:
    """Configuration-model wiring of one community.

    Parameters
    ----------
    nodes : array of int
        Node ids of the community.
    budget : array of int
        Internal stub count for each entry of ``nodes``.

    Returns
    -------
    edges, dropped : list of (u, v), int
        Simple edges inside the community and the number of stubs that could
        not be placed without a self-loop or duplicate.
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    budget = np.asarray(budget, dtype=np.int64)
    total = int(budget.sum())
    if total % 2:
        raise ValidationError("internal stub total must be even")
    if nodes.size == 1 and total:
        raise GenerationError(f"single-node community {int(nodes[0])} has internal stubs")
    stubs = np.repeat(nodes, budget)
    rng.shuffle(stubs)
    edges, dropped = _realize(stubs.reshape(-1, 2).tolist(), rng, rewire_attempts)
    if dropped:
        exact = _graphical_realization(nodes, budget, rng)
        if exact is not None:
            return exact, 0
    return edges, dropped


def _graphical_realization(nodes, budget, rng):
    """Exact simple realization for budgets the stub matching could not meet.

    Dense communities (a clique being the extreme) are hard to reach by local
    rewiring. If the budget sequence is graphical, build one realization by
    Havel-Hakimi and randomize it with degree-preserving double-edge swaps.
    Returns None when the sequence is not graphical.
    """
    import networkx as nx

    seq = budget.tolist()
    if not nx.is_graphical(seq):
        return None
    h = nx.havel_hakimi_graph(seq)
    m = h.number_of_edges()
    if h.number_of_nodes() >= 4 and m >= 2:
        try:
            nx.double_edge_swap(h, nswap=10 * m, max_tries=100 * m, seed=int(rng.integers(2**32)))
        except nx.NetworkXException:
            pass  # saturated sequences admit few or no swaps; keep what we have
    return [_canon(int(nodes[a]), int(nodes[b])) for a, b in h.edges()]


def _multipartite_match(pools, rng):
    """Pair stubs across classes so no pair falls inside one class.

    Each step takes a stub from the fullest class and a partner drawn
    uniformly from the stubs of all other classes. Returns the pairs and the
    stubs left unmatched (all from a single class).
    """
    pools = [list(p) for p in pools]
    for p in pools:
        rng.shuffle(p)
    rem = np.array([len(p) for p in pools], dtype=np.int64)
    pairs = []
    if len(pools) == 2:
        k = int(rem.min())
        pairs = list(zip(pools[0][:k], pools[1][:k]))
        left = pools[0][k:] + pools[1][k:]
        return pairs, left
    while True:
        h = int(np.argmax(rem))
        others = int(rem.sum() - rem[h])
        if others == 0:
            break
        w = rem.copy()
        w[h] = 0
        j = int(np.searchsorted(np.cumsum(w), rng.random() * others, side="right"))
        pairs.append((pools[h].pop(), pools[j].pop()))
        rem[h] -= 1
        rem[j] -= 1
    left = [s for p in pools for s in p]
    return pairs, left


def wire_external(
    partition: Partition,
    skeleton: HierarchySkeleton,
    schedule: MixingSchedule,
    ledger: StubLedger,
    rng: np.random.Generator,
    rewire_attempts: int = REWIRE_ATTEMPTS,
    spill: bool = True,
) -> tuple[list[tuple[int, int]], dict]:
    """Wire external stubs level by level along the hierarchy.

    At level ``i`` every group formed by merging two or more level ``i - 1``
    groups pairs the level-``i`` stubs of its members across those former
    groups, so a community only links to the communities it newly joins at
    ``i``. Stubs left over because one side has more demand than the other
    move to the node's next-level budget when ``spill`` is set and are
    dropped otherwise. With ``spill``, stubs still unmatched at the top level
    (the whole network) are paired across distinct communities as a last
    resort; whatever remains is dropped.

    Returns the edge list and a stats dict with ``dropped``, ``spilled``,
    ``fallback`` (stubs placed by the last-resort pairing) and per-level
    ``unmatched`` counts.
    """
    L = skeleton.L
    if ledger.external.shape[1] != L:
        raise ValidationError("ledger and skeleton disagree on the number of levels")
    groups = partition.groups()
    comm = partition.assignment
    edges = []
    present = set()
    stats = {"dropped": 0, "spilled": 0, "unmatched": [0] * L, "fallback": 0}
    for i in range(L):
        top = i == L - 1
        for grp, classes in skeleton.merges(i):
            pools = []
            cls = {}
            for j, cs in enumerate(classes):
                nodes = np.concatenate([groups[c] for c in cs])
                pools.append(np.repeat(nodes, ledger.external[nodes, i]).tolist())
                cls.update(dict.fromkeys(nodes.tolist(), j))
            sizes = [len(p) for p in pools]
            if sum(sizes) and sum(sizes) == max(sizes) and top and not spill:
                raise GenerationError(
                    f"level {i}: group {grp} has {sum(sizes)} external stubs but no "
                    f"counterpart stubs in the communities it joins"
                )
            pairs, left = _multipartite_match(pools, rng)
            if pairs:
                np.subtract.at(ledger.external[:, i], np.array(pairs).ravel(), 1)
            got, dropped = _realize(pairs, rng, rewire_attempts, cls, present)
            edges.extend(got)
            stats["dropped"] += dropped
            stats["unmatched"][i] += len(left)
        # everything still budgeted here is left over: unmatched merge stubs
        # and stubs spilled up from a level below into a community with no
        # new siblings at this level
        rest = ledger.external[:, i].copy()
        if not rest.any():
            continue
        ledger.external[:, i] = 0
        if not spill:
            stats["dropped"] += int(rest.sum())
        elif not top:
            ledger.external[:, i + 1] += rest
            stats["spilled"] += int(rest.sum())
        else:
            # the top level spans the whole network: pair the rest across communities
            by_comm = {}
            for v in np.repeat(np.arange(rest.size), rest).tolist():
                by_comm.setdefault(int(comm[v]), []).append(v)
            pairs, left = _multipartite_match(list(by_comm.values()), rng)
            got, dropped = _realize(pairs, rng, rewire_attempts, comm, present)
            edges.extend(got)
            stats["fallback"] += 2 * len(got)
            stats["dropped"] += dropped + len(left)
    if (ledger.external < 0).any():
        raise GenerationError("negative residual external stubs")
    return edges, stats


# --------------------------------------------------------------------------
# community shuffling


def _deficits(demand, merges):
    out = []
    for i, classes in merges:
        d = np.array([demand[cs, i].sum() for cs in classes])
        heavy = int(np.argmax(d))
        out.append((max(0.0, 2 * d[heavy] - d.sum()), i, classes[heavy]))
    return out


def balance_communities(
    partition: Partition,
    skeleton: HierarchySkeleton,
    schedule: MixingSchedule,
    degrees: np.ndarray,
    rng: np.random.Generator,
    max_swaps: int = 1000,
) -> tuple[Partition, int]:
    """Swap node sets between hierarchy positions to balance external demand.

    The demand mismatch of a merge is how far its most demanding side exceeds
    all other sides combined. A proposal takes a random community from the
    worst side of the worst merge and a random community outside that side,
    exchanges their node sets (hierarchy slots and mixing rows stay put), and
    is kept only if the summed mismatch drops and every moved node still
    satisfies the internal-degree constraint. Returns the new partition and
    the number of accepted swaps.
    """
    degrees = np.asarray(degrees)
    C = partition.n_communities
    if C < 2:
        return partition, 0
    groups = partition.groups()
    K = np.array([degrees[g].sum() for g in groups], dtype=np.float64)
    size = np.array([g.size for g in groups])
    kmax = np.array([degrees[g].max() for g in groups], dtype=np.float64)
    internal = schedule.internal
    merges = [(i, classes) for i in range(skeleton.L) for _, classes in skeleton.merges(i)]

    def objective(Kv):
        demand = schedule.mu * Kv[:, None]
        return _deficits(demand, merges)

    defs = objective(K)
    current = sum(d for d, _, _ in defs)
    slot = np.arange(C)  # slot[c] = node set now sitting at position c
    accepted = 0
    for _ in range(max_swaps):
        if current < 1.0:
            break
        _, _, heavy = max(defs, key=lambda t: t[0])
        p = int(heavy[rng.integers(heavy.size)])
        outside = np.setdiff1d(np.arange(C), heavy)
        if outside.size == 0:
            break
        q = int(outside[rng.integers(outside.size)])
        sp, sq = slot[p], slot[q]
        if not (kmax[sp] * internal[q] < size[sp] - 1 and kmax[sq] * internal[p] < size[sq] - 1):
            continue
        K2 = K.copy()
        K2[p], K2[q] = K[q], K[p]
        defs2 = objective(K2)
        new = sum(d for d, _, _ in defs2)
        if new < current:
            K, defs, current = K2, defs2, new
            slot[p], slot[q] = sq, sp
            accepted += 1
    if not accepted:
        return partition, 0
    assignment = np.empty(partition.node_count, dtype=np.int64)
    for pos in range(C):
        assignment[groups[slot[pos]]] = pos
    return Partition(assignment, partition.node_degrees), accepted


# --------------------------------------------------------------------------
# pipeline


@dataclass(eq=False)
class GeneratedNetwork:
    graph: Graph
    hierarchy: Hierarchy
    schedule: MixingSchedule
    skeleton: HierarchySkeleton
    target_degrees: np.ndarray
    metadata: dict

    @property
    def ground_truth(self) -> Partition:
        return self.hierarchy.levels[0]


def _flat_params(params: GeneratorParams) -> HierarchyParams:
    delta = params.delta_mu if params.mode == "GLFR" else 0.0
    return HierarchyParams(1, 1.0, (params.mu,), (delta,))


def _generate_once(params, hp, rng, spill, rewire_attempts, max_swaps):
    degrees = sample_power_law_degrees(params, rng)
    sizes = sample_community_sizes(params, rng)
    skeleton = sample_hierarchy(len(sizes), hp, rng)
    schedule = assign_mixing(skeleton, hp, rng)
    partition = assign_nodes(degrees, sizes, schedule, rng)
    partition, swaps = balance_communities(partition, skeleton, schedule, degrees, rng, max_swaps)
    ledger = build_ledger(degrees, partition, schedule, rng)

    edges = []
    dropped_internal = 0
    for c, nodes in enumerate(partition.groups()):
        got, dropped = wire_internal(nodes, ledger.internal[nodes], rng, rewire_attempts)
        edges.extend(got)
        dropped_internal += dropped
    ext, stats = wire_external(partition, skeleton, schedule, ledger, rng, rewire_attempts, spill)
    edges.extend(ext)

    g = build_graph(params.N, np.array(edges, dtype=np.int64).reshape(-1, 2))
    gt = Partition(partition.assignment, g.degrees)
    levels = [gt]
    for grouping in skeleton.groupings:
        nxt = coarsen(gt, grouping)
        if nxt.n_communities < levels[-1].n_communities:
            levels.append(nxt)
    meta = {
        "n_communities": int(gt.n_communities),
        "community_sizes": gt.community_sizes.tolist(),
        "group_counts": skeleton.group_counts(),
        "swaps": swaps,
        "dropped_internal_stubs": int(dropped_internal),
        "dropped_external_stubs": int(stats["dropped"]),
        "spilled_stubs": int(stats["spilled"]),
        "fallback_stubs": int(stats["fallback"]),
        "rescaled_communities": int(np.count_nonzero(schedule.rescaled)) if schedule.rescaled is not None else 0,
    }
    return GeneratedNetwork(g, Hierarchy.from_levels(levels), schedule, skeleton, degrees, meta)


def generate(
    params: GeneratorParams,
    hp: HierarchyParams | None = None,
    rng: np.random.Generator | None = None,
    *,
    spill: bool = True,
    rewire_attempts: int = REWIRE_ATTEMPTS,
    max_swaps: int = 1000,
    max_retries: int = MAX_RETRIES,
) -> GeneratedNetwork:
    """Run the full generation pipeline.

    ``LFR`` and ``GLFR`` modes use a single grouping level holding the whole
    network (``GLFR`` with per-community mixing in ``mu +- delta_mu``);
    ``HGLFR`` requires ``hp``. On a :class:`GenerationError` the whole
    pipeline is retried with a fresh generator derived from ``rng``, up to
    ``max_retries`` attempts in total.
    """
    params.validate()
    if params.mode == "HGLFR":
        if hp is None:
            raise ParameterError("HGLFR mode requires hierarchy parameters")
        hp.validate()
    else:
        if hp is not None:
            raise ParameterError(f"{params.mode} mode takes no hierarchy parameters")
        hp = _flat_params(params)
    if rng is None:
        rng = np.random.default_rng(params.seed)
    errors = []
    for attempt in range(max_retries):
        try:
            net = _generate_once(params, hp, rng, spill, rewire_attempts, max_swaps)
        except GenerationError as exc:
            log.debug("generation attempt %d failed: %s", attempt, exc)
            errors.append(str(exc))
            rng = np.random.default_rng(rng.integers(2**63))
            continue
        net.metadata["attempts"] = attempt + 1
        return net
    raise GenerationError(f"generation failed after {max_retries} attempts; last error: {errors[-1]}")
