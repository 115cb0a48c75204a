"""Pure-Python reference kernels.

These mirror ``_ckernels.pyx`` statement for statement; the two must return
identical results for identical inputs. Arrays are copied to lists on entry
since element access on lists is much cheaper than on ndarrays.
"""


def local_moves(indptr, indices, weights, strength, comm, order, gamma, m2, max_sweeps=1000, eps=1e-10):
    """Louvain local-moving phase, in place on ``comm``.

    Visits nodes in ``order`` and moves each to the neighbouring community
    with the largest strictly positive modularity gain. Repeats until a sweep
    makes no move. Returns the total number of moves.
    """
    out = comm
    indptr, indices, weights = indptr.tolist(), indices.tolist(), weights.tolist()
    strength, comm, order = strength.tolist(), comm.tolist(), order.tolist()
    n = len(strength)
    tot = [0.0] * n
    for i in range(n):
        tot[comm[i]] += strength[i]
    nw = [0.0] * n
    seen = [0] * n
    moves = 0
    for _ in range(max_sweeps):
        moved = 0
        for i in order:
            ci = comm[i]
            ki = strength[i]
            count = 0
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if j == i:
                    continue
                c = comm[j]
                if nw[c] == 0.0:
                    seen[count] = c
                    count += 1
                nw[c] += weights[p]
            tot[ci] -= ki
            best = ci
            best_gain = nw[ci] - gamma * ki * tot[ci] / m2
            for t in range(count):
                c = seen[t]
                gain = nw[c] - gamma * ki * tot[c] / m2
                if gain > best_gain + eps:
                    best_gain = gain
                    best = c
            for t in range(count):
                nw[seen[t]] = 0.0
            tot[best] += ki
            if best != ci:
                comm[i] = best
                moved += 1
        moves += moved
        if moved == 0:
            break
    out[:] = comm
    return moves


def lp_sweep(indptr, indices, labels, order, u):
    """One asynchronous label-propagation sweep, in place on ``labels``.

    Each node takes its neighbourhood's most frequent label; ties are broken
    by ``u[i]`` (uniform in [0, 1)). Returns the number of label changes.
    """
    out = labels
    indptr, indices, labels = indptr.tolist(), indices.tolist(), labels.tolist()
    order, u = order.tolist(), u.tolist()
    n = len(labels)
    cnt = [0] * n
    seen = [0] * n
    changed = 0
    for i in order:
        if indptr[i] == indptr[i + 1]:
            continue
        count = 0
        for p in range(indptr[i], indptr[i + 1]):
            lab = labels[indices[p]]
            if cnt[lab] == 0:
                seen[count] = lab
                count += 1
            cnt[lab] += 1
        top = 0
        for t in range(count):
            if cnt[seen[t]] > top:
                top = cnt[seen[t]]
        ties = 0
        for t in range(count):
            if cnt[seen[t]] == top:
                ties += 1
        pick = int(u[i] * ties)
        for t in range(count):
            if cnt[seen[t]] == top:
                if pick == 0:
                    if labels[i] != seen[t]:
                        labels[i] = seen[t]
                        changed += 1
                    break
                pick -= 1
        for t in range(count):
            cnt[seen[t]] = 0
    out[:] = labels
    return changed


def lp_stable(indptr, indices, labels):
    """True when every node's label is one of its neighbourhood's modal labels."""
    indptr, indices, labels = indptr.tolist(), indices.tolist(), labels.tolist()
    n = len(labels)
    cnt = [0] * n
    seen = [0] * n
    for i in range(n):
        if indptr[i] == indptr[i + 1]:
            continue
        count = 0
        for p in range(indptr[i], indptr[i + 1]):
            lab = labels[indices[p]]
            if cnt[lab] == 0:
                seen[count] = lab
                count += 1
            cnt[lab] += 1
        top = 0
        for t in range(count):
            if cnt[seen[t]] > top:
                top = cnt[seen[t]]
        own = cnt[labels[i]]
        for t in range(count):
            cnt[seen[t]] = 0
        if own < top:
            return False
    return True
