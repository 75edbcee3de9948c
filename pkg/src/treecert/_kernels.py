"""Compiled sampler for the randomized triangle-lemma sweep.

Each sample draws a fresh uniform tree (random Prüfer code, linear-time
decode), an internal node t, endpoints u, v in different branches at t, a third
node w != t and a random S with u, v, w in S and t not in S.  Path membership
through t is decided from branch labels of the tree rooted at t.
"""
import numpy as np
from numba import njit


@njit(cache=True)
def _decode_parent(seq, n, degree, parent):
    for x in range(1, n + 1):
        degree[x] = 1
    for x in seq:
        degree[x] += 1
    ptr = 1
    while degree[ptr] != 1:
        ptr += 1
    leaf = ptr
    for x in seq:
        parent[leaf] = x
        degree[leaf] -= 1
        degree[x] -= 1
        if degree[x] == 1 and x < ptr:
            leaf = x
        else:
            ptr += 1
            while degree[ptr] != 1:
                ptr += 1
            leaf = ptr
    parent[leaf] = n
    parent[n] = 0


@njit(cache=True)
def triangle_kernel(n, samples, seed, record):
    """Returns (counts, recorded samples, first violation).

    counts = [samples, degenerate, violations, first_violation_index].
    Recorded rows hold the first ``record`` samples for replay in Python:
    Prüfer codes, (u, t, v, w), membership of S and the two verdicts.
    """
    np.random.seed(seed)
    seq = np.empty(n - 2, dtype=np.int64)
    degree = np.zeros(n + 1, dtype=np.int64)
    parent = np.zeros(n + 1, dtype=np.int64)
    start = np.zeros(n + 2, dtype=np.int64)
    nbrs = np.zeros(2 * (n - 1), dtype=np.int64)
    fill = np.zeros(n + 1, dtype=np.int64)
    branch = np.zeros(n + 1, dtype=np.int64)
    queue = np.zeros(n, dtype=np.int64)
    seen = np.zeros(n + 1, dtype=np.int64)
    in_s = np.zeros(n + 1, dtype=np.bool_)

    counts = np.zeros(4, dtype=np.int64)
    counts[3] = -1
    rec_seq = np.zeros((record, n - 2), dtype=np.int64)
    rec_nodes = np.zeros((record, 4), dtype=np.int64)
    rec_s = np.zeros((record, n + 1), dtype=np.bool_)
    rec_ok = np.zeros((record, 2), dtype=np.bool_)
    bad_seq = np.zeros(n - 2, dtype=np.int64)
    bad_nodes = np.zeros(4, dtype=np.int64)
    bad_s = np.zeros(n + 1, dtype=np.bool_)

    for k in range(samples):
        for i in range(n - 2):
            seq[i] = np.random.randint(1, n + 1)
        _decode_parent(seq, n, degree, parent)

        # adjacency in CSR form from the parent array
        for x in range(n + 2):
            start[x] = 0
        for x in range(1, n + 1):
            p = parent[x]
            if p != 0:
                start[x + 1] += 1
                start[p + 1] += 1
        for x in range(1, n + 1):
            start[x + 1] += start[x]
        for x in range(1, n + 1):
            fill[x] = start[x]
        for x in range(1, n + 1):
            p = parent[x]
            if p != 0:
                nbrs[fill[x]] = p
                fill[x] += 1
                nbrs[fill[p]] = x
                fill[p] += 1

        # t: uniform over internal nodes
        t = np.random.randint(1, n + 1)
        while start[t + 1] - start[t] < 2:
            t = np.random.randint(1, n + 1)

        # branch[x] = the neighbour of t whose side of the tree contains x
        stamp = k + 1
        seen[t] = stamp
        branch[t] = 0
        head = 0
        tail = 0
        for j in range(start[t], start[t + 1]):
            c = nbrs[j]
            branch[c] = c
            seen[c] = stamp
            queue[tail] = c
            tail += 1
        while head < tail:
            x = queue[head]
            head += 1
            for j in range(start[x], start[x + 1]):
                y = nbrs[j]
                if seen[y] != stamp:
                    seen[y] = stamp
                    branch[y] = branch[x]
                    queue[tail] = y
                    tail += 1

        u = np.random.randint(1, n + 1)
        while u == t:
            u = np.random.randint(1, n + 1)
        v = np.random.randint(1, n + 1)
        while v == t or branch[v] == branch[u]:
            v = np.random.randint(1, n + 1)
        w = np.random.randint(1, n + 1)
        while w == t:
            w = np.random.randint(1, n + 1)

        for x in range(1, n + 1):
            in_s[x] = np.random.randint(0, 2) == 1
        in_s[u] = True
        in_s[v] = True
        in_s[w] = True
        in_s[t] = False

        ok_vw = in_s[v] and in_s[w] and not in_s[t] and v != w and branch[v] != branch[w]
        ok_wu = in_s[w] and in_s[u] and not in_s[t] and w != u and branch[w] != branch[u]
        counts[0] += 1
        if w == u or w == v:
            counts[1] += 1
        if not (ok_vw or ok_wu):
            counts[2] += 1
            if counts[3] < 0:
                counts[3] = k
                bad_seq[:] = seq
                bad_nodes[0] = u
                bad_nodes[1] = t
                bad_nodes[2] = v
                bad_nodes[3] = w
                bad_s[:] = in_s
        if k < record:
            rec_seq[k, :] = seq
            rec_nodes[k, 0] = u
            rec_nodes[k, 1] = t
            rec_nodes[k, 2] = v
            rec_nodes[k, 3] = w
            rec_s[k, :] = in_s
            rec_ok[k, 0] = ok_vw
            rec_ok[k, 1] = ok_wu
    return counts, rec_seq, rec_nodes, rec_s, rec_ok, bad_seq, bad_nodes, bad_s
