"""Compiled inner loops shared by the per-round API and the batch simulators.

Every kernel draws from a ``numpy.random.Generator`` passed in by the caller,
so the Python-level step API and the fused loops consume the stream in exactly
the same order.
"""

import numba
import numpy as np

PUSH = 0
PULL = 1
PUSHPULL = 2


@numba.njit(cache=True)
def _skip_fill(buf, idx, total, log_q, rng):
    """Append pair indices after ``idx`` until ``buf`` is full or ``total`` is passed."""
    m = 0
    cap = buf.shape[0]
    while m < cap:
        if log_q == 0.0:
            idx += 1
        else:
            # inversion: ceil(log U / log(1-p)) is Geometric(p) on {1, 2, ...}
            gap = np.int64(np.ceil(np.log(1.0 - rng.random()) / log_q))
            idx += gap if gap > 0 else 1
        if idx >= total:
            break
        buf[m] = idx
        m += 1
    return m, idx


@numba.njit(cache=True)
def sample_edges(n, p, rng):
    """Edge list (i < j) of one G(n, p) sample, sorted by (j, i).

    Geometric gap skipping over the pair index j(j-1)/2 + i.
    """
    total = n * (n - 1) // 2
    if p <= 0.0 or total == 0:
        empty = np.empty(0, dtype=np.int64)
        return empty, empty.copy()
    log_q = np.log1p(-p) if p < 1.0 else 0.0
    expected = p * total
    cap = min(int(expected + 6.0 * np.sqrt(expected) + 16.0), total)
    buf = np.empty(cap, dtype=np.int64)
    m, idx = _skip_fill(buf, -1, total, log_q, rng)
    while idx < total:
        more = np.empty(cap, dtype=np.int64)
        extra, idx = _skip_fill(more, idx, total, log_q, rng)
        buf = np.concatenate((buf[:m], more[:extra]))
        m += extra
    src = np.empty(m, dtype=np.int64)
    dst = np.empty(m, dtype=np.int64)
    for e in range(m):
        x = buf[e]
        j = np.int64((1.0 + np.sqrt(1.0 + 8.0 * x)) / 2.0)
        while j * (j - 1) // 2 > x:
            j -= 1
        while (j + 1) * j // 2 <= x:
            j += 1
        src[e] = x - j * (j - 1) // 2
        dst[e] = j
    return src, dst


@numba.njit(cache=True)
def build_csr(n, src, dst):
    # with edges sorted by (j, i) every neighbor list comes out sorted
    deg = np.zeros(n, dtype=np.int64)
    for e in range(src.shape[0]):
        deg[src[e]] += 1
        deg[dst[e]] += 1
    indptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        indptr[v + 1] = indptr[v] + deg[v]
    fill = indptr[:-1].copy()
    indices = np.empty(indptr[n], dtype=np.int64)
    for e in range(src.shape[0]):
        u = src[e]
        w = dst[e]
        indices[fill[u]] = w
        fill[u] += 1
        indices[fill[w]] = u
        fill[w] += 1
    return indptr, indices


@numba.njit(cache=True)
def sample_csr(n, p, rng):
    src, dst = sample_edges(n, p, rng)
    return build_csr(n, src, dst)


@numba.njit(cache=True)
def pick_neighbor(indptr, indices, v, rng):
    deg = indptr[v + 1] - indptr[v]
    if deg == 0:
        return -1
    return indices[indptr[v] + int(rng.random() * deg)]


@numba.njit(cache=True)
def draw_choices(indptr, indices, active, rng):
    """One uniform neighbor per active non-isolated node, -1 otherwise."""
    n = active.shape[0]
    choices = np.full(n, -1, dtype=np.int64)
    for v in range(n):
        # same draw as pick_neighbor, inlined: passing the generator down costs more than the draw
        if active[v]:
            deg = indptr[v + 1] - indptr[v]
            if deg > 0:
                choices[v] = indices[indptr[v] + int(rng.random() * deg)]
    return choices


@numba.njit(cache=True)
def active_mask(kind, informed):
    n = informed.shape[0]
    out = np.empty(n, dtype=np.bool_)
    for v in range(n):
        if kind == PUSH:
            out[v] = informed[v]
        elif kind == PULL:
            out[v] = not informed[v]
        else:
            out[v] = True
    return out


@numba.njit(cache=True)
def apply_choices(kind, informed, choices):
    """Flags for uninformed nodes: pushed by an informed chooser / pulled from one.

    Reads only the round-start ``informed`` array.
    """
    n = informed.shape[0]
    pushed = np.zeros(n, dtype=np.bool_)
    pulled = np.zeros(n, dtype=np.bool_)
    for v in range(n):
        w = choices[v]
        if w < 0:
            continue
        if informed[v]:
            if kind != PULL and not informed[w]:
                pushed[w] = True
        elif kind != PUSH and informed[w]:
            pulled[v] = True
    return pushed, pulled


@numba.njit(cache=True)
def run_spread(n, p, kind, max_rounds, rng):
    """Full spread from node 0. Returns (counts, finished)."""
    informed = np.zeros(n, dtype=np.bool_)
    informed[0] = True
    count = 1
    counts = np.empty(min(max_rounds + 1, 64), dtype=np.int64)
    counts[0] = 1
    t = 0
    while count < n and t < max_rounds:
        if t + 1 == counts.shape[0]:
            grown = np.empty(min(2 * counts.shape[0], max_rounds + 1), dtype=np.int64)
            grown[: t + 1] = counts[: t + 1]
            counts = grown
        indptr, indices = sample_csr(n, p, rng)
        choices = draw_choices(indptr, indices, active_mask(kind, informed), rng)
        pushed, pulled = apply_choices(kind, informed, choices)
        for v in range(n):
            if pushed[v] or pulled[v]:
                informed[v] = True
                count += 1
        t += 1
        counts[t] = count
    return counts[: t + 1].copy(), count == n


@numba.njit(cache=True)
def single_rounds(n, p, k, kind, samples, probe1, probe2, rng):
    """Independent single rounds from the informed set {0..k-1}.

    Per round: newly informed, probe indicators, pushed uninformed nodes,
    pushed-and-pulled nodes.
    """
    informed = np.zeros(n, dtype=np.bool_)
    informed[:k] = True
    active = active_mask(kind, informed)
    newly = np.empty(samples, dtype=np.int64)
    x1 = np.empty(samples, dtype=np.bool_)
    x2 = np.empty(samples, dtype=np.bool_)
    n_pushed = np.empty(samples, dtype=np.int64)
    n_both = np.empty(samples, dtype=np.int64)
    for s in range(samples):
        indptr, indices = sample_csr(n, p, rng)
        choices = draw_choices(indptr, indices, active, rng)
        pushed, pulled = apply_choices(kind, informed, choices)
        c_new = 0
        c_push = 0
        c_both = 0
        for v in range(k, n):
            if pushed[v] or pulled[v]:
                c_new += 1
            if pushed[v]:
                c_push += 1
                if pulled[v]:
                    c_both += 1
        newly[s] = c_new
        n_pushed[s] = c_push
        n_both[s] = c_both
        x1[s] = pushed[probe1] or pulled[probe1]
        x2[s] = pushed[probe2] or pulled[probe2] if probe2 >= 0 else False
    return newly, x1, x2, n_pushed, n_both
