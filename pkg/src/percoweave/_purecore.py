"""Pure-Python sampling and cluster kernels: the fallback backend.

This module and the compiled extension ``_fastcore`` implement the same
functions with a shared draw-for-draw contract, so that with the same
bit generator and inputs both produce bit-identical outputs:

* vertex weights — one uniform per vertex whose law is not a point mass,
  consumed in vertex order (point masses consume nothing);
* edge states — one uniform per edge, in edge-enumeration order, compared
  against the kernel value of (tail infectivity x head susceptibility);
* lazy survival sweep — breadth-first from the source; per popped vertex
  its out-edges are scanned in enumeration order; an edge into an
  already-reached vertex consumes no draw; the first time a head vertex
  is needed its weight pair is sampled immediately before that edge's
  uniform; the replication stops the moment a boundary vertex is reached.

The exponential kernel uses the C library's scalar ``exp`` on both sides
(not numpy's vectorized variant, which may differ in the last bit).
"""

from __future__ import annotations

import math

import numpy as np

BACKEND_NAME = "pure"

K_PRODUCT = 0
K_EXPONENTIAL = 1
K_GEOMETRIC = 2
K_CONSTANT = 3


def _kappa_scalar(code: int, ka: float, kb: float, z: float) -> float:
    if code == K_PRODUCT:
        return z
    if code == K_EXPONENTIAL:
        return 1.0 - math.exp(-ka * z)
    if code == K_GEOMETRIC:
        return z / (kb + z)
    return ka


def _kappa_block(code: int, ka: float, kb: float, z: np.ndarray) -> np.ndarray:
    if code == K_PRODUCT:
        return z
    if code == K_EXPONENTIAL:
        out = np.fromiter(
            (math.exp(-ka * t) for t in z.tolist()), np.float64, count=z.size
        )
        np.subtract(1.0, out, out=out)
        return out
    if code == K_GEOMETRIC:
        return z / (kb + z)
    return np.full(z.size, ka)


def _sample_pair_scalar(
    rnd, kind, par_a, par_b, tab_indptr, tab_cdf, tab_w, tab_wbar, vertex_law, v, w, wbar
):
    k = vertex_law[v]
    c = kind[k]
    if c == 0:
        w[v] = par_a[k]
        wbar[v] = par_b[k]
    elif c == 1:
        a = par_a[k]
        t = a + (1.0 - a) * rnd()
        w[v] = t
        wbar[v] = t
    else:
        u = rnd()
        j = tab_indptr[k]
        hi = tab_indptr[k + 1] - 1
        while j < hi and u >= tab_cdf[j]:
            j += 1
        w[v] = tab_w[j]
        wbar[v] = tab_wbar[j]


def sample_vertex_weights(
    bit_generator,
    kind,
    par_a,
    par_b,
    tab_indptr,
    tab_cdf,
    tab_w,
    tab_wbar,
    vertex_law,
    w_out,
    wbar_out,
):
    """Fill per-vertex weight pairs, one (or zero) uniforms per vertex in order."""
    rnd = np.random.Generator(bit_generator).random
    for v in range(len(vertex_law)):
        _sample_pair_scalar(
            rnd, kind, par_a, par_b, tab_indptr, tab_cdf, tab_w, tab_wbar,
            vertex_law, v, w_out, wbar_out,
        )


def sample_edge_states(
    bit_generator, tails, heads, kernel_code, kernel_a, kernel_b, w, wbar, states_out
):
    """Open each edge independently given weights: one uniform per edge in order."""
    gen = np.random.Generator(bit_generator)
    u = gen.random(len(tails))
    z = w[tails] * wbar[heads]
    p = _kappa_block(kernel_code, kernel_a, kernel_b, z)
    states_out[:] = u < p


def bfs_cluster(out_indptr, out_edge_ids, heads, states, source, boundary_mask, early_exit=False):
    """Directed cluster of the source over open edges.

    Returns (size, reached_boundary, frontier_distance); with early_exit
    the scan stops at the first boundary touch (size is then a lower bound).
    """
    n = len(out_indptr) - 1
    dist = np.full(n, -1, np.int32)
    dist[source] = 0
    reached = bool(boundary_mask[source]) if len(boundary_mask) else False
    if reached and early_exit:
        return 1, True, 0
    queue = [int(source)]
    qi = 0
    size = 1
    maxd = 0
    while qi < len(queue):
        v = queue[qi]
        qi += 1
        dv = dist[v]
        for e in out_edge_ids[out_indptr[v] : out_indptr[v + 1]]:
            if not states[e]:
                continue
            h = int(heads[e])
            if dist[h] >= 0:
                continue
            dist[h] = dv + 1
            size += 1
            if dist[h] > maxd:
                maxd = int(dist[h])
            if len(boundary_mask) and boundary_mask[h]:
                reached = True
                if early_exit:
                    return size, True, maxd
            queue.append(h)
    return size, reached, maxd


def _fill_weights_block(
    kind, par_a, par_b, tab_indptr, tab_cdf, tab_w, tab_wbar, vertex_law,
    order, slots, kinds1, kinds2, base_w, base_wb, u, w, wbar,
):
    np.copyto(w, base_w)
    np.copyto(wbar, base_wb)
    if kinds1.size:
        a = par_a[slots[kinds1]]
        t = a + (1.0 - a) * u[kinds1]
        w[order[kinds1]] = t
        wbar[order[kinds1]] = t
    if kinds2.size:
        for k in np.unique(slots[kinds2]):
            sel = kinds2[slots[kinds2] == k]
            lo, hi = int(tab_indptr[k]), int(tab_indptr[k + 1])
            idx = lo + np.searchsorted(tab_cdf[lo:hi], u[sel], side="right")
            w[order[sel]] = tab_w[idx]
            wbar[order[sel]] = tab_wbar[idx]


def two_phase_replications(
    bit_generator,
    replications,
    tails,
    heads,
    out_indptr,
    out_edge_ids,
    kind,
    par_a,
    par_b,
    tab_indptr,
    tab_cdf,
    tab_w,
    tab_wbar,
    vertex_law,
    kernel_code,
    kernel_a,
    kernel_b,
    event_kind,
    path_indptr,
    path_edges,
    source,
    target_mask,
    need_sizes,
    hits_out,
    sizes_out,
):
    """Repeated two-phase sampling (all weights, then all edges) plus event
    evaluation: event_kind 0 scans explicit member paths, 1 tests directed
    reachability from ``source`` into ``target_mask``."""
    gen = np.random.Generator(bit_generator)
    n = len(vertex_law)
    m = len(tails)
    order = np.flatnonzero(kind[vertex_law] != 0)
    slots = vertex_law[order]
    kinds1 = np.flatnonzero(kind[slots] == 1)
    kinds2 = np.flatnonzero(kind[slots] == 2)
    base_w = par_a[vertex_law].astype(np.float64)
    base_wb = par_b[vertex_law].astype(np.float64)
    w = np.empty(n)
    wbar = np.empty(n)
    states = np.empty(m, np.uint8)
    members = [
        path_edges[path_indptr[i] : path_indptr[i + 1]]
        for i in range(len(path_indptr) - 1)
    ]
    for rep in range(replications):
        u_w = gen.random(order.size)
        _fill_weights_block(
            kind, par_a, par_b, tab_indptr, tab_cdf, tab_w, tab_wbar, vertex_law,
            order, slots, kinds1, kinds2, base_w, base_wb, u_w, w, wbar,
        )
        u_e = gen.random(m)
        z = w[tails] * wbar[heads]
        p = _kappa_block(kernel_code, kernel_a, kernel_b, z)
        states[:] = u_e < p

        hit = 0
        size = 0
        if event_kind == 0:
            for seg in members:
                if states[seg].all():
                    hit = 1
                    break
            if need_sizes:
                size, _, _ = bfs_cluster(
                    out_indptr, out_edge_ids, heads, states, source,
                    np.zeros(0, np.uint8),
                )
        else:
            size, reached, _ = bfs_cluster(
                out_indptr, out_edge_ids, heads, states, source, target_mask,
                early_exit=not need_sizes,
            )
            hit = 1 if reached else 0
        hits_out[rep] = hit
        sizes_out[rep] = size


def survival_replications(
    bit_generator,
    replications,
    out_indptr,
    out_edge_ids,
    heads,
    kind,
    par_a,
    par_b,
    tab_indptr,
    tab_cdf,
    tab_w,
    tab_wbar,
    vertex_law,
    kernel_code,
    kernel_a,
    kernel_b,
    source,
    boundary_mask,
    hits_out,
):
    """Lazy boundary-reach sweep: weights and edge uniforms are drawn only
    when the breadth-first search first needs them (see module docstring
    for the exact order); each replication stops at the first boundary hit."""
    rnd = np.random.Generator(bit_generator).random
    n = len(vertex_law)
    w = np.zeros(n)
    wbar = np.zeros(n)
    touched = np.zeros(n, np.int64)
    visited = np.zeros(n, np.int64)
    queue = np.zeros(n, np.int64)
    for rep in range(replications):
        if boundary_mask[source]:
            hits_out[rep] = 1
            continue
        epoch = rep + 1
        _sample_pair_scalar(
            rnd, kind, par_a, par_b, tab_indptr, tab_cdf, tab_w, tab_wbar,
            vertex_law, source, w, wbar,
        )
        touched[source] = epoch
        visited[source] = epoch
        queue[0] = source
        qn = 1
        qi = 0
        hit = 0
        while qi < qn and not hit:
            v = int(queue[qi])
            qi += 1
            wv = w[v]
            for e in out_edge_ids[out_indptr[v] : out_indptr[v + 1]]:
                h = int(heads[e])
                if visited[h] == epoch:
                    continue
                if touched[h] != epoch:
                    _sample_pair_scalar(
                        rnd, kind, par_a, par_b, tab_indptr, tab_cdf, tab_w,
                        tab_wbar, vertex_law, h, w, wbar,
                    )
                    touched[h] = epoch
                u = rnd()
                if u < _kappa_scalar(kernel_code, kernel_a, kernel_b, wv * wbar[h]):
                    visited[h] = epoch
                    if boundary_mask[h]:
                        hit = 1
                        break
                    queue[qn] = h
                    qn += 1
        hits_out[rep] = hit
