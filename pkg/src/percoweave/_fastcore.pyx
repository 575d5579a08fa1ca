# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled sampling and cluster kernels.

Mirrors ``_purecore`` function for function and draw for draw; see that
module's docstring for the shared uniform-consumption contract.  Given
the same bit generator state and inputs, both backends return
bit-identical outputs.
"""

import numpy as np

cimport numpy as cnp
from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.math cimport exp
from numpy.random cimport bitgen_t

cnp.import_array()

BACKEND_NAME = "compiled"

K_PRODUCT = 0
K_EXPONENTIAL = 1
K_GEOMETRIC = 2
K_CONSTANT = 3

ctypedef cnp.uint8_t u8
ctypedef cnp.int32_t i32
ctypedef cnp.int64_t i64
ctypedef cnp.float64_t f8


cdef inline double _kappa(int code, double ka, double kb, double z) noexcept nogil:
    if code == 0:
        return z
    if code == 1:
        return 1.0 - exp(-ka * z)
    if code == 2:
        return z / (kb + z)
    return ka


cdef inline bitgen_t *_bitgen(object bit_generator):
    return <bitgen_t *> PyCapsule_GetPointer(bit_generator.capsule, "BitGenerator")


cdef inline void _pair(bitgen_t *rng,
                       const u8[::1] kind, const f8[::1] par_a, const f8[::1] par_b,
                       const i64[::1] tab_indptr, const f8[::1] tab_cdf,
                       const f8[::1] tab_w, const f8[::1] tab_wbar,
                       const i32[::1] vertex_law, Py_ssize_t v,
                       f8[::1] w, f8[::1] wbar) noexcept nogil:
    cdef int k = vertex_law[v]
    cdef int c = kind[k]
    cdef double a, t, u
    cdef i64 j, hi
    if c == 0:
        w[v] = par_a[k]
        wbar[v] = par_b[k]
    elif c == 1:
        a = par_a[k]
        t = a + (1.0 - a) * rng.next_double(rng.state)
        w[v] = t
        wbar[v] = t
    else:
        u = rng.next_double(rng.state)
        j = tab_indptr[k]
        hi = tab_indptr[k + 1] - 1
        while j < hi and u >= tab_cdf[j]:
            j += 1
        w[v] = tab_w[j]
        wbar[v] = tab_wbar[j]


cdef inline i64 _reach_bfs(const i64[::1] out_indptr, const i64[::1] out_edge_ids,
                           const i32[::1] heads, const u8[::1] states,
                           Py_ssize_t source, const u8[::1] target_mask, bint use_mask,
                           bint early_exit, i64 epoch,
                           i64[::1] visited, i64[::1] queue,
                           int *reached) noexcept nogil:
    cdef Py_ssize_t qi = 0, qn = 1, v, h
    cdef i64 e, k, size = 1
    reached[0] = 1 if (use_mask and target_mask[source]) else 0
    if reached[0] and early_exit:
        return 1
    visited[source] = epoch
    queue[0] = source
    while qi < qn:
        v = <Py_ssize_t> queue[qi]
        qi += 1
        for k in range(out_indptr[v], out_indptr[v + 1]):
            e = out_edge_ids[k]
            if states[e] == 0:
                continue
            h = <Py_ssize_t> heads[e]
            if visited[h] == epoch:
                continue
            visited[h] = epoch
            size += 1
            if use_mask and target_mask[h]:
                reached[0] = 1
                if early_exit:
                    return size
            queue[qn] = h
            qn += 1
    return size


def sample_vertex_weights(object bit_generator,
                          const u8[::1] kind, const f8[::1] par_a, const f8[::1] par_b,
                          const i64[::1] tab_indptr, const f8[::1] tab_cdf,
                          const f8[::1] tab_w, const f8[::1] tab_wbar,
                          const i32[::1] vertex_law,
                          f8[::1] w_out, f8[::1] wbar_out):
    """Fill per-vertex weight pairs, one (or zero) uniforms per vertex in order."""
    cdef bitgen_t *rng = _bitgen(bit_generator)
    cdef Py_ssize_t v, n = vertex_law.shape[0]
    with bit_generator.lock, nogil:
        for v in range(n):
            _pair(rng, kind, par_a, par_b, tab_indptr, tab_cdf, tab_w, tab_wbar,
                  vertex_law, v, w_out, wbar_out)


def sample_edge_states(object bit_generator,
                       const i32[::1] tails, const i32[::1] heads,
                       int kernel_code, double kernel_a, double kernel_b,
                       const f8[::1] w, const f8[::1] wbar,
                       u8[::1] states_out):
    """Open each edge independently given weights: one uniform per edge in order."""
    cdef bitgen_t *rng = _bitgen(bit_generator)
    cdef Py_ssize_t e, m = tails.shape[0]
    cdef double u, z
    with bit_generator.lock, nogil:
        for e in range(m):
            u = rng.next_double(rng.state)
            z = w[tails[e]] * wbar[heads[e]]
            states_out[e] = 1 if u < _kappa(kernel_code, kernel_a, kernel_b, z) else 0


def bfs_cluster(const i64[::1] out_indptr, const i64[::1] out_edge_ids,
                const i32[::1] heads, const u8[::1] states,
                Py_ssize_t source, const u8[::1] boundary_mask, bint early_exit=False):
    """Directed cluster of the source over open edges.

    Returns (size, reached_boundary, frontier_distance); with early_exit
    the scan stops at the first boundary touch (size is then a lower bound).
    """
    cdef Py_ssize_t n = out_indptr.shape[0] - 1
    dist_arr = np.full(n, -1, np.int32)
    queue_arr = np.empty(n, np.int64)
    cdef i32[::1] dist = dist_arr
    cdef i64[::1] queue = queue_arr
    cdef bint use_mask = boundary_mask.shape[0] > 0
    cdef Py_ssize_t qi = 0, qn = 1, v, h
    cdef i64 e, k, size = 1
    cdef int reached = 0
    cdef i32 maxd = 0, dv
    with nogil:
        dist[source] = 0
        queue[0] = source
        if use_mask and boundary_mask[source]:
            reached = 1
        if not (reached and early_exit):
            while qi < qn:
                v = <Py_ssize_t> queue[qi]
                qi += 1
                dv = dist[v]
                for k in range(out_indptr[v], out_indptr[v + 1]):
                    e = out_edge_ids[k]
                    if states[e] == 0:
                        continue
                    h = <Py_ssize_t> heads[e]
                    if dist[h] >= 0:
                        continue
                    dist[h] = dv + 1
                    size += 1
                    if dist[h] > maxd:
                        maxd = dist[h]
                    if use_mask and boundary_mask[h]:
                        reached = 1
                        if early_exit:
                            qi = qn
                            break
                    queue[qn] = h
                    qn += 1
    return int(size), bool(reached), int(maxd)


def two_phase_replications(object bit_generator, Py_ssize_t replications,
                           const i32[::1] tails, const i32[::1] heads,
                           const i64[::1] out_indptr, const i64[::1] out_edge_ids,
                           const u8[::1] kind, const f8[::1] par_a, const f8[::1] par_b,
                           const i64[::1] tab_indptr, const f8[::1] tab_cdf,
                           const f8[::1] tab_w, const f8[::1] tab_wbar,
                           const i32[::1] vertex_law,
                           int kernel_code, double kernel_a, double kernel_b,
                           int event_kind,
                           const i64[::1] path_indptr, const i64[::1] path_edges,
                           Py_ssize_t source, const u8[::1] target_mask,
                           bint need_sizes,
                           u8[::1] hits_out, i64[::1] sizes_out):
    """Repeated two-phase sampling (all weights, then all edges) plus event
    evaluation: event_kind 0 scans explicit member paths, 1 tests directed
    reachability from ``source`` into ``target_mask``."""
    cdef bitgen_t *rng = _bitgen(bit_generator)
    cdef Py_ssize_t n = vertex_law.shape[0]
    cdef Py_ssize_t m = tails.shape[0]
    cdef Py_ssize_t n_members = path_indptr.shape[0] - 1
    w_arr = np.empty(n, np.float64)
    wb_arr = np.empty(n, np.float64)
    st_arr = np.empty(m, np.uint8)
    vis_arr = np.zeros(n, np.int64)
    q_arr = np.empty(n, np.int64)
    cdef f8[::1] w = w_arr
    cdef f8[::1] wbar = wb_arr
    cdef u8[::1] states = st_arr
    cdef i64[::1] visited = vis_arr
    cdef i64[::1] queue = q_arr
    cdef Py_ssize_t rep, v, e, i, j
    cdef double u, z
    cdef int hit, ok, reached
    cdef i64 size, epoch = 0
    with bit_generator.lock, nogil:
        for rep in range(replications):
            for v in range(n):
                _pair(rng, kind, par_a, par_b, tab_indptr, tab_cdf, tab_w, tab_wbar,
                      vertex_law, v, w, wbar)
            for e in range(m):
                u = rng.next_double(rng.state)
                z = w[tails[e]] * wbar[heads[e]]
                states[e] = 1 if u < _kappa(kernel_code, kernel_a, kernel_b, z) else 0
            hit = 0
            size = 0
            reached = 0
            if event_kind == 0:
                for i in range(n_members):
                    ok = 1
                    for j in range(path_indptr[i], path_indptr[i + 1]):
                        if states[path_edges[j]] == 0:
                            ok = 0
                            break
                    if ok:
                        hit = 1
                        break
                if need_sizes:
                    epoch += 1
                    size = _reach_bfs(out_indptr, out_edge_ids, heads, states,
                                      source, target_mask, 0, 0, epoch,
                                      visited, queue, &reached)
            else:
                epoch += 1
                size = _reach_bfs(out_indptr, out_edge_ids, heads, states,
                                  source, target_mask, 1, not need_sizes, epoch,
                                  visited, queue, &reached)
                hit = reached
            hits_out[rep] = <u8> hit
            sizes_out[rep] = size


def survival_replications(object bit_generator, Py_ssize_t replications,
                          const i64[::1] out_indptr, const i64[::1] out_edge_ids,
                          const i32[::1] heads,
                          const u8[::1] kind, const f8[::1] par_a, const f8[::1] par_b,
                          const i64[::1] tab_indptr, const f8[::1] tab_cdf,
                          const f8[::1] tab_w, const f8[::1] tab_wbar,
                          const i32[::1] vertex_law,
                          int kernel_code, double kernel_a, double kernel_b,
                          Py_ssize_t source, const u8[::1] boundary_mask,
                          u8[::1] hits_out):
    """Lazy boundary-reach sweep: weights and edge uniforms are drawn only
    when the breadth-first search first needs them (see _purecore for the
    exact order); each replication stops at the first boundary hit."""
    cdef bitgen_t *rng = _bitgen(bit_generator)
    cdef Py_ssize_t n = vertex_law.shape[0]
    w_arr = np.zeros(n, np.float64)
    wb_arr = np.zeros(n, np.float64)
    touched_arr = np.zeros(n, np.int64)
    vis_arr = np.zeros(n, np.int64)
    q_arr = np.empty(n, np.int64)
    cdef f8[::1] w = w_arr
    cdef f8[::1] wbar = wb_arr
    cdef i64[::1] touched = touched_arr
    cdef i64[::1] visited = vis_arr
    cdef i64[::1] queue = q_arr
    cdef Py_ssize_t rep, qi, qn, v, h
    cdef i64 e, k, epoch
    cdef double u, wv
    cdef int hit
    with bit_generator.lock, nogil:
        for rep in range(replications):
            if boundary_mask[source]:
                hits_out[rep] = 1
                continue
            epoch = rep + 1
            _pair(rng, kind, par_a, par_b, tab_indptr, tab_cdf, tab_w, tab_wbar,
                  vertex_law, source, w, wbar)
            touched[source] = epoch
            visited[source] = epoch
            queue[0] = source
            qn = 1
            qi = 0
            hit = 0
            while qi < qn and hit == 0:
                v = <Py_ssize_t> queue[qi]
                qi += 1
                wv = w[v]
                for k in range(out_indptr[v], out_indptr[v + 1]):
                    e = out_edge_ids[k]
                    h = <Py_ssize_t> heads[e]
                    if visited[h] == epoch:
                        continue
                    if touched[h] != epoch:
                        _pair(rng, kind, par_a, par_b, tab_indptr, tab_cdf,
                              tab_w, tab_wbar, vertex_law, h, w, wbar)
                        touched[h] = epoch
                    u = rng.next_double(rng.state)
                    if u < _kappa(kernel_code, kernel_a, kernel_b, wv * wbar[h]):
                        visited[h] = epoch
                        if boundary_mask[h]:
                            hit = 1
                            break
                        queue[qn] = h
                        qn += 1
            hits_out[rep] = <u8> hit
