"""Pure vs compiled sampling backends: bit-identical outputs, shared draw
budget, and agreement with an independent reachability oracle."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from percoweave import backend
from percoweave.graphs import build_from_edge_list, build_square_lattice, lattice_border
from percoweave.weights import DiscreteTable, IdenticalUniform, LawMap, PointMass

BACKENDS = [backend.get_backend(name) for name in backend.available_backends()]
PAIRED = len(BACKENDS) == 2


def law_args(laws):
    return (
        laws.kind, laws.par_a, laws.par_b, laws.tab_indptr,
        laws.tab_cdf, laws.tab_w, laws.tab_wbar, laws.vertex_law,
    )


def compiled_laws(law, graph, overrides=None):
    return LawMap(law, overrides or {}).compile(graph.vertex_count)


def three_atom():
    return DiscreteTable(
        [
            ((0, 0), Fraction(3, 5)),
            ((Fraction(1, 2), 1), Fraction(1, 5)),
            ((1, Fraction(1, 2)), Fraction(1, 5)),
        ]
    )


def member_arrays(paths):
    indptr = np.zeros(len(paths) + 1, np.int64)
    flat: list[int] = []
    for i, p in enumerate(paths):
        flat.extend(p.edges)
        indptr[i + 1] = len(flat)
    return indptr, np.array(flat, np.int64)


KERNELS = [
    (backend.K_PRODUCT, 0.0, 0.0),
    (backend.K_EXPONENTIAL, 1.7, 0.0),
    (backend.K_GEOMETRIC, 0.0, 0.8),
    (backend.K_CONSTANT, 0.35, 0.0),
]


def test_compiled_backend_is_available():
    # the build in this repository includes the extension; the pure module
    # must exist regardless
    assert "pure" in backend.available_backends()
    assert backend.HAVE_COMPILED
    assert backend.BACKEND_NAME == "compiled"


def test_get_backend_rejects_unknown():
    from percoweave.errors import InvalidParameterError

    with pytest.raises(InvalidParameterError):
        backend.get_backend("vectorized")


@pytest.mark.skipif(not PAIRED, reason="compiled backend not built")
@pytest.mark.parametrize(
    "law,overrides",
    [
        (IdenticalUniform(Fraction(3, 10)), None),
        (PointMass(Fraction(1, 2), Fraction(3, 4)), None),
        (three_atom(), None),
        (
            IdenticalUniform(0),
            {0: PointMass(1, 1), 7: three_atom(), 12: PointMass(0, 0)},
        ),
    ],
)
def test_weight_sampling_parity(law, overrides):
    g = build_square_lattice(5)
    laws = compiled_laws(law, g, overrides)
    results = []
    for mod in BACKENDS:
        bg = np.random.PCG64(2024)
        w = np.empty(g.vertex_count)
        wb = np.empty(g.vertex_count)
        mod.sample_vertex_weights(bg, *law_args(laws), w, wb)
        probe = np.random.Generator(bg).random()  # same stream position after
        results.append((w, wb, probe))
    (w1, wb1, p1), (w2, wb2, p2) = results
    assert np.array_equal(w1, w2) and np.array_equal(wb1, wb2)
    assert p1 == p2


@pytest.mark.skipif(not PAIRED, reason="compiled backend not built")
def test_point_mass_consumes_no_draws():
    g = build_square_lattice(3)
    laws = compiled_laws(PointMass(Fraction(1, 3), Fraction(2, 3)), g)
    for mod in BACKENDS:
        bg = np.random.PCG64(5)
        before = bg.state["state"]["state"]
        w = np.empty(g.vertex_count)
        wb = np.empty(g.vertex_count)
        mod.sample_vertex_weights(bg, *law_args(laws), w, wb)
        assert bg.state["state"]["state"] == before
        assert np.all(w == 1 / 3) and np.all(wb == 2 / 3)


@pytest.mark.skipif(not PAIRED, reason="compiled backend not built")
@pytest.mark.parametrize("kcode,ka,kb", KERNELS)
def test_edge_sampling_parity(kcode, ka, kb):
    g = build_square_lattice(6)
    laws = compiled_laws(IdenticalUniform(Fraction(1, 5)), g)
    results = []
    for mod in BACKENDS:
        bg = np.random.PCG64(99)
        w = np.empty(g.vertex_count)
        wb = np.empty(g.vertex_count)
        mod.sample_vertex_weights(bg, *law_args(laws), w, wb)
        st_arr = np.empty(g.edge_count, np.uint8)
        mod.sample_edge_states(bg, g.tails, g.heads, kcode, ka, kb, w, wb, st_arr)
        probe = np.random.Generator(bg).random()
        results.append((st_arr, probe))
    (s1, p1), (s2, p2) = results
    assert np.array_equal(s1, s2)
    assert p1 == p2
    assert 0 < s1.sum() < g.edge_count  # nondegenerate at these parameters


def _closure_reachable(graph, states, source):
    """Independent oracle: boolean-matrix transitive closure."""
    n = graph.vertex_count
    adj = np.zeros((n, n), dtype=bool)
    for e in range(graph.edge_count):
        if states[e]:
            adj[graph.tails[e], graph.heads[e]] = True
    reach = np.eye(n, dtype=bool)
    for _ in range(n):
        new = reach | (reach @ adj)
        if np.array_equal(new, reach):
            break
        reach = new
    return np.flatnonzero(reach[source])


@pytest.mark.parametrize("mod", BACKENDS, ids=lambda m: m.BACKEND_NAME)
@pytest.mark.parametrize("seed", [0, 1, 2, 3])
def test_bfs_cluster_matches_transitive_closure(mod, seed):
    g = build_square_lattice(4)
    rng = np.random.default_rng(seed)
    states = (rng.random(g.edge_count) < 0.45).astype(np.uint8)
    border = lattice_border(g)
    mask = np.zeros(g.vertex_count, np.uint8)
    mask[border] = 1
    for source in (0, 5, 10):
        size, reached, maxd = mod.bfs_cluster(
            g.out_indptr, g.out_edge_ids, g.heads, states, source, mask
        )
        cluster = _closure_reachable(g, states, source)
        assert size == len(cluster)
        assert reached == bool(mask[cluster].any())
        assert 0 <= maxd < g.vertex_count


@pytest.mark.skipif(not PAIRED, reason="compiled backend not built")
def test_bfs_cluster_parity_and_early_exit():
    g = build_square_lattice(5)
    rng = np.random.default_rng(11)
    states = (rng.random(g.edge_count) < 0.6).astype(np.uint8)
    mask = np.zeros(g.vertex_count, np.uint8)
    mask[lattice_border(g)] = 1
    full = [
        mod.bfs_cluster(g.out_indptr, g.out_edge_ids, g.heads, states, 12, mask)
        for mod in BACKENDS
    ]
    assert full[0] == full[1]
    early = [
        mod.bfs_cluster(
            g.out_indptr, g.out_edge_ids, g.heads, states, 12, mask, True
        )
        for mod in BACKENDS
    ]
    assert early[0] == early[1]
    assert early[0][1] == full[0][1]  # same verdict, possibly smaller size


@pytest.mark.skipif(not PAIRED, reason="compiled backend not built")
@pytest.mark.parametrize("kcode,ka,kb", KERNELS)
@pytest.mark.parametrize("event_kind", [0, 1])
@pytest.mark.parametrize("need_sizes", [False, True])
def test_two_phase_replication_parity(kcode, ka, kb, event_kind, need_sizes):
    g = build_square_lattice(4)
    laws = compiled_laws(
        IdenticalUniform(Fraction(1, 4)), g, {3: three_atom(), 9: PointMass(1, 1)}
    )
    from percoweave.paths import all_self_avoiding_paths

    paths = all_self_avoiding_paths(g, 0, 15)
    path_indptr, path_edges = member_arrays(paths)
    mask = np.zeros(g.vertex_count, np.uint8)
    mask[15] = 1
    reps = 400
    results = []
    for mod in BACKENDS:
        bg = np.random.PCG64(31415)
        hits = np.zeros(reps, np.uint8)
        sizes = np.zeros(reps, np.int64)
        mod.two_phase_replications(
            bg, reps, g.tails, g.heads, g.out_indptr, g.out_edge_ids,
            *law_args(laws), kcode, ka, kb,
            event_kind, path_indptr, path_edges, 0, mask, need_sizes,
            hits, sizes,
        )
        probe = np.random.Generator(bg).random()
        results.append((hits, sizes, probe))
    (h1, s1, p1), (h2, s2, p2) = results
    assert np.array_equal(h1, h2)
    assert np.array_equal(s1, s2)
    assert p1 == p2
    if need_sizes:
        assert s1.min() >= 1
    if event_kind == 0 or need_sizes:
        # both event styles describe reaching vertex 15 from vertex 0,
        # so with sizes on, a hit implies a cluster of at least 2
        assert np.all(s1[h1 == 1] >= 2) or not need_sizes


@pytest.mark.skipif(not PAIRED, reason="compiled backend not built")
def test_explicit_scan_equals_reachability_event():
    # the explicit member scan and the reachability BFS answer the same
    # question when the member list is the full self-avoiding family
    g = build_square_lattice(3)
    laws = compiled_laws(IdenticalUniform(Fraction(2, 5)), g)
    from percoweave.paths import all_self_avoiding_paths

    path_indptr, path_edges = member_arrays(all_self_avoiding_paths(g, 0, 8))
    mask = np.zeros(g.vertex_count, np.uint8)
    mask[8] = 1
    reps = 600
    out = []
    for event_kind in (0, 1):
        bg = np.random.PCG64(7)
        hits = np.zeros(reps, np.uint8)
        sizes = np.zeros(reps, np.int64)
        backend.two_phase_replications(
            bg, reps, g.tails, g.heads, g.out_indptr, g.out_edge_ids,
            *law_args(laws), backend.K_PRODUCT, 0.0, 0.0,
            event_kind, path_indptr, path_edges, 0, mask, False,
            hits, sizes,
        )
        out.append(hits)
    assert np.array_equal(out[0], out[1])


@pytest.mark.skipif(not PAIRED, reason="compiled backend not built")
@pytest.mark.parametrize(
    "law",
    [IdenticalUniform(Fraction(3, 5)), three_atom(), PointMass(1, Fraction(7, 10))],
    ids=["identical-uniform", "three-atom", "point"],
)
def test_survival_replication_parity(law):
    g = build_square_lattice(7)
    laws = compiled_laws(law, g)
    mask = np.zeros(g.vertex_count, np.uint8)
    mask[lattice_border(g)] = 1
    origin = g.meta["origin"]
    reps = 500
    results = []
    for mod in BACKENDS:
        bg = np.random.PCG64(271828)
        hits = np.zeros(reps, np.uint8)
        mod.survival_replications(
            bg, reps, g.out_indptr, g.out_edge_ids, g.heads,
            *law_args(laws), backend.K_PRODUCT, 0.0, 0.0,
            origin, mask, hits,
        )
        probe = np.random.Generator(bg).random()
        results.append((hits, probe))
    (h1, p1), (h2, p2) = results
    assert np.array_equal(h1, h2)
    assert p1 == p2  # identical draw counts, not just identical verdicts


@pytest.mark.skipif(not PAIRED, reason="compiled backend not built")
def test_survival_source_on_boundary_consumes_nothing():
    g = build_square_lattice(3)
    laws = compiled_laws(IdenticalUniform(Fraction(1, 2)), g)
    mask = np.ones(g.vertex_count, np.uint8)
    for mod in BACKENDS:
        bg = np.random.PCG64(1)
        before = bg.state["state"]["state"]
        hits = np.zeros(50, np.uint8)
        mod.survival_replications(
            bg, 50, g.out_indptr, g.out_edge_ids, g.heads,
            *law_args(laws), backend.K_PRODUCT, 0.0, 0.0,
            0, mask, hits,
        )
        assert hits.all()
        assert bg.state["state"]["state"] == before


def test_survival_draw_budget_on_two_vertex_graph():
    # one edge out of the source, certain to open: exactly one edge uniform
    # and one weight draw per endpoint law that needs one
    g = build_from_edge_list([(0, 1), (1, 0)])
    laws = compiled_laws(IdenticalUniform(Fraction(1, 2)), g)
    mask = np.array([0, 1], np.uint8)
    for mod in BACKENDS:
        bg = np.random.PCG64(123)
        hits = np.zeros(1, np.uint8)
        mod.survival_replications(
            bg, 1, g.out_indptr, g.out_edge_ids, g.heads,
            *law_args(laws), backend.K_CONSTANT, 1.0, 0.0,
            0, mask, hits,
        )
        assert hits[0] == 1
        # replay: source weight, head weight, one edge uniform = 3 draws
        ref = np.random.PCG64(123)
        np.random.Generator(ref).random(3)
        assert bg.state["state"]["state"] == ref.state["state"]["state"]


def test_survival_skips_edges_into_visited_vertices():
    # closed kernel: from the source every out-edge is tried once and
    # fails; edges pointing back are never reached, so the draw budget is
    # out_degree(source) edge uniforms plus the touched weight draws
    g = build_square_lattice(3)
    laws = compiled_laws(IdenticalUniform(Fraction(1, 2)), g)
    mask = np.zeros(g.vertex_count, np.uint8)
    mask[[0, 2, 6, 8]] = 1  # corners only
    origin = 4
    deg = len(g.out_edges(origin))
    for mod in BACKENDS:
        bg = np.random.PCG64(55)
        hits = np.zeros(1, np.uint8)
        mod.survival_replications(
            bg, 1, g.out_indptr, g.out_edge_ids, g.heads,
            *law_args(laws), backend.K_CONSTANT, 0.0, 0.0,
            origin, mask, hits,
        )
        assert hits[0] == 0
        ref = np.random.PCG64(55)
        # 1 source weight + deg neighbor weights + deg edge uniforms
        np.random.Generator(ref).random(1 + 2 * deg)
        assert bg.state["state"]["state"] == ref.state["state"]["state"]


@pytest.mark.skipif(not PAIRED, reason="compiled backend not built")
def test_lazy_and_two_phase_agree_statistically():
    # same boundary-reach probability from both sampling disciplines
    g = build_square_lattice(9)
    laws = compiled_laws(IdenticalUniform(Fraction(3, 5)), g)
    mask = np.zeros(g.vertex_count, np.uint8)
    mask[lattice_border(g)] = 1
    origin = g.meta["origin"]
    reps = 4000
    hits_lazy = np.zeros(reps, np.uint8)
    backend.survival_replications(
        np.random.PCG64(9), reps, g.out_indptr, g.out_edge_ids, g.heads,
        *law_args(laws), backend.K_PRODUCT, 0.0, 0.0, origin, mask, hits_lazy,
    )
    hits_tp = np.zeros(reps, np.uint8)
    sizes = np.zeros(reps, np.int64)
    backend.two_phase_replications(
        np.random.PCG64(10), reps, g.tails, g.heads, g.out_indptr, g.out_edge_ids,
        *law_args(laws), backend.K_PRODUCT, 0.0, 0.0,
        1, np.zeros(1, np.int64), np.zeros(0, np.int64), origin, mask, False,
        hits_tp, sizes,
    )
    p1, p2 = hits_lazy.mean(), hits_tp.mean()
    se = np.sqrt(p1 * (1 - p1) / reps + p2 * (1 - p2) / reps)
    assert abs(p1 - p2) < 4 * max(se, 1e-3)


@pytest.mark.skipif(not PAIRED, reason="compiled backend not built")
@given(st.data())
@settings(max_examples=25, deadline=None)
def test_two_phase_parity_on_random_instances(data):
    n = data.draw(st.integers(2, 7))
    possible = [(a, b) for a in range(n) for b in range(n) if a != b]
    edges = data.draw(
        st.lists(st.sampled_from(possible), min_size=1, max_size=14, unique=True)
    )
    g = build_from_edge_list(edges, vertex_count=n)
    law = data.draw(
        st.sampled_from(
            [IdenticalUniform(Fraction(1, 3)), three_atom(), PointMass(1, 1)]
        )
    )
    laws = compiled_laws(law, g)
    kcode, ka, kb = data.draw(st.sampled_from(KERNELS))
    seed = data.draw(st.integers(0, 2**32 - 1))
    target = data.draw(st.integers(0, n - 1))
    mask = np.zeros(n, np.uint8)
    mask[target] = 1
    reps = 60
    outs = []
    for mod in BACKENDS:
        bg = np.random.PCG64(seed)
        hits = np.zeros(reps, np.uint8)
        sizes = np.zeros(reps, np.int64)
        mod.two_phase_replications(
            bg, reps, g.tails, g.heads, g.out_indptr, g.out_edge_ids,
            *law_args(laws), kcode, ka, kb,
            1, np.zeros(1, np.int64), np.zeros(0, np.int64), 0, mask, True,
            hits, sizes,
        )
        probe = np.random.Generator(bg).random()
        outs.append((hits, sizes, probe))
    assert np.array_equal(outs[0][0], outs[1][0])
    assert np.array_equal(outs[0][1], outs[1][1])
    assert outs[0][2] == outs[1][2]
