"""Paths, splicing, hop-closure checking, staged collections, events."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from percoweave.errors import (
    HypothesisNotMetError,
    InstanceTooLargeError,
    InvalidInputError,
    InvalidParameterError,
)
from percoweave.graphs import (
    build_square_lattice,
    counterexample_graph,
    lattice_border,
)
from percoweave.paths import (
    AllPathsBetween,
    BoundaryReaching,
    ExplicitCollection,
    all_self_avoiding_paths,
    boundary_reaching_representatives,
    build_xi_n,
    certify,
    conjunction,
    event_holds,
    explicit,
    is_weakly_hoppable,
    load_paths,
    loop_erased,
    make_path,
    path_from_vertices,
    tail,
    trivial_path,
    truncate,
)


@pytest.fixture
def star():
    return counterexample_graph()


@pytest.fixture
def lat3():
    return build_square_lattice(3)


# -- construction ------------------------------------------------------------


def test_trivial_path_shape():
    p = trivial_path(7)
    assert p.is_trivial and p.length == 0
    assert p.start == p.end == 7
    assert p.vertices == (7,)


def test_path_from_vertices(lat3):
    p = path_from_vertices(lat3, [0, 1, 2, 5])
    assert p.start == 0 and p.end == 5 and p.length == 3
    assert p.vertices == (0, 1, 2, 5)
    tails = [lat3.edge(e)[0] for e in p.edges]
    heads = [lat3.edge(e)[1] for e in p.edges]
    assert tails == [0, 1, 2] and heads == [1, 2, 5]


def test_path_from_vertices_missing_edge(lat3):
    with pytest.raises(InvalidInputError) as exc:
        path_from_vertices(lat3, [0, 1, 8])
    assert exc.value.index == 1


def test_make_path_round_trip(lat3):
    p = path_from_vertices(lat3, [4, 1, 2])
    q = make_path(lat3, p.edges)
    assert q == p and q.vertices == p.vertices


def test_make_path_broken_chain(lat3):
    e01 = lat3.edge_id(0, 1)
    e25 = lat3.edge_id(2, 5)
    with pytest.raises(InvalidInputError) as exc:
        make_path(lat3, [e01, e25])
    assert exc.value.index == 1


def test_make_path_trivial_needs_start(lat3):
    with pytest.raises(InvalidParameterError):
        make_path(lat3, [])
    assert make_path(lat3, [], start=4) == trivial_path(4)


def test_path_equality_ignores_graph_identity(lat3):
    p = path_from_vertices(lat3, [0, 1])
    q = make_path(lat3, [lat3.edge_id(0, 1)])
    assert p == q and hash(p) == hash(q)
    assert p != trivial_path(0)


# -- truncate / tail / conjunction --------------------------------------------


def test_truncate_and_tail(lat3):
    p = path_from_vertices(lat3, [0, 1, 2, 5, 8])
    assert truncate(p, 0) == trivial_path(0)
    assert truncate(p, 2) == path_from_vertices(lat3, [0, 1, 2])
    assert truncate(p, 4) == p
    assert tail(p, 0) == p
    assert tail(p, 2) == path_from_vertices(lat3, [2, 5, 8])
    assert tail(p, 4) == trivial_path(8)


def test_truncate_tail_bounds(lat3):
    p = path_from_vertices(lat3, [0, 1, 2])
    for bad in (-1, 3):
        with pytest.raises(InvalidParameterError):
            truncate(p, bad)
        with pytest.raises(InvalidParameterError):
            tail(p, bad)


def test_conjunction(lat3):
    a = path_from_vertices(lat3, [0, 1, 2])
    b = path_from_vertices(lat3, [2, 5, 8])
    joined = conjunction(a, b)
    assert joined == path_from_vertices(lat3, [0, 1, 2, 5, 8])
    assert conjunction(trivial_path(0), a) == a
    assert conjunction(a, trivial_path(2)) == a
    with pytest.raises(InvalidParameterError):
        conjunction(b, a)


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_splice_round_trip(data):
    g = build_square_lattice(3)
    steps = data.draw(st.lists(st.integers(0, 3), min_size=0, max_size=8))
    verts = [4]
    for s in steps:
        outs = g.out_edges(verts[-1])
        verts.append(int(g.heads[outs[s % len(outs)]]))
    p = path_from_vertices(g, verts)
    i = data.draw(st.integers(0, p.length))
    assert conjunction(truncate(p, i), tail(p, i)) == p


# -- loop erasure --------------------------------------------------------------


def test_loop_erased_removes_cycle(lat3):
    p = path_from_vertices(lat3, [0, 1, 4, 3, 0, 1, 2])
    q = loop_erased(p)
    assert q == path_from_vertices(lat3, [0, 1, 2])


def test_loop_erased_fixed_on_self_avoiding(lat3):
    p = path_from_vertices(lat3, [0, 1, 2, 5])
    assert loop_erased(p) == p


@given(st.data())
@settings(max_examples=80, deadline=None)
def test_loop_erased_properties(data):
    g = build_square_lattice(4)
    start = data.draw(st.integers(0, 15))
    steps = data.draw(st.lists(st.integers(0, 3), min_size=0, max_size=20))
    verts = [start]
    for s in steps:
        outs = g.out_edges(verts[-1])
        verts.append(int(g.heads[outs[s % len(outs)]]))
    walk = path_from_vertices(g, verts)
    sa = loop_erased(walk)
    assert sa.start == walk.start and sa.end == walk.end
    assert len(set(sa.vertices)) == len(sa.vertices)
    assert set(sa.edges) <= set(walk.edges)
    for e, (t, h) in zip(sa.edges, zip(sa.vertices, sa.vertices[1:])):
        assert g.edge(e) == (t, h)


# -- hop-closure checking -------------------------------------------------------


def crossing_pair(star):
    """The two straight-through paths S->origin->N and W->origin->E."""
    return explicit(
        [path_from_vertices(star, [3, 0, 1]), path_from_vertices(star, [4, 0, 2])]
    )


def crossing_closure(star):
    """All four through-the-origin paths: the splice closure of the pair."""
    return explicit(
        [
            path_from_vertices(star, [s, 0, t])
            for s in (3, 4)
            for t in (1, 2)
        ]
    )


def test_crossing_pair_not_weakly_hoppable(star):
    report = is_weakly_hoppable(crossing_pair(star), star)
    assert not report.weakly_hoppable
    w = report.witness
    assert w.crossing_vertex == 0
    assert w.missing.start in (3, 4) and w.missing.end in (1, 2)
    assert (w.missing.start, w.missing.edges) not in {
        (p.start, p.edges) for p in crossing_pair(star).paths
    }


def test_crossing_closure_is_weakly_hoppable(star):
    assert is_weakly_hoppable(crossing_closure(star), star).weakly_hoppable


def test_single_self_avoiding_path_is_weakly_hoppable(lat3):
    coll = explicit([path_from_vertices(lat3, [0, 1, 2, 5])])
    assert is_weakly_hoppable(coll, lat3).weakly_hoppable


def test_trivial_only_collection_is_weakly_hoppable(lat3):
    coll = explicit([trivial_path(4)])
    assert is_weakly_hoppable(coll, lat3).weakly_hoppable


def test_prefixes_alone_are_not_closed(lat3):
    # A path plus a *different* path through one of its vertices, without
    # the splice, must produce a witness naming that vertex.
    coll = explicit(
        [
            path_from_vertices(lat3, [0, 1, 2]),
            path_from_vertices(lat3, [4, 1, 0]),
        ]
    )
    report = is_weakly_hoppable(coll, lat3)
    assert not report.weakly_hoppable
    assert report.witness.crossing_vertex == 1


def test_hoppable_check_cap(star):
    with pytest.raises(InstanceTooLargeError) as exc:
        is_weakly_hoppable(crossing_closure(star), star, max_paths=3)
    assert exc.value.path_count == 4


def test_certify_upgrades_certificate(star):
    certified = certify(crossing_closure(star), star)
    assert certified.certificate == "checked_weakly_hoppable"
    # canonical collections pass through unchanged
    canon = AllPathsBetween(3, 1)
    assert certify(canon, star) is canon


def test_certify_rejects_open_collection(star):
    with pytest.raises(HypothesisNotMetError):
        certify(crossing_pair(star), star)


# -- canonical-member enumeration ----------------------------------------------


def test_all_self_avoiding_paths_star(star):
    paths = all_self_avoiding_paths(star, 3, 1)
    assert paths == [path_from_vertices(star, [3, 0, 1])]
    assert all_self_avoiding_paths(star, 3, 3) == [trivial_path(3)]


def test_all_self_avoiding_paths_lattice_counts(lat3):
    # 3x3 box, corner to corner: the self-avoiding paths 0 -> 8.
    paths = all_self_avoiding_paths(lat3, 0, 8)
    assert all(p.start == 0 and p.end == 8 for p in paths)
    assert len({(p.start, p.edges) for p in paths}) == len(paths)
    monotone = [p for p in paths if p.length == 4]
    assert len(monotone) == 6  # 4 choose 2 staircase walks
    assert len(paths) == 12


def test_all_self_avoiding_paths_cap(lat3):
    with pytest.raises(InstanceTooLargeError):
        all_self_avoiding_paths(lat3, 0, 8, max_paths=5)


def test_boundary_representatives_stop_at_first_touch(lat3):
    border = frozenset(int(b) for b in lattice_border(lat3))
    reps = boundary_reaching_representatives(lat3, 4, border)
    for p in reps:
        assert p.end in border
        assert all(v not in border for v in p.vertices[:-1])
    assert path_from_vertices(lat3, [4, 1]) in reps
    # source on the boundary: the trivial path is the lone representative
    assert boundary_reaching_representatives(lat3, 0, border) == [trivial_path(0)]


# -- staged collections ----------------------------------------------------------


def test_build_xi_n_explicit_filters_whole_members(star):
    coll = crossing_closure(star)
    e30 = star.edge_id(3, 0)
    e01 = star.edge_id(0, 1)
    n = max(e30, e01) + 1
    staged = build_xi_n(coll, star, n)
    assert path_from_vertices(star, [3, 0, 1]) in staged.paths
    assert len(staged.paths) < len(coll.paths)
    assert staged.certificate == coll.certificate


def test_build_xi_n_full_graph_is_identity_for_explicit(star):
    coll = crossing_closure(star)
    assert build_xi_n(coll, star, star.edge_count).paths == coll.paths


def test_build_xi_n_all_paths_full_graph(lat3):
    staged = build_xi_n(AllPathsBetween(0, 8), lat3, lat3.edge_count)
    expect = all_self_avoiding_paths(lat3, 0, 8)
    assert set(staged.paths) == set(expect)
    assert staged.certificate == "canonical_hoppable"


def test_build_xi_n_same_source_target(lat3):
    staged = build_xi_n(AllPathsBetween(5, 5), lat3, 1)
    assert staged.paths == (trivial_path(5),)
    assert event_holds(staged, np.zeros(lat3.edge_count, np.uint8), lat3)


def test_build_xi_n_boundary_truncates_at_first_exit(lat3):
    border = frozenset(int(b) for b in lattice_border(lat3))
    coll = BoundaryReaching(4, border)
    first_out = int(lat3.out_edges(4)[0])
    # n small enough that every first step from the center is outside:
    # all members collapse to the trivial path at the source.
    if first_out > 0:
        staged = build_xi_n(coll, lat3, first_out)
        assert trivial_path(4) in staged.paths
        closed = np.zeros(lat3.edge_count, np.uint8)
        assert event_holds(staged, closed, lat3)


def test_build_xi_n_boundary_partial_truncation(lat3):
    border = frozenset(int(b) for b in lattice_border(lat3))
    coll = BoundaryReaching(4, border)
    staged_full = build_xi_n(coll, lat3, lat3.edge_count)
    reps = boundary_reaching_representatives(lat3, 4, border)
    assert set(staged_full.paths) == set(reps)
    # intermediate stage: every staged member is a prefix of some representative
    n = lat3.edge_count // 2
    staged = build_xi_n(coll, lat3, n)
    rep_keys = [(p.start, p.edges) for p in reps]
    for q in staged.paths:
        assert all(e < n for e in q.edges)
        assert any(
            key[0] == q.start and key[1][: q.length] == q.edges for key in rep_keys
        )


def test_build_xi_n_bounds(lat3):
    with pytest.raises(InvalidParameterError):
        build_xi_n(AllPathsBetween(0, 8), lat3, 0)
    with pytest.raises(InvalidParameterError):
        build_xi_n(AllPathsBetween(0, 8), lat3, lat3.edge_count + 1)


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_staged_all_paths_event_nondecreasing_in_n(data):
    g = build_square_lattice(3)
    states = np.array(
        data.draw(
            st.lists(st.integers(0, 1), min_size=g.edge_count, max_size=g.edge_count)
        ),
        dtype=np.uint8,
    )
    coll = AllPathsBetween(0, 8)
    values = [
        event_holds(build_xi_n(coll, g, n), states, g)
        for n in range(1, g.edge_count + 1)
    ]
    assert all(a <= b for a, b in zip(values, values[1:]))
    assert values[-1] == event_holds(coll, states, g)


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_staged_boundary_event_nonincreasing_in_n(data):
    g = build_square_lattice(3)
    border = frozenset(int(b) for b in lattice_border(g))
    states = np.array(
        data.draw(
            st.lists(st.integers(0, 1), min_size=g.edge_count, max_size=g.edge_count)
        ),
        dtype=np.uint8,
    )
    coll = BoundaryReaching(4, border)
    threshold = int(max(g.out_edges(4))) + 1
    values = [
        event_holds(build_xi_n(coll, g, n), states, g)
        for n in range(threshold, g.edge_count + 1)
    ]
    assert all(a >= b for a, b in zip(values, values[1:]))
    assert values[-1] == event_holds(coll, states, g)


# -- events -----------------------------------------------------------------------


def test_event_trivial_member_always_holds(lat3):
    coll = explicit([trivial_path(4)])
    closed = np.zeros(lat3.edge_count, np.uint8)
    assert event_holds(coll, closed, lat3)


def test_event_explicit_requires_all_edges(star):
    coll = crossing_pair(star)
    states = np.zeros(star.edge_count, np.uint8)
    assert not event_holds(coll, states, star)
    states[star.edge_id(3, 0)] = 1
    assert not event_holds(coll, states, star)
    states[star.edge_id(0, 1)] = 1
    assert event_holds(coll, states, star)


def test_event_accepts_configuration_objects(star):
    class Box:
        def __init__(self, states):
            self.states = states

    states = np.zeros(star.edge_count, np.uint8)
    states[star.edge_id(4, 0)] = 1
    states[star.edge_id(0, 2)] = 1
    assert event_holds(crossing_pair(star), Box(states), star)


def test_event_rejects_wrong_length(star):
    with pytest.raises(InvalidParameterError):
        event_holds(crossing_pair(star), np.zeros(3, np.uint8), star)


@given(st.data())
@settings(max_examples=80, deadline=None)
def test_event_reachability_matches_explicit_scan(data):
    g = build_square_lattice(3)
    states = np.array(
        data.draw(
            st.lists(st.integers(0, 1), min_size=g.edge_count, max_size=g.edge_count)
        ),
        dtype=np.uint8,
    )
    canon = AllPathsBetween(0, 8)
    listed = explicit(all_self_avoiding_paths(g, 0, 8))
    assert event_holds(canon, states, g) == event_holds(listed, states, g)

    border = frozenset(int(b) for b in lattice_border(g))
    canon_b = BoundaryReaching(4, border)
    listed_b = explicit(boundary_reaching_representatives(g, 4, border))
    assert event_holds(canon_b, states, g) == event_holds(listed_b, states, g)


@given(st.data())
@settings(max_examples=60, deadline=None)
def test_event_unchanged_under_loop_erasure_for_closed_collections(data):
    # Adding a loopy walk to a splice-closed collection never changes the
    # event: its loop-erasure is already a member and needs fewer edges.
    g = counterexample_graph()
    states = np.array(
        data.draw(
            st.lists(st.integers(0, 1), min_size=g.edge_count, max_size=g.edge_count)
        ),
        dtype=np.uint8,
    )
    closure = [
        path_from_vertices(g, [s, 0, t]) for s in (3, 4) for t in (1, 2)
    ]
    loopy = path_from_vertices(g, [3, 0, 1, 0, 2])
    assert loop_erased(loopy) in closure
    with_loopy = explicit(closure + [loopy])
    erased = explicit(sorted({loop_erased(p) for p in with_loopy.paths},
                             key=lambda p: (p.start, p.edges)))
    base = event_holds(explicit(closure), states, g)
    assert event_holds(with_loopy, states, g) == base
    assert event_holds(erased, states, g) == base


# -- text interface ----------------------------------------------------------------


def test_load_paths_round_trip(tmp_path, star):
    f = tmp_path / "paths.txt"
    f.write_text("# two crossings\n3 0 1\n\n4 0 2\n")
    coll = load_paths(f, star)
    assert coll.paths == crossing_pair(star).paths
    assert coll.certificate == "unverified"


def test_load_paths_reports_line(tmp_path, star):
    f = tmp_path / "bad.txt"
    f.write_text("3 0 1\n1 2\n")
    with pytest.raises(InvalidInputError) as exc:
        load_paths(f, star)
    assert exc.value.index == 2


def test_load_paths_rejects_non_integers(tmp_path, star):
    f = tmp_path / "bad2.txt"
    f.write_text("3 zero 1\n")
    with pytest.raises(InvalidInputError) as exc:
        load_paths(f, star)
    assert exc.value.index == 1


def test_explicit_collection_certificate_validation():
    with pytest.raises(InvalidParameterError):
        ExplicitCollection((), certificate="blessed")
