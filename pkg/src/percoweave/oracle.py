"""Exact probabilities on small instances, and verification reports built on them.

Everything here is exhaustive rather than sampled: weight assignments are
enumerated atom by atom, edge states are enumerated (or inclusion-excluded
over path structure), and results carry exact rationals whenever every
input is rational and the work fits a budget.  The point of the module is
to serve as an independent referee for the Monte Carlo engine and as the
calculator behind the ordering/bound checkers, so none of it shares code
with the sampling backends.

Size discipline: the cost is ``2^(relevant edges)`` times the number of
weight assignments, so both are capped and the caps are enforced up front
with the offending counts attached to the error.
"""

from __future__ import annotations

import hashlib
import itertools
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from numbers import Rational

import numpy as np

from .errors import (
    HypothesisNotMetError,
    InstanceTooLargeError,
    InvalidParameterError,
)
from .graphs import DirectedGraph, counterexample_graph
from .paths import (
    AllPathsBetween,
    BoundaryReaching,
    ExplicitCollection,
    HoppabilityReport,
    Path,
    PathCollection,
    all_self_avoiding_paths,
    boundary_reaching_representatives,
    certify,
    is_weakly_hoppable,
    path_from_vertices,
)
from .weights import (
    DiscreteTable,
    Kernel,
    LawMap,
    PointMass,
    WeightLaw,
    as_exact,
    kappa_eval,
    kappa_longdouble,
    kernel_is_exact,
    law_moments,
    render_number,
    validate_kernel,
)

__all__ = [
    "DEFAULT_EDGE_CAP",
    "DEFAULT_ASSIGNMENT_CAP",
    "METHOD_STATE_ENUMERATION",
    "METHOD_INCLUSION_EXCLUSION",
    "METHOD_WEIGHT_EXPECTATION",
    "VERDICT_TOL",
    "ExactProbability",
    "ExactExpectation",
    "exact_event_probability",
    "bond_event_probability",
    "exact_expected_cluster_size",
    "ZeroFunctionQuery",
    "zero_function",
    "ZeroPoint",
    "ZeroFunctionComparison",
    "compare_zero_functions",
    "default_argument_grid",
    "TheoremCheckRecord",
    "verify_theorem_1_1",
    "verify_theorem_1_2",
    "verify_theorem_3_1",
    "CounterexampleReport",
    "counterexample_laws",
    "counterexample_two_path_collection",
    "counterexample_crossing_closure",
    "reproduce_counterexample",
    "JointOpeningComparison",
    "ReparametrizationReport",
    "check_kernel_reparametrization",
    "HarnessInstance",
    "random_instance",
]

DEFAULT_EDGE_CAP = 20
DEFAULT_ASSIGNMENT_CAP = 10**6
# Operation budget below which exact rational state sums are attempted;
# beyond it the oracle silently switches to extended-precision floats.
EXACT_OP_BUDGET = 4_000_000
# Inclusion-exclusion over members is the fallback when the edge count is
# too large for state enumeration; it is exponential in the member count.
IE_MEMBER_CAP = 14
IE_OP_BUDGET = 10**7

METHOD_STATE_ENUMERATION = "weight-and-edge enumeration"
METHOD_INCLUSION_EXCLUSION = "weight enumeration with per-path inclusion-exclusion"
METHOD_WEIGHT_EXPECTATION = "weight enumeration"

# Slop allowed before a float comparison is called a violation; exact
# rational comparisons use none.
VERDICT_TOL = 1e-12

_ONE = np.uint64(1)


# ---------------------------------------------------------------------------
# Result containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExactProbability:
    """A probability computed by exhaustive enumeration.

    ``exact`` is the rational value when every input was rational and the
    work fit the exactness budget, else ``None`` (``value`` then comes from
    an extended-precision computation, trustworthy to ~1e-15 at these
    sizes).  ``edge_count`` counts the edges actually enumerated after
    irrelevant ones are discarded; ``assignment_count`` counts the weight
    assignments after per-vertex atom collapsing.
    """

    value: float
    exact: Fraction | None
    method: str
    edge_count: int = 0
    assignment_count: int = 1

    @property
    def is_exact(self) -> bool:
        return self.exact is not None

    def as_text(self) -> str:
        return render_number(self.exact) if self.exact is not None else repr(self.value)

    def __post_init__(self):
        if not (-1e-9 <= self.value <= 1 + 1e-9):
            raise InvalidParameterError(f"probability {self.value!r} outside [0, 1]")


@dataclass(frozen=True)
class ExactExpectation:
    """An exhaustively computed expectation (e.g. a cluster size).

    Same exactness conventions as :class:`ExactProbability`, but the value
    is not confined to [0, 1]; ``per_vertex`` maps each vertex to its exact
    reach probability when one was computed.
    """

    value: float
    exact: Fraction | None
    method: str
    edge_count: int
    assignment_count: int
    per_vertex: dict[int, object] = field(default_factory=dict)

    @property
    def is_exact(self) -> bool:
        return self.exact is not None


def _finish_probability(total, method, edge_count, assignment_count) -> ExactProbability:
    if isinstance(total, Rational):
        frac = Fraction(total)
        return ExactProbability(float(frac), frac, method, edge_count, assignment_count)
    value = min(1.0, max(0.0, float(total)))
    return ExactProbability(value, None, method, edge_count, assignment_count)


# ---------------------------------------------------------------------------
# Event resolution and relevant edges
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _EventSpec:
    kind: str  # "explicit" | "reach"
    members: tuple[Path, ...] = ()
    source: int = -1
    targets: frozenset[int] = frozenset()
    always_true: bool = False
    never_true: bool = False


def _check_vertex(graph: DirectedGraph, v: int, what: str) -> None:
    if not (0 <= v < graph.vertex_count):
        raise InvalidParameterError(f"{what} {v} outside 0..{graph.vertex_count - 1}")


def _resolve_event(graph: DirectedGraph, collection: PathCollection) -> _EventSpec:
    if isinstance(collection, ExplicitCollection):
        members = collection.paths
        if not members:
            return _EventSpec("explicit", never_true=True)
        for p in members:
            _check_vertex(graph, p.start, "path start")
            for e in p.edges:
                if not (0 <= e < graph.edge_count):
                    raise InvalidParameterError(f"member edge id {e} outside the graph")
        if any(p.length == 0 for p in members):
            return _EventSpec("explicit", members=members, always_true=True)
        return _EventSpec("explicit", members=members)
    if isinstance(collection, AllPathsBetween):
        _check_vertex(graph, collection.source, "source")
        _check_vertex(graph, collection.target, "target")
        if collection.source == collection.target:
            return _EventSpec("reach", source=collection.source,
                              targets=frozenset((collection.target,)), always_true=True)
        return _EventSpec("reach", source=collection.source,
                          targets=frozenset((collection.target,)))
    if isinstance(collection, BoundaryReaching):
        _check_vertex(graph, collection.source, "source")
        for b in collection.boundary:
            _check_vertex(graph, b, "boundary vertex")
        if collection.source in collection.boundary:
            return _EventSpec("reach", source=collection.source,
                              targets=collection.boundary, always_true=True)
        return _EventSpec("reach", source=collection.source, targets=collection.boundary)
    raise InvalidParameterError(f"unknown collection type {type(collection).__name__}")


def _forward_reachable(graph: DirectedGraph, start: int) -> np.ndarray:
    seen = np.zeros(graph.vertex_count, dtype=bool)
    seen[start] = True
    stack = [start]
    while stack:
        u = stack.pop()
        for v in graph.successors(u):
            if not seen[v]:
                seen[v] = True
                stack.append(int(v))
    return seen


def _backward_reachable(graph: DirectedGraph, targets) -> np.ndarray:
    seen = np.zeros(graph.vertex_count, dtype=bool)
    stack = []
    for t in targets:
        if not seen[t]:
            seen[t] = True
            stack.append(int(t))
    while stack:
        v = stack.pop()
        for e in graph.in_edges(v):
            u, _ = graph.edge(int(e))
            if not seen[u]:
                seen[u] = True
                stack.append(int(u))
    return seen


def _relevant_edges(graph: DirectedGraph, spec: _EventSpec) -> list[int]:
    """Edges whose state can influence the event.

    For explicit collections these are exactly the edges used by some
    member.  For reach events an edge matters iff its tail is reachable
    from the source and some target is reachable from its head (any open
    witness path can be taken self-avoiding, and then each of its edges
    has this property; conversely the event is a function of these edges
    only, and their conditional law is unchanged by the restriction).
    """
    if spec.kind == "explicit":
        used = sorted({e for p in spec.members for e in p.edges})
        return used
    fwd = _forward_reachable(graph, spec.source)
    bwd = _backward_reachable(graph, spec.targets)
    out = []
    for e in range(graph.edge_count):
        u, v = graph.edge(e)
        if fwd[u] and bwd[v]:
            out.append(e)
    return out


# ---------------------------------------------------------------------------
# Weight-assignment space
# ---------------------------------------------------------------------------


def _as_law_map(law_map) -> LawMap:
    if isinstance(law_map, LawMap):
        return law_map
    if isinstance(law_map, WeightLaw):
        return LawMap(law_map)
    raise InvalidParameterError(
        f"expected a weight law or a per-vertex law map, got {type(law_map).__name__}"
    )


def _effective_atoms(law: WeightLaw, uses_w: bool, uses_wbar: bool):
    """Collapse a law's atoms to the coordinates an instance actually reads.

    A vertex touched only as an edge tail exposes only ``w``; merging atoms
    that agree there shrinks the assignment product without changing any
    probability.
    """
    if not law.finite_support:
        raise InvalidParameterError(
            "exact enumeration needs finite-support weight laws; "
            f"got {law!r}"
        )
    merged: dict[tuple, object] = {}
    order: list[tuple] = []
    for (w, wbar), prob in law.atoms():
        key = (w if uses_w else None, wbar if uses_wbar else None)
        if key not in merged:
            merged[key] = prob
            order.append(key)
        else:
            merged[key] = merged[key] + prob
    return [(k[0], k[1], merged[k]) for k in order]


def _as_longdouble(value) -> np.longdouble:
    if isinstance(value, Rational):
        frac = Fraction(value)
        return np.longdouble(frac.numerator) / np.longdouble(frac.denominator)
    return np.longdouble(value)


@dataclass
class _AssignmentSpace:
    vertices: list[int]
    atoms: list[list[tuple]]  # per vertex: (w | None, wbar | None, prob)
    count: int
    rational: bool

    def iter_assignments(self, exact: bool):
        """Yields (atom index tuple, probability product) in the requested
        arithmetic — exact rationals or extended-precision floats."""
        if exact:
            probs = [[Fraction(a[2]) for a in atoms] for atoms in self.atoms]
            unit = Fraction(1)
        else:
            probs = [[_as_longdouble(a[2]) for a in atoms] for atoms in self.atoms]
            unit = np.longdouble(1.0)
        ranges = [range(len(a)) for a in self.atoms]
        for combo in itertools.product(*ranges):
            prob = unit
            for vpos, apos in enumerate(combo):
                prob = prob * probs[vpos][apos]
            yield combo, prob


def _build_assignment_space(
    graph: DirectedGraph, law_map: LawMap, edges: list[int], assignment_cap: int
) -> tuple[_AssignmentSpace, dict[int, int]]:
    uses_w: dict[int, bool] = {}
    uses_wbar: dict[int, bool] = {}
    for e in edges:
        u, v = graph.edge(e)
        uses_w[u] = True
        uses_wbar.setdefault(v, False)
        uses_wbar[v] = True
        uses_w.setdefault(u, True)
    verts = sorted(set(uses_w) | set(uses_wbar))
    atoms = []
    rational = True
    for v in verts:
        law = law_map.law_for(v)
        eff = _effective_atoms(law, uses_w.get(v, False), uses_wbar.get(v, False))
        if not law.is_rational:
            rational = False
        atoms.append(eff)
    count = 1
    for a in atoms:
        count *= len(a)
    if count > assignment_cap:
        raise InstanceTooLargeError(
            f"{count} weight assignments exceed the cap {assignment_cap}",
            assignment_count=count,
        )
    vpos = {v: i for i, v in enumerate(verts)}
    return _AssignmentSpace(verts, atoms, count, rational), vpos


def _edge_value_tables(
    graph: DirectedGraph,
    edges: list[int],
    space: _AssignmentSpace,
    vpos: dict[int, int],
    kernel: Kernel,
    exact: bool,
):
    """Per edge, the kernel value for every (tail atom, head atom) pair.

    Values are memoized by the weight pair, so repeated atoms across
    vertices cost one kernel evaluation.
    """
    memo: dict[tuple, object] = {}
    tables = []
    for e in edges:
        u, v = graph.edge(e)
        tu, tv = vpos[u], vpos[v]
        rows = []
        for (w, _, _) in space.atoms[tu]:
            row = []
            for (_, wbar, _) in space.atoms[tv]:
                key = (w, wbar)
                if key not in memo:
                    if exact:
                        memo[key] = kappa_eval(kernel, w, wbar)
                    else:
                        memo[key] = kappa_longdouble(kernel, w, wbar)
                row.append(memo[key])
            rows.append(row)
        tables.append((tu, tv, rows))
    return tables, sorted(set(memo.values()), key=float)


# ---------------------------------------------------------------------------
# Event tables over edge states
# ---------------------------------------------------------------------------


def _explicit_event_table(states: np.ndarray, edges: list[int], members) -> np.ndarray:
    bit_of = {e: i for i, e in enumerate(edges)}
    table = np.zeros(states.shape[0], dtype=bool)
    for p in members:
        mask = np.uint64(0)
        for e in p.edges:
            mask |= _ONE << np.uint64(bit_of[e])
        table |= (states & mask) == mask
    return table


def _reach_fixpoint(
    states: np.ndarray, edges: list[int], graph: DirectedGraph, source: int
) -> tuple[np.ndarray, dict[int, int]]:
    """Per state, the bitmask of vertices reachable from ``source``.

    Only vertices incident to an enumerated edge (plus the source) can ever
    be reached, so the mask fits in 64 bits whenever the edge count is
    within the enumeration cap.
    """
    verts = sorted({w for e in edges for w in graph.edge(e)} | {source})
    if len(verts) > 64:
        raise InstanceTooLargeError(
            f"{len(verts)} vertices incident to enumerated edges exceed the 64-bit "
            "reachability representation",
            edge_count=len(edges),
        )
    idx = {v: i for i, v in enumerate(verts)}
    reach = np.full(states.shape[0], _ONE << np.uint64(idx[source]), dtype=np.uint64)
    endpoint = [(idx[graph.edge(e)[0]], idx[graph.edge(e)[1]]) for e in edges]
    while True:
        changed = False
        for b, (iu, iv) in enumerate(endpoint):
            open_b = (states >> np.uint64(b)) & _ONE
            can = ((reach >> np.uint64(iu)) & _ONE) & open_b
            add = can << np.uint64(iv)
            grow = add & ~reach
            if grow.any():
                reach |= grow
                changed = True
        if not changed:
            return reach, idx


def _reach_event_table(
    states: np.ndarray, edges: list[int], graph: DirectedGraph, spec: _EventSpec
) -> np.ndarray:
    reach, idx = _reach_fixpoint(states, edges, graph, spec.source)
    mask = np.uint64(0)
    for t in spec.targets:
        if t in idx:
            mask |= _ONE << np.uint64(idx[t])
    return (reach & mask) != 0


# ---------------------------------------------------------------------------
# Conditional probabilities given a weight assignment
# ---------------------------------------------------------------------------


def _conditional_from_histogram(hist, p):
    """P(event) when every edge has the same opening probability ``p``."""
    one = Fraction(1) if isinstance(p, Rational) else type(p)(1)
    q = one - p
    m = len(hist) - 1
    total = p * 0
    for k, n in enumerate(hist):
        if n:
            total = total + n * p**k * q ** (m - k)
    return total


def _conditional_exact(pvec, table, accepted, hist):
    distinct = set(pvec)
    if len(distinct) == 1:
        return _conditional_from_histogram(hist, pvec[0])
    if distinct <= {Fraction(0), Fraction(1)}:
        forced = 0
        for b, p in enumerate(pvec):
            if p == 1:
                forced |= 1 << b
        return Fraction(1) if table[forced] else Fraction(0)
    total = Fraction(0)
    qvec = [Fraction(1) - p for p in pvec]
    for s in accepted:
        prod = Fraction(1)
        for b, p in enumerate(pvec):
            prod *= p if (s >> b) & 1 else qvec[b]
        total += prod
    return total


def _conditional_float(pvec, table_ld, hist):
    distinct = set(pvec)
    if len(distinct) == 1:
        return _conditional_from_histogram(hist, np.longdouble(pvec[0]))
    acc = np.ones(1, dtype=np.longdouble)
    for p in pvec:  # edge b lands at bit b: the new factor is the high part
        pl = np.longdouble(p)
        pair = np.array([np.longdouble(1.0) - pl, pl], dtype=np.longdouble)
        acc = np.multiply.outer(pair, acc).ravel()
    return np.dot(acc, table_ld)


def _sum_over_assignments(space, tables, table, m, exact, hist):
    """Total probability: sum over weight assignments of pi * P(event | weights)."""
    accepted = None
    table_ld = None
    if exact:
        accepted = [int(s) for s in np.flatnonzero(table)]
    else:
        table_ld = table.astype(np.longdouble)
    memo: dict[tuple, object] = {}
    total = Fraction(0) if exact else np.longdouble(0.0)
    for combo, prob in space.iter_assignments(exact):
        pvec = tuple(rows[combo[tu]][combo[tv]] for (tu, tv, rows) in tables)
        cond = memo.get(pvec)
        if cond is None:
            if exact:
                cond = _conditional_exact(pvec, table, accepted, hist)
            else:
                cond = _conditional_float(pvec, table_ld, hist)
            memo[pvec] = cond
        total = total + prob * cond
    return total


def _choose_exact(space, distinct_values, accepted_count, m, kernel_rational) -> bool:
    if not (space.rational and kernel_rational):
        return False
    if len(distinct_values) == 1:
        return True
    if all(v in (0, 1) for v in distinct_values):
        return True
    return space.count * max(accepted_count, 1) * max(m, 1) <= EXACT_OP_BUDGET


# ---------------------------------------------------------------------------
# The oracle
# ---------------------------------------------------------------------------


def exact_event_probability(
    graph: DirectedGraph,
    law_map,
    kernel: Kernel,
    collection: PathCollection,
    *,
    edge_cap: int = DEFAULT_EDGE_CAP,
    assignment_cap: int = DEFAULT_ASSIGNMENT_CAP,
) -> ExactProbability:
    """P(some member of the collection is fully open), exhaustively.

    Weight assignments are enumerated over the per-vertex atom products
    (after collapsing coordinates the instance never reads); conditionally
    on an assignment the edges are independent, and the event probability
    is summed over all ``2^m`` states of the relevant edges.  Instances
    whose relevant-edge count exceeds ``edge_cap`` fall back to
    inclusion-exclusion over explicit members when those are few, and are
    refused otherwise.
    """
    law_map = _as_law_map(law_map)
    spec = _resolve_event(graph, collection)
    if spec.always_true:
        return ExactProbability(1.0, Fraction(1), METHOD_STATE_ENUMERATION, 0, 1)
    if spec.never_true:
        return ExactProbability(0.0, Fraction(0), METHOD_STATE_ENUMERATION, 0, 1)
    relevant = _relevant_edges(graph, spec)
    m = len(relevant)
    if m == 0:
        # No edge can carry the source anywhere useful.
        return ExactProbability(0.0, Fraction(0), METHOD_STATE_ENUMERATION, 0, 1)
    if m > edge_cap:
        return _inclusion_exclusion_probability(
            graph, law_map, kernel, spec, assignment_cap, relevant_count=m
        )

    space, vpos = _build_assignment_space(graph, law_map, relevant, assignment_cap)
    kernel_rational = kernel_is_exact(kernel)
    tables, distinct = _edge_value_tables(
        graph, relevant, space, vpos, kernel, exact=space.rational and kernel_rational
    )

    states = np.arange(1 << m, dtype=np.uint64)
    if spec.kind == "explicit":
        table = _explicit_event_table(states, relevant, spec.members)
    else:
        table = _reach_event_table(states, relevant, graph, spec)
    pop = np.bitwise_count(states).astype(np.int64)
    hist = np.bincount(pop[table], minlength=m + 1).tolist()
    accepted_count = int(table.sum())

    exact = _choose_exact(space, distinct, accepted_count, m, kernel_rational)
    if not exact and space.rational and kernel_rational:
        tables, distinct = _edge_value_tables(graph, relevant, space, vpos, kernel, exact=False)
    total = _sum_over_assignments(space, tables, table, m, exact, hist)
    return _finish_probability(total, METHOD_STATE_ENUMERATION, m, space.count)


def _materialize_members(graph: DirectedGraph, spec: _EventSpec) -> tuple[Path, ...]:
    if spec.kind == "explicit":
        members = spec.members
    elif len(spec.targets) == 1:
        (t,) = spec.targets
        members = tuple(
            all_self_avoiding_paths(graph, spec.source, t, max_paths=IE_MEMBER_CAP)
        )
    else:
        members = tuple(
            boundary_reaching_representatives(
                graph, spec.source, spec.targets, max_paths=IE_MEMBER_CAP
            )
        )
    if len(members) > IE_MEMBER_CAP:
        raise InstanceTooLargeError(
            f"instance needs state enumeration over too many edges and has "
            f"more than {IE_MEMBER_CAP} member paths for inclusion-exclusion",
            path_count=len(members),
        )
    return members


def _inclusion_exclusion_probability(
    graph: DirectedGraph,
    law_map: LawMap,
    kernel: Kernel,
    spec: _EventSpec,
    assignment_cap: int,
    relevant_count: int,
) -> ExactProbability:
    """P(union of member-open events) via subset inclusion-exclusion.

    Viable exactly when the member count is small; edge count only enters
    through per-subset products, so it may exceed the state-enumeration cap.
    """
    try:
        members = _materialize_members(graph, spec)
    except InstanceTooLargeError as exc:
        raise InstanceTooLargeError(
            f"{relevant_count} relevant edges exceed the state-enumeration cap "
            f"and inclusion-exclusion is unavailable: {exc}",
            edge_count=relevant_count,
            path_count=exc.path_count,
        ) from exc
    k = len(members)
    edges = sorted({e for p in members for e in p.edges})
    bit_of = {e: i for i, e in enumerate(edges)}
    member_masks = []
    for p in members:
        mask = 0
        for e in p.edges:
            mask |= 1 << bit_of[e]
        member_masks.append(mask)

    space, vpos = _build_assignment_space(graph, law_map, edges, assignment_cap)
    if space.count * (1 << k) > IE_OP_BUDGET:
        raise InstanceTooLargeError(
            f"inclusion-exclusion over {k} members and {space.count} weight "
            f"assignments exceeds the operation budget",
            assignment_count=space.count,
            path_count=k,
        )
    kernel_rational = kernel_is_exact(kernel)
    rational = space.rational and kernel_rational
    tables, distinct = _edge_value_tables(graph, edges, space, vpos, kernel, exact=rational)
    forced_only = all(v in (0, 1) for v in distinct)
    exact = rational and (forced_only or space.count * (1 << k) <= EXACT_OP_BUDGET // 4)
    if not exact and rational:
        tables, distinct = _edge_value_tables(graph, edges, space, vpos, kernel, exact=False)

    lowest_member = [0] * (1 << k)
    for s in range(1, 1 << k):
        lowest_member[s] = (s & -s).bit_length() - 1

    zero = Fraction(0) if exact else np.longdouble(0.0)
    one = Fraction(1) if exact else np.longdouble(1.0)
    total = zero
    for combo, prob in space.iter_assignments(exact):
        pvec = [rows[combo[tu]][combo[tv]] for (tu, tv, rows) in tables]
        if all(p == 0 or p == 1 for p in pvec):
            # Degenerate assignment: a single forced state, no subset sum.
            forced = 0
            for b, p in enumerate(pvec):
                if p == 1:
                    forced |= 1 << b
            cond = one if any((mask & forced) == mask for mask in member_masks) else zero
        else:
            union_mask = [0] * (1 << k)
            union_prod = [one] * (1 << k)
            cond = zero
            for s in range(1, 1 << k):
                parent = s & (s - 1)
                mask = union_mask[parent] | member_masks[lowest_member[s]]
                union_mask[s] = mask
                extra = mask & ~union_mask[parent]
                prod = union_prod[parent]
                while extra:
                    b = (extra & -extra).bit_length() - 1
                    prod = prod * pvec[b]
                    extra &= extra - 1
                union_prod[s] = prod
                if s.bit_count() % 2:
                    cond = cond + prod
                else:
                    cond = cond - prod
        total = total + prob * cond
    return _finish_probability(total, METHOD_INCLUSION_EXCLUSION, len(edges), space.count)


def bond_event_probability(
    graph: DirectedGraph,
    p,
    collection: PathCollection,
    *,
    edge_cap: int = DEFAULT_EDGE_CAP,
    assignment_cap: int = DEFAULT_ASSIGNMENT_CAP,
) -> ExactProbability:
    """Exact event probability when every edge is open independently w.p. ``p``."""
    p = as_exact(p)
    if p < 0 or p > 1:
        raise InvalidParameterError(f"p must lie in [0, 1], got {render_number(p)}")
    kernel = Kernel.custom(lambda z, _p=p: _p)
    return exact_event_probability(
        graph, LawMap(PointMass(1, 1)), kernel, collection,
        edge_cap=edge_cap, assignment_cap=assignment_cap,
    )


def exact_expected_cluster_size(
    graph: DirectedGraph,
    law_map,
    kernel: Kernel,
    source: int,
    *,
    edge_cap: int = DEFAULT_EDGE_CAP,
    assignment_cap: int = DEFAULT_ASSIGNMENT_CAP,
) -> ExactExpectation:
    """E|C(source)| = sum over vertices of P(source reaches v), exhaustively.

    One reachability fixpoint is shared by all target vertices, so the cost
    matches a single event computation plus one inner product per vertex.
    """
    law_map = _as_law_map(law_map)
    _check_vertex(graph, source, "source")
    fwd = _forward_reachable(graph, source)
    relevant = [e for e in range(graph.edge_count) if fwd[graph.edge(e)[0]]]
    m = len(relevant)
    if m > edge_cap:
        raise InstanceTooLargeError(
            f"{m} edges reachable from the source exceed the cap {edge_cap}",
            edge_count=m,
        )
    if m == 0:
        return ExactExpectation(1.0, Fraction(1), METHOD_STATE_ENUMERATION, 0, 1,
                                {source: Fraction(1)})

    space, vpos = _build_assignment_space(graph, law_map, relevant, assignment_cap)
    kernel_rational = kernel_is_exact(kernel)
    exact_tables = space.rational and kernel_rational
    tables, distinct = _edge_value_tables(graph, relevant, space, vpos, kernel, exact_tables)

    states = np.arange(1 << m, dtype=np.uint64)
    reach, idx = _reach_fixpoint(states, relevant, graph, source)
    pop = np.bitwise_count(states).astype(np.int64)

    # Per vertex: either a popcount histogram (for a single shared edge
    # probability) or the accepted-state list / indicator vector.
    per_vertex_tables = {}
    for v, i in idx.items():
        hit = (reach >> np.uint64(i)) & _ONE != 0
        hist = np.bincount(pop[hit], minlength=m + 1).tolist()
        per_vertex_tables[v] = (hit, hist)

    worst_accept = max(int(hit.sum()) for hit, _ in per_vertex_tables.values())
    exact = _choose_exact(space, distinct, worst_accept * len(idx), m, kernel_rational)
    if not exact and exact_tables:
        tables, distinct = _edge_value_tables(graph, relevant, space, vpos, kernel, exact=False)

    per_vertex: dict[int, object] = {}
    for v, (hit, hist) in per_vertex_tables.items():
        if v == source:
            per_vertex[v] = Fraction(1) if exact else np.longdouble(1.0)
            continue
        table = hit
        total = _sum_over_assignments(space, tables, table, m, exact, hist)
        per_vertex[v] = total
    total_size = sum(per_vertex.values())
    if exact:
        frac = Fraction(total_size)
        return ExactExpectation(float(frac), frac, METHOD_STATE_ENUMERATION, m,
                                space.count, per_vertex)
    return ExactExpectation(float(total_size), None, METHOD_STATE_ENUMERATION, m,
                            space.count, {v: float(x) for v, x in per_vertex.items()})


# ---------------------------------------------------------------------------
# Zero functions: the probability a vertex transmits to none of its
# attached neighbour slots
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ZeroFunctionQuery:
    """One evaluation point: downstream susceptibilities x, upstream infectivities y.

    The optional vertex/edge ids only document which graph slots the query
    refers to; the value depends on the argument vectors alone.
    """

    x: tuple
    y: tuple
    vertex: int | None = None
    out_edges: tuple[int, ...] | None = None
    in_edges: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "x", tuple(as_exact(v) for v in self.x))
        object.__setattr__(self, "y", tuple(as_exact(v) for v in self.y))
        for v in self.x + self.y:
            if v < 0:
                raise InvalidParameterError(f"query arguments must be >= 0, got {v}")
        if self.out_edges is not None and len(self.out_edges) != len(self.x):
            raise InvalidParameterError(
                f"{len(self.out_edges)} out-edges for {len(self.x)} x-arguments"
            )
        if self.in_edges is not None and len(self.in_edges) != len(self.y):
            raise InvalidParameterError(
                f"{len(self.in_edges)} in-edges for {len(self.y)} y-arguments"
            )

    @property
    def sizes(self) -> tuple[int, int]:
        return (len(self.x), len(self.y))


def zero_function(query: ZeroFunctionQuery, law: WeightLaw, kernel: Kernel) -> ExactProbability:
    """Probability the vertex opens no edge to the queried neighbour slots.

    With both sides present this is E[1 - (1 - prod_i (1-kappa(W, x_i)))
    (1 - prod_j (1-kappa(y_j, Wbar)))]: the vertex fails to transmit
    downstream or fails to receive from upstream.  One-sided queries drop
    the missing factor; the empty query is identically 1.
    """
    if not isinstance(query, ZeroFunctionQuery):
        query = ZeroFunctionQuery(*query)
    if not law.finite_support:
        raise InvalidParameterError("zero functions need finite-support laws")
    exact = law.is_rational and kernel_is_exact(kernel) and all(
        isinstance(v, Rational) for v in query.x + query.y
    )
    evaluate = kappa_eval if exact else (lambda k, a, b: float(kappa_longdouble(k, a, b)))
    total = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    for (w, wbar), prob in law.atoms():
        miss_down = one
        for x in query.x:
            miss_down = miss_down * (one - evaluate(kernel, w, x))
        miss_up = one
        for y in query.y:
            miss_up = miss_up * (one - evaluate(kernel, y, wbar))
        if query.x and query.y:
            value = one - (one - miss_down) * (one - miss_up)
        elif query.x:
            value = miss_down
        elif query.y:
            value = miss_up
        else:
            value = one
        total = total + prob * value
    return _finish_probability(
        total, METHOD_WEIGHT_EXPECTATION, len(query.x) + len(query.y), len(law.atoms())
    )


@dataclass(frozen=True)
class ZeroPoint:
    x: tuple
    y: tuple
    value_a: object
    value_b: object

    @property
    def gap(self) -> float:
        return float(self.value_a) - float(self.value_b)


@dataclass(frozen=True)
class ZeroFunctionComparison:
    """Pointwise comparison of two laws' zero functions over a finite grid.

    ``verdict`` is one of ``a_dominates`` (law a's zero function is >= b's
    everywhere, strictly somewhere), ``b_dominates`` (the reverse),
    ``equal`` (coincide at every point), or ``incomparable`` (each is
    strictly larger somewhere); the one-sided flags expose weak domination
    directly.
    """

    verdict: str
    a_geq_b_everywhere: bool
    b_geq_a_everywhere: bool
    equal_everywhere: bool
    witness_a_above: ZeroPoint | None
    witness_b_above: ZeroPoint | None
    points_checked: int
    max_gap: float
    table: tuple[ZeroPoint, ...]

    def __bool__(self):
        return self.verdict != "incomparable"


def _argument_multisets(grid, max_size):
    out = []
    values = [as_exact(v) for v in grid]
    for size in range(max_size + 1):
        out.extend(itertools.combinations_with_replacement(values, size))
    return out


def compare_zero_functions(
    law_a: WeightLaw,
    law_b: WeightLaw,
    kernel: Kernel,
    max_A: int,
    max_B: int,
    x_grid,
    y_grid,
) -> ZeroFunctionComparison:
    """Evaluate both zero functions on every multiset pair up to the size caps.

    Zero functions are symmetric in their arguments, so multisets (not
    tuples) of grid values are enumerated; sizes run from (0, 0) up to
    (max_A, max_B) inclusive.
    """
    if max_A < 0 or max_B < 0:
        raise InvalidParameterError("size caps must be >= 0")
    if not x_grid or not y_grid:
        raise InvalidParameterError("argument grids must be nonempty")
    xs = _argument_multisets(x_grid, max_A)
    ys = _argument_multisets(y_grid, max_B)
    rows = []
    a_geq = True
    b_geq = True
    witness_a = None
    witness_b = None
    max_gap = 0.0
    for x in xs:
        for y in ys:
            q = ZeroFunctionQuery(x, y)
            za = zero_function(q, law_a, kernel)
            zb = zero_function(q, law_b, kernel)
            if za.is_exact and zb.is_exact:
                va, vb = za.exact, zb.exact
                lo = hi = 0
            else:
                va, vb = za.value, zb.value
                lo, hi = -VERDICT_TOL, VERDICT_TOL
            point = ZeroPoint(x, y, va, vb)
            rows.append(point)
            diff = va - vb
            if diff > hi:
                b_geq = False
                if witness_a is None:
                    witness_a = point
            if diff < lo:
                a_geq = False
                if witness_b is None:
                    witness_b = point
            max_gap = max(max_gap, abs(float(diff)))
    equal = a_geq and b_geq
    if equal:
        verdict = "equal"
    elif a_geq:
        verdict = "a_dominates"
    elif b_geq:
        verdict = "b_dominates"
    else:
        verdict = "incomparable"
    return ZeroFunctionComparison(
        verdict, a_geq, b_geq, equal, witness_a, witness_b,
        len(xs) * len(ys), max_gap, tuple(rows),
    )


def default_argument_grid(laws, coordinate: str):
    """Grid of plausible neighbour arguments: support values plus midpoints.

    ``coordinate`` is "susceptibility" (collect wbar atoms — the values a
    downstream neighbour can present) or "infectivity" (collect w atoms).
    """
    if coordinate not in ("susceptibility", "infectivity"):
        raise InvalidParameterError(f"unknown coordinate {coordinate!r}")
    pick = 1 if coordinate == "susceptibility" else 0
    values = set()
    for law in laws:
        if not law.finite_support:
            raise InvalidParameterError("default grids need finite-support laws")
        for pair, _ in law.atoms():
            values.add(as_exact(pair[pick]))
    base = sorted(values, key=float)
    grid = list(base)
    for a, b in zip(base, base[1:]):
        grid.append((a + b) / 2)
    return tuple(sorted(set(grid), key=float))


def _refine_grid(grid):
    base = sorted({as_exact(v) for v in grid}, key=float)
    out = list(base)
    for a, b in zip(base, base[1:]):
        out.append((a + b) / 2)
    return tuple(sorted(set(out), key=float))


# ---------------------------------------------------------------------------
# Comparison-bound verification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TheoremCheckRecord:
    """Outcome of checking one comparison bound on one exact instance.

    ``verdict`` is "holds", "violated", or (for the law-ordering check)
    "premise-not-met".  ``lhs``/``rhs`` are the two exactly computed sides;
    ``slack`` is how much room the inequality had (negative ⇔ violated).
    """

    statement: str
    description: str
    verdict: str
    lhs: ExactProbability | None
    rhs: ExactProbability | None
    slack: float | None
    slack_exact: Fraction | None
    p: float | None = None
    p_exact: Fraction | None = None
    premise: ZeroFunctionComparison | None = None
    premise_witness: ZeroPoint | None = None
    refined: bool = False

    @property
    def instance_hash(self) -> str:
        return hashlib.sha256(self.description.encode()).hexdigest()[:12]

    def summary_line(self) -> str:
        lhs = self.lhs.as_text() if self.lhs is not None else "-"
        rhs = self.rhs.as_text() if self.rhs is not None else "-"
        slack = (
            render_number(self.slack_exact)
            if self.slack_exact is not None
            else (repr(self.slack) if self.slack is not None else "-")
        )
        return (
            f"{self.statement} [{self.instance_hash}]: {self.verdict}"
            f" lhs={lhs} rhs={rhs} slack={slack}"
        )


def _compare_sides(lhs: ExactProbability, rhs: ExactProbability, direction: str):
    """Slack of ``lhs <= rhs`` ("upper") or ``lhs >= rhs`` ("lower")."""
    if lhs.is_exact and rhs.is_exact:
        slack_exact = (rhs.exact - lhs.exact) if direction == "upper" else (lhs.exact - rhs.exact)
        verdict = "holds" if slack_exact >= 0 else "violated"
        return verdict, float(slack_exact), slack_exact
    slack = (rhs.value - lhs.value) if direction == "upper" else (lhs.value - rhs.value)
    verdict = "holds" if slack >= -VERDICT_TOL else "violated"
    return verdict, slack, None


def _instance_text(graph, law_text, kernel, collection, extra="") -> str:
    return (
        f"graph={graph!r} laws={law_text} kernel={kernel!r} "
        f"collection={collection!r}{extra}"
    )


def _require_iid_law(law) -> WeightLaw:
    if isinstance(law, LawMap):
        if not law.homogeneous:
            raise HypothesisNotMetError(
                "this bound needs one shared weight law; per-vertex overrides break it"
            )
        return law.default
    if isinstance(law, WeightLaw):
        return law
    raise InvalidParameterError(f"expected a weight law, got {type(law).__name__}")


def _kernel_probe_grid(law: WeightLaw):
    """Products the instance can feed the kernel, padded (inward, so the
    kernel is never probed outside the range it will actually see) to the
    three points the validator needs."""
    values = {Fraction(0)}
    for (w, _), _ in law.atoms():
        for (_, wbar), _ in law.atoms():
            values.add(as_exact(w) * as_exact(wbar))
    grid = sorted(values, key=float)
    if len(grid) == 1:  # the all-zero law exercises nothing; probe [0, 1]
        grid = [Fraction(0), Fraction(1, 2), Fraction(1)]
    while len(grid) < 3:
        mids = [(a + b) / 2 for a, b in zip(grid, grid[1:])]
        grid = sorted(set(grid) | set(mids), key=float)
    return grid


def _checked_kernel(kernel: Kernel, law: WeightLaw) -> None:
    report = validate_kernel(kernel, _kernel_probe_grid(law))
    if not report.passed:
        raise HypothesisNotMetError(
            f"kernel failed validation at {report.violations[0]}"
        )


def _certified(collection: PathCollection, graph: DirectedGraph) -> PathCollection:
    return certify(collection, graph)


def verify_theorem_1_1(
    graph: DirectedGraph,
    law,
    kernel: Kernel,
    collection: PathCollection,
    p=None,
    *,
    edge_cap: int = DEFAULT_EDGE_CAP,
    assignment_cap: int = DEFAULT_ASSIGNMENT_CAP,
) -> TheoremCheckRecord:
    """Check the upper comparison bound: weighted <= bernoulli-edge model.

    The bound needs every vertex to share one law, a validated kernel, a
    splice-closed collection, and an edge probability at least
    kappa(max(E[W Wbar], E[W] E[Wbar])); the default ``p`` is that
    threshold.  Hypothesis failures raise and carry no verdict.
    """
    law_obj = _require_iid_law(law)
    if not law_obj.finite_support:
        raise InvalidParameterError("exact verification needs finite-support laws")
    _checked_kernel(kernel, law_obj)
    collection = _certified(collection, graph)

    e_w, e_wbar, e_prod = law_moments(law_obj)
    argument = e_prod if e_prod >= e_w * e_wbar else e_w * e_wbar
    threshold = kernel.of_product(argument)
    if p is None:
        p_val = threshold
    else:
        p_val = as_exact(p)
        if p_val < 0 or p_val > 1:
            raise InvalidParameterError(f"p must lie in [0, 1], got {render_number(p_val)}")
        below = (p_val < threshold) if isinstance(p_val, Rational) and isinstance(
            threshold, Rational
        ) else (float(p_val) < float(threshold) - VERDICT_TOL)
        if below:
            raise HypothesisNotMetError(
                f"p={render_number(p_val)} is below the domination threshold "
                f"{render_number(threshold) if isinstance(threshold, Rational) else threshold!r}"
            )

    lhs = exact_event_probability(graph, LawMap(law_obj), kernel, collection,
                                  edge_cap=edge_cap, assignment_cap=assignment_cap)
    rhs = bond_event_probability(graph, p_val, collection,
                                 edge_cap=edge_cap, assignment_cap=assignment_cap)
    verdict, slack, slack_exact = _compare_sides(lhs, rhs, "upper")
    return TheoremCheckRecord(
        statement="weighted-vs-bernoulli-edge upper bound",
        description=_instance_text(graph, repr(law_obj), kernel, collection,
                                   extra=f" p={render_number(p_val)}"),
        verdict=verdict,
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        slack_exact=slack_exact,
        p=float(p_val),
        p_exact=Fraction(p_val) if isinstance(p_val, Rational) else None,
    )


def _site_law(p) -> WeightLaw:
    p = as_exact(p)
    if p < 0 or p > 1:
        raise InvalidParameterError(f"density must lie in [0, 1], got {render_number(p)}")
    if p == 0:
        return PointMass(0, 0)
    if p == 1:
        return PointMass(1, 1)
    return DiscreteTable([((1, 1), p), ((0, 0), 1 - p)])


def verify_theorem_1_2(
    graph: DirectedGraph,
    law,
    collection: PathCollection,
    p=None,
    *,
    edge_cap: int = DEFAULT_EDGE_CAP,
    assignment_cap: int = DEFAULT_ASSIGNMENT_CAP,
) -> TheoremCheckRecord:
    """Check the lower comparison bound: weighted >= occupied-vertex model.

    Specific to the plain product kernel with weights in the unit square.
    The occupied-vertex side is encoded as the weighted model with law
    {(1,1): p, (0,0): 1-p}; the default density is p = E[W Wbar], and a
    user-supplied ``p`` must not exceed it.
    """
    law_obj = _require_iid_law(law)
    if not law_obj.finite_support:
        raise InvalidParameterError("exact verification needs finite-support laws")
    if not law_obj.in_unit_square():
        raise HypothesisNotMetError(
            "the lower bound needs weights in the unit square; "
            f"support box is {law_obj.support_box()}"
        )
    kernel = Kernel.factorisable()
    collection = _certified(collection, graph)

    _, _, e_prod = law_moments(law_obj)
    if p is None:
        p_val = e_prod
    else:
        p_val = as_exact(p)
        if p_val < 0 or p_val > 1:
            raise InvalidParameterError(f"p must lie in [0, 1], got {render_number(p_val)}")
        above = (p_val > e_prod) if isinstance(p_val, Rational) and isinstance(
            e_prod, Rational
        ) else (float(p_val) > float(e_prod) + VERDICT_TOL)
        if above:
            raise HypothesisNotMetError(
                f"density p={render_number(p_val)} exceeds E[W Wbar]="
                f"{render_number(e_prod) if isinstance(e_prod, Rational) else e_prod!r}"
            )

    lhs = exact_event_probability(graph, LawMap(law_obj), kernel, collection,
                                  edge_cap=edge_cap, assignment_cap=assignment_cap)
    rhs = exact_event_probability(graph, LawMap(_site_law(p_val)), kernel, collection,
                                  edge_cap=edge_cap, assignment_cap=assignment_cap)
    verdict, slack, slack_exact = _compare_sides(lhs, rhs, "lower")
    return TheoremCheckRecord(
        statement="weighted-vs-occupied-vertex lower bound",
        description=_instance_text(graph, repr(law_obj), kernel, collection,
                                   extra=f" p={render_number(p_val)}"),
        verdict=verdict,
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        slack_exact=slack_exact,
        p=float(p_val),
        p_exact=Fraction(p_val) if isinstance(p_val, Rational) else None,
    )


def verify_theorem_3_1(
    graph: DirectedGraph,
    law_a_map,
    law_b_map,
    kernel: Kernel,
    collection: PathCollection,
    x_grid=None,
    y_grid=None,
    *,
    edge_cap: int = DEFAULT_EDGE_CAP,
    assignment_cap: int = DEFAULT_ASSIGNMENT_CAP,
) -> TheoremCheckRecord:
    """Check the law-ordering bound: smaller zero functions reach more.

    Premise: at every vertex, law a's zero function is <= law b's at all
    argument multisets up to that vertex's out/in degrees, checked on the
    given grids (default: support values plus midpoints).  Conclusion: the
    event probability under the b laws is <= the one under the a laws.  A
    grid can pass the premise spuriously, so a conclusion violation first
    triggers one midpoint refinement of the grids; only if the refined
    premise still passes is "violated" reported.
    """
    law_a_map = _as_law_map(law_a_map)
    law_b_map = _as_law_map(law_b_map)
    collection = _certified(collection, graph)
    all_laws = law_a_map.distinct_laws() + law_b_map.distinct_laws()
    if x_grid is None:
        x_grid = default_argument_grid(all_laws, "susceptibility")
    if y_grid is None:
        y_grid = default_argument_grid(all_laws, "infectivity")

    def premise_check(xg, yg):
        seen = set()
        for v in range(graph.vertex_count):
            la, lb = law_a_map.law_for(v), law_b_map.law_for(v)
            caps = (graph.out_degree(v), graph.in_degree(v))
            key = (la, lb, caps)
            if la == lb or key in seen:
                continue
            seen.add(key)
            comparison = compare_zero_functions(la, lb, kernel, caps[0], caps[1], xg, yg)
            if not comparison.b_geq_a_everywhere:
                return comparison, comparison.witness_a_above
        return None, None

    description = _instance_text(
        graph, f"a={law_a_map.default!r}/{law_a_map.overrides!r} "
               f"b={law_b_map.default!r}/{law_b_map.overrides!r}", kernel, collection
    )
    failed, witness = premise_check(x_grid, y_grid)
    if failed is not None:
        return TheoremCheckRecord(
            statement="zero-function ordering bound",
            description=description,
            verdict="premise-not-met",
            lhs=None, rhs=None, slack=None, slack_exact=None,
            premise=failed, premise_witness=witness,
        )

    lhs = exact_event_probability(graph, law_b_map, kernel, collection,
                                  edge_cap=edge_cap, assignment_cap=assignment_cap)
    rhs = exact_event_probability(graph, law_a_map, kernel, collection,
                                  edge_cap=edge_cap, assignment_cap=assignment_cap)
    verdict, slack, slack_exact = _compare_sides(lhs, rhs, "upper")
    refined = False
    premise = None
    premise_witness = None
    if verdict == "violated":
        refined = True
        failed, witness = premise_check(_refine_grid(x_grid), _refine_grid(y_grid))
        if failed is not None:
            return TheoremCheckRecord(
                statement="zero-function ordering bound",
                description=description,
                verdict="premise-not-met",
                lhs=lhs, rhs=rhs, slack=slack, slack_exact=slack_exact,
                premise=failed, premise_witness=witness, refined=True,
            )
    return TheoremCheckRecord(
        statement="zero-function ordering bound",
        description=description,
        verdict=verdict,
        lhs=lhs,
        rhs=rhs,
        slack=slack,
        slack_exact=slack_exact,
        premise=premise,
        premise_witness=premise_witness,
        refined=refined,
    )


# ---------------------------------------------------------------------------
# The ordering counterexample, reproduced end to end
# ---------------------------------------------------------------------------


def counterexample_laws() -> tuple[DiscreteTable, DiscreteTable]:
    """The two weight laws whose event ordering defies naive comparison.

    Both share E[W Wbar] = 1/5 and agree on two-sided single arguments,
    yet neither zero function dominates the other once multi-argument
    queries are allowed, and the two-path event separates them the
    "wrong" way around.
    """
    h = Fraction(1, 2)
    fifth = Fraction(1, 5)
    law_a = DiscreteTable([
        ((0, 0), Fraction(3, 5)),
        ((h, 1), fifth),
        ((1, h), fifth),
    ])
    law_b = DiscreteTable([
        ((0, h), fifth),
        ((0, 1), fifth),
        ((h, 0), fifth),
        ((1, 0), fifth),
        ((1, 1), fifth),
    ])
    return law_a, law_b


def counterexample_two_path_collection(graph: DirectedGraph) -> ExplicitCollection:
    """Two paths through the origin that are NOT closed under splicing."""
    return ExplicitCollection((
        path_from_vertices(graph, (3, 0, 1)),
        path_from_vertices(graph, (4, 0, 2)),
    ))


def counterexample_crossing_closure(graph: DirectedGraph) -> ExplicitCollection:
    """The splice closure of the two crossing paths (all four in/out pairings)."""
    return ExplicitCollection(tuple(
        path_from_vertices(graph, (s, 0, t))
        for s in (3, 4)
        for t in (1, 2)
    ))


@dataclass(frozen=True)
class CounterexampleReport:
    graph: DirectedGraph
    collection: ExplicitCollection
    law_a: DiscreteTable
    law_b: DiscreteTable
    probability_a: ExactProbability
    probability_b: ExactProbability
    closed_form_a: Fraction
    closed_form_b: Fraction
    hoppability: HoppabilityReport
    zero_comparison: ZeroFunctionComparison

    @property
    def ordering_reversed(self) -> bool:
        return self.probability_a.exact > self.probability_b.exact

    def summary_lines(self) -> list[str]:
        return [
            f"event probability under law a: {self.probability_a.as_text()}",
            f"event probability under law b: {self.probability_b.as_text()}",
            f"closed-form cross-check: {render_number(self.closed_form_a)} and "
            f"{render_number(self.closed_form_b)}",
            f"collection splice-closed: {self.hoppability.weakly_hoppable}",
            f"zero-function comparison: {self.zero_comparison.verdict} over "
            f"{self.zero_comparison.points_checked} points",
            f"ordering reversed: {self.ordering_reversed}",
        ]


def reproduce_counterexample() -> CounterexampleReport:
    """Rebuild the ordering counterexample from scratch and cross-check it.

    The origin of a 4-neighbour star carries one of two laws; the event is
    "one of two crossing two-edge paths is open".  The exact probabilities
    (3/10 vs 1/5) come out of the general oracle, are re-derived from the
    closed form 1 - E[(1 - W Wbar)^2], and are accompanied by the failed
    splice-closure check and the incomparable zero-function table.
    """
    graph = counterexample_graph()
    law_a, law_b = counterexample_laws()
    collection = counterexample_two_path_collection(graph)

    def measure(law) -> ExactProbability:
        return exact_event_probability(
            graph, LawMap(PointMass(1, 1), {0: law}), Kernel.factorisable(), collection
        )

    def closed_form(law) -> Fraction:
        total = Fraction(0)
        for (w, wbar), prob in law.atoms():
            t = Fraction(w) * Fraction(wbar)
            total += Fraction(prob) * (1 - (1 - t) ** 2)
        return total

    prob_a, prob_b = measure(law_a), measure(law_b)
    cf_a, cf_b = closed_form(law_a), closed_form(law_b)
    if prob_a.exact != cf_a or prob_b.exact != cf_b:
        raise AssertionError(
            f"oracle and closed form disagree: {prob_a.as_text()} vs "
            f"{render_number(cf_a)}, {prob_b.as_text()} vs {render_number(cf_b)}"
        )
    hop = is_weakly_hoppable(collection, graph)
    grid = (Fraction(0), Fraction(1, 2), Fraction(1))
    comparison = compare_zero_functions(
        law_a, law_b, Kernel.factorisable(), 4, 4, grid, grid
    )
    return CounterexampleReport(
        graph=graph,
        collection=collection,
        law_a=law_a,
        law_b=law_b,
        probability_a=prob_a,
        probability_b=prob_b,
        closed_form_a=cf_a,
        closed_form_b=cf_b,
        hoppability=hop,
        zero_comparison=comparison,
    )


# ---------------------------------------------------------------------------
# Saturating-kernel reparametrization: scaled-weight equivalence holds
# per edge but not jointly
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class JointOpeningComparison:
    """Joint law of one sender's edge states under the two parametrizations."""

    w: object
    w_bars: tuple
    table_shared: tuple  # P(state) with one shared randomized infectivity
    table_independent: tuple  # P(state) with independent saturating edges
    total_variation: object

    @property
    def factorizes(self) -> bool:
        return float(self.total_variation) <= 1e-15


@dataclass(frozen=True)
class ReparametrizationReport:
    alpha: object
    beta: object
    star_size: int
    marginal_max_error: float
    marginal_tolerance: float
    marginals_match: bool
    alpha_shift_max_error: float
    joints: tuple[JointOpeningComparison, ...]
    max_total_variation: float

    def summary_lines(self) -> list[str]:
        return [
            f"per-edge marginals agree to {self.marginal_max_error:.3e} "
            f"(tolerance {self.marginal_tolerance:.0e}): {self.marginals_match}",
            f"alpha-invariance drift: {self.alpha_shift_max_error:.3e}",
            f"largest joint total-variation gap over {len(self.joints)} stars: "
            f"{self.max_total_variation:.6g}",
        ]


def _shared_exposure_table(w, w_bars, beta):
    """Joint open/closed table when one Exp(beta) variable scales all edges.

    P(pattern) = sum over subsets R of the open edges of (-1)^|R|
    beta/(beta + w * (sum of w_bars over R and the closed edges)) — the
    Laplace transform of the shared exposure evaluated at the closed set.
    """
    m = len(w_bars)
    exact = all(isinstance(v, Rational) for v in (w, beta, *w_bars))
    if exact:
        w, beta = Fraction(w), Fraction(beta)
        w_bars = [Fraction(v) for v in w_bars]
    else:
        w, beta = float(w), float(beta)
        w_bars = [float(v) for v in w_bars]
    table = []
    for state in range(1 << m):
        open_bits = [j for j in range(m) if (state >> j) & 1]
        closed_sum = sum(w_bars[j] for j in range(m) if not (state >> j) & 1)
        value = w * 0
        for r in range(1 << len(open_bits)):
            exponent = closed_sum
            for i, j in enumerate(open_bits):
                if (r >> i) & 1:
                    exponent = exponent + w_bars[j]
            term = beta / (beta + w * exponent)
            value = value + (term if r.bit_count() % 2 == 0 else -term)
        table.append(value)
    return table


def _independent_saturation_table(w, w_bars, beta):
    m = len(w_bars)
    exact = all(isinstance(v, Rational) for v in (w, beta, *w_bars))
    if exact:
        probs = [Fraction(w) * Fraction(v) / (Fraction(beta) + Fraction(w) * Fraction(v))
                 for v in w_bars]
        one = Fraction(1)
    else:
        probs = [float(w) * float(v) / (float(beta) + float(w) * float(v)) for v in w_bars]
        one = 1.0
    table = []
    for state in range(1 << m):
        value = one
        for j in range(m):
            value = value * (probs[j] if (state >> j) & 1 else one - probs[j])
        table.append(value)
    return table


def check_kernel_reparametrization(
    w_grid,
    w_bar_grid,
    alpha,
    beta,
    star_size: int = 2,
    *,
    marginal_tolerance: float = 1e-10,
) -> ReparametrizationReport:
    """Compare the saturating kernel with its randomized-exposure encoding.

    Scaling each sender's infectivity by an independent Exp(beta)/alpha
    draw turns the exponential kernel 1-exp(-alpha z) into the saturating
    kernel z/(beta+z) edge by edge: single-edge opening probabilities
    match exactly (verified here by quadrature against the closed form,
    and at a shifted alpha to exhibit the cancellation).  Jointly they
    differ: on a star of ``star_size`` out-edges the shared draw couples
    the edges, and the total-variation gap to the independent product law
    is reported per argument combination.
    """
    alpha_x = as_exact(alpha)
    beta_x = as_exact(beta)
    if not (star_size >= 1):
        raise InvalidParameterError(f"star size must be >= 1, got {star_size}")
    if star_size > 3:
        raise InvalidParameterError(
            f"star size capped at 3 (2^m tables per argument combination), got {star_size}"
        )
    if float(alpha_x) <= 0 or float(beta_x) <= 0:
        raise InvalidParameterError("alpha and beta must be positive")
    ws = [as_exact(v) for v in w_grid]
    wbs = [as_exact(v) for v in w_bar_grid]
    if not ws or not wbs:
        raise InvalidParameterError("argument grids must be nonempty")
    if any(v < 0 for v in ws + wbs):
        raise InvalidParameterError("weights must be nonnegative")

    from scipy.integrate import quad

    def quadrature_marginal(w, wb, a):
        af, bf, wf, wbf = float(a), float(beta_x), float(w), float(wb)

        def integrand(lam):
            scaled = lam * wf / af  # the rescaled infectivity actually used
            return bf * math.exp(-bf * lam) * (1.0 - math.exp(-af * scaled * wbf))

        value, _ = quad(integrand, 0.0, np.inf, epsabs=1e-14, epsrel=1e-13, limit=200)
        return value

    marginal_err = 0.0
    shift_err = 0.0
    for w in ws:
        for wb in wbs:
            z = float(w) * float(wb)
            closed = z / (float(beta_x) + z)
            base = quadrature_marginal(w, wb, float(alpha_x))
            shifted = quadrature_marginal(w, wb, 2.0 * float(alpha_x))
            marginal_err = max(marginal_err, abs(base - closed))
            shift_err = max(shift_err, abs(shifted - closed))

    joints = []
    max_tv = 0.0
    for w in ws:
        for combo in itertools.combinations_with_replacement(wbs, star_size):
            shared = _shared_exposure_table(w, combo, beta_x)
            independent = _independent_saturation_table(w, combo, beta_x)
            diffs = [a - b for a, b in zip(shared, independent)]
            if all(isinstance(d, Rational) for d in diffs):
                tv = sum(abs(d) for d in diffs) / 2
            else:
                tv = sum(abs(float(d)) for d in diffs) / 2.0
            joints.append(JointOpeningComparison(
                w, tuple(combo), tuple(shared), tuple(independent), tv
            ))
            max_tv = max(max_tv, float(tv))

    return ReparametrizationReport(
        alpha=alpha_x,
        beta=beta_x,
        star_size=star_size,
        marginal_max_error=marginal_err,
        marginal_tolerance=marginal_tolerance,
        marginals_match=marginal_err <= marginal_tolerance,
        alpha_shift_max_error=shift_err,
        joints=tuple(joints),
        max_total_variation=max_tv,
    )


# ---------------------------------------------------------------------------
# Randomized small instances for sweep harnesses
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HarnessInstance:
    graph: DirectedGraph
    law: DiscreteTable
    kernel: Kernel
    collection: PathCollection
    descriptor: str

    @property
    def instance_hash(self) -> str:
        return hashlib.sha256(self.descriptor.encode()).hexdigest()[:12]


_COORD_CHOICES = (
    Fraction(0), Fraction(1, 4), Fraction(1, 3), Fraction(1, 2),
    Fraction(2, 3), Fraction(3, 4), Fraction(1),
)


def _random_law(rng: np.random.Generator) -> DiscreteTable:
    n_atoms = int(rng.integers(1, 4))
    pairs = set()
    while len(pairs) < n_atoms:
        w = _COORD_CHOICES[int(rng.integers(len(_COORD_CHOICES)))]
        wb = _COORD_CHOICES[int(rng.integers(len(_COORD_CHOICES)))]
        pairs.add((w, wb))
    weights = [int(rng.integers(1, 6)) for _ in pairs]
    total = sum(weights)
    return DiscreteTable([
        (pair, Fraction(c, total)) for pair, c in zip(sorted(pairs), weights)
    ])


def _random_graph(rng: np.random.Generator, max_edges: int) -> DirectedGraph:
    from .graphs import build_from_edge_list, build_rooted_tree, build_square_lattice

    kind = int(rng.integers(4))
    if kind == 0:
        return build_square_lattice(2)
    if kind == 1:
        return counterexample_graph()
    if kind == 2:
        out_deg, depth = [(1, 3), (2, 2), (1, 2), (3, 1), (2, 1)][int(rng.integers(5))]
        return build_rooted_tree(out_deg, depth)
    n = int(rng.integers(4, 8))
    possible = [(u, v) for u in range(n) for v in range(n) if u != v]
    count = int(rng.integers(n - 1, min(max_edges, len(possible)) + 1))
    chosen = rng.choice(len(possible), size=count, replace=False)
    edges = [possible[i] for i in sorted(int(c) for c in chosen)]
    return build_from_edge_list(edges, vertex_count=n)


def _random_kernel(rng: np.random.Generator, kinds) -> Kernel:
    kind = kinds[int(rng.integers(len(kinds)))]
    if kind == "factorisable":
        return Kernel.factorisable()
    if kind == "exponential":
        return Kernel.exponential((Fraction(1, 2), Fraction(1), Fraction(2))[int(rng.integers(3))])
    if kind == "geometric":
        return Kernel.geometric((Fraction(1, 2), Fraction(1), Fraction(2))[int(rng.integers(3))])
    raise InvalidParameterError(f"unknown kernel kind {kind!r}")


def _random_collection(rng: np.random.Generator, graph: DirectedGraph) -> PathCollection:
    n = graph.vertex_count
    source = int(rng.integers(n))
    if rng.random() < 0.5:
        target = int(rng.integers(n))
        while target == source and n > 1:
            target = int(rng.integers(n))
        return AllPathsBetween(source, target)
    others = [v for v in range(n) if v != source]
    size = int(rng.integers(1, min(3, len(others)) + 1))
    picked = rng.choice(len(others), size=size, replace=False)
    return BoundaryReaching(source, frozenset(others[int(i)] for i in picked))


def random_instance(
    rng: np.random.Generator,
    *,
    max_edges: int = 10,
    kernel_kinds=("factorisable", "exponential", "geometric"),
    unit_square_only: bool = False,
) -> HarnessInstance:
    """One random small instance: graph, rational law, kernel, canonical collection.

    Sized so the exhaustive oracle always succeeds: at most ``max_edges``
    edges, at most 3 rational atoms per law, canonical (hence splice-closed)
    collections.  ``unit_square_only`` restricts kernels to the plain
    product (whose domain is the unit square); the law coordinates are
    always inside it.
    """
    graph = _random_graph(rng, max_edges)
    law = _random_law(rng)
    kinds = ("factorisable",) if unit_square_only else kernel_kinds
    kernel = _random_kernel(rng, kinds)
    collection = _random_collection(rng, graph)
    descriptor = f"graph={graph!r} law={law!r} kernel={kernel!r} collection={collection!r}"
    return HarnessInstance(graph, law, kernel, collection, descriptor)
