"""Sampling engines for the weighted, bond, and site edge models.

A weighted model opens edge (u, v) with conditional probability
kernel(infectivity of u x susceptibility of v) given the per-vertex
weight pairs, independently across edges.  The bond model opens every
edge independently at a flat rate; the site model is the weighted model
with the two-point law {(1,1): p, (0,0): 1-p} and the product kernel,
and is implemented literally through that encoding.

Draw discipline (shared with both backends): a configuration consumes
one uniform per non-point-mass vertex in vertex order, then one uniform
per edge in enumeration order.  Estimators split replications over a
fixed number of seed streams (STREAM_COUNT) spawned from the master
seed, so results are independent of the thread count and reproducible
bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from statistics import NormalDist

import numpy as np

from . import backend
from .errors import InvalidParameterError, KernelRangeError
from .graphs import DirectedGraph, build_square_lattice, lattice_border
from .paths import (
    AllPathsBetween,
    BoundaryReaching,
    ExplicitCollection,
    PathCollection,
)
from .weights import (
    DiscreteTable,
    Kernel,
    LawMap,
    PointMass,
    WeightLaw,
    as_exact,
    kappa_eval,
    normalize_factorisable,
    render_number,
)

STREAM_COUNT = 64
MIN_REPLICATIONS = 100


# -- results -----------------------------------------------------------------


@dataclass(frozen=True)
class EdgeConfiguration:
    """One sampled configuration: per-edge open flags, and the weight pairs
    when the model retains them."""

    states: np.ndarray
    w: np.ndarray | None = None
    w_bar: np.ndarray | None = None

    @property
    def open_count(self) -> int:
        return int(self.states.sum())


@dataclass(frozen=True)
class ClusterStats:
    """Directed cluster of a source vertex over open edges."""

    size: int
    reached_boundary: bool
    frontier_distance: int


@dataclass(frozen=True)
class EstimateWithCI:
    """A Monte Carlo estimate with a confidence interval.

    Proportions carry ``successes`` and a Wilson score interval; means
    carry ``std_error`` and a normal interval.
    """

    estimate: float
    ci_low: float
    ci_high: float
    replications: int
    confidence: float = 0.95
    successes: int | None = None
    std_error: float | None = None


def wilson_interval(successes: int, n: int, confidence: float = 0.95):
    """Wilson score interval for a binomial proportion."""
    if not (0 < confidence < 1):
        raise InvalidParameterError(f"confidence {confidence} outside (0, 1)")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    phat = successes / n
    denom = 1.0 + z * z / n
    center = (phat + z * z / (2.0 * n)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom
    # At the boundaries the exact Wilson endpoints are 0 and 1; the float
    # sqrt can land an ulp off, which would wrongly exclude them.
    lo = 0.0 if successes == 0 else max(0.0, center - half)
    hi = 1.0 if successes == n else min(1.0, center + half)
    return phat, lo, hi


# -- percolation models ------------------------------------------------------


@dataclass(frozen=True)
class _Prepared:
    laws: object
    kernel_code: int | None
    kernel_a: float
    kernel_b: float
    kernel: Kernel | None  # only for the slow path (custom kernels)

    @property
    def law_args(self):
        c = self.laws
        return (
            c.kind, c.par_a, c.par_b, c.tab_indptr,
            c.tab_cdf, c.tab_w, c.tab_wbar, c.vertex_law,
        )


def _builtin_code(kernel: Kernel):
    if kernel.kind == "factorisable" and not kernel.has_factor_maps:
        return backend.K_PRODUCT, 0.0, 0.0
    if kernel.kind == "exponential":
        return backend.K_EXPONENTIAL, float(kernel.alpha), 0.0
    if kernel.kind == "geometric":
        return backend.K_GEOMETRIC, 0.0, float(kernel.beta)
    return None


class WeightedModel:
    """Weight law(s) + kernel on a directed graph.

    ``law`` may be a single law (shared by all vertices) or a LawMap with
    per-vertex overrides.  A factorisable kernel carrying component maps
    is folded into the law up front (the retained weights are then the
    mapped pairs, the ones the edge probabilities actually use).
    """

    def __init__(self, graph: DirectedGraph, law, kernel: Kernel, retain_weights: bool = False):
        if not isinstance(kernel, Kernel):
            raise InvalidParameterError("kernel must be a Kernel instance")
        self.graph = graph
        self.law_map = law if isinstance(law, LawMap) else LawMap(law)
        self.kernel = kernel
        self.retain_weights = bool(retain_weights)
        self._prepared: _Prepared | None = None

    def prepare(self) -> _Prepared:
        if self._prepared is not None:
            return self._prepared
        law_map, kernel = self.law_map, self.kernel
        if kernel.kind == "factorisable" and kernel.has_factor_maps:
            law_map = LawMap(
                normalize_factorisable(law_map.default, kernel),
                {v: normalize_factorisable(l, kernel) for v, l in law_map.overrides.items()},
            )
            kernel = Kernel.factorisable()
        code = _builtin_code(kernel)
        if code is not None and code[0] == backend.K_PRODUCT:
            for law in law_map.distinct_laws():
                if not law.in_unit_square():
                    raise KernelRangeError(
                        "the product kernel needs weights inside the unit square; "
                        f"{law!r} puts mass outside"
                    )
        compiled = law_map.compile(self.graph.vertex_count)
        if code is None:
            self._prepared = _Prepared(compiled, None, 0.0, 0.0, kernel)
        else:
            self._prepared = _Prepared(compiled, code[0], code[1], code[2], None)
        return self._prepared

    def signature(self) -> str:
        g = self.graph
        parts = [
            f"graph={g.meta.get('kind', 'custom')}[n={g.vertex_count},m={g.edge_count}"
            + (f",side={g.meta['side']},boundary={g.meta['boundary']}" if "side" in g.meta else "")
            + "]",
            f"law={_law_map_text(self.law_map)}",
            f"kernel={kernel_text(self.kernel)}",
            f"retain_weights={self.retain_weights}",
        ]
        return "weighted(" + ";".join(parts) + ")"


class SiteModel(WeightedModel):
    """Vertices are on with probability p; an edge is open when both ends
    are on.  Realized as the weighted model with the two-point law
    {(1,1): p, (0,0): 1-p} and the product kernel."""

    def __init__(self, graph: DirectedGraph, p):
        p = as_exact(p)
        if not (0 <= p <= 1):
            raise InvalidParameterError(f"site density {p} outside [0, 1]")
        self.p = p
        super().__init__(graph, site_law(p), Kernel.factorisable())

    def signature(self) -> str:
        g = self.graph
        return f"site(p={render_number(self.p)};n={g.vertex_count};m={g.edge_count})"


def site_law(p) -> WeightLaw:
    """The two-point weight law encoding the site model at density p."""
    p = as_exact(p)
    if p == 0:
        return PointMass(0, 0)
    if p == 1:
        return PointMass(1, 1)
    one = Fraction(1) if isinstance(p, Fraction) else 1.0
    return DiscreteTable([((1, 1), p), ((0, 0), one - p)])


class BondModel:
    """Every edge open independently with probability p (no weights)."""

    retain_weights = False

    def __init__(self, graph: DirectedGraph, p):
        p = as_exact(p)
        if not (0 <= p <= 1):
            raise InvalidParameterError(f"bond parameter {p} outside [0, 1]")
        self.graph = graph
        self.p = p
        self.law_map = LawMap(PointMass(1, 1))
        self.kernel = None
        self._prepared: _Prepared | None = None

    def prepare(self) -> _Prepared:
        if self._prepared is None:
            compiled = self.law_map.compile(self.graph.vertex_count)
            self._prepared = _Prepared(compiled, backend.K_CONSTANT, float(self.p), 0.0, None)
        return self._prepared

    def signature(self) -> str:
        g = self.graph
        return f"bond(p={render_number(self.p)};n={g.vertex_count};m={g.edge_count})"


def _law_text(law: WeightLaw) -> str:
    if law.kind == "identical_uniform":
        return f"identical_uniform(a={render_number(law.a)})"
    atoms = ",".join(
        f"({render_number(w)},{render_number(v)}):{render_number(p)}"
        for (w, v), p in law.atoms()
    )
    return f"{law.kind}{{{atoms}}}"


def _law_map_text(law_map: LawMap) -> str:
    text = _law_text(law_map.default)
    if law_map.overrides:
        inner = ",".join(
            f"{v}:{_law_text(law)}" for v, law in sorted(law_map.overrides.items())
        )
        text += f"+overrides{{{inner}}}"
    return text


def kernel_text(kernel: Kernel) -> str:
    if kernel.kind == "factorisable":
        return "product+maps" if kernel.has_factor_maps else "product"
    if kernel.kind == "exponential":
        return f"exponential(alpha={render_number(kernel.alpha)})"
    if kernel.kind == "geometric":
        return f"geometric(beta={render_number(kernel.beta)})"
    return "custom"


# -- single-shot sampling -------------------------------------------------------


def _as_bit_generator(rng) -> np.random.BitGenerator:
    if isinstance(rng, np.random.BitGenerator):
        return rng
    if isinstance(rng, np.random.Generator):
        return rng.bit_generator
    if isinstance(rng, (int, np.integer)):
        return np.random.PCG64(np.random.SeedSequence(int(rng)))
    if isinstance(rng, np.random.SeedSequence):
        return np.random.PCG64(rng)
    raise InvalidParameterError(f"cannot interpret {rng!r} as a random source")


def sample_configuration(model, rng) -> EdgeConfiguration:
    """Sample weights (vertex order), then edge states (enumeration order)."""
    bg = _as_bit_generator(rng)
    prep = model.prepare()
    g = model.graph
    w = np.empty(g.vertex_count)
    wbar = np.empty(g.vertex_count)
    backend.sample_vertex_weights(bg, *prep.law_args, w, wbar)
    states = np.empty(g.edge_count, np.uint8)
    if prep.kernel_code is not None:
        backend.sample_edge_states(
            bg, g.tails, g.heads, prep.kernel_code, prep.kernel_a, prep.kernel_b,
            w, wbar, states,
        )
    else:
        u = np.random.Generator(bg).random(g.edge_count)
        for e in range(g.edge_count):
            p = kappa_eval(prep.kernel, w[g.tails[e]], wbar[g.heads[e]])
            states[e] = 1 if u[e] < p else 0
    if model.retain_weights:
        return EdgeConfiguration(states, w, wbar)
    return EdgeConfiguration(states)


def sample_bond(graph: DirectedGraph, p, rng) -> EdgeConfiguration:
    """I.i.d. edges at rate p: one uniform per edge in enumeration order."""
    return sample_configuration(BondModel(graph, p), rng)


def sample_site(graph: DirectedGraph, p, rng) -> EdgeConfiguration:
    """Site model at density p, via its weighted-model encoding."""
    return sample_configuration(SiteModel(graph, p), rng)


def reach_cluster(
    graph: DirectedGraph, configuration, source: int, boundary=None, early_exit: bool = False
) -> ClusterStats:
    """Directed cluster of ``source`` over open edges; optionally stops at
    the first boundary touch (size is then a lower bound)."""
    if not (0 <= source < graph.vertex_count):
        raise InvalidParameterError(f"source {source} outside graph")
    states = np.ascontiguousarray(
        getattr(configuration, "states", configuration), dtype=np.uint8
    )
    if states.shape[0] != graph.edge_count:
        raise InvalidParameterError(
            f"configuration covers {states.shape[0]} edges, graph has {graph.edge_count}"
        )
    if boundary is None:
        mask = np.zeros(0, np.uint8)
    else:
        mask = np.zeros(graph.vertex_count, np.uint8)
        mask[np.asarray(list(boundary) if not isinstance(boundary, np.ndarray) else boundary)] = 1
    size, reached, dist = backend.bfs_cluster(
        graph.out_indptr, graph.out_edge_ids, graph.heads, states, source, mask, early_exit
    )
    return ClusterStats(int(size), bool(reached), int(dist))


# -- replicated estimation --------------------------------------------------------


def _stream_plan(replications: int, seq: np.random.SeedSequence):
    k = min(STREAM_COUNT, replications)
    bounds = [replications * b // k for b in range(k + 1)]
    bit_gens = [np.random.PCG64(child) for child in seq.spawn(k)]
    return [
        (bit_gens[b], bounds[b], bounds[b + 1])
        for b in range(k)
        if bounds[b + 1] > bounds[b]
    ]


def _run_streams(run, plan, threads: int):
    if threads <= 1:
        for job in plan:
            run(*job)
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(lambda job: run(*job), plan))


def _as_seed_sequence(master_seed) -> np.random.SeedSequence:
    if isinstance(master_seed, np.random.SeedSequence):
        return master_seed
    return np.random.SeedSequence(int(master_seed))


def _compile_event(collection: PathCollection, graph: DirectedGraph):
    """Flatten a collection into backend event arrays."""
    n = graph.vertex_count
    if isinstance(collection, ExplicitCollection):
        indptr = np.zeros(len(collection.paths) + 1, np.int64)
        flat: list[int] = []
        for i, p in enumerate(collection.paths):
            flat.extend(p.edges)
            indptr[i + 1] = len(flat)
        edges = np.array(flat, np.int64)
        if edges.size and (edges.max() >= graph.edge_count or edges.min() < 0):
            raise InvalidParameterError("collection references edges outside the graph")
        return 0, indptr, edges, 0, np.zeros(0, np.uint8)
    if isinstance(collection, AllPathsBetween):
        mask = np.zeros(n, np.uint8)
        mask[collection.target] = 1
        return 1, np.zeros(1, np.int64), np.zeros(0, np.int64), collection.source, mask
    if isinstance(collection, BoundaryReaching):
        mask = np.zeros(n, np.uint8)
        for b in collection.boundary:
            mask[b] = 1
        return 1, np.zeros(1, np.int64), np.zeros(0, np.int64), collection.source, mask
    raise InvalidParameterError(f"unknown collection {collection!r}")


def _slow_two_phase(bg, prep, graph, event, need_sizes, hits_view, sizes_view):
    """Replication loop for custom kernels: same draw order, Python kappa."""
    event_kind, path_indptr, path_edges, source, mask = event
    gen = np.random.Generator(bg)
    n, m = graph.vertex_count, graph.edge_count
    w = np.empty(n)
    wbar = np.empty(n)
    states = np.empty(m, np.uint8)
    members = [
        path_edges[path_indptr[i] : path_indptr[i + 1]]
        for i in range(len(path_indptr) - 1)
    ]
    for rep in range(len(hits_view)):
        backend.sample_vertex_weights(bg, *prep.law_args, w, wbar)
        u = gen.random(m)
        for e in range(m):
            p = kappa_eval(prep.kernel, w[graph.tails[e]], wbar[graph.heads[e]])
            states[e] = 1 if u[e] < p else 0
        if event_kind == 0:
            hit = any(states[seg].all() for seg in members)
            size = 0
            if need_sizes:
                size, _, _ = backend.bfs_cluster(
                    graph.out_indptr, graph.out_edge_ids, graph.heads, states,
                    source, np.zeros(0, np.uint8),
                )
        else:
            size, hit, _ = backend.bfs_cluster(
                graph.out_indptr, graph.out_edge_ids, graph.heads, states,
                source, mask, not need_sizes,
            )
        hits_view[rep] = 1 if hit else 0
        sizes_view[rep] = size


def _replicate(model, event, replications, master_seed, threads, need_sizes):
    if replications < MIN_REPLICATIONS:
        raise InvalidParameterError(
            f"replications must be at least {MIN_REPLICATIONS}, got {replications}"
        )
    prep = model.prepare()
    g = model.graph
    event_kind, path_indptr, path_edges, source, mask = event
    hits = np.zeros(replications, np.uint8)
    sizes = np.zeros(replications, np.int64)
    plan = _stream_plan(replications, _as_seed_sequence(master_seed))

    if prep.kernel_code is None:
        def run(bg, lo, hi):
            _slow_two_phase(bg, prep, g, event, need_sizes, hits[lo:hi], sizes[lo:hi])
    else:
        def run(bg, lo, hi):
            backend.two_phase_replications(
                bg, hi - lo, g.tails, g.heads, g.out_indptr, g.out_edge_ids,
                *prep.law_args, prep.kernel_code, prep.kernel_a, prep.kernel_b,
                event_kind, path_indptr, path_edges, source, mask, need_sizes,
                hits[lo:hi], sizes[lo:hi],
            )

    _run_streams(run, plan, threads)
    return hits, sizes


def estimate_event(
    model, collection: PathCollection, replications: int, master_seed,
    threads: int = 1, confidence: float = 0.95,
) -> EstimateWithCI:
    """Monte Carlo probability that at least one member path is fully open,
    with a Wilson score interval."""
    event = _compile_event(collection, model.graph)
    hits, _ = _replicate(model, event, replications, master_seed, threads, False)
    k = int(hits.sum())
    est, lo, hi = wilson_interval(k, replications, confidence)
    return EstimateWithCI(est, lo, hi, replications, confidence, successes=k)


def estimate_expected_cluster_size(
    model, source: int, replications: int, master_seed,
    threads: int = 1, confidence: float = 0.95,
) -> EstimateWithCI:
    """Monte Carlo mean directed-cluster size of ``source``, with a normal
    interval on the mean."""
    if not (0 <= source < model.graph.vertex_count):
        raise InvalidParameterError(f"source {source} outside graph")
    event = (1, np.zeros(1, np.int64), np.zeros(0, np.int64), source,
             np.zeros(model.graph.vertex_count, np.uint8))
    _, sizes = _replicate(model, event, replications, master_seed, threads, True)
    mean = float(sizes.mean())
    se = float(sizes.std(ddof=1) / math.sqrt(replications))
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    return EstimateWithCI(
        mean, mean - z * se, mean + z * se, replications, confidence, std_error=se
    )


# -- boundary-survival sweeps -------------------------------------------------------


@dataclass(frozen=True)
class SweepPoint:
    side_length: int
    origin: int
    estimate: EstimateWithCI


def estimate_boundary_survival(
    model, replications: int, master_seed, threads: int = 1, confidence: float = 0.95,
) -> EstimateWithCI:
    """Probability that the origin's open cluster touches the lattice border.

    Uses the lazy draw-on-demand sweep when the model is a plain product-
    kernel weighted model without retained weights; otherwise falls back
    to two-phase sampling (identical distribution, different draw order).
    """
    g = model.graph
    if g.meta.get("kind") != "square_lattice" or g.meta.get("boundary") != "box":
        raise InvalidParameterError("boundary survival needs a box square lattice")
    if replications < MIN_REPLICATIONS:
        raise InvalidParameterError(
            f"replications must be at least {MIN_REPLICATIONS}, got {replications}"
        )
    origin = int(g.meta["origin"])
    mask = np.zeros(g.vertex_count, np.uint8)
    mask[lattice_border(g)] = 1
    prep = model.prepare()
    lazy = prep.kernel_code == backend.K_PRODUCT and not model.retain_weights
    hits = np.zeros(replications, np.uint8)
    plan = _stream_plan(replications, _as_seed_sequence(master_seed))
    if lazy:
        def run(bg, lo, hi):
            backend.survival_replications(
                bg, hi - lo, g.out_indptr, g.out_edge_ids, g.heads,
                *prep.law_args, prep.kernel_code, prep.kernel_a, prep.kernel_b,
                origin, mask, hits[lo:hi],
            )
        _run_streams(run, plan, threads)
    else:
        event = (1, np.zeros(1, np.int64), np.zeros(0, np.int64), origin, mask)
        hits, _ = _replicate(model, event, replications, master_seed, threads, False)
    k = int(hits.sum())
    est, lo, hi = wilson_interval(k, replications, confidence)
    return EstimateWithCI(est, lo, hi, replications, confidence, successes=k)


def boundary_survival_sweep(
    law, kernel: Kernel, side_lengths, replications: int, master_seed,
    threads: int = 1, confidence: float = 0.95,
) -> list[SweepPoint]:
    """Origin-to-border survival estimates over increasing box side lengths.

    Each side length gets its own child seed stream spawned from the
    master seed, so adding or removing sweep points never disturbs the
    others."""
    sides = [int(s) for s in side_lengths]
    if not sides:
        raise InvalidParameterError("side_lengths must be nonempty")
    if any(b <= a for a, b in zip(sides, sides[1:])):
        raise InvalidParameterError(f"side lengths must be strictly increasing: {sides}")
    children = _as_seed_sequence(master_seed).spawn(len(sides))
    points = []
    for side, child in zip(sides, children):
        graph = build_square_lattice(side)
        model = WeightedModel(graph, law, kernel)
        est = estimate_boundary_survival(model, replications, child, threads, confidence)
        points.append(SweepPoint(side, int(graph.meta["origin"]), est))
    return points
