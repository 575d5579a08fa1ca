"""Offspring laws on regular trees, extinction via pgf fixed points, and a
Monte Carlo cross-check of the branching description against direct tree
simulation.

The correspondence: on a ``d``-ary tree, count open paths from a forced
root through one fixed child down to generation ``k``.  Each interior
vertex extends a path iff its incoming edge opens (probability ``wbar``
given the parent transmits with full infectivity along the path) and then
opens a Binomial(d, w) number of outgoing edges — so path counts evolve as
a Galton-Watson process whose offspring law is an exact expectation over
the weight atoms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

from .engine import EstimateWithCI, WeightedModel, estimate_event
from .errors import (
    InstanceTooLargeError,
    InvalidParameterError,
    PercoweaveError,
)
from .graphs import build_from_edge_list
from .paths import BoundaryReaching
from .weights import (
    Kernel,
    LawMap,
    PointMass,
    WeightLaw,
    law_moments,
    render_number,
)

__all__ = [
    "OffspringLaw",
    "GWResult",
    "offspring_law",
    "gw_extinction",
    "gw_generation_survival",
    "TreeComparisonRecord",
    "compare_tree_mc",
]

PGF_RESIDUAL = 1e-14
PGF_MAX_ITERATIONS = 10**5
# Exact rational pgf iterates square the denominator size each step; past
# this depth the float path takes over.
EXACT_GENERATION_CAP = 12
TREE_VERTEX_CAP = 10**6


@dataclass(frozen=True)
class OffspringLaw:
    """Distribution of the number of path extensions through one vertex.

    ``probabilities[j]`` is P(j offspring), j = 0..d; exact rationals
    whenever the weight law is rational.  ``mean`` is sum(j * p_j), which
    for laws derived by :func:`offspring_law` equals d * E[W Wbar] exactly.
    """

    d: int
    probabilities: tuple
    mean: object

    def __post_init__(self):
        if self.d < 1:
            raise InvalidParameterError(f"out-degree must be >= 1, got {self.d}")
        if len(self.probabilities) != self.d + 1:
            raise InvalidParameterError(
                f"need {self.d + 1} probabilities for out-degree {self.d}, "
                f"got {len(self.probabilities)}"
            )
        for j, p in enumerate(self.probabilities):
            if p < 0:
                raise InvalidParameterError(f"p_{j} = {render_number(p)} is negative")
        total = sum(self.probabilities)
        if all(isinstance(p, Rational) for p in self.probabilities):
            if total != 1:
                raise InvalidParameterError(
                    f"offspring probabilities sum to {render_number(total)}"
                )
        elif abs(float(total) - 1.0) > 1e-12:
            raise InvalidParameterError(f"offspring probabilities sum to {total!r}")

    @property
    def is_rational(self) -> bool:
        return all(isinstance(p, Rational) for p in self.probabilities)

    def pgf(self, s):
        """E[s^offspring] by Horner evaluation."""
        acc = self.probabilities[-1] * 0
        for p in reversed(self.probabilities):
            acc = acc * s + p
        return acc

    def __repr__(self):
        probs = ", ".join(render_number(p) for p in self.probabilities)
        return f"OffspringLaw(d={self.d}, probabilities=({probs}))"


def offspring_law(law: WeightLaw, d: int) -> OffspringLaw:
    """Exact offspring distribution of the path-counting process.

    p_0 = E[1 - Wbar] + E[Wbar (1-W)^d] (the incoming edge fails, or it
    opens and every outgoing edge fails); for j >= 1,
    p_j = E[Wbar C(d, j) W^j (1-W)^(d-j)].  The mean telescopes to
    d * E[W Wbar], asserted exactly for rational laws.
    """
    if d < 1:
        raise InvalidParameterError(f"out-degree must be >= 1, got {d}")
    if not law.finite_support:
        raise InvalidParameterError("offspring laws need finite-support weight laws")
    if not law.in_unit_square():
        raise InvalidParameterError(
            f"offspring formulas need weights in [0, 1]^2; support box is "
            f"{law.support_box()}"
        )
    exact = law.is_rational
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    probs = [zero for _ in range(d + 1)]
    for (w, wbar), prob in law.atoms():
        if exact:
            w, wbar, prob = Fraction(w), Fraction(wbar), Fraction(prob)
        else:
            w, wbar, prob = float(w), float(wbar), float(prob)
        probs[0] = probs[0] + prob * ((one - wbar) + wbar * (one - w) ** d)
        for j in range(1, d + 1):
            probs[j] = probs[j] + prob * wbar * math.comb(d, j) * w**j * (one - w) ** (d - j)
    mean = sum(j * p for j, p in enumerate(probs))
    result = OffspringLaw(d, tuple(probs), mean)
    _, _, e_prod = law_moments(law)
    if exact:
        if mean != d * Fraction(e_prod):
            raise AssertionError(
                f"offspring mean {render_number(mean)} != d*E[W Wbar] = "
                f"{render_number(d * Fraction(e_prod))}"
            )
    elif abs(float(mean) - d * float(e_prod)) > 1e-12:
        raise AssertionError(f"offspring mean {mean!r} != d*E[W Wbar] = {d * float(e_prod)!r}")
    return result


@dataclass(frozen=True)
class GWResult:
    """Extinction probability and requested per-generation survival values.

    ``q`` is the smallest fixed point of the pgf in [0, 1]; ``survival``
    lists (k, P(generation k nonempty)) for each requested k, a
    nonincreasing sequence converging to 1 - q.
    """

    q: float
    survival: tuple
    iterations: int
    residual: float
    mean: float


def gw_extinction(offspring: OffspringLaw, generations=()) -> GWResult:
    """Smallest pgf fixed point by iterating s <- f(s) from 0.

    Non-supercritical laws (mean <= 1) go extinct with probability 1,
    except the degenerate single-child law, which survives forever; both
    are returned analytically since the iteration converges only
    polynomially at criticality.  Supercritical laws iterate to residual
    below 1e-14.
    """
    mean = float(offspring.mean)
    survival = tuple(
        (k, float(gw_generation_survival(offspring, k))) for k in generations
    )
    if float(offspring.probabilities[1]) == 1.0:
        # Exactly one child forever: the line never dies out.
        return GWResult(0.0, survival, 0, 0.0, mean)
    if mean <= 1.0:
        return GWResult(1.0, survival, 0, 0.0, mean)
    s = 0.0
    for iteration in range(1, PGF_MAX_ITERATIONS + 1):
        s_next = float(offspring.pgf(s))
        residual = abs(s_next - s)
        s = s_next
        if residual < PGF_RESIDUAL:
            return GWResult(s, survival, iteration, residual, mean)
    raise PercoweaveError(
        f"pgf iteration failed to converge within {PGF_MAX_ITERATIONS} steps; "
        f"last residual {residual!r}"
    )


def gw_generation_survival(offspring: OffspringLaw, k: int):
    """P(generation k is nonempty) = 1 - f^(k)(0).

    Exact (rational) for rational offspring laws up to moderate k, where
    the iterate's denominator is still manageable; float beyond.
    """
    if k < 0:
        raise InvalidParameterError(f"generation must be >= 0, got {k}")
    exact = offspring.is_rational and k <= EXACT_GENERATION_CAP
    s = Fraction(0) if exact else 0.0
    for _ in range(k):
        s = offspring.pgf(s) if exact else float(offspring.pgf(s))
    return (Fraction(1) - s) if exact else (1.0 - s)


# ---------------------------------------------------------------------------
# Direct tree simulation
# ---------------------------------------------------------------------------


def _stem_tree(d: int, depth: int):
    """Root -> one child, then a full d-ary tree of ``depth - 1`` more levels.

    Returns the graph and the vertex ids of the deepest generation.  Edges
    are enumerated parent-major in breadth-first order.
    """
    edges = [(0, 1)]
    frontier = [1]
    next_id = 2
    for _ in range(depth - 1):
        new_frontier = []
        for parent in frontier:
            for _ in range(d):
                edges.append((parent, next_id))
                new_frontier.append(next_id)
                next_id += 1
        frontier = new_frontier
    graph = build_from_edge_list(
        edges, vertex_count=next_id, meta={"kind": "stem_tree", "d": d, "depth": depth}
    )
    return graph, tuple(frontier)


@dataclass(frozen=True)
class TreeComparisonRecord:
    """Side-by-side pgf vs Monte Carlo survival on one stem tree."""

    d: int
    depth: int
    replications: int
    offspring: OffspringLaw
    pgf_survival: object
    conditioned: EstimateWithCI
    unconditioned: EstimateWithCI
    vertex_count: int
    leaf_count: int

    @property
    def within_ci(self) -> bool:
        return self.conditioned.ci_low <= float(self.pgf_survival) <= self.conditioned.ci_high

    def summary_line(self) -> str:
        return (
            f"d={self.d} depth={self.depth}: pgf {float(self.pgf_survival):.6f}, "
            f"conditioned MC {self.conditioned.estimate:.6f} "
            f"[{self.conditioned.ci_low:.6f}, {self.conditioned.ci_high:.6f}], "
            f"unconditioned MC {self.unconditioned.estimate:.6f}, "
            f"agreement: {self.within_ci}"
        )


def compare_tree_mc(
    law: WeightLaw,
    d: int,
    depth: int,
    replications: int,
    master_seed,
    threads: int = 1,
    confidence: float = 0.997,
) -> TreeComparisonRecord:
    """Simulate deepest-generation survival on a stem tree vs the pgf value.

    The conditioned run forces full infectivity at the root and full
    susceptibility at the deepest generation (per-vertex overrides), which
    makes "some deepest vertex is reached" exactly the event whose
    probability the Galton-Watson recursion computes: survival to
    generation ``depth - 1`` of the offspring process.  The unconditioned
    run uses the plain i.i.d. law everywhere and is reported without being
    equated to either quantity.
    """
    if depth < 1:
        raise InvalidParameterError(f"depth must be >= 1, got {depth}")
    if d ** depth > TREE_VERTEX_CAP:
        raise InstanceTooLargeError(
            f"stem tree with out-degree {d} and depth {depth} exceeds "
            f"{TREE_VERTEX_CAP} vertices",
            assignment_count=d**depth,
        )
    offspring = offspring_law(law, d)
    pgf_survival = gw_generation_survival(offspring, depth - 1)

    graph, deepest = _stem_tree(d, depth)
    collection = BoundaryReaching(0, frozenset(deepest))
    overrides = {0: PointMass(1, 1)}
    for v in deepest:
        overrides[v] = PointMass(1, 1)
    conditioned_model = WeightedModel(graph, LawMap(law, overrides), Kernel.factorisable())
    unconditioned_model = WeightedModel(graph, law, Kernel.factorisable())
    conditioned = estimate_event(
        conditioned_model, collection, replications, master_seed,
        threads=threads, confidence=confidence,
    )
    unconditioned = estimate_event(
        unconditioned_model, collection, replications, master_seed,
        threads=threads, confidence=confidence,
    )
    return TreeComparisonRecord(
        d=d,
        depth=depth,
        replications=replications,
        offspring=offspring,
        pgf_survival=pgf_survival,
        conditioned=conditioned,
        unconditioned=unconditioned,
        vertex_count=graph.vertex_count,
        leaf_count=len(deepest),
    )
