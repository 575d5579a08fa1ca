"""Directed paths, path collections, and the at-least-one-path-open event.

A path is a start vertex plus a sequence of consecutive edge ids; a path
with no edges is trivial, anchored at one vertex, and counts as always
open.  Collections come in three kinds:

* ``explicit`` — a finite list of members;
* ``all_paths_between(u, v)`` — the canonical collection of paths from u
  to v, materialized by its self-avoiding representatives (for the event
  "some member is fully open" these are equivalent: erasing loops from an
  open walk leaves an open self-avoiding path);
* ``boundary_reaching(u, boundary)`` — paths from u to a vertex set, the
  finite-graph stand-in for "u starts an infinite open path".

Canonical kinds carry a hop-closure certificate by construction: splicing
a prefix of one member onto a tail of another at a shared vertex lands in
the same collection.  Explicit collections must be checked with
:func:`is_weakly_hoppable` before comparison-theorem use; the check
follows the splice rule literally: for members xi, phi and every vertex
that ends the i-th edge of xi and starts an edge of phi, the spliced path
(first i edges of xi, then phi from that vertex on) must itself be a
member.

Staging: ``build_xi_n(collection, graph, n)`` restricts a collection to
the first n edges of the graph's enumeration.  Finite members are kept
only when fully inside the first n edges; boundary-reaching members stand
in for infinite paths and are instead truncated at their first step
outside (a first step outside contributes the trivial path at the source,
making the staged event hold vacuously — the correct degenerate limit).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import (
    HypothesisNotMetError,
    InstanceTooLargeError,
    InvalidInputError,
    InvalidParameterError,
)
from .graphs import DirectedGraph

EXPLICIT_PATH_CAP = 10_000


@dataclass(frozen=True)
class Path:
    """A directed path: start vertex plus consecutive edge ids.

    ``vertices`` is the derived vertex sequence (length = edge count + 1);
    it is carried so truncation and tails need no graph lookup, and is
    excluded from equality, which is by (start, edges) alone.
    """

    start: int
    edges: tuple[int, ...]
    vertices: tuple[int, ...] = field(compare=False)

    @property
    def length(self) -> int:
        return len(self.edges)

    @property
    def is_trivial(self) -> bool:
        return not self.edges

    @property
    def end(self) -> int:
        return self.vertices[-1]

    def __repr__(self):
        return f"Path({'→'.join(str(v) for v in self.vertices)})"


def trivial_path(vertex: int) -> Path:
    return Path(vertex, (), (vertex,))


def make_path(graph: DirectedGraph, edge_ids: Sequence[int], start: int | None = None) -> Path:
    """Path from edge ids; consecutive edges must chain head-to-tail.

    ``start`` is required (and only used) for the empty sequence.
    """
    edge_ids = tuple(int(e) for e in edge_ids)
    if not edge_ids:
        if start is None:
            raise InvalidParameterError("a trivial path needs an explicit start vertex")
        return trivial_path(start)
    verts = [int(graph.tails[edge_ids[0]])]
    if start is not None and start != verts[0]:
        raise InvalidInputError(
            f"start {start} does not match the first edge's tail {verts[0]}"
        )
    for k, e in enumerate(edge_ids):
        if not (0 <= e < graph.edge_count):
            raise InvalidInputError(f"edge id {e} outside graph", index=k)
        t, h = graph.edge(e)
        if t != verts[-1]:
            raise InvalidInputError(
                f"edge {e} starts at {t}, expected {verts[-1]}", index=k
            )
        verts.append(h)
    return Path(verts[0], edge_ids, tuple(verts))


def path_from_vertices(graph: DirectedGraph, vertex_ids: Sequence[int]) -> Path:
    """Path visiting the given vertices; every consecutive pair must be an edge."""
    vids = [int(v) for v in vertex_ids]
    if not vids:
        raise InvalidInputError("a path needs at least one vertex")
    if len(vids) == 1:
        return trivial_path(vids[0])
    edge_ids = []
    for k, (t, h) in enumerate(zip(vids, vids[1:])):
        try:
            edge_ids.append(graph.edge_id(t, h))
        except KeyError:
            raise InvalidInputError(f"no edge {t}->{h} in graph", index=k) from None
    return Path(vids[0], tuple(edge_ids), tuple(vids))


# -- splice operations ------------------------------------------------------


def truncate(path: Path, n: int) -> Path:
    """First n edges of the path; n = 0 gives the trivial path at its start."""
    if not (0 <= n <= path.length):
        raise InvalidParameterError(
            f"truncation length {n} outside [0, {path.length}]"
        )
    if n == path.length:
        return path
    return Path(path.start, path.edges[:n], path.vertices[: n + 1])


def tail(path: Path, n: int) -> Path:
    """The path minus its first n edges; n = length gives the trivial path
    at the end vertex, n = 0 the whole path."""
    if not (0 <= n <= path.length):
        raise InvalidParameterError(f"tail offset {n} outside [0, {path.length}]")
    if n == 0:
        return path
    return Path(path.vertices[n], path.edges[n:], path.vertices[n:])


def conjunction(first: Path, second: Path) -> Path:
    """Concatenation; the first path must end where the second starts."""
    if first.end != second.start:
        raise InvalidParameterError(
            f"cannot join: first ends at {first.end}, second starts at {second.start}"
        )
    if first.is_trivial:
        return second
    if second.is_trivial:
        return first
    return Path(
        first.start,
        first.edges + second.edges,
        first.vertices + second.vertices[1:],
    )


def loop_erased(path: Path) -> Path:
    """Self-avoiding path obtained by erasing cycles in visit order."""
    verts: list[int] = [path.start]
    edges: list[int] = []
    position = {path.start: 0}
    for e, v in zip(path.edges, path.vertices[1:]):
        if v in position:
            k = position[v]
            for dropped in verts[k + 1 :]:
                del position[dropped]
            del verts[k + 1 :]
            del edges[k:]
        else:
            verts.append(v)
            edges.append(e)
            position[v] = len(verts) - 1
    return Path(verts[0], tuple(edges), tuple(verts))


# -- collections ------------------------------------------------------------


@dataclass(frozen=True)
class ExplicitCollection:
    """A finite, explicitly listed path collection."""

    paths: tuple[Path, ...]
    certificate: str = "unverified"

    kind = "explicit"

    def __post_init__(self):
        if self.certificate not in ("unverified", "checked_weakly_hoppable", "canonical_hoppable"):
            raise InvalidParameterError(f"unknown certificate {self.certificate!r}")


@dataclass(frozen=True)
class AllPathsBetween:
    """All paths from ``source`` to ``target`` (self-avoiding representatives)."""

    source: int
    target: int

    kind = "all_paths_between"
    certificate = "canonical_hoppable"


class BoundaryReaching:
    """All paths from ``source`` to a boundary vertex set."""

    kind = "boundary_reaching"
    certificate = "canonical_hoppable"

    def __init__(self, source: int, boundary: Iterable[int]):
        self.source = int(source)
        self.boundary = frozenset(int(b) for b in boundary)
        if not self.boundary:
            raise InvalidParameterError("boundary set must be nonempty")

    def __eq__(self, other):
        return (
            isinstance(other, BoundaryReaching)
            and self.source == other.source
            and self.boundary == other.boundary
        )

    def __hash__(self):
        return hash((self.source, self.boundary))

    def __repr__(self):
        return f"BoundaryReaching(source={self.source}, boundary={sorted(self.boundary)})"


PathCollection = Union[ExplicitCollection, AllPathsBetween, BoundaryReaching]


def explicit(paths: Iterable[Path], certificate: str = "unverified") -> ExplicitCollection:
    return ExplicitCollection(tuple(paths), certificate)


# -- hop-closure checking -----------------------------------------------------


@dataclass(frozen=True)
class HopWitness:
    """A splice that escapes the collection."""

    xi: Path
    phi: Path
    crossing_vertex: int
    missing: Path


@dataclass(frozen=True)
class HoppabilityReport:
    weakly_hoppable: bool
    witness: HopWitness | None

    def __bool__(self):
        return self.weakly_hoppable


def is_weakly_hoppable(
    collection: ExplicitCollection,
    graph: DirectedGraph,
    max_paths: int = EXPLICIT_PATH_CAP,
) -> HoppabilityReport:
    """Check closure of an explicit collection under prefix/tail splicing.

    For every ordered member pair (xi, phi), every prefix of xi ending at a
    vertex from which an edge of phi departs must splice with phi's
    remainder into another member.  Reports the first missing splice.
    """
    if not isinstance(collection, ExplicitCollection):
        raise InvalidParameterError("hop-closure checking applies to explicit collections")
    paths = collection.paths
    if len(paths) > max_paths:
        raise InstanceTooLargeError(
            f"closure check refused: {len(paths)} paths exceeds cap {max_paths}",
            path_count=len(paths),
        )
    members = {(p.start, p.edges) for p in paths}
    for xi in paths:
        for phi in paths:
            for i in range(1, xi.length + 1):
                v = xi.vertices[i]
                for t in range(phi.length):  # positions where an edge of phi starts
                    if phi.vertices[t] != v:
                        continue
                    spliced = conjunction(truncate(xi, i), tail(phi, t))
                    if (spliced.start, spliced.edges) not in members:
                        return HoppabilityReport(
                            False, HopWitness(xi, phi, v, spliced)
                        )
    return HoppabilityReport(True, None)


def certify(collection: PathCollection, graph: DirectedGraph) -> PathCollection:
    """Return the collection carrying a hop-closure certificate.

    Canonical kinds and already-checked collections pass through; an
    unverified explicit collection is checked, and a failed check raises.
    """
    if not isinstance(collection, ExplicitCollection):
        return collection
    if collection.certificate != "unverified":
        return collection
    report = is_weakly_hoppable(collection, graph)
    if not report.weakly_hoppable:
        w = report.witness
        raise HypothesisNotMetError(
            f"collection is not closed under splicing: {w.xi!r} and {w.phi!r} "
            f"cross at {w.crossing_vertex} but {w.missing!r} is missing"
        )
    return replace(collection, certificate="checked_weakly_hoppable")


# -- canonical-member enumeration --------------------------------------------


def all_self_avoiding_paths(
    graph: DirectedGraph,
    source: int,
    target: int,
    max_paths: int = EXPLICIT_PATH_CAP,
    edge_limit: int | None = None,
) -> list[Path]:
    """Every self-avoiding path source -> target, depth-first in edge-
    enumeration order; the trivial path when source == target."""
    if source == target:
        return [trivial_path(source)]
    allowed = graph.edge_count if edge_limit is None else edge_limit
    out: list[Path] = []
    edge_stack: list[int] = []
    vert_stack: list[int] = [source]
    on_path = {source}

    def visit(v: int):
        for e in graph.out_edges(v):
            if e >= allowed:
                continue
            h = int(graph.heads[e])
            if h in on_path:
                continue
            edge_stack.append(int(e))
            vert_stack.append(h)
            if h == target:
                if len(out) >= max_paths:
                    raise InstanceTooLargeError(
                        f"more than {max_paths} paths between {source} and {target}",
                        path_count=max_paths + 1,
                    )
                out.append(Path(source, tuple(edge_stack), tuple(vert_stack)))
            else:
                on_path.add(h)
                visit(h)
                on_path.discard(h)
            edge_stack.pop()
            vert_stack.pop()

    visit(source)
    return out


def boundary_reaching_representatives(
    graph: DirectedGraph,
    source: int,
    boundary: frozenset[int],
    max_paths: int = EXPLICIT_PATH_CAP,
) -> list[Path]:
    """Self-avoiding paths from source stopping at their first boundary
    vertex; the trivial path when the source is itself on the boundary."""
    if source in boundary:
        return [trivial_path(source)]
    out: list[Path] = []
    edge_stack: list[int] = []
    vert_stack: list[int] = [source]
    on_path = {source}

    def visit(v: int):
        for e in graph.out_edges(v):
            h = int(graph.heads[e])
            if h in on_path:
                continue
            edge_stack.append(int(e))
            vert_stack.append(h)
            if h in boundary:
                if len(out) >= max_paths:
                    raise InstanceTooLargeError(
                        f"more than {max_paths} boundary-reaching paths from {source}",
                        path_count=max_paths + 1,
                    )
                out.append(Path(source, tuple(edge_stack), tuple(vert_stack)))
            else:
                on_path.add(h)
                visit(h)
                on_path.discard(h)
            edge_stack.pop()
            vert_stack.pop()

    visit(source)
    return out


# -- staged collections -------------------------------------------------------


def build_xi_n(collection: PathCollection, graph: DirectedGraph, n: int) -> ExplicitCollection:
    """Restrict a collection to the first n edges of the enumeration.

    Finite members survive iff every edge id is < n.  Boundary-reaching
    members (infinite-path surrogates) are truncated at their first edge
    id >= n — a first edge outside contributes the trivial path at the
    source.  The result inherits the strongest certificate that filtering
    preserves: splices of surviving members use only surviving edges, so a
    certified collection stays certified.
    """
    if not (1 <= n <= graph.edge_count):
        raise InvalidParameterError(
            f"stage size n={n} outside [1, {graph.edge_count}]"
        )
    if isinstance(collection, ExplicitCollection):
        kept = tuple(p for p in collection.paths if all(e < n for e in p.edges))
        return ExplicitCollection(kept, collection.certificate)
    if isinstance(collection, AllPathsBetween):
        members = all_self_avoiding_paths(
            graph, collection.source, collection.target, edge_limit=n
        )
        return ExplicitCollection(tuple(members), "canonical_hoppable")
    if isinstance(collection, BoundaryReaching):
        members = boundary_reaching_representatives(
            graph, collection.source, collection.boundary
        )
        staged: list[Path] = []
        seen = set()
        for p in members:
            cut = p.length
            for k, e in enumerate(p.edges):
                if e >= n:
                    cut = k
                    break
            t = truncate(p, cut)
            key = (t.start, t.edges)
            if key not in seen:
                seen.add(key)
                staged.append(t)
        return ExplicitCollection(tuple(staged), "canonical_hoppable")
    raise InvalidParameterError(f"unknown collection {collection!r}")


# -- the event ---------------------------------------------------------------


def event_holds(collection: PathCollection, configuration, graph: DirectedGraph) -> bool:
    """Whether at least one member path is fully open.

    ``configuration`` is an EdgeConfiguration or any per-edge 0/1 array.
    Explicit members are scanned directly (trivial members are open by
    definition); canonical kinds are evaluated by directed reachability
    over open edges, which is equivalent and does not materialize members.
    """
    states = np.asarray(getattr(configuration, "states", configuration))
    if states.shape[0] != graph.edge_count:
        raise InvalidParameterError(
            f"configuration covers {states.shape[0]} edges, graph has {graph.edge_count}"
        )
    if isinstance(collection, ExplicitCollection):
        return any(
            all(states[e] for e in p.edges) for p in collection.paths
        )
    if isinstance(collection, AllPathsBetween):
        return _reaches(graph, states, collection.source, {collection.target})
    if isinstance(collection, BoundaryReaching):
        return _reaches(graph, states, collection.source, collection.boundary)
    raise InvalidParameterError(f"unknown collection {collection!r}")


def _reaches(graph: DirectedGraph, states, source: int, targets) -> bool:
    if source in targets:
        return True
    seen = np.zeros(graph.vertex_count, dtype=bool)
    seen[source] = True
    queue = deque([source])
    while queue:
        v = queue.popleft()
        for e in graph.out_edges(v):
            if not states[e]:
                continue
            h = int(graph.heads[e])
            if seen[h]:
                continue
            if h in targets:
                return True
            seen[h] = True
            queue.append(h)
    return False


# -- text interface ------------------------------------------------------------


def load_paths(path, graph: DirectedGraph) -> ExplicitCollection:
    """Read an explicit collection: one path per line as whitespace-
    separated vertex ids; blank lines and ``#`` comments are skipped."""
    members: list[Path] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                vids = [int(tok) for tok in line.split()]
            except ValueError:
                raise InvalidInputError(
                    f"line {lineno}: vertex ids must be integers", index=lineno
                ) from None
            try:
                members.append(path_from_vertices(graph, vids))
            except InvalidInputError as err:
                raise InvalidInputError(f"line {lineno}: {err}", index=lineno) from None
    return ExplicitCollection(tuple(members))
