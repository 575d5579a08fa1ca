"""Finite simple directed graphs with a stable edge enumeration.

Every construction routine emits edges in a documented, reproducible order,
and the position of an edge in that order is its identity for the rest of
the package: staged path collections are defined against "the first n
edges", and the samplers consume one uniform variate per edge in exactly
this order.  Rebuilding a graph with identical parameters therefore yields
a bit-identical edge sequence.

Enumeration conventions:

* square lattice — row-major over tail vertices; out-edges of each tail in
  direction order N, E, S, W (N = row-1, E = col+1, S = row+1, W = col-1);
* rooted tree — breadth-first from the root, children in creation order;
* edge lists — caller order, preserved verbatim.

Graphs are immutable after construction and safe to share across workers.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidInputError, InvalidParameterError


class DirectedGraph:
    """A finite simple directed graph.

    Simple means no repeated (tail, head) pair and, unless explicitly
    allowed at construction, no self-loops.  Antiparallel pairs u->v, v->u
    are fine and are how undirected models are represented.

    Attributes
    ----------
    vertex_count : int
    tails, heads : int32 arrays of length ``edge_count``; edge ``i`` is
        ``tails[i] -> heads[i]`` and ``i`` is the enumeration index.
    out_indptr, out_edge_ids : CSR layout of out-adjacency; the out-edges
        of ``v`` are ``out_edge_ids[out_indptr[v]:out_indptr[v+1]]``, sorted
        by enumeration index.
    in_indptr, in_edge_ids : same for in-adjacency.
    labels : optional per-vertex coordinates (lattice position, tree
        generation); ``None`` for plain edge-list graphs.
    meta : dict describing how the graph was built (kind, parameters,
        distinguished origin vertex where applicable).
    """

    __slots__ = (
        "vertex_count",
        "tails",
        "heads",
        "out_indptr",
        "out_edge_ids",
        "in_indptr",
        "in_edge_ids",
        "labels",
        "meta",
        "_edge_lookup",
    )

    def __init__(
        self,
        vertex_count: int,
        tails: np.ndarray,
        heads: np.ndarray,
        labels: np.ndarray | None = None,
        meta: dict | None = None,
    ):
        self.vertex_count = int(vertex_count)
        self.tails = np.ascontiguousarray(tails, dtype=np.int32)
        self.heads = np.ascontiguousarray(heads, dtype=np.int32)
        self.out_indptr, self.out_edge_ids = _adjacency(self.tails, self.vertex_count)
        self.in_indptr, self.in_edge_ids = _adjacency(self.heads, self.vertex_count)
        self.labels = labels
        self.meta = dict(meta) if meta else {}
        self._edge_lookup: dict[tuple[int, int], int] | None = None

    # -- basic queries ---------------------------------------------------

    @property
    def edge_count(self) -> int:
        return self.tails.shape[0]

    def edge(self, edge_id: int) -> tuple[int, int]:
        return int(self.tails[edge_id]), int(self.heads[edge_id])

    def out_edges(self, v: int) -> np.ndarray:
        return self.out_edge_ids[self.out_indptr[v] : self.out_indptr[v + 1]]

    def in_edges(self, v: int) -> np.ndarray:
        return self.in_edge_ids[self.in_indptr[v] : self.in_indptr[v + 1]]

    def out_degree(self, v: int) -> int:
        return int(self.out_indptr[v + 1] - self.out_indptr[v])

    def in_degree(self, v: int) -> int:
        return int(self.in_indptr[v + 1] - self.in_indptr[v])

    def successors(self, v: int) -> np.ndarray:
        return self.heads[self.out_edges(v)]

    def edge_id(self, tail: int, head: int) -> int:
        """Enumeration index of the edge tail->head; KeyError if absent."""
        if self._edge_lookup is None:
            self._edge_lookup = {
                (int(t), int(h)): i
                for i, (t, h) in enumerate(zip(self.tails, self.heads))
            }
        return self._edge_lookup[(tail, head)]

    def has_edge(self, tail: int, head: int) -> bool:
        try:
            self.edge_id(tail, head)
            return True
        except KeyError:
            return False

    def __repr__(self) -> str:
        kind = self.meta.get("kind", "graph")
        return (
            f"DirectedGraph({kind}: {self.vertex_count} vertices, "
            f"{self.edge_count} edges)"
        )


def _adjacency(endpoints: np.ndarray, vertex_count: int) -> tuple[np.ndarray, np.ndarray]:
    """CSR adjacency over edge ids, keyed by one endpoint array.

    A stable counting sort keeps each vertex's edge ids in enumeration
    order, which downstream code relies on.
    """
    counts = np.bincount(endpoints, minlength=vertex_count)
    indptr = np.zeros(vertex_count + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    order = np.argsort(endpoints, kind="stable").astype(np.int64)
    return indptr, order


# -- constructors ---------------------------------------------------------


def build_from_edge_list(
    edges: Sequence[tuple[int, int]],
    vertex_count: int | None = None,
    allow_self_loops: bool = False,
    labels: np.ndarray | None = None,
    meta: dict | None = None,
) -> DirectedGraph:
    """Graph with the given directed edges, enumerated in the given order.

    Duplicate edges and (by default) self-loops are rejected with the index
    of the offending entry.  ``vertex_count`` defaults to one past the
    largest mentioned vertex id.
    """
    tails = np.empty(len(edges), dtype=np.int32)
    heads = np.empty(len(edges), dtype=np.int32)
    seen: set[tuple[int, int]] = set()
    for i, (t, h) in enumerate(edges):
        t, h = int(t), int(h)
        if t < 0 or h < 0:
            raise InvalidInputError(f"negative vertex id in edge {i}: ({t}, {h})", index=i)
        if t == h and not allow_self_loops:
            raise InvalidInputError(f"self-loop at edge index {i}: ({t}, {h})", index=i)
        if (t, h) in seen:
            raise InvalidInputError(f"duplicate edge at index {i}: ({t}, {h})", index=i)
        seen.add((t, h))
        tails[i] = t
        heads[i] = h
    inferred = int(max(tails.max(initial=-1), heads.max(initial=-1))) + 1 if len(edges) else 0
    if vertex_count is None:
        vertex_count = inferred
    elif vertex_count < inferred:
        raise InvalidParameterError(
            f"vertex_count={vertex_count} is smaller than the largest vertex id + 1 ({inferred})"
        )
    return DirectedGraph(vertex_count, tails, heads, labels=labels, meta=meta or {"kind": "edge_list"})


def build_square_lattice(side_length: int, boundary: str = "box") -> DirectedGraph:
    """L x L square lattice with both directed edges per adjacent pair.

    ``boundary="box"`` omits wraparound; ``"torus"`` wraps (and requires
    L >= 3, since L = 2 would create parallel edges and break simplicity).
    Vertex (row, col) has id ``row * L + col``.  Edges are enumerated
    row-major by tail, each tail's out-edges in N, E, S, W order.

    The distinguished origin is vertex ((L-1)//2, (L-1)//2): the exact
    center for odd L, and the top-left vertex of the central 2x2 block for
    even L.
    """
    L = int(side_length)
    if L < 2:
        raise InvalidParameterError(f"side_length must be >= 2, got {L}")
    if boundary not in ("box", "torus"):
        raise InvalidParameterError(f"boundary must be 'box' or 'torus', got {boundary!r}")
    if boundary == "torus" and L < 3:
        raise InvalidParameterError(
            "torus needs side_length >= 3: side 2 would create parallel edges"
        )
    tails: list[int] = []
    heads: list[int] = []
    wrap = boundary == "torus"
    for r in range(L):
        for c in range(L):
            v = r * L + c
            for dr, dc in ((-1, 0), (0, 1), (1, 0), (0, -1)):  # N, E, S, W
                rr, cc = r + dr, c + dc
                if wrap:
                    rr, cc = rr % L, cc % L
                elif not (0 <= rr < L and 0 <= cc < L):
                    continue
                tails.append(v)
                heads.append(rr * L + cc)
    coords = np.indices((L, L)).reshape(2, -1).T.astype(np.int32)
    center = ((L - 1) // 2) * L + (L - 1) // 2
    graph = DirectedGraph(
        L * L,
        np.array(tails, dtype=np.int32),
        np.array(heads, dtype=np.int32),
        labels=coords,
        meta={"kind": "square_lattice", "side": L, "boundary": boundary, "origin": center},
    )
    return graph


def lattice_border(graph: DirectedGraph) -> np.ndarray:
    """Vertex ids on the outer border of a box lattice (sorted).

    Only meaningful for ``build_square_lattice(..., boundary="box")``; a
    torus has no border.
    """
    if graph.meta.get("kind") != "square_lattice":
        raise InvalidParameterError("lattice_border needs a square_lattice graph")
    if graph.meta.get("boundary") != "box":
        raise InvalidParameterError("a torus has no border vertices")
    L = graph.meta["side"]
    rows, cols = graph.labels[:, 0], graph.labels[:, 1]
    mask = (rows == 0) | (rows == L - 1) | (cols == 0) | (cols == L - 1)
    return np.flatnonzero(mask).astype(np.int32)


def build_rooted_tree(out_degree: int, depth: int) -> DirectedGraph:
    """Rooted tree where every internal vertex has ``out_degree`` children.

    Vertices are numbered breadth-first with the root as 0; edges point
    away from the root and are enumerated breadth-first, so generation g
    occupies a contiguous id range.  ``labels[v]`` is the generation of v.
    """
    d = int(out_degree)
    k = int(depth)
    if d < 1:
        raise InvalidParameterError(f"out_degree must be >= 1, got {d}")
    if k < 0:
        raise InvalidParameterError(f"depth must be >= 0, got {k}")
    gen_sizes = [d**g for g in range(k + 1)]
    n = sum(gen_sizes)
    generations = np.repeat(np.arange(k + 1, dtype=np.int32), gen_sizes)
    tails: list[int] = []
    heads: list[int] = []
    next_id = 1
    for v in range(n):
        if generations[v] < k:
            for _ in range(d):
                tails.append(v)
                heads.append(next_id)
                next_id += 1
    return DirectedGraph(
        n,
        np.array(tails, dtype=np.int32),
        np.array(heads, dtype=np.int32),
        labels=generations,
        meta={"kind": "rooted_tree", "out_degree": d, "depth": k, "origin": 0},
    )


def tree_generation_vertices(graph: DirectedGraph, generation: int) -> np.ndarray:
    """Ids of all vertices in the given generation of a rooted tree."""
    if graph.meta.get("kind") != "rooted_tree":
        raise InvalidParameterError("tree_generation_vertices needs a rooted_tree graph")
    return np.flatnonzero(graph.labels == generation).astype(np.int32)


def counterexample_graph() -> DirectedGraph:
    """The 5-vertex star used by the ordering counterexample fixture.

    Vertex 0 is the origin at coordinates (0, 0); vertices 1..4 are its
    lattice neighbours at (0, 1), (1, 0), (0, -1), (-1, 0).  Both directed
    edges exist between the origin and each neighbour (8 edges), enumerated
    as (0->k, k->0) for k = 1..4.
    """
    coords = np.array([(0, 0), (0, 1), (1, 0), (0, -1), (-1, 0)], dtype=np.int32)
    edges = []
    for k in range(1, 5):
        edges.append((0, k))
        edges.append((k, 0))
    return build_from_edge_list(
        edges,
        vertex_count=5,
        labels=coords,
        meta={"kind": "origin_star", "origin": 0},
    )


# -- text interface -------------------------------------------------------


def load_edge_list(path) -> DirectedGraph:
    """Read a graph from text: one ``tail head`` pair per line, 0-based ids.

    Blank lines and lines starting with ``#`` are skipped.
    """
    edges: list[tuple[int, int]] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise InvalidInputError(
                    f"line {lineno}: expected 'tail head', got {line!r}", index=lineno
                )
            try:
                edges.append((int(parts[0]), int(parts[1])))
            except ValueError:
                raise InvalidInputError(
                    f"line {lineno}: vertex ids must be integers, got {line!r}",
                    index=lineno,
                ) from None
    return build_from_edge_list(edges, meta={"kind": "edge_list_file", "path": str(path)})
