#!/usr/bin/env python3
"""Time the hot sampling kernels on every available backend.

Runs the same five kernels (vertex-weight sampling, edge-state sampling,
cluster breadth-first search, two-phase replications, lazy survival
replications) through the pure-Python module and, when built, the compiled
extension, feeding both identical bit-generator streams.  Because the two
implementations share a draw-for-draw contract, the outputs must be
bit-identical; the script verifies that before reporting timings, so a
speedup is never quoted for code that disagrees.

Usage:
    python3 benchmarks/bench_backends.py
    python3 benchmarks/bench_backends.py --side 201 --replications 1000
"""

from __future__ import annotations

import argparse
import time
from fractions import Fraction

import numpy as np

from percoweave import backend
from percoweave.engine import WeightedModel
from percoweave.graphs import build_square_lattice, lattice_border
from percoweave.weights import IdenticalUniform, Kernel


def _time(fn, *args):
    start = time.perf_counter()
    out = fn(*args)
    return time.perf_counter() - start, out


def bench_vertex_weights(mod, g, prep, repeats, seed):
    w = np.empty(g.vertex_count)
    wbar = np.empty(g.vertex_count)
    bg = np.random.PCG64(seed)

    def run():
        for _ in range(repeats):
            mod.sample_vertex_weights(bg, *prep.law_args, w, wbar)
        return w.sum() + wbar.sum()

    return _time(run)


def bench_edge_states(mod, g, prep, repeats, seed):
    w = np.empty(g.vertex_count)
    wbar = np.empty(g.vertex_count)
    mod.sample_vertex_weights(np.random.PCG64(seed), *prep.law_args, w, wbar)
    states = np.empty(g.edge_count, np.uint8)
    bg = np.random.PCG64(seed + 1)

    def run():
        total = 0
        for _ in range(repeats):
            mod.sample_edge_states(
                bg, g.tails, g.heads, prep.kernel_code, prep.kernel_a,
                prep.kernel_b, w, wbar, states,
            )
            total += int(states.sum())
        return total

    return _time(run)


def bench_bfs(mod, g, prep, repeats, seed):
    # one fixed supercritical configuration; the search itself is timed
    w = np.empty(g.vertex_count)
    wbar = np.empty(g.vertex_count)
    bg = np.random.PCG64(seed)
    mod.sample_vertex_weights(bg, *prep.law_args, w, wbar)
    states = np.empty(g.edge_count, np.uint8)
    mod.sample_edge_states(
        bg, g.tails, g.heads, prep.kernel_code, prep.kernel_a, prep.kernel_b,
        w, wbar, states,
    )
    origin = int(g.meta["origin"])
    mask = np.zeros(g.vertex_count, np.uint8)

    def run():
        acc = 0
        for _ in range(repeats):
            size, _, dist = mod.bfs_cluster(
                g.out_indptr, g.out_edge_ids, g.heads, states, origin, mask
            )
            acc += size + dist
        return acc

    return _time(run)


def bench_two_phase(mod, g, prep, replications, seed):
    origin = int(g.meta["origin"])
    mask = np.zeros(g.vertex_count, np.uint8)
    mask[lattice_border(g)] = 1
    hits = np.zeros(replications, np.uint8)
    sizes = np.zeros(replications, np.int64)
    bg = np.random.PCG64(seed)

    def run():
        mod.two_phase_replications(
            bg, replications, g.tails, g.heads, g.out_indptr, g.out_edge_ids,
            *prep.law_args, prep.kernel_code, prep.kernel_a, prep.kernel_b,
            1, np.zeros(1, np.int64), np.zeros(0, np.int64), origin, mask,
            True, hits, sizes,
        )
        return int(hits.sum()), int(sizes.sum())

    return _time(run)


def bench_survival(mod, g, prep, replications, seed):
    origin = int(g.meta["origin"])
    mask = np.zeros(g.vertex_count, np.uint8)
    mask[lattice_border(g)] = 1
    hits = np.zeros(replications, np.uint8)
    bg = np.random.PCG64(seed)

    def run():
        mod.survival_replications(
            bg, replications, g.out_indptr, g.out_edge_ids, g.heads,
            *prep.law_args, prep.kernel_code, prep.kernel_a, prep.kernel_b,
            origin, mask, hits,
        )
        return int(hits.sum())

    return _time(run)


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--side", type=int, default=121,
                        help="box lattice side length (default 121)")
    parser.add_argument("--replications", type=int, default=300,
                        help="replication count for the two loop kernels")
    parser.add_argument("--repeats", type=int, default=30,
                        help="repeat count for the single-shot kernels")
    parser.add_argument("--weight", type=Fraction, default=Fraction(3, 5),
                        help="identical-uniform weight bound (default 3/5)")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)

    names = backend.available_backends()
    g = build_square_lattice(args.side)
    model = WeightedModel(g, IdenticalUniform(args.weight), Kernel.factorisable())
    prep = model.prepare()

    print(f"backends: {', '.join(names)}"
          + ("" if backend.HAVE_COMPILED else "  (compiled extension not built)"))
    print(f"graph: {args.side}x{args.side} box lattice, "
          f"{g.vertex_count} vertices, {g.edge_count} directed edges, "
          f"law identical_uniform(a={args.weight}), product kernel")
    print()

    benches = [
        ("vertex_weights", f"{args.repeats} sweeps x {g.vertex_count} vertices",
         bench_vertex_weights, args.repeats),
        ("edge_states", f"{args.repeats} sweeps x {g.edge_count} edges",
         bench_edge_states, args.repeats),
        ("bfs_cluster", f"{args.repeats} searches, fixed configuration",
         bench_bfs, args.repeats),
        ("two_phase", f"{args.replications} replications, border event",
         bench_two_phase, args.replications),
        ("survival", f"{args.replications} replications, lazy draws",
         bench_survival, args.replications),
    ]

    width = max(len(n) for n, *_ in benches)
    header = f"{'kernel':<{width}}  " + "".join(f"{n + ' (s)':>14}" for n in names)
    if len(names) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))

    mismatched = []
    for index, (name, workload, fn, count) in enumerate(benches):
        seed = args.seed * 1000 + index
        rows = [fn(backend.get_backend(b), g, prep, count, seed) for b in names]
        times = [t for t, _ in rows]
        outputs = {out for _, out in rows}
        line = f"{name:<{width}}  " + "".join(f"{t:>14.4f}" for t in times)
        if len(names) == 2:
            line += f"{times[0] / times[1]:>9.1f}x"
        print(line + f"   {workload}")
        if len(outputs) != 1:
            mismatched.append(name)

    print()
    if mismatched:
        print(f"OUTPUT MISMATCH between backends: {', '.join(mismatched)}")
        return 1
    if len(names) == 2:
        print("outputs identical across backends for every kernel")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
