"""Deterministic random-stream derivation.

Every Monte Carlo entry point takes a single integer ``master_seed`` and
derives one independent PCG64 stream per replication with
``SeedSequence(master_seed).spawn(n)``.  Replication ``i`` always sees the
same stream for the same master seed, no matter how replications are
batched across threads, which is what makes runs reproducible and
thread-count invariant.

Experiments with several arms (e.g. one per lattice size) first spawn one
child sequence per arm, then spawn per-replication streams from the child,
so adding an arm never perturbs the others.
"""

from __future__ import annotations

import numpy as np


def spawn_seed_sequences(master_seed: int, count: int) -> list[np.random.SeedSequence]:
    """Derive ``count`` independent child sequences of ``master_seed``."""
    return np.random.SeedSequence(master_seed).spawn(count)


def spawn_bit_generators(master_seed: int, count: int) -> list[np.random.PCG64]:
    """One independent PCG64 per replication, indexed by position."""
    return [np.random.PCG64(s) for s in spawn_seed_sequences(master_seed, count)]


def bit_generators_from(seq: np.random.SeedSequence, count: int) -> list[np.random.PCG64]:
    """Per-replication streams under an already-derived child sequence.

    ``seq`` is not mutated: spawning happens on a copy, so the same child
    always yields the same streams.
    """
    fresh = np.random.SeedSequence(
        entropy=seq.entropy, spawn_key=seq.spawn_key, pool_size=seq.pool_size
    )
    return [np.random.PCG64(s) for s in fresh.spawn(count)]


def generator(master_seed: int) -> np.random.Generator:
    """A single convenience stream for one-off sampling."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(master_seed)))
