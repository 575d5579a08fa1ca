"""Backend selection: the compiled extension when built, else the pure
fallback.  Both expose the same functions with bit-identical outputs;
``BACKEND_NAME`` records which one import found.
"""

from __future__ import annotations

from . import _purecore
from .errors import InvalidParameterError

try:
    from . import _fastcore as _impl

    HAVE_COMPILED = True
except ImportError:  # extension not built; pure fallback keeps the API alive
    _impl = _purecore
    HAVE_COMPILED = False

BACKEND_NAME: str = _impl.BACKEND_NAME

K_PRODUCT = _purecore.K_PRODUCT
K_EXPONENTIAL = _purecore.K_EXPONENTIAL
K_GEOMETRIC = _purecore.K_GEOMETRIC
K_CONSTANT = _purecore.K_CONSTANT

sample_vertex_weights = _impl.sample_vertex_weights
sample_edge_states = _impl.sample_edge_states
bfs_cluster = _impl.bfs_cluster
two_phase_replications = _impl.two_phase_replications
survival_replications = _impl.survival_replications


def available_backends() -> list[str]:
    names = ["pure"]
    if HAVE_COMPILED:
        names.append("compiled")
    return names


def get_backend(name: str = "auto"):
    """Resolve a backend module by name ("auto", "pure", or "compiled")."""
    if name == "auto":
        return _impl
    if name == "pure":
        return _purecore
    if name == "compiled":
        if not HAVE_COMPILED:
            raise InvalidParameterError("compiled backend is not available")
        from . import _fastcore

        return _fastcore
    raise InvalidParameterError(f"unknown backend {name!r}")
