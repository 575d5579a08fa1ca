"""Exception types shared across the package.

Everything raised deliberately by percoweave derives from
:class:`PercoweaveError`, so callers can catch one type at the boundary.
Errors that are really malformed-input complaints also derive from
``ValueError`` to keep stdlib idioms working.
"""

from __future__ import annotations


class PercoweaveError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameterError(PercoweaveError, ValueError):
    """A parameter is outside its documented domain (e.g. p not in [0, 1])."""


class InvalidInputError(PercoweaveError, ValueError):
    """Structured input (edge list, path file, table) failed validation.

    ``index`` identifies the offending record when known.
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class KernelRangeError(PercoweaveError, ValueError):
    """A connection kernel produced a value outside [0, 1]."""


class NormalizationError(PercoweaveError, ValueError):
    """Kernel-factor normalization pushed a weight outside [0, 1]."""


class InstanceTooLargeError(PercoweaveError):
    """An exact computation refused to start because a size cap was hit.

    The caps exist because the oracle's cost is exponential in the number
    of relevant edges and multiplicative in weight-support size; the
    offending counts are carried so callers can report them.
    """

    def __init__(
        self,
        message: str,
        *,
        edge_count: int | None = None,
        assignment_count: int | None = None,
        path_count: int | None = None,
    ):
        super().__init__(message)
        self.edge_count = edge_count
        self.assignment_count = assignment_count
        self.path_count = path_count


class HypothesisNotMetError(PercoweaveError):
    """A comparison-theorem checker was handed an instance outside the
    hypotheses it certifies (wrong kernel family, weights off the unit
    square, uncertified path collection, ...)."""


class ConfigError(PercoweaveError, ValueError):
    """An experiment configuration file is malformed or inconsistent."""
