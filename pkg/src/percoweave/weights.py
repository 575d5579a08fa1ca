"""Vertex weight laws and connection kernels.

The model assigns every vertex an i.i.d. pair (w, w_bar) — infectivity and
susceptibility, possibly dependent within the vertex — and opens edge u->v
with conditional probability kappa(w_u * wbar_v), independently across
edges given all weights.  This module owns the law kinds, kernel kinds,
kernel validation (nondecreasing + concave + range), moment computation,
and the normalization that absorbs factor maps of a product-form kernel
into the law so that downstream code can assume kappa(x, y) = x*y.

Exactness policy: atom values and probabilities given as ints, Fractions,
or numeric strings ('3/5', '0.3') are kept as exact rationals end to end;
floats stay floats.  The enumeration oracle inspects this to decide
between exact rational arithmetic and extended-precision reals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import (
    InvalidParameterError,
    KernelRangeError,
    NormalizationError,
)

def as_exact(value):
    """Parse a number keeping exactness: ints/Fractions/strings become
    Fractions ('0.3' parses to 3/10 exactly); floats stay floats."""
    if isinstance(value, bool):
        raise InvalidParameterError(f"expected a number, got bool {value}")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except ValueError:
            raise InvalidParameterError(f"cannot parse number {value!r}") from None
    if isinstance(value, float):
        return value
    if isinstance(value, np.integer):
        return Fraction(int(value))
    if isinstance(value, np.floating):
        return float(value)
    raise InvalidParameterError(f"cannot interpret {value!r} as a number")


def render_number(value) -> str:
    """Render exactly: rationals as 'num/den' (integers bare), floats via repr."""
    if isinstance(value, Rational):
        frac = Fraction(value)
        if frac.denominator == 1:
            return str(frac.numerator)
        return f"{frac.numerator}/{frac.denominator}"
    return repr(float(value))


def _all_rational(*values) -> bool:
    return all(isinstance(v, Rational) for v in values)


class WeightPair(NamedTuple):
    """One vertex's (infectivity, susceptibility) draw."""

    w: float
    w_bar: float


# ---------------------------------------------------------------------------
# Weight laws
# ---------------------------------------------------------------------------


class WeightLaw:
    """Base for the supported joint laws of (w, w_bar).

    Concrete kinds: :class:`PointMass`, :class:`DiscreteTable`,
    :class:`ProductLaw` (independent discrete marginals), and
    :class:`IdenticalUniform` (w = w_bar ~ Uniform(a, 1)).  Instances are
    immutable and hashable.
    """

    kind: str = "abstract"

    @property
    def finite_support(self) -> bool:
        raise NotImplementedError

    def atoms(self) -> tuple[tuple[tuple, object], ...]:
        """((w, w_bar), probability) pairs for finite-support laws."""
        raise NotImplementedError

    def moments(self):
        """(E w, E w_bar, E w*w_bar), exact when the law is rational."""
        raise NotImplementedError

    def support_box(self):
        """((w_min, w_max), (wbar_min, wbar_max)) bounding the support."""
        raise NotImplementedError

    def in_unit_square(self) -> bool:
        (w0, w1), (v0, v1) = self.support_box()
        return w0 >= 0 and v0 >= 0 and w1 <= 1 and v1 <= 1

    @property
    def is_rational(self) -> bool:
        """True when every atom coordinate and probability is rational."""
        if not self.finite_support:
            return False
        return all(
            _all_rational(w, wb, p) for (w, wb), p in self.atoms()
        )

    def _key(self):
        raise NotImplementedError

    def __eq__(self, other):
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self):
        return hash((type(self).__name__, self._key()))


class PointMass(WeightLaw):
    """Deterministic weights: every vertex gets the same pair."""

    kind = "point_mass"

    def __init__(self, w, w_bar):
        self.w = as_exact(w)
        self.w_bar = as_exact(w_bar)
        if self.w < 0 or self.w_bar < 0:
            raise InvalidParameterError("weights must be nonnegative")

    @property
    def finite_support(self) -> bool:
        return True

    def atoms(self):
        return (((self.w, self.w_bar), Fraction(1)),)

    def moments(self):
        return (self.w, self.w_bar, self.w * self.w_bar)

    def support_box(self):
        return ((self.w, self.w), (self.w_bar, self.w_bar))

    def _key(self):
        return (self.w, self.w_bar)

    def __repr__(self):
        return f"PointMass({render_number(self.w)}, {render_number(self.w_bar)})"


class DiscreteTable(WeightLaw):
    """Finite list of ((w, w_bar), probability) atoms.

    Probabilities must be positive and sum to 1 — exactly when every
    probability is rational, within 1e-12 otherwise.
    """

    kind = "discrete_table"

    def __init__(self, entries: Sequence[tuple[tuple, object]]):
        if not entries:
            raise InvalidParameterError("discrete table needs at least one atom")
        parsed = []
        for (pair, prob) in entries:
            w, wb = pair
            w, wb, prob = as_exact(w), as_exact(wb), as_exact(prob)
            if w < 0 or wb < 0:
                raise InvalidParameterError("weights must be nonnegative")
            if prob <= 0:
                raise InvalidParameterError(
                    f"atom probabilities must be positive, got {render_number(prob)}"
                )
            parsed.append(((w, wb), prob))
        seen = set()
        for (pair, _) in parsed:
            if pair in seen:
                raise InvalidParameterError(f"duplicate atom {pair}")
            seen.add(pair)
        total = sum(p for _, p in parsed)
        if _all_rational(*(p for _, p in parsed)):
            if total != 1:
                raise InvalidParameterError(
                    f"probabilities sum to {render_number(total)}"
                )
        elif abs(total - 1) > 1e-12:
            raise InvalidParameterError(f"probabilities sum to {total!r}")
        self.entries = tuple(parsed)

    @property
    def finite_support(self) -> bool:
        return True

    def atoms(self):
        return self.entries

    def moments(self):
        e_w = sum(p * w for (w, _), p in self.entries)
        e_wb = sum(p * wb for (_, wb), p in self.entries)
        e_both = sum(p * w * wb for (w, wb), p in self.entries)
        return (e_w, e_wb, e_both)

    def support_box(self):
        ws = [w for (w, _), _ in self.entries]
        vs = [v for (_, v), _ in self.entries]
        return ((min(ws), max(ws)), (min(vs), max(vs)))

    def _key(self):
        return self.entries

    def __repr__(self):
        inner = ", ".join(
            f"(({render_number(w)}, {render_number(v)}), {render_number(p)})"
            for (w, v), p in self.entries
        )
        return f"DiscreteTable([{inner}])"


class ProductLaw(WeightLaw):
    """Independent discrete marginals for w and w_bar."""

    kind = "product"

    def __init__(
        self,
        w_marginal: Sequence[tuple[object, object]],
        wbar_marginal: Sequence[tuple[object, object]],
    ):
        self.w_marginal = _parse_marginal(w_marginal, "w")
        self.wbar_marginal = _parse_marginal(wbar_marginal, "w_bar")

    @property
    def finite_support(self) -> bool:
        return True

    def atoms(self):
        return tuple(
            ((w, v), pw * pv)
            for w, pw in self.w_marginal
            for v, pv in self.wbar_marginal
        )

    def moments(self):
        e_w = sum(p * w for w, p in self.w_marginal)
        e_wb = sum(p * v for v, p in self.wbar_marginal)
        return (e_w, e_wb, e_w * e_wb)

    def support_box(self):
        ws = [w for w, _ in self.w_marginal]
        vs = [v for v, _ in self.wbar_marginal]
        return ((min(ws), max(ws)), (min(vs), max(vs)))

    def _key(self):
        return (self.w_marginal, self.wbar_marginal)

    def __repr__(self):
        return f"ProductLaw({self.w_marginal!r}, {self.wbar_marginal!r})"


def _parse_marginal(entries, name):
    if not entries:
        raise InvalidParameterError(f"{name} marginal needs at least one atom")
    parsed = []
    for value, prob in entries:
        value, prob = as_exact(value), as_exact(prob)
        if value < 0:
            raise InvalidParameterError("weights must be nonnegative")
        if prob <= 0:
            raise InvalidParameterError(
                f"atom probabilities must be positive, got {render_number(prob)}"
            )
        parsed.append((value, prob))
    values = [v for v, _ in parsed]
    if len(set(values)) != len(values):
        raise InvalidParameterError(f"duplicate value in {name} marginal")
    total = sum(p for _, p in parsed)
    if _all_rational(*(p for _, p in parsed)):
        if total != 1:
            raise InvalidParameterError(f"probabilities sum to {render_number(total)}")
    elif abs(total - 1) > 1e-12:
        raise InvalidParameterError(f"probabilities sum to {total!r}")
    return tuple(parsed)


class IdenticalUniform(WeightLaw):
    """Fully coupled weights: w = w_bar ~ Uniform(a, 1), 0 <= a < 1.

    Moments are closed-form: E w = (1+a)/2 and E w^2 = (1+a+a^2)/3, exact
    when ``a`` is rational.
    """

    kind = "identical_uniform"

    def __init__(self, a):
        self.a = as_exact(a)
        if not (0 <= self.a < 1):
            raise InvalidParameterError(f"need 0 <= a < 1, got {self.a}")

    @property
    def finite_support(self) -> bool:
        return False

    def atoms(self):
        raise InvalidParameterError("identical_uniform has no finite atom table")

    def moments(self):
        a = self.a
        if isinstance(a, Fraction):
            mean = (1 + a) / 2
            return (mean, mean, (1 + a + a * a) / 3)
        af = float(a)
        return ((1 + af) / 2, (1 + af) / 2, (1 + af + af * af) / 3)

    def support_box(self):
        return ((self.a, 1), (self.a, 1))

    def _key(self):
        return (self.a,)

    def __repr__(self):
        return f"IdenticalUniform(a={render_number(self.a)})"


def law_moments(law: WeightLaw):
    """(E w, E w_bar, E w*w_bar) — exact for rational finite-support laws
    and for rational-``a`` identical_uniform."""
    return law.moments()


def discrete_is_comonotone(law: WeightLaw) -> bool:
    """True when no two atoms are ordered oppositely in the coordinates.

    Comonotone laws are the ones for which positive quadrant dependence
    (E w*w_bar >= E w * E w_bar) is guaranteed; arbitrary tables may
    violate it, so callers must check, not presume.
    """
    if not law.finite_support:
        return isinstance(law, IdenticalUniform)
    pts = [pair for pair, _ in law.atoms()]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            dw = pts[i][0] - pts[j][0]
            dv = pts[i][1] - pts[j][1]
            if dw * dv < 0:
                return False
    return True


# ---------------------------------------------------------------------------
# Kernels
# ---------------------------------------------------------------------------


class Kernel:
    """Connection function kappa with kind-specific parameters.

    Built-in kinds are functions of the product z = x*y:

    * ``factorisable`` — kappa(z) = z (optionally carrying factor maps
      f1, f2 meaning kappa(x, y) = f1(x)*f2(y); such a kernel should be
      normalized away via :func:`normalize_factorisable` before heavy use);
    * ``exponential`` — kappa(z) = 1 - exp(-alpha*z), alpha > 0;
    * ``geometric`` — kappa(z) = z/(beta + z), beta > 0;
    * ``custom`` — arbitrary scalar callable z -> kappa(z), range-checked
      at every evaluation.
    """

    __slots__ = ("kind", "alpha", "beta", "fn", "comp1", "comp2")

    def __init__(self, kind, alpha=None, beta=None, fn=None, comp1=None, comp2=None):
        self.kind = kind
        self.alpha = alpha
        self.beta = beta
        self.fn = fn
        self.comp1 = comp1
        self.comp2 = comp2

    # -- constructors ------------------------------------------------------

    @classmethod
    def factorisable(cls, comp1: Callable | None = None, comp2: Callable | None = None):
        return cls("factorisable", comp1=comp1, comp2=comp2)

    @classmethod
    def exponential(cls, alpha):
        alpha = as_exact(alpha)
        if alpha <= 0:
            raise InvalidParameterError(f"alpha must be > 0, got {alpha}")
        return cls("exponential", alpha=alpha)

    @classmethod
    def geometric(cls, beta):
        beta = as_exact(beta)
        if beta <= 0:
            raise InvalidParameterError(f"beta must be > 0, got {beta}")
        return cls("geometric", beta=beta)

    @classmethod
    def custom(cls, fn: Callable):
        return cls("custom", fn=fn)

    # -- evaluation ----------------------------------------------------------

    @property
    def has_factor_maps(self) -> bool:
        return self.comp1 is not None or self.comp2 is not None

    def of_product(self, z):
        """kappa(z) without range checking; exact when inputs allow it."""
        if self.kind == "factorisable":
            if self.has_factor_maps:
                raise InvalidParameterError(
                    "a factor-mapped kernel is not a function of the product; "
                    "apply normalize_factorisable first"
                )
            return z
        if self.kind == "exponential":
            return 1.0 - math.exp(-float(self.alpha) * float(z))
        if self.kind == "geometric":
            if _all_rational(self.beta, z):
                return Fraction(z) / (Fraction(self.beta) + Fraction(z))
            return float(z) / (float(self.beta) + float(z))
        if self.kind == "custom":
            return self.fn(z)
        raise InvalidParameterError(f"unknown kernel kind {self.kind!r}")

    def _raw(self, x, y):
        if self.kind == "factorisable" and self.has_factor_maps:
            f1 = self.comp1 if self.comp1 is not None else _identity
            f2 = self.comp2 if self.comp2 is not None else _identity
            return f1(x) * f2(y)
        return self.of_product(x * y)

    def __repr__(self):
        if self.kind == "exponential":
            return f"Kernel.exponential(alpha={render_number(self.alpha)})"
        if self.kind == "geometric":
            return f"Kernel.geometric(beta={render_number(self.beta)})"
        if self.kind == "factorisable" and self.has_factor_maps:
            return "Kernel.factorisable(<factor maps>)"
        if self.kind == "custom":
            return "Kernel.custom(<fn>)"
        return "Kernel.factorisable()"


def _identity(v):
    return v


def kappa_eval(kernel: Kernel, x, y):
    """kappa(x, y) with domain and range enforcement.

    Raises a kernel-range error when the value leaves [0, 1] (possible for
    custom callables and for the plain product kernel off the unit square).
    """
    if x < 0 or y < 0:
        raise InvalidParameterError(f"kernel arguments must be >= 0, got ({x}, {y})")
    value = kernel._raw(x, y)
    if value < 0 or value > 1:
        raise KernelRangeError(
            f"kernel value {value!r} at ({x}, {y}) is outside [0, 1]"
        )
    return value


def kappa_longdouble(kernel: Kernel, x, y) -> np.longdouble:
    """kappa(x, y) in extended precision, for the non-rational oracle path.

    Rational inputs are converted by extended-precision division so no bits
    are lost before the kernel arithmetic.
    """
    xl, yl = _to_longdouble(x), _to_longdouble(y)
    if xl < 0 or yl < 0:
        raise InvalidParameterError(f"kernel arguments must be >= 0, got ({x}, {y})")
    if kernel.kind == "factorisable" and not kernel.has_factor_maps:
        value = xl * yl
    elif kernel.kind == "exponential":
        value = np.longdouble(1.0) - np.exp(-_to_longdouble(kernel.alpha) * xl * yl)
    elif kernel.kind == "geometric":
        z = xl * yl
        value = z / (_to_longdouble(kernel.beta) + z)
    else:
        value = _to_longdouble(kernel._raw(x, y))
    if value < 0 or value > 1:
        raise KernelRangeError(f"kernel value {value!r} at ({x}, {y}) is outside [0, 1]")
    return value


def _to_longdouble(v) -> np.longdouble:
    if isinstance(v, Rational):
        frac = Fraction(v)
        return np.longdouble(frac.numerator) / np.longdouble(frac.denominator)
    return np.longdouble(v)


def kernel_is_exact(kernel: Kernel) -> bool:
    """Whether the kernel maps rational inputs to rational values.

    True for the plain product kernel and for geometric kernels with a
    rational beta; custom callables and factor maps are probed once with a
    rational argument.
    """
    if kernel.kind == "factorisable" and not kernel.has_factor_maps:
        return True
    if kernel.kind == "geometric":
        return isinstance(kernel.beta, Rational)
    if kernel.kind == "exponential":
        return False
    try:
        probe = kernel._raw(Fraction(1, 2), Fraction(1, 3))
    except Exception:
        return False
    return isinstance(probe, Rational)


@dataclass(frozen=True)
class KernelValidationReport:
    """Grid check of the comparison-theorem hypotheses on a kernel.

    ``violations`` holds (grid point, property, measured value) triples,
    property in {'range', 'monotonicity', 'concavity'}; ``analytic`` marks
    built-in kinds whose properties hold by closed form (the grid is still
    checked).  ``strictly_increasing`` records whether all successive grid
    differences were strictly positive — the weak (nondecreasing) check is
    what gates verification, strictness is informational.
    """

    passed: bool
    violations: tuple
    analytic: bool
    strictly_increasing: bool

    def __bool__(self):
        return self.passed


def validate_kernel(kernel: Kernel, z_grid, tol: float = 1e-9) -> KernelValidationReport:
    """Check range, monotonicity, and concavity of z -> kappa(z) on a grid.

    The grid must be sorted with at least three nonnegative points.
    Failures are reported, never raised.  Kernels carrying factor maps are
    probed through kappa(z, 1).
    """
    zs = [float(z) for z in z_grid]
    if len(zs) < 3:
        raise InvalidParameterError("z_grid needs at least 3 points")
    if any(b < a for a, b in zip(zs, zs[1:])):
        raise InvalidParameterError("z_grid must be sorted ascending")
    if zs[0] < 0:
        raise InvalidParameterError("z_grid points must be >= 0")

    values = []
    violations = []
    for z in zs:
        v = float(kernel._raw(z, 1.0))
        values.append(v)
        if v < -tol or v > 1 + tol:
            violations.append((z, "range", v))

    diffs = [b - a for a, b in zip(values, values[1:])]
    for i, d in enumerate(diffs):
        if d < -tol:
            violations.append((zs[i + 1], "monotonicity", d))
    slopes = [
        (values[i + 1] - values[i]) / (zs[i + 1] - zs[i]) if zs[i + 1] > zs[i] else 0.0
        for i in range(len(zs) - 1)
    ]
    for i in range(len(slopes) - 1):
        curvature = slopes[i + 1] - slopes[i]
        if curvature > tol:
            violations.append((zs[i + 1], "concavity", curvature))

    analytic = kernel.kind in ("factorisable", "exponential", "geometric") and not kernel.has_factor_maps
    return KernelValidationReport(
        passed=not violations,
        violations=tuple(violations),
        analytic=analytic,
        strictly_increasing=all(d > 0 for d in diffs),
    )


# ---------------------------------------------------------------------------
# Sampling
# ---------------------------------------------------------------------------


def sample_weight(law: WeightLaw, rng: np.random.Generator) -> WeightPair:
    """Draw one (w, w_bar) pair.

    Draw budget is part of the reproducibility contract and is identical in
    the compiled backend: point masses consume no variates, every other
    kind consumes exactly one uniform.
    """
    if isinstance(law, PointMass):
        return WeightPair(float(law.w), float(law.w_bar))
    if isinstance(law, IdenticalUniform):
        a = float(law.a)
        t = a + (1.0 - a) * rng.random()
        return WeightPair(t, t)
    if isinstance(law, (DiscreteTable, ProductLaw)):
        values, cdf = _float_table(law)
        u = rng.random()
        idx = int(np.searchsorted(cdf, u, side="right"))
        return WeightPair(values[idx][0], values[idx][1])
    raise InvalidParameterError(f"cannot sample from {law!r}")


def _float_table(law: WeightLaw):
    """Float atom values and cdf with the final entry pinned to 1.0."""
    entries = law.atoms()
    values = [(float(w), float(v)) for (w, v), _ in entries]
    probs = np.array([float(p) for _, p in entries], dtype=np.float64)
    cdf = np.cumsum(probs)
    cdf[-1] = 1.0
    return values, cdf


# ---------------------------------------------------------------------------
# Normalization of factor-mapped product kernels
# ---------------------------------------------------------------------------


def normalize_factorisable(law: WeightLaw, kernel: Kernel) -> WeightLaw:
    """Push a product-form kernel's factor maps into the law.

    For kappa(x, y) = f1(x)*f2(y) this returns the law of
    (f1(w), f2(w_bar)); afterwards plain kappa(x, y) = x*y on the new law
    reproduces every edge probability.  Maps must be monotone nondecreasing
    on the support and land in [0, 1]; identity maps return the law
    unchanged.
    """
    if kernel.kind != "factorisable":
        raise InvalidParameterError(
            f"normalize_factorisable needs a factorisable kernel, got {kernel.kind!r}"
        )
    f1 = kernel.comp1 if kernel.comp1 is not None else _identity
    f2 = kernel.comp2 if kernel.comp2 is not None else _identity
    if f1 is _identity and f2 is _identity:
        return law

    if isinstance(law, PointMass):
        return PointMass(_apply_map(f1, law.w), _apply_map(f2, law.w_bar))
    if isinstance(law, DiscreteTable):
        _check_monotone(f1, sorted({w for (w, _), _ in law.entries}))
        _check_monotone(f2, sorted({v for (_, v), _ in law.entries}))
        merged: dict[tuple, object] = {}
        for (w, v), p in law.entries:
            pair = (_apply_map(f1, w), _apply_map(f2, v))
            merged[pair] = merged.get(pair, 0) + p
        return DiscreteTable(tuple((pair, p) for pair, p in merged.items()))
    if isinstance(law, ProductLaw):
        _check_monotone(f1, sorted(w for w, _ in law.w_marginal))
        _check_monotone(f2, sorted(v for v, _ in law.wbar_marginal))
        return ProductLaw(
            _merge_marginal((_apply_map(f1, w), p) for w, p in law.w_marginal),
            _merge_marginal((_apply_map(f2, v), p) for v, p in law.wbar_marginal),
        )
    if isinstance(law, IdenticalUniform):
        raise NormalizationError(
            "identical_uniform supports only identity factor maps; "
            "map the kernel analytically instead"
        )
    raise InvalidParameterError(f"cannot normalize {law!r}")


def _apply_map(fn, value):
    mapped = fn(value)
    if mapped < 0 or mapped > 1:
        raise NormalizationError(
            f"factor map sends support point {render_number(value)} to "
            f"{mapped!r}, outside [0, 1]"
        )
    return as_exact(mapped)


def _check_monotone(fn, sorted_support):
    previous = None
    for v in sorted_support:
        current = fn(v)
        if previous is not None and current < previous:
            raise InvalidParameterError(
                "factor map is not nondecreasing on the law's support"
            )
        previous = current


def _merge_marginal(entries):
    merged: dict = {}
    for value, p in entries:
        merged[value] = merged.get(value, 0) + p
    return tuple(merged.items())


# ---------------------------------------------------------------------------
# Per-vertex law maps and their compiled form
# ---------------------------------------------------------------------------


class LawMap:
    """Assignment of a weight law to every vertex.

    One shared default law, plus optional per-vertex overrides — enough to
    express "i.i.d. except these boundary vertices are deterministic".
    """

    def __init__(self, default: WeightLaw, overrides: dict[int, WeightLaw] | None = None):
        self.default = default
        self.overrides = dict(overrides) if overrides else {}

    @property
    def homogeneous(self) -> bool:
        return not self.overrides

    def law_for(self, vertex: int) -> WeightLaw:
        return self.overrides.get(vertex, self.default)

    def distinct_laws(self) -> list[WeightLaw]:
        laws = [self.default]
        for law in self.overrides.values():
            if law not in laws:
                laws.append(law)
        return laws

    def compile(self, vertex_count: int) -> "CompiledLaws":
        """Flatten to the array form consumed by the sampling backends."""
        laws = self.distinct_laws()
        slot = {law: i for i, law in enumerate(laws)}
        kinds = np.zeros(len(laws), dtype=np.uint8)
        par_a = np.zeros(len(laws), dtype=np.float64)
        par_b = np.zeros(len(laws), dtype=np.float64)
        indptr = np.zeros(len(laws) + 1, dtype=np.int64)
        cdf_parts, w_parts, wb_parts = [], [], []
        offset = 0
        for i, law in enumerate(laws):
            if isinstance(law, PointMass):
                kinds[i] = 0
                par_a[i] = float(law.w)
                par_b[i] = float(law.w_bar)
            elif isinstance(law, IdenticalUniform):
                kinds[i] = 1
                par_a[i] = float(law.a)
            elif isinstance(law, (DiscreteTable, ProductLaw)):
                kinds[i] = 2
                values, cdf = _float_table(law)
                cdf_parts.append(cdf)
                w_parts.append(np.array([w for w, _ in values], dtype=np.float64))
                wb_parts.append(np.array([v for _, v in values], dtype=np.float64))
                offset += len(values)
            else:
                raise InvalidParameterError(f"cannot compile {law!r}")
            indptr[i + 1] = offset
        vertex_law = np.zeros(vertex_count, dtype=np.int32)
        if self.overrides:
            base = slot[self.default]
            vertex_law[:] = base
            for v, law in self.overrides.items():
                if not (0 <= v < vertex_count):
                    raise InvalidParameterError(
                        f"law override for vertex {v} outside graph of size {vertex_count}"
                    )
                vertex_law[v] = slot[law]
        empty = np.zeros(0, dtype=np.float64)
        return CompiledLaws(
            kind=kinds,
            par_a=par_a,
            par_b=par_b,
            tab_indptr=indptr,
            tab_cdf=np.concatenate(cdf_parts) if cdf_parts else empty,
            tab_w=np.concatenate(w_parts) if w_parts else empty,
            tab_wbar=np.concatenate(wb_parts) if wb_parts else empty,
            vertex_law=vertex_law,
        )


@dataclass(frozen=True)
class CompiledLaws:
    """Array form of a LawMap shared by the pure and compiled backends.

    ``kind`` codes: 0 point mass (par_a, par_b = the pair; zero draws),
    1 identical uniform (par_a = a; one draw), 2 discrete table (one draw;
    cdf scan over tab_cdf[tab_indptr[k]:tab_indptr[k+1]]).
    """

    kind: np.ndarray
    par_a: np.ndarray
    par_b: np.ndarray
    tab_indptr: np.ndarray
    tab_cdf: np.ndarray
    tab_w: np.ndarray
    tab_wbar: np.ndarray
    vertex_law: np.ndarray

    @property
    def homogeneous_kind(self) -> int | None:
        """Law-kind code when every vertex shares one law, else None."""
        if len(self.kind) == 1:
            return int(self.kind[0])
        return None
