"""Configuration-driven experiment runner.

One YAML config file describes one experiment; the subcommand names the
experiment kind.  Results land in an output directory as a CSV table
(header row, canonical number rendering, no timestamps — re-runs with the
same config and seed are byte-identical) plus a JSON-lines file whose
first record is run metadata (config hash, version, timestamp) followed by
one structured record per instance.

Exit codes: 0 on success, 2 when any checked inequality is violated,
1 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from fractions import Fraction
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .branching import compare_tree_mc, gw_extinction, offspring_law
from .engine import (
    WeightedModel,
    boundary_survival_sweep,
    estimate_event,
    site_law,
)
from .errors import (
    HypothesisNotMetError,
    InvalidParameterError,
    PercoweaveError,
)
from .graphs import (
    DirectedGraph,
    build_from_edge_list,
    build_rooted_tree,
    build_square_lattice,
    counterexample_graph,
)
from .oracle import (
    check_kernel_reparametrization,
    compare_zero_functions,
    counterexample_crossing_closure,
    counterexample_laws,
    counterexample_two_path_collection,
    default_argument_grid,
    exact_event_probability,
    random_instance,
    reproduce_counterexample,
    verify_theorem_1_1,
    verify_theorem_1_2,
    verify_theorem_3_1,
)
from .paths import AllPathsBetween, BoundaryReaching, explicit, path_from_vertices
from .weights import (
    DiscreteTable,
    IdenticalUniform,
    Kernel,
    LawMap,
    PointMass,
    WeightLaw,
    as_exact,
    kappa_eval,
    law_moments,
    render_number,
)

__all__ = ["ExperimentConfig", "load_config", "describe", "run_experiment", "main"]

KINDS = (
    "simulate",
    "sweep",
    "verify-1.1",
    "verify-1.2",
    "verify-3.1",
    "zerofn",
    "counterexample",
    "gw",
    "kernel-equiv",
)

_COMMON_KEYS = {"kind", "replications", "confidence", "seed", "threads", "out"}
_KIND_KEYS = {
    "simulate": {"graph", "law", "kernel", "collection", "exact"},
    "sweep": {"law", "kernel", "sizes", "p", "p_c"},
    "verify-1.1": {"graph", "law", "kernel", "collection", "p", "instances", "max_edges"},
    "verify-1.2": {"graph", "law", "collection", "p", "instances", "max_edges"},
    "verify-3.1": {
        "graph", "law_a", "law_b", "kernel", "collection",
        "x_grid", "y_grid", "instances", "max_edges",
    },
    "zerofn": {"law_a", "law_b", "kernel", "max_size_a", "max_size_b", "x_grid", "y_grid"},
    "counterexample": set(),
    "gw": {"law", "out_degree", "generations", "depth"},
    "kernel-equiv": {"alpha", "beta", "w_grid", "w_bar_grid", "star_size"},
}


class UsageError(PercoweaveError):
    """Bad command line or unreadable/invalid config file."""


def _parse_number(value, where: str):
    """Accept ints, floats, and 'num/den' strings; reject everything else."""
    if isinstance(value, bool) or not isinstance(value, (int, float, str)):
        raise InvalidParameterError(f"{where}: expected a number, got {value!r}")
    try:
        return as_exact(Fraction(value) if isinstance(value, str) else value)
    except (ValueError, ZeroDivisionError) as exc:
        raise InvalidParameterError(f"{where}: {exc}") from exc


def _parse_grid(values, where: str):
    if not isinstance(values, (list, tuple)) or not values:
        raise InvalidParameterError(f"{where}: expected a nonempty list of numbers")
    return tuple(_parse_number(v, f"{where}[{i}]") for i, v in enumerate(values))


def _require_mapping(spec, where: str) -> dict:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise InvalidParameterError(f"{where}: expected a mapping with a 'kind' field")
    return spec


def _only_keys(spec: dict, allowed: set, where: str) -> None:
    extra = set(spec) - allowed - {"kind"}
    if extra:
        raise InvalidParameterError(
            f"{where}: unknown field(s) {sorted(extra)}; allowed: {sorted(allowed)}"
        )


def build_law(spec, where: str = "law", allow_map: bool = False):
    spec = _require_mapping(spec, where)
    kind = spec["kind"]
    if kind == "with_overrides":
        if not allow_map:
            raise InvalidParameterError(
                f"{where}: per-vertex overrides are not supported here; "
                f"give a single shared law"
            )
        _only_keys(spec, {"default", "overrides"}, where)
        overrides = spec.get("overrides")
        if not isinstance(overrides, dict) or not overrides:
            raise InvalidParameterError(
                f"{where}.overrides: expected a nonempty vertex -> law mapping"
            )
        return LawMap(
            build_law(spec.get("default"), f"{where}.default"),
            {int(v): build_law(o, f"{where}.overrides[{v}]") for v, o in overrides.items()},
        )
    if kind == "point_mass":
        _only_keys(spec, {"w", "w_bar"}, where)
        return PointMass(_parse_number(spec.get("w", 1), f"{where}.w"),
                         _parse_number(spec.get("w_bar", 1), f"{where}.w_bar"))
    if kind == "discrete_table":
        _only_keys(spec, {"atoms"}, where)
        atoms = spec.get("atoms")
        if not isinstance(atoms, list) or not atoms:
            raise InvalidParameterError(f"{where}.atoms: expected a nonempty list")
        entries = []
        for i, atom in enumerate(atoms):
            at = f"{where}.atoms[{i}]"
            if isinstance(atom, dict):
                extra = set(atom) - {"w", "w_bar", "prob"}
                if extra:
                    raise InvalidParameterError(f"{at}: unknown field(s) {sorted(extra)}")
                w, wb, pr = atom.get("w"), atom.get("w_bar"), atom.get("prob")
            elif isinstance(atom, (list, tuple)) and len(atom) == 3:
                w, wb, pr = atom
            else:
                raise InvalidParameterError(
                    f"{at}: expected [w, w_bar, prob] or a w/w_bar/prob mapping"
                )
            entries.append(
                ((_parse_number(w, f"{at}.w"), _parse_number(wb, f"{at}.w_bar")),
                 _parse_number(pr, f"{at}.prob"))
            )
        return DiscreteTable(entries)
    if kind == "identical_uniform":
        _only_keys(spec, {"a"}, where)
        return IdenticalUniform(_parse_number(spec.get("a", 0), f"{where}.a"))
    if kind == "site":
        _only_keys(spec, {"p"}, where)
        return site_law(_parse_number(spec.get("p"), f"{where}.p"))
    if kind == "counterexample_a":
        return counterexample_laws()[0]
    if kind == "counterexample_b":
        return counterexample_laws()[1]
    raise InvalidParameterError(
        f"{where}.kind: unknown law kind {kind!r}; expected point_mass, "
        f"discrete_table, identical_uniform, site, counterexample_a, counterexample_b"
    )


def build_kernel(spec, where: str = "kernel") -> Kernel:
    if spec is None:
        return Kernel.factorisable()
    spec = _require_mapping(spec, where)
    kind = spec["kind"]
    if kind in ("product", "factorisable"):
        _only_keys(spec, set(), where)
        return Kernel.factorisable()
    if kind == "exponential":
        _only_keys(spec, {"alpha"}, where)
        return Kernel.exponential(_parse_number(spec.get("alpha", 1), f"{where}.alpha"))
    if kind == "geometric":
        _only_keys(spec, {"beta"}, where)
        return Kernel.geometric(_parse_number(spec.get("beta", 1), f"{where}.beta"))
    raise InvalidParameterError(
        f"{where}.kind: unknown kernel kind {kind!r}; expected product, "
        f"exponential, geometric"
    )


def build_graph(spec, where: str = "graph") -> DirectedGraph:
    spec = _require_mapping(spec, where)
    kind = spec["kind"]
    if kind == "box":
        _only_keys(spec, {"side"}, where)
        side = spec.get("side")
        if not isinstance(side, int):
            raise InvalidParameterError(f"{where}.side: expected an integer")
        return build_square_lattice(side)
    if kind == "edge_list":
        _only_keys(spec, {"edges", "vertex_count"}, where)
        edges = spec.get("edges")
        if not isinstance(edges, list) or not edges:
            raise InvalidParameterError(f"{where}.edges: expected a nonempty list of [u, v]")
        pairs = []
        for i, e in enumerate(edges):
            if not (isinstance(e, (list, tuple)) and len(e) == 2):
                raise InvalidParameterError(f"{where}.edges[{i}]: expected [u, v]")
            pairs.append((int(e[0]), int(e[1])))
        return build_from_edge_list(pairs, vertex_count=spec.get("vertex_count"))
    if kind == "rooted_tree":
        _only_keys(spec, {"out_degree", "depth"}, where)
        return build_rooted_tree(int(spec.get("out_degree", 2)), int(spec.get("depth", 2)))
    if kind == "counterexample_star":
        _only_keys(spec, set(), where)
        return counterexample_graph()
    raise InvalidParameterError(
        f"{where}.kind: unknown graph kind {kind!r}; expected box, edge_list, "
        f"rooted_tree, counterexample_star"
    )


def build_collection(spec, graph: DirectedGraph, where: str = "collection"):
    spec = _require_mapping(spec, where)
    kind = spec["kind"]
    if kind == "all_paths_between":
        _only_keys(spec, {"source", "target"}, where)
        return AllPathsBetween(int(spec.get("source", 0)), int(spec.get("target", 0)))
    if kind == "boundary_reaching":
        _only_keys(spec, {"source", "boundary"}, where)
        boundary = spec.get("boundary")
        if not isinstance(boundary, list) or not boundary:
            raise InvalidParameterError(f"{where}.boundary: expected a nonempty vertex list")
        return BoundaryReaching(int(spec.get("source", 0)), frozenset(int(b) for b in boundary))
    if kind == "explicit":
        _only_keys(spec, {"paths"}, where)
        raw = spec.get("paths")
        if not isinstance(raw, list) or not raw:
            raise InvalidParameterError(f"{where}.paths: expected a nonempty list of vertex lists")
        members = [path_from_vertices(graph, [int(v) for v in p]) for p in raw]
        return explicit(members)
    if kind == "counterexample_two_paths":
        _only_keys(spec, set(), where)
        return counterexample_two_path_collection(graph)
    if kind == "counterexample_crossing":
        _only_keys(spec, set(), where)
        return counterexample_crossing_closure(graph)
    raise InvalidParameterError(
        f"{where}.kind: unknown collection kind {kind!r}; expected "
        f"all_paths_between, boundary_reaching, explicit, "
        f"counterexample_two_paths, counterexample_crossing"
    )


@dataclass(frozen=True)
class ExperimentConfig:
    """One validated experiment: kind plus the raw (normalized) settings.

    ``settings`` holds the kind-specific fields exactly as loaded from the
    config file, so serialize -> parse round-trips to an equal config; the
    builders re-derive live objects from it on demand.
    """

    kind: str
    settings: dict
    replications: int = 10_000
    confidence: float = 0.95
    master_seed: int = 0
    threads: int = 1
    out_dir: str = "results"

    def to_dict(self) -> dict:
        data = dict(self.settings)
        data.update(
            kind=self.kind,
            replications=self.replications,
            confidence=self.confidence,
            seed=self.master_seed,
            threads=self.threads,
            out=self.out_dir,
        )
        return data

    def serialize(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=True)

    @property
    def config_hash(self) -> str:
        canonical = json.dumps(self.to_dict(), sort_keys=True, default=str)
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def config_from_dict(data, kind: str | None = None) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise InvalidParameterError("config: expected a mapping at the top level")
    data = dict(data)
    file_kind = data.pop("kind", None)
    if kind is None:
        kind = file_kind
    elif file_kind is not None and file_kind != kind:
        raise InvalidParameterError(
            f"config field 'kind' is {file_kind!r} but the subcommand is {kind!r}"
        )
    if kind not in KINDS:
        raise InvalidParameterError(f"config: unknown experiment kind {kind!r}")
    replications = data.pop("replications", 10_000)
    confidence = data.pop("confidence", 0.95)
    seed = data.pop("seed", 0)
    threads = data.pop("threads", 1)
    out_dir = data.pop("out", "results")
    if not isinstance(replications, int) or replications < 1:
        raise InvalidParameterError("config field 'replications' must be a positive integer")
    if not isinstance(confidence, float) or not 0 < confidence < 1:
        raise InvalidParameterError("config field 'confidence' must be a float in (0, 1)")
    if not isinstance(seed, int):
        raise InvalidParameterError("config field 'seed' must be an integer")
    if not isinstance(threads, int) or threads < 1:
        raise InvalidParameterError("config field 'threads' must be a positive integer")
    allowed = _KIND_KEYS[kind]
    extra = set(data) - allowed
    if extra:
        raise InvalidParameterError(
            f"config: unknown field(s) {sorted(extra)} for kind {kind!r}; "
            f"allowed: {sorted(allowed | _COMMON_KEYS)}"
        )
    config = ExperimentConfig(
        kind, data, replications, confidence, seed, threads, str(out_dir)
    )
    _resolve(config)  # validate every field before dispatch
    return config


def load_config(path, kind: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise UsageError(f"config file {path} is not valid YAML: {exc}") from exc
    if overrides:
        if not isinstance(data, dict):
            raise InvalidParameterError("config: expected a mapping at the top level")
        data = {**data, **overrides}
    return config_from_dict(data, kind)


@dataclass
class _Resolved:
    """Live objects rebuilt from a config, shared by describe and run."""

    graph: DirectedGraph | None = None
    laws: dict = field(default_factory=dict)  # label -> WeightLaw
    kernel: Kernel | None = None
    collection: object = None
    work_units: int = 0


def _resolve(config: ExperimentConfig) -> _Resolved:
    kind, s = config.kind, config.settings
    r = _Resolved()

    def need(key):
        if key not in s:
            raise InvalidParameterError(f"config: kind {kind!r} requires field {key!r}")
        return s[key]

    if kind == "counterexample":
        r.graph = counterexample_graph()
        a, b = counterexample_laws()
        r.laws = {"law_a": a, "law_b": b}
        r.collection = counterexample_two_path_collection(r.graph)
        r.work_units = 1
        return r

    if kind == "simulate":
        r.graph = build_graph(need("graph"))
        r.laws = {"law": build_law(need("law"), allow_map=True)}
        r.kernel = build_kernel(need("kernel"))
        r.collection = build_collection(need("collection"), r.graph)
        r.work_units = config.replications * r.graph.edge_count
        return r

    if kind == "sweep":
        r.laws = {"law": build_law(need("law"))}
        r.kernel = build_kernel(s.get("kernel"))
        sizes = need("sizes")
        if not isinstance(sizes, list) or not all(isinstance(x, int) for x in sizes):
            raise InvalidParameterError("config field 'sizes' must be a list of integers")
        for key in ("p", "p_c"):
            if key in s:
                _parse_number(s[key], f"config field {key!r}")
        r.work_units = config.replications * sum(4 * L * (L - 1) for L in sizes)
        return r

    if kind in ("verify-1.1", "verify-1.2", "verify-3.1"):
        instances = s.get("instances", 0)
        if not isinstance(instances, int) or instances < 0:
            raise InvalidParameterError("config field 'instances' must be a nonnegative integer")
        if instances:
            r.work_units = instances
            return r
        r.graph = build_graph(need("graph"))
        r.collection = build_collection(need("collection"), r.graph)
        if kind == "verify-3.1":
            r.laws = {
                "law_a": build_law(need("law_a"), "law_a", allow_map=True),
                "law_b": build_law(need("law_b"), "law_b", allow_map=True),
            }
            r.kernel = build_kernel(need("kernel"))
            for key in ("x_grid", "y_grid"):
                if key in s:
                    _parse_grid(s[key], f"config field {key!r}")
        else:
            r.laws = {"law": build_law(need("law"))}
            if kind == "verify-1.1":
                r.kernel = build_kernel(need("kernel"))
            if "p" in s:
                _parse_number(s["p"], "config field 'p'")
        r.work_units = 1
        return r

    if kind == "zerofn":
        r.laws = {
            "law_a": build_law(need("law_a"), "law_a"),
            "law_b": build_law(need("law_b"), "law_b"),
        }
        r.kernel = build_kernel(s.get("kernel"))
        max_a = s.get("max_size_a", 2)
        max_b = s.get("max_size_b", 2)
        if not all(isinstance(m, int) and m >= 0 for m in (max_a, max_b)):
            raise InvalidParameterError("size caps must be nonnegative integers")
        for key in ("x_grid", "y_grid"):
            if key in s:
                _parse_grid(s[key], f"config field {key!r}")
        r.work_units = (max_a + 1) * (max_b + 1)
        return r

    if kind == "gw":
        r.laws = {"law": build_law(need("law"))}
        d = need("out_degree")
        if not isinstance(d, int) or d < 1:
            raise InvalidParameterError("config field 'out_degree' must be a positive integer")
        generations = s.get("generations", [])
        if not isinstance(generations, list) or not all(
            isinstance(k, int) and k >= 0 for k in generations
        ):
            raise InvalidParameterError(
                "config field 'generations' must be a list of nonnegative integers"
            )
        depth = s.get("depth")
        if depth is not None and (not isinstance(depth, int) or depth < 1):
            raise InvalidParameterError("config field 'depth' must be a positive integer")
        r.work_units = config.replications * (d ** depth if depth else 1)
        return r

    if kind == "kernel-equiv":
        alpha = _parse_number(need("alpha"), "config field 'alpha'")
        beta = _parse_number(need("beta"), "config field 'beta'")
        if alpha <= 0 or beta <= 0:
            raise InvalidParameterError("config fields 'alpha' and 'beta' must be positive")
        star = s.get("star_size", 2)
        if not isinstance(star, int):
            raise InvalidParameterError("config field 'star_size' must be an integer")
        w = _parse_grid(s["w_grid"], "config field 'w_grid'") if "w_grid" in s else _DEFAULT_GRID
        wb = (
            _parse_grid(s["w_bar_grid"], "config field 'w_bar_grid'")
            if "w_bar_grid" in s
            else _DEFAULT_GRID
        )
        r.work_units = len(w) * len(wb)
        return r

    raise InvalidParameterError(f"config: unknown experiment kind {kind!r}")


_DEFAULT_GRID = tuple(Fraction(k, 4) for k in range(5))


# ---------------------------------------------------------------------------
# Output artifacts
# ---------------------------------------------------------------------------


def _cell(value) -> str:
    """Canonical text for one CSV cell: rationals as num/den, floats via
    repr (shortest round-trip, byte-stable), blanks for missing."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (Fraction, int)):
        return render_number(value)
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, np.floating):
        return repr(float(value))
    return str(value)


def _json_default(obj):
    if isinstance(obj, Fraction):
        return render_number(obj)
    if isinstance(obj, (np.floating, np.longdouble)):
        return float(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, frozenset):
        return sorted(obj)
    raise TypeError(f"not JSON-serializable: {obj!r}")


def _prob_payload(prob) -> dict | None:
    if prob is None:
        return None
    return {
        "value": float(prob.value),
        "exact": render_number(prob.exact) if prob.exact is not None else None,
        "method": prob.method,
        "edge_count": prob.edge_count,
        "assignment_count": prob.assignment_count,
    }


class ResultWriter:
    """CSV + JSON-lines artifact pair for one run.

    The CSV holds only data (re-runs overwrite byte-identically); the
    JSON-lines file is append-only, starting each run with a meta record
    that carries the config hash, version, seed, and the only timestamp.
    """

    def __init__(self, out_dir: Path, config: ExperimentConfig):
        self.out_dir = out_dir
        self.config = config
        out_dir.mkdir(parents=True, exist_ok=True)
        self.csv_path = out_dir / f"{config.kind}.csv"
        self.jsonl_path = out_dir / f"{config.kind}.jsonl"
        self._records = [
            {
                "record": "meta",
                "kind": config.kind,
                "config_hash": config.config_hash,
                "version": __version__,
                "seed": config.master_seed,
                "replications": config.replications,
                "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
            }
        ]

    def write_table(self, header, rows) -> None:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
        self.csv_path.write_text(buffer.getvalue())

    def add_record(self, record: dict) -> None:
        self._records.append(record)

    def finish(self) -> None:
        with self.jsonl_path.open("a") as handle:
            for record in self._records:
                handle.write(json.dumps(record, sort_keys=True, default=_json_default))
                handle.write("\n")


# ---------------------------------------------------------------------------
# Describe (dry run)
# ---------------------------------------------------------------------------


def describe(config: ExperimentConfig) -> str:
    """Human-readable plan: resolved sizes, law moments, default edge
    probabilities for both comparison bounds, and estimated work units.
    Performs no simulation and writes nothing."""
    r = _resolve(config)
    lines = [
        f"experiment: {config.kind}",
        f"config hash: {config.config_hash}",
        f"seed: {config.master_seed}  replications: {config.replications}  "
        f"confidence: {config.confidence}  threads: {config.threads}",
    ]
    if config.kind == "sweep":
        sizes = config.settings["sizes"]
        lines.append(f"lattice sides: {sizes}")
        for side in sizes:
            lines.append(
                f"  side {side}: {side * side} vertices, {4 * side * (side - 1)} directed edges"
            )
    if r.graph is not None:
        lines.append(
            f"graph: {r.graph.vertex_count} vertices, {r.graph.edge_count} directed edges"
        )
    kernel = r.kernel if r.kernel is not None else Kernel.factorisable()
    for label, law in r.laws.items():
        if isinstance(law, LawMap):
            lines.append(
                f"{label}: shared law with per-vertex overrides at "
                f"{sorted(law.overrides)}"
            )
            law = law.default
        ew, ewbar, eprod = law_moments(law)
        lines.append(
            f"{label}: E(W) = {float(ew):.6g}, E(W_bar) = {float(ewbar):.6g}, "
            f"E(W W_bar) = {float(eprod):.6g}"
        )
        threshold = max(float(eprod), float(ew) * float(ewbar))
        upper_p = float(kappa_eval(kernel, threshold, 1.0))
        lines.append(f"{label}: independent-edge upper bound uses p = {upper_p:.6g}")
        if law.in_unit_square():
            lines.append(f"{label}: occupied-vertex lower bound uses p = {float(eprod):.6g}")
    lines.append(f"estimated work units: {r.work_units}")
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Dispatchers
# ---------------------------------------------------------------------------


def _run_counterexample(config: ExperimentConfig, writer: ResultWriter) -> int:
    report = reproduce_counterexample()
    writer.write_table(
        ("law", "probability", "probability_float", "closed_form"),
        [
            ("a", report.probability_a.exact, float(report.probability_a.value),
             report.closed_form_a),
            ("b", report.probability_b.exact, float(report.probability_b.value),
             report.closed_form_b),
        ],
    )
    writer.add_record(
        {
            "record": "counterexample",
            "probability_a": _prob_payload(report.probability_a),
            "probability_b": _prob_payload(report.probability_b),
            "ordering_reversed": report.ordering_reversed,
            "collection_splice_closed": report.hoppability.weakly_hoppable,
            "zero_comparison_verdict": report.zero_comparison.verdict,
            "zero_points_checked": report.zero_comparison.points_checked,
        }
    )
    for line in report.summary_lines():
        print(line)
    return 0


def _run_simulate(config: ExperimentConfig, writer: ResultWriter) -> int:
    r = _resolve(config)
    model = WeightedModel(r.graph, r.laws["law"], r.kernel)
    est = estimate_event(
        model, r.collection, config.replications, config.master_seed,
        threads=config.threads, confidence=config.confidence,
    )
    oracle = None
    if config.settings.get("exact"):
        oracle = exact_event_probability(r.graph, r.laws["law"], r.kernel, r.collection)
    writer.write_table(
        ("estimate", "ci_low", "ci_high", "successes", "replications",
         "confidence", "oracle_exact", "oracle_value"),
        [(
            est.estimate, est.ci_low, est.ci_high, est.successes, est.replications,
            est.confidence,
            oracle.exact if oracle is not None else None,
            float(oracle.value) if oracle is not None else None,
        )],
    )
    writer.add_record(
        {
            "record": "estimate",
            "estimate": est.estimate,
            "ci_low": est.ci_low,
            "ci_high": est.ci_high,
            "successes": est.successes,
            "oracle": _prob_payload(oracle),
        }
    )
    print(
        f"event probability estimate: {est.estimate:.6g} "
        f"[{est.ci_low:.6g}, {est.ci_high:.6g}] ({est.successes}/{est.replications})"
    )
    if oracle is not None:
        print(f"exact oracle value: {oracle.as_text()}")
    return 0


def _run_sweep(config: ExperimentConfig, writer: ResultWriter) -> int:
    r = _resolve(config)
    s = config.settings
    law = r.laws["law"]
    points = boundary_survival_sweep(
        law, r.kernel, s["sizes"], config.replications, config.master_seed,
        threads=config.threads, confidence=config.confidence,
    )
    p = _parse_number(s["p"], "p") if "p" in s else None
    p_c = _parse_number(s["p_c"], "p_c") if "p_c" in s else None
    rows = []
    for point in points:
        est = point.estimate
        rows.append(
            (point.side_length, point.origin, est.estimate, est.ci_low, est.ci_high,
             est.successes, est.replications, p, p_c)
        )
        writer.add_record(
            {
                "record": "sweep_point",
                "side": point.side_length,
                "origin": point.origin,
                "estimate": est.estimate,
                "ci_low": est.ci_low,
                "ci_high": est.ci_high,
                "successes": est.successes,
            }
        )
        print(
            f"side {point.side_length}: survival {est.estimate:.4f} "
            f"[{est.ci_low:.4f}, {est.ci_high:.4f}]"
        )
    writer.write_table(
        ("side", "origin", "estimate", "ci_low", "ci_high", "successes",
         "replications", "p", "p_c"),
        rows,
    )
    return 0


def _verify_one(kind: str, graph, laws, kernel, collection, settings):
    if kind == "verify-1.1":
        p = _parse_number(settings["p"], "p") if "p" in settings else None
        return verify_theorem_1_1(graph, laws["law"], kernel, collection, p)
    if kind == "verify-1.2":
        p = _parse_number(settings["p"], "p") if "p" in settings else None
        return verify_theorem_1_2(graph, laws["law"], collection, p)
    x_grid = _parse_grid(settings["x_grid"], "x_grid") if "x_grid" in settings else None
    y_grid = _parse_grid(settings["y_grid"], "y_grid") if "y_grid" in settings else None
    return verify_theorem_3_1(
        graph, laws["law_a"], laws["law_b"], kernel, collection, x_grid, y_grid
    )


def _record_payload(record) -> dict:
    return {
        "record": "verdict",
        "statement": record.statement,
        "instance_hash": record.instance_hash,
        "verdict": record.verdict,
        "lhs": _prob_payload(record.lhs),
        "rhs": _prob_payload(record.rhs),
        "slack": record.slack,
        "slack_exact": render_number(record.slack_exact)
        if record.slack_exact is not None
        else None,
        "p": record.p,
        "p_exact": render_number(record.p_exact) if record.p_exact is not None else None,
        "refined": record.refined,
    }


def _verify_row(index, record):
    return (
        index,
        record.instance_hash,
        record.verdict,
        record.lhs.value if record.lhs is not None else None,
        record.lhs.exact if record.lhs is not None else None,
        record.rhs.value if record.rhs is not None else None,
        record.rhs.exact if record.rhs is not None else None,
        record.slack,
        record.slack_exact,
        record.p,
        record.refined,
    )


_VERIFY_HEADER = (
    "instance", "instance_hash", "verdict", "lhs", "lhs_exact", "rhs", "rhs_exact",
    "slack", "slack_exact", "p", "refined",
)


def _run_verify(config: ExperimentConfig, writer: ResultWriter) -> int:
    kind, s = config.kind, config.settings
    instances = s.get("instances", 0)
    rows = []
    worst = "holds"
    if instances:
        rng = np.random.default_rng(config.master_seed)
        max_edges = s.get("max_edges", 10)
        unit_only = kind in ("verify-1.2", "verify-3.1")
        for index in range(instances):
            inst = random_instance(rng, max_edges=max_edges, unit_square_only=unit_only)
            try:
                if kind == "verify-1.1":
                    record = verify_theorem_1_1(
                        inst.graph, inst.law, inst.kernel, inst.collection
                    )
                elif kind == "verify-1.2":
                    record = verify_theorem_1_2(inst.graph, inst.law, inst.collection)
                else:
                    partner = random_instance(rng, max_edges=max_edges, unit_square_only=True)
                    record = verify_theorem_3_1(
                        inst.graph, inst.law, partner.law, inst.kernel, inst.collection
                    )
            except HypothesisNotMetError as exc:
                writer.add_record(
                    {"record": "skipped", "instance": index, "reason": str(exc)}
                )
                rows.append((index, "", "hypothesis-not-met") + (None,) * 8)
                continue
            rows.append(_verify_row(index, record))
            payload = _record_payload(record)
            payload["instance"] = index
            writer.add_record(payload)
            if record.verdict == "violated":
                worst = "violated"
                print(record.summary_line())
    else:
        r = _resolve(config)
        record = _verify_one(kind, r.graph, r.laws, r.kernel, r.collection, s)
        rows.append(_verify_row(0, record))
        payload = _record_payload(record)
        payload["instance"] = 0
        writer.add_record(payload)
        if record.verdict == "violated":
            worst = "violated"
        print(record.summary_line())
    writer.write_table(_VERIFY_HEADER, rows)
    checked = len(rows)
    violations = sum(1 for row in rows if row[2] == "violated")
    print(f"{kind}: {checked} instance(s) checked, {violations} violation(s)")
    return 2 if worst == "violated" else 0


def _run_zerofn(config: ExperimentConfig, writer: ResultWriter) -> int:
    r = _resolve(config)
    s = config.settings
    laws = [r.laws["law_a"], r.laws["law_b"]]
    x_grid = (
        _parse_grid(s["x_grid"], "x_grid")
        if "x_grid" in s
        else default_argument_grid(laws, "susceptibility")
    )
    y_grid = (
        _parse_grid(s["y_grid"], "y_grid")
        if "y_grid" in s
        else default_argument_grid(laws, "infectivity")
    )
    comparison = compare_zero_functions(
        laws[0], laws[1], r.kernel, s.get("max_size_a", 2), s.get("max_size_b", 2),
        x_grid, y_grid,
    )
    rows = [
        (len(pt.x), len(pt.y),
         ";".join(render_number(v) for v in pt.x),
         ";".join(render_number(v) for v in pt.y),
         pt.value_a, pt.value_b, pt.gap)
        for pt in comparison.table
    ]
    writer.write_table(
        ("a_size", "b_size", "x_args", "y_args", "value_a", "value_b", "gap"), rows
    )

    def _point(pt):
        if pt is None:
            return None
        return {
            "x": [render_number(v) for v in pt.x],
            "y": [render_number(v) for v in pt.y],
            "value_a": float(pt.value_a),
            "value_b": float(pt.value_b),
        }

    writer.add_record(
        {
            "record": "zero_comparison",
            "verdict": comparison.verdict,
            "a_geq_b_everywhere": comparison.a_geq_b_everywhere,
            "b_geq_a_everywhere": comparison.b_geq_a_everywhere,
            "points_checked": comparison.points_checked,
            "max_gap": comparison.max_gap,
            "witness_a_above": _point(comparison.witness_a_above),
            "witness_b_above": _point(comparison.witness_b_above),
        }
    )
    print(
        f"zero-function comparison: {comparison.verdict} over "
        f"{comparison.points_checked} points (max gap {comparison.max_gap:.6g})"
    )
    return 0


def _run_gw(config: ExperimentConfig, writer: ResultWriter) -> int:
    r = _resolve(config)
    s = config.settings
    law = r.laws["law"]
    d = s["out_degree"]
    generations = tuple(s.get("generations", []))
    offspring = offspring_law(law, d)
    result = gw_extinction(offspring, generations=generations)
    rows = [
        ("offspring_p", j, float(p), p if isinstance(p, (int, Fraction)) else None,
         None, None)
        for j, p in enumerate(offspring.probabilities)
    ]
    rows.append(
        ("offspring_mean", None, float(offspring.mean),
         offspring.mean if isinstance(offspring.mean, (int, Fraction)) else None,
         None, None)
    )
    rows.append(("extinction_q", None, result.q, None, None, None))
    for k, value in result.survival:
        rows.append(("survival_pgf", k, value, None, None, None))
    record = {
        "record": "gw",
        "out_degree": d,
        "offspring": [render_number(p) for p in offspring.probabilities],
        "mean": float(offspring.mean),
        "q": result.q,
        "iterations": result.iterations,
        "residual": result.residual,
        "survival": [[k, v] for k, v in result.survival],
    }
    print(
        f"offspring mean {float(offspring.mean):.6g}, extinction probability "
        f"{result.q:.6g} ({result.iterations} iterations)"
    )
    depth = s.get("depth")
    if depth is not None:
        comparison = compare_tree_mc(
            law, d, depth, config.replications, config.master_seed,
            threads=config.threads,
        )
        est = comparison.conditioned
        rows.append(("survival_mc_conditioned", depth, est.estimate, None,
                     est.ci_low, est.ci_high))
        rows.append(
            ("survival_mc_unconditioned", depth, comparison.unconditioned.estimate,
             None, comparison.unconditioned.ci_low, comparison.unconditioned.ci_high)
        )
        rows.append(
            ("survival_pgf_at_depth", depth, float(comparison.pgf_survival),
             comparison.pgf_survival
             if isinstance(comparison.pgf_survival, (int, Fraction)) else None,
             None, None)
        )
        record["tree_comparison"] = {
            "depth": depth,
            "pgf_survival": float(comparison.pgf_survival),
            "conditioned": est.estimate,
            "conditioned_ci": [est.ci_low, est.ci_high],
            "unconditioned": comparison.unconditioned.estimate,
            "within_ci": comparison.within_ci,
            "vertex_count": comparison.vertex_count,
        }
        print(comparison.summary_line())
    writer.write_table(
        ("quantity", "index", "value", "value_exact", "ci_low", "ci_high"), rows
    )
    writer.add_record(record)
    return 0


def _run_kernel_equiv(config: ExperimentConfig, writer: ResultWriter) -> int:
    s = config.settings
    w_grid = _parse_grid(s["w_grid"], "w_grid") if "w_grid" in s else _DEFAULT_GRID
    w_bar_grid = (
        _parse_grid(s["w_bar_grid"], "w_bar_grid") if "w_bar_grid" in s else _DEFAULT_GRID
    )
    report = check_kernel_reparametrization(
        w_grid,
        w_bar_grid,
        _parse_number(s["alpha"], "alpha"),
        _parse_number(s["beta"], "beta"),
        s.get("star_size", 2),
    )
    rows = []
    for joint in report.joints:
        for state, (shared, independent) in enumerate(
            zip(joint.table_shared, joint.table_independent)
        ):
            rows.append(
                (render_number(joint.w),
                 ";".join(render_number(v) for v in joint.w_bars),
                 state, shared, independent, joint.total_variation)
            )
    writer.write_table(
        ("w", "w_bars", "state", "shared", "independent", "total_variation"), rows
    )
    writer.add_record(
        {
            "record": "reparametrization",
            "marginal_max_error": report.marginal_max_error,
            "marginals_match": report.marginals_match,
            "alpha_shift_max_error": report.alpha_shift_max_error,
            "max_total_variation": float(report.max_total_variation),
            "star_size": report.star_size,
        }
    )
    for line in report.summary_lines():
        print(line)
    return 0


_DISPATCH = {
    "simulate": _run_simulate,
    "sweep": _run_sweep,
    "verify-1.1": _run_verify,
    "verify-1.2": _run_verify,
    "verify-3.1": _run_verify,
    "zerofn": _run_zerofn,
    "counterexample": _run_counterexample,
    "gw": _run_gw,
    "kernel-equiv": _run_kernel_equiv,
}


def run_experiment(config: ExperimentConfig) -> int:
    """Dispatch one validated config, writing CSV + JSON-lines artifacts.

    Returns the process exit code: 0 on success, 2 when any checked
    inequality comes back violated."""
    writer = ResultWriter(Path(config.out_dir), config)
    status = _DISPATCH[config.kind](config, writer)
    writer.finish()
    print(f"wrote {writer.csv_path} and {writer.jsonl_path}")
    return status


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as exit code 1, not 2."""

    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="percoweave",
        description="Dependent-percolation experiments: simulation, exact "
        "verification, and comparison reports driven by YAML configs.",
    )
    subparsers = parser.add_subparsers(dest="kind", required=True)
    for kind in KINDS:
        sub = subparsers.add_parser(kind, help=f"run a {kind} experiment")
        sub.add_argument("--config", required=True, help="YAML experiment config")
        sub.add_argument("--seed", type=int, default=None, help="override the master seed")
        sub.add_argument("--out", default=None, help="override the output directory")
        sub.add_argument("--threads", type=int, default=None, help="override worker count")
        sub.add_argument(
            "--describe", action="store_true",
            help="print the resolved plan and exit without running",
        )
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        overrides = {}
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.out is not None:
            overrides["out"] = args.out
        if args.threads is not None:
            overrides["threads"] = args.threads
        config = load_config(args.config, args.kind, overrides)
        if args.describe:
            print(describe(config))
            return 0
        return run_experiment(config)
    except UsageError as exc:
        print(f"percoweave: usage error: {exc}", file=sys.stderr)
        return 1
    except PercoweaveError as exc:
        print(f"percoweave: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
