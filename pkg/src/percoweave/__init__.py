"""percoweave: a dependent-percolation laboratory for weighted epidemics on
directed graphs — fast Monte Carlo engine, exact small-instance oracle,
branching-process bounds, and a reproducible experiment runner."""

from .backend import BACKEND_NAME, HAVE_COMPILED, available_backends, get_backend
from .branching import (
    GWResult,
    OffspringLaw,
    TreeComparisonRecord,
    compare_tree_mc,
    gw_extinction,
    gw_generation_survival,
    offspring_law,
)
from .engine import (
    BondModel,
    EdgeConfiguration,
    EstimateWithCI,
    SiteModel,
    SweepPoint,
    WeightedModel,
    boundary_survival_sweep,
    estimate_boundary_survival,
    estimate_event,
    estimate_expected_cluster_size,
    reach_cluster,
    sample_bond,
    sample_configuration,
    sample_site,
    site_law,
    wilson_interval,
)
from .errors import (
    ConfigError,
    HypothesisNotMetError,
    InstanceTooLargeError,
    InvalidInputError,
    InvalidParameterError,
    KernelRangeError,
    NormalizationError,
    PercoweaveError,
)
from .graphs import (
    DirectedGraph,
    build_from_edge_list,
    build_rooted_tree,
    build_square_lattice,
    counterexample_graph,
    lattice_border,
    load_edge_list,
    tree_generation_vertices,
)
from .oracle import (
    ExactProbability,
    HarnessInstance,
    TheoremCheckRecord,
    ZeroFunctionQuery,
    bond_event_probability,
    check_kernel_reparametrization,
    compare_zero_functions,
    counterexample_laws,
    default_argument_grid,
    exact_event_probability,
    exact_expected_cluster_size,
    random_instance,
    reproduce_counterexample,
    verify_theorem_1_1,
    verify_theorem_1_2,
    verify_theorem_3_1,
    zero_function,
)
from .paths import (
    AllPathsBetween,
    BoundaryReaching,
    ExplicitCollection,
    Path,
    all_self_avoiding_paths,
    build_xi_n,
    certify,
    event_holds,
    explicit,
    is_weakly_hoppable,
    load_paths,
    loop_erased,
    make_path,
    path_from_vertices,
    trivial_path,
)
from .weights import (
    DiscreteTable,
    IdenticalUniform,
    Kernel,
    LawMap,
    PointMass,
    ProductLaw,
    WeightLaw,
    WeightPair,
    as_exact,
    discrete_is_comonotone,
    kappa_eval,
    law_moments,
    normalize_factorisable,
    render_number,
    sample_weight,
    validate_kernel,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    # backends
    "BACKEND_NAME", "HAVE_COMPILED", "available_backends", "get_backend",
    # weight laws and kernels
    "WeightPair", "WeightLaw", "PointMass", "DiscreteTable", "ProductLaw",
    "IdenticalUniform", "LawMap", "Kernel", "as_exact", "render_number",
    "law_moments", "discrete_is_comonotone", "kappa_eval", "validate_kernel",
    "sample_weight", "normalize_factorisable",
    # graphs
    "DirectedGraph", "build_from_edge_list", "build_square_lattice",
    "build_rooted_tree", "lattice_border", "tree_generation_vertices",
    "counterexample_graph", "load_edge_list",
    # paths and events
    "Path", "trivial_path", "make_path", "path_from_vertices", "loop_erased",
    "ExplicitCollection", "AllPathsBetween", "BoundaryReaching", "explicit",
    "certify", "is_weakly_hoppable", "all_self_avoiding_paths", "build_xi_n",
    "event_holds", "load_paths",
    # Monte Carlo engine
    "WeightedModel", "SiteModel", "BondModel", "site_law", "EdgeConfiguration",
    "EstimateWithCI", "SweepPoint", "wilson_interval", "sample_configuration",
    "sample_bond", "sample_site", "reach_cluster", "estimate_event",
    "estimate_expected_cluster_size", "estimate_boundary_survival",
    "boundary_survival_sweep",
    # exact oracle and verification harness
    "ExactProbability", "exact_event_probability", "bond_event_probability",
    "exact_expected_cluster_size", "ZeroFunctionQuery", "zero_function",
    "compare_zero_functions", "default_argument_grid", "TheoremCheckRecord",
    "verify_theorem_1_1", "verify_theorem_1_2", "verify_theorem_3_1",
    "counterexample_laws", "reproduce_counterexample",
    "check_kernel_reparametrization", "random_instance", "HarnessInstance",
    # branching-process comparison
    "OffspringLaw", "offspring_law", "GWResult", "gw_extinction",
    "gw_generation_survival", "TreeComparisonRecord", "compare_tree_mc",
    # errors
    "PercoweaveError", "InvalidParameterError", "InvalidInputError",
    "KernelRangeError", "NormalizationError", "InstanceTooLargeError",
    "HypothesisNotMetError", "ConfigError",
]
