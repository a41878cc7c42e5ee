"""Entanglement-gradient routing for quantum repeater networks."""

from .baseline import CompareReport, baseline_shortest_path, compare_routes, link_overlap
from .errors import (
    ConfigError,
    DegenerateDistributionError,
    DivergenceError,
    DomainError,
    EgretError,
    SingularityError,
)
from .fidelity import correlation_measurement, entanglement_fidelity, leakage_bound, success_probabilities
from .gradient import (
    Direction,
    GradientTable,
    SelectionParams,
    UtilityKernel,
    correlation,
    kernel_estimate,
    link_selection_probability,
    normalized_selection_distribution,
    source_selection_probability,
    update_gradients,
    update_utility,
)
from .network import (
    EntangledLink,
    EntangledPath,
    GenerationSpec,
    QuantumNetwork,
    QuantumNode,
    generate_network,
    load_network,
    save_network,
    throughput_deviation,
)
from .paths import (
    ArrivalRates,
    PathGradientState,
    decay_rate_from_threshold,
    mean_path_gradient,
    optimal_decay_estimator,
    select_optimal_path,
    threshold_at_optimal_decay,
    update_endpoint_gradient,
)
from .rates import cutoff_rate, peak, response
from .router import RouteResult, RoutingParams, run_routing, thread_step_distribution

__version__ = "0.1.0"
