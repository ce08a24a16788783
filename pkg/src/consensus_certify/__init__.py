"""Simulation and certification toolkit for multi-agent consensus and
flocking under intermittent communication."""

from .signals import Signal, Schedule, as_fraction, integrate, window_average, \
    rescale_time, scale_values
from .graphs import (
    DirectedGraph,
    ReachabilityReport,
    connectivity_graph,
    globally_reachable,
    is_globally_reachable,
    persistent_graph,
    check_PE,
    check_ISC,
    gamma_reduce,
)
from .dynamics import (
    RadialKernel,
    LambdaWeight,
    SystemSpec,
    Trajectory,
    diameter,
    integrate_linear,
    integrate_nonlinear,
    integrate_second_order,
    linearize,
    project_trajectory,
    left_barrier,
    extremal_index_sets,
)
from .certificates import (
    RateCertificate,
    FlockingVerdict,
    MBounds,
    eta,
    rate_linear,
    rate_nonlinear,
    rate_PE,
    rate_ISC,
    rate_second_order,
    bounds_m,
    phi_envelope,
    classify_flocking,
    isc_block_periods,
)
from .experiments import (
    Table1Row,
    RandomScheduleParams,
    example1_schedule,
    example1_recursion,
    example2_schedule,
    run_example2,
    random_schedule,
    table1,
    verify_certificate,
)

__version__ = "0.1.0"

__all__ = [
    "Signal", "Schedule", "as_fraction", "integrate", "window_average",
    "rescale_time", "scale_values",
    "DirectedGraph", "ReachabilityReport", "connectivity_graph",
    "globally_reachable", "is_globally_reachable", "persistent_graph",
    "check_PE", "check_ISC", "gamma_reduce",
    "RadialKernel", "LambdaWeight", "SystemSpec", "Trajectory", "diameter",
    "integrate_linear", "integrate_nonlinear", "integrate_second_order",
    "linearize", "project_trajectory", "left_barrier", "extremal_index_sets",
    "RateCertificate", "FlockingVerdict", "MBounds", "eta", "rate_linear",
    "rate_nonlinear", "rate_PE", "rate_ISC", "rate_second_order", "bounds_m",
    "phi_envelope", "classify_flocking", "isc_block_periods",
    "Table1Row", "RandomScheduleParams", "example1_schedule",
    "example1_recursion", "example2_schedule", "run_example2",
    "random_schedule", "table1", "verify_certificate",
    "__version__",
]
