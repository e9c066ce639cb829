"""Meal delivery dispatch: instance model, solver, simulator, benchmarks."""

from .model import (
    DAY_S,
    Courier,
    GeoPoint,
    Instance,
    Order,
    Restaurant,
    VehicleKind,
    haversine_km,
    travel_seconds,
    travel_time_s,
)
from .rng import SplitMix64, stream_for_iteration
from .scheduling import (
    Assignment,
    CourierPlan,
    CourierState,
    FeasibilityReport,
    Route,
    RouteSchedule,
    assignment_feasible,
    bundle_orders,
    initial_courier_state,
    make_route,
    plan_courier_routes,
    schedule_route,
    total_routing_time_s,
)
from .grasp import (
    GraspResult,
    IterationStats,
    SolverConfig,
    SolverInvariantError,
    build_candidates,
    constructive_phase,
    grasp,
    local_search,
    restricted_candidate_list,
)
from .simulator import (
    Event,
    EventLogError,
    SimConfig,
    SimResult,
    SimState,
    initial_state,
    read_event_log,
    simulate_day,
    step,
    validate_event_log,
    write_event_log,
)
from .instances import (
    DanglingStoreError,
    GeneratorParams,
    InstanceFormatError,
    InvertedTimesError,
    MalformedRowError,
    UnknownVehicleError,
    generate_instance,
    instance_paths,
    load_instance_dir,
    parse_instance,
    serialize_instance,
)
from .metrics import (
    CalibrationCell,
    MetricsRow,
    calibrate,
    compensation,
    compute_metrics,
    format_report_table,
    gap_percent,
    load_published_results,
    merge_report,
    published_baseline_rows,
    read_metrics_csv,
    write_calibration_csv,
    write_metrics_csv,
)
from .benchmark import (
    calibration_day,
    calibration_sim_config,
    feasibility_days,
    surge_epoch,
    surge_epoch_config,
)

__version__ = "0.1.0"

__all__ = [
    "DAY_S",
    "Courier",
    "GeoPoint",
    "Instance",
    "Order",
    "Restaurant",
    "VehicleKind",
    "haversine_km",
    "travel_seconds",
    "travel_time_s",
    "SplitMix64",
    "stream_for_iteration",
    "Assignment",
    "CourierPlan",
    "CourierState",
    "FeasibilityReport",
    "Route",
    "RouteSchedule",
    "assignment_feasible",
    "bundle_orders",
    "initial_courier_state",
    "make_route",
    "plan_courier_routes",
    "schedule_route",
    "total_routing_time_s",
    "GraspResult",
    "IterationStats",
    "SolverConfig",
    "SolverInvariantError",
    "build_candidates",
    "constructive_phase",
    "grasp",
    "local_search",
    "restricted_candidate_list",
    "Event",
    "EventLogError",
    "SimConfig",
    "SimResult",
    "SimState",
    "initial_state",
    "read_event_log",
    "simulate_day",
    "step",
    "validate_event_log",
    "write_event_log",
    "DanglingStoreError",
    "GeneratorParams",
    "InstanceFormatError",
    "InvertedTimesError",
    "MalformedRowError",
    "UnknownVehicleError",
    "generate_instance",
    "instance_paths",
    "load_instance_dir",
    "parse_instance",
    "serialize_instance",
    "CalibrationCell",
    "MetricsRow",
    "calibrate",
    "compensation",
    "compute_metrics",
    "format_report_table",
    "gap_percent",
    "load_published_results",
    "merge_report",
    "published_baseline_rows",
    "read_metrics_csv",
    "write_calibration_csv",
    "write_metrics_csv",
    "calibration_day",
    "calibration_sim_config",
    "feasibility_days",
    "surge_epoch",
    "surge_epoch_config",
    "__version__",
]
