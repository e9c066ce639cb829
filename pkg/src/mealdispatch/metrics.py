"""Run metrics, GAP arithmetic, calibration sweeps, and report files.

The headline numbers for a day run are couriers used (CU), orders
fulfilled (O.F.), and total routing time in minutes. GAP compares the
fulfilled counts of two runs. Calibration sweeps (alpha, iterations)
grids and records mean fulfillment per cell. Report files are plain CSV
with a fixed column order so identical runs produce identical bytes.
"""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass, replace
from importlib import resources
from typing import TYPE_CHECKING, Dict, Iterable, List, Optional, Sequence, Tuple

from .grasp import SolverConfig
from .scheduling import Route

if TYPE_CHECKING:  # pragma: no cover
    from .model import Instance
    from .simulator import SimConfig, SimResult

DEFAULT_ALPHAS: Tuple[float, ...] = tuple(round(0.1 * k, 1) for k in range(11))
DEFAULT_ITERATION_COUNTS: Tuple[int, ...] = (500, 1000, 1500, 2000)

METRICS_COLUMNS = ["instance", "orders", "available_couriers", "cu", "of", "routing_time_min"]
CALIBRATION_COLUMNS = ["alpha", "iterations", "replication", "of", "runtime_s"]


@dataclass(frozen=True)
class MetricsRow:
    """One run's summary line: counts, fulfillment, and routing minutes."""

    instance_label: str
    orders: int
    available_couriers: int
    couriers_used: int
    orders_fulfilled: int
    routing_time_min: float
    total_compensation: Optional[float] = None

    def __post_init__(self) -> None:
        if self.couriers_used > self.available_couriers:
            raise ValueError(
                f"couriers_used {self.couriers_used} exceeds available {self.available_couriers}"
            )
        if self.orders_fulfilled > self.orders:
            raise ValueError(
                f"orders_fulfilled {self.orders_fulfilled} exceeds order count {self.orders}"
            )
        if self.routing_time_min < 0:
            raise ValueError("routing_time_min must be >= 0")


@dataclass(frozen=True)
class CalibrationCell:
    """Mean fulfillment and runtime for one (alpha, iterations) grid cell."""

    alpha: float
    iterations: int
    mean_of: float
    mean_runtime_s: float
    replications: int

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise ValueError("replications must be >= 1")


def compute_metrics(result: "SimResult", instance: "Instance") -> MetricsRow:
    """Summarize a finished day run.

    CU counts distinct couriers with at least one completed route, not
    routes. Routing time is the sum of completed routes' routing_time_s,
    in minutes.
    """
    couriers_used = len({c for c, _, _, _ in result.state.completed_routes})
    routing_s = sum(s.routing_time_s for _, _, _, s in result.state.completed_routes)
    return MetricsRow(
        instance_label=result.label,
        orders=len(instance.orders),
        available_couriers=len(instance.couriers),
        couriers_used=couriers_used,
        orders_fulfilled=len(result.state.completed),
        routing_time_min=routing_s / 60.0,
    )


def gap_percent(of_baseline: int, of_candidate: int) -> float:
    """Signed fulfillment gap, percent: 100 x (baseline - candidate) / candidate.

    Reported to 2 decimals, truncated toward zero; computed in integer
    arithmetic so table-scale counts never hit float rounding.
    """
    if of_candidate == 0:
        raise ValueError("of_candidate must be positive to compute a gap")
    n = 10000 * (of_baseline - of_candidate)
    q = abs(n) // of_candidate
    if n < 0:
        q = -q
    return q / 100.0


def compensation(
    completed_routes: Iterable[Route],
    base_per_order: float = 1.0,
    variable_per_order: float = 0.0,
) -> float:
    """Total courier pay: a base plus a variable amount per delivered order."""
    if base_per_order < 0 or variable_per_order < 0:
        raise ValueError("pay parameters must be non-negative")
    n = sum(len(r.orders) for r in completed_routes)
    return n * (base_per_order + variable_per_order)


def calibrate(
    instance: "Instance",
    alphas: Sequence[float] = DEFAULT_ALPHAS,
    iteration_counts: Sequence[int] = DEFAULT_ITERATION_COUNTS,
    replications: int = 1,
    seed: int = 0,
    sim_config: Optional["SimConfig"] = None,
) -> Tuple[List[CalibrationCell], List[Dict[str, object]]]:
    """Sweep the (alpha, iterations) grid with full-day runs.

    Each cell runs `replications` day simulations with solver seeds
    seed, seed+1, ... and averages fulfilled orders. Returns the cells in
    grid order plus one raw row per replication (for the calibration CSV).
    Runtime in the raw rows is wall-clock and varies run to run; every
    other field is deterministic.
    """
    from .simulator import SimConfig, simulate_day

    if not alphas or not iteration_counts:
        raise ValueError("calibration grids must be non-empty")
    if replications < 1:
        raise ValueError("replications must be >= 1")
    base = sim_config if sim_config is not None else SimConfig()
    cells: List[CalibrationCell] = []
    rows: List[Dict[str, object]] = []
    for alpha in alphas:
        for iterations in iteration_counts:
            of_sum = 0
            rt_sum = 0.0
            for rep in range(replications):
                solver = replace(base.solver, alpha=alpha, iterations=iterations, seed=seed + rep)
                cfg = replace(base, solver=solver)
                t0 = time.perf_counter()
                result = simulate_day(instance, cfg)
                runtime = time.perf_counter() - t0
                of = result.metrics.orders_fulfilled
                of_sum += of
                rt_sum += runtime
                rows.append(
                    {
                        "alpha": alpha,
                        "iterations": iterations,
                        "replication": rep,
                        "of": of,
                        "runtime_s": round(runtime, 3),
                    }
                )
            cells.append(
                CalibrationCell(
                    alpha=alpha,
                    iterations=iterations,
                    mean_of=of_sum / replications,
                    mean_runtime_s=rt_sum / replications,
                    replications=replications,
                )
            )
    return cells, rows


def write_calibration_csv(rows: Sequence[Dict[str, object]], path: str) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=CALIBRATION_COLUMNS)
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


def metrics_csv_rows(
    rows: Sequence[MetricsRow], gaps: Optional[Sequence[float]] = None
) -> List[Dict[str, object]]:
    """CSV-ready dicts; the gap column appears only when gaps are given."""
    if gaps is not None and len(gaps) != len(rows):
        raise ValueError("gaps must align one-to-one with rows")
    out: List[Dict[str, object]] = []
    for i, row in enumerate(rows):
        rec: Dict[str, object] = {
            "instance": row.instance_label,
            "orders": row.orders,
            "available_couriers": row.available_couriers,
            "cu": row.couriers_used,
            "of": row.orders_fulfilled,
            "routing_time_min": row.routing_time_min,
        }
        if gaps is not None:
            rec["gap_percent"] = f"{gaps[i]:.2f}"
        out.append(rec)
    return out


def write_metrics_csv(
    rows: Sequence[MetricsRow], path: str, gaps: Optional[Sequence[float]] = None
) -> None:
    columns = METRICS_COLUMNS + (["gap_percent"] if gaps is not None else [])
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns)
        writer.writeheader()
        for rec in metrics_csv_rows(rows, gaps):
            writer.writerow(rec)


def read_metrics_csv(path: str) -> List[MetricsRow]:
    rows: List[MetricsRow] = []
    with open(path, newline="", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                MetricsRow(
                    instance_label=rec["instance"],
                    orders=int(rec["orders"]),
                    available_couriers=int(rec["available_couriers"]),
                    couriers_used=int(rec["cu"]),
                    orders_fulfilled=int(rec["of"]),
                    routing_time_min=float(rec["routing_time_min"]),
                )
            )
    return rows


def merge_report(
    baseline: Sequence[MetricsRow], candidate: Sequence[MetricsRow]
) -> Tuple[List[MetricsRow], List[float]]:
    """Pair candidate rows with baseline rows by label and compute gaps.

    Output order follows the candidate sequence. A candidate label absent
    from the baseline is an input error.
    """
    by_label = {row.instance_label: row for row in baseline}
    gaps: List[float] = []
    for row in candidate:
        if row.instance_label not in by_label:
            raise ValueError(f"baseline has no row for instance {row.instance_label!r}")
        gaps.append(gap_percent(by_label[row.instance_label].orders_fulfilled, row.orders_fulfilled))
    return list(candidate), gaps


def format_report_table(rows: Sequence[MetricsRow], gaps: Optional[Sequence[float]] = None) -> str:
    """Fixed-width text table; byte-stable for fixed inputs."""
    header = ["instance", "orders", "couriers", "CU", "O.F.", "routing(min)"]
    if gaps is not None:
        header.append("GAP%")
    body: List[List[str]] = []
    for i, row in enumerate(rows):
        line = [
            row.instance_label,
            str(row.orders),
            str(row.available_couriers),
            str(row.couriers_used),
            str(row.orders_fulfilled),
            f"{row.routing_time_min:.2f}",
        ]
        if gaps is not None:
            line.append(f"{gaps[i]:.2f}")
        body.append(line)
    widths = [max(len(header[c]), *(len(r[c]) for r in body)) if body else len(header[c]) for c in range(len(header))]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    for r in body:
        lines.append("  ".join(v.rjust(w) for v, w in zip(r, widths)))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class PublishedRow:
    """One line of the bundled baseline-vs-solver results table."""

    instance: str
    orders: int
    available_couriers: int
    cu_base: int
    of_base: int
    rt_base: int
    cu_grasp: int
    of_grasp: int
    rt_grasp: int
    gap: float


def load_published_results() -> List[PublishedRow]:
    """The 22-instance results table shipped with the package."""
    rows: List[PublishedRow] = []
    src = resources.files("mealdispatch.data").joinpath("published_results.csv")
    with src.open("r", encoding="utf-8") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                PublishedRow(
                    instance=rec["instance"],
                    orders=int(rec["orders"]),
                    available_couriers=int(rec["available_couriers"]),
                    cu_base=int(rec["cu_base"]),
                    of_base=int(rec["of_base"]),
                    rt_base=int(rec["rt_base"]),
                    cu_grasp=int(rec["cu_grasp"]),
                    of_grasp=int(rec["of_grasp"]),
                    rt_grasp=int(rec["rt_grasp"]),
                    gap=float(rec["gap"]),
                )
            )
    return rows


def published_baseline_rows() -> List[MetricsRow]:
    """The published table's baseline columns as MetricsRow records."""
    return [
        MetricsRow(
            instance_label=r.instance,
            orders=r.orders,
            available_couriers=r.available_couriers,
            couriers_used=r.cu_base,
            orders_fulfilled=r.of_base,
            routing_time_min=float(r.rt_base),
        )
        for r in load_published_results()
    ]
