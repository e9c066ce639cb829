"""Multi-start randomized dispatch solver with pairwise-swap improvement.

Each iteration builds a solution greedily with a restricted candidate list
(RCL) and then improves it by swapping assigned orders between courier
pairs. The best solution across iterations wins; by default solutions
compare lexicographically (more orders fulfilled first, then less total
routing time).

Two interchangeable engines implement the identical algorithm: a plain
Python one, kept readable and used as the ground truth in tests, and a
compiled one (see _kernel) that the public entry points use by default.
Both consume the same per-iteration random streams and break ties the same
way, so their outputs match bit for bit.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .model import Courier, GeoPoint, Instance, Order, haversine_km, travel_seconds
from .rng import MASK64, SplitMix64, stream_for_iteration
from .scheduling import (
    Assignment,
    CourierPlan,
    CourierState,
    DistFn,
    RouteSchedule,
    assignment_feasible,
    initial_courier_state,
    make_route,
    plan_courier_routes,
    schedule_route,
    state_after,
)

LOCAL_SEARCH_MODES = ("one_pass", "full_descent")
OBJECTIVES = ("lex", "cost_only")
GREEDY_VALUES = ("pickup_leg", "full_leg")
ENGINES = ("auto", "compiled", "reference")

_CHUNK = 32  # iterations per kernel call; fixed so runs chunk identically


class SolverInvariantError(RuntimeError):
    """An internal consistency check failed; the result cannot be trusted."""


@dataclass(frozen=True)
class SolverConfig:
    alpha: float = 0.7
    iterations: int = 1000
    seed: int = 0
    local_search_mode: str = "full_descent"
    time_budget_s: Optional[float] = None
    objective: str = "lex"
    greedy_value: str = "pickup_leg"
    static_candidates: bool = False
    n_jobs: int = 1
    engine: str = "auto"

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha={self.alpha} outside [0, 1]")
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not 0 <= self.seed <= MASK64:
            raise ValueError("seed must fit in 64 bits")
        if self.local_search_mode not in LOCAL_SEARCH_MODES:
            raise ValueError(f"local_search_mode must be one of {LOCAL_SEARCH_MODES}")
        if self.objective not in OBJECTIVES:
            raise ValueError(f"objective must be one of {OBJECTIVES}")
        if self.greedy_value not in GREEDY_VALUES:
            raise ValueError(f"greedy_value must be one of {GREEDY_VALUES}")
        if self.engine not in ENGINES:
            raise ValueError(f"engine must be one of {ENGINES}")
        if self.n_jobs < 1:
            raise ValueError("n_jobs must be >= 1")
        if self.time_budget_s is not None and self.time_budget_s <= 0:
            raise ValueError("time_budget_s must be positive when set")


@dataclass(frozen=True)
class Candidate:
    """A feasible (courier, order) pairing and its greedy value in seconds."""

    time_travel: int
    courier_id: str
    order_id: str


@dataclass(frozen=True)
class IterationStats:
    iteration: int
    constructed_fulfilled: int
    constructed_cost_s: int
    fulfilled: int
    cost_s: int


@dataclass(frozen=True)
class GraspResult:
    assignment: Assignment
    schedules: Dict[str, Tuple[RouteSchedule, ...]]
    fulfilled: int
    cost_s: int
    objective: str
    iterations_run: int
    best_iteration: int
    wall_time_s: float
    iteration_log: Tuple[IterationStats, ...]

    def incumbent_trace(self) -> List[Tuple[int, int]]:
        """Best (fulfilled, cost) after each iteration, in iteration order."""
        trace: List[Tuple[int, int]] = []
        best = None
        for stats in self.iteration_log:
            key = _objective_key(stats.fulfilled, stats.cost_s, self.objective)
            if best is None or key < best[0]:
                best = (key, (stats.fulfilled, stats.cost_s))
            trace.append(best[1])
        return trace


def _objective_key(fulfilled: int, cost_s: int, objective: str) -> Tuple[int, int]:
    if objective == "cost_only":
        return (cost_s, 0)
    return (-fulfilled, cost_s)


# ---------------------------------------------------------------------------
# Candidate construction (reference implementations of the public ops)


def _candidate_value(
    state: CourierState,
    order: Order,
    courier: Courier,
    instance: Instance,
    greedy_value: str,
    dist_fn: Optional[DistFn],
) -> int:
    dist = dist_fn or haversine_km
    restaurant = instance.restaurants_by_id[order.restaurant_id]
    value = travel_seconds(dist(state.location, restaurant.location), courier.speed_kmh)
    if greedy_value == "full_leg":
        value += travel_seconds(dist(restaurant.location, order.user_dropoff), courier.speed_kmh)
    return value


def build_candidates(
    courier_states: Dict[str, CourierState],
    orders: Sequence[Order],
    instance: Instance,
    dispatch_time: int = 0,
    greedy_value: str = "pickup_leg",
    dist_fn: Optional[DistFn] = None,
) -> List[Candidate]:
    """All feasible (courier, order) pairings, cheapest greedy value first.

    A pairing is feasible when a singleton route for the order, dispatched
    now from the courier's current state, meets the order's deadline and
    the courier's shift end. Ties sort by (courier id, order id).
    """
    out: List[Candidate] = []
    for courier_id in sorted(courier_states):
        state = courier_states[courier_id]
        courier = instance.couriers_by_id[courier_id]
        for order in sorted(orders, key=lambda o: o.id):
            route = make_route([order])
            if schedule_route(state, route, dispatch_time, instance, dist_fn) is None:
                continue
            value = _candidate_value(state, order, courier, instance, greedy_value, dist_fn)
            out.append(Candidate(value, courier_id, order.id))
    out.sort(key=lambda c: (c.time_travel, c.courier_id, c.order_id))
    return out


def restricted_candidate_list(candidates: Sequence[Candidate], alpha: float) -> List[Candidate]:
    """The cheapest max(1, ceil(alpha * n)) candidates."""
    if not candidates:
        raise ValueError("cannot build an RCL from an empty candidate list")
    k = max(1, math.ceil(alpha * len(candidates)))
    return list(candidates[:k])


# ---------------------------------------------------------------------------
# Epoch packing: one flat, index-based view of a dispatch snapshot


_TT_TABLE_BYTES_MAX = 128 * 1024 * 1024  # skip precomputed travel tables past this


@dataclass
class _EpochPack:
    instance: Instance
    dispatch_time: int
    couriers: List[Courier]  # sorted by id; rank == position
    orders: List[Order]  # sorted by id; rank == position
    states: List[CourierState]  # aligned with couriers
    arrays: Dict[str, np.ndarray]
    dist_matrix: np.ndarray
    point_index: Dict[Tuple[float, float], int]

    def dist_fn(self) -> DistFn:
        D = self.dist_matrix
        index = self.point_index

        def dist(a: GeoPoint, b: GeoPoint) -> float:
            ia = index.get((a.lat, a.lon))
            ib = index.get((b.lat, b.lon))
            if ia is None or ib is None:
                return haversine_km(a, b)
            return float(D[ia, ib])

        return dist


def _build_pack(
    couriers: Sequence[Courier],
    orders: Sequence[Order],
    instance: Instance,
    dispatch_time: int,
    courier_states: Optional[Dict[str, CourierState]],
) -> _EpochPack:
    from . import _kernel

    couriers = sorted(couriers, key=lambda c: c.id)
    orders = sorted(orders, key=lambda o: o.id)
    if len(couriers) >= 1 << 16 or len(orders) >= 1 << 20:
        raise ValueError("snapshot too large: supports up to 65535 couriers and 1048575 orders")
    states = []
    for c in couriers:
        if courier_states is not None and c.id in courier_states:
            states.append(courier_states[c.id])
        else:
            states.append(initial_courier_state(c))

    rest_ids = sorted({o.restaurant_id for o in orders})
    rest_rank = {rid: i for i, rid in enumerate(rest_ids)}
    C, R, O = len(couriers), len(rest_ids), len(orders)

    lats = np.empty(C + R + O, np.float64)
    lons = np.empty(C + R + O, np.float64)
    for i, st in enumerate(states):
        lats[i], lons[i] = st.location.lat, st.location.lon
    for i, rid in enumerate(rest_ids):
        loc = instance.restaurants_by_id[rid].location
        lats[C + i], lons[C + i] = loc.lat, loc.lon
    for i, o in enumerate(orders):
        lats[C + R + i], lons[C + R + i] = o.user_dropoff.lat, o.user_dropoff.lon

    D = _kernel.build_dist_matrix(lats, lons)
    point_index: Dict[Tuple[float, float], int] = {}
    for i in range(len(lats)):
        point_index.setdefault((float(lats[i]), float(lons[i])), i)

    c_speed = np.array([c.speed_kmh for c in couriers], np.float64)
    speeds = np.array(sorted(set(c_speed.tolist())), np.float64)
    P = len(lats)
    if len(speeds) * P * P * 4 <= _TT_TABLE_BYTES_MAX:
        tt3 = _kernel.build_tt_tables(D, speeds)
        use_tt = 1
    else:
        tt3 = np.zeros((1, 1, 1), np.int32)
        use_tt = 0
    speed_rank = {s: i for i, s in enumerate(speeds.tolist())}

    arrays = {
        "o_rest_pt": np.array([C + rest_rank[o.restaurant_id] for o in orders], np.int32),
        "o_user_pt": np.arange(C + R, C + R + O, dtype=np.int32),
        "o_ready": np.array([o.ready_time for o in orders], np.int64),
        "o_dead": np.array([o.deadline for o in orders], np.int64),
        "o_psrv": np.array([o.pickup_service_s for o in orders], np.int64),
        "o_dsrv": np.array([o.dropoff_service_s for o in orders], np.int64),
        "c_pos_pt": np.arange(C, dtype=np.int32),
        "c_avail": np.array([st.available_from for st in states], np.int64),
        "c_off": np.array([c.off_time for c in couriers], np.int64),
        "c_speed": c_speed,
        "spi": np.array([speed_rank[c.speed_kmh] for c in couriers], np.int32),
        "tt3": tt3,
        "use_tt": use_tt,
    }
    return _EpochPack(
        instance, dispatch_time, list(couriers), list(orders), states, arrays, D, point_index
    )


def _kernel_args(pack: _EpochPack) -> tuple:
    a = pack.arrays
    return (
        a["o_rest_pt"],
        a["o_user_pt"],
        a["o_ready"],
        a["o_dead"],
        a["o_psrv"],
        a["o_dsrv"],
        a["c_pos_pt"],
        a["c_avail"],
        a["c_off"],
        a["c_speed"],
        a["spi"],
        a["tt3"],
        a["use_tt"],
        pack.dist_matrix,
        pack.dispatch_time,
    )


# ---------------------------------------------------------------------------
# Reference engine


def _reference_construct(
    pack: _EpochPack, config: SolverConfig, rng: SplitMix64
) -> Dict[str, List[Order]]:
    """One greedy randomized construction pass over the snapshot."""
    instance = pack.instance
    dist = pack.dist_fn()
    dispatch = pack.dispatch_time
    states = {st.courier_id: st for st in pack.states}
    frozen = dict(states)  # static mode evaluates everything from here
    sequences: Dict[str, List[Order]] = {c.id: [] for c in pack.couriers}
    alive: Dict[str, Order] = {o.id: o for o in pack.orders}

    while alive:
        eval_states = frozen if config.static_candidates else states
        candidates = build_candidates(
            eval_states, list(alive.values()), instance, dispatch, config.greedy_value, dist
        )
        if not candidates:
            break
        rcl = restricted_candidate_list(candidates, config.alpha)
        chosen = rcl[rng.randrange(len(rcl))]
        order = alive.pop(chosen.order_id)
        sequences[chosen.courier_id].append(order)
        if not config.static_candidates:
            state = states[chosen.courier_id]
            sched = schedule_route(state, make_route([order]), dispatch, instance, dist)
            if sched is None:  # candidate feasibility guaranteed it
                raise SolverInvariantError("committed candidate became infeasible")
            states[chosen.courier_id] = state_after(state, make_route([order]), sched, instance)
    return sequences


def _repair_sequence(
    state: CourierState,
    sequence: List[Order],
    dispatch: int,
    instance: Instance,
    dist: DistFn,
) -> List[Order]:
    """Keep the feasible prefix-chain of singleton routes, dropping the rest.

    Only needed after static-candidate construction, where commitments were
    valued against stale courier states.
    """
    kept: List[Order] = []
    cur = state
    for order in sequence:
        route = make_route([order])
        sched = schedule_route(cur, route, dispatch, instance, dist)
        if sched is None:
            continue
        kept.append(order)
        cur = state_after(cur, route, sched, instance)
    return kept


def _plan_all(
    pack: _EpochPack, sequences: Dict[str, List[Order]], dist: DistFn
) -> Dict[str, CourierPlan]:
    plans = {}
    for st in pack.states:
        plans[st.courier_id] = plan_courier_routes(
            st, sequences[st.courier_id], pack.dispatch_time, pack.instance, dist
        )
    return plans


def _reference_local_search(
    pack: _EpochPack,
    sequences: Dict[str, List[Order]],
    config: SolverConfig,
    dist: DistFn,
) -> Dict[str, List[Order]]:
    """Pairwise swap descent. Swapping keeps the fulfilled set unchanged, so
    probes compare routing cost alone; infeasible probes are discarded."""
    instance = pack.instance
    dispatch = pack.dispatch_time
    states = {st.courier_id: st for st in pack.states}
    ids = [c.id for c in pack.couriers]
    plans = _plan_all(pack, sequences, dist)
    costs = {cid: plans[cid].cost_s for cid in ids}

    while True:
        best_delta = 0
        best = None
        for a in range(len(ids)):
            c1 = ids[a]
            seq1 = sequences[c1]
            if not seq1:
                continue
            for b in range(a + 1, len(ids)):
                c2 = ids[b]
                seq2 = sequences[c2]
                for i1 in range(len(seq1)):
                    for i2 in range(len(seq2)):
                        new1 = list(seq1)
                        new2 = list(seq2)
                        new1[i1], new2[i2] = seq2[i2], seq1[i1]
                        p1 = plan_courier_routes(states[c1], new1, dispatch, instance, dist)
                        if not p1.feasible:
                            continue
                        p2 = plan_courier_routes(states[c2], new2, dispatch, instance, dist)
                        if not p2.feasible:
                            continue
                        delta = p1.cost_s + p2.cost_s - costs[c1] - costs[c2]
                        if delta < best_delta:
                            best_delta = delta
                            best = (c1, c2, i1, i2)
        if best is None:
            break
        c1, c2, i1, i2 = best
        sequences[c1][i1], sequences[c2][i2] = sequences[c2][i2], sequences[c1][i1]
        for cid in (c1, c2):
            plans[cid] = plan_courier_routes(
                states[cid], sequences[cid], dispatch, instance, dist
            )
            if not plans[cid].feasible:
                raise SolverInvariantError("applied swap produced an infeasible plan")
            costs[cid] = plans[cid].cost_s
        if config.local_search_mode == "one_pass":
            break
    return sequences


def _reference_iteration(
    pack: _EpochPack, config: SolverConfig, iteration: int
) -> Tuple[Dict[str, List[Order]], IterationStats]:
    dist = pack.dist_fn()
    rng = stream_for_iteration(config.seed, iteration)
    sequences = _reference_construct(pack, config, rng)
    if config.static_candidates:
        states = {st.courier_id: st for st in pack.states}
        sequences = {
            cid: _repair_sequence(states[cid], seq, pack.dispatch_time, pack.instance, dist)
            for cid, seq in sequences.items()
        }
    plans = _plan_all(pack, sequences, dist)
    for cid, plan in plans.items():
        if not plan.feasible:
            raise SolverInvariantError(f"constructed plan for courier {cid} is infeasible")
    constructed_fulfilled = sum(len(s) for s in sequences.values())
    constructed_cost = sum(p.cost_s for p in plans.values())
    sequences = _reference_local_search(pack, sequences, config, dist)
    improved = _plan_all(pack, sequences, dist)
    cost = sum(p.cost_s for p in improved.values())
    stats = IterationStats(
        iteration, constructed_fulfilled, constructed_cost, constructed_fulfilled, cost
    )
    return sequences, stats


# ---------------------------------------------------------------------------
# Compiled engine


def _compiled_iterations(
    pack: _EpochPack, config: SolverConfig, start: int, stop: int
) -> np.ndarray:
    from . import _kernel

    return _kernel.run_iterations(
        *_kernel_args(pack),
        np.float64(config.alpha),
        np.uint64(config.seed),
        start,
        stop,
        1 if config.local_search_mode == "full_descent" else 0,
        1 if config.static_candidates else 0,
        1 if config.greedy_value == "full_leg" else 0,
    )


def _compiled_extract(
    pack: _EpochPack, config: SolverConfig, iteration: int
) -> Dict[str, List[Order]]:
    from . import _kernel

    seqs, lens = _kernel.extract_solution(
        *_kernel_args(pack),
        np.float64(config.alpha),
        np.uint64(config.seed),
        iteration,
        1 if config.local_search_mode == "full_descent" else 0,
        1 if config.static_candidates else 0,
        1 if config.greedy_value == "full_leg" else 0,
    )
    sequences: Dict[str, List[Order]] = {}
    for ci, courier in enumerate(pack.couriers):
        sequences[courier.id] = [pack.orders[seqs[ci, k]] for k in range(lens[ci])]
    return sequences


# ---------------------------------------------------------------------------
# Public entry points


def _empty_result(
    pack_orders: Sequence[Order], config: SolverConfig, wall_start: float
) -> GraspResult:
    assignment = Assignment({}, frozenset(o.id for o in pack_orders))
    return GraspResult(
        assignment=assignment,
        schedules={},
        fulfilled=0,
        cost_s=0,
        objective=config.objective,
        iterations_run=0,
        best_iteration=0,
        wall_time_s=time.perf_counter() - wall_start,
        iteration_log=(),
    )


def _finalize(
    pack: _EpochPack,
    config: SolverConfig,
    sequences: Dict[str, List[Order]],
    stats: Sequence[IterationStats],
    best_iteration: int,
    wall_start: float,
) -> GraspResult:
    dist = pack.dist_fn()
    plans = _plan_all(pack, sequences, dist)
    routes = {
        cid: plans[cid].routes for cid in sorted(plans) if plans[cid].routes
    }
    assigned = {oid for rs in routes.values() for r in rs for oid in r.orders}
    unassigned = frozenset(o.id for o in pack.orders if o.id not in assigned)
    assignment = Assignment(routes, unassigned)

    # The solution is re-validated from scratch rather than trusted.
    assignment.check_partition([o.id for o in pack.orders])
    states = {st.courier_id: st for st in pack.states}
    report = assignment_feasible(assignment, pack.instance, pack.dispatch_time, states, dist)
    if not report.feasible:
        raise SolverInvariantError(f"solver returned an infeasible assignment: {report.violation}")
    cost = sum(s.routing_time_s for scheds in report.schedules.values() for s in scheds)
    fulfilled = len(assigned)
    expect = next(s for s in stats if s.iteration == best_iteration)
    if (fulfilled, cost) != (expect.fulfilled, expect.cost_s):
        raise SolverInvariantError(
            f"incumbent bookkeeping mismatch: reported ({expect.fulfilled}, {expect.cost_s}), "
            f"re-validated ({fulfilled}, {cost})"
        )
    return GraspResult(
        assignment=assignment,
        schedules=report.schedules,
        fulfilled=fulfilled,
        cost_s=cost,
        objective=config.objective,
        iterations_run=len(stats),
        best_iteration=best_iteration,
        wall_time_s=time.perf_counter() - wall_start,
        iteration_log=tuple(stats),
    )


def _resolve_engine(config: SolverConfig) -> str:
    return "compiled" if config.engine in ("auto", "compiled") else "reference"


def grasp(
    couriers: Sequence[Courier],
    orders: Sequence[Order],
    instance: Instance,
    config: SolverConfig,
    dispatch_time: int = 0,
    courier_states: Optional[Dict[str, CourierState]] = None,
) -> GraspResult:
    """Solve one dispatch snapshot: pending orders against available couriers.

    Runs config.iterations independent construction+improvement rounds and
    returns the best solution found. Identical inputs give identical
    results, for any n_jobs, unless a time budget cuts the run short.
    """
    wall_start = time.perf_counter()
    if not orders or not couriers:
        return _empty_result(orders, config, wall_start)
    pack = _build_pack(couriers, orders, instance, dispatch_time, courier_states)

    stats: List[IterationStats] = []
    if _resolve_engine(config) == "reference":
        solutions: Dict[int, Dict[str, List[Order]]] = {}
        for it in range(config.iterations):
            if _over_budget(config, wall_start) and stats:
                break
            sequences, st = _reference_iteration(pack, config, it)
            solutions[it] = sequences
            stats.append(st)
        best_it = _best_iteration(stats, config.objective)
        best_sequences = solutions[best_it]
    else:
        for block in _run_chunks(pack, config, wall_start):
            stats.extend(block)
        best_it = _best_iteration(stats, config.objective)
        best_sequences = _compiled_extract(pack, config, best_it)
        check = next(s for s in stats if s.iteration == best_it)
        redo = _stats_for_sequences(pack, best_sequences, check)
        if redo != (check.fulfilled, check.cost_s):
            raise SolverInvariantError(
                f"solution extraction mismatch at iteration {best_it}: "
                f"objective pass gave {(check.fulfilled, check.cost_s)}, extraction {redo}"
            )
    return _finalize(pack, config, best_sequences, stats, best_it, wall_start)


def _stats_for_sequences(
    pack: _EpochPack, sequences: Dict[str, List[Order]], check: IterationStats
) -> Tuple[int, int]:
    dist = pack.dist_fn()
    plans = _plan_all(pack, sequences, dist)
    return (
        sum(len(s) for s in sequences.values()),
        sum(p.cost_s for p in plans.values()),
    )


def _over_budget(config: SolverConfig, wall_start: float) -> bool:
    return (
        config.time_budget_s is not None
        and time.perf_counter() - wall_start >= config.time_budget_s
    )


def _best_iteration(stats: Sequence[IterationStats], objective: str) -> int:
    best_key = None
    best_it = 0
    for s in stats:
        key = _objective_key(s.fulfilled, s.cost_s, objective)
        if best_key is None or key < best_key:
            best_key = key
            best_it = s.iteration
    return best_it


def _run_chunks(pack: _EpochPack, config: SolverConfig, wall_start: float):
    """Yield per-chunk IterationStats blocks, honoring budget and n_jobs.

    Chunks are a fixed size so a run splits the same way at any n_jobs;
    they are consumed in submission order, which keeps the reduce
    deterministic. The budget is checked at chunk boundaries only.
    """
    bounds = [
        (lo, min(lo + _CHUNK, config.iterations)) for lo in range(0, config.iterations, _CHUNK)
    ]

    def run(b):
        arr = _compiled_iterations(pack, config, b[0], b[1])
        return [
            IterationStats(b[0] + i, int(r[0]), int(r[1]), int(r[2]), int(r[3]))
            for i, r in enumerate(arr)
        ]

    if config.n_jobs == 1:
        for i, b in enumerate(bounds):
            yield run(b)
            if _over_budget(config, wall_start) and i + 1 < len(bounds):
                return
        return

    with ThreadPoolExecutor(max_workers=config.n_jobs) as pool:
        pending = []
        idx = 0
        stop = False
        while idx < len(bounds) and len(pending) < config.n_jobs:
            pending.append(pool.submit(run, bounds[idx]))
            idx += 1
        while pending:
            fut = pending.pop(0)
            yield fut.result()
            if not stop and _over_budget(config, wall_start):
                stop = True
            if not stop and idx < len(bounds):
                pending.append(pool.submit(run, bounds[idx]))
                idx += 1


def constructive_phase(
    courier_states: Dict[str, CourierState],
    orders: Sequence[Order],
    instance: Instance,
    config: SolverConfig,
    dispatch_time: int = 0,
    rng: Optional[SplitMix64] = None,
) -> Assignment:
    """One greedy randomized construction, bundled into an Assignment.

    Exposed mainly for study and tests; grasp() runs this internally once
    per iteration with a per-iteration random stream.
    """
    couriers = [instance.couriers_by_id[cid] for cid in sorted(courier_states)]
    pack = _build_pack(couriers, orders, instance, dispatch_time, courier_states)
    dist = pack.dist_fn()
    if rng is None:
        rng = stream_for_iteration(config.seed, 0)
    sequences = _reference_construct(pack, config, rng)
    if config.static_candidates:
        states = {st.courier_id: st for st in pack.states}
        sequences = {
            cid: _repair_sequence(states[cid], seq, dispatch_time, instance, dist)
            for cid, seq in sequences.items()
        }
    plans = _plan_all(pack, sequences, dist)
    routes = {cid: plans[cid].routes for cid in sorted(plans) if plans[cid].routes}
    assigned = {oid for rs in routes.values() for r in rs for oid in r.orders}
    return Assignment(routes, frozenset(o.id for o in orders if o.id not in assigned))


def local_search(
    assignment: Assignment,
    instance: Instance,
    config: SolverConfig,
    dispatch_time: int = 0,
    courier_states: Optional[Dict[str, CourierState]] = None,
) -> Assignment:
    """Improve an assignment by swapping orders between courier pairs.

    In one_pass mode applies the single best improving swap; in
    full_descent mode repeats until no swap improves. The input must be
    feasible; the result never costs more than the input.
    """
    order_ids = set(assignment.assigned_order_ids()) | set(assignment.unassigned)
    orders = [instance.orders_by_id[oid] for oid in sorted(order_ids)]
    courier_ids = sorted(assignment.routes)
    couriers = [instance.couriers_by_id[cid] for cid in courier_ids]
    if not couriers or not orders:
        return assignment
    pack = _build_pack(couriers, orders, instance, dispatch_time, courier_states)
    dist = pack.dist_fn()
    sequences = {cid: [] for cid in courier_ids}
    for cid in courier_ids:
        for route in assignment.routes[cid]:
            sequences[cid].extend(instance.orders_by_id[oid] for oid in route.orders)

    plans = _plan_all(pack, sequences, dist)
    bad = [cid for cid, p in plans.items() if not p.feasible]
    if bad:
        raise ValueError(f"local_search requires a feasible assignment; broken for {bad}")

    if _resolve_engine(config) == "compiled":
        sequences = _compiled_local_search(pack, config, sequences)
    else:
        sequences = _reference_local_search(pack, sequences, config, dist)
    plans = _plan_all(pack, sequences, dist)
    routes = {cid: plans[cid].routes for cid in sorted(plans) if plans[cid].routes}
    out = Assignment(routes, assignment.unassigned)
    out.check_partition(order_ids)
    return out


def _compiled_local_search(
    pack: _EpochPack, config: SolverConfig, sequences: Dict[str, List[Order]]
) -> Dict[str, List[Order]]:
    from . import _kernel

    order_rank = {o.id: i for i, o in enumerate(pack.orders)}
    C = len(pack.couriers)
    O = len(pack.orders)
    seqs = np.zeros((C, max(O, 1)), np.int32)
    lens = np.zeros(C, np.int32)
    for ci, courier in enumerate(pack.couriers):
        seq = sequences[courier.id]
        lens[ci] = len(seq)
        for k, o in enumerate(seq):
            seqs[ci, k] = order_rank[o.id]
    _kernel.local_search_inplace(
        *_kernel_args(pack),
        seqs,
        lens,
        1 if config.local_search_mode == "full_descent" else 0,
    )
    return {
        courier.id: [pack.orders[seqs[ci, k]] for k in range(lens[ci])]
        for ci, courier in enumerate(pack.couriers)
    }
