"""Route construction, schedule recurrence, and feasibility checks.

A courier executes routes strictly in sequence. Each route is one visit to
a single restaurant followed by one to three drop-offs. The schedule for a
route unrolls as:

    depart        = max(dispatch_time, available_from)
    arrive_rest   = depart + travel(current location -> restaurant)
    pickup_begin  = max(arrive_rest, latest ready_time in the bundle)
    pickup_end    = pickup_begin + pickup service
    then per drop-off: arrive = prev + travel, complete = arrive + service

A route is infeasible when any drop-off completes after its order's
deadline, or the last one completes after the courier's shift end.
Infeasibility is an expected outcome (the caller excludes the pair), not
an error. Between routes the courier idles at its last drop-off.

All functions take an optional ``dist_fn`` so callers can swap the
haversine for a precomputed matrix; results are identical when the matrix
was produced by the same formula.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .model import (
    Courier,
    GeoPoint,
    Instance,
    Order,
    haversine_km,
    travel_seconds,
)

DistFn = Callable[[GeoPoint, GeoPoint], float]

MAX_BUNDLE = 3


@dataclass(frozen=True)
class CourierState:
    """Where a courier is and when it can next depart."""

    courier_id: str
    location: GeoPoint
    available_from: int


def initial_courier_state(courier: Courier) -> CourierState:
    return CourierState(courier.id, courier.start_location, courier.on_time)


@dataclass(frozen=True)
class Route:
    """A bundle of 1..3 orders picked up together at one restaurant."""

    restaurant_id: str
    orders: Tuple[str, ...]
    dropoff_sequence: Tuple[str, ...]

    def __post_init__(self) -> None:
        if not 1 <= len(self.orders) <= MAX_BUNDLE:
            raise ValueError(f"route carries {len(self.orders)} orders, must be 1..{MAX_BUNDLE}")
        if sorted(self.dropoff_sequence) != sorted(self.orders) or len(
            set(self.orders)
        ) != len(self.orders):
            raise ValueError("dropoff_sequence must be a permutation of the route's orders")


def make_route(orders: Sequence[Order]) -> Route:
    """Build a route from order objects; drop-offs run earliest deadline first."""
    rest_ids = {o.restaurant_id for o in orders}
    if len(rest_ids) != 1:
        raise ValueError(f"a route must serve a single restaurant, got {sorted(rest_ids)}")
    seq = tuple(o.id for o in sorted(orders, key=lambda o: (o.deadline, o.id)))
    return Route(next(iter(rest_ids)), tuple(o.id for o in orders), seq)


@dataclass(frozen=True)
class DropStop:
    order_id: str
    arrive: int
    deliver_complete: int


@dataclass(frozen=True)
class RouteSchedule:
    """Concrete event times for one route."""

    depart: int
    arrive_restaurant: int
    pickup_begin: int
    pickup_end: int
    dropoffs: Tuple[DropStop, ...]

    @property
    def wait_s(self) -> int:
        # Time spent at the restaurant before the food is ready.
        return self.pickup_begin - self.arrive_restaurant

    @property
    def completion(self) -> int:
        return self.dropoffs[-1].deliver_complete

    @property
    def routing_time_s(self) -> int:
        return self.completion - self.depart


def route_timeline(
    state: CourierState,
    route: Route,
    dispatch_time: int,
    instance: Instance,
    dist_fn: Optional[DistFn] = None,
) -> RouteSchedule:
    """Unroll the schedule recurrence without judging feasibility."""
    dist = dist_fn or haversine_km
    courier = instance.couriers_by_id[state.courier_id]
    speed = courier.speed_kmh
    restaurant = instance.restaurants_by_id[route.restaurant_id]
    orders = [instance.orders_by_id[oid] for oid in route.dropoff_sequence]

    depart = max(dispatch_time, state.available_from)
    arrive_rest = depart + travel_seconds(dist(state.location, restaurant.location), speed)
    pickup_begin = max(arrive_rest, max(o.ready_time for o in orders))
    # One pickup event per route; if bundled orders disagree on handover
    # time, the slowest one governs.
    pickup_end = pickup_begin + max(o.pickup_service_s for o in orders)

    stops: List[DropStop] = []
    t = pickup_end
    loc = restaurant.location
    for o in orders:
        arrive = t + travel_seconds(dist(loc, o.user_dropoff), speed)
        complete = arrive + o.dropoff_service_s
        stops.append(DropStop(o.id, arrive, complete))
        t = complete
        loc = o.user_dropoff
    return RouteSchedule(depart, arrive_rest, pickup_begin, pickup_end, tuple(stops))


def first_violation(
    schedule: RouteSchedule, route: Route, courier: Courier, instance: Instance
) -> Optional[Tuple[str, str]]:
    """Return (order_id, reason) for the first broken constraint, if any."""
    for stop in schedule.dropoffs:
        if stop.deliver_complete > instance.orders_by_id[stop.order_id].deadline:
            return stop.order_id, "deadline"
    if schedule.completion > courier.off_time:
        return schedule.dropoffs[-1].order_id, "shift"
    return None


def schedule_route(
    state: CourierState,
    route: Route,
    dispatch_time: int,
    instance: Instance,
    dist_fn: Optional[DistFn] = None,
) -> Optional[RouteSchedule]:
    """Schedule a route; None means the route cannot meet its constraints."""
    schedule = route_timeline(state, route, dispatch_time, instance, dist_fn)
    courier = instance.couriers_by_id[state.courier_id]
    if first_violation(schedule, route, courier, instance) is not None:
        return None
    return schedule


def state_after(
    state: CourierState, route: Route, schedule: RouteSchedule, instance: Instance
) -> CourierState:
    last_order = instance.orders_by_id[route.dropoff_sequence[-1]]
    return CourierState(state.courier_id, last_order.user_dropoff, schedule.completion)


@dataclass(frozen=True)
class CourierPlan:
    """One courier's bundled routes with schedules, for a given sequence."""

    routes: Tuple[Route, ...]
    schedules: Tuple[RouteSchedule, ...]
    feasible: bool
    violation: Optional[Tuple[int, str, str]] = None  # (route index, order id, reason)

    @property
    def cost_s(self) -> int:
        return sum(s.routing_time_s for s in self.schedules)

    @property
    def completion(self) -> int:
        return self.schedules[-1].completion if self.schedules else 0


def _run_plan(
    state: CourierState,
    routes: Sequence[Route],
    dispatch_time: int,
    instance: Instance,
    dist_fn: Optional[DistFn],
) -> CourierPlan:
    courier = instance.couriers_by_id[state.courier_id]
    schedules: List[RouteSchedule] = []
    violation = None
    cur = state
    for idx, route in enumerate(routes):
        sched = route_timeline(cur, route, dispatch_time, instance, dist_fn)
        if violation is None:
            bad = first_violation(sched, route, courier, instance)
            if bad is not None:
                violation = (idx, bad[0], bad[1])
        schedules.append(sched)
        cur = state_after(cur, route, sched, instance)
    return CourierPlan(tuple(routes), tuple(schedules), violation is None, violation)


def _greedy_bundles(
    state: CourierState,
    sequence: Sequence[Order],
    dispatch_time: int,
    instance: Instance,
    dist_fn: Optional[DistFn],
) -> List[Route]:
    routes: List[Route] = []
    cur = state
    i = 0
    while i < len(sequence):
        bundle = [sequence[i]]
        j = i + 1
        while (
            len(bundle) < MAX_BUNDLE
            and j < len(sequence)
            and sequence[j].restaurant_id == sequence[i].restaurant_id
        ):
            candidate = make_route(bundle + [sequence[j]])
            if schedule_route(cur, candidate, dispatch_time, instance, dist_fn) is None:
                break
            bundle.append(sequence[j])
            j += 1
        route = make_route(bundle)
        routes.append(route)
        # Advance through the route even if it is itself infeasible, so the
        # plan stays defined end to end; feasibility is judged afterwards.
        sched = route_timeline(cur, route, dispatch_time, instance, dist_fn)
        cur = state_after(cur, route, sched, instance)
        i = j
    return routes


def plan_courier_routes(
    state: CourierState,
    sequence: Sequence[Order],
    dispatch_time: int,
    instance: Instance,
    dist_fn: Optional[DistFn] = None,
) -> CourierPlan:
    """Bundle a courier's order sequence and schedule the resulting routes.

    Consecutive same-restaurant orders merge greedily up to three per route
    while the merged route stays feasible. If the bundled plan turns out
    infeasible end to end (a merge can push a later route past a deadline),
    the plan falls back to singleton routes. The returned plan may still be
    infeasible; callers treat that as a rejected candidate, not an error.
    """
    if not sequence:
        return CourierPlan((), (), True)
    bundled = _greedy_bundles(state, sequence, dispatch_time, instance, dist_fn)
    plan = _run_plan(state, bundled, dispatch_time, instance, dist_fn)
    if plan.feasible or all(len(r.orders) == 1 for r in bundled):
        return plan
    singles = [make_route([o]) for o in sequence]
    return _run_plan(state, singles, dispatch_time, instance, dist_fn)


def bundle_orders(
    courier_sequence: Sequence[Order],
    instance: Instance,
    state: CourierState,
    dispatch_time: int = 0,
    dist_fn: Optional[DistFn] = None,
) -> List[Route]:
    """Partition one courier's order sequence into routes (see plan_courier_routes)."""
    return list(
        plan_courier_routes(state, courier_sequence, dispatch_time, instance, dist_fn).routes
    )


@dataclass(frozen=True)
class Assignment:
    """Per-courier ordered route lists plus the orders left unassigned."""

    routes: Dict[str, Tuple[Route, ...]]
    unassigned: frozenset

    def assigned_order_ids(self) -> List[str]:
        return [oid for routes in self.routes.values() for r in routes for oid in r.orders]

    def check_partition(self, order_ids: Iterable[str]) -> None:
        """Every order must appear exactly once across routes and unassigned."""
        assigned = self.assigned_order_ids()
        seen = set(assigned)
        if len(seen) != len(assigned):
            dupes = sorted({o for o in assigned if assigned.count(o) > 1})
            raise ValueError(f"orders assigned more than once: {dupes}")
        overlap = seen & self.unassigned
        if overlap:
            raise ValueError(f"orders both assigned and unassigned: {sorted(overlap)}")
        universe = set(order_ids)
        covered = seen | self.unassigned
        if covered != universe:
            missing = sorted(universe - covered)
            extra = sorted(covered - universe)
            raise ValueError(f"assignment does not partition orders: missing={missing} extra={extra}")


@dataclass(frozen=True)
class FeasibilityReport:
    feasible: bool
    schedules: Dict[str, Tuple[RouteSchedule, ...]]
    # First broken constraint as (courier id, route index, order id, reason).
    violation: Optional[Tuple[str, int, str, str]] = None


def assignment_feasible(
    assignment: Assignment,
    instance: Instance,
    dispatch_time: int = 0,
    courier_states: Optional[Dict[str, CourierState]] = None,
    dist_fn: Optional[DistFn] = None,
) -> FeasibilityReport:
    """Schedule every courier's routes back to back and check all constraints.

    Route i+1 dispatches when route i completes, with the courier idling at
    its last drop-off in between.
    """
    schedules: Dict[str, Tuple[RouteSchedule, ...]] = {}
    violation = None
    for courier_id in sorted(assignment.routes):
        routes = assignment.routes[courier_id]
        if courier_states is not None and courier_id in courier_states:
            state = courier_states[courier_id]
        else:
            state = initial_courier_state(instance.couriers_by_id[courier_id])
        plan = _run_plan(state, routes, dispatch_time, instance, dist_fn)
        schedules[courier_id] = plan.schedules
        if violation is None and not plan.feasible:
            idx, order_id, reason = plan.violation
            violation = (courier_id, idx, order_id, reason)
    return FeasibilityReport(violation is None, schedules, violation)


def total_routing_time_s(
    assignment: Assignment,
    instance: Instance,
    dispatch_time: int = 0,
    courier_states: Optional[Dict[str, CourierState]] = None,
    dist_fn: Optional[DistFn] = None,
) -> int:
    """Sum of routing times across all scheduled routes; infeasible input is an error."""
    report = assignment_feasible(assignment, instance, dispatch_time, courier_states, dist_fn)
    if not report.feasible:
        raise ValueError(f"assignment is infeasible: {report.violation}")
    return sum(s.routing_time_s for scheds in report.schedules.values() for s in scheds)
