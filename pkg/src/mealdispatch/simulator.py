"""Rolling-horizon day simulator.

Replays an instance as a discrete-epoch process: orders appear at their
placement time, couriers come on and off shift, and every epoch the
solver runs on the snapshot of pending orders and idle couriers. Dispatch
decisions are irrevocable: once a route is committed it executes to
completion and is never re-planned, so the whole day is a deterministic
function of (instance, config).

Couriers mid-route are invisible to the solver; they re-enter the pool
when their committed plan (plus the optional return-to-start leg) ends.
An order leaves the pending pool early only when no courier, idle or
busy, could still deliver it by its deadline from the courier's projected
release point; such orders are abandoned.

Every lifecycle transition is recorded as an event, and the finished log
can be re-validated from scratch (deadlines, shifts, bundle shape, route
overlap, conservation) without trusting the simulator's own bookkeeping.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Dict, Iterable, List, NamedTuple, Optional, Tuple

from .grasp import SolverConfig, SolverInvariantError, grasp
from .metrics import MetricsRow
from .model import DAY_S, Courier, Instance, Order, haversine_km, travel_seconds, travel_time_s
from .scheduling import CourierState, Route, RouteSchedule, initial_courier_state

EVENT_KINDS = ("placed", "assigned", "picked_up", "delivered", "abandoned")
_KIND_ORDER = {"placed": 0, "assigned": 1, "picked_up": 2, "delivered": 3, "abandoned": 4}


@dataclass(frozen=True)
class Event:
    """One order lifecycle transition.

    assigned events also carry the route's departure time; the validator
    needs it because routes chained within one epoch depart later than
    the epoch they were committed in.
    """

    t: int
    kind: str
    order_id: str
    courier_id: Optional[str] = None
    route_seq: Optional[int] = None
    depart: Optional[int] = None

    def __post_init__(self) -> None:
        if self.kind not in EVENT_KINDS:
            raise ValueError(f"unknown event kind {self.kind!r}")

    def to_json(self) -> str:
        rec: Dict[str, object] = {"t": self.t, "event": self.kind, "order": self.order_id}
        if self.courier_id is not None:
            rec["courier"] = self.courier_id
        if self.route_seq is not None:
            rec["route_seq"] = self.route_seq
        if self.depart is not None:
            rec["depart"] = self.depart
        return json.dumps(rec, sort_keys=True, separators=(",", ":"))

    @staticmethod
    def from_json(line: str) -> "Event":
        rec = json.loads(line)
        return Event(
            t=rec["t"],
            kind=rec["event"],
            order_id=rec["order"],
            courier_id=rec.get("courier"),
            route_seq=rec.get("route_seq"),
            depart=rec.get("depart"),
        )


def write_event_log(events: Iterable[Event], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for ev in events:
            fh.write(ev.to_json())
            fh.write("\n")


def read_event_log(path: str) -> Tuple[Event, ...]:
    out: List[Event] = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(Event.from_json(line))
    return tuple(out)


class ActiveRoute(NamedTuple):
    courier_id: str
    route_seq: int
    route: Route
    schedule: RouteSchedule


@dataclass(frozen=True)
class SimConfig:
    epoch_s: int = 120
    solver: SolverConfig = field(default_factory=SolverConfig)
    return_to_start: bool = False

    def __post_init__(self) -> None:
        if self.epoch_s < 1:
            raise ValueError("epoch_s must be >= 1")


@dataclass
class SimState:
    """Mutable day state. Every admitted order sits in exactly one of
    pending, active (via a committed route), completed, or abandoned."""

    clock: int
    upcoming: List[Order]
    pending: List[Order]
    active: List[ActiveRoute]
    courier_states: Dict[str, CourierState]
    completed: List[Tuple[Order, RouteSchedule]]
    abandoned: List[Order]
    completed_routes: List[ActiveRoute]
    events: List[Event]
    route_counters: Dict[str, int]
    drop_km: Dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class SimResult:
    metrics: MetricsRow
    events: Tuple[Event, ...]
    state: SimState
    label: str


def initial_state(instance: Instance) -> SimState:
    return SimState(
        clock=0,
        upcoming=sorted(instance.orders, key=lambda o: (o.placement_time, o.id)),
        pending=[],
        active=[],
        courier_states={c.id: initial_courier_state(c) for c in instance.couriers},
        completed=[],
        abandoned=[],
        completed_routes=[],
        events=[],
        route_counters={},
    )


def _drop_leg_km(state: SimState, order: Order, instance: Instance) -> float:
    km = state.drop_km.get(order.id)
    if km is None:
        km = haversine_km(instance.restaurant_of(order).location, order.user_dropoff)
        state.drop_km[order.id] = km
    return km


def _anyone_can_deliver(state: SimState, order: Order, instance: Instance, clock: int) -> bool:
    """Could any courier still deliver this order by its deadline?

    Busy couriers count, projected from their release time and position
    (dispatch no earlier than the current clock). Same schedule recurrence
    as the solver's singleton feasibility check.
    """
    if order.deadline < clock:
        return False
    rest = instance.restaurant_of(order).location
    drop_km = _drop_leg_km(state, order, instance)
    for courier in instance.couriers:
        cs = state.courier_states[courier.id]
        off = courier.off_time
        if cs.available_from > off:
            continue
        speed = courier.vehicle.speed_kmh
        depart = clock if clock > cs.available_from else cs.available_from
        arrive = depart + travel_seconds(haversine_km(cs.location, rest), speed)
        pickup_begin = arrive if arrive > order.ready_time else order.ready_time
        complete = pickup_begin + order.pickup_service_s + travel_seconds(drop_km, speed) + order.dropoff_service_s
        if complete <= order.deadline and complete <= off:
            return True
    return False


def _commit_plan(
    state: SimState,
    courier: Courier,
    routes: Tuple[Route, ...],
    schedules: Tuple[RouteSchedule, ...],
    clock: int,
    return_to_start: bool,
    instance: Instance,
) -> None:
    for route, sched in zip(routes, schedules):
        seq = state.route_counters.get(courier.id, 0)
        state.route_counters[courier.id] = seq + 1
        for oid in route.orders:
            state.events.append(
                Event(clock, "assigned", oid, courier.id, seq, depart=sched.depart)
            )
            state.events.append(Event(sched.pickup_end, "picked_up", oid, courier.id, seq))
        for stop in sched.dropoffs:
            state.events.append(
                Event(stop.deliver_complete, "delivered", stop.order_id, courier.id, seq)
            )
        state.active.append(ActiveRoute(courier.id, seq, route, sched))
    last_route, last_sched = routes[-1], schedules[-1]
    last_drop = instance.orders_by_id[last_route.dropoff_sequence[-1]].user_dropoff
    avail = last_sched.completion
    loc = last_drop
    if return_to_start:
        avail += travel_time_s(last_drop, courier.start_location, courier.vehicle)
        loc = courier.start_location
    state.courier_states[courier.id] = CourierState(courier.id, loc, avail)


def step(state: SimState, config: SimConfig, instance: Instance) -> SimState:
    """Advance one epoch: admit, release, abandon, solve, commit, tick.

    Mutates and returns state. A solver that exhausts its time budget
    commits whatever incumbent it reached.
    """
    clock = state.clock

    n_admit = 0
    while n_admit < len(state.upcoming) and state.upcoming[n_admit].placement_time <= clock:
        order = state.upcoming[n_admit]
        state.pending.append(order)
        state.events.append(Event(order.placement_time, "placed", order.id))
        n_admit += 1
    if n_admit:
        del state.upcoming[:n_admit]

    still_active: List[ActiveRoute] = []
    for ar in state.active:
        if ar.schedule.completion <= clock:
            state.completed_routes.append(ar)
            for oid in ar.route.dropoff_sequence:
                state.completed.append((instance.orders_by_id[oid], ar.schedule))
        else:
            still_active.append(ar)
    state.active = still_active

    kept: List[Order] = []
    for order in state.pending:
        if _anyone_can_deliver(state, order, instance, clock):
            kept.append(order)
        else:
            state.abandoned.append(order)
            state.events.append(Event(clock, "abandoned", order.id))
    state.pending = kept

    idle = [
        c
        for c in instance.couriers
        if state.courier_states[c.id].available_from <= clock < c.off_time
    ]
    if idle and state.pending:
        solver_cfg = config.solver
        if solver_cfg.time_budget_s is None:
            solver_cfg = replace(solver_cfg, time_budget_s=float(config.epoch_s))
        result = grasp(
            idle,
            state.pending,
            instance,
            solver_cfg,
            dispatch_time=clock,
            courier_states={c.id: state.courier_states[c.id] for c in idle},
        )
        try:
            result.assignment.check_partition([o.id for o in state.pending])
        except ValueError as exc:
            raise SolverInvariantError(str(exc)) from exc
        for cid in sorted(result.assignment.routes):
            routes = result.assignment.routes[cid]
            if not routes:
                continue
            _commit_plan(
                state,
                instance.couriers_by_id[cid],
                routes,
                result.schedules[cid],
                clock,
                config.return_to_start,
                instance,
            )
        assigned = set(result.assignment.assigned_order_ids())
        if assigned:
            state.pending = [o for o in state.pending if o.id not in assigned]

    state.clock = clock + config.epoch_s
    return state


def simulate_day(instance: Instance, config: SimConfig, label: str = "instance") -> SimResult:
    """Run epochs until every order is delivered or abandoned.

    Deterministic for fixed (instance, config) as long as the per-epoch
    time budget never cuts a solve short (budget cuts commit the
    incumbent reached, which depends on wall-clock speed).
    """
    state = initial_state(instance)
    # Abandonment retires any order once its deadline passes, so the loop
    # is bounded; the cap only guards against a bookkeeping bug.
    max_clock = 4 * DAY_S + config.epoch_s
    while state.upcoming or state.pending or state.active:
        if state.clock > max_clock:
            raise SolverInvariantError("simulation failed to terminate within the day bound")
        step(state, config, instance)
    events = tuple(sorted(state.events, key=lambda e: (e.t, _KIND_ORDER[e.kind], e.order_id)))
    state.events = list(events)
    couriers_used = len({ar.courier_id for ar in state.completed_routes})
    routing_s = sum(ar.schedule.routing_time_s for ar in state.completed_routes)
    row = MetricsRow(
        instance_label=label,
        orders=len(instance.orders),
        available_couriers=len(instance.couriers),
        couriers_used=couriers_used,
        orders_fulfilled=len(state.completed),
        routing_time_min=routing_s / 60.0,
    )
    return SimResult(metrics=row, events=events, state=state, label=label)


class EventLogError(ValueError):
    """The event log describes an impossible or inconsistent day."""


def _fail(msg: str) -> None:
    raise EventLogError(msg)


def validate_event_log(events: Iterable[Event], instance: Instance) -> Dict[str, int]:
    """Re-check a finished day from its event log alone.

    Verifies conservation (every order placed once, then delivered xor
    abandoned), per-order timestamp ordering, delivery deadlines, courier
    shifts, bundle size and single-restaurant composition, and that no
    courier's routes overlap in time. Returns summary counts.
    """
    by_order: Dict[str, Dict[str, Event]] = {}
    groups: Dict[Tuple[str, int], List[Event]] = {}
    for ev in events:
        if ev.order_id not in instance.orders_by_id:
            _fail(f"event references unknown order {ev.order_id!r}")
        slot = by_order.setdefault(ev.order_id, {})
        if ev.kind in slot:
            _fail(f"order {ev.order_id}: duplicate {ev.kind} event")
        slot[ev.kind] = ev
        if ev.kind in ("assigned", "picked_up", "delivered"):
            if ev.courier_id is None or ev.route_seq is None:
                _fail(f"order {ev.order_id}: {ev.kind} event lacks courier/route_seq")
            if ev.courier_id not in instance.couriers_by_id:
                _fail(f"event references unknown courier {ev.courier_id!r}")
            groups.setdefault((ev.courier_id, ev.route_seq), []).append(ev)

    delivered = 0
    abandoned = 0
    for order in instance.orders:
        slot = by_order.get(order.id)
        if slot is None or "placed" not in slot:
            _fail(f"order {order.id}: no placed event")
        if slot["placed"].t != order.placement_time:
            _fail(f"order {order.id}: placed at {slot['placed'].t}, expected {order.placement_time}")
        has_del = "delivered" in slot
        has_ab = "abandoned" in slot
        if has_del == has_ab:
            _fail(f"order {order.id}: must end delivered xor abandoned")
        if has_ab:
            abandoned += 1
            if "assigned" in slot or "picked_up" in slot:
                _fail(f"order {order.id}: abandoned after assignment")
            continue
        delivered += 1
        for needed in ("assigned", "picked_up"):
            if needed not in slot:
                _fail(f"order {order.id}: delivered without {needed} event")
        a, p, d = slot["assigned"], slot["picked_up"], slot["delivered"]
        if not (slot["placed"].t <= a.t <= p.t <= d.t):
            _fail(f"order {order.id}: lifecycle timestamps out of order")
        if a.depart is None or a.depart < a.t:
            _fail(f"order {order.id}: route departs before its dispatch epoch")
        if p.t < a.depart:
            _fail(f"order {order.id}: picked up before departure")
        if d.t > order.deadline:
            _fail(f"order {order.id}: delivered at {d.t} past deadline {order.deadline}")
        if not (a.courier_id == p.courier_id == d.courier_id and a.route_seq == p.route_seq == d.route_seq):
            _fail(f"order {order.id}: events disagree on courier or route")

    by_courier: Dict[str, List[Tuple[int, int, int]]] = {}
    for (cid, seq), evs in sorted(groups.items()):
        orders = sorted({e.order_id for e in evs if e.kind == "assigned"})
        if not orders or len(orders) > 3:
            _fail(f"courier {cid} route {seq}: carries {len(orders)} orders, must be 1..3")
        rests = {instance.orders_by_id[o].restaurant_id for o in orders}
        if len(rests) != 1:
            _fail(f"courier {cid} route {seq}: mixes restaurants {sorted(rests)}")
        departs = {e.depart for e in evs if e.kind == "assigned"}
        pickups = {e.t for e in evs if e.kind == "picked_up"}
        if len(departs) != 1 or len(pickups) != 1:
            _fail(f"courier {cid} route {seq}: inconsistent departure or pickup times")
        depart = next(iter(departs))
        completion = max(e.t for e in evs if e.kind == "delivered")
        courier = instance.couriers_by_id[cid]
        if depart < courier.on_time:
            _fail(f"courier {cid} route {seq}: departs before shift start")
        if completion > courier.off_time:
            _fail(f"courier {cid} route {seq}: completes after shift end")
        by_courier.setdefault(cid, []).append((depart, completion, seq))

    for cid, spans in by_courier.items():
        spans.sort()
        for (d1, c1, s1), (d2, c2, s2) in zip(spans, spans[1:]):
            if d2 < c1:
                _fail(f"courier {cid}: routes {s1} and {s2} overlap in time")

    if delivered + abandoned != len(instance.orders):
        _fail("orders not conserved across delivered and abandoned")
    return {"delivered": delivered, "abandoned": abandoned, "routes": len(groups)}
