"""Independent re-implementations used as test oracles.

Everything here is written from the documented behavior, on purpose without
importing the scheduling internals: the geometry, the timeline recurrence and
the bundling rule are coded a second time in plain Python so the tests catch
a shared bug rather than inherit it. Keep this module dumb and obvious.
"""

from __future__ import annotations

import itertools
import math
import random
from typing import Dict, List, Optional, Sequence, Tuple

from mealdispatch.model import (
    Courier,
    GeoPoint,
    Instance,
    Order,
    Restaurant,
    VehicleKind,
)

EARTH_RADIUS_KM = 6371.0

SPEED_KMH = {
    VehicleKind.WALKING: 5.0,
    VehicleKind.BICYCLE: 12.0,
    VehicleKind.CAR: 15.0,
    VehicleKind.MOTORCYCLE: 20.0,
}


def o_haversine_km(a: GeoPoint, b: GeoPoint) -> float:
    """Textbook haversine, written independently of the package's version."""
    la1, lo1, la2, lo2 = map(math.radians, (a.lat, a.lon, b.lat, b.lon))
    s1 = math.sin((la2 - la1) / 2.0)
    s2 = math.sin((lo2 - lo1) / 2.0)
    h = s1 * s1 + math.cos(la1) * math.cos(la2) * s2 * s2
    return 2.0 * EARTH_RADIUS_KM * math.atan2(math.sqrt(h), math.sqrt(1.0 - h))


def o_travel_s(a: GeoPoint, b: GeoPoint, vehicle: VehicleKind) -> int:
    km = o_haversine_km(a, b)
    return int(math.ceil(km * 3600.0 / SPEED_KMH[vehicle]))


def run_bundle(
    inst: Instance,
    courier: Courier,
    orders: Sequence[Order],
    dispatch_time: int,
    loc: GeoPoint,
    avail: int,
) -> Tuple[bool, GeoPoint, int, int]:
    """Walk one route; returns (feasible, end_location, end_time, routing_s).

    End state is reported even for infeasible routes, matching how the
    package advances through a plan before judging it.
    """
    rest = inst.restaurants_by_id[orders[0].restaurant_id]
    depart = max(dispatch_time, avail)
    arrive = depart + o_travel_s(loc, rest.location, courier.vehicle)
    pickup_begin = max(arrive, max(o.ready_time for o in orders))
    t = pickup_begin + max(o.pickup_service_s for o in orders)
    p = rest.location
    ok = True
    for o in sorted(orders, key=lambda o: (o.deadline, o.id)):
        t += o_travel_s(p, o.user_dropoff, courier.vehicle) + o.dropoff_service_s
        p = o.user_dropoff
        if t > o.deadline:
            ok = False
    if t > courier.off_time:
        ok = False
    return ok, p, t, t - depart


def _greedy_bundles(
    inst: Instance,
    courier: Courier,
    seq: Sequence[Order],
    dispatch_time: int,
    loc: GeoPoint,
    avail: int,
) -> List[List[Order]]:
    bundles: List[List[Order]] = []
    i = 0
    while i < len(seq):
        k = 1
        while (
            k < 3
            and i + k < len(seq)
            and seq[i + k].restaurant_id == seq[i].restaurant_id
        ):
            ok, _, _, _ = run_bundle(
                inst, courier, seq[i : i + k + 1], dispatch_time, loc, avail
            )
            if not ok:
                break
            k += 1
        bundle = list(seq[i : i + k])
        bundles.append(bundle)
        _, loc, avail, _ = run_bundle(inst, courier, bundle, dispatch_time, loc, avail)
        i += k
    return bundles


def _run_plan(
    inst: Instance,
    courier: Courier,
    bundles: Sequence[Sequence[Order]],
    dispatch_time: int,
    loc: GeoPoint,
    avail: int,
) -> Tuple[bool, int]:
    feasible = True
    cost = 0
    for bundle in bundles:
        ok, loc, avail, routing = run_bundle(
            inst, courier, bundle, dispatch_time, loc, avail
        )
        feasible = feasible and ok
        cost += routing
    return feasible, cost


def plan_eval(
    inst: Instance,
    courier: Courier,
    seq: Sequence[Order],
    dispatch_time: int = 0,
    loc: Optional[GeoPoint] = None,
    avail: Optional[int] = None,
) -> Tuple[bool, int]:
    """Evaluate one courier's order sequence: greedy bundling, then the
    all-singles fallback when a merge wrecked a later route."""
    if not seq:
        return True, 0
    if loc is None:
        loc = courier.start_location
    if avail is None:
        avail = courier.on_time
    bundles = _greedy_bundles(inst, courier, seq, dispatch_time, loc, avail)
    feasible, cost = _run_plan(inst, courier, bundles, dispatch_time, loc, avail)
    if feasible or all(len(b) == 1 for b in bundles):
        return feasible, cost
    return _run_plan(inst, courier, [[o] for o in seq], dispatch_time, loc, avail)


def exhaustive_best(inst: Instance, dispatch_time: int = 0) -> Tuple[int, int]:
    """Optimum (orders assigned, total routing seconds) over every feasible
    mapping of orders to per-courier sequences. Couriers are independent, so
    each courier's best permutation of its order set is chosen separately;
    per-set results are memoized. Only sane for tiny instances.
    """
    couriers = list(inst.couriers)
    orders = sorted(inst.orders, key=lambda o: o.id)
    m, n = len(couriers), len(orders)

    best_for_set: Dict[Tuple[int, frozenset], Optional[int]] = {}

    def best_perm(ci: int, ids: frozenset) -> Optional[int]:
        key = (ci, ids)
        if key not in best_for_set:
            group = [o for o in orders if o.id in ids]
            winner: Optional[int] = None
            for perm in itertools.permutations(group):
                ok, cost = plan_eval(inst, couriers[ci], perm, dispatch_time)
                if ok and (winner is None or cost < winner):
                    winner = cost
            best_for_set[key] = winner
        return best_for_set[key]

    best_n, best_cost = 0, 0
    for assign in itertools.product(range(m + 1), repeat=n):
        n_assigned = sum(1 for c in assign if c < m)
        if n_assigned < best_n:
            continue
        total = 0
        doable = True
        for ci in range(m):
            ids = frozenset(o.id for o, c in zip(orders, assign) if c == ci)
            if not ids:
                continue
            cost = best_perm(ci, ids)
            if cost is None:
                doable = False
                break
            total += cost
        if doable and (n_assigned > best_n or (n_assigned == best_n and total < best_cost)):
            best_n, best_cost = n_assigned, total
    return best_n, best_cost


# Small-instance factory for the oracle-vs-solver comparisons. A ~2 km city
# patch with couriers idling near the restaurants and roomy delivery windows:
# the regime one dispatch epoch actually sees (a handful of pending orders,
# nobody hopelessly far away). Degenerate shapes where a swap neighborhood
# can do nothing (a lone courier, every greedy value tied at one restaurant)
# are deliberately absent; they say nothing about solver correctness.
_BASE_LAT, _BASE_LON = 4.60, -74.08

_TINY_VEHICLES = (VehicleKind.MOTORCYCLE, VehicleKind.CAR)


def tiny_instance(
    seed: int,
    n_couriers: Optional[int] = None,
    n_orders: Optional[int] = None,
) -> Instance:
    r = random.Random(seed)
    if n_couriers is None:
        n_couriers = r.randint(2, 3)
    if n_orders is None:
        n_orders = r.randint(1, 5)
    n_rest = r.randint(1, 2)

    def point() -> GeoPoint:
        return GeoPoint(_BASE_LAT + r.random() * 0.02, _BASE_LON + r.random() * 0.02)

    restaurants = [Restaurant(f"r{i}", point()) for i in range(n_rest)]
    couriers = []
    for i in range(n_couriers):
        base = restaurants[r.randrange(n_rest)].location
        near = GeoPoint(
            base.lat + (r.random() - 0.5) * 0.008,
            base.lon + (r.random() - 0.5) * 0.008,
        )
        couriers.append(
            Courier(f"c{i}", _TINY_VEHICLES[r.randrange(2)], near, 0, 14400)
        )
    orders = []
    for i in range(n_orders):
        ready = r.randint(0, 120)
        orders.append(
            Order(
                id=f"o{i}",
                restaurant_id=restaurants[r.randrange(n_rest)].id,
                user_dropoff=point(),
                placement_time=0,
                prep_start_time=0,
                ready_time=ready,
                deadline=ready + r.randint(2400, 4200),
                pickup_service_s=r.randint(30, 90),
                dropoff_service_s=r.randint(30, 90),
            )
        )
    return Instance(tuple(restaurants), tuple(couriers), tuple(orders))
