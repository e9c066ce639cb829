"""Solve one dispatch snapshot and walk through the winning plan.

Builds a lunchtime scene directly from the model types: ten orders that
came in over the last few minutes, food nearly ready, three couriers
idle. Runs the solver and prints each courier's schedule: departure,
restaurant pickup (including time spent waiting on food), and the
drop-off chain with deadline slack per order.
"""

import random

from mealdispatch import (
    Courier,
    GeoPoint,
    Instance,
    Order,
    Restaurant,
    SolverConfig,
    VehicleKind,
    grasp,
)

BBOX = (4.58, -74.12, 4.64, -74.06)  # ~7 x 7 km


def hhmm(t: int) -> str:
    return f"{t // 3600:02d}:{t % 3600 // 60:02d}:{t % 60:02d}"


def build_snapshot(seed: int = 7) -> Instance:
    rng = random.Random(seed)

    def point() -> GeoPoint:
        return GeoPoint(rng.uniform(BBOX[0], BBOX[2]), rng.uniform(BBOX[1], BBOX[3]))

    restaurants = tuple(Restaurant(id=f"r{i}", location=point()) for i in range(3))
    vehicles = (VehicleKind.MOTORCYCLE, VehicleKind.CAR, VehicleKind.BICYCLE)
    couriers = tuple(
        Courier(id=f"c{i}", vehicle=v, start_location=point(), on_time=0, off_time=14400)
        for i, v in enumerate(vehicles)
    )
    orders = []
    for i in range(10):
        placed = rng.randint(0, 300)
        ready = placed + rng.randint(120, 900)
        orders.append(
            Order(
                id=f"o{i}",
                restaurant_id=f"r{rng.randrange(3)}",
                user_dropoff=point(),
                placement_time=placed,
                prep_start_time=placed,
                ready_time=ready,
                deadline=ready + rng.randint(2100, 3000),
                pickup_service_s=rng.randint(60, 180),
                dropoff_service_s=rng.randint(60, 180),
            )
        )
    return Instance(restaurants=restaurants, couriers=couriers, orders=tuple(orders))


def main() -> None:
    instance = build_snapshot()
    config = SolverConfig(alpha=0.7, iterations=800, seed=1)
    # dispatch at t=300: every order is placed, most food still cooking
    result = grasp(list(instance.couriers), list(instance.orders), instance, config, 300)

    print(f"{len(instance.orders)} pending orders, {len(instance.couriers)} idle couriers")
    print(
        f"solved in {result.wall_time_s:.2f}s: {result.fulfilled} fulfilled, "
        f"{result.cost_s}s total routing, best found at iteration {result.best_iteration}"
    )
    print()

    for courier_id in sorted(result.assignment.routes):
        routes = result.assignment.routes[courier_id]
        courier = instance.couriers_by_id[courier_id]
        print(f"{courier_id} ({courier.vehicle.value}):")
        for route, sched in zip(routes, result.schedules[courier_id]):
            wait = f", waits {sched.wait_s}s for prep" if sched.wait_s else ""
            bundle = "+".join(route.dropoff_sequence)
            print(
                f"  depart {hhmm(sched.depart)} -> {route.restaurant_id} for {bundle} "
                f"(pickup {hhmm(sched.pickup_begin)}-{hhmm(sched.pickup_end)}{wait})"
            )
            for stop in sched.dropoffs:
                deadline = instance.orders_by_id[stop.order_id].deadline
                slack = deadline - stop.deliver_complete
                print(
                    f"    drop {stop.order_id} at {hhmm(stop.deliver_complete)}, "
                    f"{slack}s before its deadline"
                )
        print()

    if result.assignment.unassigned:
        print(f"unassigned (no courier could meet the deadline): "
              f"{', '.join(sorted(result.assignment.unassigned))}")

    trace = result.incumbent_trace()
    marks = sorted({0, result.best_iteration, len(trace) - 1})
    print("incumbent over iterations:",
          "  ".join(f"#{i}: {trace[i][0]} orders / {trace[i][1]}s" for i in marks))


if __name__ == "__main__":
    main()
