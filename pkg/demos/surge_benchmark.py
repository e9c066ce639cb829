"""Time the solver on the surge benchmark: one epoch, 500 pending orders.

Dispatch runs every two minutes in production, so a solve that cannot
finish inside that window is useless no matter how good its answer is.
This runs the standard performance scenario (500 pending orders, 150
idle couriers) at the operating point and reports the margin. Expect
roughly a minute of wall time.
"""

import time

from mealdispatch import assignment_feasible, grasp, surge_epoch, surge_epoch_config

BUDGET_S = 120.0


def main() -> None:
    instance, dispatch_time = surge_epoch()
    config = surge_epoch_config(iterations=1000)
    print(f"{len(instance.orders)} pending orders, {len(instance.couriers)} couriers, "
          f"alpha={config.alpha}, {config.iterations} iterations, full descent")

    started = time.perf_counter()
    result = grasp(
        list(instance.couriers), list(instance.orders), instance, config, dispatch_time
    )
    elapsed = time.perf_counter() - started

    print(f"fulfilled {result.fulfilled}/{len(instance.orders)} "
          f"with {result.cost_s}s routing, best at iteration {result.best_iteration}")

    report = assignment_feasible(result.assignment, instance, dispatch_time)
    print(f"assignment feasible: {report.feasible}")

    verdict = "inside" if elapsed < BUDGET_S else "OVER"
    print(f"wall time {elapsed:.1f}s, {verdict} the {BUDGET_S:.0f}s dispatch window "
          f"({BUDGET_S - elapsed:+.1f}s margin)")


if __name__ == "__main__":
    main()
