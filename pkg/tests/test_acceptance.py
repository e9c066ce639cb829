"""End-to-end acceptance checks, one test per shipped guarantee.

Each test prints as a single pass/fail line under pytest -v. These are
slower than the unit suites: together they exercise the published-table
reproduction, solver optimality on exhaustively checkable instances,
local-search dominance over a large random corpus, whole-day invariants
on instances up to 2000 orders, byte-level determinism, the two-minute
epoch budget, the calibration surface, and the alternate search modes.
"""

import random
import time

import pytest

import oracles
from mealdispatch.benchmark import (
    calibration_day,
    calibration_sim_config,
    feasibility_days,
    surge_epoch,
    surge_epoch_config,
)
from mealdispatch.grasp import SolverConfig, grasp, local_search
from mealdispatch.instances import GeneratorParams, generate_instance
from mealdispatch.metrics import (
    calibrate,
    format_report_table,
    gap_percent,
    load_published_results,
    metrics_csv_rows,
)
from mealdispatch.scheduling import (
    Assignment,
    assignment_feasible,
    initial_courier_state,
    plan_courier_routes,
    total_routing_time_s,
)
from mealdispatch.simulator import SimConfig, simulate_day, validate_event_log

from dataclasses import replace


# ---------------------------------------------------------------- helpers


def _states(instance):
    return {c.id: initial_courier_state(c) for c in instance.couriers}


def _random_feasible_assignment(instance, rnd):
    """Sample an arbitrary feasible assignment by random order insertion.

    Orders are visited in random order; each tries couriers in random
    order and joins the first sequence that still schedules feasibly.
    A small fraction of placeable orders is left unassigned anyway so
    the corpus covers partial assignments too.
    """
    states = _states(instance)
    seqs = {c.id: [] for c in instance.couriers}
    unassigned = []
    order_pool = list(instance.orders)
    rnd.shuffle(order_pool)
    courier_ids = [c.id for c in instance.couriers]
    for order in order_pool:
        if rnd.random() < 0.1:
            unassigned.append(order.id)
            continue
        rnd.shuffle(courier_ids)
        placed = False
        for cid in courier_ids:
            cand = seqs[cid] + [order]
            if plan_courier_routes(states[cid], cand, 0, instance).feasible:
                seqs[cid] = cand
                placed = True
                break
        if not placed:
            unassigned.append(order.id)
    routes = {
        cid: plan_courier_routes(states[cid], seq, 0, instance).routes
        for cid, seq in seqs.items()
        if seq
    }
    return Assignment(routes=routes, unassigned=frozenset(unassigned))


@pytest.fixture(scope="module")
def ls_corpus():
    """20 synthetic instances x 50 random feasible assignments each."""
    corpus = []
    for k in range(20):
        params = GeneratorParams(
            n_orders=15 + (k * 7) % 21,
            n_couriers=4 + k % 5,
            n_restaurants=4 + k % 4,
            horizon_s=7200,
            window_length_range_s=(1500, 2700),
            seed=300 + k,
        )
        instance = generate_instance(params)
        rnd = random.Random(9000 + k)
        assignments = [_random_feasible_assignment(instance, rnd) for _ in range(50)]
        corpus.append((instance, assignments))
    return corpus


@pytest.fixture(scope="module")
def surge_run():
    instance, dispatch_time = surge_epoch()
    config = surge_epoch_config(iterations=1000)
    started = time.perf_counter()
    result = grasp(list(instance.couriers), list(instance.orders), instance, config, dispatch_time)
    elapsed = time.perf_counter() - started
    return instance, dispatch_time, result, elapsed


def _event_log_bytes(events):
    return ("\n".join(e.to_json() for e in events) + "\n").encode()


def _report_bytes(result, instance):
    rows = metrics_csv_rows([result.metrics])
    table = format_report_table([result.metrics])
    return repr(rows).encode() + table.encode()


# ---------------------------------------------------------------- criteria


def test_criterion_1_published_gap_table():
    started = time.perf_counter()
    assert gap_percent(54725, 55290) == -1.02
    assert gap_percent(24114, 24277) == -0.67
    assert gap_percent(2878, 2879) == -0.03
    assert gap_percent(57347, 57347) == 0.00
    rows = load_published_results()
    assert len(rows) == 22
    for row in rows:
        got = gap_percent(row.of_base, row.of_grasp)
        assert abs(got - row.gap) <= 0.005, (row.instance, got, row.gap)
    assert time.perf_counter() - started < 1.0


def test_criterion_2_small_instance_optimality():
    started = time.perf_counter()
    attained = 0
    runs = 0
    for instance_seed in range(30):
        instance = oracles.tiny_instance(instance_seed)
        best = oracles.exhaustive_best(instance)
        order_ids = [o.id for o in instance.orders]
        for solver_seed in (instance_seed, 10000 + instance_seed, 20000 + instance_seed):
            config = SolverConfig(alpha=0.7, iterations=500, seed=solver_seed)
            result = grasp(list(instance.couriers), list(instance.orders), instance, config)
            runs += 1
            # never infeasible, never duplicated or dropped orders
            report = assignment_feasible(result.assignment, instance)
            assert report.feasible, (instance_seed, solver_seed, report.violation)
            result.assignment.check_partition(order_ids)
            assert total_routing_time_s(result.assignment, instance) == result.cost_s
            # never worse than any of its own constructed starts
            final_key = (-result.fulfilled, result.cost_s)
            for stats in result.iteration_log:
                assert final_key <= (-stats.constructed_fulfilled, stats.constructed_cost_s)
            if (result.fulfilled, result.cost_s) == best:
                attained += 1
    assert runs == 90
    # measured 85/90 on the frozen design; the bar is 90% of runs
    assert attained >= 81, f"optimum attained on only {attained}/90 runs"
    assert time.perf_counter() - started < 120.0


def test_criterion_3_local_search_descent(ls_corpus):
    started = time.perf_counter()
    full_cfg = SolverConfig(local_search_mode="full_descent")
    one_cfg = SolverConfig(local_search_mode="one_pass")
    checked = 0
    improved = 0
    for instance, assignments in ls_corpus:
        order_ids = [o.id for o in instance.orders]
        for assignment in assignments:
            before = total_routing_time_s(assignment, instance)
            after_one = local_search(assignment, instance, one_cfg)
            after_full = local_search(assignment, instance, full_cfg)
            cost_one = total_routing_time_s(after_one, instance)
            cost_full = total_routing_time_s(after_full, instance)
            # descent, and full descent at least as deep as one pass
            assert cost_full <= cost_one <= before
            if cost_one < before:
                improved += 1
                assert cost_full < before
            # swaps preserve the partition, feasibility, and fulfillment
            for out in (after_one, after_full):
                out.check_partition(order_ids)
                assert out.unassigned == assignment.unassigned
                assert assignment_feasible(out, instance).feasible
            checked += 1
    assert checked == 1000
    assert improved > 0  # the corpus must actually exercise the swap move
    assert time.perf_counter() - started < 300.0


def test_criterion_4_full_day_invariants():
    for label, instance, config in feasibility_days():
        result = simulate_day(instance, config, label=label)
        # validator re-derives deadlines, shifts, bundle caps, overlap,
        # and conservation from the event log alone; any breach raises
        counts = validate_event_log(result.events, instance)
        assert counts["delivered"] == len(result.state.completed)
        assert counts["abandoned"] == len(result.state.abandoned)
        assert counts["delivered"] + counts["abandoned"] == len(instance.orders), label
        assert not result.state.pending and not result.state.active


def test_criterion_5_byte_identical_reruns():
    _, instance, config = feasibility_days()[0]
    parallel = replace(config, solver=replace(config.solver, n_jobs=4))
    runs = [
        simulate_day(instance, config, label="rerun"),
        simulate_day(instance, config, label="rerun"),
        simulate_day(instance, parallel, label="rerun"),
    ]
    logs = [_event_log_bytes(r.events) for r in runs]
    reports = [_report_bytes(r, instance) for r in runs]
    assert logs[0] == logs[1] == logs[2]
    assert reports[0] == reports[1] == reports[2]


def test_criterion_6_epoch_time_budget(surge_run):
    instance, dispatch_time, result, elapsed = surge_run
    assert elapsed < 120.0, f"surge epoch took {elapsed:.1f}s"
    report = assignment_feasible(result.assignment, instance, dispatch_time)
    assert report.feasible
    result.assignment.check_partition([o.id for o in instance.orders])
    assert result.fulfilled > 0


def test_criterion_7_calibration_surface(surge_run):
    _, _, result, _ = surge_run
    trace = result.incumbent_trace()
    assert len(trace) == 1000
    fulfilled = [f for f, _ in trace]
    assert fulfilled == sorted(fulfilled), "incumbent fulfillment must never regress"
    for seed in range(3):
        tiny = oracles.tiny_instance(seed)
        small = grasp(
            list(tiny.couriers),
            list(tiny.orders),
            tiny,
            SolverConfig(alpha=0.7, iterations=300, seed=5 + seed),
        )
        small_trace = [f for f, _ in small.incumbent_trace()]
        assert small_trace == sorted(small_trace)

    cells, _ = calibrate(
        calibration_day(),
        replications=3,
        seed=0,
        sim_config=calibration_sim_config(),
    )
    best = max(c.mean_of for c in cells)
    target = next(c for c in cells if c.alpha == 0.7 and c.iterations == 1000)
    assert target.mean_of >= 0.98 * best, (target.mean_of, best)
    # pinned first measurement of the shipped surface: the default cell
    # sits on the grid maximum and pure greedy strands six more orders
    assert target.mean_of == 27.0 == best
    greedy = next(c for c in cells if c.alpha == 0.0 and c.iterations == 1000)
    assert greedy.mean_of == 21.0


def test_criterion_8_alternate_search_modes(ls_corpus):
    # one_pass descent over the corpus is asserted in criterion 3; here the
    # cost_only objective must reach the same swaps, and both modes must
    # hold the day-level and determinism guarantees
    full_cfg = SolverConfig(local_search_mode="full_descent")
    cost_cfg = SolverConfig(local_search_mode="full_descent", objective="cost_only")
    rnd = random.Random(42)
    for instance, assignments in ls_corpus:
        for assignment in rnd.sample(assignments, 10):
            via_lex = local_search(assignment, instance, full_cfg)
            via_cost = local_search(assignment, instance, cost_cfg)
            assert total_routing_time_s(via_lex, instance) == total_routing_time_s(
                via_cost, instance
            )

    label, instance, base = feasibility_days()[0]
    for mode_cfg in (
        replace(base, solver=replace(base.solver, local_search_mode="one_pass")),
        replace(base, solver=replace(base.solver, objective="cost_only")),
    ):
        result = simulate_day(instance, mode_cfg, label=label)
        counts = validate_event_log(result.events, instance)
        assert counts["delivered"] + counts["abandoned"] == len(instance.orders)
        again = simulate_day(instance, mode_cfg, label=label)
        parallel = replace(mode_cfg, solver=replace(mode_cfg.solver, n_jobs=4))
        third = simulate_day(instance, parallel, label=label)
        assert _event_log_bytes(result.events) == _event_log_bytes(again.events)
        assert _event_log_bytes(result.events) == _event_log_bytes(third.events)
