import itertools

import numpy as np
import pytest
from conftest import line_instance, seeded_instance

from cgrp.cost.model import CostModel, Tour, evaluate_tour, route_cost, validate_tour
from cgrp.data.geometry import Instance, LineTask, PointTask
from cgrp.solver import alns
from cgrp.solver.alns import AlnsConfig, OperatorWeights, SaState, accept, destroy_random, destroy_related, \
    destroy_worst, detour_costs, initial_solution, insertion_costs, node_choice_optimization, removal_count, \
    repair_greedy, repair_regret, update_weights
from cgrp.solver.exact import solve_dp


def model_of(instance):
    return CostModel.from_instance(instance)


def points(*locs, depot=(0.0, 0.0)):
    return Instance(depot=depot, points=tuple(PointTask(loc=l) for l in locs))


@pytest.mark.parametrize('n, rho, k', [(10, 0.3, 3), (1, 0.01, 1), (9, 0.3, 3), (5, 0.99, 5)])
def test_removal_count(n, rho, k):
    assert removal_count(n, rho) == k


def test_initial_solution_single_line():
    model = model_of(line_instance(p1=(0.2, 0.0), p2=(0.8, 0.0)))
    tour = initial_solution(model.instance, model.cs, model.cm)
    assert tour == Tour((0, 1))


def test_initial_solution_collinear():
    model = model_of(points((0.6, 0.0), (0.3, 0.0)))
    assert initial_solution(model.instance, model.cs, model.cm) == Tour((0, 2, 1))


def test_initial_solution_dominated():
    instance = seeded_instance(9, 3)
    model = model_of(instance)
    tour = initial_solution(instance, model.cs, model.cm)
    assert validate_tour(tour, model.cs).ok
    assert evaluate_tour(tour, model.cs, model.cm) >= solve_dp(instance, model).objective - 1e-9


def test_destroy_random_deterministic():
    model = model_of(seeded_instance(10, 1))
    order = list(initial_solution(model.instance, model.cs, model.cm).visits)
    a = destroy_random(order, 0.3, np.random.default_rng(4), model.cs)
    b = destroy_random(order, 0.3, np.random.default_rng(4), model.cs)
    assert a == b
    partial, removed = a
    assert len(removed) == 3 and len(partial) == 7
    assert sorted(removed + [int(model.cs.task_of[k]) for k in partial]) == list(range(10))


def test_destroy_worst_outlier():
    model = model_of(points((0.1, 0.1), (0.2, 0.1), (0.9, 0.9), (0.2, 0.2)))
    partial, removed = destroy_worst([1, 2, 3, 4], 0.25, model.cs, model.cm)
    assert removed == [2]
    assert partial == [1, 2, 4]


def test_destroy_worst_ties():
    # coincident points: every detour is exactly zero
    model = model_of(points((0.3, 0.3), (0.3, 0.3), (0.3, 0.3), (0.3, 0.3)))
    assert (detour_costs([4, 2, 3, 1], model.cs, model.cm) == 0).all()
    _, removed = destroy_worst([4, 2, 3, 1], 0.5, model.cs, model.cm)
    assert removed == [0, 1]


def test_destroy_worst_hand_ranking():
    instance = seeded_instance(8, 6)
    model = model_of(instance)
    cs, d = model.cs, model.cm.d
    order = list(initial_solution(instance, cs, model.cm).visits)
    seq = [0] + order + [0]
    detours = [d[seq[i - 1], seq[i]] + d[seq[i], seq[i + 1]] + cs.service_costs[seq[i]] - d[seq[i - 1], seq[i + 1]]
               for i in range(1, len(seq) - 1)]
    ranked = sorted(range(len(order)), key=lambda i: (-detours[i], cs.task_of[order[i]]))
    _, removed = destroy_worst(order, 0.3, cs, model.cm)
    assert removed == sorted(int(cs.task_of[order[i]]) for i in ranked[:3])


def test_destroy_related_cluster():
    model = model_of(points((0.1, 0.1), (0.12, 0.1), (0.1, 0.12), (0.9, 0.9)))
    order = [1, 2, 3, 4]
    for seed in range(20):
        rng = np.random.default_rng(seed)
        partial, removed = destroy_related(order, 0.75, rng, model.cs)
        if removed != [0, 1, 2] and 3 not in removed:
            pytest.fail(f'unexpected removal {removed}')
    _, removed = destroy_related([1], 0.3, np.random.default_rng(0), model_of(points((0.5, 0.5))).cs)
    assert removed == [0]


def test_insertion_costs_scan():
    instance = seeded_instance(7, 9)
    model = model_of(instance)
    cs, cm = model.cs, model.cm
    order = list(initial_solution(instance, cs, cm).visits)
    partial, removed = order[1:], [int(cs.task_of[order[0]])]
    cand = cs.siblings[removed[0]]
    delta = insertion_costs(partial, cand, cs, cm)
    base = route_cost([0, *partial], cs, cm)
    for r, k in enumerate(cand):
        for p in range(len(partial) + 1):
            trial = partial[:p] + [int(k)] + partial[p:]
            assert delta[r, p] == pytest.approx(route_cost([0, *trial], cs, cm) - base, abs=1e-12)
    repaired = repair_greedy(partial, removed, cs, cm)
    best = min(route_cost([0, *partial[:p], int(k), *partial[p:]], cs, cm)
               for k in cand for p in range(len(partial) + 1))
    assert route_cost([0, *repaired], cs, cm) == pytest.approx(best, abs=1e-12)
    assert route_cost([0, *repaired], cs, cm) <= route_cost([0, *order], cs, cm) + 1e-12


def test_repair_identity():
    model = model_of(seeded_instance(5, 2))
    order = list(initial_solution(model.instance, model.cs, model.cm).visits)
    assert repair_greedy(order, [], model.cs, model.cm) == order
    assert repair_regret(order, [], model.cs, model.cm) == order


def test_regret_single_task_equals_greedy():
    instance = seeded_instance(9, 12)
    model = model_of(instance)
    order = list(initial_solution(instance, model.cs, model.cm).visits)
    partial, removed = order[:4] + order[5:], [int(model.cs.task_of[order[4]])]
    assert repair_regret(partial, removed, model.cs, model.cm) == repair_greedy(partial, removed, model.cs,
                                                                                model.cm)


def test_regret_valid():
    instance = seeded_instance(12, 5)
    model = model_of(instance)
    order = list(initial_solution(instance, model.cs, model.cm).visits)
    partial, removed = destroy_random(order, 0.5, np.random.default_rng(1), model.cs)
    repaired = repair_regret(partial, removed, model.cs, model.cm)
    assert validate_tour(Tour((0, *repaired)), model.cs).ok


def test_regret_avoids_greedy_trap():
    # A is the cheapest insertion but takes the only good edge of B; A has a near-equal second edge
    instance = points((1.0, 0.0), (1.0, 0.1), (0.5, 0.025), (0.5, 0.08))
    model = model_of(instance)
    cs, cm = model.cs, model.cm
    partial, removed = [1, 2], [2, 3]
    greedy = repair_greedy(partial, removed, cs, cm)
    regret = repair_regret(partial, removed, cs, cm)
    assert greedy == [4, 1, 2, 3]
    assert regret == [3, 1, 2, 4]
    f_greedy, f_regret = route_cost([0, *greedy], cs, cm), route_cost([0, *regret], cs, cm)
    assert f_regret < f_greedy - 0.01
    insertions = [list(p) for p in itertools.permutations([1, 2, 3, 4]) if p.index(1) < p.index(2)]
    assert len(insertions) == 12
    assert f_regret == pytest.approx(min(route_cost([0, *p], cs, cm) for p in insertions), abs=1e-12)


def test_destroy_repair_closure():
    rng = np.random.default_rng(7)
    for cycle in range(1000):
        if cycle % 50 == 0:
            model = model_of(seeded_instance(int(rng.integers(1, 16)), cycle))
            cs, cm = model.cs, model.cm
            order = list(initial_solution(model.instance, cs, cm).visits)
        rho = float(rng.uniform(0.05, 0.95))
        d_idx = int(rng.integers(3))
        if d_idx == 0:
            partial, removed = destroy_random(order, rho, rng, cs)
        elif d_idx == 1:
            partial, removed = destroy_worst(order, rho, cs, cm)
        else:
            partial, removed = destroy_related(order, rho, rng, cs)
        assert len(removed) == removal_count(len(order), rho) and len(partial) + len(removed) == len(order)
        assert sorted(removed + [int(cs.task_of[k]) for k in partial]) == list(range(cs.num_tasks))
        repaired = (repair_greedy if rng.random() < 0.5 else repair_regret)(partial, removed, cs, cm)
        assert validate_tour(Tour((0, *repaired)), cs).ok
        assert [k for k in repaired if k in partial] == partial
        order = repaired


def test_node_choice_points_unchanged():
    model = model_of(points((0.2, 0.3), (0.7, 0.1)))
    assert node_choice_optimization([1, 2], model.cs, model.cm) == [1, 2]


def test_node_choice_flips_line():
    instance = Instance(depot=(0.0, 0.5), lines=(LineTask(p1=(0.9, 0.5), p2=(0.1, 0.5)),),
                        points=(PointTask(loc=(1.0, 0.5)),))
    model = model_of(instance)
    assert node_choice_optimization([1, 3], model.cs, model.cm) == [2, 3]
    assert node_choice_optimization([2, 3], model.cs, model.cm) == [2, 3]


def test_node_choice_idempotent():
    instance = seeded_instance(12, 17)
    model = model_of(instance)
    order = list(initial_solution(instance, model.cs, model.cm).visits)
    once = node_choice_optimization(order, model.cs, model.cm, max_passes=50)
    assert node_choice_optimization(once, model.cs, model.cm, max_passes=50) == once
    assert route_cost([0, *once], model.cs, model.cm) <= route_cost([0, *order], model.cs, model.cm) + 1e-12


def sa_state(temperature, current_objective=1.0):
    return SaState(temperature=temperature, current=[], current_objective=current_objective, best=[],
                   best_objective=current_objective)


def test_accept_improving_consumes_nothing():
    rng = np.random.default_rng(0)
    state = rng.bit_generator.state
    assert accept(sa_state(0.0), 0.5, rng)
    assert rng.bit_generator.state == state


def test_accept_zero_temperature():
    assert not accept(sa_state(0.0), 1.5, np.random.default_rng(0))


def test_accept_probability():
    rng = np.random.default_rng(123)
    sa = sa_state(0.25)
    hits = sum(accept(sa, 1.25, rng) for _ in range(10000))
    assert hits / 10000 == pytest.approx(np.exp(-1), abs=0.02)


def test_update_weights():
    w = OperatorWeights.initial(3, 2)
    w.record(0, 1, 2.0)
    assert update_weights(w, 0.1).destroy_weights[0] == pytest.approx(1.1)
    assert np.allclose(update_weights(w, 0.0).destroy_weights, 1.0)
    updated = update_weights(w, 1.0)
    assert list(updated.destroy_weights) == pytest.approx([2.0, 1e-3, 1e-3])
    assert list(updated.repair_weights) == pytest.approx([1e-3, 2.0])
    assert updated.destroy_usage.sum() == 0


def test_run_operator_probabilities():
    instance = seeded_instance(12, 8)
    config = AlnsConfig(max_iterations=200, weight_update_period=10, reaction_factor=1.0, seed=3)
    trace = alns.run(instance, config).trace
    for t in trace:
        for key in ['destroy_probabilities', 'repair_probabilities']:
            assert min(t[key]) > 0
            assert sum(t[key]) == pytest.approx(1.0, abs=1e-12)
    assert trace[0]['destroy_probabilities'] == pytest.approx([1 / 3] * 3)
    assert any(t['destroy_probabilities'] != trace[0]['destroy_probabilities'] for t in trace)


def test_update_weights_stay_positive():
    rng = np.random.default_rng(2)
    w = OperatorWeights.initial(3, 2)
    for _ in range(500):
        for _ in range(int(rng.integers(0, 5))):
            w.record(int(rng.integers(3)), int(rng.integers(2)), float(rng.choice([3.0, 1.0, 0.2, 0.0])))
        w = update_weights(w, float(rng.uniform(0, 1)))
        assert (w.destroy_weights > 0).all() and (w.repair_weights > 0).all()
        p_destroy, p_repair = w.probabilities()
        assert p_destroy.sum() == pytest.approx(1.0) and p_repair.sum() == pytest.approx(1.0)


def test_config_validation():
    assert AlnsConfig.from_dict({'scores': [3, 1, 0.2, 0]}).scores == (3, 1, 0.2, 0)
    with pytest.raises(ValueError):
        AlnsConfig.from_dict({'iterations': 10})
    with pytest.raises(ValueError):
        AlnsConfig(destroy_ratio=1.5)


def test_run_monotone_and_deterministic():
    instance = seeded_instance(15, 31)
    config = AlnsConfig(max_iterations=60, seed=5)
    report = alns.run(instance, config)
    model = model_of(instance)
    initial = evaluate_tour(initial_solution(instance, model.cs, model.cm), model.cs, model.cm)
    assert report.objective <= initial + 1e-12
    assert report.objective == pytest.approx(evaluate_tour(report.tour, model.cs, model.cm), abs=1e-12)
    assert len(report.trace) == 60
    assert all(t['best'] <= t['current'] + 1e-9 for t in report.trace)
    again = alns.run(instance, config)
    assert again.tour == report.tour and again.trace == report.trace


@pytest.mark.slow
def test_quality_against_dp(oracle_suite):
    within = 0
    for instance in oracle_suite:
        optimum = solve_dp(instance).objective
        within += alns.run(instance, AlnsConfig()).objective <= optimum * 1.02 + 1e-9
    assert within >= 95
