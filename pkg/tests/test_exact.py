import pytest
from conftest import area_instance, line_instance, point_instance, seeded_instance

from cgrp.cost.model import CostModel, evaluate_tour, validate_tour
from cgrp.data.dataset import preset_spec
from cgrp.data.geometry import generate_instance
from cgrp.errors import InstanceTooLargeError
from cgrp.solver import exact
from cgrp.solver.exact import solve_bruteforce, solve_dp


@pytest.mark.parametrize('solve', [solve_bruteforce, solve_dp])
def test_single_task_closed_forms(solve):
    assert solve(point_instance()).objective == pytest.approx(1.414214, abs=1e-6)
    assert solve(line_instance()).objective == pytest.approx(3.414214, abs=1e-6)
    # nearest corner (0.3, 0.425) exits at (0.3, 0.575): out, 4 sweeps of 0.4, back
    expected = (0.3 ** 2 + 0.425 ** 2) ** 0.5 + 1.6 + (0.3 ** 2 + 0.575 ** 2) ** 0.5
    assert solve(area_instance()).objective == pytest.approx(expected, abs=1e-9)


def test_bruteforce_matches_dp(six_task_instance):
    bf = solve_bruteforce(six_task_instance)
    dp = solve_dp(six_task_instance)
    assert bf.objective == pytest.approx(dp.objective, abs=1e-9)
    assert bf.tour == dp.tour
    model = CostModel.from_instance(six_task_instance)
    assert evaluate_tour(dp.tour, model.cs, model.cm) == pytest.approx(dp.objective, abs=1e-12)
    assert bf.nodes_expanded > 0 and dp.nodes_expanded > 0


def test_dp_twelve_tasks():
    instance = seeded_instance(12, 8)
    result = solve_dp(instance)
    model = CostModel.from_instance(instance)
    assert validate_tour(result.tour, model.cs).ok


def test_guards():
    with pytest.raises(InstanceTooLargeError) as e:
        solve_bruteforce(seeded_instance(8, 0))
    assert e.value.details()['num_tasks'] == 8
    with pytest.raises(InstanceTooLargeError):
        solve_dp(seeded_instance(17, 0, n_a_max=1, n_l_max=1))


def test_run_report(six_task_instance):
    report = exact.run(six_task_instance, 'exact-dp', seed=3)
    assert report.solver == 'exact-dp' and report.seed == 3
    assert report.wall_time >= 0
    with pytest.raises(ValueError):
        exact.run(six_task_instance, 'exact-x')


@pytest.mark.slow
def test_oracle_equivalence_sweep():
    spec = preset_spec('oracle7')
    for seed in range(100):
        instance = generate_instance(spec, seed)
        assert solve_bruteforce(instance).objective == pytest.approx(solve_dp(instance).objective, abs=1e-9)
