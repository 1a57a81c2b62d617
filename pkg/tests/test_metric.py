import pandas as pd
import pytest

from cgrp.cost.model import Tour
from cgrp.evaluation.metric import COLUMNS, add_gaps, gap, results_frame, summarize
from cgrp.solver.report import SolverReport


def report(instance_id, solver, objective, wall_time=0.5, seed=0):
    return SolverReport(solver=solver, objective=objective, tour=Tour((0, 1)), wall_time=wall_time, iterations=1,
                        seed=seed, instance_id=instance_id)


def test_gap():
    assert gap(6.5, 6.0) == pytest.approx(8.333333, abs=1e-6)
    assert gap(5.0, 5.0) == 0
    with pytest.raises(ValueError):
        gap(1.0, 0.0)


def test_results_sorted_and_gaps():
    reports = [report(1, 'alns', 4.2), report(0, 'exact-dp', 2.0), report(1, 'exact-dp', 4.0),
               report(0, 'alns', 2.5)]
    df = add_gaps(results_frame(reports), 'exact-dp')
    assert list(df.columns) == COLUMNS
    assert list(zip(df['instance_id'], df['solver'])) == [(0, 'alns'), (0, 'exact-dp'), (1, 'alns'),
                                                          (1, 'exact-dp')]
    assert df['gap_pct'].tolist() == pytest.approx([25.0, 0.0, 5.0, 0.0])


def test_missing_baseline():
    with pytest.raises(ValueError):
        add_gaps(results_frame([report(0, 'alns', 1.0)]), 'exact-dp')


def test_summary():
    reports = [report(0, 'alns', 2.5, 1.0), report(0, 'exact-dp', 2.0, 0.25), report(1, 'alns', 4.2, 2.0),
               report(1, 'exact-dp', 4.0, 0.25)]
    summary = summarize(add_gaps(results_frame(reports), 'exact-dp'), 'exact-dp')
    assert summary.num_instances == 2
    assert summary.mean_objective['alns'] == pytest.approx(3.35)
    assert summary.mean_gap_pct == pytest.approx({'alns': 15.0, 'exact-dp': 0.0})
    assert summary.total_time_s == pytest.approx({'alns': 3.0, 'exact-dp': 0.5})
    assert summary.to_dict()['baseline'] == 'exact-dp'


def test_csv_gap_consistency(tmp_path):
    reports = [report(i, s, o) for i, (a, b) in enumerate([(3.1, 3.0), (7.7, 7.0)])
               for s, o in [('alns', a), ('exact-dp', b)]]
    path = tmp_path / 'report.csv'
    add_gaps(results_frame(reports), 'exact-dp').to_csv(path, index=False, lineterminator='\r\n')
    df = pd.read_csv(path)
    base = df[df['solver'] == 'exact-dp'].set_index('instance_id')['objective']
    recomputed = (df['objective'] - df['instance_id'].map(base)) / df['instance_id'].map(base) * 100
    assert (recomputed - df['gap_pct']).abs().max() < 1e-9
