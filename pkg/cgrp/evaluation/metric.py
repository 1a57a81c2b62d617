from dataclasses import dataclass

import numpy as np
import pandas as pd

COLUMNS = ['instance_id', 'solver', 'objective', 'gap_pct', 'time_s', 'seed']


def gap(objective, baseline):
    """Relative gap in percent: (Obj - Baseline) / Baseline * 100."""
    baseline = np.asarray(baseline, dtype=np.float64)
    if np.any(baseline <= 0):
        raise ValueError('Baseline objectives must be positive')
    return (np.asarray(objective, dtype=np.float64) - baseline) / baseline * 100


def results_frame(reports):
    """Table of solver reports sorted by (instance_id, solver), without gaps."""
    rows = [{'instance_id': r.instance_id, 'solver': r.solver, 'objective': r.objective, 'time_s': r.wall_time,
             'seed': r.seed} for r in reports]
    df = pd.DataFrame(rows, columns=['instance_id', 'solver', 'objective', 'time_s', 'seed'])
    return df.sort_values(['instance_id', 'solver'], kind='mergesort').reset_index(drop=True)


def add_gaps(df, baseline):
    """Per instance gap of every solver against the ``baseline`` solver's objective."""
    base = df[df['solver'] == baseline].set_index('instance_id')['objective']
    missing = set(df['instance_id']) - set(base.index)
    if len(missing) > 0:
        raise ValueError(f'Baseline {baseline} has no result for instances {sorted(missing)}')
    df = df.copy()
    df['gap_pct'] = gap(df['objective'].to_numpy(), df['instance_id'].map(base).to_numpy())
    return df[COLUMNS]


@dataclass
class BenchmarkSummary:
    baseline: str
    mean_objective: dict
    mean_gap_pct: dict
    total_time_s: dict
    num_instances: int

    def to_dict(self):
        return {'baseline': self.baseline, 'num_instances': self.num_instances,
                'mean_objective': self.mean_objective, 'mean_gap_pct': self.mean_gap_pct,
                'total_time_s': self.total_time_s}


def summarize(df, baseline):
    grouped = df.groupby('solver', sort=True)
    return BenchmarkSummary(baseline=baseline,
                            mean_objective={k: float(v) for k, v in grouped['objective'].mean().items()},
                            mean_gap_pct={k: float(v) for k, v in grouped['gap_pct'].mean().items()},
                            total_time_s={k: float(v) for k, v in grouped['time_s'].sum().items()},
                            num_instances=int(df['instance_id'].nunique()))
