"""Multi-restart alternating optimization.

Each restart builds a (perturbed) greedy route, then alternates an asymmetric local search over the visiting
order with node-choice refinement over the candidate assignment. Restart ``r`` draws from
``np.random.default_rng([seed, r])``, so restarts are independent and may run in worker processes.
"""
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, asdict

import numpy as np

from cgrp.config import from_dict
from cgrp.cost.model import CostModel, Tour, TOL, evaluate_tour, route_cost
from cgrp.solver.alns import greedy_construction, node_choice_optimization
from cgrp.solver.report import SolverReport

MAX_SEGMENT = 3


@dataclass(frozen=True)
class AltOptConfig:
    restarts: int = 20
    alternations_per_restart: int = 3
    refine_passes: int = 5
    randomization_scale: float = 0.5
    workers: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.restarts < 1 or self.alternations_per_restart < 1 or self.refine_passes < 1:
            raise ValueError(f'Invalid AltOptConfig: restarts, alternations and passes must be >= 1')
        if self.randomization_scale < 0 or self.workers < 1 or self.seed < 0:
            raise ValueError('randomization_scale and seed must be non-negative, workers positive')

    @staticmethod
    def from_dict(d):
        return from_dict(AltOptConfig, d)


def noise_amplitude(restart_index, restarts, scale):
    return restart_index * scale / restarts


def construct_route(instance, cs, cm, restart_index, rng, restarts=20, randomization_scale=0.5):
    """Greedy nearest-candidate route with multiplicative score noise growing with the restart index.

    Restart 0 draws nothing from ``rng`` and equals the ALNS initial solution.
    """
    amp = noise_amplitude(restart_index, restarts, randomization_scale)
    noise = None
    if amp > 0:
        def noise(n):
            return 1 + amp * rng.uniform(-1, 1, size=n)
    return Tour((0, *greedy_construction(cs, cm, noise)))


def _or_opt_move(seq, d):
    n = len(seq) - 1
    for i in range(1, n + 1):
        for length in range(1, MAX_SEGMENT + 1):
            if i + length - 1 > n:
                break
            a, s1, s2 = seq[i - 1], seq[i], seq[i + length - 1]
            b = seq[i + length] if i + length <= n else 0
            gain = d[a, s1] + d[s2, b] - d[a, b]
            rest = np.concatenate([seq[:i], seq[i + length:]])
            nxt = np.roll(rest, -1)
            delta = d[rest, s1] + d[s2, nxt] - d[rest, nxt] - gain
            delta[i - 1] = np.inf
            hits = np.flatnonzero(delta < -TOL)
            if len(hits) > 0:
                p = int(hits[0])
                return np.concatenate([rest[:p + 1], seq[i:i + length], rest[p + 1:]])
    return None


def _segment_swap_move(seq, d):
    """Directed 3-opt: exchange the adjacent segments ``seq[i:j]`` and ``seq[j:k]`` without reversing them."""
    n = len(seq) - 1
    ext = np.append(seq, 0)
    for i in range(1, n):
        j, k = np.meshgrid(np.arange(i + 1, n + 1), np.arange(i + 2, n + 2), indexing='ij')
        valid = k > j
        removed = d[ext[i - 1], ext[i]] + d[ext[j - 1], ext[j]] + d[ext[k - 1], ext[k]]
        added = d[ext[i - 1], ext[j]] + d[ext[k - 1], ext[i]] + d[ext[j - 1], ext[k]]
        delta = np.where(valid, added - removed, np.inf)
        hits = np.flatnonzero(delta.ravel() < -TOL)
        if len(hits) > 0:
            jj, kk = int(j.ravel()[hits[0]]), int(k.ravel()[hits[0]])
            return np.concatenate([seq[:i], seq[jj:kk], seq[i:jj], seq[kk:]])
    return None


def improve_route_asymmetric(order, cm, cs=None):
    """First-improvement local search over the visiting order with the candidate choices fixed.

    Or-opt relocations of segments of 1 to 3 visits are tried first, then directed segment swaps. Scans are
    position-major and segment-length-minor, the depot stays in front and no segment is reversed.
    """
    seq = np.array([0, *order], dtype=np.int64)
    d = cm.d
    while True:
        moved = _or_opt_move(seq, d)
        if moved is None:
            moved = _segment_swap_move(seq, d)
        if moved is None:
            break
        seq = moved
    return [int(k) for k in seq[1:]]


def refine_node_choices(order, cs, cm, passes=5):
    return node_choice_optimization(order, cs, cm, max_passes=passes)


def _run_restart(model, config, restart_index):
    cs, cm = model.cs, model.cm
    rng = np.random.default_rng([config.seed, restart_index])
    amp = noise_amplitude(restart_index, config.restarts, config.randomization_scale)
    order = list(construct_route(model.instance, cs, cm, restart_index, rng, config.restarts,
                                 config.randomization_scale).visits)
    objectives = [route_cost([0, *order], cs, cm)]
    for _ in range(config.alternations_per_restart):
        order = improve_route_asymmetric(order, cm, cs)
        order = refine_node_choices(order, cs, cm, config.refine_passes)
        objectives.append(route_cost([0, *order], cs, cm))
    return order, objectives[-1], {'restart': restart_index, 'amplitude': amp, 'objectives': objectives}


def _restart_job(args):
    instance, config, restart_index = args
    return _run_restart(CostModel.from_instance(instance), config, restart_index)


def run(instance, config=AltOptConfig(), model=None):
    """Run all restarts and keep the cheapest tour, ties to the earliest restart."""
    start = time.perf_counter()
    model = CostModel.from_instance(instance) if model is None else model
    if config.workers > 1:
        with ProcessPoolExecutor(max_workers=config.workers) as executor:
            results = list(executor.map(_restart_job, [(instance, config, r) for r in range(config.restarts)]))
    else:
        results = [_run_restart(model, config, r) for r in range(config.restarts)]

    best_order, best_obj, trace = None, np.inf, []
    for order, objective, restart_trace in results:
        trace.append(restart_trace)
        if objective < best_obj - TOL:
            best_order, best_obj = order, objective
        logging.debug('altopt restart %d: %.6f' % (restart_trace['restart'], objective))

    tour = Tour((0, *best_order))
    objective = evaluate_tour(tour, model.cs, model.cm)
    wall_time = time.perf_counter() - start
    logging.info('altopt: objective %.6f in %.3fs' % (objective, wall_time))
    return SolverReport(solver='altopt', objective=objective, tour=tour, wall_time=wall_time,
                        iterations=config.restarts * config.alternations_per_restart, seed=config.seed,
                        config=asdict(config), trace=trace)
