"""Adaptive large neighborhood search.

Solutions are handled as visit lists: the candidate indices after the depot, i.e. ``tour.order[1:]``.
All randomness of a run comes from one ``np.random.default_rng(seed)``; per iteration the draws are, in
order: destroy roulette, repair roulette, the destroy operator's own draws, and the acceptance draw (only
for non-improving candidates).
"""
import logging
import math
import time
from dataclasses import dataclass, asdict
from typing import Tuple

import numpy as np

from cgrp.config import from_dict
from cgrp.cost.model import CostModel, Tour, TOL, evaluate_tour, route_cost
from cgrp.solver.report import SolverReport


@dataclass(frozen=True)
class AlnsConfig:
    max_iterations: int = 500
    destroy_ratio: float = 0.3
    init_temp_factor: float = 0.05
    cooling_rate: float = 0.98
    reaction_factor: float = 0.1
    weight_update_period: int = 100
    node_choice_period: int = 10
    node_choice_passes: int = 5
    # new global best, improved current, accepted worse, rejected
    scores: Tuple[float, float, float, float] = (3.0, 1.0, 0.2, 0.0)
    weight_floor: float = 1e-3
    seed: int = 0

    def __post_init__(self):
        if not 0 < self.destroy_ratio < 1:
            raise ValueError(f'Invalid destroy_ratio: {self.destroy_ratio}, must be in (0, 1)')
        if not 0 < self.cooling_rate < 1:
            raise ValueError(f'Invalid cooling_rate: {self.cooling_rate}, must be in (0, 1)')
        if not 0 <= self.reaction_factor <= 1:
            raise ValueError(f'Invalid reaction_factor: {self.reaction_factor}, must be in [0, 1]')
        if min(self.weight_update_period, self.node_choice_period, self.node_choice_passes) < 1:
            raise ValueError('Periods and passes must be >= 1')
        if self.max_iterations < 0 or self.init_temp_factor < 0:
            raise ValueError('max_iterations and init_temp_factor must be non-negative')
        if len(self.scores) != 4 or self.weight_floor <= 0:
            raise ValueError(f'Invalid scores {self.scores} or weight_floor {self.weight_floor}')

    @staticmethod
    def from_dict(d):
        return from_dict(AlnsConfig, d)


@dataclass(frozen=True, eq=False)
class OperatorWeights:
    destroy_weights: np.ndarray
    repair_weights: np.ndarray
    destroy_scores: np.ndarray
    repair_scores: np.ndarray
    destroy_usage: np.ndarray
    repair_usage: np.ndarray

    @staticmethod
    def initial(n_destroy=3, n_repair=2):
        return OperatorWeights(np.ones(n_destroy), np.ones(n_repair), np.zeros(n_destroy), np.zeros(n_repair),
                               np.zeros(n_destroy, dtype=np.int64), np.zeros(n_repair, dtype=np.int64))

    def probabilities(self):
        return self.destroy_weights / self.destroy_weights.sum(), self.repair_weights / self.repair_weights.sum()

    def record(self, destroy_idx, repair_idx, score):
        self.destroy_scores[destroy_idx] += score
        self.repair_scores[repair_idx] += score
        self.destroy_usage[destroy_idx] += 1
        self.repair_usage[repair_idx] += 1


@dataclass
class SaState:
    temperature: float
    current: list
    current_objective: float
    best: list
    best_objective: float


def update_weights(weights, phi, floor=1e-3):
    """Blend the weights with the mean operator scores and reset the score accumulators."""
    def blend(w, s, u):
        return np.maximum((1 - phi) * w + phi * s / np.maximum(1, u), floor)

    return OperatorWeights(blend(weights.destroy_weights, weights.destroy_scores, weights.destroy_usage),
                           blend(weights.repair_weights, weights.repair_scores, weights.repair_usage),
                           np.zeros_like(weights.destroy_scores), np.zeros_like(weights.repair_scores),
                           np.zeros_like(weights.destroy_usage), np.zeros_like(weights.repair_usage))


def roulette(weights, rng):
    return int(rng.choice(len(weights), p=weights / weights.sum()))


def removal_count(num_tasks, rho):
    return min(num_tasks, max(1, math.ceil(rho * num_tasks - TOL)))


def greedy_construction(cs, cm, noise=None):
    """Append the unvisited candidate minimizing travel plus service cost, ties to the smallest index.

    ``noise(n)`` optionally returns multiplicative factors for the ``n`` scores of one step.
    """
    d, c = cm.d, cs.service_costs
    visited = np.zeros(cs.num_tasks, dtype=bool)
    options = np.arange(1, len(cs))
    cur, order = 0, []
    for _ in range(cs.num_tasks):
        options = options[~visited[cs.task_of[options]]]
        scores = d[cur, options] + c[options]
        if noise is not None:
            scores = scores * noise(len(options))
        cur = int(options[np.argmin(scores)])
        visited[cs.task_of[cur]] = True
        order.append(cur)
    return order


def initial_solution(instance, cs, cm, seed=None):
    """Greedy nearest-candidate tour. Deterministic; ``seed`` is accepted for interface symmetry."""
    return Tour((0, *greedy_construction(cs, cm)))


def _split(order, positions, cs):
    positions = set(int(p) for p in positions)
    partial = [k for i, k in enumerate(order) if i not in positions]
    removed = sorted(int(cs.task_of[order[i]]) for i in positions)
    return partial, removed


def destroy_random(order, rho, rng, cs):
    k = removal_count(len(order), rho)
    positions = rng.choice(len(order), size=k, replace=False)
    return _split(order, positions, cs)


def detour_costs(order, cs, cm):
    seq = np.array([0, *order, 0], dtype=np.int64)
    prev, cur, nxt = seq[:-2], seq[1:-1], seq[2:]
    d = cm.d
    return d[prev, cur] + d[cur, nxt] + cs.service_costs[cur] - d[prev, nxt]


def destroy_worst(order, rho, cs, cm):
    k = removal_count(len(order), rho)
    detours = detour_costs(order, cs, cm)
    tasks = cs.task_of[np.asarray(order, dtype=np.int64)]
    ranking = np.lexsort((tasks, -detours))
    return _split(order, ranking[:k], cs)


def destroy_related(order, rho, rng, cs):
    k = removal_count(len(order), rho)
    tasks = cs.task_of[np.asarray(order, dtype=np.int64)]
    seed_pos = int(rng.integers(len(order)))
    anchors = cs.task_anchors[tasks]
    dist = np.sqrt(((anchors - anchors[seed_pos]) ** 2).sum(-1))
    dist[seed_pos] = -1
    ranking = np.lexsort((tasks, dist))
    return _split(order, ranking[:k], cs)


def insertion_costs(partial, candidates, cs, cm):
    """Matrix of insertion costs of ``candidates`` (rows) at every position (columns) of ``partial``.

    Position ``p`` inserts before ``partial[p]``; the last position appends before the return to the depot.
    """
    seq = np.array([0, *partial, 0], dtype=np.int64)
    prev, nxt = seq[:-1], seq[1:]
    d = cm.d
    cand = np.asarray(candidates, dtype=np.int64)
    return d[np.ix_(prev, cand)].T + d[np.ix_(cand, nxt)] + cs.service_costs[cand][:, None] - d[prev, nxt][None, :]


def _task_candidates(tasks, cs):
    return np.concatenate([cs.siblings[t] for t in tasks])


def repair_greedy(partial, removed, cs, cm):
    """Insert the cheapest (task, candidate, position) triple until every task is back."""
    partial, removed = list(partial), sorted(removed)
    while len(removed) > 0:
        cand = _task_candidates(removed, cs)
        delta = insertion_costs(partial, cand, cs, cm)
        row, pos = np.unravel_index(np.argmin(delta), delta.shape)
        k = int(cand[row])
        partial.insert(int(pos), k)
        removed.remove(int(cs.task_of[k]))
    return partial


def repair_regret(partial, removed, cs, cm):
    """Regret-2 insertion: insert the task whose best triple beats its second best by the widest margin.

    A task with a single feasible triple has infinite regret. Ties go to the lowest task id.
    """
    partial, removed = list(partial), sorted(removed)
    while len(removed) > 0:
        best_regret, choice = -np.inf, None
        for t in removed:
            delta = insertion_costs(partial, cs.siblings[t], cs, cm)
            flat = delta.ravel()
            first = int(np.argmin(flat))
            if flat.size == 1:
                regret = np.inf
            else:
                regret = np.partition(flat, 1)[1] - flat[first]
            if regret > best_regret:
                row, pos = np.unravel_index(first, delta.shape)
                best_regret, choice = regret, (t, int(cs.siblings[t][row]), int(pos))
        t, k, pos = choice
        partial.insert(pos, k)
        removed.remove(t)
    return partial


def node_choice_optimization(order, cs, cm, max_passes=5):
    """Keep the task sequence and switch each position to its cheapest sibling candidate.

    A switch happens only on strict improvement of ``d[prev, k] + d[k, next] + c[k]``; sweeps repeat until
    a pass changes nothing or ``max_passes`` is reached.
    """
    order = list(order)
    d, c = cm.d, cs.service_costs
    for _ in range(max_passes):
        improved = False
        for i, k in enumerate(order):
            prev = order[i - 1] if i > 0 else 0
            nxt = order[i + 1] if i + 1 < len(order) else 0
            sibs = cs.siblings[cs.task_of[k]]
            local = d[prev, sibs] + d[sibs, nxt] + c[sibs]
            j = int(np.argmin(local))
            if local[j] < d[prev, k] + d[k, nxt] + c[k] - TOL:
                order[i] = int(sibs[j])
                improved = True
        if not improved:
            break
    return order


def accept(sa, candidate_objective, rng):
    """Simulated annealing acceptance; improving candidates never consume a random draw."""
    if candidate_objective < sa.current_objective:
        return True
    if sa.temperature <= 0:
        return False
    p = math.exp(-(candidate_objective - sa.current_objective) / sa.temperature)
    return bool(rng.random() < p)


def cool(sa, tau):
    sa.temperature *= tau


DESTROY = ['random', 'worst', 'related']
REPAIR = ['greedy', 'regret']


def _destroy(idx, order, config, rng, cs, cm):
    if idx == 0:
        return destroy_random(order, config.destroy_ratio, rng, cs)
    if idx == 1:
        return destroy_worst(order, config.destroy_ratio, cs, cm)
    return destroy_related(order, config.destroy_ratio, rng, cs)


def _repair(idx, partial, removed, cs, cm):
    return repair_greedy(partial, removed, cs, cm) if idx == 0 else repair_regret(partial, removed, cs, cm)


def run(instance, config=AlnsConfig(), model=None):
    """Run ALNS from the greedy initial solution.

    Args:
        instance: Instance to solve.
        config: AlnsConfig; ``config.seed`` seeds the whole run.
        model: optional precomputed CostModel of the instance.

    Returns:
        SolverReport with the best tour and a per-iteration trace.
    """
    start = time.perf_counter()
    model = CostModel.from_instance(instance) if model is None else model
    cs, cm = model.cs, model.cm
    rng = np.random.default_rng(config.seed)
    s_best, s_improved, s_accepted, s_rejected = config.scores

    current = list(initial_solution(instance, cs, cm, config.seed).visits)
    f0 = route_cost([0, *current], cs, cm)
    sa = SaState(temperature=config.init_temp_factor * f0, current=current, current_objective=f0,
                 best=list(current), best_objective=f0)
    weights = OperatorWeights.initial(len(DESTROY), len(REPAIR))
    trace = []

    for it in range(1, config.max_iterations + 1):
        p_destroy, p_repair = weights.probabilities()
        d_idx = roulette(weights.destroy_weights, rng)
        r_idx = roulette(weights.repair_weights, rng)
        partial, removed = _destroy(d_idx, sa.current, config, rng, cs, cm)
        candidate = _repair(r_idx, partial, removed, cs, cm)
        if it % config.node_choice_period == 0:
            candidate = node_choice_optimization(candidate, cs, cm, config.node_choice_passes)
        f = route_cost([0, *candidate], cs, cm)

        if accept(sa, f, rng):
            if f < sa.best_objective - TOL:
                score = s_best
                sa.best, sa.best_objective = list(candidate), f
            elif f < sa.current_objective - TOL:
                score = s_improved
            else:
                score = s_accepted
            sa.current, sa.current_objective = candidate, f
        else:
            score = s_rejected
        weights.record(d_idx, r_idx, score)
        trace.append({'iteration': it, 'candidate': f, 'current': sa.current_objective, 'best': sa.best_objective,
                      'destroy': DESTROY[d_idx], 'repair': REPAIR[r_idx], 'temperature': sa.temperature,
                      'destroy_probabilities': p_destroy.tolist(), 'repair_probabilities': p_repair.tolist()})
        cool(sa, config.cooling_rate)
        if it % config.weight_update_period == 0:
            weights = update_weights(weights, config.reaction_factor, config.weight_floor)
            logging.debug('ALNS iteration %d: destroy weights %s, repair weights %s' %
                          (it, np.round(weights.destroy_weights, 4), np.round(weights.repair_weights, 4)))

    tour = Tour((0, *sa.best))
    objective = evaluate_tour(tour, cs, cm)
    wall_time = time.perf_counter() - start
    logging.info('alns: objective %.6f (initial %.6f) in %.3fs' % (objective, f0, wall_time))
    return SolverReport(solver='alns', objective=objective, tour=tour, wall_time=wall_time,
                        iterations=config.max_iterations, seed=config.seed, config=_config_dict(config),
                        trace=trace)


def _config_dict(config):
    d = asdict(config)
    d['scores'] = list(d['scores'])
    return d
