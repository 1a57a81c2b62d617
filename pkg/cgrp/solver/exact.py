"""Exact solvers for small instances.

Both solvers break ties towards the lexicographically smallest candidate sequence among tours within
``TOL`` of the optimum, so their tours can be compared directly.
"""
import itertools
import logging
import time
from dataclasses import dataclass

import numpy as np

from cgrp.cost.model import CostModel, Tour, TOL, evaluate_tour
from cgrp.errors import InstanceTooLargeError
from cgrp.solver.report import SolverReport

BRUTEFORCE_MAX_TASKS = 7
DP_MAX_TASKS = 16
DP_MAX_CANDIDATES = 64


@dataclass(frozen=True)
class ExactResult:
    tour: Tour
    objective: float
    nodes_expanded: int


def _lexmin(rows):
    return rows[np.lexsort(rows.T[::-1])[0]]


def _lex_less(a, b):
    return tuple(a) < tuple(b)


def solve_bruteforce(instance, model=None):
    """Enumerate every task permutation and every candidate assignment."""
    model = CostModel.from_instance(instance) if model is None else model
    cs, d = model.cs, model.cm.d
    n = cs.num_tasks
    if n > BRUTEFORCE_MAX_TASKS:
        raise InstanceTooLargeError('exact-bf', n, len(cs) - 1, {'tasks': BRUTEFORCE_MAX_TASKS})

    best_obj, best_seq, expanded = np.inf, None, 0
    for perm in itertools.permutations(range(n)):
        seqs = np.array(list(itertools.product(*[cs.siblings[t] for t in perm])), dtype=np.int64)
        costs = d[0, seqs[:, 0]] + d[seqs[:, -1], 0] + cs.service_costs[seqs].sum(1)
        if n > 1:
            costs = costs + d[seqs[:, :-1], seqs[:, 1:]].sum(1)
        expanded += len(seqs)
        m = costs.min()
        if m < best_obj - TOL:
            best_obj, best_seq = m, _lexmin(seqs[costs <= m + TOL])
        elif m <= best_obj + TOL:
            cand = _lexmin(seqs[costs <= best_obj + TOL])
            if _lex_less(cand, best_seq):
                best_seq = cand
            best_obj = min(best_obj, m)

    tour = Tour((0, *best_seq))
    return ExactResult(tour=tour, objective=evaluate_tour(tour, cs, model.cm), nodes_expanded=expanded)


def solve_dp(instance, model=None):
    """Dynamic program over (visited task set, last candidate).

    ``g[S, j]`` is the cheapest completion from the exit of candidate ``j`` with the tasks in ``S`` already
    served: visit the remaining tasks (service costs included) and return to the depot. The optimum is
    ``min_k d[0, k] + c[k] + g[{task(k)}, k]``; the tour is rebuilt forwards, always taking the smallest
    candidate index that still attains the optimum.
    """
    model = CostModel.from_instance(instance) if model is None else model
    cs, d = model.cs, model.cm.d
    n, n_cand = cs.num_tasks, len(cs)
    if n > DP_MAX_TASKS or n_cand - 1 > DP_MAX_CANDIDATES:
        raise InstanceTooLargeError('exact-dp', n, n_cand - 1,
                                    {'tasks': DP_MAX_TASKS, 'candidates': DP_MAX_CANDIDATES})

    cand = np.arange(1, n_cand)
    bit = np.zeros(n_cand, dtype=np.int64)
    bit[1:] = 1 << cs.task_of[1:]
    c = cs.service_costs
    full = (1 << n) - 1

    g = np.full((1 << n, n_cand), np.inf)
    g[full, cand] = d[cand, 0]
    expanded = len(cand)
    for s in range(full - 1, 0, -1):
        inside = (bit[cand] & s) != 0
        last, nxt = cand[inside], cand[~inside]
        step = c[nxt] + g[s | bit[nxt], nxt]
        g[s, last] = (d[np.ix_(last, nxt)] + step[None, :]).min(1)
        expanded += len(last)

    def completion(s, frm, options):
        return d[frm, options] + c[options] + g[s | bit[options], options]

    start = completion(0, 0, cand)
    best = start.min()
    order, s, cur = [0], 0, 0
    remaining = best
    while s != full:
        options = cand[(bit[cand] & s) == 0]
        values = completion(s, cur, options)
        k = options[np.flatnonzero(values <= remaining + TOL)[0]]
        remaining -= d[cur, k] + c[k]
        order.append(int(k))
        s |= bit[k]
        cur = k

    tour = Tour(order)
    return ExactResult(tour=tour, objective=evaluate_tour(tour, cs, model.cm), nodes_expanded=expanded)


def run(instance, algo='exact-dp', seed=0):
    solve_f = {'exact-dp': solve_dp, 'exact-bf': solve_bruteforce}
    if algo not in solve_f:
        raise ValueError(f'Invalid exact solver: {algo}, must be in {list(solve_f)}')
    start = time.perf_counter()
    result = solve_f[algo](instance)
    wall_time = time.perf_counter() - start
    logging.info('%s: objective %.6f in %.3fs (%d nodes)' % (algo, result.objective, wall_time,
                                                             result.nodes_expanded))
    return SolverReport(solver=algo, objective=result.objective, tour=result.tour, wall_time=wall_time,
                        iterations=result.nodes_expanded, seed=seed, config={})
