"""Sequential tour construction as a Markov decision process.

The depot stays masked while a task is unvisited; once all tasks are served the episode is terminal and
the return edge is added by the objective, so the depot is never emitted as an action.
"""
from dataclasses import dataclass
from typing import NamedTuple, Tuple

import numpy as np

from cgrp.cost.model import CostModel, Tour, DEPOT, evaluate_tour, candidate_correspondence
from cgrp.data.augment import rotate_reflect, sample_view_alphas
from cgrp.errors import IllegalActionError, NotTerminalError


@dataclass(frozen=True, eq=False)
class EnvState:
    model: CostModel
    visited_tasks: np.ndarray
    masked_candidates: np.ndarray
    current: int
    step: int
    partial: Tuple[int, ...]

    @property
    def instance(self):
        return self.model.instance

    @property
    def terminal(self):
        return bool(self.visited_tasks.all())

    def feasible_mask(self):
        """Boolean mask of selectable candidates; empty selection once terminal."""
        if self.terminal:
            return np.zeros_like(self.masked_candidates)
        return ~self.masked_candidates


class Rollout(NamedTuple):
    tour: Tour
    objective: float
    log_probs: Tuple[float, ...]


def reset(instance, model=None):
    model = CostModel.from_instance(instance) if model is None else model
    n_cand = len(model.cs)
    masked = np.zeros(n_cand, dtype=bool)
    masked[DEPOT] = True
    return EnvState(model=model, visited_tasks=np.zeros(model.cs.num_tasks, dtype=bool), masked_candidates=masked,
                    current=DEPOT, step=0, partial=(DEPOT,))


def step(state, action):
    action = int(action)
    if state.terminal:
        raise IllegalActionError(action, 'episode is terminal')
    if not 0 <= action < len(state.masked_candidates) or state.masked_candidates[action]:
        raise IllegalActionError(action)
    cs = state.model.cs
    task = cs.task_of[action]
    visited = state.visited_tasks.copy()
    visited[task] = True
    masked = state.masked_candidates.copy()
    masked[cs.siblings[task]] = True
    masked[DEPOT] = not visited.all()
    return EnvState(model=state.model, visited_tasks=visited, masked_candidates=masked, current=action,
                    step=state.step + 1, partial=state.partial + (action,))


def terminal_reward(state):
    if not state.terminal:
        raise NotTerminalError(f'State at step {state.step} still has '
                               f'{int((~state.visited_tasks).sum())} unvisited tasks')
    return -evaluate_tour(Tour(state.partial), state.model.cs, state.model.cm)


def rollout(instance, policy, seed=0, model=None):
    """Construct a full tour with ``policy``; the policy draws from ``np.random.default_rng(seed)``."""
    rng = np.random.default_rng(seed)
    state = reset(instance, model)
    log_probs = []
    while not state.terminal:
        action, log_prob = policy.select(state, state.feasible_mask(), rng)
        state = step(state, action)
        log_probs.append(float(log_prob))
    return Rollout(tour=Tour(state.partial), objective=-terminal_reward(state), log_probs=tuple(log_probs))


def rollout_augmented(instance, policy, num_views=4, seed=0):
    """Roll out on every rigid-transform view and return the best tour in the original candidate indices."""
    alphas = sample_view_alphas(num_views, seed)
    model = CostModel.from_instance(instance)
    best, best_alpha, best_model = None, None, None
    for v, alpha in enumerate(alphas):
        view_model = model if v == 0 else CostModel.from_instance(rotate_reflect(instance, alpha))
        result = rollout(view_model.instance, policy, seed=[seed, v], model=view_model)
        if best is None or result.objective < best.objective - 1e-9:
            best, best_alpha, best_model = result, alpha, view_model
    mapping = candidate_correspondence(model.cs, best_model.cs, best_alpha)
    inverse = np.zeros_like(mapping)
    inverse[mapping] = np.arange(len(mapping))
    tour = Tour(inverse[list(best.tour.order)])
    return Rollout(tour=tour, objective=evaluate_tour(tour, model.cs, model.cm), log_probs=best.log_probs)
