"""Candidate expansion, asymmetric travel costs and tour evaluation.

Candidate index layout: depot 0, then ``omega`` candidates per area task, two directed candidates per line
task, one candidate per point task. Task ids follow the same order (areas, lines, points); the depot has
task id -1.
"""
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from cgrp.data.geometry import AREA, LINE, POINT, area_entry_exit_pairs
from cgrp.data.util import transform_points
from cgrp.errors import UnsupportedOmegaError, InvalidTourError

DEPOT = 0
DEPOT_TASK = -1
DEPOT_TYPE = -1
TOL = 1e-9


@dataclass(frozen=True)
class Candidate:
    index: int
    task_id: int
    task_type: int
    entry: Tuple[float, float]
    exit: Tuple[float, float]
    service_cost: float
    anchor: Tuple[float, float]

    @property
    def is_depot(self):
        return self.task_id == DEPOT_TASK


class CandidateSet:
    """All candidates of an instance with array views for vectorized cost lookups."""

    def __init__(self, candidates, n_a, n_l, n_p, omega):
        self.candidates = tuple(candidates)
        self.n_a, self.n_l, self.n_p, self.omega = n_a, n_l, n_p, omega
        self.entries = np.array([c.entry for c in candidates], dtype=np.float64)
        self.exits = np.array([c.exit for c in candidates], dtype=np.float64)
        self.anchors = np.array([c.anchor for c in candidates], dtype=np.float64)
        self.service_costs = np.array([c.service_cost for c in candidates], dtype=np.float64)
        self.task_of = np.array([c.task_id for c in candidates], dtype=np.int64)
        self.task_types = np.array([c.task_type for c in candidates], dtype=np.int64)
        siblings = [[] for _ in range(self.num_tasks)]
        for c in candidates[1:]:
            siblings[c.task_id].append(c.index)
        self.siblings = tuple(np.array(s, dtype=np.int64) for s in siblings)
        self.task_anchors = np.array([self.anchors[s[0]] for s in self.siblings], dtype=np.float64).reshape((-1, 2))
        for i, c in enumerate(candidates):
            assert c.index == i, 'candidate indices must be contiguous'

    @property
    def counts(self):
        return self.n_a, self.n_l, self.n_p, self.omega

    @property
    def num_tasks(self):
        return self.n_a + self.n_l + self.n_p

    def __len__(self):
        return len(self.candidates)

    def __getitem__(self, idx):
        return self.candidates[idx]


@dataclass(frozen=True, eq=False)
class CostMatrix:
    """Dense matrix ``d[i, j]`` of travel costs from exit(i) to entry(j)."""
    d: np.ndarray

    def __getitem__(self, idx):
        return self.d[idx]

    @property
    def shape(self):
        return self.d.shape


@dataclass(frozen=True)
class Tour:
    order: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, 'order', tuple(int(i) for i in self.order))

    def __len__(self):
        return len(self.order)

    @property
    def visits(self):
        return self.order[1:]

    def to_dict(self, objective=None):
        d = {'order': list(self.order)}
        if objective is not None:
            d['objective'] = float(objective)
        return d

    @staticmethod
    def from_dict(d):
        return Tour(d['order'])


@dataclass(frozen=True)
class ValidationResult:
    ok: bool
    violations: tuple = ()

    def __bool__(self):
        return self.ok

    def to_dict(self):
        return {'ok': self.ok, 'violations': list(self.violations)}


@dataclass(frozen=True, eq=False)
class CostModel:
    """An instance with its candidate set and cost matrix."""
    instance: object
    cs: CandidateSet
    cm: CostMatrix

    @staticmethod
    def from_instance(instance):
        cs = expand_candidates(instance)
        return CostModel(instance=instance, cs=cs, cm=build_cost_matrix(cs))


def expand_candidates(instance):
    candidates = [Candidate(index=DEPOT, task_id=DEPOT_TASK, task_type=DEPOT_TYPE, entry=instance.depot,
                            exit=instance.depot, service_cost=0.0, anchor=instance.depot)]
    task_id = 0
    for area in instance.areas:
        pairs = area_entry_exit_pairs(area)
        if instance.omega != len(pairs):
            raise UnsupportedOmegaError(instance.omega, len(pairs))
        for entry, exit_, cost in pairs:
            candidates.append(Candidate(index=len(candidates), task_id=task_id, task_type=AREA, entry=entry,
                                        exit=exit_, service_cost=float(cost), anchor=tuple(area.anchor)))
        task_id += 1
    for line in instance.lines:
        for entry, exit_ in [(line.p1, line.p2), (line.p2, line.p1)]:
            candidates.append(Candidate(index=len(candidates), task_id=task_id, task_type=LINE, entry=tuple(entry),
                                        exit=tuple(exit_), service_cost=line.length, anchor=line.anchor))
        task_id += 1
    for point in instance.points:
        candidates.append(Candidate(index=len(candidates), task_id=task_id, task_type=POINT, entry=tuple(point.loc),
                                    exit=tuple(point.loc), service_cost=0.0, anchor=tuple(point.loc)))
        task_id += 1
    return CandidateSet(candidates, instance.n_a, instance.n_l, instance.n_p, instance.omega)


def travel_cost(frm, to):
    """Euclidean distance from the exit of ``frm`` to the entry of ``to``."""
    diff = np.asarray(frm.exit, dtype=np.float64) - np.asarray(to.entry, dtype=np.float64)
    return float(np.sqrt((diff ** 2).sum()))


def build_cost_matrix(cs):
    diff = cs.exits[:, None, :] - cs.entries[None, :, :]
    return CostMatrix(d=np.sqrt((diff ** 2).sum(-1)))


def route_cost(order, cs, cm):
    """Objective of a depot-anchored candidate sequence without validation."""
    seq = np.asarray(order, dtype=np.int64)
    travel = cm.d[seq[:-1], seq[1:]].sum() + cm.d[seq[-1], seq[0]]
    return float(travel + cs.service_costs[seq[1:]].sum())


def validate_tour(tour, cs):
    violations = []
    order = list(tour.order)
    if len(order) == 0 or order[0] != DEPOT:
        violations.append({'kind': 'depot', 'position': 0, 'candidate': order[0] if order else None})
    if len(order) != cs.num_tasks + 1:
        violations.append({'kind': 'length', 'expected': cs.num_tasks + 1, 'actual': len(order)})
    seen = {}
    # a misplaced depot still leaves the task at position 0 visited
    start = 0 if len(order) > 0 and order[0] != DEPOT and 0 <= order[0] < len(cs) else 1
    for pos, c in enumerate(order[start:], start=start):
        if not 0 <= c < len(cs):
            violations.append({'kind': 'unknown candidate', 'position': pos, 'candidate': c})
            continue
        if c == DEPOT:
            violations.append({'kind': 'depot', 'position': pos, 'candidate': c})
            continue
        task = int(cs.task_of[c])
        if task in seen:
            violations.append({'kind': 'duplicate task', 'task_id': task, 'positions': [seen[task], pos]})
        else:
            seen[task] = pos
    missing = [t for t in range(cs.num_tasks) if t not in seen]
    if len(missing) > 0:
        violations.append({'kind': 'missing task', 'task_ids': missing})
    return ValidationResult(ok=len(violations) == 0, violations=tuple(violations))


def evaluate_tour(tour, cs, cm):
    """Total travel cost including the return to the depot plus all service costs."""
    result = validate_tour(tour, cs)
    if not result.ok:
        raise InvalidTourError(list(result.violations))
    return route_cost(tour.order, cs, cm)


def candidate_correspondence(cs_a, cs_b, alpha):
    """Map candidate indices of an instance to those of its view ``rotate_reflect(instance, alpha)``.

    A rigid transform keeps every task's candidate set but may relabel the corners of an area task, so
    siblings are matched by their transformed entry and exit points.
    """
    assert len(cs_a) == len(cs_b) and cs_a.num_tasks == cs_b.num_tasks, 'candidate sets differ in size'
    entries = transform_points(cs_a.entries, alpha)
    exits = transform_points(cs_a.exits, alpha)
    mapping = np.zeros(len(cs_a), dtype=np.int64)
    for t in range(cs_a.num_tasks):
        sib_a, sib_b = cs_a.siblings[t], cs_b.siblings[t]
        err = np.sqrt(((entries[sib_a][:, None] - cs_b.entries[sib_b][None]) ** 2).sum(-1)) + \
              np.sqrt(((exits[sib_a][:, None] - cs_b.exits[sib_b][None]) ** 2).sum(-1))
        mapping[sib_a] = sib_b[err.argmin(1)]
    return mapping
