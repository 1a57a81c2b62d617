"""Task geometries, instance sampling and zigzag coverage of area tasks.

Instances are sampled with numpy's PCG64 bit generator. The root ``np.random.SeedSequence(seed)`` is
spawned into one stream per purpose (composition, depot, areas, lines, points), so changing the number of
tasks of one category never perturbs the draws of another.
"""
import logging
from dataclasses import dataclass, field
from typing import Tuple

import numpy as np

from cgrp.data.util import pairwise_distances
from cgrp.errors import GenerationError

AREA, LINE, POINT = 0, 1, 2
TASK_TYPES = {AREA: 'area', LINE: 'line', POINT: 'point'}

# (length side, width side) signs of the four corners
CORNER_SIGNS = ((-1, -1), (-1, 1), (1, -1), (1, 1))
# floor(W / gamma) is evaluated with this slack; 0.15 / 0.05 is 2.9999999999999996 in binary floating point
SWEEP_EPS = 1e-9
UNIT_EPS = 1e-12


def _pt(xy):
    return float(xy[0]), float(xy[1])


def in_unit_square(xy, eps=UNIT_EPS):
    xy = np.asarray(xy, dtype=np.float64)
    return bool(np.all(xy >= -eps) and np.all(xy <= 1 + eps))


@dataclass(frozen=True)
class PointTask:
    loc: Tuple[float, float]

    @property
    def anchor(self):
        return self.loc


@dataclass(frozen=True)
class LineTask:
    p1: Tuple[float, float]
    p2: Tuple[float, float]

    @property
    def length(self):
        return float(np.sqrt(((np.asarray(self.p1) - np.asarray(self.p2)) ** 2).sum()))

    @property
    def anchor(self):
        return (0.5 * (self.p1[0] + self.p2[0]), 0.5 * (self.p1[1] + self.p2[1]))


@dataclass(frozen=True)
class AreaTask:
    """Rotated rectangle covered by a zigzag sweep.

    ``length`` runs along the orientation ``beta``, ``width`` across it. The sweeps are parallel to the
    long edges, ``detection_range`` apart.
    """
    anchor: Tuple[float, float]
    length: float
    width: float
    beta: float
    detection_range: float


@dataclass(frozen=True)
class Instance:
    depot: Tuple[float, float]
    points: Tuple[PointTask, ...] = ()
    lines: Tuple[LineTask, ...] = ()
    areas: Tuple[AreaTask, ...] = ()
    omega: int = 4
    seed: int = 0
    gamma: float = 0.05
    # False once a rigid transform moved geometry out of [0, 1]^2
    unit_square: bool = True

    @property
    def n_a(self):
        return len(self.areas)

    @property
    def n_l(self):
        return len(self.lines)

    @property
    def n_p(self):
        return len(self.points)

    @property
    def num_tasks(self):
        return self.n_a + self.n_l + self.n_p

    def task_types(self):
        return [AREA] * self.n_a + [LINE] * self.n_l + [POINT] * self.n_p

    def task_anchors(self):
        """Anchors in task-id order: areas, lines, points."""
        anchors = [a.anchor for a in self.areas] + [l.anchor for l in self.lines] + [p.loc for p in self.points]
        return np.asarray(anchors, dtype=np.float64).reshape((-1, 2))

    def all_coordinates(self):
        coords = [self.depot] + [p.loc for p in self.points]
        for l in self.lines:
            coords += [l.p1, l.p2]
        coords = np.asarray(coords, dtype=np.float64)
        if self.n_a > 0:
            coords = np.concatenate([coords] + [area_corners(a) for a in self.areas])
        return coords

    def check_unit_square(self):
        return in_unit_square(self.all_coordinates())

    def validate(self, min_anchor_separation=None):
        """List of violated type invariants (empty when the instance is valid)."""
        violations = []
        if self.num_tasks < 1:
            violations.append('instance has no tasks')
        if self.omega < 1:
            violations.append(f'omega must be positive, got {self.omega}')
        for i, l in enumerate(self.lines):
            if l.length <= 0:
                violations.append(f'line {i} has zero length')
        for i, a in enumerate(self.areas):
            if a.detection_range <= 0:
                violations.append(f'area {i} has non-positive detection range')
            if not a.width < a.length:
                violations.append(f'area {i} width {a.width} is not below length {a.length}')
            if a.width < 3 * a.detection_range - SWEEP_EPS:
                violations.append(f'area {i} width {a.width} is below three detection ranges')
        if self.unit_square and not self.check_unit_square():
            violations.append('geometry leaves the unit square')
        if min_anchor_separation is not None and self.num_tasks > 1:
            dist = pairwise_distances(self.task_anchors())
            np.fill_diagonal(dist, np.inf)
            if dist.min() < min_anchor_separation - UNIT_EPS:
                violations.append(f'anchors closer than {min_anchor_separation}')
        return violations


@dataclass(frozen=True)
class InstanceSpec:
    """Sampling distribution of instances. All ranges are half-open integer or scalar intervals ``[lo, hi)``."""
    size_range: Tuple[int, int] = (20, 100)
    area_range: Tuple[int, int] = (0, 5)
    line_range: Tuple[int, int] = (0, 20)
    omega: int = 4
    detection_range: float = 0.05
    # None means 2 * detection_range
    min_anchor_separation: float = None
    line_length_range: Tuple[float, float] = (0.05, 0.3)
    max_attempts: int = 1000

    def __post_init__(self):
        for name in ['size_range', 'area_range', 'line_range']:
            lo, hi = getattr(self, name)
            if not (int(lo) == lo and int(hi) == hi and 0 <= lo < hi):
                raise ValueError(f'Invalid {name}: {(lo, hi)}, must be a non-empty integer range [lo, hi)')
        if self.size_range[0] < 1:
            raise ValueError(f'Invalid size_range: {self.size_range}, instances need at least one task')
        lo, hi = self.line_length_range
        if not 0 < lo < hi:
            raise ValueError(f'Invalid line_length_range: {(lo, hi)}')
        if self.omega < 1:
            raise ValueError(f'Invalid omega: {self.omega}, must be >= 1')
        if self.detection_range <= 0:
            raise ValueError(f'Invalid detection_range: {self.detection_range}, must be > 0')
        if self.min_anchor_separation is not None and self.min_anchor_separation < 0:
            raise ValueError(f'Invalid min_anchor_separation: {self.min_anchor_separation}')
        assert self.max_attempts >= 1, 'max_attempts must be positive'

    @property
    def separation(self):
        return 2 * self.detection_range if self.min_anchor_separation is None else self.min_anchor_separation

    def to_dict(self):
        return {'size_range': list(self.size_range), 'area_range': list(self.area_range),
                'line_range': list(self.line_range), 'omega': self.omega,
                'detection_range': self.detection_range, 'min_anchor_separation': self.min_anchor_separation,
                'line_length_range': list(self.line_length_range), 'max_attempts': self.max_attempts}


def zigzag_params(area):
    """Number of parallel sweeps and total coverage path length of an area task."""
    n_sweep = int(np.floor(area.width / area.detection_range + SWEEP_EPS)) + 1
    return n_sweep, n_sweep * area.length


def area_axes(beta):
    u = np.array([np.cos(beta), np.sin(beta)])
    v = np.array([-np.sin(beta), np.cos(beta)])
    return u, v


def area_corner(area, sl, sw):
    u, v = area_axes(area.beta)
    return np.asarray(area.anchor, dtype=np.float64) + sl * (area.length / 2) * u + sw * (area.width / 2) * v


def area_corners(area):
    """The four rotated corners, ordered (-,-), (-,+), (+,-), (+,+) over (length side, width side)."""
    return np.stack([area_corner(area, sl, sw) for sl, sw in CORNER_SIGNS])


def area_entry_exit_pairs(area):
    """Entry/exit corners of the four zigzag sweeps of an area task.

    Each corner of a short edge is an entry. The sweep crosses the width, so the exit lies on the
    opposite long edge; it stays on the entry's short edge for an even number of sweeps and ends on the
    other short edge for an odd number.

    Returns:
        list of ``(entry, exit, service_cost)`` tuples in corner order.
    """
    n_sweep, path_length = zigzag_params(area)
    pairs = []
    for sl, sw in CORNER_SIGNS:
        exit_sl = sl if n_sweep % 2 == 0 else -sl
        pairs.append((_pt(area_corner(area, sl, sw)), _pt(area_corner(area, exit_sl, -sw)), path_length))
    return pairs


def _rng(seed_seq):
    return np.random.Generator(np.random.PCG64(seed_seq))


def _separated(xy, placed, separation):
    if len(placed) == 0:
        return True
    d = np.sqrt(((np.asarray(placed) - xy) ** 2).sum(-1))
    return bool(d.min() >= separation)


def _sample_anchor(rng, placed, separation, low, high, max_attempts, what):
    for _ in range(max_attempts):
        xy = rng.uniform(low, high, size=2)
        if _separated(xy, placed, separation):
            return xy
    raise GenerationError(f'Could not place {what} anchor with separation {separation} '
                          f'after {max_attempts} attempts', attempts=max_attempts)


def _sample_areas(rng, n_a, placed, spec):
    gamma = spec.detection_range
    # anchors keep half the minimal sweep band plus half a band of clearance from the border
    low, high = 2 * gamma, 1 - 2 * gamma
    if low >= high:
        raise GenerationError(f'Detection range {gamma} leaves no room for area tasks')
    for attempt in range(spec.max_attempts):
        anchors = []
        for _ in range(n_a):
            anchors.append(_sample_anchor(rng, placed + anchors, spec.separation, low, high,
                                          spec.max_attempts, 'area'))
        if n_a == 1:
            length = 8 * gamma
        else:
            dist = pairwise_distances(np.stack(anchors))
            np.fill_diagonal(dist, np.inf)
            length = max(float(dist.min()), 4 * gamma)
        areas = []
        for anchor in anchors:
            area = _fit_area(rng, anchor, length, gamma, tries=100)
            if area is None:
                break
            areas.append(area)
        if len(areas) == n_a:
            return areas, anchors
        logging.debug('Area placement restart %d (length %.4f)' % (attempt, length))
    raise GenerationError(f'Could not fit {n_a} area rectangles inside the unit square '
                          f'after {spec.max_attempts} restarts', attempts=spec.max_attempts)


def _fit_area(rng, anchor, length, gamma, tries):
    for _ in range(tries):
        width = float(rng.uniform(3 * gamma, length))
        beta = float(rng.uniform(0, np.pi))
        area = AreaTask(anchor=_pt(anchor), length=float(length), width=width, beta=beta,
                        detection_range=float(gamma))
        if in_unit_square(area_corners(area), eps=0):
            return area
    return None


def _sample_lines(rng, n_l, placed, spec):
    lo, hi = spec.line_length_range
    lines = []
    for _ in range(n_l):
        for attempt in range(spec.max_attempts):
            mid = rng.uniform(0, 1, size=2)
            length = rng.uniform(lo, hi)
            theta = rng.uniform(0, np.pi)
            if not _separated(mid, placed, spec.separation):
                continue
            offset = 0.5 * length * np.array([np.cos(theta), np.sin(theta)])
            p1, p2 = mid - offset, mid + offset
            if in_unit_square(np.stack([p1, p2]), eps=0):
                lines.append(LineTask(p1=_pt(p1), p2=_pt(p2)))
                placed.append(mid)
                break
        else:
            raise GenerationError(f'Could not place line task after {spec.max_attempts} attempts',
                                  attempts=spec.max_attempts)
    return lines


def generate_instance(spec, seed):
    """Sample a CGRP instance.

    Areas are placed first, then lines, then points; every anchor keeps ``spec.separation`` to all
    previously placed anchors.

    Args:
        spec: InstanceSpec with the sampling distribution.
        seed: integer seed, reduced modulo 2**64.

    Returns:
        Instance, bit-identical for identical (spec, seed).
    """
    seed = int(seed)
    root = np.random.SeedSequence(seed % 2 ** 64)
    comp_ss, depot_ss, area_ss, line_ss, point_ss = root.spawn(5)

    comp_rng = _rng(comp_ss)
    n = int(comp_rng.integers(*spec.size_range))
    n_a = min(int(comp_rng.integers(*spec.area_range)), n)
    n_l = min(int(comp_rng.integers(*spec.line_range)), n - n_a)
    n_p = n - n_a - n_l

    depot = _pt(_rng(depot_ss).uniform(0, 1, size=2))

    placed = []
    areas = []
    if n_a > 0:
        areas, area_anchors = _sample_areas(_rng(area_ss), n_a, placed, spec)
        placed += area_anchors
    lines = _sample_lines(_rng(line_ss), n_l, placed, spec)

    point_rng = _rng(point_ss)
    points = []
    for _ in range(n_p):
        xy = _sample_anchor(point_rng, placed, spec.separation, 0, 1, spec.max_attempts, 'point')
        placed.append(xy)
        points.append(PointTask(loc=_pt(xy)))

    instance = Instance(depot=depot, points=tuple(points), lines=tuple(lines), areas=tuple(areas),
                        omega=spec.omega, seed=seed, gamma=float(spec.detection_range))
    logging.debug('Generated instance seed=%d: N=%d (areas=%d, lines=%d, points=%d)' % (seed, n, n_a, n_l, n_p))
    return instance
