import dataclasses

import numpy as np

from cgrp.data.geometry import Instance, PointTask, LineTask, AreaTask, _pt
from cgrp.data.util import transform_points, inverse_transform_points, transform_orientation, \
    inverse_transform_orientation


def _map_instance(instance, alpha, point_f, beta_f):
    depot = _pt(point_f(instance.depot, alpha))
    points = tuple(PointTask(loc=_pt(point_f(p.loc, alpha))) for p in instance.points)
    lines = tuple(LineTask(p1=_pt(point_f(l.p1, alpha)), p2=_pt(point_f(l.p2, alpha))) for l in instance.lines)
    areas = tuple(AreaTask(anchor=_pt(point_f(a.anchor, alpha)), length=a.length, width=a.width,
                           beta=beta_f(a.beta, alpha), detection_range=a.detection_range)
                  for a in instance.areas)
    mapped = Instance(depot=depot, points=points, lines=lines, areas=areas, omega=instance.omega,
                      seed=instance.seed, gamma=instance.gamma)
    return dataclasses.replace(mapped, unit_square=mapped.check_unit_square())


def rotate_reflect(instance, alpha):
    """Rotate the instance about (1/2, 1/2) and, for ``alpha >= 0.5``, swap the coordinate axes.

    The rotation angle is ``4 pi alpha`` below one half and ``4 pi (alpha - 1/2)`` above. Coordinates are
    not clamped; ``unit_square`` of the result tells whether the geometry stayed inside [0, 1]^2.
    Lengths, widths and detection ranges are unchanged.
    """
    return _map_instance(instance, alpha, transform_points, transform_orientation)


def invert_rotate_reflect(instance, alpha):
    return _map_instance(instance, alpha, inverse_transform_points, inverse_transform_orientation)


def sample_view_alphas(num_views, seed):
    if num_views < 1:
        raise ValueError(f'Invalid num_views: {num_views}, must be >= 1')
    rng = np.random.default_rng(seed)
    return [0.0] + [float(a) for a in rng.random(num_views - 1)]


def augment_views(instance, num_views, seed):
    """The original instance followed by ``num_views - 1`` rigid-transform views with alpha ~ U(0, 1)."""
    alphas = sample_view_alphas(num_views, seed)
    return [instance] + [rotate_reflect(instance, a) for a in alphas[1:]]
