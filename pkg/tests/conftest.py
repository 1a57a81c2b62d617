import numpy as np
import pytest

from cgrp.data.dataset import preset_spec
from cgrp.data.geometry import AreaTask, Instance, InstanceSpec, LineTask, PointTask, generate_instance


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: long acceptance sweeps (deselect with -m "not slow")')


def point_instance(loc=(0.5, 0.5), depot=(0.0, 0.0)):
    return Instance(depot=depot, points=(PointTask(loc=loc),))


def line_instance(p1=(0.0, 1.0), p2=(1.0, 1.0), depot=(0.0, 0.0)):
    return Instance(depot=depot, lines=(LineTask(p1=p1, p2=p2),))


def area_instance(width=0.15, depot=(0.0, 0.0)):
    area = AreaTask(anchor=(0.5, 0.5), length=0.4, width=width, beta=0.0, detection_range=0.05)
    return Instance(depot=depot, areas=(area,))


def hybrid_instance():
    """One task of each type: |V| = 1 + 4 + 2 + 1."""
    area = AreaTask(anchor=(0.3, 0.3), length=0.3, width=0.16, beta=0.4, detection_range=0.05)
    return Instance(depot=(0.9, 0.1), points=(PointTask(loc=(0.8, 0.8)),),
                    lines=(LineTask(p1=(0.1, 0.8), p2=(0.3, 0.9)),), areas=(area,))


def seeded_instance(n, seed, n_a_max=3, n_l_max=4):
    spec = InstanceSpec(size_range=(n, n + 1), area_range=(0, n_a_max), line_range=(0, n_l_max))
    return generate_instance(spec, seed)


@pytest.fixture
def hybrid():
    return hybrid_instance()


@pytest.fixture
def six_task_instance():
    return seeded_instance(6, 11)


@pytest.fixture
def oracle_suite():
    spec = preset_spec('oracle9')
    return [generate_instance(spec, 1000 + i) for i in range(100)]


@pytest.fixture
def rng():
    return np.random.default_rng(0)
