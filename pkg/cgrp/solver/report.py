import json
from dataclasses import dataclass, field
from typing import Optional, Union

from cgrp.cost.model import Tour


@dataclass
class SolverReport:
    solver: str
    objective: float
    tour: Tour
    wall_time: float
    iterations: int
    seed: int
    instance_id: Optional[Union[int, str]] = None
    config: dict = field(default_factory=dict)
    trace: list = field(default_factory=list)

    def __post_init__(self):
        assert self.wall_time >= 0, 'wall time must be non-negative'

    def to_dict(self, with_trace=False):
        d = {'solver': self.solver, 'instance_id': self.instance_id, 'objective': self.objective,
             'tour': list(self.tour.order), 'wall_time': self.wall_time, 'iterations': self.iterations,
             'seed': self.seed, 'config': self.config}
        if with_trace:
            d['trace'] = self.trace
        return d

    def to_json(self, with_trace=False):
        return json.dumps(self.to_dict(with_trace=with_trace))
