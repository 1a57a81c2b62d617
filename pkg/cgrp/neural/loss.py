"""Contrastive and policy-gradient loss values.

Cosine agreements treat the target embedding ``z`` as a constant (it is detached), so a trainer wrapping
these functions only sends gradients through the predictions ``q``.
"""
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn.functional as F
from torch import nn

from cgrp.errors import ShapeMismatchError

LAMBDA_INS = 0.1
LAMBDA_INTRA = 0.02


@dataclass(frozen=True, eq=False)
class ViewEmbeddings:
    """Projector outputs ``z`` and predictor outputs ``q`` of shape (views, candidates, dim).

    Rows follow the candidate layout: depot, ``omega`` rows per area task, two rows per line task, then points.
    """
    z: torch.Tensor
    q: torch.Tensor
    n_a: int
    n_l: int
    omega: int = 4

    def __post_init__(self):
        if self.z.shape != self.q.shape or self.z.dim() != 3:
            raise ShapeMismatchError(f'z {tuple(self.z.shape)} and q {tuple(self.q.shape)} must share a '
                                     f'(views, candidates, dim) shape')
        if self.z.shape[1] < 1 + self.omega * self.n_a + 2 * self.n_l:
            raise ShapeMismatchError(f'{self.z.shape[1]} rows cannot hold {self.n_a} areas and {self.n_l} lines')

    @property
    def num_views(self):
        return self.z.shape[0]

    def area_rows(self, i):
        start = 1 + self.omega * i
        return torch.arange(start, start + self.omega)

    def line_rows(self, i):
        start = 1 + self.omega * self.n_a + 2 * i
        return torch.arange(start, start + 2)

    def normalized(self):
        return F.normalize(self.q, dim=-1), F.normalize(self.z, dim=-1)


@dataclass(frozen=True, eq=False)
class RolloutBatch:
    """Rewards and summed log-probabilities of shape (views, samples)."""
    rewards: torch.Tensor
    log_probs: torch.Tensor

    def __post_init__(self):
        if self.rewards.shape != self.log_probs.shape:
            raise ShapeMismatchError(f'rewards {tuple(self.rewards.shape)} and log_probs '
                                     f'{tuple(self.log_probs.shape)} differ')


def cosine_sim(q, z):
    return (F.normalize(q, dim=-1) * F.normalize(z.detach(), dim=-1)).sum(-1)


def _view_pairs(num_views):
    return [(xi, tau) for xi in range(num_views) for tau in range(num_views) if xi != tau]


def instance_cl_loss(views):
    """Negated mean cosine agreement of mean-pooled views over all ordered view pairs."""
    q, z = views.normalized()
    q_pool, z_pool = q.mean(1), z.mean(1)
    pairs = _view_pairs(views.num_views)
    if len(pairs) == 0:
        return torch.zeros((), dtype=q.dtype)
    return -sum(cosine_sim(q_pool[xi], z_pool[tau]) for xi, tau in pairs) / len(pairs)


def sample_queries(views, rng):
    """Random query candidate per area task (in [0, omega)) and per line task (in [0, 2))."""
    rng = np.random.default_rng(rng) if not isinstance(rng, np.random.Generator) else rng
    return rng.integers(views.omega, size=views.n_a), rng.integers(2, size=views.n_l)


def intra_task_cl_loss(views, area_queries=None, line_queries=None, rng=None):
    """Sibling agreement across views for area and line tasks.

    For each area, one query candidate of view xi is contrasted with its ``omega - 1`` siblings in view tau;
    for each line, one directed candidate with the opposite direction. Queries are drawn from ``rng``
    unless given, and shared by all view pairs.
    """
    if area_queries is None or line_queries is None:
        sampled = sample_queries(views, rng)
        area_queries = sampled[0] if area_queries is None else area_queries
        line_queries = sampled[1] if line_queries is None else line_queries
    q, z = views.normalized()
    pairs = _view_pairs(views.num_views)
    if len(pairs) == 0 or views.n_a + views.n_l == 0:
        return torch.zeros((), dtype=q.dtype)
    total = torch.zeros((), dtype=q.dtype)
    for xi, tau in pairs:
        if views.n_a > 0 and views.omega > 1:
            area = torch.zeros((), dtype=q.dtype)
            for i in range(views.n_a):
                rows = views.area_rows(i)
                query = rows[int(area_queries[i])]
                positives = rows[rows != query]
                area = area + cosine_sim(q[xi, query][None], z[tau, positives]).sum()
            total = total + area / ((views.omega - 1) * views.n_a)
        if views.n_l > 0:
            line = torch.zeros((), dtype=q.dtype)
            for i in range(views.n_l):
                rows = views.line_rows(i)
                query = int(line_queries[i])
                line = line + cosine_sim(q[xi, rows[query]], z[tau, rows[1 - query]])
            total = total + line / views.n_l
    return -total / (2 * len(pairs))


def type_groups(views):
    """Row indices of area, line and point candidates."""
    n_rows = views.z.shape[1]
    area_end = 1 + views.omega * views.n_a
    line_end = area_end + 2 * views.n_l
    return [torch.arange(1, area_end), torch.arange(area_end, line_end), torch.arange(line_end, n_rows)]


def inter_task_cl_loss(views):
    """Same-type candidates across views as positives: negated mean agreement, averaged over non-empty types."""
    q, z = views.normalized()
    groups = [g for g in type_groups(views) if len(g) > 0]
    pairs = _view_pairs(views.num_views)
    if len(pairs) == 0 or len(groups) == 0:
        return torch.zeros((), dtype=q.dtype)
    total = torch.zeros((), dtype=q.dtype)
    for xi, tau in pairs:
        per_type = [(q[xi, g] @ z[tau, g].detach().T).mean() for g in groups]
        total = total + sum(per_type) / len(per_type)
    return -total / len(pairs)


def triplet_loss(rl, ins, intra, lambda_ins=LAMBDA_INS, lambda_intra=LAMBDA_INTRA):
    return rl + lambda_ins * ins + lambda_intra * intra


def reinforce_loss(batch):
    """REINFORCE with the shared baseline: the mean reward over all views and samples of one instance.

    Returns:
        (loss, baseline, advantages)
    """
    rewards = torch.as_tensor(batch.rewards, dtype=torch.float64)
    log_probs = torch.as_tensor(batch.log_probs, dtype=torch.float64)
    baseline = rewards.mean()
    advantages = (rewards - baseline).detach()
    loss = -(advantages * log_probs).mean()
    return loss, baseline, advantages


class BaseLoss(nn.Module):

    def __init__(self, name, **kwargs):
        super().__init__()
        self.name = name


class InstanceCLLoss(BaseLoss):

    def __init__(self, name='instance_cl', **kwargs):
        super().__init__(name, **kwargs)

    def forward(self, views, *args, **kwargs):
        return instance_cl_loss(views)


class IntraTaskCLLoss(BaseLoss):

    def __init__(self, name='intra_task_cl', seed=0, **kwargs):
        super().__init__(name, **kwargs)
        self.rng = np.random.default_rng(seed)

    def forward(self, views, area_queries=None, line_queries=None, *args, **kwargs):
        return intra_task_cl_loss(views, area_queries, line_queries, rng=self.rng)


class InterTaskCLLoss(BaseLoss):

    def __init__(self, name='inter_task_cl', **kwargs):
        super().__init__(name, **kwargs)

    def forward(self, views, *args, **kwargs):
        return inter_task_cl_loss(views)


class TripletLoss(BaseLoss):

    def __init__(self, name='triplet', lambda_ins=LAMBDA_INS, lambda_intra=LAMBDA_INTRA, **kwargs):
        super().__init__(name, **kwargs)
        self.lambda_ins = lambda_ins
        self.lambda_intra = lambda_intra

    def forward(self, rl, ins, intra, *args, **kwargs):
        return triplet_loss(rl, ins, intra, self.lambda_ins, self.lambda_intra)


class ReinforceLoss(BaseLoss):

    def __init__(self, name='reinforce', **kwargs):
        super().__init__(name, **kwargs)

    def forward(self, batch, *args, **kwargs):
        return reinforce_loss(batch)[0]
