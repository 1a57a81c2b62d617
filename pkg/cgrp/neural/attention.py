"""Forward attention kernels in float64.

Masks are additive: 0 for visible keys, ``-inf`` for hidden ones. Differential attention applies the same
mask to both softmax branches.
"""
from dataclasses import dataclass

import torch
from torch import nn

from cgrp.errors import ShapeMismatchError

NEG_INF = float('-inf')
DEFAULT_CLIP = 10.
LAMBDA_INIT = 0.5


def mask_from_bool(visible):
    """Additive mask from a boolean tensor of visible positions."""
    mask = torch.zeros(visible.shape, dtype=torch.float64)
    return mask.masked_fill(~visible.bool(), NEG_INF)


def masked_softmax(logits, mask):
    logits = torch.as_tensor(logits, dtype=torch.float64)
    mask = torch.as_tensor(mask, dtype=torch.float64)
    if logits.shape[-1] != mask.shape[-1]:
        raise ShapeMismatchError(f'logits {tuple(logits.shape)} and mask {tuple(mask.shape)} differ')
    scores = logits + mask
    if torch.isneginf(scores).all(-1).any():
        raise ValueError('Every mask row needs at least one visible position')
    return torch.softmax(scores, dim=-1)


def init_lambdas(num_heads, value=LAMBDA_INIT):
    return torch.full((num_heads,), float(value), dtype=torch.float64)


def clamp_lambdas(lambdas):
    return torch.clamp(torch.as_tensor(lambdas, dtype=torch.float64), min=0)


@dataclass(frozen=True, eq=False)
class AttentionBatch:
    """Per-head branch queries ``q1, q2`` (M, nq, dh), keys ``k1, k2`` (M, nk, dh), values ``v`` (M, nk, dv) or
    (nk, dv), additive ``mask`` (nq, nk) and per-head ``lambdas`` (M,)."""
    q1: torch.Tensor
    q2: torch.Tensor
    k1: torch.Tensor
    k2: torch.Tensor
    v: torch.Tensor
    mask: torch.Tensor
    lambdas: torch.Tensor

    @property
    def num_heads(self):
        return self.q1.shape[0]

    @property
    def head_dim(self):
        return self.q1.shape[-1]

    def check(self):
        m, nq, dh = self.q1.shape
        nk = self.k1.shape[1]
        if self.q2.shape != self.q1.shape or self.k1.shape != (m, nk, dh) or self.k2.shape != self.k1.shape:
            raise ShapeMismatchError(f'Query/key shapes differ: q1 {tuple(self.q1.shape)}, q2 {tuple(self.q2.shape)}, '
                                     f'k1 {tuple(self.k1.shape)}, k2 {tuple(self.k2.shape)}')
        if self.v.shape[-2] != nk or (self.v.dim() == 3 and self.v.shape[0] != m):
            raise ShapeMismatchError(f'Values {tuple(self.v.shape)} do not match {m} heads over {nk} keys')
        if tuple(self.mask.shape) != (nq, nk):
            raise ShapeMismatchError(f'Mask {tuple(self.mask.shape)} must be {(nq, nk)}')
        if tuple(self.lambdas.shape) != (m,):
            raise ShapeMismatchError(f'Lambdas {tuple(self.lambdas.shape)} must be {(m,)}')


def attention_weights(q, k, mask):
    return masked_softmax(q @ k.transpose(-1, -2) / q.shape[-1] ** 0.5, mask)


def differential_attention(batch, w_o=None):
    """Per-head ``s_m = (A1 - lambda_m A2) V`` and the combined context ``concat_m(s_m) W_O``.

    Returns:
        (s, h_c) with ``s`` of shape (M, nq, dv) and ``h_c`` of shape (nq, M * dv) projected by ``w_o``
        when given.
    """
    batch.check()
    a1 = attention_weights(batch.q1, batch.k1, batch.mask)
    a2 = attention_weights(batch.q2, batch.k2, batch.mask)
    lam = clamp_lambdas(batch.lambdas)[:, None, None]
    s = (a1 - lam * a2) @ batch.v
    h_c = s.transpose(0, 1).reshape(s.shape[1], -1)
    if w_o is not None:
        if w_o.shape[0] != h_c.shape[-1]:
            raise ShapeMismatchError(f'W_O {tuple(w_o.shape)} does not match concatenated heads {h_c.shape[-1]}')
        h_c = h_c @ w_o
    return s, h_c


def compatibility_logits(context, embeddings, projection, mask, clip=DEFAULT_CLIP):
    """Clipped compatibilities ``C tanh(context . (h_i W_K) / sqrt(d))``, ``-inf`` where masked."""
    if context.shape[-1] != projection.shape[-1] or embeddings.shape[-1] != projection.shape[0]:
        raise ShapeMismatchError(f'context {tuple(context.shape)}, embeddings {tuple(embeddings.shape)} and '
                                 f'projection {tuple(projection.shape)} are inconsistent')
    keys = embeddings @ projection
    u = keys @ context / context.shape[-1] ** 0.5
    return clip * torch.tanh(u) + mask


class DifferentialAttention(nn.Module):
    """Multi-head differential attention with its own projections.

    ``lambdas`` are stored unconstrained and clamped at use.
    """

    def __init__(self, query_dim, key_dim, num_heads=8, head_dim=None, generator=None):
        super().__init__()
        head_dim = key_dim // num_heads if head_dim is None else head_dim
        self.num_heads, self.head_dim = num_heads, head_dim

        def init(d_in, d_out):
            w = torch.randn(d_in, d_out, generator=generator, dtype=torch.float64) / d_in ** 0.5
            return nn.Parameter(w, requires_grad=False)

        inner = num_heads * head_dim
        self.w_q1, self.w_q2 = init(query_dim, inner), init(query_dim, inner)
        self.w_k1, self.w_k2 = init(key_dim, inner), init(key_dim, inner)
        self.w_v = init(key_dim, inner)
        self.w_o = init(inner, key_dim)
        self.lambdas = nn.Parameter(init_lambdas(num_heads), requires_grad=False)

    def _heads(self, x):
        return x.reshape(x.shape[0], self.num_heads, self.head_dim).transpose(0, 1)

    def forward(self, query, keys, mask):
        batch = AttentionBatch(q1=self._heads(query @ self.w_q1), q2=self._heads(query @ self.w_q2),
                               k1=self._heads(keys @ self.w_k1), k2=self._heads(keys @ self.w_k2),
                               v=self._heads(keys @ self.w_v), mask=mask, lambdas=self.lambdas)
        return differential_attention(batch, self.w_o)
