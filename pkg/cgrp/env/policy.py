import numpy as np
import torch

from cgrp.neural.attention import DifferentialAttention, compatibility_logits, masked_softmax, mask_from_bool, \
    DEFAULT_CLIP
from cgrp.neural.features import EmbeddingParams, initial_embeddings, raw_features


class Policy:
    """Chooses an unmasked candidate for a state and reports its log-probability."""

    def select(self, state, feasible, rng):
        raise NotImplementedError()


class GreedyPolicy(Policy):
    """Nearest entry: the feasible candidate with the smallest travel cost from the current exit."""

    def select(self, state, feasible, rng):
        options = np.flatnonzero(feasible)
        costs = state.model.cm.d[state.current, options]
        return int(options[np.argmin(costs)]), 0.0


class RandomPolicy(Policy):

    def select(self, state, feasible, rng):
        options = np.flatnonzero(feasible)
        return int(options[rng.integers(len(options))]), -float(np.log(len(options)))


class AttentionPolicy(Policy):
    """Single-step attention decoder over the raw candidate embeddings.

    The context query concatenates the depot and the current candidate embeddings; differential attention
    over all candidates forms the context, and clipped compatibilities give the action distribution.
    Parameters are drawn from ``seed``; nothing is trained.
    """

    def __init__(self, embedding_dim=128, num_heads=8, clip=DEFAULT_CLIP, sample=False, seed=0):
        generator = torch.Generator().manual_seed(seed)
        self.embedding_dim = embedding_dim
        self.params = EmbeddingParams.random(embedding_dim, generator)
        self.attention = DifferentialAttention(2 * embedding_dim, embedding_dim, num_heads, generator=generator)
        self.w_k = torch.randn(embedding_dim, embedding_dim, generator=generator, dtype=torch.float64) \
                   / embedding_dim ** 0.5
        self.clip = clip
        self.sample = sample
        self._cache = (None, None)

    def embeddings(self, model):
        if self._cache[0] is not model:
            self._cache = (model, initial_embeddings(raw_features(model.cs), self.params))
        return self._cache[1]

    @torch.no_grad()
    def probabilities(self, state, feasible):
        h = self.embeddings(state.model)
        mask = mask_from_bool(torch.from_numpy(np.asarray(feasible)))
        query = torch.cat([h[0], h[state.current]])[None]
        _, context = self.attention(query, h, mask[None])
        logits = compatibility_logits(context[0], h, self.w_k, mask, self.clip)
        return masked_softmax(logits, torch.zeros_like(logits))

    def select(self, state, feasible, rng):
        probs = self.probabilities(state, feasible).numpy()
        if self.sample:
            options = np.flatnonzero(feasible)
            p = probs[options] / probs[options].sum()
            action = int(options[rng.choice(len(options), p=p)])
        else:
            action = int(np.argmax(probs))
        return action, float(np.log(probs[action]))
