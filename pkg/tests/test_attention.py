import numpy as np
import pytest
import torch
from conftest import hybrid_instance, point_instance

from cgrp.cost.model import expand_candidates
from cgrp.data.geometry import POINT
from cgrp.errors import ShapeMismatchError
from cgrp.neural.attention import AttentionBatch, DifferentialAttention, attention_weights, clamp_lambdas, \
    compatibility_logits, differential_attention, init_lambdas, mask_from_bool, masked_softmax
from cgrp.neural.features import EmbeddingParams, initial_embeddings, raw_features


def randn(*shape, generator):
    return torch.randn(*shape, generator=generator, dtype=torch.float64)


def test_softmax_values():
    probs = masked_softmax(torch.tensor([1., 2., 3.]), torch.zeros(3))
    assert probs.numpy() == pytest.approx([0.09003, 0.24473, 0.66524], abs=1e-5)
    assert masked_softmax(torch.zeros(4), torch.zeros(4)).numpy() == pytest.approx([0.25] * 4)


def test_softmax_single_visible():
    mask = mask_from_bool(torch.tensor([False, True, False]))
    assert masked_softmax(torch.tensor([5., -3., 9.]), mask).tolist() == [0.0, 1.0, 0.0]


def test_softmax_errors():
    with pytest.raises(ShapeMismatchError):
        masked_softmax(torch.zeros(3), torch.zeros(4))
    with pytest.raises(ValueError):
        masked_softmax(torch.zeros(2), mask_from_bool(torch.tensor([False, False])))


def _batch(m, nq, nk, dh, dv, generator, lambdas, visible=None):
    visible = torch.rand(nq, nk, generator=generator) > 0.3 if visible is None else visible
    visible[:, 0] = True
    return AttentionBatch(q1=randn(m, nq, dh, generator=generator), q2=randn(m, nq, dh, generator=generator),
                          k1=randn(m, nk, dh, generator=generator), k2=randn(m, nk, dh, generator=generator),
                          v=randn(m, nk, dv, generator=generator), mask=mask_from_bool(visible), lambdas=lambdas)


def test_lambda_zero_is_standard_attention():
    generator = torch.Generator().manual_seed(0)
    for _ in range(100):
        m, nq, nk, dh, dv = [int(x) for x in torch.randint(1, 6, (5,), generator=generator)]
        batch = _batch(m, nq, nk, dh, dv, generator, torch.zeros(m, dtype=torch.float64))
        s, _ = differential_attention(batch)
        scores = batch.q1 @ batch.k1.transpose(-1, -2) / dh ** 0.5 + batch.mask
        expected = torch.softmax(scores, -1) @ batch.v
        assert (s - expected).abs().max().item() < 1e-12


def test_key_permutation_invariance():
    generator = torch.Generator().manual_seed(4)
    for _ in range(50):
        m, nq, nk, dh, dv = [int(x) for x in torch.randint(1, 7, (5,), generator=generator)]
        batch = _batch(m, nq, nk, dh, dv, generator, 2 * torch.rand(m, generator=generator, dtype=torch.float64))
        perm = torch.randperm(nk, generator=generator)
        permuted = AttentionBatch(q1=batch.q1, q2=batch.q2, k1=batch.k1[:, perm], k2=batch.k2[:, perm],
                                  v=batch.v[:, perm], mask=batch.mask[:, perm], lambdas=batch.lambdas)
        s, h_c = differential_attention(batch)
        s_p, h_c_p = differential_attention(permuted)
        assert (s - s_p).abs().max().item() < 1e-12
        assert (h_c - h_c_p).abs().max().item() < 1e-12


def test_compatibility_permutation_equivariance():
    generator = torch.Generator().manual_seed(5)
    context, embeddings = randn(4, generator=generator), randn(7, 6, generator=generator)
    projection = randn(6, 4, generator=generator)
    mask = mask_from_bool(torch.tensor([True, False, True, True, False, True, True]))
    perm = torch.randperm(7, generator=generator)
    logits = compatibility_logits(context, embeddings, projection, mask)
    permuted = compatibility_logits(context, embeddings[perm], projection, mask[perm])
    assert torch.allclose(permuted, logits[perm], rtol=0, atol=1e-12)
    assert torch.isneginf(permuted).tolist() == torch.isneginf(logits[perm]).tolist()


def test_head_output_norm_bound():
    generator = torch.Generator().manual_seed(6)
    for _ in range(100):
        m, nq, nk, dh, dv = [int(x) for x in torch.randint(1, 7, (5,), generator=generator)]
        lambdas = 2 * torch.rand(m, generator=generator, dtype=torch.float64)
        batch = _batch(m, nq, nk, dh, dv, generator, lambdas)
        s, _ = differential_attention(batch)
        bound = (1 + lambdas) * batch.v.norm(dim=-1).max(dim=-1).values
        assert (s.norm(dim=-1) <= bound[:, None] + 1e-12).all()


def test_identical_branches_cancel():
    generator = torch.Generator().manual_seed(1)
    batch = _batch(2, 3, 4, 5, 6, generator, torch.ones(2, dtype=torch.float64))
    batch = AttentionBatch(q1=batch.q1, q2=batch.q1, k1=batch.k1, k2=batch.k1, v=batch.v, mask=batch.mask,
                           lambdas=batch.lambdas)
    s, h_c = differential_attention(batch)
    assert (s == 0).all()
    assert h_c.shape == (3, 12)


def test_masked_positions_have_zero_weight():
    generator = torch.Generator().manual_seed(2)
    batch = _batch(3, 2, 5, 4, 4, generator, init_lambdas(3))
    for q, k in [(batch.q1, batch.k1), (batch.q2, batch.k2)]:
        weights = attention_weights(q, k, batch.mask)
        assert (weights[:, torch.isinf(batch.mask)] == 0).all()


def test_hand_rolled_single_head():
    q1 = torch.tensor([[[1., 0.], [0., 1.]]], dtype=torch.float64)
    k1 = torch.tensor([[[1., 0.], [0., 1.], [1., 1.]]], dtype=torch.float64)
    q2, k2 = q1.flip(-1), k1
    v = torch.tensor([[1., 2.], [3., 4.], [5., 6.]], dtype=torch.float64)
    mask = torch.zeros(2, 3, dtype=torch.float64)
    s, _ = differential_attention(AttentionBatch(q1, q2, k1, k2, v, mask, torch.tensor([0.5], dtype=torch.float64)))
    qa, qb, ka, va = q1[0].numpy(), q2[0].numpy(), k1[0].numpy(), v.numpy()
    expected = np.zeros((2, 2))
    for i in range(2):
        a1 = np.exp(ka @ qa[i] / np.sqrt(2))
        a2 = np.exp(ka @ qb[i] / np.sqrt(2))
        expected[i] = (a1 / a1.sum() - 0.5 * a2 / a2.sum()) @ va
    assert s[0].numpy() == pytest.approx(expected, abs=1e-12)


def test_lambdas():
    assert init_lambdas(4).tolist() == [0.5] * 4
    assert clamp_lambdas(torch.tensor([-1., 0.3], dtype=torch.float64)).tolist() == [0.0, 0.3]


def test_batch_shape_check():
    generator = torch.Generator().manual_seed(3)
    batch = _batch(2, 3, 4, 5, 6, generator, torch.zeros(3, dtype=torch.float64))
    with pytest.raises(ShapeMismatchError):
        differential_attention(batch)


def test_compatibility_logits():
    embeddings = torch.tensor([[0., 1.], [1000., 0.]], dtype=torch.float64)
    context = torch.tensor([1., 0.], dtype=torch.float64)
    logits = compatibility_logits(context, embeddings, torch.eye(2, dtype=torch.float64), torch.zeros(2))
    assert logits[0].item() == 0
    assert logits[1].item() == pytest.approx(10.0)
    masked = compatibility_logits(context, embeddings, torch.eye(2, dtype=torch.float64),
                                  mask_from_bool(torch.tensor([True, False])))
    assert torch.isneginf(masked[1])


def test_module_forward():
    generator = torch.Generator().manual_seed(4)
    module = DifferentialAttention(8, 4, num_heads=2, generator=generator)
    keys = randn(5, 4, generator=generator)
    s, h_c = module(randn(1, 8, generator=generator), keys, torch.zeros(1, 5, dtype=torch.float64))
    assert s.shape == (2, 1, 2) and h_c.shape == (1, 4)


def test_raw_features_point():
    rows = raw_features(expand_candidates(point_instance(loc=(0.2, 0.7))))
    assert len(rows) == 2
    assert rows[0].is_depot and rows[0].anchor is None and rows[0].type_indicator is None
    assert rows[1].coord_pair == (0.2, 0.7, 0.2, 0.7)
    assert rows[1].anchor == (0.2, 0.7)
    assert rows[1].type_indicator == POINT == 2


def test_initial_embeddings():
    cs = expand_candidates(hybrid_instance())
    rows = raw_features(cs)
    assert len(rows) == len(cs) == 8
    params = EmbeddingParams.random(6, torch.Generator().manual_seed(0))
    h = initial_embeddings(rows, params)
    assert h.shape == (8, 6)
    depot = torch.tensor(rows[0].coord_pair, dtype=torch.float64) @ params.w_d + params.b_d
    assert torch.allclose(h[0], depot, atol=1e-12)
    row = rows[5]
    task = torch.tensor(row.coord_pair, dtype=torch.float64) @ params.w_l \
        + torch.tensor(row.anchor, dtype=torch.float64) @ params.w_g + params.w_i[row.type_indicator] + params.b
    assert torch.allclose(h[5], task, atol=1e-12)
