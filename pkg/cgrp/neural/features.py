from dataclasses import dataclass
from typing import Optional, Tuple

import torch

NUM_TYPES = 3


@dataclass(frozen=True)
class FeatureRow:
    coord_pair: Tuple[float, float, float, float]
    anchor: Optional[Tuple[float, float]]
    type_indicator: Optional[int]
    is_depot: bool


def raw_features(cs):
    """One row per candidate, depot first: entry/exit coordinates, anchor and task-type indicator."""
    rows = []
    for c in cs.candidates:
        coord_pair = (*map(float, c.entry), *map(float, c.exit))
        if c.is_depot:
            rows.append(FeatureRow(coord_pair=coord_pair, anchor=None, type_indicator=None, is_depot=True))
        else:
            rows.append(FeatureRow(coord_pair=coord_pair, anchor=tuple(map(float, c.anchor)),
                                   type_indicator=int(c.task_type), is_depot=False))
    return rows


def feature_tensors(rows):
    """Stack rows into (coords, anchors, one-hot types, depot flags); depot rows carry zero anchor and type."""
    coords = torch.tensor([r.coord_pair for r in rows], dtype=torch.float64)
    anchors = torch.tensor([r.anchor if r.anchor is not None else (0.0, 0.0) for r in rows], dtype=torch.float64)
    types = torch.zeros(len(rows), NUM_TYPES, dtype=torch.float64)
    for i, r in enumerate(rows):
        if r.type_indicator is not None:
            types[i, r.type_indicator] = 1
    is_depot = torch.tensor([r.is_depot for r in rows], dtype=torch.bool)
    return coords, anchors, types, is_depot


@dataclass(frozen=True, eq=False)
class EmbeddingParams:
    """Projection matrices of the initial embedding (row vectors times matrices)."""
    w_l: torch.Tensor
    w_g: torch.Tensor
    w_i: torch.Tensor
    b: torch.Tensor
    w_d: torch.Tensor
    b_d: torch.Tensor

    @staticmethod
    def random(dim, generator=None):
        def init(*shape):
            return torch.randn(*shape, generator=generator, dtype=torch.float64) / shape[0] ** 0.5

        return EmbeddingParams(w_l=init(4, dim), w_g=init(2, dim), w_i=init(NUM_TYPES, dim),
                               b=torch.zeros(dim, dtype=torch.float64), w_d=init(4, dim),
                               b_d=torch.zeros(dim, dtype=torch.float64))


def initial_embeddings(rows, params):
    """Task rows get ``L W_L + G W_G + I W_I + b``, the depot row ``L W_d + b_d``."""
    coords, anchors, types, is_depot = feature_tensors(rows)
    task_h = coords @ params.w_l + anchors @ params.w_g + types @ params.w_i + params.b
    depot_h = coords @ params.w_d + params.b_d
    return torch.where(is_depot[:, None], depot_h, task_h)
