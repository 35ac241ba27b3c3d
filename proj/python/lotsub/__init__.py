"""Linear optimal transport embeddings and nearest-subspace classification of point sets."""

from ._core import (
    LotEmbedding,
    LotsubError,
    Model,
    builtin_templates,
    cost_matrix,
    cov_embed,
    fsort_embed,
    gem_embed,
    lot_distance,
    lot_transform,
    solve_lap,
    synth_dataset,
    train,
    wasserstein2,
)

__all__ = [
    "LotEmbedding",
    "LotsubError",
    "Model",
    "builtin_templates",
    "cost_matrix",
    "cov_embed",
    "fsort_embed",
    "gem_embed",
    "lot_distance",
    "lot_transform",
    "solve_lap",
    "synth_dataset",
    "train",
    "wasserstein2",
]
