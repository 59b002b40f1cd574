"""Repetition learning matrix and the joint classification/reconstruction loss.

The matrix A weights each (position, attribute) residual by how often that
token value recurs inside its attribute column: a = gamma * (1 + count/len),
with counts taken over the valid region and normalized by the valid length
(padding is an encoding artifact and must not dilute the weights). Pad rows
are forced to zero so they contribute no loss.
"""

from __future__ import annotations

import numpy as np

from ..rules import RepetitionType
from ..vocab import ATTRIBUTES, NUM_ATTRIBUTES
from .config import ModelConfig
from .network import (
    Params,
    classify_forward,
    decode_backward,
    decode_forward,
    trunk_backward,
    trunk_forward,
)


def repetition_matrix(
    tokens: np.ndarray,
    valid_len: int,
    label: RepetitionType,
    config: ModelConfig,
) -> np.ndarray:
    """Per-entry loss weights a_{l,k} = gamma_k(label) * (1 + count/valid_len)."""
    L, K = tokens.shape
    if K != NUM_ATTRIBUTES:
        raise ValueError(f"expected {NUM_ATTRIBUTES} attribute columns, got {K}")
    out = np.zeros((L, K), dtype=np.dtype(config.dtype))
    if valid_len == 0:
        return out
    valid = tokens[:valid_len]
    for k, attr in enumerate(ATTRIBUTES):
        column = valid[:, k]
        _, inverse, counts = np.unique(column, return_inverse=True, return_counts=True)
        omega = counts[inverse] / valid_len
        out[:valid_len, k] = config.gamma(label, attr) * (1.0 + omega)
    return out


def ones_matrix(tokens: np.ndarray, config: ModelConfig) -> np.ndarray:
    """The V-variant replacement: no repetition weighting at all."""
    return np.ones(tokens.shape, dtype=np.dtype(config.dtype))


def loss_classification(probs: np.ndarray, labels: np.ndarray) -> float:
    """Summed cross-entropy -log p[y] over the batch."""
    picked = probs[np.arange(len(labels)), labels]
    return float(-np.log(np.maximum(picked, 1e-12)).sum())


def loss_reconstruction(pred: np.ndarray, target: np.ndarray, a_matrix: np.ndarray) -> float:
    """Squared norm of the A-weighted residual, summed over the batch."""
    weighted = a_matrix * (target - pred)
    return float((weighted * weighted).sum())


def total_loss(loss_c: float, loss_r: float, lam: float) -> float:
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    return lam * loss_c + (1.0 - lam) * loss_r


# ---------------------------------------------------------------------------
# joint forward/backward over a batch

def batch_forward(
    params: Params,
    batch: dict,
    config: ModelConfig,
    train: bool = False,
    rng: np.random.Generator | None = None,
):
    """Both pipelines over one batch.

    batch holds x (B,L,K) ints, y (B,) ints, target (B,L,K) ints, and A
    (B,L,K) weights. Returns (loss_c, loss_r, cache).
    """
    dtype = np.dtype(config.dtype)
    x, y = batch["x"], batch["y"]
    mask = (x[:, :, 3] != 0).astype(dtype)  # type column: pad rows are 0
    feats, trunk_cache = trunk_forward(params, x, mask, config, train, rng)
    probs, cls_cache = classify_forward(params, feats, mask)
    pred, dec_cache = decode_forward(params, feats, y, config)

    target = batch["target"].astype(dtype)
    a_matrix = batch["A"].astype(dtype)
    loss_c = loss_classification(probs, y)
    loss_r = loss_reconstruction(pred, target, a_matrix)
    cache = dict(
        trunk=trunk_cache,
        cls=cls_cache,
        dec=dec_cache,
        probs=probs,
        pred=pred,
        target=target,
        A=a_matrix,
        mask=mask,
        y=y,
    )
    return loss_c, loss_r, cache


def batch_backward(params: Params, cache: dict, config: ModelConfig) -> Params:
    """Gradients of total_loss = lam*L_c + (1-lam)*L_r for every parameter."""
    grads: Params = {k: np.zeros_like(v) for k, v in params.items()}
    lam = config.lam
    probs, y = cache["probs"], cache["y"]
    B = probs.shape[0]

    # classification head
    dlogits = probs.copy()
    dlogits[np.arange(B), y] -= 1.0
    dlogits *= lam
    pooled, counts = cache["cls"]
    grads["lab.out.w"] += pooled.T @ dlogits
    grads["lab.out.b"] += dlogits.sum(0)
    dpooled = dlogits @ params["lab.out.w"].T
    maskf = cache["mask"]
    dfeats_c = dpooled[:, None, :] * (maskf / counts[:, None])[:, :, None]

    # reconstruction heads
    residual = cache["target"] - cache["pred"]
    dpred = (1.0 - lam) * (-2.0) * cache["A"] * cache["A"] * residual
    dfeats_r = decode_backward(params, cache["dec"], dpred, grads, config)

    trunk_backward(params, cache["trunk"], dfeats_c + dfeats_r, grads, config)
    return grads
