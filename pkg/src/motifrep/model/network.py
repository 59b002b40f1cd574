"""Multi-attribute transformer encoder with a hand-written backward pass.

Two pipelines share the embedding and encoder trunk: a classification head
(mean-pool over non-pad positions, linear, softmax) and a label-conditioned
reconstruction decoder (one linear head per attribute, regressing token
indices). Everything is plain numpy so gradients can be verified against
central finite differences.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

from ..vocab import ATTRIBUTES
from .config import ModelConfig

Params = dict[str, np.ndarray]

_MASK_BIAS = -1e9


def parameter_group(name: str) -> str:
    """Map a parameter name to its group: emb, enc, lab, or dec."""
    return name.split(".", 1)[0]


def init_params(config: ModelConfig, rng: np.random.Generator) -> Params:
    """Fresh parameters: N(0, 0.02) embeddings with a pinned zero pad row,
    uniform +-1/sqrt(fan_in) linear maps, identity layer norms."""
    dtype = np.dtype(config.dtype)
    p: Params = {}

    def linear(name: str, fan_in: int, fan_out: int) -> None:
        bound = 1.0 / np.sqrt(fan_in)
        p[f"{name}.w"] = rng.uniform(-bound, bound, (fan_in, fan_out)).astype(dtype)
        p[f"{name}.b"] = np.zeros(fan_out, dtype=dtype)

    for attr, vocab, size in zip(ATTRIBUTES, config.vocab_sizes, config.embedding_sizes):
        table = (0.02 * rng.standard_normal((vocab, size))).astype(dtype)
        table[0] = 0.0  # pad token embeds to zero, kept pinned
        p[f"emb.{attr}"] = table
    linear("emb.proj", config.concat_size, config.hidden)

    p["enc.pos"] = (0.02 * rng.standard_normal((config.max_rows, config.hidden))).astype(dtype)
    for i in range(config.layers):
        for proj in ("wq", "wk", "wv", "wo"):
            linear(f"enc.{i}.attn.{proj}", config.hidden, config.hidden)
        p[f"enc.{i}.ln1.g"] = np.ones(config.hidden, dtype=dtype)
        p[f"enc.{i}.ln1.b"] = np.zeros(config.hidden, dtype=dtype)
        linear(f"enc.{i}.ff.l1", config.hidden, config.feed_forward)
        linear(f"enc.{i}.ff.l2", config.feed_forward, config.hidden)
        p[f"enc.{i}.ln2.g"] = np.ones(config.hidden, dtype=dtype)
        p[f"enc.{i}.ln2.b"] = np.zeros(config.hidden, dtype=dtype)

    linear("lab.out", config.hidden, config.num_classes)
    p["dec.label"] = (0.02 * rng.standard_normal((config.num_classes, config.label_embedding))).astype(dtype)
    for attr in ATTRIBUTES:
        linear(f"dec.head.{attr}", config.hidden + config.label_embedding, 1)
    return p


# ---------------------------------------------------------------------------
# primitives

# python-float constants; np.float64 scalars would promote float32 arrays
_INV_SQRT2 = 0.7071067811865476
_INV_SQRT_2PI = 0.3989422804014327


def gelu(x: np.ndarray) -> np.ndarray:
    return 0.5 * x * (1.0 + erf(x * _INV_SQRT2))


def gelu_grad(x: np.ndarray) -> np.ndarray:
    cdf = 0.5 * (1.0 + erf(x * _INV_SQRT2))
    pdf = np.exp(-0.5 * x * x) * _INV_SQRT_2PI
    return cdf + x * pdf


def softmax(x: np.ndarray, axis: int = -1) -> np.ndarray:
    shifted = x - x.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


def _layer_norm_fwd(x, g, b, eps=1e-5):
    mu = x.mean(-1, keepdims=True)
    var = x.var(-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + eps)
    xhat = (x - mu) * inv
    return g * xhat + b, (xhat, inv, g)


def _layer_norm_bwd(dout, cache):
    xhat, inv, g = cache
    dxhat = dout * g
    dg = (dout * xhat).sum(axis=tuple(range(dout.ndim - 1)))
    db = dout.sum(axis=tuple(range(dout.ndim - 1)))
    dx = inv * (
        dxhat
        - dxhat.mean(-1, keepdims=True)
        - xhat * (dxhat * xhat).mean(-1, keepdims=True)
    )
    return dx, dg, db


def _linear_fwd(x, w, b):
    return x @ w + b


def _linear_bwd(x, w, dout):
    flat_x = x.reshape(-1, x.shape[-1])
    flat_d = dout.reshape(-1, dout.shape[-1])
    dw = flat_x.T @ flat_d
    db = flat_d.sum(0)
    dx = dout @ w.T
    return dx, dw, db


def _dropout_fwd(x, rate, train, rng):
    if not train or rate <= 0.0:
        return x, None
    keep = (rng.random(x.shape) >= rate).astype(x.dtype) / (1.0 - rate)
    return x * keep, keep


def _dropout_bwd(dout, keep):
    return dout if keep is None else dout * keep


# ---------------------------------------------------------------------------
# trunk: embedding + encoder

def trunk_forward(
    params: Params,
    x: np.ndarray,
    mask: np.ndarray,
    config: ModelConfig,
    train: bool = False,
    rng: np.random.Generator | None = None,
):
    """Embed tokens and run the encoder stack. x: (B,L,K) ints, mask: (B,L) 1/0."""
    B, L, _ = x.shape
    dtype = np.dtype(config.dtype)
    maskf = mask.astype(dtype)

    pieces = [params[f"emb.{a}"][x[:, :, k]] for k, a in enumerate(ATTRIBUTES)]
    cat = np.concatenate(pieces, axis=-1)
    h = _linear_fwd(cat, params["emb.proj.w"], params["emb.proj.b"])
    h = h + params["enc.pos"][:L][None]

    # pad keys are masked out of attention entirely
    key_bias = ((1.0 - maskf) * _MASK_BIAS)[:, None, None, :]

    layers = []
    nh, dh = config.heads, config.hidden // config.heads
    scale = float(1.0 / np.sqrt(dh))
    for i in range(config.layers):
        pre = h
        q = _linear_fwd(h, params[f"enc.{i}.attn.wq.w"], params[f"enc.{i}.attn.wq.b"])
        k = _linear_fwd(h, params[f"enc.{i}.attn.wk.w"], params[f"enc.{i}.attn.wk.b"])
        v = _linear_fwd(h, params[f"enc.{i}.attn.wv.w"], params[f"enc.{i}.attn.wv.b"])
        qh = q.reshape(B, L, nh, dh).transpose(0, 2, 1, 3)
        kh = k.reshape(B, L, nh, dh).transpose(0, 2, 1, 3)
        vh = v.reshape(B, L, nh, dh).transpose(0, 2, 1, 3)
        scores = qh @ kh.transpose(0, 1, 3, 2) * scale + key_bias
        probs = softmax(scores)
        ctx = (probs @ vh).transpose(0, 2, 1, 3).reshape(B, L, config.hidden)
        attn = _linear_fwd(ctx, params[f"enc.{i}.attn.wo.w"], params[f"enc.{i}.attn.wo.b"])
        attn, drop1 = _dropout_fwd(attn, config.dropout, train, rng)
        ln1_in = pre + attn
        h, ln1_cache = _layer_norm_fwd(ln1_in, params[f"enc.{i}.ln1.g"], params[f"enc.{i}.ln1.b"])

        ff_in = h
        f1 = _linear_fwd(h, params[f"enc.{i}.ff.l1.w"], params[f"enc.{i}.ff.l1.b"])
        cdf = 0.5 * (1.0 + erf(f1 * _INV_SQRT2))
        act = f1 * cdf
        f2 = _linear_fwd(act, params[f"enc.{i}.ff.l2.w"], params[f"enc.{i}.ff.l2.b"])
        f2, drop2 = _dropout_fwd(f2, config.dropout, train, rng)
        h, ln2_cache = _layer_norm_fwd(ff_in + f2, params[f"enc.{i}.ln2.g"], params[f"enc.{i}.ln2.b"])

        layers.append(
            dict(
                pre=pre, qh=qh, kh=kh, vh=vh, probs=probs, ctx=ctx,
                drop1=drop1, ln1=ln1_cache, ff_in=ff_in, f1=f1, cdf=cdf, act=act,
                drop2=drop2, ln2=ln2_cache,
            )
        )

    cache = dict(x=x, cat=cat, maskf=maskf, layers=layers, L=L, scale=scale)
    return h, cache


def trunk_backward(params: Params, cache: dict, dF: np.ndarray, grads: Params, config: ModelConfig) -> None:
    """Accumulate gradients for the encoder and embedding from dF (B,L,H)."""
    B = dF.shape[0]
    L = cache["L"]
    nh, dh = config.heads, config.hidden // config.heads
    dh_out = dF
    for i in reversed(range(config.layers)):
        c = cache["layers"][i]
        dln2_in, dg2, db2 = _layer_norm_bwd(dh_out, c["ln2"])
        grads[f"enc.{i}.ln2.g"] += dg2
        grads[f"enc.{i}.ln2.b"] += db2
        df2 = _dropout_bwd(dln2_in, c["drop2"])
        dact, dw2, db_l2 = _linear_bwd(c["act"], params[f"enc.{i}.ff.l2.w"], df2)
        grads[f"enc.{i}.ff.l2.w"] += dw2
        grads[f"enc.{i}.ff.l2.b"] += db_l2
        f1 = c["f1"]
        df1 = dact * (c["cdf"] + f1 * (np.exp(-0.5 * f1 * f1) * _INV_SQRT_2PI))
        dffin, dw1, db_l1 = _linear_bwd(c["ff_in"], params[f"enc.{i}.ff.l1.w"], df1)
        grads[f"enc.{i}.ff.l1.w"] += dw1
        grads[f"enc.{i}.ff.l1.b"] += db_l1
        dh1 = dln2_in + dffin  # residual

        dln1_in, dg1, db1 = _layer_norm_bwd(dh1, c["ln1"])
        grads[f"enc.{i}.ln1.g"] += dg1
        grads[f"enc.{i}.ln1.b"] += db1
        dattn = _dropout_bwd(dln1_in, c["drop1"])
        dctx, dwo, dbo = _linear_bwd(c["ctx"], params[f"enc.{i}.attn.wo.w"], dattn)
        grads[f"enc.{i}.attn.wo.w"] += dwo
        grads[f"enc.{i}.attn.wo.b"] += dbo

        dctx_h = dctx.reshape(B, L, nh, dh).transpose(0, 2, 1, 3)
        probs, qh, kh, vh = c["probs"], c["qh"], c["kh"], c["vh"]
        dv_h = probs.transpose(0, 1, 3, 2) @ dctx_h
        dprobs = dctx_h @ vh.transpose(0, 1, 3, 2)
        dscores = probs * (dprobs - (dprobs * probs).sum(-1, keepdims=True))
        dq_h = dscores @ kh * cache["scale"]
        dk_h = dscores.transpose(0, 1, 3, 2) @ qh * cache["scale"]

        dq = dq_h.transpose(0, 2, 1, 3).reshape(B, L, config.hidden)
        dk = dk_h.transpose(0, 2, 1, 3).reshape(B, L, config.hidden)
        dv = dv_h.transpose(0, 2, 1, 3).reshape(B, L, config.hidden)

        dpre = dln1_in  # residual
        for name, dout in (("wq", dq), ("wk", dk), ("wv", dv)):
            dx, dw, db = _linear_bwd(c["pre"], params[f"enc.{i}.attn.{name}.w"], dout)
            grads[f"enc.{i}.attn.{name}.w"] += dw
            grads[f"enc.{i}.attn.{name}.b"] += db
            dpre = dpre + dx
        dh_out = dpre

    grads["enc.pos"][:L] += dh_out.sum(0)
    dcat, dproj_w, dproj_b = _linear_bwd(cache["cat"], params["emb.proj.w"], dh_out)
    grads["emb.proj.w"] += dproj_w
    grads["emb.proj.b"] += dproj_b

    offset = 0
    x = cache["x"]
    flat_dcat = dcat.reshape(-1, dcat.shape[-1])
    for k, (attr, size, vocab) in enumerate(
        zip(ATTRIBUTES, config.embedding_sizes, config.vocab_sizes)
    ):
        piece = flat_dcat[:, offset : offset + size]
        # scatter-add via a one-hot matmul; np.add.at is an order slower here
        onehot = np.zeros((vocab, x.shape[0] * x.shape[1]), dtype=piece.dtype)
        onehot[x[:, :, k].reshape(-1), np.arange(onehot.shape[1])] = 1.0
        grads[f"emb.{attr}"] += onehot @ piece
        grads[f"emb.{attr}"][0] = 0.0  # pad row stays pinned
        offset += size


# ---------------------------------------------------------------------------
# heads

def classify_forward(params: Params, feats: np.ndarray, maskf: np.ndarray):
    counts = maskf.sum(1)
    if (counts == 0).any():
        raise ValueError("classification requires at least one non-pad row")
    pooled = (feats * maskf[:, :, None]).sum(1) / counts[:, None]
    logits = _linear_fwd(pooled, params["lab.out.w"], params["lab.out.b"])
    probs = softmax(logits)
    return probs, (pooled, counts)


def decode_forward(params: Params, feats: np.ndarray, labels: np.ndarray, config: ModelConfig):
    """Label-conditioned per-attribute regression heads. labels: (B,) ints."""
    B, L, _ = feats.shape
    lab = params["dec.label"][labels]  # (B, E)
    lab_tiled = np.broadcast_to(lab[:, None, :], (B, L, lab.shape[-1]))
    g = np.concatenate([feats, lab_tiled], axis=-1)
    w = np.stack([params[f"dec.head.{a}.w"][:, 0] for a in ATTRIBUTES], axis=1)
    b = np.stack([params[f"dec.head.{a}.b"][0] for a in ATTRIBUTES])
    pred = g @ w + b  # (B, L, K)
    return pred, (g, w, labels)


def decode_backward(params: Params, cache, dpred: np.ndarray, grads: Params, config: ModelConfig):
    g, w, labels = cache
    hidden = config.hidden
    flat_g = g.reshape(-1, g.shape[-1])
    flat_d = dpred.reshape(-1, dpred.shape[-1])
    dW = flat_g.T @ flat_d  # (H+E, K)
    for k, attr in enumerate(ATTRIBUTES):
        grads[f"dec.head.{attr}.w"] += dW[:, k : k + 1]
        grads[f"dec.head.{attr}.b"] += flat_d[:, k].sum(keepdims=True)
    dg = dpred @ w.T
    dfeats = dg[:, :, :hidden]
    dlab = dg[:, :, hidden:].sum(1)
    np.add.at(grads["dec.label"], labels, dlab)
    return dfeats
