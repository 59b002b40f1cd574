"""Joint training loop (Adam), the trained-model state, and the gradient check."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..dataset import RepetitionSample
from ..rules import LABEL_INDEX, TRAINABLE_TYPES, RepetitionType
from ..vocab import TokenMatrix
from .config import ModelConfig
from .losses import (
    batch_backward,
    batch_forward,
    ones_matrix,
    repetition_matrix,
    total_loss,
)
from .network import Params, classify_forward, decode_forward, init_params, trunk_forward

VARIANTS = ("V", "R", "RR")


class TrainingDivergedError(RuntimeError):
    pass


@dataclass
class ModelState:
    """Everything a trained model carries: parameters, moments, bookkeeping."""

    config: ModelConfig
    variant: str
    params: Params
    adam_m: Params
    adam_v: Params
    step: int = 0
    seed: int = 0

    @classmethod
    def fresh(cls, config: ModelConfig, variant: str = "RR") -> "ModelState":
        if variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        rng = np.random.default_rng(config.seed)
        params = init_params(config, rng)
        zeros = lambda: {k: np.zeros_like(v) for k, v in params.items()}
        return cls(
            config=config,
            variant=variant,
            params=params,
            adam_m=zeros(),
            adam_v=zeros(),
            seed=config.seed,
        )


def sample_matrices(
    samples: list[RepetitionSample], config: ModelConfig, variant: str
) -> dict[str, np.ndarray]:
    """Stack a dataset into training arrays; A follows the variant."""
    n = len(samples)
    L = config.max_rows
    x = np.zeros((n, L, 7), dtype=np.int64)
    t = np.zeros((n, L, 7), dtype=np.int64)
    y = np.zeros(n, dtype=np.int64)
    a = np.zeros((n, L, 7), dtype=np.dtype(config.dtype))
    for i, s in enumerate(samples):
        x[i] = s.input.rows[:L]
        t[i] = s.target.rows[:L]
        y[i] = LABEL_INDEX[s.label]
        if variant == "V":
            a[i] = ones_matrix(t[i], config)
        else:
            a[i] = repetition_matrix(t[i], min(s.target.valid_len, L), s.label, config)
    return {"x": x, "target": t, "y": y, "A": a}


def adam_step(state: ModelState, grads: Params, lr: float, b1=0.9, b2=0.999, eps=1e-8) -> None:
    state.step += 1
    t = state.step
    for name, g in grads.items():
        m = state.adam_m[name]
        v = state.adam_v[name]
        m *= b1
        m += (1 - b1) * g
        v *= b2
        v += (1 - b2) * (g * g)
        mhat = m / (1 - b1**t)
        vhat = v / (1 - b2**t)
        state.params[name] -= (lr * mhat / (np.sqrt(vhat) + eps)).astype(state.params[name].dtype)


@dataclass
class TrainLog:
    rows: list[tuple[int, float, float, float]] = field(default_factory=list)

    def append(self, step: int, loss_c: float, loss_r: float, total: float) -> None:
        self.rows.append((step, loss_c, loss_r, total))

    def write_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["step", "loss_c", "loss_r", "total"])
            writer.writerows(self.rows)

    def window_means(self, window: int) -> list[float]:
        totals = [r[3] for r in self.rows]
        return [
            float(np.mean(totals[i : i + window]))
            for i in range(0, len(totals) - window + 1, window)
        ]


def train(
    samples: list[RepetitionSample],
    config: ModelConfig,
    variant: str = "RR",
) -> tuple[ModelState, TrainLog]:
    """Mini-batch Adam over the joint objective until the loss plateaus.

    Stops when the windowed mean total loss improves by less than
    stop_epsilon (relative) for stop_patience consecutive windows, or at
    max_steps. A NaN/inf loss aborts with diagnostics.
    """
    if not samples:
        raise ValueError("training needs a non-empty dataset")
    if variant not in VARIANTS:
        raise ValueError(f"variant must be one of {VARIANTS}")

    state = ModelState.fresh(config, variant)
    rng = np.random.default_rng(config.seed + 1)  # batch order + dropout
    data = sample_matrices(samples, config, variant)
    n = len(samples)
    log = TrainLog()

    order = np.array([], dtype=np.int64)
    prev_window_mean: float | None = None
    flat_windows = 0
    window_sum = 0.0

    for step in range(1, config.max_steps + 1):
        if len(order) < config.batch_size:
            order = np.concatenate([order, rng.permutation(n)])
        idx, order = order[: config.batch_size], order[config.batch_size :]
        batch = {k: v[idx] for k, v in data.items()}

        loss_c, loss_r, cache = batch_forward(state.params, batch, config, train=True, rng=rng)
        total = total_loss(loss_c, loss_r, config.lam)
        if not np.isfinite(total):
            raise TrainingDivergedError(
                f"loss diverged at step {step}: L_c={loss_c}, L_r={loss_r}"
            )
        grads = batch_backward(state.params, cache, config)
        adam_step(state, grads, config.learning_rate)
        log.append(step, loss_c, loss_r, total)

        window_sum += total
        if step % config.stop_window == 0:
            mean = window_sum / config.stop_window
            window_sum = 0.0
            if prev_window_mean is not None:
                rel = (prev_window_mean - mean) / max(abs(prev_window_mean), 1e-12)
                flat_windows = flat_windows + 1 if rel < config.stop_epsilon else 0
                if flat_windows >= config.stop_patience:
                    break
            prev_window_mean = mean
    return state, log


# ---------------------------------------------------------------------------
# inference entry points

def _as_batch(tm: TokenMatrix, config: ModelConfig) -> np.ndarray:
    L = config.max_rows
    return tm.rows[:L][None].astype(np.int64)


def classify_tokens(state: ModelState, tm: TokenMatrix) -> np.ndarray:
    """Class probability vector for one motif (evaluation mode)."""
    x = _as_batch(tm, state.config)
    mask = (x[:, :, 3] != 0).astype(np.dtype(state.config.dtype))
    feats, _ = trunk_forward(state.params, x, mask, state.config, train=False)
    probs, _ = classify_forward(state.params, feats, mask)
    return probs[0]


def decode_tokens(state: ModelState, tm: TokenMatrix, label: RepetitionType) -> np.ndarray:
    """Raw decoder regression output (L, K) for one motif under a target label."""
    x = _as_batch(tm, state.config)
    mask = (x[:, :, 3] != 0).astype(np.dtype(state.config.dtype))
    feats, _ = trunk_forward(state.params, x, mask, state.config, train=False)
    y = np.array([LABEL_INDEX[label]], dtype=np.int64)
    pred, _ = decode_forward(state.params, feats, y, state.config)
    return pred[0]


# ---------------------------------------------------------------------------
# gradient verification

def gradient_check(
    config: ModelConfig | None = None,
    coords_per_tensor: int = 6,
    step_size: float = 1e-4,
    seed: int = 0,
) -> dict[str, float]:
    """Max relative error, per parameter tensor, of analytic vs central FD.

    Runs in 64-bit, evaluation mode (no dropout). Relative error uses an
    absolute floor of 1e-4 in the denominator so near-zero coordinates do
    not register finite-difference noise as disagreement.
    """
    config = config or ModelConfig.tiny()
    if np.dtype(config.dtype) != np.float64:
        raise ValueError("gradient checks must run in float64")
    rng = np.random.default_rng(seed)
    params = init_params(config, rng)

    B, L = 2, config.max_rows
    batch = _random_batch(config, rng, B, L)

    def loss_fn() -> float:
        lc, lr, _ = batch_forward(params, batch, config, train=False)
        return total_loss(lc, lr, config.lam)

    _, _, cache = batch_forward(params, batch, config, train=False)
    grads = batch_backward(params, cache, config)

    errors: dict[str, float] = {}
    for name in sorted(params):
        tensor = params[name]
        flat = tensor.reshape(-1)
        # the pad row of each embedding table is pinned to zero, not trained
        first = tensor.shape[1] if name.startswith("emb.") and name.count(".") == 1 else 0
        k = min(coords_per_tensor, flat.size - first)
        picked = first + rng.choice(flat.size - first, size=k, replace=False)
        worst = 0.0
        for c in picked:
            original = flat[c]
            flat[c] = original + step_size
            up = loss_fn()
            flat[c] = original - step_size
            down = loss_fn()
            flat[c] = original
            fd = (up - down) / (2 * step_size)
            an = grads[name].reshape(-1)[c]
            denom = max(abs(an), abs(fd), 1e-4)
            worst = max(worst, abs(an - fd) / denom)
        errors[name] = worst
    return errors


def layer_gradient_checks(step_size: float = 1e-4, seed: int = 0) -> dict[str, float]:
    """FD agreement for each primitive in isolation, at its own small scale.

    Complements gradient_check: the end-to-end run compounds every layer and
    a realistic loss magnitude, while these isolate one sub-module at a time
    so the comparison happens far above finite-difference roundoff.
    """
    from .losses import loss_classification, loss_reconstruction
    from .network import (
        _layer_norm_bwd,
        _layer_norm_fwd,
        _linear_bwd,
        _linear_fwd,
        gelu,
        gelu_grad,
        softmax,
    )

    rng = np.random.default_rng(seed)
    errors: dict[str, float] = {}

    def fd_check(name, tensors, loss_fn, analytic):
        worst = 0.0
        for tensor, grad in zip(tensors, analytic):
            flat, gflat = tensor.reshape(-1), grad.reshape(-1)
            for c in rng.choice(flat.size, size=min(8, flat.size), replace=False):
                orig = flat[c]
                flat[c] = orig + step_size
                up = loss_fn()
                flat[c] = orig - step_size
                down = loss_fn()
                flat[c] = orig
                fd = (up - down) / (2 * step_size)
                denom = max(abs(gflat[c]), abs(fd), 1e-4)
                worst = max(worst, abs(gflat[c] - fd) / denom)
        errors[name] = worst

    # linear projection
    x = rng.standard_normal((5, 7))
    w = rng.standard_normal((7, 4))
    b = rng.standard_normal(4)
    r = rng.standard_normal((5, 4))
    _, dw, db = _linear_bwd(x, w, (_linear_fwd(x, w, b) * 0 + r))
    fd_check("linear", [w, b], lambda: float((_linear_fwd(x, w, b) * r).sum()), [dw, db])

    # layer normalization
    x = rng.standard_normal((4, 6))
    g = rng.standard_normal(6)
    beta = rng.standard_normal(6)
    r = rng.standard_normal((4, 6))

    def ln_loss():
        out, _ = _layer_norm_fwd(x, g, beta)
        return float((out * r).sum())

    _, ln_cache = _layer_norm_fwd(x, g, beta)
    dx, dg, dbeta = _layer_norm_bwd(r, ln_cache)
    fd_check("layer_norm", [g, beta, x], ln_loss, [dg, dbeta, dx])

    # GeLU
    x = rng.standard_normal((6, 6))
    r = rng.standard_normal((6, 6))
    fd_check("gelu", [x], lambda: float((gelu(x) * r).sum()), [r * gelu_grad(x)])

    # scaled dot-product attention (single head, no projections)
    q = rng.standard_normal((3, 4))
    k = rng.standard_normal((3, 4))
    v = rng.standard_normal((3, 4))
    r = rng.standard_normal((3, 4))
    scale = 1.0 / np.sqrt(4)

    def attn_loss():
        probs = softmax(q @ k.T * scale)
        return float(((probs @ v) * r).sum())

    probs = softmax(q @ k.T * scale)
    dv = probs.T @ r
    dprobs = r @ v.T
    dscores = probs * (dprobs - (dprobs * probs).sum(-1, keepdims=True))
    dq = dscores @ k * scale
    dk = dscores.T @ q * scale
    fd_check("attention", [q, k, v], attn_loss, [dq, dk, dv])

    # softmax cross-entropy head
    logits = rng.standard_normal((4, 5))
    y = rng.integers(0, 5, size=4)

    def ce_loss():
        return loss_classification(softmax(logits), y)

    probs = softmax(logits)
    dlogits = probs.copy()
    dlogits[np.arange(4), y] -= 1.0
    fd_check("classify_head", [logits], ce_loss, [dlogits])

    # weighted-residual reconstruction head
    pred = rng.standard_normal((2, 5, 7))
    target = rng.standard_normal((2, 5, 7))
    a = np.abs(rng.standard_normal((2, 5, 7)))
    fd_check(
        "reconstruction",
        [pred],
        lambda: loss_reconstruction(pred, target, a),
        [-2.0 * a * a * (target - pred)],
    )
    return errors


def _random_batch(config: ModelConfig, rng: np.random.Generator, B: int, L: int) -> dict:
    """A structurally valid random batch for gradient checking.

    The target is a small perturbation of the input, like a real repetition
    pair; a huge residual would amplify finite-difference roundoff and mask
    genuine agreement.
    """
    x = np.zeros((B, L, 7), dtype=np.int64)
    for b in range(B):
        valid = int(rng.integers(L // 2, L + 1))
        for k, size in enumerate(config.vocab_sizes):
            hi = min(size, 16)  # small token values keep the loss well-scaled
            x[b, :valid, k] = rng.integers(1, hi, size=valid)
        x[b, :valid, 3] = rng.integers(1, 3, size=valid)  # note/metric
    t = x.copy()
    bump = rng.integers(-1, 2, size=t.shape)
    bump[:, :, 3] = 0  # keep the type column structural
    t = np.where(t != 0, np.clip(t + bump, 1, 15), 0)
    y = rng.integers(0, config.num_classes, size=B)
    a = np.zeros((B, L, 7), dtype=np.float64)
    for b in range(B):
        valid = int((t[b, :, 3] != 0).sum())
        a[b] = repetition_matrix(t[b], valid, TRAINABLE_TYPES[int(y[b])], config)
    return {"x": x, "target": t, "y": y.astype(np.int64), "A": a}
