"""From-scratch feed-forward classifier over assembled representations.

Plain numpy throughout: parameter init, forward pass, softmax cross-entropy
with analytic gradients, Adam updates, and a central finite-difference
gradient verifier. Parameters are float32; losses and the gradient check
accumulate in float64.

Architecture, in fixed order: optional per-block linear projection of each
manifest block down to 64 dims, inverted dropout on the classifier input,
zero or one ReLU hidden layer (with dropout after the ReLU), and an affine
output layer producing one score per class. Layers compute x @ W.T + b with
W shaped (out_features, in_features).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, DataError, TrainingDiverged
from .hashing import config_hash as _hash_payload

HIDDEN_LAYER_CHOICES = (0, 1)
HIDDEN_DIM_CHOICES = (64, 256)
DROPOUT_CHOICES = (0.0, 0.1, 0.2, 0.3)
BATCH_SIZE_CHOICES = (32, 128)
PROJECTION_DIM = 64

ModelParams = dict[str, np.ndarray]
AdamState = dict


@dataclass(frozen=True)
class MlpConfig:
    """Classifier hyperparameters; grid-valued fields are validated strictly."""

    hidden_layers: int = 1
    hidden_dim: int = 64
    dropout: float = 0.0
    project_to_64: bool = False
    batch_size: int = 32
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-8
    max_epochs: int = 100
    patience: int | None = 10
    seed: int = 0

    def __post_init__(self):
        if self.hidden_layers not in HIDDEN_LAYER_CHOICES:
            raise ConfigError(f"hidden_layers must be one of {HIDDEN_LAYER_CHOICES}")
        if self.hidden_dim not in HIDDEN_DIM_CHOICES:
            raise ConfigError(f"hidden_dim must be one of {HIDDEN_DIM_CHOICES}")
        if not 0.0 <= self.dropout <= 0.3:
            raise ConfigError(f"dropout must be in [0.0, 0.3], got {self.dropout}")
        if self.batch_size not in BATCH_SIZE_CHOICES:
            raise ConfigError(f"batch_size must be one of {BATCH_SIZE_CHOICES}")
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be positive")
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ConfigError("adam betas must lie in (0, 1)")
        if self.epsilon <= 0:
            raise ConfigError("adam epsilon must be positive")
        if self.max_epochs < 1:
            raise ConfigError("max_epochs must be >= 1")
        if self.patience is not None and self.patience < 0:
            raise ConfigError("patience must be None or >= 0")

    def config_hash(self) -> str:
        """Hash of every hyperparameter except the seed."""
        payload = asdict(self)
        del payload["seed"]
        return _hash_payload(payload)


def enumerate_grid(
    learning_rate: float = 1e-3,
    max_epochs: int = 100,
    patience: int | None = 10,
    seed: int = 0,
) -> tuple[MlpConfig, ...]:
    """All 64 grid configs, in a fixed nested-loop order."""
    configs = []
    for hidden_layers in HIDDEN_LAYER_CHOICES:
        for hidden_dim in HIDDEN_DIM_CHOICES:
            for dropout in DROPOUT_CHOICES:
                for project_to_64 in (False, True):
                    for batch_size in BATCH_SIZE_CHOICES:
                        configs.append(MlpConfig(
                            hidden_layers=hidden_layers,
                            hidden_dim=hidden_dim,
                            dropout=dropout,
                            project_to_64=project_to_64,
                            batch_size=batch_size,
                            learning_rate=learning_rate,
                            max_epochs=max_epochs,
                            patience=patience,
                            seed=seed,
                        ))
    return tuple(configs)


def classifier_input_dim(config: MlpConfig, input_dim: int,
                         block_lengths: tuple[int, ...] | None = None) -> int:
    """Width of the vector the classifier proper sees, after any projection."""
    if not config.project_to_64:
        return input_dim
    if not block_lengths:
        raise ConfigError("project_to_64 requires the manifest block lengths")
    if sum(block_lengths) != input_dim:
        raise ConfigError(
            f"block lengths sum to {sum(block_lengths)}, input dim is {input_dim}")
    return PROJECTION_DIM * len(block_lengths)


def _kaiming_uniform(rng: np.random.Generator, out_features: int, in_features: int) -> np.ndarray:
    bound = math.sqrt(6.0 / in_features)
    return rng.uniform(-bound, bound, size=(out_features, in_features)).astype(np.float32)


def init_params(
    config: MlpConfig,
    input_dim: int,
    n_classes: int,
    rng: np.random.Generator,
    block_lengths: tuple[int, ...] | None = None,
) -> ModelParams:
    """Seeded parameter init: fan-in-scaled uniform weights, zero biases.

    Draw order is fixed (projections in block order, hidden, output) so a
    given rng state always yields the same tensors.
    """
    if n_classes < 2:
        raise ConfigError(f"need at least 2 classes, got {n_classes}")
    params: ModelParams = {}
    if config.project_to_64:
        if not block_lengths:
            raise ConfigError("project_to_64 requires the manifest block lengths")
        for i, length in enumerate(block_lengths):
            params[f"proj{i}_W"] = _kaiming_uniform(rng, PROJECTION_DIM, length)
    width = classifier_input_dim(config, input_dim, block_lengths)
    if config.hidden_layers == 1:
        params["hidden_W"] = _kaiming_uniform(rng, config.hidden_dim, width)
        params["hidden_b"] = np.zeros(config.hidden_dim, dtype=np.float32)
        width = config.hidden_dim
    params["out_W"] = _kaiming_uniform(rng, n_classes, width)
    params["out_b"] = np.zeros(n_classes, dtype=np.float32)
    return params


def make_dropout_masks(
    config: MlpConfig,
    rng: np.random.Generator,
    batch_size: int,
    classifier_width: int,
) -> dict[str, np.ndarray] | None:
    """Inverted-dropout masks for one batch; None when dropout is 0."""
    if config.dropout == 0.0:
        return None
    keep = 1.0 - config.dropout
    masks = {
        "input": (rng.random((batch_size, classifier_width)) < keep)
                 .astype(np.float32) / np.float32(keep)}
    if config.hidden_layers == 1:
        masks["hidden"] = (rng.random((batch_size, config.hidden_dim)) < keep) \
                          .astype(np.float32) / np.float32(keep)
    return masks


def _projection_blocks(params: ModelParams) -> list[np.ndarray]:
    blocks = []
    i = 0
    while f"proj{i}_W" in params:
        blocks.append(params[f"proj{i}_W"])
        i += 1
    return blocks


def _forward_cached(params: ModelParams, config: MlpConfig, x: np.ndarray,
                    masks: dict[str, np.ndarray] | None):
    """Forward pass returning (scores, intermediates-for-backprop)."""
    if x.ndim != 2:
        raise DataError(f"batch must be 2-D, got shape {x.shape}")
    if config.project_to_64:
        proj = _projection_blocks(params)
        total = sum(w.shape[1] for w in proj)
        if total != x.shape[1]:
            raise DataError(f"projection expects input dim {total}, got {x.shape[1]}")
        offset = 0
        parts = []
        for w in proj:
            parts.append(x[:, offset : offset + w.shape[1]] @ w.T)
            offset += w.shape[1]
        h = np.concatenate(parts, axis=1)
    else:
        h = x
    expected = params["hidden_W"].shape[1] if config.hidden_layers == 1 \
        else params["out_W"].shape[1]
    if h.shape[1] != expected:
        raise DataError(f"classifier expects input dim {expected}, got {h.shape[1]}")
    if masks is not None:
        h = h * masks["input"]
    if config.hidden_layers == 1:
        pre_act = h @ params["hidden_W"].T + params["hidden_b"]
        hidden = np.maximum(pre_act, 0)
        if masks is not None:
            hidden = hidden * masks["hidden"]
        scores = hidden @ params["out_W"].T + params["out_b"]
    else:
        pre_act = None
        hidden = None
        scores = h @ params["out_W"].T + params["out_b"]
    return scores, (h, pre_act, hidden)


def forward(params: ModelParams, config: MlpConfig, x: np.ndarray,
            masks: dict[str, np.ndarray] | None = None) -> np.ndarray:
    """Class scores for a batch; masks=None is deterministic eval mode."""
    scores, _ = _forward_cached(params, config, x, masks)
    return scores


def predict(params: ModelParams, config: MlpConfig, x: np.ndarray) -> np.ndarray:
    """Eval-mode argmax labels (first index wins ties)."""
    return np.argmax(forward(params, config, x), axis=1)


def _softmax_nll(scores: np.ndarray, y: np.ndarray) -> tuple[float, np.ndarray]:
    """Mean negative log-likelihood in float64, plus float64 softmax probs."""
    n_classes = scores.shape[1]
    if y.min() < 0 or y.max() >= n_classes:
        raise DataError(f"labels must lie in [0, {n_classes}), got [{y.min()}, {y.max()}]")
    if not np.isfinite(scores).all():
        raise TrainingDiverged("non-finite classifier scores")
    s = scores.astype(np.float64)
    s = s - s.max(axis=1, keepdims=True)
    log_z = np.log(np.exp(s).sum(axis=1))
    rows = np.arange(s.shape[0])
    loss = float(np.mean(log_z - s[rows, y]))
    probs = np.exp(s - log_z[:, None])
    return loss, probs


def batch_loss(params: ModelParams, config: MlpConfig, x: np.ndarray, y: np.ndarray,
               masks: dict[str, np.ndarray] | None = None) -> float:
    scores, _ = _forward_cached(params, config, x, masks)
    loss, _ = _softmax_nll(scores, y)
    return loss


def loss_and_grad(
    params: ModelParams,
    config: MlpConfig,
    x: np.ndarray,
    y: np.ndarray,
    masks: dict[str, np.ndarray] | None = None,
) -> tuple[float, ModelParams]:
    """Mean softmax cross-entropy and analytic gradients for every tensor."""
    batch = x.shape[0]
    if batch != len(y):
        raise DataError(f"batch of {batch} rows has {len(y)} labels")
    scores, (h, pre_act, hidden) = _forward_cached(params, config, x, masks)
    loss, probs = _softmax_nll(scores, y)
    if not math.isfinite(loss):
        raise TrainingDiverged(f"non-finite loss {loss}")

    dtype = params["out_W"].dtype
    d_scores = probs
    d_scores[np.arange(batch), y] -= 1.0
    d_scores = (d_scores / batch).astype(dtype)

    grads: ModelParams = {}
    if config.hidden_layers == 1:
        grads["out_W"] = d_scores.T @ hidden
        grads["out_b"] = d_scores.sum(axis=0)
        d_hidden = d_scores @ params["out_W"]
        if masks is not None:
            d_hidden = d_hidden * masks["hidden"]
        d_pre = d_hidden * (pre_act > 0)
        grads["hidden_W"] = d_pre.T @ h
        grads["hidden_b"] = d_pre.sum(axis=0)
        d_h = d_pre @ params["hidden_W"]
    else:
        grads["out_W"] = d_scores.T @ h
        grads["out_b"] = d_scores.sum(axis=0)
        d_h = d_scores @ params["out_W"]
    if masks is not None:
        d_h = d_h * masks["input"]
    if config.project_to_64:
        offset = 0
        for i, w in enumerate(_projection_blocks(params)):
            length = w.shape[1]
            d_block = d_h[:, i * PROJECTION_DIM : (i + 1) * PROJECTION_DIM]
            grads[f"proj{i}_W"] = d_block.T @ x[:, offset : offset + length]
            offset += length
    return loss, grads


def init_adam_state(params: ModelParams) -> AdamState:
    return {
        "t": 0,
        "m": {k: np.zeros_like(v) for k, v in params.items()},
        "v": {k: np.zeros_like(v) for k, v in params.items()},
    }


def adam_step(
    params: ModelParams,
    grads: ModelParams,
    state: AdamState,
    lr: float = 1e-3,
    betas: tuple[float, float] = (0.9, 0.999),
    eps: float = 1e-8,
) -> tuple[ModelParams, AdamState]:
    """One bias-corrected Adam update; inputs are not mutated."""
    beta1, beta2 = betas
    t = state["t"] + 1
    new_params: ModelParams = {}
    new_m = {}
    new_v = {}
    for key, p in params.items():
        g = grads[key]
        m = beta1 * state["m"][key] + (1.0 - beta1) * g
        v = beta2 * state["v"][key] + (1.0 - beta2) * (g * g)
        m_hat = m / (1.0 - beta1 ** t)
        v_hat = v / (1.0 - beta2 ** t)
        new_params[key] = p - lr * m_hat / (np.sqrt(v_hat) + eps)
        new_m[key] = m
        new_v[key] = v
    return new_params, {"t": t, "m": new_m, "v": new_v}


def finite_difference_check(
    params: ModelParams,
    config: MlpConfig,
    x: np.ndarray,
    y: np.ndarray,
    masks: dict[str, np.ndarray] | None = None,
    step: float = 1e-5,
    atol: float = 1e-9,
) -> float:
    """Worst relative error of analytic vs central-difference gradients.

    Everything runs in float64 with the dropout masks held fixed. Central
    differences carry cancellation noise of roughly eps/(2*step) ~ 1e-11 in
    absolute terms, so components whose absolute disagreement is below
    ``atol`` count as exact; the relative criterion means nothing there.
    """
    p64 = {k: v.astype(np.float64) for k, v in params.items()}
    x64 = x.astype(np.float64)
    m64 = None if masks is None else {k: v.astype(np.float64) for k, v in masks.items()}
    _, analytic = loss_and_grad(p64, config, x64, y, m64)
    worst = 0.0
    for name, tensor in p64.items():
        flat = tensor.reshape(-1)
        grad = analytic[name].reshape(-1)
        for j in range(flat.size):
            saved = flat[j]
            flat[j] = saved + step
            loss_plus = batch_loss(p64, config, x64, y, m64)
            flat[j] = saved - step
            loss_minus = batch_loss(p64, config, x64, y, m64)
            flat[j] = saved
            numeric = (loss_plus - loss_minus) / (2.0 * step)
            diff = abs(grad[j] - numeric)
            if diff <= atol:
                continue
            worst = max(worst, diff / max(abs(grad[j]), abs(numeric)))
    return worst
