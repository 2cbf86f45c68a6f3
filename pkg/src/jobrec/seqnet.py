"""Bidirectional recurrent classifier over two-step application sequences.

The model reads a pair of (candidate state, job) feature vectors, one per
timestep, through two stacked bidirectional LSTM layers, pools the two
timestep outputs with a learned attention score, and emits the probability
that the second job is selected.  Training uses binary cross-entropy,
mini-batch Adam, inverted dropout between the layers, and early stopping on
validation F1 for the positive class.

Everything is float64 and seeded; training twice with the same seed yields
bit-identical parameters.
"""

from __future__ import annotations

import logging
from bisect import bisect_left
from dataclasses import dataclass

import numpy as np

from jobrec import kernels
from jobrec.domain import Dataset, snapshot_at
from jobrec.errors import (
    AllSkillsUnknown,
    NoInteractionHistory,
    NonFiniteLoss,
    NoSnapshotBefore,
    ShapeMismatch,
    SingleClassDataset,
)
from jobrec.featurize import Featurizer
from jobrec.ioformat import load_arrays, save_arrays

log = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1

# Fixed parameter order; initialization, Adam updates and checkpoints all
# iterate in this order so seeded runs are reproducible.
PARAM_ORDER = (
    "l1f_Wx", "l1f_Wh", "l1f_b",
    "l1b_Wx", "l1b_Wh", "l1b_b",
    "l2f_Wx", "l2f_Wh", "l2f_b",
    "l2b_Wx", "l2b_Wh", "l2b_b",
    "attn_v", "out_w", "out_b",
)


@dataclass(frozen=True)
class TrainingExample:
    """One two-timestep sequence with its outcome label."""

    timestep_1: np.ndarray
    timestep_2: np.ndarray
    label: int

    def __post_init__(self):
        if self.timestep_1.shape != self.timestep_2.shape:
            raise ShapeMismatch(
                f"timestep widths differ: {self.timestep_1.shape} vs {self.timestep_2.shape}"
            )
        if self.timestep_1.ndim != 1:
            raise ShapeMismatch("timestep vectors must be one-dimensional")
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label!r}")


@dataclass(frozen=True)
class PredictionOutput:
    probability: float
    attention_weights: np.ndarray  # shape (2,), non-negative, sums to 1


@dataclass
class ModelParams:
    """All trainable weights plus the sizes needed to interpret them."""

    input_size: int
    hidden1: int
    hidden2: int
    dropout_rate: float
    weights: dict

    def copy(self) -> "ModelParams":
        return ModelParams(
            input_size=self.input_size,
            hidden1=self.hidden1,
            hidden2=self.hidden2,
            dropout_rate=self.dropout_rate,
            weights={k: v.copy() for k, v in self.weights.items()},
        )


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    epochs: int = 30
    batch_size: int = 64
    dropout_rate: float = 0.2
    patience: int = 5
    val_fraction: float = 0.15
    hidden1: int = 128
    hidden2: int = 64
    seed: int = 0


def _uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    bound = 1.0 / np.sqrt(float(fan_in))
    return rng.uniform(-bound, bound, size=shape)


def init_params(input_size: int, hidden1: int = 128, hidden2: int = 64,
                dropout_rate: float = 0.2, seed: int = 0) -> ModelParams:
    """Seeded uniform(+-1/sqrt(fan_in)) weights, zero biases, forget bias 1."""
    if input_size < 1 or hidden1 < 1 or hidden2 < 1:
        raise ValueError("input_size, hidden1 and hidden2 must be positive")
    if not 0.0 <= dropout_rate < 1.0:
        raise ValueError(f"dropout_rate must be in [0, 1), got {dropout_rate}")
    rng = np.random.default_rng(seed)
    w = {}
    l2_in = 2 * hidden1
    dims = {
        "l1f": (input_size, hidden1), "l1b": (input_size, hidden1),
        "l2f": (l2_in, hidden2), "l2b": (l2_in, hidden2),
    }
    for name in PARAM_ORDER:
        if name == "attn_v":
            w[name] = _uniform(rng, (2 * hidden2,), 2 * hidden2)
        elif name == "out_w":
            w[name] = _uniform(rng, (2 * hidden2,), 2 * hidden2)
        elif name == "out_b":
            w[name] = np.zeros(1)
        elif name.endswith("_Wx"):
            in_dim, h = dims[name[:3]]
            w[name] = _uniform(rng, (in_dim, 4 * h), in_dim)
        elif name.endswith("_Wh"):
            _, h = dims[name[:3]]
            w[name] = _uniform(rng, (h, 4 * h), h)
        elif name.endswith("_b"):
            _, h = dims[name[:3]]
            b = np.zeros(4 * h)
            b[h:2 * h] = 1.0  # forget gate opens at the start of training
            w[name] = b
    return ModelParams(input_size, hidden1, hidden2, dropout_rate, w)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _cell_step(w: dict, prefix: str, x: np.ndarray, h_prev: np.ndarray,
               c_prev: np.ndarray):
    z = x @ w[prefix + "_Wx"] + h_prev @ w[prefix + "_Wh"] + w[prefix + "_b"]
    h, c, gates = kernels.lstm_cell_forward(np.ascontiguousarray(z), c_prev)
    return h, c, {"x": x, "h_prev": h_prev, "c_prev": c_prev, "gates": gates}


def _bilstm_forward(w: dict, layer: str, x1: np.ndarray, x2: np.ndarray, hidden: int):
    """Run one bidirectional layer over the two timesteps.

    Returns per-timestep outputs (u1, u2), each (B, 2*hidden), plus caches.
    The reverse direction consumes timestep 2 first, so its state *at*
    timestep 1 comes from its second step.
    """
    batch = x1.shape[0]
    zeros = np.zeros((batch, hidden))
    hf1, cf1, cache_f1 = _cell_step(w, layer + "f", x1, zeros, zeros)
    hf2, _, cache_f2 = _cell_step(w, layer + "f", x2, hf1, cf1)
    hb_at2, cb2, cache_b_first = _cell_step(w, layer + "b", x2, zeros, zeros)
    hb_at1, _, cache_b_second = _cell_step(w, layer + "b", x1, hb_at2, cb2)
    u1 = np.concatenate([hf1, hb_at1], axis=1)
    u2 = np.concatenate([hf2, hb_at2], axis=1)
    caches = {"f1": cache_f1, "f2": cache_f2,
              "b_first": cache_b_first, "b_second": cache_b_second}
    return u1, u2, caches


def _cell_backprop(w: dict, prefix: str, dh: np.ndarray, dc: np.ndarray,
                   step_cache: dict, grads: dict):
    dz, dc_prev = kernels.lstm_cell_backward(
        np.ascontiguousarray(dh), np.ascontiguousarray(dc),
        step_cache["gates"], step_cache["c_prev"])
    grads[prefix + "_Wx"] += step_cache["x"].T @ dz
    grads[prefix + "_Wh"] += step_cache["h_prev"].T @ dz
    grads[prefix + "_b"] += dz.sum(axis=0)
    dx = dz @ w[prefix + "_Wx"].T
    dh_prev = dz @ w[prefix + "_Wh"].T
    return dx, dh_prev, dc_prev


def _bilstm_backward(w: dict, layer: str, caches: dict, du1: np.ndarray,
                     du2: np.ndarray, hidden: int, grads: dict):
    """Backpropagate through one bidirectional layer; returns (dx1, dx2)."""
    batch = du1.shape[0]
    zeros = np.zeros((batch, hidden))
    # Forward direction: unroll t2 -> t1.
    dx2_f, dh1_extra, dc1 = _cell_backprop(
        w, layer + "f", du2[:, :hidden], zeros, caches["f2"], grads)
    dx1_f, _, _ = _cell_backprop(
        w, layer + "f", du1[:, :hidden] + dh1_extra, dc1, caches["f1"], grads)
    # Reverse direction: its second step (which consumed x1) unrolls first.
    dx1_b, dhb_extra, dcb = _cell_backprop(
        w, layer + "b", du1[:, hidden:], zeros, caches["b_second"], grads)
    dx2_b, _, _ = _cell_backprop(
        w, layer + "b", du2[:, hidden:] + dhb_extra, dcb, caches["b_first"], grads)
    return dx1_f + dx1_b, dx2_f + dx2_b


def _forward_batch(params: ModelParams, X1: np.ndarray, X2: np.ndarray,
                   train_mode: bool = False, rng: np.random.Generator | None = None):
    """Full forward pass over a batch; returns (probs, attention, cache)."""
    if X1.shape[1] != params.input_size:
        raise ShapeMismatch(
            f"expected input width {params.input_size}, got {X1.shape[1]}")
    w = params.weights
    u1, u2, caches1 = _bilstm_forward(w, "l1", X1, X2, params.hidden1)

    if train_mode and params.dropout_rate > 0.0:
        if rng is None:
            rng = np.random.default_rng(0)
        keep = 1.0 - params.dropout_rate
        # Inverted dropout: scale at train time so inference needs no rescale.
        mask1 = (rng.random(u1.shape) < keep) / keep
        mask2 = (rng.random(u2.shape) < keep) / keep
    else:
        mask1 = mask2 = None
    u1d = u1 * mask1 if mask1 is not None else u1
    u2d = u2 * mask2 if mask2 is not None else u2

    v1, v2, caches2 = _bilstm_forward(w, "l2", u1d, u2d, params.hidden2)

    tv1 = np.tanh(v1)
    tv2 = np.tanh(v2)
    s1 = tv1 @ w["attn_v"]
    s2 = tv2 @ w["attn_v"]
    m = np.maximum(s1, s2)
    e1 = np.exp(s1 - m)
    e2 = np.exp(s2 - m)
    denom = e1 + e2
    a1 = e1 / denom
    a2 = e2 / denom
    context = a1[:, None] * v1 + a2[:, None] * v2
    logit = context @ w["out_w"] + w["out_b"][0]
    probs = _sigmoid(logit)
    attention = np.stack([a1, a2], axis=1)
    cache = {
        "X1": X1, "X2": X2, "caches1": caches1, "caches2": caches2,
        "u1d": u1d, "u2d": u2d, "mask1": mask1, "mask2": mask2,
        "v1": v1, "v2": v2, "tv1": tv1, "tv2": tv2,
        "a1": a1, "a2": a2, "context": context, "probs": probs,
    }
    return probs, attention, cache


def _zero_grads(params: ModelParams) -> dict:
    return {k: np.zeros_like(v) for k, v in params.weights.items()}


def _backward_batch(params: ModelParams, cache: dict, labels: np.ndarray) -> dict:
    """Gradients of mean binary cross-entropy over the batch."""
    w = params.weights
    batch = labels.shape[0]
    probs, a1, a2 = cache["probs"], cache["a1"], cache["a2"]
    v1, v2, tv1, tv2 = cache["v1"], cache["v2"], cache["tv1"], cache["tv2"]
    grads = _zero_grads(params)

    dlogit = (probs - labels) / batch  # sigmoid + cross-entropy shortcut
    grads["out_w"] += cache["context"].T @ dlogit
    grads["out_b"] += np.array([dlogit.sum()])
    dcontext = dlogit[:, None] * w["out_w"][None, :]

    da1 = (dcontext * v1).sum(axis=1)
    da2 = (dcontext * v2).sum(axis=1)
    dv1 = a1[:, None] * dcontext
    dv2 = a2[:, None] * dcontext
    inner = a1 * da1 + a2 * da2  # softmax Jacobian shared term
    ds1 = a1 * (da1 - inner)
    ds2 = a2 * (da2 - inner)
    grads["attn_v"] += tv1.T @ ds1 + tv2.T @ ds2
    dv1 += ds1[:, None] * w["attn_v"][None, :] * (1.0 - tv1 * tv1)
    dv2 += ds2[:, None] * w["attn_v"][None, :] * (1.0 - tv2 * tv2)

    du1d, du2d = _bilstm_backward(
        w, "l2", cache["caches2"], dv1, dv2, params.hidden2, grads)
    if cache["mask1"] is not None:
        du1d = du1d * cache["mask1"]
        du2d = du2d * cache["mask2"]
    _bilstm_backward(w, "l1", cache["caches1"], du1d, du2d, params.hidden1, grads)
    return grads


def forward(params: ModelParams, example: TrainingExample,
            train_mode: bool = False,
            rng: np.random.Generator | None = None) -> PredictionOutput:
    probs, attention, _ = _forward_batch(
        params, example.timestep_1[None, :], example.timestep_2[None, :],
        train_mode=train_mode, rng=rng)
    return PredictionOutput(float(probs[0]), attention[0])


def loss(probability: float, label: int) -> float:
    """Binary cross-entropy with probabilities clamped away from 0 and 1."""
    p = min(max(float(probability), 1e-12), 1.0 - 1e-12)
    y = float(label)
    return -(y * np.log(p) + (1.0 - y) * np.log(1.0 - p))


def backward(params: ModelParams, example: TrainingExample,
             label: int | None = None) -> dict:
    """Analytic gradients of the single-example loss (dropout disabled)."""
    y = example.label if label is None else label
    probs, _, cache = _forward_batch(
        params, example.timestep_1[None, :], example.timestep_2[None, :])
    return _backward_batch(params, cache, np.array([float(y)]))


class Adam:
    """Standard Adam with bias correction over a named weight dict."""

    def __init__(self, weights: dict, learning_rate: float = 1e-3,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.learning_rate = learning_rate
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self.m = {k: np.zeros_like(v) for k, v in weights.items()}
        self.v = {k: np.zeros_like(v) for k, v in weights.items()}

    def step(self, weights: dict, grads: dict) -> None:
        self.t += 1
        b1c = 1.0 - self.beta1 ** self.t
        b2c = 1.0 - self.beta2 ** self.t
        for name in sorted(weights):
            g = grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * (g * g)
            m_hat = self.m[name] / b1c
            v_hat = self.v[name] / b2c
            weights[name] -= (
                self.learning_rate * m_hat / (np.sqrt(v_hat) + self.eps))


def _f1_class1(preds: np.ndarray, labels: np.ndarray) -> float:
    tp = int(np.sum((preds == 1) & (labels == 1)))
    fp = int(np.sum((preds == 1) & (labels == 0)))
    fn = int(np.sum((preds == 0) & (labels == 1)))
    if tp == 0:
        return 0.0
    precision = tp / (tp + fp)
    recall = tp / (tp + fn)
    return 2.0 * precision * recall / (precision + recall)


def _predict_probs(params: ModelParams, X1: np.ndarray, X2: np.ndarray,
                   chunk: int = 512) -> np.ndarray:
    out = np.empty(X1.shape[0])
    for start in range(0, X1.shape[0], chunk):
        stop = start + chunk
        probs, _, _ = _forward_batch(params, X1[start:stop], X2[start:stop])
        out[start:stop] = probs
    return out


def _stratified_split(labels: np.ndarray, val_fraction: float,
                      rng: np.random.Generator):
    """Per-class shuffle and split so both classes appear in both folds."""
    train_idx, val_idx = [], []
    for cls in (0, 1):
        idx = np.flatnonzero(labels == cls)
        idx = idx[rng.permutation(idx.size)]
        n_val = int(round(val_fraction * idx.size))
        if val_fraction > 0.0 and idx.size > 1:
            n_val = min(max(n_val, 1), idx.size - 1)
        else:
            n_val = 0
        val_idx.append(idx[:n_val])
        train_idx.append(idx[n_val:])
    train = np.concatenate(train_idx)
    val = np.concatenate(val_idx)
    return train[rng.permutation(train.size)], np.sort(val)


def train(examples: list, config: TrainConfig | None = None):
    """Train the classifier; returns (best_params, history).

    Parameter selection keeps the epoch with the highest validation F1 for
    the positive class; training stops early after ``patience`` epochs
    without improvement.
    """
    config = config or TrainConfig()
    if not examples:
        raise SingleClassDataset("no training examples")
    labels = np.array([e.label for e in examples], dtype=np.float64)
    present = set(np.unique(labels).tolist())
    if present != {0.0, 1.0}:
        raise SingleClassDataset(
            f"training needs both classes, got labels {sorted(present)}")

    X1 = np.stack([e.timestep_1 for e in examples]).astype(np.float64)
    X2 = np.stack([e.timestep_2 for e in examples]).astype(np.float64)
    rng = np.random.default_rng(config.seed)
    params = init_params(X1.shape[1], config.hidden1, config.hidden2,
                         config.dropout_rate, seed=config.seed)
    if config.epochs <= 0:
        return params, []

    train_idx, val_idx = _stratified_split(labels, config.val_fraction, rng)
    if val_idx.size == 0:
        # Degenerate split: fall back to scoring on the training fold.
        val_idx = train_idx.copy()
    Xt1, Xt2, yt = X1[train_idx], X2[train_idx], labels[train_idx]
    Xv1, Xv2, yv = X1[val_idx], X2[val_idx], labels[val_idx]

    optimizer = Adam(params.weights, config.learning_rate, config.beta1,
                     config.beta2, config.eps)
    history = []
    best_f1 = -1.0
    best_params = params.copy()
    stale = 0
    n_train = yt.size
    for epoch in range(config.epochs):
        order = rng.permutation(n_train)
        loss_sum = 0.0
        for batch_no, start in enumerate(range(0, n_train, config.batch_size)):
            take = order[start:start + config.batch_size]
            probs, _, cache = _forward_batch(
                params, Xt1[take], Xt2[take], train_mode=True, rng=rng)
            clamped = np.clip(probs, 1e-12, 1.0 - 1e-12)
            y = yt[take]
            batch_loss = float(np.mean(
                -(y * np.log(clamped) + (1.0 - y) * np.log(1.0 - clamped))))
            if not np.isfinite(batch_loss):
                raise NonFiniteLoss(epoch=epoch, batch=batch_no)
            loss_sum += batch_loss * take.size
            grads = _backward_batch(params, cache, y)
            optimizer.step(params.weights, grads)

        val_probs = _predict_probs(params, Xv1, Xv2)
        val_preds = (val_probs >= 0.5).astype(np.int64)
        val_labels = yv.astype(np.int64)
        val_acc = float(np.mean(val_preds == val_labels))
        val_f1 = _f1_class1(val_preds, val_labels)
        history.append({
            "epoch": epoch,
            "train_loss": loss_sum / n_train,
            "val_accuracy": val_acc,
            "val_f1_1": val_f1,
        })
        if val_f1 > best_f1 + 1e-12:
            best_f1 = val_f1
            best_params = params.copy()
            stale = 0
        else:
            stale += 1
            if config.patience > 0 and stale >= config.patience:
                log.info("early stop at epoch %d (no F1 gain for %d epochs)",
                         epoch, stale)
                break
    return best_params, history


def predict(params: ModelParams, candidate_snapshot, last_positive_job,
            query_job, featurizer: Featurizer,
            current_profile=None) -> PredictionOutput:
    """Score one (history, query) pair.

    ``candidate_snapshot`` is the candidate state at the time of the last
    positive interaction; ``current_profile`` (defaults to the snapshot)
    is the state paired with the query job.
    """
    now_state = current_profile if current_profile is not None else candidate_snapshot
    x1 = featurizer.pair_vector(candidate_snapshot, last_positive_job)
    x2 = featurizer.pair_vector(now_state, query_job)
    example = TrainingExample(timestep_1=x1, timestep_2=x2, label=0)
    return forward(params, example)


def predict_batch(params: ModelParams, examples, chunk: int = 512) -> np.ndarray:
    """Probabilities for a sequence of examples, evaluated in chunks."""
    X1 = np.stack([e.timestep_1 for e in examples]).astype(np.float64)
    X2 = np.stack([e.timestep_2 for e in examples]).astype(np.float64)
    out = np.empty(len(examples))
    for start in range(0, len(examples), chunk):
        probs, _, _ = _forward_batch(
            params, X1[start:start + chunk], X2[start:start + chunk])
        out[start:start + chunk] = probs
    return out


def gradient_check(params: ModelParams, example: TrainingExample,
                   h: float = 1e-5, analytic: dict | None = None) -> float:
    """Max relative error between analytic and central-difference gradients.

    Every entry of every parameter is probed with a central difference.  The
    error for a parameter is max_i |a_i - n_i| / max(|a|_inf, |n|_inf, 1e-8),
    normalizing by the parameter's gradient magnitude; the maximum over all
    parameters is returned.  (A per-entry denominator would put near-zero
    coordinates below the float64 finite-difference noise floor of roughly
    1e-11, failing even exact gradients.)
    """
    if analytic is None:
        analytic = backward(params, example)

    def loss_at() -> float:
        out = forward(params, example)
        return loss(out.probability, example.label)

    worst = 0.0
    for name in PARAM_ORDER:
        w = params.weights[name]
        flat_w = w.reshape(-1)
        flat_g = analytic[name].reshape(-1)
        num = 0.0
        numeric_inf = 0.0
        for i in range(flat_w.size):
            orig = flat_w[i]
            flat_w[i] = orig + h
            up = loss_at()
            flat_w[i] = orig - h
            down = loss_at()
            flat_w[i] = orig
            numeric = (up - down) / (2.0 * h)
            num = max(num, abs(flat_g[i] - numeric))
            numeric_inf = max(numeric_inf, abs(numeric))
        denom = max(float(np.max(np.abs(flat_g))), numeric_inf, 1e-8)
        worst = max(worst, num / denom)
    return worst


def gradient_check_suite(n_configs: int = 20, seed: int = 0,
                         h: float = 1e-5) -> float:
    """Run the check on several random tiny models; returns the worst error.

    Trials whose smallest per-parameter gradient scale sits below the
    finite-difference resolution (about 1e-11 absolute in float64) are
    redrawn: the oracle cannot rate such a trial either way.  A genuinely
    wrong gradient still fails, because then analytic and numeric values
    disagree at full scale.
    """
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_configs):
        for _attempt in range(6):
            input_size = int(rng.integers(3, 7))
            hidden1 = int(rng.integers(2, 5))
            hidden2 = int(rng.integers(2, 4))
            params = init_params(input_size, hidden1, hidden2,
                                 dropout_rate=0.0,
                                 seed=int(rng.integers(0, 2 ** 31)))
            example = TrainingExample(
                timestep_1=rng.normal(size=input_size),
                timestep_2=rng.normal(size=input_size),
                label=int(rng.integers(0, 2)),
            )
            grads = backward(params, example)
            scale = min(float(np.max(np.abs(g))) for g in grads.values())
            if scale >= 1e-6:
                break
        worst = max(worst, gradient_check(params, example, h=h))
    return worst


def build_sequence_examples(dataset: Dataset, featurizer: Featurizer):
    """Turn interaction logs into two-timestep training examples.

    For every interaction with at least one strictly earlier positive
    interaction by the same candidate, timestep 1 pairs the candidate state
    at that earlier positive with its job, timestep 2 pairs the state at the
    current interaction with the current job, and the label is the current
    outcome.  Interactions without usable history are skipped and counted.
    """
    examples = []
    skipped = 0
    pair_cache: dict = {}

    def pair(cid: str, as_of: int, job):
        key = (cid, as_of, job.id)
        hit = pair_cache.get(key)
        if hit is None:
            snap = snapshot_at(cid, as_of, dataset)
            hit = featurizer.pair_vector(snap, job)
            pair_cache[key] = hit
        return hit

    for cid in sorted(dataset.candidates):
        events = dataset.interactions_of(cid)
        pos_ts = [e.timestamp for e in events if e.label == 1]
        pos_events = [e for e in events if e.label == 1]
        for event in events:
            k = bisect_left(pos_ts, event.timestamp)
            if k == 0:
                skipped += 1
                continue
            prior = pos_events[k - 1]
            try:
                x1 = pair(cid, prior.timestamp, dataset.jobs[prior.job_id])
                x2 = pair(cid, event.timestamp, dataset.jobs[event.job_id])
            except (AllSkillsUnknown, NoSnapshotBefore):
                skipped += 1
                continue
            examples.append(TrainingExample(x1, x2, event.label))
    if skipped:
        log.info("skipped %d interactions lacking usable history", skipped)
    return examples


def history_anchor(dataset: Dataset, candidate_id: str, as_of: int):
    """Most recent positive interaction strictly before ``as_of``.

    Raises NoInteractionHistory when the candidate has none.
    """
    events = dataset.interactions_of(candidate_id)
    best = None
    for event in events:
        if event.timestamp >= as_of:
            break
        if event.label == 1:
            best = event
    if best is None:
        raise NoInteractionHistory(
            f"candidate {candidate_id!r} has no positive interaction before {as_of}")
    return best


def save_model(path, params: ModelParams, meta: dict | None = None) -> None:
    header = {
        "kind": "model",
        "version": CHECKPOINT_VERSION,
        "input_size": params.input_size,
        "hidden1": params.hidden1,
        "hidden2": params.hidden2,
        "dropout_rate": params.dropout_rate,
        "extra": meta or {},
    }
    save_arrays(path, header, {k: params.weights[k] for k in PARAM_ORDER})


def load_model(path):
    meta, arrays = load_arrays(path)
    if meta.get("kind") != "model":
        raise ValueError(f"{path} is not a model checkpoint")
    params = ModelParams(
        input_size=int(meta["input_size"]),
        hidden1=int(meta["hidden1"]),
        hidden2=int(meta["hidden2"]),
        dropout_rate=float(meta["dropout_rate"]),
        weights={k: arrays[k] for k in PARAM_ORDER},
    )
    return params, meta.get("extra", {})
