"""Evaluation: classification metrics, a feedforward baseline, CTR
simulation for blended versus pure-ML slates, and chi-square tests.

The classification report mirrors the per-class precision/recall/F1 plus
accuracy layout used for model comparison; undefined metrics (zero
denominator) are reported as absent rather than zero.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass

import numpy as np
from scipy import stats as _scipy_stats

from jobrec.errors import (
    CategoryMismatch,
    DegenerateTest,
    EmptyArm,
    EmptyInput,
    LengthMismatch,
    NonFiniteLoss,
    SingleClassDataset,
    ZeroImpressions,
)
from jobrec.seqnet import Adam, TrainConfig, _f1_class1, _sigmoid, _stratified_split
from jobrec.synthgen import GroundTruth

log = logging.getLogger(__name__)

CHI2_CRITICAL_1DF_01 = 6.635


# -- classification metrics ------------------------------------------------


@dataclass(frozen=True)
class ClassificationReport:
    """Confusion counts plus per-class metrics; None marks an undefined
    metric (its denominator was zero)."""

    tp: int
    fp: int
    tn: int
    fn: int
    accuracy: float
    precision: dict
    recall: dict
    f1: dict

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def format(self) -> str:
        def pct(value):
            return "-" if value is None else f"{100.0 * value:.2f}"

        lines = [
            f"accuracy {pct(self.accuracy)}",
            "class  precision  recall  f1-score",
        ]
        for cls in (0, 1):
            lines.append(
                f"{cls}      {pct(self.precision[cls]):>9}  "
                f"{pct(self.recall[cls]):>6}  {pct(self.f1[cls]):>8}")
        lines.append(
            f"confusion tp={self.tp} fp={self.fp} tn={self.tn} fn={self.fn}")
        return "\n".join(lines)

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "precision": {str(k): v for k, v in self.precision.items()},
            "recall": {str(k): v for k, v in self.recall.items()},
            "f1": {str(k): v for k, v in self.f1.items()},
            "confusion": {"tp": self.tp, "fp": self.fp,
                          "tn": self.tn, "fn": self.fn},
        }


def _ratio(num: int, denom: int):
    return None if denom == 0 else num / denom


def _harmonic(p, r):
    if p is None or r is None or (p + r) == 0.0:
        return None
    return 2.0 * p * r / (p + r)


def classification_report(predictions, labels) -> ClassificationReport:
    preds = list(predictions)
    labs = list(labels)
    if len(preds) != len(labs):
        raise LengthMismatch(
            f"{len(preds)} predictions vs {len(labs)} labels")
    if not preds:
        raise EmptyInput("no prediction/label pairs")
    for value in preds + labs:
        if value not in (0, 1):
            raise ValueError(f"binary values required, got {value!r}")
    tp = fp = tn = fn = 0
    for p, y in zip(preds, labs):
        if p == 1 and y == 1:
            tp += 1
        elif p == 1 and y == 0:
            fp += 1
        elif p == 0 and y == 0:
            tn += 1
        else:
            fn += 1
    precision = {1: _ratio(tp, tp + fp), 0: _ratio(tn, tn + fn)}
    recall = {1: _ratio(tp, tp + fn), 0: _ratio(tn, tn + fp)}
    f1 = {c: _harmonic(precision[c], recall[c]) for c in (0, 1)}
    return ClassificationReport(
        tp=tp, fp=fp, tn=tn, fn=fn,
        accuracy=(tp + tn) / len(preds),
        precision=precision, recall=recall, f1=f1,
    )


# -- feedforward baseline ---------------------------------------------------


@dataclass
class FeedforwardParams:
    """Two-hidden-layer classifier over the flattened two-timestep input."""

    input_size: int
    hidden1: int
    hidden2: int
    dropout_rate: float
    weights: dict

    def copy(self) -> "FeedforwardParams":
        return FeedforwardParams(
            self.input_size, self.hidden1, self.hidden2, self.dropout_rate,
            {k: v.copy() for k, v in self.weights.items()})


def init_feedforward(input_size: int, hidden1: int = 128, hidden2: int = 64,
                     dropout_rate: float = 0.2, seed: int = 0) -> FeedforwardParams:
    rng = np.random.default_rng(seed)

    def uniform(shape, fan_in):
        bound = 1.0 / np.sqrt(float(fan_in))
        return rng.uniform(-bound, bound, size=shape)

    weights = {
        "W1": uniform((input_size, hidden1), input_size),
        "b1": np.zeros(hidden1),
        "W2": uniform((hidden1, hidden2), hidden1),
        "b2": np.zeros(hidden2),
        "w_out": uniform((hidden2,), hidden2),
        "b_out": np.zeros(1),
    }
    return FeedforwardParams(input_size, hidden1, hidden2, dropout_rate, weights)


def _ff_forward(params: FeedforwardParams, X: np.ndarray,
                train_mode: bool = False,
                rng: np.random.Generator | None = None):
    w = params.weights
    h1 = np.tanh(X @ w["W1"] + w["b1"])
    if train_mode and params.dropout_rate > 0.0:
        keep = 1.0 - params.dropout_rate
        if rng is None:
            rng = np.random.default_rng(0)
        mask = (rng.random(h1.shape) < keep) / keep
    else:
        mask = None
    h1d = h1 * mask if mask is not None else h1
    h2 = np.tanh(h1d @ w["W2"] + w["b2"])
    logit = h2 @ w["w_out"] + w["b_out"][0]
    probs = _sigmoid(logit)
    cache = {"X": X, "h1": h1, "mask": mask, "h1d": h1d, "h2": h2,
             "probs": probs}
    return probs, cache


def _ff_backward(params: FeedforwardParams, cache: dict,
                 labels: np.ndarray) -> dict:
    w = params.weights
    batch = labels.shape[0]
    probs, h2, h1d = cache["probs"], cache["h2"], cache["h1d"]
    dlogit = (probs - labels) / batch
    grads = {
        "w_out": h2.T @ dlogit,
        "b_out": np.array([dlogit.sum()]),
    }
    dh2 = dlogit[:, None] * w["w_out"][None, :] * (1.0 - h2 * h2)
    grads["W2"] = h1d.T @ dh2
    grads["b2"] = dh2.sum(axis=0)
    dh1d = dh2 @ w["W2"].T
    if cache["mask"] is not None:
        dh1d = dh1d * cache["mask"]
    dh1 = dh1d * (1.0 - cache["h1"] * cache["h1"])
    grads["W1"] = cache["X"].T @ dh1
    grads["b1"] = dh1.sum(axis=0)
    return grads


def ff_predict_probs(params: FeedforwardParams, X: np.ndarray,
                     chunk: int = 1024) -> np.ndarray:
    out = np.empty(X.shape[0])
    for start in range(0, X.shape[0], chunk):
        probs, _ = _ff_forward(params, X[start:start + chunk])
        out[start:start + chunk] = probs
    return out


def flatten_examples(examples) -> tuple:
    """Concatenate both timesteps of each example into one flat row."""
    X = np.stack([
        np.concatenate([e.timestep_1, e.timestep_2]) for e in examples
    ]).astype(np.float64)
    y = np.array([e.label for e in examples], dtype=np.float64)
    return X, y


def train_feedforward_baseline(examples, config: TrainConfig | None = None):
    """Train the baseline on the same examples the sequence model sees,
    with matching optimizer, dropout, split, and model-selection rules."""
    config = config or TrainConfig()
    if not examples:
        raise SingleClassDataset("no training examples")
    X, labels = flatten_examples(examples)
    present = set(np.unique(labels).tolist())
    if present != {0.0, 1.0}:
        raise SingleClassDataset(
            f"training needs both classes, got labels {sorted(present)}")

    rng = np.random.default_rng(config.seed)
    params = init_feedforward(X.shape[1], config.hidden1, config.hidden2,
                              config.dropout_rate, seed=config.seed)
    if config.epochs <= 0:
        return params, []

    train_idx, val_idx = _stratified_split(labels, config.val_fraction, rng)
    if val_idx.size == 0:
        val_idx = train_idx.copy()
    Xt, yt = X[train_idx], labels[train_idx]
    Xv, yv = X[val_idx], labels[val_idx]

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
            probs, cache = _ff_forward(params, Xt[take], train_mode=True,
                                       rng=rng)
            clamped = np.clip(probs, 1e-12, 1.0 - 1e-12)
            y = yt[take]
            batch_loss = float(np.mean(
                -(y * np.log(clamped) + (1.0 - y) * np.log(1.0 - clamped))))
            if not np.isfinite(batch_loss):
                raise NonFiniteLoss(epoch=epoch, batch=batch_no)
            loss_sum += batch_loss * take.size
            grads = _ff_backward(params, cache, y)
            optimizer.step(params.weights, grads)

        val_preds = (ff_predict_probs(params, Xv) >= 0.5).astype(np.int64)
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
                break
    return best_params, history


# -- CTR simulation ---------------------------------------------------------


@dataclass(frozen=True)
class ClickModelConfig:
    """Browsing and clicking behavior for the slate simulation.

    A user views slate positions as a geometric prefix (position k is seen
    with probability view_decay**k).  A viewed job is clicked with
    probability pref * click_scale, plus serendipity_bonus when the entry's
    source differs from the slate's dominant source.
    """

    view_decay: float = 0.8
    click_scale: float = 1.0
    serendipity_bonus: float = 0.0


@dataclass(frozen=True)
class CtrReport:
    impressions_blended: int
    clicks_blended: int
    impressions_ml: int
    clicks_ml: int
    ctr_blended: float
    ctr_ml: float
    relative_increase: float | None
    statistic: float
    significant_at_01: bool

    def to_dict(self) -> dict:
        return {
            "blended": {"impressions": self.impressions_blended,
                        "clicks": self.clicks_blended,
                        "ctr": self.ctr_blended},
            "ml_only": {"impressions": self.impressions_ml,
                        "clicks": self.clicks_ml,
                        "ctr": self.ctr_ml},
            "relative_increase": self.relative_increase,
            "chi_square": self.statistic,
            "significant_at_01": self.significant_at_01,
        }

    def format(self) -> str:
        rel = ("-" if self.relative_increase is None
               else f"{100.0 * self.relative_increase:+.2f}%")
        return "\n".join([
            "arm       impressions  clicks     ctr",
            f"blended   {self.impressions_blended:>11}  {self.clicks_blended:>6}"
            f"  {self.ctr_blended:.4f}",
            f"ml-only   {self.impressions_ml:>11}  {self.clicks_ml:>6}"
            f"  {self.ctr_ml:.4f}",
            f"relative increase {rel}",
            f"chi-square {self.statistic:.3f}"
            f" ({'significant' if self.significant_at_01 else 'not significant'}"
            f" at alpha=0.01)",
        ])


def _modal_source(entries):
    counts = Counter(e.source for e in entries)
    # Deterministic mode: highest count, then source value.
    return min(counts.items(), key=lambda kv: (-kv[1], kv[0].value))[0]


def _simulate_arm(slates, truth: GroundTruth, config: ClickModelConfig,
                  rng: np.random.Generator) -> tuple:
    impressions = 0
    clicks = 0
    for slate in sorted(slates, key=lambda s: s.candidate_id):
        if not slate.entries:
            continue
        modal = _modal_source(slate.entries)
        for pos, entry in enumerate(slate.entries):
            if pos > 0 and rng.random() >= config.view_decay:
                break
            impressions += 1
            pref = truth.pref(slate.candidate_id, entry.job_id, truth.horizon)
            p = pref * config.click_scale
            if entry.source != modal:
                p += config.serendipity_bonus
            if rng.random() < min(1.0, p):
                clicks += 1
    return impressions, clicks


def simulate_ctr(slates_blended, slates_ml_only, truth: GroundTruth,
                 config: ClickModelConfig, rng: np.random.Generator) -> CtrReport:
    """Simulate browsing over both slate sets and compare click rates.

    The two arms draw from independent substreams of ``rng`` so a null
    experiment (identical slates, zero bonus) produces genuinely
    independent samples per arm.
    """
    blended = list(slates_blended)
    ml_only = list(slates_ml_only)
    if not blended or not ml_only:
        raise EmptyArm("both arms need at least one slate")
    pop_a = {s.candidate_id for s in blended}
    pop_b = {s.candidate_id for s in ml_only}
    if pop_a != pop_b:
        raise ValueError("arms cover different candidate populations")

    seed_a, seed_b = (int(s) for s in rng.integers(0, 2 ** 62, size=2))
    imp_b, clk_b = _simulate_arm(blended, truth, config,
                                 np.random.default_rng(seed_a))
    imp_m, clk_m = _simulate_arm(ml_only, truth, config,
                                 np.random.default_rng(seed_b))
    if imp_b == 0 or imp_m == 0:
        raise EmptyArm("an arm produced no impressions")

    statistic, significant = chi_square_two_proportions(clk_b, imp_b, clk_m, imp_m)
    ctr_b = clk_b / imp_b
    ctr_m = clk_m / imp_m
    relative = None if ctr_m == 0.0 else (ctr_b - ctr_m) / ctr_m
    return CtrReport(
        impressions_blended=imp_b, clicks_blended=clk_b,
        impressions_ml=imp_m, clicks_ml=clk_m,
        ctr_blended=ctr_b, ctr_ml=ctr_m,
        relative_increase=relative,
        statistic=statistic, significant_at_01=significant,
    )


# -- chi-square tests -------------------------------------------------------


def chi_square_two_proportions(clicks_a: int, impressions_a: int,
                               clicks_b: int, impressions_b: int) -> tuple:
    """2x2 chi-square on click/no-click counts; significance at alpha=0.01."""
    if impressions_a <= 0 or impressions_b <= 0:
        raise ZeroImpressions("both arms need impressions")
    for clicks, imps in ((clicks_a, impressions_a), (clicks_b, impressions_b)):
        if clicks < 0 or clicks > imps:
            raise ValueError(f"clicks {clicks} outside [0, {imps}]")
    total = impressions_a + impressions_b
    pooled = (clicks_a + clicks_b) / total
    if pooled == 0.0 or pooled == 1.0:
        return 0.0, False
    statistic = 0.0
    for clicks, imps in ((clicks_a, impressions_a), (clicks_b, impressions_b)):
        for observed, expected in (
            (clicks, imps * pooled),
            (imps - clicks, imps * (1.0 - pooled)),
        ):
            if expected < 5.0:
                log.warning("expected cell count %.2f below 5; chi-square "
                            "approximation is weak", expected)
            statistic += (observed - expected) ** 2 / expected
    return statistic, statistic > CHI2_CRITICAL_1DF_01


def chi_square_homogeneity(dist_a, dist_b) -> tuple:
    """r x 2 contingency chi-square over two categorical count mappings.

    Returns (statistic, df, significant_at_01) with df = categories - 1.
    """
    if set(dist_a) != set(dist_b):
        raise CategoryMismatch(
            f"category sets differ: {sorted(dist_a)} vs {sorted(dist_b)}")
    categories = sorted(dist_a)
    df = len(categories) - 1
    if df == 0:
        raise DegenerateTest("a single category leaves no degrees of freedom")
    for dist in (dist_a, dist_b):
        for cat in categories:
            if dist[cat] < 0:
                raise ValueError(f"negative count for category {cat!r}")
    total_a = sum(dist_a[c] for c in categories)
    total_b = sum(dist_b[c] for c in categories)
    if total_a == 0 or total_b == 0:
        raise EmptyInput("both distributions need positive totals")
    grand = total_a + total_b
    statistic = 0.0
    for cat in categories:
        row = dist_a[cat] + dist_b[cat]
        if row == 0:
            continue
        for observed, col_total in ((dist_a[cat], total_a), (dist_b[cat], total_b)):
            expected = row * col_total / grand
            statistic += (observed - expected) ** 2 / expected
    critical = float(_scipy_stats.chi2.isf(0.01, df))
    return statistic, df, statistic > critical
