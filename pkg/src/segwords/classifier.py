"""Multinomial logistic regression over frame features.

The model is deliberately convex: logits are an affine map of z-scored
features, trained with plain mini-batch gradient descent on the multi-class
cross-entropy, normalized by the number of utterances in the batch. Model
selection runs the full decode/collapse/match pipeline on the validation
split after every epoch and keeps the weights with the best R-value.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .errors import InputError, TrainingDivergedError
from .features import FeatureMatrix
from .labeling import AugmentConfig, FrameLabelSeq, augment_labels
from .logits_io import LogitsMatrix
from .util import atomic_write

LOG_EPS = 1e-12
NUM_CLASSES = 3

# (m, 3) array of row-stochastic class probabilities
ProbMatrix = np.ndarray


@dataclass(frozen=True)
class ModelParams:
    """Affine weights plus the per-dimension feature normalization.

    `weights` is (d+1, 3); the last row is the bias. Features are mapped to
    (x - feat_mean) / feat_std before the affine map, and those vectors are
    stored here so inference is reproducible from the file alone.
    """

    weights: np.ndarray
    feat_mean: np.ndarray
    feat_std: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        mu = np.asarray(self.feat_mean, dtype=np.float64)
        sd = np.asarray(self.feat_std, dtype=np.float64)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "feat_mean", mu)
        object.__setattr__(self, "feat_std", sd)
        if w.ndim != 2 or w.shape[1] != NUM_CLASSES:
            raise ValueError("weights must be (d+1, 3)")
        if mu.shape != (w.shape[0] - 1,) or sd.shape != mu.shape:
            raise ValueError("normalization vectors must have length d")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(mu)) and np.all(np.isfinite(sd))):
            raise ValueError("parameters must be finite")

    @property
    def dim(self) -> int:
        return self.weights.shape[0] - 1


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 32
    patience: int = 10
    max_epochs: int = 300
    seed: int = 0
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    val_metric: str = "r_value"  # or "accuracy": raw frame-label accuracy

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if self.max_epochs < 1:
            raise ValueError("max_epochs must be >= 1")
        if self.val_metric not in ("r_value", "accuracy"):
            raise ValueError(f"unknown val_metric {self.val_metric!r}")


@dataclass(frozen=True)
class UttSample:
    """One utterance of a training/validation dataset."""

    utterance_id: str
    features: FeatureMatrix
    labels: FrameLabelSeq          # unaugmented ground truth
    ref_times: np.ndarray          # true word-start boundaries, seconds
    sample_rate: int


def softmax(logits) -> ProbMatrix:
    """Row-wise softmax, stabilized by subtracting each row's max."""
    if isinstance(logits, LogitsMatrix):
        z = np.asarray(logits.rows, dtype=np.float64)
    else:
        z = np.asarray(logits, dtype=np.float64)
    z = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(z)
    return e / np.sum(e, axis=-1, keepdims=True)


def cross_entropy(labels: Sequence[FrameLabelSeq], probs: Sequence[ProbMatrix]) -> float:
    """Multi-class cross-entropy, summed over valid frames and divided by
    the number of utterances in the batch. Probabilities are clamped at
    1e-12 before the log."""
    if len(labels) != len(probs):
        raise ValueError("batch size mismatch between labels and probabilities")
    total = 0.0
    for y, p in zip(labels, probs):
        p = np.asarray(p, dtype=np.float64)
        if p.shape != (len(y), NUM_CLASSES):
            raise ValueError(f"shape mismatch: {p.shape} vs {len(y)} frames")
        v = y.valid_frames
        picked = p[np.arange(v), y.labels[:v].astype(np.intp)]
        total -= float(np.sum(np.log(np.maximum(picked, LOG_EPS))))
    return total / len(labels)


def _design(params: ModelParams, f: FeatureMatrix) -> np.ndarray:
    if f.dim != params.dim:
        raise ValueError(f"feature dim {f.dim} does not match model dim {params.dim}")
    z = (f.rows - params.feat_mean) / params.feat_std
    return np.hstack([z, np.ones((z.shape[0], 1))])


def predict(params: ModelParams, f: FeatureMatrix, utterance_id: str = "",
            frame_duration_us: int = 25000) -> LogitsMatrix:
    """Affine map per frame; logits are stored float32 (interchange width)."""
    logits = _design(params, f) @ params.weights
    return LogitsMatrix(logits.astype(np.float32), frame_duration_us, utterance_id)


def _onehot(codes: np.ndarray) -> np.ndarray:
    out = np.zeros((codes.size, NUM_CLASSES))
    out[np.arange(codes.size), codes.astype(np.intp)] = 1.0
    return out


def grad_cross_entropy(params: ModelParams, batch: Sequence[tuple[FeatureMatrix, FrameLabelSeq]]
                       ) -> np.ndarray:
    """Analytic gradient of cross_entropy(softmax(affine(x))) w.r.t. weights.

    Sum over valid frames of x_frame (outer) (p - onehot(y)), divided by the
    number of utterances. Matches central finite differences to ~1e-6
    relative on well-scaled inputs.
    """
    grad = np.zeros_like(params.weights)
    for f, y in batch:
        x = _design(params, f)[: y.valid_frames]
        p = softmax(x @ params.weights)
        delta = p - _onehot(y.labels[: y.valid_frames])
        grad += x.T @ delta
    return grad / len(batch)


def _loss_for(params: ModelParams, batch: Sequence[tuple[FeatureMatrix, FrameLabelSeq]]) -> float:
    labels = [y for _, y in batch]
    probs = [softmax(_design(params, f) @ params.weights) for f, _ in batch]
    return cross_entropy(labels, probs)


def _val_score(params: ModelParams, val: Sequence[UttSample], metric: str) -> float:
    # local import: postprocess/evaluate sit above this module in the stack
    from .evaluate import MatchCounts, match_boundaries, metrics_from_counts
    from .postprocess import SelectionStrategy, collapse_clusters, decode, frames_to_times

    if metric == "accuracy":
        hit = total = 0
        for s in val:
            p = softmax(_design(params, s.features) @ params.weights)
            pred = np.argmax(p[: s.labels.valid_frames], axis=1)
            hit += int(np.sum(pred == s.labels.labels[: s.labels.valid_frames]))
            total += s.labels.valid_frames
        return hit / max(total, 1)

    n_hit = n_f = n_ref = 0
    for s in val:
        p = softmax(_design(params, s.features) @ params.weights)
        decoded = decode(p, s.labels.valid_frames, s.features.frame_len)
        idx = collapse_clusters(decoded, SelectionStrategy.MID)
        pred = frames_to_times(idx, s.features.frame_len, s.sample_rate,
                               utterance_id=s.utterance_id)
        # no-tolerance model selection: half a frame means exact-frame match
        half_frame = 0.5 * s.features.frame_len / s.sample_rate
        ref = np.asarray(s.ref_times, dtype=np.float64)
        c = match_boundaries(pred, _times_as_boundaries(ref, s.utterance_id), half_frame)
        n_hit += c.n_hit
        n_f += c.n_f
        n_ref += c.n_ref
    if n_ref == 0:
        return 0.0
    return metrics_from_counts(MatchCounts(n_hit, n_f, n_ref)).r_value


def _times_as_boundaries(times: np.ndarray, utterance_id: str):
    from .postprocess import BoundaryList

    return BoundaryList(times, utterance_id)


def train_baseline(train: Sequence[UttSample], val: Sequence[UttSample], cfg: TrainConfig,
                   on_epoch: Callable[[int, float, float], None] | None = None) -> ModelParams:
    """Mini-batch gradient descent with R-value early stopping.

    Begin labels are augmented (cfg.augment) on the training split only;
    validation scoring decodes raw predictions. Returns the parameters of
    the epoch with the best validation score, stopping after cfg.patience
    epochs without improvement. Deterministic for a fixed seed.
    """
    if not train or not val:
        raise ValueError("train and val datasets must be non-empty")

    d = train[0].features.dim
    valid_rows = np.vstack([s.features.rows[: s.labels.valid_frames] for s in train])
    feat_mean = valid_rows.mean(axis=0)
    feat_std = valid_rows.std(axis=0)
    feat_std = np.where(feat_std < 1e-8, 1.0, feat_std)
    params = ModelParams(np.zeros((d + 1, NUM_CLASSES)), feat_mean, feat_std)

    train_batch_items = [
        (s.features, augment_labels(s.labels, cfg.augment)) for s in train
    ]

    rng = np.random.default_rng(cfg.seed)
    best_score = -np.inf
    best_weights = params.weights.copy()
    epochs_since_best = 0

    for epoch in range(1, cfg.max_epochs + 1):
        order = rng.permutation(len(train_batch_items))
        for lo in range(0, len(order), cfg.batch_size):
            batch = [train_batch_items[i] for i in order[lo : lo + cfg.batch_size]]
            grad = grad_cross_entropy(params, batch)
            new_weights = params.weights - cfg.learning_rate * grad
            if not np.all(np.isfinite(new_weights)):
                raise TrainingDivergedError(
                    f"weights became non-finite at epoch {epoch} "
                    f"(lr={cfg.learning_rate}, batch_size={cfg.batch_size})"
                )
            params = ModelParams(new_weights, feat_mean, feat_std)

        loss = _loss_for(params, train_batch_items)
        if not np.isfinite(loss):
            raise TrainingDivergedError(
                f"training loss became non-finite at epoch {epoch} "
                f"(lr={cfg.learning_rate}, batch_size={cfg.batch_size})"
            )
        score = _val_score(params, val, cfg.val_metric)
        if on_epoch is not None:
            on_epoch(epoch, loss, score)

        if score > best_score:
            best_score = score
            best_weights = params.weights.copy()
            epochs_since_best = 0
        else:
            epochs_since_best += 1
            if epochs_since_best >= cfg.patience:
                break

    return ModelParams(best_weights, feat_mean, feat_std)


MODEL_MAGIC = "SEGWORDS-MODEL"
MODEL_VERSION = 1


def write_model(path: str | Path, params: ModelParams) -> None:
    """Versioned text: magic+version line, dims line, then rows of reals."""
    d = params.dim
    with atomic_write(path) as fh:
        fh.write(f"{MODEL_MAGIC} {MODEL_VERSION}\n")
        fh.write(f"{d} {NUM_CLASSES}\n")
        for row in params.weights:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")
        fh.write(" ".join(repr(float(v)) for v in params.feat_mean) + "\n")
        fh.write(" ".join(repr(float(v)) for v in params.feat_std) + "\n")


def read_model(path: str | Path) -> ModelParams:
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise InputError(f"unreadable model file: {path} ({exc})")
    if not lines or not lines[0].startswith(MODEL_MAGIC):
        raise InputError(f"{path}: not a model file (bad magic)")
    version = lines[0].split()[-1]
    if version != str(MODEL_VERSION):
        raise InputError(f"{path}: unsupported model version {version}")
    try:
        d, k = (int(v) for v in lines[1].split())
        if k != NUM_CLASSES:
            raise InputError(f"{path}: expected {NUM_CLASSES} classes, got {k}")
        rows = [[float(v) for v in line.split()] for line in lines[2 : 2 + d + 1]]
        weights = np.array(rows)
        feat_mean = np.array([float(v) for v in lines[3 + d].split()])
        feat_std = np.array([float(v) for v in lines[4 + d].split()])
        return ModelParams(weights, feat_mean, feat_std)
    except (IndexError, ValueError) as exc:
        raise InputError(f"{path}: truncated or malformed model file ({exc})")
