"""Training loop, evaluation, and multi-seed confidence intervals.

Defaults: SGD with batch size 100, learning rate 0.001 for the full model and
0.01 for the compact one (dropped to 0.001 when momentum 0.9 is enabled, which
is what lets the compact model converge), no weight decay, no schedule. The
checkpoint kept is the one with the best validation accuracy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from . import nn
from .dataset import AugmentConfig, FeatureCache, Manifest, epoch_batches, load_noise_clips
from .errors import DivergenceError
from .features import mfcc
from .models import Checkpoint, Model, build_model

DEFAULT_MAX_EPOCHS = {"cnn-trad-pool2": 40, "cnn-one-fstride4": 70}


def default_learning_rate(model_name: str, momentum: float) -> float:
    if model_name == "cnn-one-fstride4":
        return 0.001 if momentum > 0 else 0.01
    return 0.001


@dataclass
class TrainConfig:
    model_name: str = "cnn-trad-pool2"
    learning_rate: float | None = None  # per-model default when None
    momentum: float = 0.0
    batch_size: int = 100
    max_epochs: int | None = None  # per-model default when None
    seed: int = 0
    augment: AugmentConfig = field(default_factory=AugmentConfig)
    # optional early stop for overfit-style experiments: halt once the train
    # split reaches this accuracy (evaluated augmentation-free each epoch)
    stop_at_train_accuracy: float | None = None

    def resolved(self) -> "TrainConfig":
        cfg = replace(self)
        if cfg.learning_rate is None:
            cfg.learning_rate = default_learning_rate(cfg.model_name, cfg.momentum)
        if cfg.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if cfg.max_epochs is None:
            cfg.max_epochs = DEFAULT_MAX_EPOCHS[cfg.model_name]
        return cfg


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_accuracy: float


@dataclass
class RunResult:
    seed: int
    best_validation_accuracy: float
    test_accuracy: float
    epochs_run: int
    history: list[EpochStats] = field(default_factory=list)


def _features_for(record, memo: dict) -> np.ndarray:
    f = memo.get(record.path)
    if f is None:
        from .dataset import _load_clip

        f = mfcc(_load_clip(record.path)).astype(np.float32)
        memo[record.path] = f
    return f


def _split_accuracy(
    model: Model, manifest: Manifest, split: str, memo: dict, chunk_size: int = 100
) -> float:
    records = manifest.split_records(split)
    correct = 0
    for i in range(0, len(records), chunk_size):
        chunk = records[i : i + chunk_size]
        feats = np.stack([_features_for(r, memo) for r in chunk]).astype(np.float32)
        logits = model.forward(feats, train=False)
        correct += int(np.sum(np.argmax(logits, axis=1) == [r.label for r in chunk]))
    return correct / len(records)


def evaluate(
    checkpoint: Checkpoint | Model, manifest: Manifest, split: str, batch_size: int = 100
) -> float:
    """Forced-choice accuracy on a split; augmentation-free, hence deterministic."""
    model = checkpoint.model if isinstance(checkpoint, Checkpoint) else checkpoint
    if not manifest.split_records(split):
        raise ValueError(f"split {split!r} is empty")
    return _split_accuracy(model, manifest, split, {}, chunk_size=batch_size)


def train(config: TrainConfig, manifest: Manifest) -> tuple[Checkpoint, RunResult]:
    """Run the full optimization protocol and return the best-validation checkpoint.

    Raises DivergenceError (with the epoch index) if the loss goes non-finite.
    """
    cfg = config.resolved()
    rng = nn.make_rng(cfg.seed)
    model = build_model(cfg.model_name, rng=rng)
    params = model.parameters()

    cache = FeatureCache()
    eval_memo: dict = {}
    noise_clips = load_noise_clips(manifest)
    has_val = bool(manifest.split_records("validation"))
    has_test = bool(manifest.split_records("test"))

    best_val = -1.0
    best_state = model.state()
    best_epoch = 0
    history: list[EpochStats] = []
    epochs_run = 0

    for epoch in range(1, cfg.max_epochs + 1):
        epochs_run = epoch
        losses = []
        for feats, labels in epoch_batches(
            manifest,
            "train",
            cfg.augment,
            cache,
            batch_size=cfg.batch_size,
            rng=rng,
            noise_clips=noise_clips,
        ):
            logits = model.forward(feats.astype(np.float32), train=True)
            loss, grad = nn.softmax_cross_entropy(logits, labels)
            if not math.isfinite(loss):
                raise DivergenceError(epoch)
            nn.zero_grads(params)
            model.backward(grad)
            nn.sgd_step(params, cfg.learning_rate, cfg.momentum)
            losses.append(loss)

        val_acc = _split_accuracy(model, manifest, "validation", eval_memo) if has_val else float("nan")
        history.append(EpochStats(epoch, float(np.mean(losses)), val_acc))

        if not has_val or val_acc > best_val:
            best_val = val_acc if has_val else -1.0
            best_state = model.state()
            best_epoch = epoch

        cache.evict(rng, cfg.augment.cache_evict_frac)

        if cfg.stop_at_train_accuracy is not None:
            if _split_accuracy(model, manifest, "train", eval_memo) >= cfg.stop_at_train_accuracy:
                best_state = model.state()
                best_epoch = epoch
                break

    model.load_state(best_state)
    best_val_acc = best_val if has_val else float("nan")
    ckpt = Checkpoint(model=model, seed=cfg.seed, epoch=best_epoch, val_accuracy=best_val_acc)
    test_acc = _split_accuracy(model, manifest, "test", eval_memo) if has_test else float("nan")
    result = RunResult(
        seed=cfg.seed,
        best_validation_accuracy=best_val_acc,
        test_accuracy=test_acc,
        epochs_run=epochs_run,
        history=history,
    )
    return ckpt, result


@dataclass
class MultiSeedResult:
    mean_accuracy: float
    ci95_half_width: float
    results: list[RunResult]


def confidence_half_width(values, confidence: float = 0.95) -> float:
    """Student-t interval half-width: t_{(1+c)/2, n-1} * s / sqrt(n)."""
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    if n < 2:
        raise ValueError("need at least 2 values for a confidence interval")
    t = stats.t.ppf((1 + confidence) / 2, n - 1)
    return float(t * values.std(ddof=1) / np.sqrt(n))


def multi_seed_run(config: TrainConfig, seeds, manifest: Manifest) -> MultiSeedResult:
    """Train and test once per seed; aggregate with a t-based 95% interval."""
    if len(seeds) < 2:
        raise ValueError("need at least 2 seeds")
    results = []
    for seed in seeds:
        _, result = train(replace(config, seed=seed), manifest)
        results.append(result)
    accs = [r.test_accuracy for r in results]
    return MultiSeedResult(
        mean_accuracy=float(np.mean(accs)),
        ci95_half_width=confidence_half_width(accs),
        results=results,
    )


def write_history_tsv(history: list[EpochStats], path) -> None:
    """Line-delimited training record: epoch<TAB>train_loss<TAB>val_accuracy."""
    with open(path, "w", encoding="utf-8") as fh:
        for h in history:
            fh.write(f"{h.epoch}\t{h.train_loss:.6f}\t{h.val_accuracy:.6f}\n")
