"""The online selection training loop.

Per epoch: train the model on the currently selected k samples, score
every training sample's noise-risk from a full forward pass, fold the
risk vector into the running sums, then let the selector pick the
next epoch's k-set.  Epoch 1 trains on a seeded uniformly random
k-set because no feedback exists yet.

Metrics are recorded every epoch; cumulative regret compares risk
spent so far against the best fixed k-set over the same prefix.  Wall
time is recorded but is the one column outside the determinism
contract: with a fixed config and seed everything else is
reproducible bit for bit.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .analytics import label_precision
from .datasets import Dataset
from .errors import InputError, ParameterError
from .feedback import noise_risk_scores
from .mlp import MlpModel, init_mlp, predict_batch, train_epoch
from .selection import (
    CumulativeRisk,
    KSetSelection,
    RiskVector,
    SelectorConfig,
    Strategy,
    accumulate,
    fpl_select,
    ftl_select,
    greedy_select,
    init_selection,
    top_k_smallest,
)

__all__ = ["TrainConfig", "EpochMetrics", "TrainResult", "train_selective"]


@dataclass(frozen=True)
class TrainConfig:
    """Knobs for one training run."""

    strategy: Strategy
    k: int
    epochs: int
    eta: float = 0.0
    hidden: int = 256
    lr: float = 0.05
    batch_size: int = 32
    seed: int = 0

    def __post_init__(self):
        if self.k < 1:
            raise ParameterError(f"k must be >= 1, got {self.k}")
        if self.epochs < 1:
            raise ParameterError(f"epochs must be >= 1, got {self.epochs}")
        if not (np.isfinite(self.eta) and self.eta >= 0.0):
            raise ParameterError(f"eta must be finite and >= 0, got {self.eta}")
        if self.hidden < 1 or self.batch_size < 1:
            raise ParameterError("hidden and batch_size must be >= 1")
        if not (np.isfinite(self.lr) and self.lr >= 0.0):
            raise ParameterError(f"lr must be finite and >= 0, got {self.lr}")


@dataclass(frozen=True)
class EpochMetrics:
    """One row of the per-epoch metrics table."""

    epoch: int
    selection_risk: float
    cum_regret: float
    label_precision: float
    train_acc: float
    test_acc: float
    wall_ms: float


@dataclass
class TrainResult:
    model: MlpModel
    metrics: list[EpochMetrics]
    selections: list[KSetSelection]
    cum: CumulativeRisk


def _next_selection(
    strategy: Strategy,
    cum: CumulativeRisk,
    last_theta: RiskVector,
    k: int,
    eta: float,
    rng: np.random.Generator,
) -> KSetSelection:
    if strategy is Strategy.FPL:
        return fpl_select(cum, k, eta, rng)
    if strategy is Strategy.NAIVE:
        return ftl_select(cum, k)
    if strategy is Strategy.GREEDY:
        return greedy_select(last_theta, k)
    if strategy is Strategy.RANDOM:
        idx = rng.choice(cum.n, size=k, replace=False)
        idx.sort()
        return KSetSelection(idx.astype(np.int64))
    raise ParameterError(f"unknown strategy {strategy!r}")  # pragma: no cover


def train_selective(dataset: Dataset, test_set: Dataset | None, cfg: TrainConfig) -> TrainResult:
    """Run the full loop and return the model plus per-epoch metrics.

    test_set may be None, in which case test accuracy is reported as
    nan.  The test set must share the dataset's feature width and
    class count.
    """
    n = dataset.n
    SelectorConfig(strategy=cfg.strategy, k=cfg.k, eta=cfg.eta, seed=cfg.seed).check_n(n)
    if test_set is not None and (test_set.dim != dataset.dim or test_set.num_classes != dataset.num_classes):
        raise InputError("test set shape or class count does not match the training set")

    seeds = np.random.SeedSequence(cfg.seed).spawn(4)
    init_seed = int(seeds[0].generate_state(1)[0])
    model = init_mlp(dataset.dim, cfg.hidden, dataset.num_classes, seed=init_seed)
    shuffle_rng = np.random.default_rng(seeds[1])
    select_rng = np.random.default_rng(seeds[2])
    selection = init_selection(n, cfg.k, seed=int(seeds[3].generate_state(1)[0]))

    clean_mask = dataset.clean_mask
    cum = CumulativeRisk.zeros(n)
    spent = 0.0
    metrics: list[EpochMetrics] = []
    selections: list[KSetSelection] = []

    for epoch in range(1, cfg.epochs + 1):
        t0 = time.perf_counter()
        train_epoch(model, dataset, selection, cfg.lr, cfg.batch_size, shuffle_rng)

        predicted, conf = predict_batch(model, dataset.samples)
        theta = RiskVector(noise_risk_scores(predicted, conf, dataset.assigned_labels))
        train_acc = float((predicted == dataset.assigned_labels).mean())
        if test_set is not None:
            test_pred, _ = predict_batch(model, test_set.samples)
            test_acc = float((test_pred == test_set.true_labels).mean())
        else:
            test_acc = float("nan")

        risk = float(theta.values[selection.indices].sum())
        spent += risk
        cum = accumulate(cum, theta)
        best_prefix = top_k_smallest(cum.sums, cfg.k)
        cum_regret = spent - float(cum.sums[best_prefix.indices].sum())

        selections.append(selection)
        metrics.append(
            EpochMetrics(
                epoch=epoch,
                selection_risk=risk,
                cum_regret=cum_regret,
                label_precision=label_precision(selection, clean_mask),
                train_acc=train_acc,
                test_acc=test_acc,
                wall_ms=(time.perf_counter() - t0) * 1000.0,
            )
        )
        selection = _next_selection(cfg.strategy, cum, theta, cfg.k, cfg.eta, select_rng)

    return TrainResult(model=model, metrics=metrics, selections=selections, cum=cum)
