"""Experiment harness: config files, run modes, and CSV outputs.

Config files are flat `key = value` lines with `#` comments; CLI
flags override file values.  Every run mode resolves k from an
absolute `k` or a fractional `k_frac`, and resolves the perturbation
scale as eta = eta_coefficient * sqrt(k * T) before any selector is
built.

Per-epoch metric CSVs share one schema:

    run_seed,epoch,selection_risk,cum_regret,label_precision,train_acc,test_acc,wall_ms

Fields that do not apply (test accuracy in pure simulations, say) are
written as nan.  wall_ms sits last and is the one column excluded
from the determinism contract; everything before it is byte-identical
across reruns of the same config.
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .analytics import (
    BoundReport,
    avg_risk_bound,
    label_precision,
    regret_bound,
)
from .datasets import Dataset, LabelNoiseSpec, apply_label_noise, load_csv_dataset, load_idx, make_blobs
from .errors import ConfigError, ParameterError
from .feedback import (
    RiskStream,
    StreamKind,
    StreamSpec,
    dump_stream_csv,
    generate_stream,
    load_stream_csv,
    noise_risk_scores,
)
from .mlp import evaluate, init_mlp, predict_batch, train_epoch
from .selection import (
    CumulativeRisk,
    KSetSelection,
    SelectorConfig,
    Strategy,
    accumulate,
    fpl_select,
    ftl_select,
    greedy_select,
    init_selection,
    top_k_smallest,
)
from .training import EpochMetrics, TrainConfig, train_selective

__all__ = [
    "METRICS_HEADER",
    "ETA_COEFFICIENT_GRID",
    "VALIDATE_RISK_FRACTIONS",
    "ExperimentConfig",
    "parse_config_file",
    "build_config",
    "resolve_eta",
    "run_simulate",
    "run_train",
    "run_ablate",
    "run_grid_search",
    "run_validate_risk",
    "run_bounds",
]

METRICS_HEADER = "run_seed,epoch,selection_risk,cum_regret,label_precision,train_acc,test_acc,wall_ms"
ETA_COEFFICIENT_GRID = (1e-4, 5e-4, 1e-3, 5e-3)
VALIDATE_RISK_FRACTIONS = (0.2, 0.4, 0.6, 0.8, 1.0)
_MODES = ("simulate", "train", "ablate", "grid", "validate-risk", "bounds")


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a run mode needs; unused fields are ignored by each mode."""

    mode: str = "train"
    out: str | None = None
    seeds: tuple[int, ...] = (0,)
    selectors: tuple[Strategy, ...] = (Strategy.FPL,)
    # problem size
    n: int = 2000
    k: int | None = None
    k_frac: float | None = None
    epochs: int = 100
    eta_coefficient: float = 1e-3
    # dataset
    dataset: str = "blobs"
    dim: int = 16
    classes: int = 4
    separation: float = 8.0
    data_seed: int = 7
    test_n: int | None = None
    idx_images: str | None = None
    idx_labels: str | None = None
    idx_test_images: str | None = None
    idx_test_labels: str | None = None
    csv_path: str | None = None
    csv_test_path: str | None = None
    # label noise
    noise_kind: str | None = None
    noise_rate: float = 0.0
    # learner
    hidden: int = 256
    lr: float = 0.05
    batch_size: int = 32
    # streams (simulate mode)
    stream: str = "uniform"
    clean_fraction: float = 0.5
    noise_scale: float = 0.1
    drift_period: int = 50
    stream_csv: str | None = None
    dump_stream: str | None = None
    # grid search
    noise_rate_estimate: float | None = None
    validation_fraction: float = 0.2
    # bounds mode
    alpha: float | None = None

    def resolve_k(self, n: int) -> int:
        if self.k is not None:
            if not 1 <= self.k <= n:
                raise ConfigError(f"k={self.k} outside [1, {n}]")
            return self.k
        if self.k_frac is not None:
            if not 0.0 < self.k_frac <= 1.0:
                raise ConfigError(f"k_frac={self.k_frac} outside (0, 1]")
            return min(n, max(1, int(round(self.k_frac * n))))
        raise ConfigError("one of k or k_frac must be set")


def resolve_eta(eta_coefficient: float, k: int, epochs: int) -> float:
    """Perturbation scale eta = eta_coefficient * sqrt(k * T)."""
    if not (np.isfinite(eta_coefficient) and eta_coefficient >= 0.0):
        raise ConfigError(f"eta_coefficient must be finite and >= 0, got {eta_coefficient}")
    return eta_coefficient * float(np.sqrt(k * epochs))


def _parse_int(v: str) -> int:
    return int(v)


def _parse_float(v: str) -> float:
    return float(v)


def _parse_int_list(v: str) -> tuple[int, ...]:
    return tuple(int(p.strip()) for p in v.split(",") if p.strip())


def _parse_selectors(v: str) -> tuple[Strategy, ...]:
    names = [p.strip().lower() for p in v.split(",") if p.strip()]
    if not names:
        raise ConfigError("selector list is empty")
    out = []
    for name in names:
        try:
            out.append(Strategy(name))
        except ValueError:
            valid = ", ".join(s.value for s in Strategy)
            raise ConfigError(f"unknown selector {name!r}; valid: {valid}") from None
    return tuple(out)


def parse_noise(v: str) -> tuple[str, float]:
    """Parse 'sym:0.5' or 'asym:0.4'."""
    parts = v.split(":")
    if len(parts) != 2 or parts[0] not in ("sym", "asym"):
        raise ConfigError(f"noise must look like sym:RATE or asym:RATE, got {v!r}")
    try:
        rate = float(parts[1])
    except ValueError:
        raise ConfigError(f"noise rate {parts[1]!r} is not a number") from None
    if not 0.0 <= rate <= 1.0:
        raise ConfigError(f"noise rate must lie in [0, 1], got {rate}")
    return parts[0], rate


_KEY_PARSERS = {
    "mode": str,
    "out": str,
    "seeds": _parse_int_list,
    "selectors": _parse_selectors,
    "n": _parse_int,
    "k": _parse_int,
    "k_frac": _parse_float,
    "epochs": _parse_int,
    "eta_coefficient": _parse_float,
    "dataset": str,
    "dim": _parse_int,
    "classes": _parse_int,
    "separation": _parse_float,
    "data_seed": _parse_int,
    "test_n": _parse_int,
    "idx_images": str,
    "idx_labels": str,
    "idx_test_images": str,
    "idx_test_labels": str,
    "csv_path": str,
    "csv_test_path": str,
    "hidden": _parse_int,
    "lr": _parse_float,
    "batch_size": _parse_int,
    "stream": str,
    "clean_fraction": _parse_float,
    "noise_scale": _parse_float,
    "drift_period": _parse_int,
    "stream_csv": str,
    "dump_stream": str,
    "noise_rate_estimate": _parse_float,
    "validation_fraction": _parse_float,
    "alpha": _parse_float,
}


def parse_config_file(path) -> dict[str, str]:
    """Flat key = value lines; `#` starts a comment; duplicates rejected."""
    raw: dict[str, str] = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{line_no}: expected key = value, got {line.strip()!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if not key or not value:
            raise ConfigError(f"{path}:{line_no}: empty key or value")
        if key in raw:
            raise ConfigError(f"{path}:{line_no}: duplicate key {key!r}")
        raw[key] = value
    return raw


def build_config(raw: dict[str, str]) -> ExperimentConfig:
    """Validate raw key/value strings into an ExperimentConfig."""
    fields: dict[str, object] = {}
    for key, value in raw.items():
        if key == "noise":
            fields["noise_kind"], fields["noise_rate"] = parse_noise(value)
            continue
        parser = _KEY_PARSERS.get(key)
        if parser is None:
            raise ConfigError(f"unknown config key {key!r}")
        try:
            fields[key] = parser(value)
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"config key {key!r}: {exc}") from None
    cfg = ExperimentConfig(**fields)
    if cfg.mode not in _MODES:
        raise ConfigError(f"unknown mode {cfg.mode!r}; valid: {', '.join(_MODES)}")
    if not cfg.seeds:
        raise ConfigError("seeds list is empty")
    if not cfg.selectors:
        raise ConfigError("selector list is empty")
    if cfg.epochs < 1:
        raise ConfigError(f"epochs must be >= 1, got {cfg.epochs}")
    if cfg.dataset not in ("blobs", "idx", "csv"):
        raise ConfigError(f"dataset must be blobs, idx, or csv, got {cfg.dataset!r}")
    return cfg


def _fmt(value) -> str:
    if isinstance(value, float):
        return format(value, ".10g")
    return str(value)


def _metrics_rows(run_seed: int, metrics: list[EpochMetrics]) -> list[str]:
    return [
        ",".join(
            _fmt(v)
            for v in (
                run_seed,
                m.epoch,
                m.selection_risk,
                m.cum_regret,
                m.label_precision,
                m.train_acc,
                m.test_acc,
                m.wall_ms,
            )
        )
        for m in metrics
    ]


def _write_csv(path, header: str, rows: list[str]) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(row + "\n")


def _suffixed(out: str, tag: str) -> str:
    p = Path(out)
    return str(p.with_name(f"{p.stem}_{tag}{p.suffix or '.csv'}"))


def _require_out(cfg: ExperimentConfig) -> str:
    if not cfg.out:
        raise ConfigError(f"mode {cfg.mode!r} needs an output path (out = ... or --out)")
    return cfg.out


# ---------------------------------------------------------------- simulate


def _stream_for_seed(cfg: ExperimentConfig, seed: int) -> RiskStream:
    if cfg.stream == "csv":
        if not cfg.stream_csv:
            raise ConfigError("stream = csv needs stream_csv = PATH")
        return load_stream_csv(cfg.stream_csv)
    try:
        kind = StreamKind(cfg.stream)
    except ValueError:
        raise ConfigError(
            f"unknown stream {cfg.stream!r}; valid: uniform, planted, drifting, adversary, csv"
        ) from None
    n = 2 if kind is StreamKind.ADVERSARY else cfg.n
    spec = StreamSpec(
        kind=kind,
        n=n,
        epochs=cfg.epochs,
        seed=seed,
        clean_fraction=cfg.clean_fraction,
        noise_scale=cfg.noise_scale,
        drift_period=cfg.drift_period if kind is StreamKind.DRIFTING else None,
    )
    return generate_stream(spec)


def _simulate_one(
    stream: RiskStream, strategy: Strategy, k: int, eta: float, seed: int
) -> tuple[list[EpochMetrics], float, float]:
    """Run one selector over one stream; returns (metrics, regret, best_total)."""
    n = stream.n
    rng = np.random.default_rng(seed)
    cum = CumulativeRisk.zeros(n)
    spent = 0.0
    metrics: list[EpochMetrics] = []
    for t, theta in enumerate(stream.risks):
        t0 = time.perf_counter()
        if strategy is Strategy.FPL:
            sel = fpl_select(cum, k, eta, rng)
        elif strategy is Strategy.NAIVE:
            sel = ftl_select(cum, k)
        elif strategy is Strategy.GREEDY:
            sel = greedy_select(stream.risks[t - 1], k) if t > 0 else init_selection(n, k, seed)
        else:
            idx = rng.choice(n, size=k, replace=False)
            idx.sort()
            sel = KSetSelection(idx.astype(np.int64))
        risk = float(theta.values[sel.indices].sum())
        spent += risk
        cum = accumulate(cum, theta)
        best_prefix = top_k_smallest(cum.sums, k)
        prefix_regret = spent - float(cum.sums[best_prefix.indices].sum())
        if stream.clean_masks is not None:
            precision = label_precision(sel, stream.clean_masks[t])
        else:
            precision = float("nan")
        metrics.append(
            EpochMetrics(
                epoch=t + 1,
                selection_risk=risk,
                cum_regret=prefix_regret,
                label_precision=precision,
                train_acc=float("nan"),
                test_acc=float("nan"),
                wall_ms=(time.perf_counter() - t0) * 1000.0,
            )
        )
    best_total = float(cum.sums[top_k_smallest(cum.sums, k).indices].sum())
    return metrics, spent - best_total, best_total


@dataclass
class SimulateResult:
    reports: dict[Strategy, BoundReport]
    csv_paths: dict[Strategy, str]


def run_simulate(cfg: ExperimentConfig) -> SimulateResult:
    """Replay each selector over identical streams and report bounds."""
    out = _require_out(cfg)
    first_stream = _stream_for_seed(cfg, cfg.seeds[0])
    n = first_stream.n
    k = cfg.resolve_k(n)
    eta = resolve_eta(cfg.eta_coefficient, k, cfg.epochs)
    SelectorConfig(strategy=Strategy.FPL, k=k, eta=eta).check_n(n)
    if cfg.dump_stream:
        dump_stream_csv(first_stream, cfg.dump_stream)

    reports: dict[Strategy, BoundReport] = {}
    paths: dict[Strategy, str] = {}
    streams = {cfg.seeds[0]: first_stream}
    for seed in cfg.seeds[1:]:
        streams[seed] = _stream_for_seed(cfg, seed)

    try:
        ceiling = regret_bound(n, k, cfg.epochs)
    except ParameterError:
        ceiling = float("nan")  # k = n: guarantee void

    for strategy in cfg.selectors:
        rows: list[str] = []
        regrets, asrs, alphas = [], [], []
        for seed in cfg.seeds:
            metrics, run_regret, best_total = _simulate_one(streams[seed], strategy, k, eta, seed)
            rows.extend(_metrics_rows(seed, metrics))
            regrets.append(run_regret)
            asrs.append(sum(m.selection_risk for m in metrics) / cfg.epochs)
            alphas.append(best_total / (k * cfg.epochs))
        alpha = float(np.mean(alphas))
        try:
            risk_ceiling = avg_risk_bound(n, k, cfg.epochs, alpha)
        except ParameterError:
            alpha, risk_ceiling = None, None
        reports[strategy] = BoundReport(
            n=n,
            k=k,
            epochs=cfg.epochs,
            empirical_regret=float(np.mean(regrets)),
            empirical_avg_risk=float(np.mean(asrs)),
            regret_ceiling=ceiling,
            alpha=alpha,
            avg_risk_ceiling=risk_ceiling,
        )
        path = out if len(cfg.selectors) == 1 else _suffixed(out, strategy.value)
        _write_csv(path, METRICS_HEADER, rows)
        paths[strategy] = path
    return SimulateResult(reports=reports, csv_paths=paths)


# ------------------------------------------------------------------- train


def _load_base_datasets(cfg: ExperimentConfig) -> tuple[Dataset, Dataset | None]:
    """Training features plus an optional clean test set, before any noise."""
    if cfg.dataset == "blobs":
        test_n = cfg.test_n if cfg.test_n is not None else max(1, cfg.n // 4)
        full = make_blobs(cfg.n + test_n, cfg.dim, cfg.classes, cfg.separation, cfg.data_seed)
        idx_train = np.arange(cfg.n)
        idx_test = np.arange(cfg.n, cfg.n + test_n)
        return full.subset(idx_train), full.subset(idx_test)
    if cfg.dataset == "idx":
        if not cfg.idx_images or not cfg.idx_labels:
            raise ConfigError("dataset = idx needs idx_images and idx_labels paths")
        train = load_idx(cfg.idx_images, cfg.idx_labels)
        test = None
        if cfg.idx_test_images and cfg.idx_test_labels:
            test = load_idx(cfg.idx_test_images, cfg.idx_test_labels)
        return train, test
    if not cfg.csv_path:
        raise ConfigError("dataset = csv needs csv_path")
    train = load_csv_dataset(cfg.csv_path)
    test = load_csv_dataset(cfg.csv_test_path) if cfg.csv_test_path else None
    return train, test


def _noisy_copy(train: Dataset, cfg: ExperimentConfig, seed: int) -> Dataset:
    if cfg.noise_kind is None or cfg.noise_rate == 0.0:
        return train
    return apply_label_noise(train, LabelNoiseSpec(kind=cfg.noise_kind, rate=cfg.noise_rate, seed=seed))


def _train_cfg(cfg: ExperimentConfig, strategy: Strategy, k: int, eta: float, seed: int) -> TrainConfig:
    return TrainConfig(
        strategy=strategy,
        k=k,
        epochs=cfg.epochs,
        eta=eta,
        hidden=cfg.hidden,
        lr=cfg.lr,
        batch_size=cfg.batch_size,
        seed=seed,
    )


def _last10_mean(values: list[float]) -> float:
    tail = values[-10:] if len(values) >= 10 else values
    return float(np.mean(tail))


@dataclass
class TrainModeResult:
    csv_path: str
    summary_path: str
    summary: dict[int, tuple[float, float]]  # seed -> (last10 test acc, last10 precision)
    mean_test_acc: float
    mean_precision: float


def run_train(cfg: ExperimentConfig) -> TrainModeResult:
    """Train the chosen selector across seeds; write metrics and a summary."""
    out = _require_out(cfg)
    if len(cfg.selectors) != 1:
        raise ConfigError("train mode takes exactly one selector")
    strategy = cfg.selectors[0]
    train_base, test_set = _load_base_datasets(cfg)
    k = cfg.resolve_k(train_base.n)
    eta = resolve_eta(cfg.eta_coefficient, k, cfg.epochs)

    rows: list[str] = []
    summary: dict[int, tuple[float, float]] = {}
    for seed in cfg.seeds:
        noisy = _noisy_copy(train_base, cfg, seed)
        result = train_selective(noisy, test_set, _train_cfg(cfg, strategy, k, eta, seed))
        rows.extend(_metrics_rows(seed, result.metrics))
        summary[seed] = (
            _last10_mean([m.test_acc for m in result.metrics]),
            _last10_mean([m.label_precision for m in result.metrics]),
        )
    _write_csv(out, METRICS_HEADER, rows)
    summary_path = _suffixed(out, "summary")
    summary_rows = [
        f"{seed},{_fmt(acc)},{_fmt(prec)}" for seed, (acc, prec) in sorted(summary.items())
    ]
    _write_csv(summary_path, "run_seed,last10_test_acc,last10_label_precision", summary_rows)
    return TrainModeResult(
        csv_path=out,
        summary_path=summary_path,
        summary=summary,
        mean_test_acc=float(np.mean([a for a, _ in summary.values()])),
        mean_precision=float(np.mean([p for _, p in summary.values()])),
    )


# ------------------------------------------------------------------ ablate


@dataclass
class AblateResult:
    csv_path: str
    metric_paths: dict[Strategy, str]
    mean_test_acc: dict[Strategy, float]
    mean_precision: dict[Strategy, float]
    best: Strategy
    fpl_wins: bool | None


def run_ablate(cfg: ExperimentConfig) -> AblateResult:
    """Train every listed selector on identically corrupted data."""
    out = _require_out(cfg)
    if len(cfg.selectors) < 2:
        raise ConfigError("ablate mode needs at least two selectors")
    train_base, test_set = _load_base_datasets(cfg)
    k = cfg.resolve_k(train_base.n)
    eta = resolve_eta(cfg.eta_coefficient, k, cfg.epochs)

    noisy_by_seed = {seed: _noisy_copy(train_base, cfg, seed) for seed in cfg.seeds}
    mean_acc: dict[Strategy, float] = {}
    mean_prec: dict[Strategy, float] = {}
    metric_paths: dict[Strategy, str] = {}
    for strategy in cfg.selectors:
        rows: list[str] = []
        accs, precs = [], []
        for seed in cfg.seeds:
            result = train_selective(noisy_by_seed[seed], test_set, _train_cfg(cfg, strategy, k, eta, seed))
            rows.extend(_metrics_rows(seed, result.metrics))
            accs.append(_last10_mean([m.test_acc for m in result.metrics]))
            precs.append(_last10_mean([m.label_precision for m in result.metrics]))
        mean_acc[strategy] = float(np.mean(accs))
        mean_prec[strategy] = float(np.mean(precs))
        path = _suffixed(out, strategy.value)
        _write_csv(path, METRICS_HEADER, rows)
        metric_paths[strategy] = path

    best = max(cfg.selectors, key=lambda s: mean_acc[s])
    others = [s for s in cfg.selectors if s is not Strategy.FPL]
    fpl_wins = None
    if Strategy.FPL in cfg.selectors and others:
        fpl_wins = all(mean_acc[Strategy.FPL] >= mean_acc[s] for s in others)
    comparison_rows = [
        f"{s.value},{_fmt(mean_acc[s])},{_fmt(mean_prec[s])},{1 if s is best else 0}"
        for s in cfg.selectors
    ]
    _write_csv(out, "selector,mean_last10_test_acc,mean_last10_label_precision,is_best", comparison_rows)
    return AblateResult(
        csv_path=out,
        metric_paths=metric_paths,
        mean_test_acc=mean_acc,
        mean_precision=mean_prec,
        best=best,
        fpl_wins=fpl_wins,
    )


# -------------------------------------------------------------- grid search


def k_fraction_grid(noise_rate_estimate: float) -> list[float]:
    """Seven fractions centered on (1 - noise rate), step 0.05."""
    if not 0.0 <= noise_rate_estimate <= 1.0:
        raise ConfigError(f"noise_rate_estimate must lie in [0, 1], got {noise_rate_estimate}")
    center = 1.0 - noise_rate_estimate
    return [round(center + step * 0.05, 10) for step in range(-3, 4)]


def stratified_split(labels: np.ndarray, validation_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded per-class split; returns (train_idx, val_idx), both sorted."""
    if not 0.0 < validation_fraction < 1.0:
        raise ConfigError(f"validation_fraction must lie in (0, 1), got {validation_fraction}")
    rng = np.random.default_rng(seed)
    train_parts, val_parts = [], []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        members = members[rng.permutation(members.shape[0])]
        n_val = int(round(validation_fraction * members.shape[0]))
        n_val = min(members.shape[0] - 1, max(1, n_val)) if members.shape[0] > 1 else 0
        val_parts.append(members[:n_val])
        train_parts.append(members[n_val:])
    train_idx = np.sort(np.concatenate(train_parts))
    val_idx = np.sort(np.concatenate(val_parts)) if val_parts else np.array([], dtype=np.int64)
    return train_idx, val_idx


@dataclass
class GridResult:
    csv_path: str
    best_eta_coefficient: float
    best_k_frac: float
    best_k: int
    best_val_acc: float
    rows: list[tuple[float, float, int, float]]


def run_grid_search(cfg: ExperimentConfig) -> GridResult:
    """Tune eta_coefficient and k on a noisy validation split.

    The noisy training set is split stratified by assigned label; each
    grid point trains the FPL selector on the large part and scores
    accuracy against the held-out noisy labels.  Largest validation
    accuracy wins, first in scan order on ties.
    """
    out = _require_out(cfg)
    if cfg.noise_rate_estimate is None:
        raise ConfigError("grid mode needs noise_rate_estimate")
    fractions = k_fraction_grid(cfg.noise_rate_estimate)
    seed = cfg.seeds[0]
    train_base, _ = _load_base_datasets(cfg)
    noisy = _noisy_copy(train_base, cfg, seed)
    train_idx, val_idx = stratified_split(noisy.assigned_labels, cfg.validation_fraction, seed)
    fit_set = noisy.subset(train_idx)
    val_set = noisy.subset(val_idx)

    rows: list[tuple[float, float, int, float]] = []
    best: tuple[float, float, int, float] | None = None
    clamped = False
    for coef in ETA_COEFFICIENT_GRID:
        for frac in fractions:
            k = int(round(frac * fit_set.n))
            if k < 1 or k > fit_set.n:
                clamped = True
                k = min(fit_set.n, max(1, k))
            eta = resolve_eta(coef, k, cfg.epochs)
            result = train_selective(fit_set, None, _train_cfg(cfg, Strategy.FPL, k, eta, seed))
            val_acc = evaluate(result.model, val_set.samples, val_set.assigned_labels).accuracy
            rows.append((coef, frac, k, val_acc))
            if best is None or val_acc > best[3]:
                best = (coef, frac, k, val_acc)
    if clamped:
        warnings.warn("k grid clamped to [1, n]; the fraction grid exceeded the valid range", UserWarning)
    _write_csv(
        out,
        "eta_coefficient,k_frac,k,val_acc",
        [f"{_fmt(c)},{_fmt(f)},{k},{_fmt(a)}" for c, f, k, a in rows],
    )
    assert best is not None
    return GridResult(
        csv_path=out,
        best_eta_coefficient=best[0],
        best_k_frac=best[1],
        best_k=best[2],
        best_val_acc=best[3],
        rows=rows,
    )


# ----------------------------------------------------------- validate-risk


@dataclass
class ValidateRiskResult:
    csv_path: str
    total_risk: dict[float, float]  # clean fraction -> mean final cumulative risk
    strictly_decreasing: bool


def run_validate_risk(cfg: ExperimentConfig) -> ValidateRiskResult:
    """Train on fixed selections of known label precision.

    For each clean fraction f, the fixed k-set holds round(f * k)
    clean samples and the rest noisy, drawn seeded.  The model trains
    only on that set every epoch while the per-epoch selected risk is
    recorded; more noise in the set should mean more total risk.
    """
    out = _require_out(cfg)
    train_base, _ = _load_base_datasets(cfg)
    k = cfg.resolve_k(train_base.n)

    rows: list[str] = []
    totals: dict[float, list[float]] = {f: [] for f in VALIDATE_RISK_FRACTIONS}
    for seed in cfg.seeds:
        noisy = _noisy_copy(train_base, cfg, seed)
        clean_idx = np.flatnonzero(noisy.clean_mask)
        noisy_idx = np.flatnonzero(~noisy.clean_mask)
        for frac in VALIDATE_RISK_FRACTIONS:
            n_clean = int(round(frac * k))
            n_noisy = k - n_clean
            if n_clean > clean_idx.shape[0] or n_noisy > noisy_idx.shape[0]:
                raise ConfigError(
                    f"cannot build a k={k} selection with clean fraction {frac}: "
                    f"{clean_idx.shape[0]} clean and {noisy_idx.shape[0]} noisy samples available"
                )
            rng = np.random.default_rng(np.random.SeedSequence((seed, int(round(frac * 100)))))
            parts = []
            if n_clean:
                parts.append(rng.choice(clean_idx, size=n_clean, replace=False))
            if n_noisy:
                parts.append(rng.choice(noisy_idx, size=n_noisy, replace=False))
            fixed = KSetSelection(np.sort(np.concatenate(parts)))

            model = init_mlp(noisy.dim, cfg.hidden, noisy.num_classes, seed=seed)
            shuffle_rng = np.random.default_rng(seed)
            cum_risk = 0.0
            for epoch in range(1, cfg.epochs + 1):
                train_epoch(model, noisy, fixed, cfg.lr, cfg.batch_size, shuffle_rng)
                predicted, conf = predict_batch(model, noisy.samples)
                theta = noise_risk_scores(predicted, conf, noisy.assigned_labels)
                risk = float(theta[fixed.indices].sum())
                cum_risk += risk
                rows.append(f"{_fmt(frac)},{seed},{epoch},{_fmt(risk)},{_fmt(cum_risk)}")
            totals[frac].append(cum_risk)

    _write_csv(out, "clean_fraction,run_seed,epoch,selection_risk,cum_selection_risk", rows)
    means = {f: float(np.mean(v)) for f, v in totals.items()}
    ordered = [means[f] for f in VALIDATE_RISK_FRACTIONS]
    decreasing = all(a > b for a, b in zip(ordered, ordered[1:]))
    return ValidateRiskResult(csv_path=out, total_risk=means, strictly_decreasing=decreasing)


# ------------------------------------------------------------------ bounds


@dataclass
class BoundsResult:
    lines: list[str]


def run_bounds(cfg: ExperimentConfig) -> BoundsResult:
    """Print closed-form ceilings for (n, k, T) and optional alpha."""
    k = cfg.resolve_k(cfg.n)
    lines = [f"n={cfg.n} k={k} T={cfg.epochs}"]
    if k == cfg.n:
        lines.append("regret ceiling: undefined for k = n (guarantee needs k <= n - 1)")
    else:
        lines.append(f"regret ceiling (eta = sqrt(kT)): {_fmt(regret_bound(cfg.n, k, cfg.epochs))}")
    lines.append(f"trivial risk ceiling k*T: {_fmt(float(k * cfg.epochs))}")
    if cfg.alpha is not None:
        if k == cfg.n:
            lines.append("avg-risk ceiling: undefined for k = n")
        else:
            try:
                lines.append(
                    f"avg-risk ceiling (alpha={_fmt(cfg.alpha)}): "
                    f"{_fmt(avg_risk_bound(cfg.n, k, cfg.epochs, cfg.alpha))}"
                )
            except ParameterError as exc:
                raise ConfigError(str(exc)) from exc
    return BoundsResult(lines=lines)
