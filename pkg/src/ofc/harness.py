"""Baselines and the repeated cross-validation experiment driver.

Two reference classifiers accompany the level-set model: a Gaussian Naive
Bayes baseline and a brute-force 1-D threshold sweep that serves as the
ground-truth optimum on one-dimensional problems.  `run_experiment`
repeats stratified k-fold cross-validation for every requested classifier
and beta, pools the confusion counts of each test fold, turns them into
fold metrics, and reports mean +- std across repetitions.
"""
from __future__ import annotations

import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import ndtr

from .classifier import fit as ofc_fit, predict as ofc_predict
from .data import LabeledDataset, kfold
from .density import DensityPair
from .errors import DegenerateDataError, DimensionError, OfcError
from .field import GridSpec, ScalarField
from .metrics import (
    ConfusionCounts,
    MetricsReport,
    confusion_from_predictions,
    metrics_from_counts,
)
from .solver import TrainConfig

TOY_POS_MEAN, TOY_NEG_MEAN, TOY_SIGMA = 3.0, 1.0, 1.0
TOY_POS_COUNT, TOY_NEG_COUNT = 1000, 50000


# ---------------------------------------------------------------------------
# analytic 1-D toy problem


@dataclass(frozen=True)
class AnalyticToy:
    """Two 1-D Gaussian classes with closed-form tail integrals.

    Thresholding at tau (positive class where x >= tau) gives exact
    expected confusion counts, making this the reference problem for
    threshold sweeps and solver calibration.
    """

    pos_mean: float = TOY_POS_MEAN
    neg_mean: float = TOY_NEG_MEAN
    sigma: float = TOY_SIGMA
    p_count: float = TOY_POS_COUNT
    n_count: float = TOY_NEG_COUNT
    lo: float = -2.0
    hi: float = 6.0

    def counts_at(self, tau) -> ConfusionCounts:
        tau = float(tau)
        fn = self.p_count * ndtr((tau - self.pos_mean) / self.sigma)
        fp = self.n_count * ndtr((self.neg_mean - tau) / self.sigma)
        return ConfusionCounts(
            tp=self.p_count - fn, fn=fn, fp=fp, tn=self.n_count - fp
        )

    def metrics_at(self, tau, beta: float = 1.0) -> MetricsReport:
        return metrics_from_counts(self.counts_at(tau), beta=beta)

    def density_pair(self, resolution: int = 1024) -> DensityPair:
        grid = GridSpec(bounds=((self.lo, self.hi),), resolution=resolution)
        x = grid.axes()[0]
        norm = self.sigma * np.sqrt(2.0 * np.pi)
        gauss = lambda m: np.exp(-0.5 * ((x - m) / self.sigma) ** 2) / norm
        return DensityPair(
            f_pos=ScalarField(grid, gauss(self.pos_mean)),
            f_neg=ScalarField(grid, gauss(self.neg_mean)),
            p_count=self.p_count,
            n_count=self.n_count,
        )

    def bayes_threshold(self) -> float:
        """Where count-scaled densities cross (the accuracy optimum)."""
        mid = 0.5 * (self.pos_mean + self.neg_mean)
        gap = self.pos_mean - self.neg_mean
        return mid + self.sigma**2 * np.log(self.n_count / self.p_count) / gap


# ---------------------------------------------------------------------------
# Gaussian Naive Bayes baseline


@dataclass(frozen=True)
class NaiveBayesModel:
    """Per-feature Gaussian class conditionals plus class priors."""

    pos_mean: np.ndarray
    pos_var: np.ndarray
    neg_mean: np.ndarray
    neg_var: np.ndarray
    log_prior_ratio: float  # log P(+) - log P(-)


def naive_bayes_fit(data: LabeledDataset, var_floor: float = 1e-9) -> NaiveBayesModel:
    pos, neg = data.positives(), data.negatives()
    if len(pos) < 2 or len(neg) < 2:
        raise DegenerateDataError(
            f"naive Bayes needs at least 2 samples per class, got "
            f"{len(pos)} positive and {len(neg)} negative"
        )
    stats = []
    for name, pts in (("positive", pos), ("negative", neg)):
        var = np.maximum(pts.var(axis=0), var_floor)
        if (var <= 0).any():
            raise DegenerateDataError(f"{name} class has a zero-variance feature")
        stats.append((pts.mean(axis=0), var))
    return NaiveBayesModel(
        pos_mean=stats[0][0],
        pos_var=stats[0][1],
        neg_mean=stats[1][0],
        neg_var=stats[1][1],
        log_prior_ratio=float(np.log(len(pos)) - np.log(len(neg))),
    )


def naive_bayes_decision(m: NaiveBayesModel, points) -> np.ndarray:
    """Log-posterior difference log P(+|x) - log P(-|x) per point."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))

    def log_like(mean, var):
        return -0.5 * (
            np.log(2.0 * np.pi * var) + (pts - mean) ** 2 / var
        ).sum(axis=1)

    return (
        m.log_prior_ratio
        + log_like(m.pos_mean, m.pos_var)
        - log_like(m.neg_mean, m.neg_var)
    )


def naive_bayes_predict(m: NaiveBayesModel, points) -> np.ndarray:
    """True where the positive class is at least as probable (ties positive)."""
    return naive_bayes_decision(m, points) >= 0


# ---------------------------------------------------------------------------
# brute-force threshold oracle (1-D)


def _metric_curves(tp, fn, fp, tn, beta, metric):
    if metric == "f_beta":
        b2 = beta * beta
        den = (1.0 + b2) * tp + b2 * fn + fp
        return np.where(tp > 0, (1.0 + b2) * tp / np.where(den > 0, den, 1.0), 0.0)
    if metric == "accuracy":
        return (tp + tn) / (tp + fn + fp + tn)
    raise ValueError(f"unknown metric {metric!r}")


def threshold_oracle(source, beta: float = 1.0, steps: int = 2000, metric: str = "f_beta"):
    """Best single threshold for labeling x >= tau positive.

    ``source`` is a 1-D LabeledDataset (empirical counts) or an
    AnalyticToy (exact tail integrals).  Sweeps ``steps`` equally spaced
    taus and returns (tau*, metrics at tau*); ties resolve to the
    smallest tau.
    """
    if beta <= 0:
        raise ValueError(f"beta must be positive, got {beta}")
    if steps < 2:
        raise ValueError(f"need at least 2 sweep steps, got {steps}")
    if isinstance(source, AnalyticToy):
        taus = np.linspace(source.lo, source.hi, steps)
        fn = source.p_count * ndtr((taus - source.pos_mean) / source.sigma)
        fp = source.n_count * ndtr((source.neg_mean - taus) / source.sigma)
        tp = source.p_count - fn
        tn = source.n_count - fp
    else:
        if source.dim != 1:
            raise DimensionError(
                f"threshold sweep needs 1-D data, got {source.dim}-D"
            )
        x = source.points[:, 0]
        taus = np.linspace(x.min(), x.max(), steps)
        pos = np.sort(source.positives()[:, 0])
        neg = np.sort(source.negatives()[:, 0])
        tp = len(pos) - np.searchsorted(pos, taus, side="left")
        fp = len(neg) - np.searchsorted(neg, taus, side="left")
        fn = len(pos) - tp
        tn = len(neg) - fp
    curve = _metric_curves(
        tp.astype(float), fn.astype(float), fp.astype(float), tn.astype(float),
        beta, metric,
    )
    best = int(np.argmax(curve))  # first maximum: smallest tau wins ties
    tau = float(taus[best])
    counts = ConfusionCounts(
        tp=float(tp[best]), fn=float(fn[best]), fp=float(fp[best]), tn=float(tn[best])
    )
    return tau, metrics_from_counts(counts, beta=beta)


# ---------------------------------------------------------------------------
# experiment driver


_KNOWN_CLASSIFIERS = ("ofc", "nb", "oracle")


@dataclass(frozen=True)
class ExperimentSpec:
    """One cross-validated comparison: dataset x classifiers x betas."""

    data: LabeledDataset
    classifiers: tuple = ("ofc", "nb")
    repetitions: int = 10
    folds: int = 10
    betas: tuple = (1.0,)
    seed: int = 0
    ofc: TrainConfig = field(default_factory=TrainConfig)
    ofc_measure: str = "f_measure"
    ofc_bandwidth: float = None  # type: ignore[assignment]
    oracle_steps: int = 2000
    workers: int = 4

    def __post_init__(self):
        for c in self.classifiers:
            if c not in _KNOWN_CLASSIFIERS:
                raise ValueError(
                    f"unknown classifier {c!r}; choose from {_KNOWN_CLASSIFIERS}"
                )
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if any(b <= 0 for b in self.betas) or not self.betas:
            raise ValueError("beta grid must be nonempty and positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


@dataclass(frozen=True)
class FoldOutcome:
    classifier: str
    beta: float
    repetition: int
    fold: int
    counts: ConfusionCounts
    report: MetricsReport


@dataclass(frozen=True)
class CellFailure:
    classifier: str
    beta: float
    repetition: int
    fold: int
    message: str


@dataclass(frozen=True)
class SummaryRow:
    classifier: str
    beta: float
    f_beta_mean: float
    f_beta_std: float
    accuracy_mean: float
    accuracy_std: float
    recall_mean: float
    recall_std: float
    precision_mean: float
    precision_std: float
    folds_used: int


RAW_HEADER = (
    "classifier,beta,repetition,fold,tp,fn,fp,tn,"
    "f_beta_pct,accuracy_pct,recall_pct,precision_pct"
)
SUMMARY_HEADER = (
    "classifier,beta,f_beta_mean_pct,f_beta_std_pct,accuracy_mean_pct,"
    "accuracy_std_pct,recall_mean_pct,recall_std_pct,precision_mean_pct,"
    "precision_std_pct,folds_used"
)


@dataclass
class ExperimentResult:
    """Per-fold outcomes plus failures; aggregation happens on demand."""

    spec: ExperimentSpec
    outcomes: list
    failures: list

    def summary(self) -> list:
        rows = []
        for clf in self.spec.classifiers:
            for beta in self.spec.betas:
                cells = [
                    o for o in self.outcomes
                    if o.classifier == clf and o.beta == beta
                ]
                if not cells:
                    continue
                per_rep = []
                for rep in sorted({o.repetition for o in cells}):
                    fold_reports = [o.report for o in cells if o.repetition == rep]
                    per_rep.append(
                        [
                            float(np.mean([getattr(r, m) for r in fold_reports]))
                            for m in ("f_beta", "accuracy", "recall", "precision")
                        ]
                    )
                arr = np.array(per_rep)
                means = [float(v) for v in arr.mean(axis=0)]
                stds = (
                    [float(v) for v in arr.std(axis=0, ddof=1)]
                    if len(per_rep) > 1
                    else [0.0] * 4
                )
                rows.append(
                    SummaryRow(
                        classifier=clf,
                        beta=beta,
                        f_beta_mean=means[0],
                        f_beta_std=stds[0],
                        accuracy_mean=means[1],
                        accuracy_std=stds[1],
                        recall_mean=means[2],
                        recall_std=stds[2],
                        precision_mean=means[3],
                        precision_std=stds[3],
                        folds_used=len(cells),
                    )
                )
        return rows

    def raw_csv(self) -> str:
        lines = [
            "# one row per classifier x beta x repetition x test fold",
            "# confusion counts pooled over the fold's test points",
            RAW_HEADER,
        ]
        for o in self.outcomes:
            c, r = o.counts, o.report
            lines.append(
                f"{o.classifier},{o.beta!r},{o.repetition},{o.fold},"
                f"{c.tp!r},{c.fn!r},{c.fp!r},{c.tn!r},"
                f"{100 * r.f_beta!r},{100 * r.accuracy!r},"
                f"{100 * r.recall!r},{100 * r.precision!r}"
            )
        for f in self.failures:
            lines.append(
                f"# failed: {f.classifier},beta={f.beta!r},rep={f.repetition},"
                f"fold={f.fold}: {f.message}"
            )
        return "\n".join(lines) + "\n"

    def summary_csv(self) -> str:
        lines = [
            "# fold metrics averaged per repetition; mean/std across repetitions",
            SUMMARY_HEADER,
        ]
        for s in self.summary():
            lines.append(
                f"{s.classifier},{s.beta!r},"
                f"{100 * s.f_beta_mean!r},{100 * s.f_beta_std!r},"
                f"{100 * s.accuracy_mean!r},{100 * s.accuracy_std!r},"
                f"{100 * s.recall_mean!r},{100 * s.recall_std!r},"
                f"{100 * s.precision_mean!r},{100 * s.precision_std!r},"
                f"{s.folds_used}"
            )
        return "\n".join(lines) + "\n"

    def sweep_csv(self) -> str:
        """Mean F_beta per beta, one column per classifier (plot-ready)."""
        rows = self.summary()
        clfs = list(self.spec.classifiers)
        lines = ["beta," + ",".join(clfs)]
        for beta in self.spec.betas:
            cells = []
            for clf in clfs:
                match = [
                    r for r in rows if r.classifier == clf and r.beta == beta
                ]
                cells.append(repr(100 * match[0].f_beta_mean) if match else "")
            lines.append(f"{beta!r}," + ",".join(cells))
        return "\n".join(lines) + "\n"


def _run_cell(spec: ExperimentSpec, clf, beta, train_data, test_data):
    if clf == "ofc":
        cfg = replace(spec.ofc, beta=beta)
        model, _ = ofc_fit(
            train_data, cfg, measure=spec.ofc_measure, bandwidth=spec.ofc_bandwidth
        )
        predicted = ofc_predict(model, test_data.points)
    elif clf == "nb":
        model = naive_bayes_fit(train_data)
        predicted = naive_bayes_predict(model, test_data.points)
    else:  # oracle
        tau, _ = threshold_oracle(train_data, beta=beta, steps=spec.oracle_steps)
        predicted = test_data.points[:, 0] >= tau
    return confusion_from_predictions(test_data.labels, predicted)


def run_experiment(spec: ExperimentSpec) -> ExperimentResult:
    """Cross-validate every classifier; never abort on a single cell."""
    started = time.monotonic()
    cells = []
    for rep in range(spec.repetitions):
        folds = kfold(spec.data, spec.folds, seed=spec.seed + rep)
        for fold_n, (train_idx, test_idx) in enumerate(folds):
            train_data = spec.data.subset(train_idx)
            test_data = spec.data.subset(test_idx)
            for clf in spec.classifiers:
                for beta in spec.betas:
                    cells.append((clf, beta, rep, fold_n, train_data, test_data))

    def job(cell):
        clf, beta, rep, fold_n, train_data, test_data = cell
        try:
            counts = _run_cell(spec, clf, beta, train_data, test_data)
            return FoldOutcome(
                clf, beta, rep, fold_n, counts,
                metrics_from_counts(counts, beta=beta),
            )
        except (OfcError, ValueError) as exc:
            return CellFailure(clf, beta, rep, fold_n, f"{type(exc).__name__}: {exc}")

    if spec.workers == 1:
        produced = [job(c) for c in cells]
    else:
        with ThreadPoolExecutor(max_workers=spec.workers) as pool:
            produced = list(pool.map(job, cells))  # order follows cells

    outcomes = [p for p in produced if isinstance(p, FoldOutcome)]
    failures = [p for p in produced if isinstance(p, CellFailure)]
    print(
        f"experiment: {len(cells)} cells in {time.monotonic() - started:.1f}s "
        f"({len(failures)} failed)",
        file=sys.stderr,
    )
    return ExperimentResult(spec=spec, outcomes=outcomes, failures=failures)
