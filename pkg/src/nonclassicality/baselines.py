"""Linear SVM baseline, classification metrics and accuracy trade-off curves."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

CSV_HEADER = ("name", "bias", "acc_classical", "acc_nonclassical", "value", "stderr")


def accuracy_report(predictions, labels) -> tuple[float, float, float]:
    """Per-class and total ratios of correct predictions.

    Returns ``(classical, nonclassical, total)``; a class without members gets
    ``nan`` (not applicable).
    """
    pred = np.asarray(predictions).astype(int)
    lab = np.asarray(labels).astype(int)
    if pred.shape != lab.shape:
        raise ValueError(f"predictions {pred.shape} and labels {lab.shape} differ in length")
    if lab.size == 0:
        raise ValueError("no predictions to score")
    correct = pred == lab
    cl = lab == 0
    acc_cl = float(correct[cl].mean()) if cl.any() else math.nan
    acc_ncl = float(correct[~cl].mean()) if (~cl).any() else math.nan
    return acc_cl, acc_ncl, float(correct.mean())


@dataclass(frozen=True)
class CurvePoint:
    param: float
    acc_classical: float
    acc_nonclassical: float
    total: float


@dataclass
class TradeoffCurve:
    """Classical vs nonclassical accuracy traced by one scalar parameter
    (a witness bias or the regularization strength)."""

    method: str
    points: list[CurvePoint] = field(default_factory=list)
    n_classical: int = 0
    n_nonclassical: int = 0

    def add(self, param: float, predictions, labels) -> CurvePoint:
        acc_cl, acc_ncl, total = accuracy_report(predictions, labels)
        lab = np.asarray(labels)
        self.n_classical = int(np.sum(lab == 0))
        self.n_nonclassical = int(np.sum(lab == 1))
        pt = CurvePoint(float(param), acc_cl, acc_ncl, total)
        self.points.append(pt)
        return pt

    def params(self) -> np.ndarray:
        return np.array([p.param for p in self.points])

    def classical(self) -> np.ndarray:
        return np.array([p.acc_classical for p in self.points])

    def nonclassical(self) -> np.ndarray:
        return np.array([p.acc_nonclassical for p in self.points])

    def best_nonclassical_at(self, min_classical: float) -> float:
        """Largest nonclassical accuracy among points whose classical accuracy
        reaches ``min_classical`` (``-inf`` if none does)."""
        ok = [p.acc_nonclassical for p in self.points if p.acc_classical >= min_classical - 1e-12]
        return max(ok) if ok else -math.inf

    def to_csv(self) -> str:
        n = self.n_classical + self.n_nonclassical
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for p in self.points:
            se = math.sqrt(p.total * (1 - p.total) / n) if n else math.nan
            w.writerow([self.method, repr(p.param), repr(p.acc_classical), repr(p.acc_nonclassical), repr(p.total), repr(se)])
        return buf.getvalue()

    def write_csv(self, path: str | Path) -> None:
        from .io_utils import atomic_write_text

        atomic_write_text(path, self.to_csv())


# ---------------------------------------------------------------------------
# features and scaling


def feature_count(d_x: int) -> int:
    return d_x + d_x * (d_x + 1) // 2


def moment_features(samples) -> np.ndarray:
    """First moments per mode, then second moments <n_i n_j> for i <= j in
    row-major upper-triangular order."""
    x = np.asarray(getattr(samples, "samples", samples), dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.shape[0] < 1:
        raise ValueError("moment features need M >= 1")
    first = x.mean(axis=0)
    second = (x.T @ x) / x.shape[0]
    iu = np.triu_indices(x.shape[1])
    return np.concatenate([first, second[iu]])


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def fit(cls, features: np.ndarray) -> "Standardizer":
        f = np.asarray(features, dtype=float)
        sd = f.std(axis=0)
        # constant features pass through centered
        return cls(f.mean(axis=0), np.where(sd > 0, sd, 1.0))

    def transform(self, features: np.ndarray) -> np.ndarray:
        return (np.asarray(features, dtype=float) - self.mean) / self.scale


# ---------------------------------------------------------------------------
# linear SVM


@dataclass(frozen=True)
class SvmModel:
    w: np.ndarray
    b: float
    C: float
    standardizer: Standardizer | None = None

    def decision(self, features: np.ndarray) -> np.ndarray:
        f = np.asarray(features, dtype=float)
        if self.standardizer is not None:
            f = self.standardizer.transform(f)
        if f.shape[-1] != self.w.size:
            raise ValueError(f"expected {self.w.size} features, got {f.shape[-1]}")
        return f @ self.w + self.b

    def predict(self, features: np.ndarray) -> np.ndarray:
        """Label 1 (nonclassical) where the decision value is positive."""
        return (self.decision(features) > 0).astype(int)


def svm_fit(features, labels, C: float = 1.0, epochs: int = 5000, standardize: bool = True) -> SvmModel:
    """Primal linear SVM by full-batch Pegasos subgradient steps.

    Minimizes ``(lam/2)||w||^2 + mean_i max(0, 1 - y_i (w.x_i + b))`` with
    ``lam = 1/(C n)``, i.e. the hinge sum plus ``||w||^2 / (2C)`` rescaled by
    ``1/n``. The intercept is an appended constant feature. Steps use
    ``eta_t = 1/(lam t)``; the iterate with the smallest objective is kept.
    The procedure has no randomness.
    """
    x = np.asarray(features, dtype=float)
    lab = np.asarray(labels).astype(int)
    if x.ndim != 2 or x.shape[0] != lab.size:
        raise ValueError("features must be (n, k) with one label per row")
    if np.unique(lab).size < 2:
        raise ValueError("SVM training needs both classes")
    if C <= 0:
        raise ValueError("C must be positive")
    scaler = Standardizer.fit(x) if standardize else None
    z = scaler.transform(x) if scaler else x
    y = np.where(lab == 1, 1.0, -1.0)
    za = np.hstack([z, np.ones((z.shape[0], 1))])
    n = za.shape[0]
    lam = 1.0 / (C * n)

    def objective(w):
        margins = y * (za @ w)
        return 0.5 * lam * float(w @ w) + float(np.mean(np.maximum(0.0, 1.0 - margins)))

    w = np.zeros(za.shape[1])
    best_w, best_obj = w.copy(), objective(w)
    for t in range(1, epochs + 1):
        eta = 1.0 / (lam * t)
        viol = y * (za @ w) < 1.0
        grad = lam * w - (y[viol][:, None] * za[viol]).sum(axis=0) / n
        w = w - eta * grad
        # Pegasos projection onto the ball of radius 1/sqrt(lam)
        norm = np.linalg.norm(w)
        if norm > 1.0 / math.sqrt(lam):
            w *= 1.0 / (math.sqrt(lam) * norm)
        obj = objective(w)
        if obj < best_obj:
            best_obj, best_w = obj, w.copy()
    return SvmModel(best_w[:-1].copy(), float(best_w[-1]), C, scaler)


# ---------------------------------------------------------------------------
# lambda sweep


def lambda_sweep(dataset: Sequence, config, lambdas: Sequence[float], seed: int = 0, on: str = "all") -> TradeoffCurve:
    """One AlCla training run per regularization strength, in grid order.

    ``on`` selects which states score the curve: ``"all"``, ``"train"`` or
    ``"test"``.
    """
    from dataclasses import replace

    from .alcla import train, predict

    if len(lambdas) == 0:
        raise ValueError("lambda grid is empty")
    curve = TradeoffCurve(f"alcla_L{config.L}")
    for lam in lambdas:
        result = train(dataset, replace(config, lam=float(lam)), seed=seed)
        idx = {"all": None, "train": result.train_idx, "test": result.test_idx}[on]
        states = dataset if idx is None else [dataset[i] for i in idx]
        pred = predict(states, result.params, config=result.config)
        curve.add(lam, pred, [s.label for s in states])
    return curve
