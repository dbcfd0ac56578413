"""Full-batch Adam training with weight clipping and learning-rate control."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from ..baselines import accuracy_report
from ..io_utils import atomic_write_text
from .model import AlClaConfig, AlClaParams, Batch, forward, loss_and_gradients, predict_labels

HISTORY_COLUMNS = (
    "epoch",
    "loss",
    "train_acc_classical",
    "train_acc_nonclassical",
    "train_acc_total",
    "test_acc_classical",
    "test_acc_nonclassical",
    "test_acc_total",
    "lr",
)


class TrainingError(ValueError):
    pass


def stratified_split(labels, test_fraction: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Seeded per-class shuffle; ``floor(test_fraction * n_class)`` states of
    each class go to the test split."""
    lab = np.asarray(labels).astype(int)
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in (0, 1):
        idx = np.flatnonzero(lab == c)
        idx = idx[rng.permutation(idx.size)]
        n_test = int(np.floor(test_fraction * idx.size))
        test.extend(idx[:n_test])
        train.extend(idx[n_test:])
    return np.sort(np.array(train, dtype=int)), np.sort(np.array(test, dtype=int))


@dataclass
class Adam:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: np.ndarray | None = None
    v: np.ndarray | None = None

    def step(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        if self.m is None:
            self.m = np.zeros_like(params)
            self.v = np.zeros_like(params)
        self.t += 1
        self.m = self.beta1 * self.m + (1 - self.beta1) * grad
        self.v = self.beta2 * self.v + (1 - self.beta2) * grad * grad
        m_hat = self.m / (1 - self.beta1**self.t)
        v_hat = self.v / (1 - self.beta2**self.t)
        return params - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


@dataclass
class TrainResult:
    params: AlClaParams
    config: AlClaConfig
    history: list[dict]
    train_idx: np.ndarray
    test_idx: np.ndarray
    best_epoch: int
    seed: int
    final_params: AlClaParams | None = None

    def history_csv(self) -> str:
        lines = [",".join(HISTORY_COLUMNS)]
        for row in self.history:
            lines.append(",".join(repr(float(row[c])) if c != "epoch" else str(row[c]) for c in HISTORY_COLUMNS))
        return "\n".join(lines) + "\n"


def _accuracies(y: np.ndarray, labels: np.ndarray) -> tuple[float, float, float]:
    if labels.size == 0:
        return (float("nan"),) * 3
    return accuracy_report(predict_labels(y), labels)


def _improved(cur: tuple[float, float], best: tuple[float, float], has_test: bool) -> bool:
    # either split improved while the other did not get worse
    tr, te = cur
    btr, bte = best
    if not has_test:
        return tr > btr
    return (tr > btr and te >= bte) or (te > bte and tr >= btr)


def train(dataset: Sequence, config: AlClaConfig, seed: int = 0, check_clipping: bool = False) -> TrainResult:
    """Train on a seeded 80/20 stratified split.

    With the plateau scheduler the learning rate halves whenever the total
    train accuracy has not improved for ``patience`` epochs (not below
    ``min_lr``), and the final parameters are returned. With a constant
    learning rate the returned parameters are those of the last epoch at
    which train or test accuracy rose while the other stayed at least level,
    compared against the best epoch so far; epochs that merely tie the best
    are not selected.

    ``history[e]`` scores the parameters after ``e`` optimizer steps.
    """
    labels = np.array([int(s.label) for s in dataset])
    if not ((labels == 0).any() and (labels == 1).any()):
        raise TrainingError("training needs at least one classical and one nonclassical state")
    full = Batch.from_samples(dataset)
    train_idx, test_idx = stratified_split(labels, config.test_fraction, seed)
    tr_batch = full.subset(train_idx)
    te_batch = full.subset(test_idx) if test_idx.size else None

    params = AlClaParams.initialize(config, seed)
    params.clip(config)
    opt = Adam(config.lr, config.beta1, config.beta2, config.eps)
    history: list[dict] = []
    best_params, best_epoch = params.copy(), 0
    best_acc = (-1.0, -1.0)
    plateau_best, since = -1.0, 0
    mask = [np.triu(np.ones_like(k)) for k in params.K] if config.upper_triangular_K else None

    for epoch in range(config.epochs + 1):
        value, grads, fw = loss_and_gradients(tr_batch, params, config)
        tr = _accuracies(fw.y, tr_batch.labels)
        if te_batch is not None:
            te = _accuracies(forward(te_batch, params, config).y, te_batch.labels)
        else:
            te = (float("nan"),) * 3
        history.append(
            dict(
                zip(
                    HISTORY_COLUMNS,
                    (epoch, value, tr[0], tr[1], tr[2], te[0], te[1], te[2], opt.lr),
                )
            )
        )
        cur = (tr[2], te[2] if te_batch is not None else 0.0)
        if _improved(cur, best_acc, te_batch is not None) or epoch == 0:
            best_acc, best_params, best_epoch = cur, params.copy(), epoch

        if epoch == config.epochs:
            break

        if config.scheduler == "plateau":
            if tr[2] > plateau_best:
                plateau_best, since = tr[2], 0
            else:
                since += 1
                if since >= config.patience:
                    opt.lr = max(opt.lr / 2.0, config.min_lr)
                    since = 0

        new = params.with_flat(opt.step(params.flat(), grads.flat()))
        if mask is not None:
            new.K = [k * mk for k, mk in zip(new.K, mask)]
        new.clip(config)
        if check_clipping:
            _assert_clipped(new, config)
        params = new

    chosen = params if config.scheduler == "plateau" else best_params
    return TrainResult(
        chosen.copy(),
        config,
        history,
        train_idx,
        test_idx,
        config.epochs if config.scheduler == "plateau" else best_epoch,
        seed,
        final_params=params.copy(),
    )


def _assert_clipped(p: AlClaParams, config: AlClaConfig) -> None:
    for k in p.K:
        assert config.K_clip[0] <= k.min() and k.max() <= config.K_clip[1]
    assert config.theta_clip[0] <= p.theta.min() and p.theta.max() <= config.theta_clip[1]
    assert config.amp_clip[0] <= p.amp <= config.amp_clip[1]


# ---------------------------------------------------------------------------
# checkpoints


def save_checkpoint(path: str | Path, result: TrainResult) -> None:
    cfg = result.config
    data = {
        "config": cfg.to_dict(),
        **result.params.to_dict(),
        "basis": cfg.basis.describe(),
        "seed": result.seed,
        "best_epoch": result.best_epoch,
        "train_idx": result.train_idx.tolist(),
        "test_idx": result.test_idx.tolist(),
        "history": result.history,
    }
    atomic_write_text(path, json.dumps(data, indent=1, allow_nan=True) + "\n")


def load_checkpoint(path: str | Path) -> TrainResult:
    data = json.loads(Path(path).read_text())
    cfg = AlClaConfig.from_dict(data["config"])
    params = AlClaParams.from_dict(data)
    params.check_shapes(cfg)
    if data.get("basis") is not None and data["basis"] != cfg.basis.describe():
        raise TrainingError(f"{path}: decoder basis does not match d_x={cfg.d_x}, L={cfg.L}")
    return TrainResult(
        params,
        cfg,
        data.get("history", []),
        np.array(data.get("train_idx", []), dtype=int),
        np.array(data.get("test_idx", []), dtype=int),
        int(data.get("best_epoch", 0)),
        int(data.get("seed", 0)),
    )
