"""Experiment protocols shared by the acceptance tests and scripts/."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .alcla import AlClaConfig, extract_rule, predict, stratified_split, train
from .baselines import TradeoffCurve, accuracy_report, lambda_sweep, moment_features, svm_fit
from .detectors import DetectorModel, SampleSet
from .witnesses import bias_grid, evaluate_witness, sweep_bias

LAMBDA_GRID = (0.0, 0.1, 0.2, 0.4, 0.8, 1.6, 3.2)
MATCHED_LEVELS = (0.6, 0.7, 0.8)
DOMINANCE_SLACK = 0.05

# sign of <n^2>, <n>^2, <n>, constant in a Mandel-like second-order rule
MANDEL_SIGNS = {((0, 0),): 1, ((0,), (0,)): -1, ((0,),): -1, (): -1}


def labels_of(states: Sequence[SampleSet]) -> np.ndarray:
    return np.array([int(s.label) for s in states])


def has_mandel_signs(rule) -> bool:
    signs = rule.sign_pattern()
    return all(signs.get(k, 0) == v for k, v in MANDEL_SIGNS.items())


def witness_curve(states: Sequence[SampleSet], detector: DetectorModel, name: str, biases=None) -> TradeoffCurve:
    reports = [evaluate_witness(name, s, detector) for s in states]
    grid = bias_grid(reports) if biases is None else np.asarray(biases, dtype=float)
    return sweep_bias(reports, labels_of(states), grid, name)


@dataclass
class DominanceCheck:
    level: float
    alcla: float
    witness: float
    ok: bool


def dominance(alcla: TradeoffCurve, witnesses: Sequence[TradeoffCurve], levels=MATCHED_LEVELS, slack=DOMINANCE_SLACK) -> list[DominanceCheck]:
    """At each classical-accuracy level, the best nonclassical accuracy the
    AlCla curve reaches with at least that classical accuracy must be no more
    than ``slack`` below the best any witness curve reaches (``-inf`` when a
    curve never reaches the level)."""
    out = []
    for lvl in levels:
        a = alcla.best_nonclassical_at(lvl)
        w = max(c.best_nonclassical_at(lvl) for c in witnesses)
        # the AlCla curve has to reach the level itself
        out.append(DominanceCheck(lvl, float(a), float(w), bool(np.isfinite(a) and a >= w - slack)))
    return out


def alcla_sweep(states: Sequence[SampleSet], config: AlClaConfig, lambdas=LAMBDA_GRID, seed: int = 0) -> TradeoffCurve:
    return lambda_sweep(states, config, lambdas, seed=seed)


@dataclass
class RuleRun:
    seed: int
    text: str
    mandel_signs: bool
    accuracy: tuple[float, float, float]


def rule_runs(states: Sequence[SampleSet], config: AlClaConfig, seeds: Sequence[int]) -> list[RuleRun]:
    lab = labels_of(states)
    runs = []
    for seed in seeds:
        res = train(states, config, seed=seed)
        rule = extract_rule(res.params, config)
        acc = accuracy_report(predict(states, res.params, config), lab)
        runs.append(RuleRun(seed, rule.to_text(), has_mandel_signs(rule), acc))
    return runs


def alcla_accuracy(states: Sequence[SampleSet], config: AlClaConfig, seed: int) -> tuple[float, float, float]:
    res = train(states, config, seed=seed)
    return accuracy_report(predict(states, res.params, config), labels_of(states))


def svm_accuracy(states: Sequence[SampleSet], seed: int = 0, C: float = 1.0) -> tuple[float, float, float]:
    """Linear SVM on first and second moments, fitted on the seeded training
    split and scored on every state."""
    lab = labels_of(states)
    feats = np.array([moment_features(s) for s in states])
    tr, _ = stratified_split(lab, 0.2, seed)
    model = svm_fit(feats[tr], lab[tr], C=C)
    return accuracy_report(model.predict(feats), lab)


def lam_k_table(states: Sequence[SampleSet], config: AlClaConfig, lam_ks=(0.0, 1.0, 10.0, 100.0), seeds=(0, 1, 2)) -> dict[float, tuple[float, float, float]]:
    """Best-of-seeds accuracy (by total) for each encoder sparsity weight."""
    out = {}
    for lk in lam_ks:
        accs = [alcla_accuracy(states, replace(config, lam_K=float(lk)), s) for s in seeds]
        out[float(lk)] = max(accs, key=lambda a: a[2])
    return out
