# -*- coding: utf-8 -*-
"""
    Probabilistic Optimum-Path Forest toolkit
    Copyright (C) 2026 popfpy developers

    This program is free software; you can redistribute it and/or modify
    it under the terms of the GNU General Public License as published by
    the Free Software Foundation; either version 2 of the License, or
    (at your option) any later version.

    This program is distributed in the hope that it will be useful,
    but WITHOUT ANY WARRANTY; without even the implied warranty of
    MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
    GNU General Public License for more details.

    You should have received a copy of the GNU General Public License along
    with this program; if not, write to the Free Software Foundation, Inc.,
    51 Franklin Street, Fifth Floor, Boston, MA 02110-1301 USA.

Implements the probabilistic OPF (P-OPF) for binary problems.

The OPF cost C of a sample, signed with its label y, is mapped to
P(y = +1 | x) = 1 / (1 + exp(A*y*C + B)). (A, B) minimize the regularized
negative log-likelihood

    F(A, B) = sum_i (t_i - 1)*q_i + log(1 + exp(q_i)),   q_i = A*s_i + B

with the smoothed targets t_i = (N+ + 1)/(N+ + 2) for positives and
1/(N- + 2) for negatives. F is evaluated in the branched form that never
computes exp of a positive argument, log(0) or 1 - p.
"""

import math
from dataclasses import dataclass, replace
from typing import List, Tuple

import numpy as np

from opflogger import opfLogger
from opfbase import opfInputError, opfDatasetError, opfDegenerateError
from opfcore import make_rng
import opfforest
from opfoptim import minimize

__all__ = ('CalibrationModel', 'ScoredSample',
            'sigmoid_probability', 'sigmoid_complement', 'make_targets',
            'objective', 'objective_gradient', 'score_samples', 'fit',
            'predict_proba', 'predict_proba_all', 'predict_label', 'predict_labels',
            'threshold_sweep', 'SCORE_MODES')

DEFAULT_THETA = 0.5
SCORE_MODES = ('training', 'crossval')


@dataclass(frozen=True)
class ScoredSample:
    """
    score  -- s_i = y_i * C_i, the signed OPF cost
    target -- t_i, the smoothed label
    """
    score: float
    target: float


@dataclass(frozen=True)
class CalibrationModel:
    A: float
    B: float
    theta: float = DEFAULT_THETA
    final_nll: float = float('nan')
    optimizer_used: str = ''
    evaluations: int = 0
    score_mode: str = 'training'
    gradient_norm: float = float('nan')
    diagnostics: Tuple[str, ...] = ()

    def __post_init__(self):
        if not (math.isfinite(self.A) and math.isfinite(self.B)):
            raise opfInputError("Calib::: CalibrationModel(): A and B must be finite (%s, %s)" % (self.A, self.B))
        if not 0.0 <= self.theta <= 1.0:
            raise opfInputError("Calib::: CalibrationModel(): theta %s outside [0, 1]" % self.theta)

    def with_theta(self, theta):
        return replace(self, theta=float(theta))


###
### Sigmoid and likelihood
###

def sigmoid_probability(A, B, score):
    """
    1 / (1 + exp(q)) with q = A*score + B, without overflow for any finite q.
    """
    q = A * score + B
    if q >= 0:
        e = math.exp(-q)
        return e / (1.0 + e)
    return 1.0 / (1.0 + math.exp(q))

def sigmoid_complement(A, B, score):
    """
    1 - sigmoid_probability(A, B, score), computed directly (no cancellation).
    """
    q = A * score + B
    if q >= 0:
        return 1.0 / (1.0 + math.exp(-q))
    e = math.exp(q)
    return e / (1.0 + e)

def _sigmoid_array(q):
    e = np.exp(-np.abs(q))
    return np.where(q >= 0, e / (1.0 + e), 1.0 / (1.0 + e))


def make_targets(labels):
    """
    Smoothed targets: (N+ + 1)/(N+ + 2) for +1, 1/(N- + 2) for -1.
    """
    labels = np.asarray(labels)
    if labels.size == 0:
        raise opfInputError("Calib::: make_targets(): empty label list")
    n_pos = int(np.count_nonzero(labels > 0))
    n_neg = labels.size - n_pos
    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    return np.where(labels > 0, hi, lo).tolist()


def _as_arrays(scored):
    if isinstance(scored, tuple) and len(scored) == 2 and isinstance(scored[0], np.ndarray):
        scores, targets = scored
    else:
        scored = list(scored)
        scores = np.array([s.score for s in scored], dtype=np.float64)
        targets = np.array([s.target for s in scored], dtype=np.float64)
    if scores.size == 0:
        raise opfInputError("Calib::: objective(): no scored samples")
    return scores, targets


def objective(A, B, scored):
    """
    F(A, B): the regularized negative log-likelihood in the stable branched form.

    scored is a list of ScoredSample or a (scores, targets) pair of arrays.
    """
    if not (math.isfinite(A) and math.isfinite(B)):
        raise opfInputError("Calib::: objective(): A, B must be finite (%s, %s)" % (A, B))
    scores, targets = _as_arrays(scored)
    if not np.all(np.isfinite(scores)):
        raise opfInputError("Calib::: objective(): non-finite score")

    q = A * scores + B
    # q >= 0: t*q + log(1 + exp(-q));  q < 0: (t - 1)*q + log(1 + exp(q))
    lin = np.where(q >= 0, targets * q, (targets - 1.0) * q)
    return float(np.sum(lin + np.log1p(np.exp(-np.abs(q)))))


def objective_gradient(A, B, scored):
    """
    (dF/dA, dF/dB) = (sum s_i*(t_i - p_i), sum (t_i - p_i)).
    """
    scores, targets = _as_arrays(scored)
    resid = targets - _sigmoid_array(A * scores + B)
    return float(np.sum(scores * resid)), float(np.sum(resid))


###
### Fitting
###

def _crossval_scores(train, metric, folds, seed):
    """
    Held-out OPF costs: train on k-1 stratified folds, classify the k-th.
    Scores are signed with the OPF-predicted label, as at test time.
    """
    rng = make_rng(seed)
    fold_of = np.empty(len(train), dtype=np.int64)
    for c in train.classes:
        idx = np.flatnonzero(train.labels == c)
        perm = rng.permutation(idx)
        fold_of[perm] = np.arange(perm.size) % folds

    scores = np.empty(len(train))
    label_map = train.label_map
    for k in range(folds):
        held = np.flatnonzero(fold_of == k)
        rest = np.flatnonzero(fold_of != k)
        if held.size == 0:
            continue
        part = train.subset(rest)
        if len(part.classes) < 2:
            raise opfDegenerateError("Calib::: fit(): fold %d leaves a single class for training" % k)
        forest = opfforest.train(part, metric)
        for i, pred in zip(held, opfforest.classify_all(forest, train.features[held])):
            scores[i] = label_map.to_binary(pred.label) * pred.cost
    return scores


def score_samples(forest, train, score_mode='training', folds=3, seed=0):
    """
    The (scores, targets) arrays the sigmoid is fitted on.
    """
    train.require_binary('fit')
    y = train.binary_labels
    if score_mode == 'training':
        if len(forest) != len(train):
            raise opfInputError("Calib::: fit(): forest has %d nodes, training set %d" % (len(forest), len(train)))
        scores = y * forest.cost
    elif score_mode == 'crossval':
        if folds < 2:
            raise opfInputError("Calib::: fit(): crossval needs at least 2 folds, got %d" % folds)
        scores = _crossval_scores(train, forest.metric, folds, seed)
    else:
        raise opfInputError("Calib::: fit(): unknown score mode '%s' (use one of %s)" % (score_mode, SCORE_MODES))

    return np.asarray(scores, dtype=np.float64), np.asarray(make_targets(y))


def fit(forest, train, optimizer, seed=None, score_mode='training', folds=3):
    """
    Fit (A, B) of the sigmoid on the forest's costs with the configured optimizer.
    """
    if seed is not None:
        optimizer = optimizer.with_seed(seed)
    if len(train.classes) != 2:
        raise opfDatasetError("Calib::: fit(): dataset %s is not binary (%s)" % (train.name, train.classes))

    scores, targets = score_samples(forest, train, score_mode, folds, optimizer.seed)
    result = minimize(lambda a, b: objective(a, b, (scores, targets)), optimizer)

    diagnostics = []
    a_star, b_star = result.point
    if not optimizer.box.contains(result.point):
        a_star, b_star = (float(v) for v in optimizer.box.clamp(np.array(result.point)))
        diagnostics.append("optimizer point (%.6g, %.6g) clamped into the box" % result.point)
        opfLogger.warning("Calib::: fit(): %s" % diagnostics[-1])
    if not result.converged:
        diagnostics.append("%s stopped at the iteration limit" % result.algorithm)

    final_nll = objective(a_star, b_star, (scores, targets))
    grad = objective_gradient(a_star, b_star, (scores, targets))
    model = CalibrationModel(a_star, b_star, DEFAULT_THETA, final_nll, result.algorithm,
                             result.evaluations, score_mode, float(np.hypot(*grad)), tuple(diagnostics))
    opfLogger.info("Calib::: fit(%s): A=%.6g B=%.6g NLL=%.8g (%s, %d evaluations)" %
                   (train.name, model.A, model.B, model.final_nll, model.optimizer_used, model.evaluations))
    return model


###
### Prediction
###

def _require_map(forest):
    if forest.label_map is None:
        raise opfDatasetError("Calib::: forest was trained without a binary label map")
    return forest.label_map


def predict_proba(forest, model, t):
    """
    P(y = +1 | t) and the underlying OPF prediction. The score is signed with
    the OPF-predicted label.
    """
    label_map = _require_map(forest)
    pred = opfforest.classify(forest, t)
    y_hat = label_map.to_binary(pred.label)
    return sigmoid_probability(model.A, model.B, y_hat * pred.cost), pred


def predict_proba_all(forest, model, data):
    """
    Vectorised predict_proba over a dataset: (probabilities, predictions).
    """
    label_map = _require_map(forest)
    preds = opfforest.classify_all(forest, data)
    y_hat = label_map.binarize([p.label for p in preds])
    costs = np.array([p.cost for p in preds])
    return _sigmoid_array(model.A * y_hat * costs + model.B), preds


def predict_label(forest, model, t):
    """
    +1 if P(y = +1 | t) >= theta, else -1.
    """
    prob, _ = predict_proba(forest, model, t)
    return 1 if prob >= model.theta else -1


def predict_labels(forest, model, data, theta=None):
    probs, _ = predict_proba_all(forest, model, data)
    theta = model.theta if theta is None else theta
    return np.where(probs >= theta, 1, -1)


def threshold_sweep(forest, model, test, grid):
    """
    (theta, balanced accuracy) rows for every threshold of the grid.
    """
    grid = [float(g) for g in grid]
    if not grid:
        raise opfInputError("Calib::: threshold_sweep(): empty grid")
    if any(not 0.0 < g < 1.0 for g in grid) or any(b <= a for a, b in zip(grid, grid[1:])):
        raise opfInputError("Calib::: threshold_sweep(): grid must be strictly ascending values in (0, 1)")
    test.require_binary('threshold_sweep')

    probs, _ = predict_proba_all(forest, model, test)
    y_true = test.binary_labels
    rows: List[Tuple[float, float]] = []
    for theta in grid:
        y_pred = np.where(probs >= theta, 1, -1)
        rows.append((theta, opfforest.balanced_accuracy(y_true, y_pred, classes=(-1, 1), strict=False)))
    return rows
