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

Implements the supervised Optimum-Path Forest on the complete graph.

Training:
    - prototypes are both end points of every minimum spanning tree edge that
      joins two classes (Prim's algorithm from node 0);
    - every node is conquered by the prototype offering the path of minimum
      f_max cost (the maximum arc weight along the path), computed with a
      best-first expansion over a binary heap.

Classification of a sample t picks the training node v minimizing
max(C_v, d(v, t)) and returns its propagated label. Ties always go to the
lowest training index.
"""

import heapq
from dataclasses import dataclass
from typing import List

import numpy as np

from opflogger import opfLogger
from opfbase import opfInputError, opfDegenerateError
from opfcore import Dataset, DistanceMetric, Sample, pairwise_distances

__all__ = ('TrainedForest', 'Prediction',
            'find_prototypes', 'train', 'classify', 'classify_all',
            'path_to_root', 'balanced_accuracy')

# Test samples classified per distance-matrix block
CLASSIFY_CHUNK = 1024


@dataclass(frozen=True, eq=False)
class TrainedForest:
    """
    The optimum-path forest over the training samples.

    cost[v]           -- C_v, the optimum f_max path cost (0 at prototypes)
    assigned_label[v] -- L(v), the label propagated from the conquering root
    is_prototype[v]   -- membership in the prototype set
    predecessor[v]    -- previous node on the optimum path, -1 at prototypes
    ordered_nodes     -- training indices by ascending cost (index on ties)
    """
    training: Dataset
    cost: np.ndarray
    assigned_label: np.ndarray
    is_prototype: np.ndarray
    predecessor: np.ndarray
    ordered_nodes: np.ndarray
    metric: DistanceMetric = DistanceMetric.EUCLIDEAN

    def __post_init__(self):
        for fld in ('cost', 'assigned_label', 'is_prototype', 'predecessor', 'ordered_nodes'):
            getattr(self, fld).flags.writeable = False

    @property
    def training_samples(self):
        return self.training.samples

    @property
    def dimension(self):
        return self.training.dimension

    @property
    def label_map(self):
        return self.training.label_map

    @property
    def n_prototypes(self):
        return int(np.count_nonzero(self.is_prototype))

    def __len__(self):
        return len(self.training)

    def __repr__(self):
        return "<%s (n=%d, prototypes=%d, metric=%s, max_cost=%.6g)>" % \
            (self.__class__.__name__, len(self), self.n_prototypes, self.metric.value, float(np.max(self.cost)))


@dataclass(frozen=True)
class Prediction:
    """
    Result of classifying one sample: the conqueror's label, the cost C_t and
    the conqueror's training index.
    """
    label: int
    cost: float
    conqueror_index: int


def _check_trainable(train, op_name):
    if len(train) == 0:
        raise opfInputError("OPF::: %s(): empty training set" % op_name)
    if len(train.classes) < 2:
        raise opfInputError("OPF::: %s(): training set %s has a single class %s, no inter-class edge exists" %
                            (op_name, train.name, train.classes))


def _prototypes_from_distances(dist, labels):
    """
    Prim's MST from node 0 over the complete graph, marking both end points of
    every edge between different classes.
    """
    n = labels.shape[0]
    in_tree = np.zeros(n, dtype=bool)
    key = np.full(n, np.inf)
    parent = np.full(n, -1, dtype=np.int64)
    proto = np.zeros(n, dtype=bool)
    key[0] = 0.0

    for _ in range(n):
        # argmin gives the lowest index among equal keys
        u = int(np.argmin(np.where(in_tree, np.inf, key)))
        in_tree[u] = True

        p = parent[u]
        if p >= 0 and labels[p] != labels[u]:
            proto[p] = True
            proto[u] = True

        d_u = dist[u]
        better = ~in_tree & ((d_u < key) | ((d_u == key) & (u < parent)))
        key[better] = d_u[better]
        parent[better] = u

    return proto


def find_prototypes(train, metric=DistanceMetric.EUCLIDEAN):
    """
    Prototype markers of the training set (list of booleans).
    """
    _check_trainable(train, 'find_prototypes')
    metric = DistanceMetric.parse(metric)
    dist = pairwise_distances(train.features, train.features, metric)
    return _prototypes_from_distances(dist, train.labels).tolist()


def train(train, metric=DistanceMetric.EUCLIDEAN):
    """
    Train the optimum-path forest on the training set.
    """
    _check_trainable(train, 'train')
    metric = DistanceMetric.parse(metric)

    labels = train.labels
    n = len(train)
    dist = pairwise_distances(train.features, train.features, metric)
    proto = _prototypes_from_distances(dist, labels)

    ### Trivial paths: 0 at prototypes, +inf elsewhere
    cost = np.where(proto, 0.0, np.inf)
    assigned = labels.copy()
    pred = np.full(n, -1, dtype=np.int64)
    done = np.zeros(n, dtype=bool)

    heap = [(0.0, int(s)) for s in np.flatnonzero(proto)]
    heapq.heapify(heap)

    ### Best-first expansion; (cost, index) pops lowest index on equal costs
    while heap:
        c_s, s = heapq.heappop(heap)
        if done[s] or c_s > cost[s]:
            continue
        done[s] = True

        tmp = np.maximum(cost[s], dist[s])
        improved = np.flatnonzero(~done & (tmp < cost))
        for t in improved:
            cost[t] = tmp[t]
            assigned[t] = assigned[s]
            pred[t] = s
            heapq.heappush(heap, (float(tmp[t]), int(t)))

    order = np.argsort(cost, kind='stable')
    forest = TrainedForest(train, cost, assigned, proto, pred, order, metric)
    opfLogger.debug("OPF::: train(%s): %s" % (train.name, forest))
    return forest


def _query_features(forest, t):
    feats = t.features if isinstance(t, Sample) else np.asarray(t, dtype=np.float64).reshape(-1)
    if feats.shape[0] != forest.dimension:
        raise opfInputError("OPF::: classify(): sample dimension %d != forest dimension %d" %
                            (feats.shape[0], forest.dimension))
    return feats


def _classify_fast(forest, feats):
    """
    Scan the nodes by ascending cost and stop once no remaining node can win.
    """
    best_val = np.inf
    best_idx = -1
    query = feats.reshape(1, -1)
    for v in forest.ordered_nodes:
        c_v = forest.cost[v]
        if c_v > best_val:
            break
        d_v = pairwise_distances(forest.training.features[v:v+1], query, forest.metric)[0, 0]
        val = max(c_v, d_v)
        if val < best_val or (val == best_val and v < best_idx):
            best_val = val
            best_idx = int(v)

    return Prediction(int(forest.assigned_label[best_idx]), float(best_val), best_idx)


def classify(forest, t, fast=False):
    """
    Classify one sample: argmin over v of max(C_v, d(v, t)).
    """
    feats = _query_features(forest, t)
    if fast:
        return _classify_fast(forest, feats)

    dists = pairwise_distances(forest.training.features, feats.reshape(1, -1), forest.metric)[:, 0]
    vals = np.maximum(forest.cost, dists)
    idx = int(np.argmin(vals))
    return Prediction(int(forest.assigned_label[idx]), float(vals[idx]), idx)


def classify_all(forest, data, fast=False):
    """
    Classify every sample of a dataset (or rows of a feature matrix).
    """
    feats = data.features if isinstance(data, Dataset) else np.atleast_2d(np.asarray(data, dtype=np.float64))
    if feats.shape[1] != forest.dimension:
        raise opfInputError("OPF::: classify_all(): sample dimension %d != forest dimension %d" %
                            (feats.shape[1], forest.dimension))

    if fast:
        return [_classify_fast(forest, row) for row in feats]

    predictions: List[Prediction] = []
    for start in range(0, feats.shape[0], CLASSIFY_CHUNK):
        block = feats[start:start + CLASSIFY_CHUNK]
        vals = np.maximum(forest.cost[None, :],
                          pairwise_distances(block, forest.training.features, forest.metric))
        winners = np.argmin(vals, axis=1)
        for row, idx in enumerate(winners):
            predictions.append(Prediction(int(forest.assigned_label[idx]), float(vals[row, idx]), int(idx)))

    return predictions


def path_to_root(forest, v):
    """
    The optimum path from the conquering prototype down to node v.
    """
    if not 0 <= v < len(forest):
        raise opfInputError("OPF::: path_to_root(): node %d out of range" % v)
    path = [int(v)]
    while forest.predecessor[path[-1]] >= 0:
        path.append(int(forest.predecessor[path[-1]]))
    path.reverse()
    return path


def balanced_accuracy(true_labels, predicted, classes=None, strict=True):
    """
    Accuracy for unbalanced datasets: 1 - sum_i(E_i)/(2c), where E_i is the
    sum of the false positive rate FP_i/(N - n_i) and the false negative rate
    FN_i/n_i of class i.

    With strict=False, rate terms with a zero denominator count as 0 instead
    of raising the degenerate-class error.
    """
    y_true = np.asarray(true_labels)
    y_pred = np.asarray(predicted)
    if y_true.size == 0 or y_true.shape != y_pred.shape:
        raise opfInputError("OPF::: balanced_accuracy(): need two non-empty lists of equal length (%d, %d)" %
                            (y_true.size, y_pred.size))

    cls = sorted(set(y_true.tolist())) if classes is None else list(classes)
    if strict:
        extra = set(y_pred.tolist()) - set(cls)
        if extra:
            raise opfInputError("OPF::: balanced_accuracy(): predicted classes %s not in %s" % (sorted(extra), cls))

    n_all = y_true.size
    err_sum = 0.0
    for c in cls:
        in_c = (y_true == c)
        n_c = int(np.count_nonzero(in_c))
        if strict and (n_c == 0 or n_c == n_all):
            raise opfDegenerateError("OPF::: balanced_accuracy(): class %s has %d of %d samples" % (c, n_c, n_all))

        fp = int(np.count_nonzero((y_pred == c) & ~in_c))
        fn = int(np.count_nonzero(in_c & (y_pred != c)))
        e_fp = fp / (n_all - n_c) if n_all > n_c else 0.0
        e_fn = fn / n_c if n_c > 0 else 0.0
        err_sum += e_fp + e_fn

    return 1.0 - err_sum / (2.0 * len(cls))
