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

Implements the dataset representation shared by all popfpy modules:
samples, datasets, the binary label mapping, the distance functions and the
seeded randomness contract.

Datasets are immutable: the feature and label arrays are stored read-only and
every transformation (to_binary, subset, shuffle) returns a new Dataset.
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np
from scipy.spatial.distance import cdist

from opflogger import opfLogger
from opfbase import opfInputError, opfDatasetError

__all__ = ('DistanceMetric', 'LabelMap', 'Sample', 'Dataset',
            'check_seed', 'derive_seed', 'make_rng',
            'distance', 'pairwise_distances', 'to_binary', 'shuffle')

# Seeds are 64-bit unsigned integers
SEED_MAX = 2**64


class DistanceMetric(str, Enum):
    """
    The supported sample distance functions.
    """
    EUCLIDEAN = 'euclidean'
    SQUARED_EUCLIDEAN = 'squared_euclidean'
    MANHATTAN = 'manhattan'

    @property
    def cdist_name(self):
        return {'euclidean': 'euclidean',
                'squared_euclidean': 'sqeuclidean',
                'manhattan': 'cityblock'}[self.value]

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise opfInputError("Core::: DistanceMetric.parse(): unknown metric '%s' (use one of %s)" %
                                (name, [m.value for m in cls]))


@dataclass(frozen=True)
class LabelMap:
    """
    Maps the two original class tags onto the binary labels +1/-1.
    """
    positive_label: int
    negative_label: int

    def __post_init__(self):
        if self.positive_label == self.negative_label:
            raise opfInputError("Core::: LabelMap(): positive and negative labels are both %d" % self.positive_label)

    def to_binary(self, label):
        if label == self.positive_label:
            return 1
        if label == self.negative_label:
            return -1
        raise opfInputError("Core::: LabelMap.to_binary(): label %s is not mapped by %s" % (label, self))

    def to_original(self, binary_label):
        return self.positive_label if binary_label > 0 else self.negative_label

    def binarize(self, labels):
        """ Vectorised to_binary() """
        labels = np.asarray(labels)
        known = (labels == self.positive_label) | (labels == self.negative_label)
        if not np.all(known):
            raise opfInputError("Core::: LabelMap.binarize(): labels %s are not mapped by %s" %
                                (sorted(set(labels[~known].tolist())), self))
        return np.where(labels == self.positive_label, 1, -1).astype(np.int64)


def _readonly(arr):
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Sample:
    """
    One labeled feature vector. binary_label is None until a LabelMap is applied.
    """
    features: np.ndarray
    label: int
    binary_label: Optional[int] = None

    def __post_init__(self):
        feats = np.array(self.features, dtype=np.float64).reshape(-1)
        object.__setattr__(self, 'features', _readonly(feats))
        object.__setattr__(self, 'label', int(self.label))
        if self.binary_label is not None and self.binary_label not in (-1, 1):
            raise opfInputError("Core::: Sample(): binary_label must be -1 or +1, got %s" % self.binary_label)

    @property
    def dimension(self):
        return self.features.shape[0]

    def __eq__(self, other):
        if not isinstance(other, Sample):
            return NotImplemented
        return self.label == other.label and self.binary_label == other.binary_label and \
            np.array_equal(self.features, other.features)

    def __hash__(self):
        return hash((self.label, self.binary_label, self.features.tobytes()))


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    An ordered, immutable collection of samples sharing one dimension.

    The features are kept as a dense (n x d) float64 matrix and the original
    labels as an int64 vector; `samples` materializes the Sample view.
    """
    features: np.ndarray
    labels: np.ndarray
    label_map: Optional[LabelMap] = None
    name: str = 'dataset'
    _binary: Optional[np.ndarray] = field(default=None, init=False, repr=False)

    def __post_init__(self):
        feats = np.array(self.features, dtype=np.float64)
        labels = np.array(self.labels)
        if feats.ndim != 2 or feats.shape[0] == 0 or feats.shape[1] == 0:
            raise opfInputError("Core::: Dataset(%s): features must be a non-empty 2-D matrix, got shape %s" %
                                (self.name, feats.shape))
        if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
            raise opfInputError("Core::: Dataset(%s): %d labels for %d samples" %
                                (self.name, labels.size, feats.shape[0]))
        if labels.dtype.kind == 'f':
            if not np.all(np.isfinite(labels)) or not np.all(labels == np.round(labels)):
                raise opfInputError("Core::: Dataset(%s): labels must be integers" % self.name)
        labels = labels.astype(np.int64)

        object.__setattr__(self, 'features', _readonly(feats))
        object.__setattr__(self, 'labels', _readonly(labels))
        if self.label_map is not None:
            object.__setattr__(self, '_binary', _readonly(self.label_map.binarize(labels)))

    @classmethod
    def from_samples(cls, samples, name='dataset', label_map=None):
        samples = list(samples)
        if not samples:
            raise opfInputError("Core::: Dataset.from_samples(%s): no samples" % name)
        dims = {s.dimension for s in samples}
        if len(dims) != 1:
            raise opfInputError("Core::: Dataset.from_samples(%s): mixed dimensions %s" % (name, sorted(dims)))
        return cls(np.vstack([s.features for s in samples]),
                   np.array([s.label for s in samples], dtype=np.int64), label_map, name)

    @property
    def dimension(self):
        return self.features.shape[1]

    @property
    def binary_labels(self):
        """ The +1/-1 labels, or None when no LabelMap was applied """
        return self._binary

    @property
    def classes(self):
        return sorted(set(self.labels.tolist()))

    @property
    def is_binary(self):
        return self.label_map is not None

    def class_counts(self):
        vals, counts = np.unique(self.labels, return_counts=True)
        return dict(zip(vals.tolist(), counts.tolist()))

    @property
    def samples(self):
        return tuple(self[i] for i in range(len(self)))

    def subset(self, indices, name=None):
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.features[idx], self.labels[idx], self.label_map, name or self.name)

    def require_binary(self, op_name):
        if self.label_map is None:
            raise opfDatasetError("Core::: %s(): dataset %s has no binary label map (run to_binary first)" %
                                  (op_name, self.name))

    def __len__(self):
        return self.labels.shape[0]

    def __getitem__(self, i):
        binary = None if self._binary is None else int(self._binary[i])
        return Sample(self.features[i], int(self.labels[i]), binary)

    def __iter__(self):
        return (self[i] for i in range(len(self)))

    def __eq__(self, other):
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.name == other.name and self.label_map == other.label_map and \
            np.array_equal(self.labels, other.labels) and np.array_equal(self.features, other.features)

    __hash__ = None

    def __repr__(self):
        return "<%s (name=%s, n=%d, dimension=%d, classes=%s, label_map=%s)>" % \
            (self.__class__.__name__, self.name, len(self), self.dimension, self.class_counts(), self.label_map)


###
### Randomness contract
###

def check_seed(seed):
    """
    Validate a seed: a 64-bit unsigned integer.
    """
    try:
        seed_int = int(seed)
    except (TypeError, ValueError):
        raise opfInputError("Core::: check_seed(): seed %r is not an integer" % (seed,))
    if seed_int != seed or not 0 <= seed_int < SEED_MAX:
        raise opfInputError("Core::: check_seed(): seed %r is not a 64-bit unsigned integer" % (seed,))
    return seed_int

def derive_seed(seed, run_index):
    """
    Per-run seed: seed XOR run_index.
    """
    return check_seed(seed) ^ int(run_index)

def make_rng(seed, run_index=None):
    """
    The numpy Generator of a stochastic operation. Same seed, same stream.
    """
    seed = check_seed(seed) if run_index is None else derive_seed(seed, run_index)
    return np.random.default_rng(seed)


###
### Distances
###

def _as_matrix(x):
    if isinstance(x, Sample):
        x = x.features
    elif isinstance(x, Dataset):
        x = x.features
    return np.atleast_2d(np.asarray(x, dtype=np.float64))

def pairwise_distances(x, y, metric=DistanceMetric.EUCLIDEAN):
    """
    Distance matrix between the rows of x and the rows of y.
    """
    metric = DistanceMetric.parse(metric)
    xm = _as_matrix(x)
    ym = _as_matrix(y)
    if xm.shape[1] != ym.shape[1]:
        raise opfInputError("Core::: pairwise_distances(): dimension mismatch %d != %d" % (xm.shape[1], ym.shape[1]))
    return cdist(xm, ym, metric=metric.cdist_name)

def distance(a, b, metric=DistanceMetric.EUCLIDEAN):
    """
    d(a, b) between two samples (or two feature vectors).
    """
    va = _as_matrix(a)
    vb = _as_matrix(b)
    if va.shape[0] != 1 or vb.shape[0] != 1:
        raise opfInputError("Core::: distance(): expected two single samples")
    return float(pairwise_distances(va, vb, metric)[0, 0])


###
### Dataset transformations
###

def to_binary(dataset, positive_label):
    """
    Map a two-class dataset onto +1 (positive_label) / -1 (the other label).
    """
    classes = dataset.classes
    if len(classes) != 2:
        raise opfDatasetError("Core::: to_binary(): dataset %s has %d classes %s, 2 are required" %
                              (dataset.name, len(classes), classes))
    if positive_label not in classes:
        raise opfInputError("Core::: to_binary(): positive label %s is not one of %s" % (positive_label, classes))

    negative_label = classes[0] if classes[1] == positive_label else classes[1]
    label_map = LabelMap(int(positive_label), int(negative_label))
    opfLogger.debug("Core::: to_binary(%s): %s" % (dataset.name, label_map))
    return Dataset(dataset.features, dataset.labels, label_map, dataset.name)

def shuffle(dataset, seed):
    """
    Seeded permutation of the samples.
    """
    perm = make_rng(seed).permutation(len(dataset))
    return dataset.subset(perm)
