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

Implements the dataset readers (LIBSVM sparse text, CSV), the synthetic
Gaussian-blob generator and the model document persistence.

The model document is UTF-8 JSON with format_version 1. It is written in
canonical form (sorted keys, fixed separators, repr floats) so that saving the
same model twice gives byte-identical files.
"""

import csv
import json
import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from opflogger import opfLogger
from opfbase import opfInputError, opfModelError, opfParseError
from opfcore import Dataset, DistanceMetric, LabelMap, check_seed, make_rng
from opfforest import TrainedForest
from opfcalib import CalibrationModel

__all__ = ('ModelDocument', 'SyntheticSpec', 'FORMAT_VERSION',
            'load_libsvm', 'load_csv', 'load_dataset', 'write_csv_dataset',
            'generate_synthetic', 'synthetic_preset',
            'model_to_json', 'model_from_json', 'save_model', 'load_model')

FORMAT_VERSION = 1

DATA_FORMATS = ('libsvm', 'csv')


def _dataset_name(path):
    return os.path.splitext(os.path.basename(str(path)))[0]

def _parse_label(token, line_no):
    try:
        val = float(token)
    except ValueError:
        raise opfParseError("label '%s' is not a number" % token, line_no)
    if not math.isfinite(val) or val != math.floor(val):
        raise opfParseError("label '%s' is not an integer" % token, line_no)
    return int(val)


###
### LIBSVM
###

def load_libsvm(path):
    """
    Read a LIBSVM "label idx:val ..." file into a dense Dataset.

    Indices are 1-based and strictly ascending per line; the dimension is the
    largest index of the whole file and absent indices are 0.0.
    """
    rows = []
    labels = []
    max_index = 0
    try:
        with open(path, 'r', encoding='utf-8') as stream:
            for line_no, line in enumerate(stream, start=1):
                tokens = line.split()
                if not tokens:
                    continue
                label = _parse_label(tokens[0], line_no)
                entries = {}
                last = 0
                for tok in tokens[1:]:
                    idx_str, sep, val_str = tok.partition(':')
                    if not sep:
                        raise opfParseError("malformed feature '%s'" % tok, line_no)
                    try:
                        idx = int(idx_str)
                        val = float(val_str)
                    except ValueError:
                        raise opfParseError("malformed feature '%s'" % tok, line_no)
                    if idx <= last:
                        raise opfParseError("index %d not ascending (previous %d)" % (idx, last), line_no)
                    if not math.isfinite(val):
                        raise opfParseError("non-finite value in '%s'" % tok, line_no)
                    entries[idx] = val
                    last = idx
                max_index = max(max_index, last)
                rows.append(entries)
                labels.append(label)

    except UnicodeDecodeError as e:
        raise opfParseError("%s is not a text file: %s" % (path, e))

    except OSError as e:
        raise opfInputError("IO::: load_libsvm(): cannot read %s: %s" % (path, e))

    if not rows:
        raise opfParseError("%s holds no samples" % path)
    if max_index == 0:
        raise opfParseError("%s holds no feature index" % path)

    features = np.zeros((len(rows), max_index))
    for i, entries in enumerate(rows):
        for idx, val in entries.items():
            features[i, idx - 1] = val

    dataset = Dataset(features, np.array(labels, dtype=np.int64), None, _dataset_name(path))
    opfLogger.info("IO::: load_libsvm(): %s" % dataset)
    return dataset


###
### CSV
###

def load_csv(path, label_column=-1, header=False):
    """
    Read a numeric CSV file; label_column may be negative (from the end).
    """
    rows = []
    labels = []
    width = None
    try:
        with open(path, 'r', encoding='utf-8', newline='') as stream:
            for line_no, record in enumerate(csv.reader(stream), start=1):
                if header and line_no == 1:
                    continue
                if not record or all(not f.strip() for f in record):
                    continue
                if width is None:
                    width = len(record)
                    if width < 2:
                        raise opfParseError("need at least one feature and one label column", line_no)
                    if not -width <= label_column < width:
                        raise opfInputError("IO::: load_csv(): label column %d outside %d columns" % (label_column, width))
                    col = label_column % width
                elif len(record) != width:
                    raise opfParseError("ragged row: %d fields, expected %d" % (len(record), width), line_no)

                labels.append(_parse_label(record[col].strip(), line_no))
                try:
                    feats = [float(f) for j, f in enumerate(record) if j != col]
                except ValueError:
                    raise opfParseError("non-numeric feature in %s" % record, line_no)
                if not all(math.isfinite(v) for v in feats):
                    raise opfParseError("non-finite feature", line_no)
                rows.append(feats)

    except UnicodeDecodeError as e:
        raise opfParseError("%s is not a text file: %s" % (path, e))

    except OSError as e:
        raise opfInputError("IO::: load_csv(): cannot read %s: %s" % (path, e))

    if not rows:
        raise opfParseError("%s holds no samples" % path)

    dataset = Dataset(np.array(rows), np.array(labels, dtype=np.int64), None, _dataset_name(path))
    opfLogger.info("IO::: load_csv(): %s" % dataset)
    return dataset


def load_dataset(path, fmt='libsvm', label_column=-1, header=False):
    if fmt == 'libsvm':
        return load_libsvm(path)
    if fmt == 'csv':
        return load_csv(path, label_column, header)
    raise opfInputError("IO::: load_dataset(): unknown format '%s' (use one of %s)" % (fmt, DATA_FORMATS))


def write_csv_dataset(dataset, path):
    """
    Write features then the original label, one sample per row.
    """
    with open(path, 'w', encoding='utf-8', newline='') as stream:
        writer = csv.writer(stream, lineterminator='\n')
        for feats, label in zip(dataset.features, dataset.labels):
            writer.writerow([repr(float(v)) for v in feats] + [int(label)])


###
### Synthetic datasets
###

@dataclass(frozen=True)
class SyntheticSpec:
    n_samples: int
    n_features: int = 2
    class_separation: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if int(self.n_samples) < 2 or int(self.n_samples) % 2:
            raise opfInputError("IO::: SyntheticSpec(): n_samples must be even and >= 2, got %s" % self.n_samples)
        if int(self.n_features) < 1:
            raise opfInputError("IO::: SyntheticSpec(): n_features must be positive, got %s" % self.n_features)
        if not math.isfinite(self.class_separation):
            raise opfInputError("IO::: SyntheticSpec(): class_separation must be finite")
        object.__setattr__(self, 'seed', check_seed(self.seed))


def generate_synthetic(spec, name='synthetic'):
    """
    Two equal-sized unit-variance Gaussian blobs centred at +sep/2 (label +1)
    and -sep/2 (label -1) on every axis, in seeded random order.
    """
    rng = make_rng(spec.seed)
    half = spec.n_samples // 2
    shift = spec.class_separation / 2.0
    pos = rng.normal(shift, 1.0, size=(half, spec.n_features))
    neg = rng.normal(-shift, 1.0, size=(half, spec.n_features))
    labels = np.concatenate([np.ones(half, dtype=np.int64), -np.ones(half, dtype=np.int64)])
    perm = rng.permutation(spec.n_samples)
    return Dataset(np.vstack([pos, neg])[perm], labels[perm], LabelMap(1, -1), name)


def synthetic_preset(name, seed=0, cfg=None):
    """
    The stand-in blobs sized like synthetic0/2/3 (see synthConfig).
    """
    if cfg is None:
        from opfconfig import synthConfig as cfg
    if name not in cfg:
        raise opfInputError("IO::: synthetic_preset(): unknown preset '%s' (use one of %s)" % (name, sorted(cfg)))
    prm = cfg[name]
    spec = SyntheticSpec(int(prm['n_samples']), int(prm['n_features']), float(prm['class_separation']), seed)
    return generate_synthetic(spec, name)


###
### Model document
###

@dataclass(frozen=True)
class ModelDocument:
    forest: TrainedForest
    calibration: Optional[CalibrationModel] = None
    format_version: int = FORMAT_VERSION

    @property
    def metric(self):
        return self.forest.metric

    @property
    def label_map(self):
        return self.forest.label_map

    @property
    def is_calibrated(self):
        return self.calibration is not None

    def require_calibration(self):
        if self.calibration is None:
            raise opfModelError("IO::: model has no calibration section, probabilities are not available")
        return self.calibration


def _finite_or_none(val):
    return float(val) if math.isfinite(val) else None

def _calibration_to_dict(model):
    return {'A': float(model.A), 'B': float(model.B), 'theta': float(model.theta),
            'final_nll': _finite_or_none(model.final_nll),
            'optimizer_used': model.optimizer_used,
            'evaluations': int(model.evaluations),
            'score_mode': model.score_mode,
            'gradient_norm': _finite_or_none(model.gradient_norm),
            'diagnostics': list(model.diagnostics)}

def _forest_to_dict(forest):
    train = forest.training
    return {'features': [[float(v) for v in row] for row in train.features],
            'labels': [int(v) for v in train.labels],
            'cost': [float(v) for v in forest.cost],
            'assigned_label': [int(v) for v in forest.assigned_label],
            'is_prototype': [bool(v) for v in forest.is_prototype],
            'predecessor': [int(v) for v in forest.predecessor],
            'name': train.name}


def model_to_json(doc):
    """
    Canonical JSON text of a model document.
    """
    label_map = doc.label_map
    body = {'format_version': doc.format_version,
            'metric': doc.metric.value,
            'label_map': None if label_map is None else
                         {'positive_label': label_map.positive_label, 'negative_label': label_map.negative_label},
            'forest': _forest_to_dict(doc.forest),
            'calibration': None if doc.calibration is None else _calibration_to_dict(doc.calibration)}
    return json.dumps(body, sort_keys=True, separators=(',', ':'), allow_nan=False, ensure_ascii=False) + '\n'


def _field(obj, key, kind, where):
    if not isinstance(obj, dict) or key not in obj:
        raise opfModelError("IO::: model document: missing '%s' in %s" % (key, where))
    val = obj[key]
    if kind is float and isinstance(val, int) and not isinstance(val, bool):
        val = float(val)
    if not isinstance(val, kind) or (kind is int and isinstance(val, bool)):
        raise opfModelError("IO::: model document: '%s' in %s has type %s" % (key, where, type(val).__name__))
    return val


def _whole_array(obj, key):
    vals = _field(obj, key, list, 'forest')
    if any(isinstance(v, bool) or not isinstance(v, (int, float)) for v in vals):
        raise opfModelError("IO::: model document: '%s' in forest must hold numbers" % key)
    arr = np.array(vals, dtype=np.float64)
    if not np.all(np.isfinite(arr)) or np.any(arr != np.round(arr)):
        raise opfModelError("IO::: model document: '%s' in forest must hold whole numbers" % key)
    return arr.astype(np.int64)


def _forest_from_dict(obj, metric, label_map):
    labels = _whole_array(obj, 'labels')
    assigned = _whole_array(obj, 'assigned_label')
    pred = _whole_array(obj, 'predecessor')
    flags = _field(obj, 'is_prototype', list, 'forest')
    if not all(isinstance(v, bool) for v in flags):
        raise opfModelError("IO::: model document: 'is_prototype' in forest must hold booleans")
    proto = np.array(flags, dtype=bool)
    try:
        features = np.array(_field(obj, 'features', list, 'forest'), dtype=np.float64)
        cost = np.array(_field(obj, 'cost', list, 'forest'), dtype=np.float64)
    except (TypeError, ValueError) as e:
        raise opfModelError("IO::: model document: malformed forest arrays: %s" % e)

    n = labels.shape[0]
    if features.ndim != 2 or any(a.shape != (n,) for a in (cost, assigned, proto, pred)) or features.shape[0] != n:
        raise opfModelError("IO::: model document: inconsistent forest array shapes")
    if not np.all(np.isfinite(cost)) or np.any(cost < 0) or np.any((pred < -1) | (pred >= n)):
        raise opfModelError("IO::: model document: invalid forest costs or predecessors")

    try:
        train = Dataset(features, labels, label_map, str(obj.get('name', 'model')))
    except opfInputError as e:
        raise opfModelError("IO::: model document: invalid training set: %s" % e.errstr)
    return TrainedForest(train, cost, assigned, proto, pred, np.argsort(cost, kind='stable'), metric)


def _calibration_from_dict(obj):
    def opt_field(key, kind, default):
        return default if obj.get(key) is None else _field(obj, key, kind, 'calibration')

    diagnostics = opt_field('diagnostics', list, [])
    if not all(isinstance(d, str) for d in diagnostics):
        raise opfModelError("IO::: model document: 'diagnostics' in calibration must hold strings")
    try:
        return CalibrationModel(_field(obj, 'A', float, 'calibration'), _field(obj, 'B', float, 'calibration'),
                                _field(obj, 'theta', float, 'calibration'),
                                opt_field('final_nll', float, float('nan')),
                                opt_field('optimizer_used', str, ''), opt_field('evaluations', int, 0),
                                opt_field('score_mode', str, 'training'),
                                opt_field('gradient_norm', float, float('nan')), tuple(diagnostics))
    except opfInputError as e:
        raise opfModelError("IO::: model document: invalid calibration: %s" % e.errstr)


def model_from_json(text):
    """
    Parse and validate a model document.
    """
    try:
        body = json.loads(text)
    except ValueError as e:
        raise opfModelError("IO::: model document is not valid JSON (truncated or corrupt): %s" % e)
    if not isinstance(body, dict):
        raise opfModelError("IO::: model document must be a JSON object")

    version = _field(body, 'format_version', int, 'document')
    if version != FORMAT_VERSION:
        raise opfModelError("IO::: unsupported model format_version %d (this build reads %d)" % (version, FORMAT_VERSION))

    try:
        metric = DistanceMetric.parse(_field(body, 'metric', str, 'document'))
    except opfInputError as e:
        raise opfModelError("IO::: model document: %s" % e.errstr)

    lm = body.get('label_map')
    try:
        label_map = None if lm is None else LabelMap(_field(lm, 'positive_label', int, 'label_map'),
                                                     _field(lm, 'negative_label', int, 'label_map'))
    except opfInputError as e:
        raise opfModelError("IO::: model document: %s" % e.errstr)

    forest = _forest_from_dict(_field(body, 'forest', dict, 'document'), metric, label_map)
    cal = body.get('calibration')
    calibration = None if cal is None else _calibration_from_dict(_field(body, 'calibration', dict, 'document'))
    if calibration is not None and label_map is None:
        raise opfModelError("IO::: model document: calibration without a binary label map")
    return ModelDocument(forest, calibration, version)


def save_model(doc, path):
    with open(path, 'w', encoding='utf-8', newline='') as stream:
        stream.write(model_to_json(doc))
    opfLogger.info("IO::: model saved to %s" % path)


def load_model(path):
    try:
        with open(path, 'rb') as stream:
            raw = stream.read()
    except OSError as e:
        raise opfInputError("IO::: load_model(): cannot read %s: %s" % (path, e))
    try:
        text = raw.decode('utf-8')
    except UnicodeDecodeError as e:
        raise opfModelError("IO::: model document %s is not UTF-8: %s" % (path, e))
    return model_from_json(text)
