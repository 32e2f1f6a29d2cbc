# -*- coding: utf-8 -*-
import json
import os

import numpy as np
import pytest

from opfbase import opfInputError, opfModelError, opfParseError
import opfcalib
import opfeval
import opfforest
import opfio
from opfcalib import CalibrationModel
from opfio import ModelDocument, SyntheticSpec

# Sample x feature counts of the public LIBSVM datasets
LIBSVM_SHAPES = {'australian': (690, 14), 'breast-cancer': (683, 10), 'colon-cancer': (62, 2000),
                 'diabetes': (768, 8), 'fourclass': (862, 2), 'heart': (270, 13),
                 'ionosphere': (351, 34), 'ionosphere_scale': (351, 34), 'liver-disorders': (345, 6)}


###
### LIBSVM
###

def test_libsvm_format(write_file):
    ds = opfio.load_libsvm(write_file('two.txt', "+1 1:0.5 3:2\n-1\n"))
    assert ds.features.tolist() == [[0.5, 0.0, 2.0], [0.0, 0.0, 0.0]]
    assert ds.labels.tolist() == [1, -1]
    assert ds.name == 'two'


def test_libsvm_dimension_is_file_maximum(write_file):
    ds = opfio.load_libsvm(write_file('dim.txt', "1 2:1\n\n2 5:3.5 7:1e-3\n1.0 1:-2\n"))
    assert ds.dimension == 7 and len(ds) == 3
    assert ds.features[1].tolist() == [0, 0, 0, 0, 3.5, 0, 0.001]
    assert ds.labels.tolist() == [1, 2, 1]


@pytest.mark.parametrize("text, line_no", [
    ("1 1:1\n1 1:1 1:2\n", 2),
    ("1 2:1 1:2\n", 1),
    ("1 1:1\n1.5 1:1\n", 2),
    ("1 1:1\nabc 1:1\n", 2),
    ("1 1:1\n-1 1:x\n", 2),
    ("1 1:1\n-1 3\n", 2),
    ("1 0:1\n", 1),
])
def test_libsvm_parse_errors(write_file, text, line_no):
    with pytest.raises(opfParseError) as err:
        opfio.load_libsvm(write_file('bad.txt', text))
    assert err.value.line_no == line_no
    assert "line %d:" % line_no in str(err.value)


def test_libsvm_missing_file(tmp_path):
    with pytest.raises(opfInputError):
        opfio.load_libsvm(str(tmp_path / 'nope.txt'))


@pytest.mark.skipif(not os.environ.get('POPF_DATA_DIR'), reason="POPF_DATA_DIR not set")
@pytest.mark.parametrize("name, shape", sorted(LIBSVM_SHAPES.items()))
def test_libsvm_repository_shapes(name, shape):
    path = os.path.join(os.environ['POPF_DATA_DIR'], name)
    if not os.path.exists(path):
        pytest.skip("%s not present" % path)
    ds = opfio.load_libsvm(path)
    assert (len(ds), ds.dimension) == shape


###
### CSV
###

def test_csv_label_column(write_file):
    ds = opfio.load_csv(write_file('a.csv', "0.5,2.0,1\n1.5,-1,2\n"), label_column=2)
    assert ds.features.tolist() == [[0.5, 2.0], [1.5, -1.0]]
    assert ds.labels.tolist() == [1, 2]


def test_csv_header_and_first_column(write_file):
    ds = opfio.load_csv(write_file('h.csv', "y,f1,f2\n3,0.1,0.2\n7,0.3,0.4\n"), label_column=0, header=True)
    assert ds.labels.tolist() == [3, 7]
    assert ds.features.tolist() == [[0.1, 0.2], [0.3, 0.4]]


@pytest.mark.parametrize("text, line_no", [
    ("0.5,2.0,1\n0.5,1\n", 2),
    ("0.5,abc,1\n", 1),
    ("0.5,2.0,1.5\n", 1),
])
def test_csv_parse_errors(write_file, text, line_no):
    with pytest.raises(opfParseError) as err:
        opfio.load_csv(write_file('bad.csv', text), label_column=2)
    assert err.value.line_no == line_no


def test_csv_round_trip(tmp_path, toy_dataset):
    path = str(tmp_path / 'toy.csv')
    opfio.write_csv_dataset(toy_dataset, path)
    back = opfio.load_csv(path)
    assert back.features.tolist() == toy_dataset.features.tolist()
    assert back.labels.tolist() == toy_dataset.labels.tolist()


###
### Synthetic
###

def test_synthetic_is_balanced_and_deterministic():
    spec = SyntheticSpec(100, 3, 2.0, 5)
    first = opfio.generate_synthetic(spec)
    assert first == opfio.generate_synthetic(spec)
    assert first.class_counts() == {-1: 50, 1: 50}
    assert first.dimension == 3 and first.is_binary
    assert first != opfio.generate_synthetic(SyntheticSpec(100, 3, 2.0, 6))


def test_synthetic_odd_size_rejected():
    with pytest.raises(opfInputError):
        SyntheticSpec(101)


def test_synthetic_far_blobs_are_separable():
    ds = opfio.generate_synthetic(SyntheticSpec(200, 2, 20.0, 1))
    train, test = opfeval.split(ds, opfeval.SplitSpec(seed=1), 0)
    forest = opfforest.train(train)
    predicted = [p.label for p in opfforest.classify_all(forest, test)]
    assert opfforest.balanced_accuracy(test.labels, predicted) > 0.99

    # nearest-centroid oracle agrees on the labelling
    centroid = np.where(test.features.sum(axis=1) > 0, 1, -1)
    assert np.mean(centroid == test.labels) > 0.99


def test_synthetic_zero_separation_is_chance():
    accs = []
    for seed in range(50):
        ds = opfio.generate_synthetic(SyntheticSpec(100, 2, 0.0, seed))
        train, test = opfeval.split(ds, opfeval.SplitSpec(seed=seed), 0)
        forest = opfforest.train(train)
        accs.append(opfforest.balanced_accuracy(test.labels, [p.label for p in opfforest.classify_all(forest, test)]))
    assert abs(np.mean(accs) - 0.5) < 0.05


def test_synthetic_presets():
    ds = opfio.synthetic_preset('synthetic2', seed=3)
    assert (len(ds), ds.dimension, ds.name) == (1000, 2, 'synthetic2')
    with pytest.raises(opfInputError):
        opfio.synthetic_preset('synthetic9')


###
### Model document
###

@pytest.fixture
def calibrated_doc(toy_dataset):
    forest = opfforest.train(toy_dataset)
    return ModelDocument(forest, CalibrationModel(-1.25, 0.125, 0.5, 2.5, 'NM', 42, 'training', 0.01))


def test_model_round_trip_predictions(tmp_path, calibrated_doc):
    path = str(tmp_path / 'model.json')
    opfio.save_model(calibrated_doc, path)
    loaded = opfio.load_model(path)
    assert loaded.calibration == calibrated_doc.calibration
    assert loaded.metric == calibrated_doc.metric and loaded.label_map == calibrated_doc.label_map

    queries = np.random.default_rng(8).uniform(-1, 3, size=(100, 2))
    assert opfforest.classify_all(loaded.forest, queries) == opfforest.classify_all(calibrated_doc.forest, queries)
    p_loaded, _ = opfcalib.predict_proba_all(loaded.forest, loaded.calibration, queries)
    p_orig, _ = opfcalib.predict_proba_all(calibrated_doc.forest, calibrated_doc.calibration, queries)
    assert p_loaded.tolist() == p_orig.tolist()


def test_model_serialization_is_canonical(tmp_path, calibrated_doc):
    first, second = str(tmp_path / 'a.json'), str(tmp_path / 'b.json')
    opfio.save_model(calibrated_doc, first)
    opfio.save_model(opfio.load_model(first), second)
    with open(first, 'rb') as fa, open(second, 'rb') as fb:
        assert fa.read() == fb.read()
    assert opfio.model_to_json(calibrated_doc) == opfio.model_to_json(calibrated_doc)


def test_model_without_calibration(toy_dataset):
    doc = opfio.model_from_json(opfio.model_to_json(ModelDocument(opfforest.train(toy_dataset))))
    assert not doc.is_calibrated
    with pytest.raises(opfModelError):
        doc.require_calibration()
    assert opfforest.classify(doc.forest, (0.5, 0.0)).label == 1


def test_corrupt_model_documents(tmp_path, calibrated_doc):
    text = opfio.model_to_json(calibrated_doc).rstrip('\n')
    bad_docs = [text[:-1] + 'x',
                text[:len(text) // 2],
                text.replace('"format_version":1', '"format_version":2'),
                text.replace('"metric":"euclidean"', '"metric":"cosine"'),
                text.replace('"cost":[', '"cost":[0.5,'),
                '[1, 2, 3]',
                '']
    for bad in bad_docs:
        with pytest.raises(opfModelError):
            opfio.model_from_json(bad)

    path = tmp_path / 'binary.json'
    path.write_bytes(b'\xff\xfe\x00garbage')
    with pytest.raises(opfModelError):
        opfio.load_model(str(path))


@pytest.mark.parametrize("section, key, value", [
    ('calibration', 'evaluations', 'many'),
    ('calibration', 'evaluations', 2.5),
    ('calibration', 'diagnostics', 5),
    ('calibration', 'diagnostics', [1, 2]),
    ('calibration', 'optimizer_used', 7),
    ('calibration', 'theta', '0.5'),
    ('forest', 'labels', [1.7, 1, -1, -1]),
    ('forest', 'assigned_label', [1, 1, -1, -1.5]),
    ('forest', 'predecessor', [-1, 0, 'x', 2]),
    ('forest', 'is_prototype', [1, 0, 1, 0]),
    ('forest', 'labels', 'abc'),
])
def test_model_field_types(calibrated_doc, section, key, value):
    body = json.loads(opfio.model_to_json(calibrated_doc))
    body[section][key] = value
    with pytest.raises(opfModelError):
        opfio.model_from_json(json.dumps(body))


def test_model_integral_float_labels_accepted(calibrated_doc):
    body = json.loads(opfio.model_to_json(calibrated_doc))
    body['forest']['labels'] = [float(v) for v in body['forest']['labels']]
    doc = opfio.model_from_json(json.dumps(body))
    assert doc.forest.training.labels.tolist() == [1, 1, -1, -1]
