# -*- coding: utf-8 -*-
"""
Shared pytest fixtures for the popfpy test suite.
"""
import os
import sys
import tempfile

# The modules are flat files at the repository root; the log file of the test
# session goes to the temp directory
ROOT = os.path.dirname(os.path.abspath(__file__))
sys.path.insert(0, ROOT)
os.environ.setdefault('POPF_LOGFILE', os.path.join(tempfile.gettempdir(), 'popf-tests.log'))

import numpy as np
import pytest

from opfcore import Dataset, to_binary
from opfio import SyntheticSpec, generate_synthetic

TOY_CSV = "0,0,1\n0,1,1\n2,0,-1\n2,1,-1\n"


@pytest.fixture
def toy_dataset():
    """ (0,0)+, (0,1)+, (2,0)-, (2,1)- """
    feats = np.array([[0.0, 0.0], [0.0, 1.0], [2.0, 0.0], [2.0, 1.0]])
    return to_binary(Dataset(feats, np.array([1, 1, -1, -1]), name='toy'), 1)


@pytest.fixture
def random_dataset():
    """
    Factory of small random binary datasets (distinct distances almost surely).
    """
    def make(n, d=2, seed=0, labels=(1, -1)):
        rng = np.random.default_rng(seed)
        feats = rng.random((n, d))
        tags = np.array([labels[i % 2] for i in range(n)])
        rng.shuffle(tags)
        return to_binary(Dataset(feats, tags, name='random%d' % seed), labels[0])
    return make


@pytest.fixture
def blobs():
    return generate_synthetic(SyntheticSpec(200, 2, 1.0, 7), 'blobs')


@pytest.fixture
def write_file(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding='utf-8')
        return str(path)
    return write


@pytest.fixture
def toy_csv(write_file):
    return write_file('toy.csv', TOY_CSV)
