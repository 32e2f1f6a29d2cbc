# -*- coding: utf-8 -*-
import io

import numpy as np
import pytest
from scipy import stats

from opfbase import opfInputError, opfDegenerateError, opfOptimError, opfUsageError
from opfcore import Dataset, to_binary
import opfcalib
import opfeval
from opfeval import MethodConfig, SplitSpec, RunRecord
from opfevents import opfEventsClass
from opfoptim import Algorithm, OptimizerConfig


def _balanced(n_per_class=50, seed=0):
    rng = np.random.default_rng(seed)
    labels = np.array([1] * n_per_class + [2] * n_per_class)
    return to_binary(Dataset(rng.random((2 * n_per_class, 3)), labels, name='fifty'), 1)


def _rows(ds):
    return sorted(zip(map(tuple, ds.features.tolist()), ds.labels.tolist()))


###
### Splits
###

def test_stratified_split_sizes():
    ds = _balanced()
    train, test = opfeval.split(ds, SplitSpec(0.25, 20, True, 3), 0)
    assert (len(train), len(test)) == (25, 75)
    assert sorted(train.class_counts().values()) == [12, 13]


def test_split_is_deterministic_partition():
    ds = _balanced()
    spec = SplitSpec(seed=9)
    first = opfeval.split(ds, spec, 4)
    second = opfeval.split(ds, spec, 4)
    assert first[0] == second[0] and first[1] == second[1]
    assert _rows(ds) == sorted(_rows(first[0]) + _rows(first[1]))
    assert opfeval.split(ds, spec, 5)[0] != first[0]


def test_unstratified_split():
    ds = _balanced()
    train, test = opfeval.split(ds, SplitSpec(0.25, 1, False, 0), 0)
    assert (len(train), len(test)) == (25, 75)


def test_stratified_split_keeps_small_classes():
    labels = np.array([1] * 58 + [2] * 4)
    ds = Dataset(np.random.default_rng(0).random((62, 2)), labels)
    train, test = opfeval.split(ds, SplitSpec(0.25, 1, True, 0), 0)
    assert set(train.classes) == {1, 2} and set(test.classes) == {1, 2}


def test_split_errors():
    ds = Dataset(np.random.default_rng(0).random((5, 2)), np.array([1, 1, 1, 1, 2]))
    with pytest.raises(opfDegenerateError):
        opfeval.split(ds, SplitSpec(runs=1), 0)
    with pytest.raises(opfInputError):
        opfeval.split(_balanced(), SplitSpec(runs=2), 2)
    with pytest.raises(opfInputError):
        SplitSpec(train_fraction=1.0)


###
### Wilcoxon
###

X10 = [125.0, 115.0, 130.0, 140.0, 140.0, 115.0, 140.0, 125.0, 140.0, 135.0]
Y10 = [110.0, 122.0, 125.0, 120.0, 140.0, 124.0, 123.0, 137.0, 135.0, 145.0]


def test_wilcoxon_identical_is_no_decision():
    res = opfeval.wilcoxon_signed_rank([0.9] * 8, [0.9] * 8)
    assert (res.statistic, res.p_value, res.reject, res.flag) == (0.0, 1.0, False, 'no-decision')


def _scipy_approx(x, y):
    try:
        return stats.wilcoxon(x, y, zero_method='wilcox', correction=True, method='approx')
    except ValueError:
        # newer scipy names the normal approximation 'asymptotic'
        return stats.wilcoxon(x, y, zero_method='wilcox', correction=True, method='asymptotic')


def test_wilcoxon_textbook_pairs_match_scipy():
    res = opfeval.wilcoxon_signed_rank(X10, Y10, mode='approx')
    ref = _scipy_approx(X10, Y10)
    assert res.statistic == pytest.approx(ref.statistic)
    assert res.p_value == pytest.approx(ref.pvalue, abs=1e-6)
    assert res.n == 9


def test_wilcoxon_random_pairs_match_scipy():
    rng = np.random.default_rng(21)
    for _ in range(25):
        x = np.round(rng.normal(0.8, 0.05, size=20), 2)
        y = np.round(x + rng.normal(0.01, 0.03, size=20), 2)
        if np.count_nonzero(x - y) < 10:
            continue
        res = opfeval.wilcoxon_signed_rank(x, y, mode='approx')
        ref = _scipy_approx(x, y)
        assert res.p_value == pytest.approx(ref.pvalue, abs=1e-6)


def test_wilcoxon_exact_matches_scipy():
    x = [1.83, 0.50, 1.62, 2.48, 1.68, 1.88, 1.55, 3.06]
    y = [0.878, 0.647, 0.598, 2.05, 1.06, 1.29, 1.06, 3.14]
    res = opfeval.wilcoxon_signed_rank(x, y)
    ref = stats.wilcoxon(x, y, method='exact')
    assert res.statistic == ref.statistic
    assert res.p_value == pytest.approx(ref.pvalue, abs=1e-6)


def test_wilcoxon_is_antisymmetric():
    a = opfeval.wilcoxon_signed_rank(X10, Y10)
    b = opfeval.wilcoxon_signed_rank(Y10, X10)
    assert (a.p_value, a.reject, a.statistic) == (b.p_value, b.reject, b.statistic)


def test_wilcoxon_one_sided_shift_rejects():
    y = np.linspace(0.5, 0.7, 20)
    statistic, p_value, reject = opfeval.wilcoxon_signed_rank(y + 10.0, y)
    assert statistic == 0.0 and reject and p_value < 1e-3


def test_wilcoxon_errors():
    with pytest.raises(opfInputError):
        opfeval.wilcoxon_signed_rank([1, 2, 3], [1, 2])
    with pytest.raises(opfInputError):
        opfeval.wilcoxon_signed_rank([1, 2, 3, 4], [0, 0, 0, 0])
    with pytest.raises(opfInputError):
        opfeval.wilcoxon_signed_rank([1, 2, 2, 3, 5], [0, 1, 1, 1, 1], mode='exact')


###
### Benchmark
###

def test_parse_methods():
    methods = opfeval.parse_methods('opf, popf-nm,popf-ffa', seed=3)
    assert [m.name for m in methods] == ['OPF', 'P-OPF-NM', 'P-OPF-FFA']
    assert methods[2].optimizer.algorithm is Algorithm.FFA and methods[2].optimizer.seed == 3
    with pytest.raises(opfUsageError):
        opfeval.parse_methods('opf,svm')
    with pytest.raises(opfUsageError):
        opfeval.parse_methods('popf-cmaes')


def test_identical_methods_are_both_best(blobs):
    methods = [MethodConfig('OPF-a'), MethodConfig('OPF-b')]
    report = opfeval.run_benchmark(blobs, methods, SplitSpec(0.25, 6, True, 1), timed=False)
    assert all(s.best for s in report.summaries)
    other = report.summary('OPF-b') if report.top_method == 'OPF-a' else report.summary('OPF-a')
    assert other.wilcoxon.flag == 'no-decision' and not other.wilcoxon.reject
    assert report.accuracies('OPF-a') == report.accuracies('OPF-b')


def test_report_recomputes_from_records(blobs):
    methods = [MethodConfig('OPF'),
               MethodConfig('P-OPF-NM', 'popf', OptimizerConfig(Algorithm.NM))]
    report = opfeval.run_benchmark(blobs, methods, SplitSpec(0.25, 5, True, 2))
    assert len(report.records) == 10
    for s in report.summaries:
        acc = [r.accuracy for r in report.records if r.method == s.method]
        assert len(acc) == 5
        assert s.mean_accuracy == pytest.approx(np.mean(acc))
        assert s.std_accuracy == pytest.approx(np.std(acc))
        assert all(0.0 <= a <= 1.0 for a in acc)
    assert all(r.train_time_s >= 0 and r.test_time_s >= 0 for r in report.records)
    assert report.summary('OPF').mean_calibration_time == 0.0

    # both methods saw the same split in every run
    for run in range(5):
        hashes = {r.split_hash for r in report.records if r.run_index == run}
        assert len(hashes) == 1


def test_single_run_skips_wilcoxon(blobs):
    report = opfeval.run_benchmark(blobs, [MethodConfig('OPF'), MethodConfig('OPF-2')], SplitSpec(runs=1), timed=False)
    assert any('skipped' in note for note in report.notices)
    assert all(s.wilcoxon is None for s in report.summaries)
    assert 'Wilcoxon test skipped' in report.summary_table()


def test_concurrent_runs_match_sequential(blobs):
    methods = [MethodConfig('OPF'), MethodConfig('P-OPF-PSO', 'popf', OptimizerConfig(Algorithm.PSO, 10, 20))]
    spec = SplitSpec(0.25, 4, True, 11)
    sequential = opfeval.run_benchmark(blobs, methods, spec, timed=False)
    concurrent = opfeval.run_benchmark(blobs, methods, spec, workers=3, timed=False)
    assert concurrent.records == sequential.records
    out_a, out_b = io.StringIO(), io.StringIO()
    sequential.write_runs_csv(out_a)
    concurrent.write_runs_csv(out_b)
    assert out_a.getvalue() == out_b.getvalue()
    assert out_a.getvalue().splitlines()[0] == ','.join(opfeval.RUN_FIELDS)


def test_failed_run_aborts(blobs, monkeypatch):
    def broken_fit(*args, **kwargs):
        raise opfOptimError("objective is not finite")
    monkeypatch.setattr(opfcalib, 'fit', broken_fit)
    methods = [MethodConfig('OPF'), MethodConfig('P-OPF-NM', 'popf', OptimizerConfig(Algorithm.NM))]
    with pytest.raises(opfOptimError):
        opfeval.run_benchmark(blobs, methods, SplitSpec(runs=3), timed=False)


def test_build_report_marks_best():
    records = []
    for run in range(10):
        records.append(RunRecord(run, 'good', 0.9 + 0.001 * run, 0.0, 0.0))
        records.append(RunRecord(run, 'bad', 0.6 + 0.002 * run, 0.0, 0.0))
    report = opfeval.build_report('demo', ['good', 'bad'], records, 10)
    assert report.top_method == 'good'
    assert report.summary('good').best and not report.summary('bad').best
    assert report.summary('bad').wilcoxon.reject
    table = report.summary_table()
    assert '*90.45' in table and '*60' not in table


def test_build_report_requires_all_runs():
    with pytest.raises(opfInputError):
        opfeval.build_report('demo', ['a'], [RunRecord(0, 'a', 0.5, 0.0, 0.0)], 2)


def test_events_reused_across_benchmarks(blobs, monkeypatch):
    def broken_fit(*args, **kwargs):
        raise opfOptimError("objective is not finite")
    methods = [MethodConfig('OPF'), MethodConfig('P-OPF-NM', 'popf', OptimizerConfig(Algorithm.NM))]
    events = opfEventsClass([m.name for m in methods])

    with monkeypatch.context() as patch:
        patch.setattr(opfcalib, 'fit', broken_fit)
        with pytest.raises(opfOptimError):
            opfeval.run_benchmark(blobs, methods, SplitSpec(runs=2), timed=False, events=events)
    assert events.eventAbort.is_set() and events.eventErrcountList['P-OPF-NM'] == 1

    report = opfeval.run_benchmark(blobs, methods, SplitSpec(runs=2), timed=False, events=events)
    assert len(report.records) == 4
    assert not events.eventAbort.is_set()
    assert events.jobRuncount == 2 and events.eventRuncountList == {'OPF': 2, 'P-OPF-NM': 2}
    assert events.eventErrcountList['P-OPF-NM'] == 0

    with pytest.raises(opfInputError):
        opfeval.run_benchmark(blobs, [MethodConfig('OPF-x')], SplitSpec(runs=1), events=events)
