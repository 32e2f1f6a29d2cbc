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

Implements the experimental protocol: repeated random holdout splits
(25% train / 75% test by default, 20 runs), per-method wall-clock timing,
the Wilcoxon signed-rank comparison against the most accurate method and the
report in the mean +- std table layout.

Every method of a benchmark sees the same train/test split in a given run.
"""

import csv
import hashlib
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy import stats

from opflogger import opfLogger
from opfbase import opfInputError, opfDegenerateError, opfUsageError
from opfcore import DistanceMetric, check_seed, derive_seed, make_rng
from opfevents import opfEventsClass
import opfforest
import opfcalib
from opfoptim import Algorithm, OptimizerConfig

__all__ = ('SplitSpec', 'RunRecord', 'MethodConfig', 'WilcoxonResult', 'MethodSummary', 'BenchmarkReport',
            'parse_methods', 'split', 'split_hash', 'wilcoxon_signed_rank', 'run_benchmark', 'build_report')

# Smallest number of non-zero paired differences the Wilcoxon test accepts
MIN_PAIRS = 5
# Below this many pairs (and without ties) the exact null distribution is used
EXACT_BELOW = 10

RUN_FIELDS = ('run', 'method', 'accuracy', 'train_time_s', 'test_time_s', 'calibration_time_s', 'split_hash')


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.25
    runs: int = 20
    stratified: bool = True
    seed: int = 0

    def __post_init__(self):
        if not 0.0 < self.train_fraction < 1.0:
            raise opfInputError("Eval::: SplitSpec(): train_fraction %s outside (0, 1)" % self.train_fraction)
        if int(self.runs) < 1:
            raise opfInputError("Eval::: SplitSpec(): runs must be positive, got %s" % self.runs)
        object.__setattr__(self, 'seed', check_seed(self.seed))

    @classmethod
    def from_config(cls, seed=0, cfg=None):
        if cfg is None:
            from opfconfig import evalConfig as cfg
        return cls(float(cfg['train_fraction']), int(cfg['runs']), bool(cfg['stratified']), seed)


@dataclass(frozen=True)
class RunRecord:
    run_index: int
    method: str
    accuracy: float
    train_time_s: float
    test_time_s: float
    calibration_time_s: float = 0.0
    split_hash: str = ''

    def as_row(self):
        return (self.run_index, self.method, repr(self.accuracy), repr(self.train_time_s),
                repr(self.test_time_s), repr(self.calibration_time_s), self.split_hash)


@dataclass(frozen=True)
class MethodConfig:
    """
    One compared method: naive OPF, or P-OPF calibrated with an optimizer.
    """
    name: str
    kind: str = 'opf'
    optimizer: Optional[OptimizerConfig] = None
    metric: DistanceMetric = DistanceMetric.EUCLIDEAN
    score_mode: str = 'training'
    theta: float = opfcalib.DEFAULT_THETA

    def __post_init__(self):
        if self.kind not in ('opf', 'popf'):
            raise opfInputError("Eval::: MethodConfig(): unknown kind '%s'" % self.kind)
        if self.kind == 'popf' and self.optimizer is None:
            raise opfInputError("Eval::: MethodConfig(%s): P-OPF needs an optimizer" % self.name)


def parse_methods(text, seed=0, metric=DistanceMetric.EUCLIDEAN, score_mode='training', theta=0.5, cfg=None):
    """
    'opf,popf-nm,popf-pso' -> list of MethodConfig.
    """
    methods = []
    names = [t.strip().lower() for t in (text.split(',') if isinstance(text, str) else text) if t.strip()]
    if not names:
        raise opfUsageError("Eval::: parse_methods(): no method given")
    for tok in names:
        if tok == 'opf':
            methods.append(MethodConfig('OPF', 'opf', None, metric))
        elif tok.startswith('popf-'):
            try:
                alg = Algorithm.parse(tok[5:])
            except opfInputError:
                raise opfUsageError("Eval::: parse_methods(): unknown method '%s'" % tok)
            methods.append(MethodConfig('P-OPF-%s' % alg.tag, 'popf', OptimizerConfig.from_config(alg, seed, cfg),
                                        metric, score_mode, theta))
        else:
            raise opfUsageError("Eval::: parse_methods(): unknown method '%s' (use opf or popf-{nm,pso,ba,ffa})" % tok)
    return methods


###
### Splits
###

def _round_half_up(x):
    return int(math.floor(x + 0.5))

def _stratified_counts(counts, fraction):
    """
    Per-class train sizes summing to round(fraction * N), each within one
    sample of fraction * n_c and leaving at least one sample on each side.
    """
    counts = np.asarray(counts)
    total = min(max(_round_half_up(fraction * counts.sum()), counts.size), counts.sum() - counts.size)
    exact = fraction * counts
    base = np.clip(np.floor(exact).astype(np.int64), 1, counts - 1)
    while base.sum() < total:
        room = np.where(base < counts - 1, exact - base, -np.inf)
        base[int(np.argmax(room))] += 1
    while base.sum() > total:
        room = np.where(base > 1, exact - base, np.inf)
        base[int(np.argmin(room))] -= 1
    return base


def _split_indices(dataset, spec, run_index):
    if not 0 <= run_index < spec.runs:
        raise opfInputError("Eval::: split(): run index %d outside [0, %d)" % (run_index, spec.runs))
    rng = make_rng(spec.seed, run_index)
    n = len(dataset)

    if spec.stratified:
        classes = dataset.classes
        members = [np.flatnonzero(dataset.labels == c) for c in classes]
        small = [c for c, idx in zip(classes, members) if idx.size < 2]
        if small:
            raise opfDegenerateError("Eval::: split(): classes %s have fewer than 2 samples" % small)
        sizes = _stratified_counts([idx.size for idx in members], spec.train_fraction)
        train_idx = np.concatenate([rng.permutation(idx)[:k] for idx, k in zip(members, sizes)])
    else:
        if n < 2:
            raise opfDegenerateError("Eval::: split(): need at least 2 samples")
        n_train = min(max(_round_half_up(spec.train_fraction * n), 1), n - 1)
        train_idx = rng.permutation(n)[:n_train]

    train_idx = np.sort(train_idx)
    test_mask = np.ones(n, dtype=bool)
    test_mask[train_idx] = False
    return train_idx, np.flatnonzero(test_mask)


def split(dataset, spec, run_index):
    """
    The (train, test) partition of run `run_index`; a pure function of
    (spec.seed, run_index).
    """
    train_idx, test_idx = _split_indices(dataset, spec, run_index)
    return (dataset.subset(train_idx, "%s[train %d]" % (dataset.name, run_index)),
            dataset.subset(test_idx, "%s[test %d]" % (dataset.name, run_index)))


def split_hash(train, test):
    """
    SHA-256 over the bytes of both sets, used to check split fairness.
    """
    digest = hashlib.sha256()
    for part in (train, test):
        digest.update(part.features.tobytes())
        digest.update(part.labels.tobytes())
    return digest.hexdigest()


###
### Wilcoxon signed-rank test
###

@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float
    p_value: float
    reject: bool
    n: int = 0
    flag: str = ''

    def __iter__(self):
        return iter((self.statistic, self.p_value, self.reject))


def _exact_pvalue(n, w):
    """
    Two-sided p-value of W <= w under the exact null distribution of W+.
    """
    max_sum = n * (n + 1) // 2
    counts = np.zeros(max_sum + 1)
    counts[0] = 1.0
    for rank in range(1, n + 1):
        counts[rank:] = counts[rank:] + counts[:-rank].copy()
    cdf = counts[:int(math.floor(w)) + 1].sum() / 2.0 ** n
    return min(1.0, 2.0 * cdf)


def wilcoxon_signed_rank(x, y, alpha=0.05, mode='auto'):
    """
    Two-sided Wilcoxon signed-rank test on the pairs (x_i, y_i).

    Zero differences are dropped and tied |differences| share average ranks.
    mode 'approx' uses the normal approximation with tie-corrected variance
    and continuity correction; 'exact' the exact null distribution (no ties);
    'auto' picks exact below 10 pairs when there are no ties.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise opfInputError("Eval::: wilcoxon_signed_rank(): need two lists of equal length (%s, %s)" % (x.shape, y.shape))
    if mode not in ('auto', 'approx', 'exact'):
        raise opfInputError("Eval::: wilcoxon_signed_rank(): unknown mode '%s'" % mode)

    diff = x - y
    diff = diff[diff != 0]
    n = diff.size
    if n == 0:
        return WilcoxonResult(0.0, 1.0, False, 0, 'no-decision')
    if n < MIN_PAIRS:
        raise opfInputError("Eval::: wilcoxon_signed_rank(): %d non-zero differences, at least %d needed" % (n, MIN_PAIRS))

    absd = np.abs(diff)
    ranks = stats.rankdata(absd)
    w_plus = float(np.sum(ranks[diff > 0]))
    w_minus = float(np.sum(ranks[diff < 0]))
    w_stat = min(w_plus, w_minus)
    _, tie_sizes = np.unique(absd, return_counts=True)
    has_ties = bool(np.any(tie_sizes > 1))

    if mode == 'exact' or (mode == 'auto' and n < EXACT_BELOW and not has_ties):
        if has_ties:
            raise opfInputError("Eval::: wilcoxon_signed_rank(): exact mode needs untied differences")
        p_value = _exact_pvalue(n, w_stat)
    else:
        mean = n * (n + 1) / 4.0
        var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_sizes ** 3 - tie_sizes) / 48.0
        corr = 0.5 * np.sign(w_stat - mean)
        z = (w_stat - mean - corr) / math.sqrt(var)
        p_value = float(min(1.0, 2.0 * stats.norm.sf(abs(z))))

    return WilcoxonResult(w_stat, p_value, bool(p_value < alpha), n)


###
### Benchmark
###

@dataclass(frozen=True)
class MethodSummary:
    method: str
    mean_accuracy: float
    std_accuracy: float
    mean_train_time: float
    std_train_time: float
    mean_test_time: float
    std_test_time: float
    mean_calibration_time: float
    std_calibration_time: float
    wilcoxon: Optional[WilcoxonResult] = None
    best: bool = False


@dataclass(frozen=True)
class BenchmarkReport:
    dataset: str
    records: Tuple[RunRecord, ...]
    summaries: Tuple[MethodSummary, ...]
    runs: int
    alpha: float = 0.05
    top_method: str = ''
    notices: Tuple[str, ...] = ()

    def summary(self, method):
        for s in self.summaries:
            if s.method == method:
                return s
        raise KeyError(method)

    def accuracies(self, method):
        return [r.accuracy for r in self.records if r.method == method]

    def summary_table(self):
        """
        Accuracy and time table (mean +- std); '*' marks the methods not
        significantly worse than the most accurate one.
        """
        lines = ["Dataset: %s (runs=%d, Wilcoxon alpha=%.2f)" % (self.dataset, self.runs, self.alpha),
                 "%-11s %16s %16s %16s %16s" % ('Method', 'Accuracy(%)', 'Train(s)', 'Test(s)', 'Calib(s)')]
        for s in self.summaries:
            lines.append("%-11s %16s %16s %16s %16s" % (
                s.method,
                ('*' if s.best else '') + "%.2f±%.2f" % (100.0 * s.mean_accuracy, 100.0 * s.std_accuracy),
                "%.2f±%.2f" % (s.mean_train_time, s.std_train_time),
                "%.2f±%.2f" % (s.mean_test_time, s.std_test_time),
                "%.2f±%.2f" % (s.mean_calibration_time, s.std_calibration_time)))
        for note in self.notices:
            lines.append("# %s" % note)
        return '\n'.join(lines) + '\n'

    def write_runs_csv(self, stream):
        writer = csv.writer(stream, lineterminator='\n')
        writer.writerow(RUN_FIELDS)
        for rec in self.records:
            writer.writerow(rec.as_row())

    def write_summary(self, stream):
        stream.write(self.summary_table())


def _run_method(method, train, test, run_index, seed, digest, timed):
    clock = time.perf_counter if timed else (lambda: 0.0)

    t_start = clock()
    forest = opfforest.train(train, method.metric)
    t_forest = clock()
    model = None
    if method.kind == 'popf':
        optimizer = method.optimizer.with_seed(derive_seed(seed, run_index))
        model = opfcalib.fit(forest, train, optimizer, score_mode=method.score_mode).with_theta(method.theta)
    t_train = clock()

    if model is None:
        predicted = np.array([p.label for p in opfforest.classify_all(forest, test)])
    else:
        binary = opfcalib.predict_labels(forest, model, test)
        predicted = np.where(binary > 0, train.label_map.positive_label, train.label_map.negative_label)
    t_test = clock()

    accuracy = opfforest.balanced_accuracy(test.labels, predicted)
    calib_time = 0.0 if model is None else t_train - t_forest
    return RunRecord(run_index, method.name, accuracy, t_train - t_start, t_test - t_train, calib_time, digest)


def build_report(dataset_name, method_names, records, runs, alpha=0.05):
    """
    Summaries per method and the Wilcoxon verdicts against the top mean.
    """
    notices = []
    per_method = {}
    for name in method_names:
        recs = [r for r in records if r.method == name]
        if len(recs) != runs:
            raise opfInputError("Eval::: build_report(): %s has %d records, expected %d" % (name, len(recs), runs))
        per_method[name] = sorted(recs, key=lambda r: r.run_index)

    means = {name: float(np.mean([r.accuracy for r in recs])) for name, recs in per_method.items()}
    top = max(method_names, key=lambda name: means[name])
    top_acc = [r.accuracy for r in per_method[top]]
    if runs < MIN_PAIRS:
        notices.append("Wilcoxon test skipped: %d runs (at least %d needed)" % (runs, MIN_PAIRS))

    summaries = []
    for name in method_names:
        recs = per_method[name]
        acc = np.array([r.accuracy for r in recs])
        trn = np.array([r.train_time_s for r in recs])
        tst = np.array([r.test_time_s for r in recs])
        cal = np.array([r.calibration_time_s for r in recs])

        verdict = None
        if name == top:
            best = True
        elif runs < MIN_PAIRS:
            best = means[name] == means[top]
        else:
            try:
                verdict = wilcoxon_signed_rank(acc, top_acc, alpha)
            except opfInputError:
                verdict = WilcoxonResult(float('nan'), 1.0, False, int(np.count_nonzero(acc - np.asarray(top_acc))), 'too-few')
                notices.append("%s vs %s: too few non-zero differences, no decision" % (name, top))
            if verdict.flag == 'no-decision':
                notices.append("%s vs %s: identical accuracies, no decision" % (name, top))
            best = not verdict.reject

        summaries.append(MethodSummary(name, float(acc.mean()), float(acc.std()),
                                       float(trn.mean()), float(trn.std()), float(tst.mean()), float(tst.std()),
                                       float(cal.mean()), float(cal.std()), verdict, best))

    return BenchmarkReport(dataset_name, tuple(records), tuple(summaries), runs, alpha, top, tuple(notices))


def _soft_check_timing(report):
    """
    NM calibration is expected to be cheaper than the swarm methods.
    """
    names = [s.method for s in report.summaries]
    if 'P-OPF-NM' not in names:
        return
    nm_time = report.summary('P-OPF-NM').mean_calibration_time
    for s in report.summaries:
        if s.method in ('P-OPF-PSO', 'P-OPF-BA', 'P-OPF-FFA') and not nm_time < s.mean_calibration_time:
            opfLogger.warning("Eval::: %s: P-OPF-NM calibration (%.4fs) not faster than %s (%.4fs)" %
                              (report.dataset, nm_time, s.method, s.mean_calibration_time))


def run_benchmark(dataset, methods, spec, alpha=0.05, workers=1, timed=True, events=None):
    """
    Run every method on the same split of each run and assemble the report.

    With timed=False the runs may execute concurrently (workers > 1) and all
    times are recorded as 0; the records are identical to a sequential run.
    A failed run aborts the benchmark.
    """
    methods = list(methods)
    names = [m.name for m in methods]
    if not methods or len(set(names)) != len(names):
        raise opfInputError("Eval::: run_benchmark(): need distinct method names, got %s" % names)
    if any(m.kind == 'popf' for m in methods):
        dataset.require_binary('run_benchmark')

    if events is None:
        events = opfEventsClass(names)
    else:
        missing = [n for n in names if n not in events.method_ids]
        if missing:
            raise opfInputError("Eval::: run_benchmark(): events have no entries for %s" % missing)
        # a reused events object starts clean
        events.resetEventsLists()
        events.clearEvents()

    def do_run(run_index):
        if events.eventAbort.is_set():
            return []
        train, test = split(dataset, spec, run_index)
        digest = split_hash(train, test)
        opfLogger.info("Eval::: %s run %d: %d train / %d test, split %s" %
                       (dataset.name, run_index, len(train), len(test), digest[:16]))
        recs = []
        for method in methods:
            try:
                recs.append(_run_method(method, train, test, run_index, spec.seed, digest, timed))
            except Exception:
                events.runFailed(method.name)
                opfLogger.error("Eval::: %s run %d: %s failed, aborting benchmark" % (dataset.name, run_index, method.name))
                raise
            events.runDone(method.name)
        events.splitDone()
        return recs

    if workers > 1 and not timed:
        with ThreadPoolExecutor(max_workers=workers, thread_name_prefix='run') as pool:
            per_run = list(pool.map(do_run, range(spec.runs)))
    else:
        if workers > 1:
            opfLogger.info("Eval::: timed benchmark, runs executed sequentially")
        per_run = [do_run(r) for r in range(spec.runs)]

    records = [rec for recs in per_run for rec in recs]
    report = build_report(dataset.name, names, records, spec.runs, alpha)
    opfLogger.info("Eval::: %s" % events)
    if timed:
        _soft_check_timing(report)
    return report
