#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
Probabilistic Optimum-Path Forest toolkit - Main method
VER 1.0 for Python 3.9+

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

Subcommands: train, predict, benchmark, landscape, sweep, gen-synthetic.

stdout carries only CSV data; all diagnostics go to stderr (and the log file).
Exit codes: 0 success, 1 usage error, 2 data error, 3 runtime failure.
"""

import os
import sys
import argparse
import logging

import numpy as np

### The popfpy modules
from opflogger import opfLogger, set_console_level
from opfbase import ERRNONE, ERRRUN, opfError, opfUsageError, opfModelError
from opfcore import Dataset, DistanceMetric, to_binary
import opfforest
import opfcalib
import opfeval
import opfio
from opfoptim import Algorithm, OptimizerConfig, SearchBox, grid_evaluate, write_grid_csv


class opfArgumentParser(argparse.ArgumentParser):
    """
    Usage errors raise opfUsageError (exit code 1) instead of exiting.
    """
    def error(self, message):
        raise opfUsageError("%s: %s" % (self.prog, message))


###
### Helpers
###

def _load(args, path=None):
    return opfio.load_dataset(path or args.data, args.format, args.label_column, args.header)

def _binary(dataset, positive_label=None):
    """
    Two-class datasets get the +1/-1 mapping (positive label: the given one or
    the larger tag); others are returned unchanged.
    """
    if len(dataset.classes) != 2 and positive_label is None:
        return dataset
    pos = max(dataset.classes) if positive_label is None else positive_label
    return to_binary(dataset, pos)

def _with_model_labels(dataset, doc):
    return Dataset(dataset.features, dataset.labels, doc.label_map, dataset.name)

def _csv_out(rows, header, stream=None):
    stream = stream or sys.stdout
    stream.write(','.join(header) + '\n')
    for row in rows:
        stream.write(','.join(str(v) for v in row) + '\n')

def _box(args):
    return SearchBox.from_list(args.box)


###
### Subcommands
###

def cmd_train(args):
    train = _binary(_load(args), args.positive_label)
    forest = opfforest.train(train, args.metric)

    calibration = None
    if args.calibrate:
        optimizer = OptimizerConfig.from_config(args.optimizer, args.seed)
        calibration = opfcalib.fit(forest, train, optimizer, score_mode=args.score_mode,
                                   folds=args.cv_folds)

    opfio.save_model(opfio.ModelDocument(forest, calibration), args.out)

    rows = [('n', len(forest)), ('prototypes', forest.n_prototypes), ('metric', forest.metric.value)]
    if calibration is not None:
        rows += [('optimizer', calibration.optimizer_used), ('nll', repr(calibration.final_nll)),
                 ('A', repr(calibration.A)), ('B', repr(calibration.B))]
        for diag in calibration.diagnostics:
            opfLogger.warning("CLI::: train: %s" % diag)
    _csv_out(rows, ('key', 'value'))
    return ERRNONE


def cmd_predict(args):
    doc = opfio.load_model(args.model)
    data = _load(args)
    use_proba = args.proba or args.theta is not None
    if use_proba and not doc.is_calibrated:
        raise opfModelError("CLI::: predict: model %s is not calibrated, --proba/--theta need (A, B)" % args.model)

    if not use_proba:
        preds = opfforest.classify_all(doc.forest, data, fast=args.fast)
        _csv_out(((i, p.label) for i, p in enumerate(preds)), ('index', 'label'))
        return ERRNONE

    model = doc.calibration
    theta = model.theta if args.theta is None else args.theta
    model = model.with_theta(theta)
    probs, preds = opfcalib.predict_proba_all(doc.forest, model, data)
    rows = []
    for i, (prob, pred) in enumerate(zip(probs, preds)):
        label = doc.label_map.to_original(1 if prob >= model.theta else -1)
        rows.append((i, label, repr(float(prob)), repr(pred.cost)))
    _csv_out(rows, ('index', 'label', 'probability', 'cost'))
    return ERRNONE


def cmd_benchmark(args):
    dataset = _binary(_load(args), args.positive_label)
    spec = opfeval.SplitSpec(args.train_frac, args.runs, args.stratified, args.seed)
    methods = opfeval.parse_methods(args.methods, args.seed, DistanceMetric.parse(args.metric),
                                    args.score_mode, args.theta)
    report = opfeval.run_benchmark(dataset, methods, spec, args.alpha, args.workers, args.timed)

    os.makedirs(args.out_dir, exist_ok=True)
    runs_file = os.path.join(args.out_dir, "%s_runs.csv" % dataset.name)
    summary_file = os.path.join(args.out_dir, "%s_summary.txt" % dataset.name)
    with open(runs_file, 'w', encoding='utf-8', newline='') as stream:
        report.write_runs_csv(stream)
    with open(summary_file, 'w', encoding='utf-8') as stream:
        report.write_summary(stream)

    report.write_runs_csv(sys.stdout)
    sys.stderr.write(report.summary_table())
    opfLogger.info("CLI::: benchmark written to %s and %s" % (runs_file, summary_file))
    return ERRNONE


def cmd_landscape(args):
    dataset = _binary(_load(args), args.positive_label)
    spec = opfeval.SplitSpec(args.train_frac, 1, True, args.seed)
    train, _ = opfeval.split(dataset, spec, 0)
    forest = opfforest.train(train, args.metric)
    scored = opfcalib.score_samples(forest, train)

    box = _box(args)
    grid = grid_evaluate(lambda a, b: opfcalib.objective(a, b, scored), box, args.steps)
    if args.out:
        with open(args.out, 'w', encoding='utf-8', newline='') as stream:
            write_grid_csv(stream, box, grid)
    else:
        write_grid_csv(sys.stdout, box, grid)
    i, j = np.unravel_index(int(np.argmin(grid)), grid.shape)
    opfLogger.info("CLI::: landscape: minimum cell (%d, %d) F=%.8g" % (i, j, grid[i, j]))
    return ERRNONE


def cmd_sweep(args):
    doc = opfio.load_model(args.model)
    model = doc.calibration
    if model is None:
        raise opfModelError("CLI::: sweep: model %s is not calibrated" % args.model)
    test = _with_model_labels(_load(args), doc)
    grid = np.linspace(args.grid_start, args.grid_end, args.grid_steps)
    rows = opfcalib.threshold_sweep(doc.forest, model, test, grid)
    _csv_out(((repr(t), repr(acc)) for t, acc in rows), ('theta', 'accuracy'))
    return ERRNONE


def cmd_gen_synthetic(args):
    if args.preset:
        dataset = opfio.synthetic_preset(args.preset, args.seed)
    else:
        dataset = opfio.generate_synthetic(opfio.SyntheticSpec(args.n, args.d, args.separation, args.seed))
    opfio.write_csv_dataset(dataset, args.out)
    opfLogger.info("CLI::: gen-synthetic: %s written to %s" % (dataset, args.out))
    return ERRNONE


###
### Parser
###

def build_parser():
    """
    The argument parser; the option defaults come from opfconfig.yaml.
    """
    from opfconfig import optimConfig, evalConfig, synthConfig, default_seed

    parser = opfArgumentParser(prog='popf', description='Optimum-Path Forest and probabilistic OPF toolkit')
    parser.add_argument('--verbose', '-v', action='store_true', help='Debug messages on stderr')
    sub = parser.add_subparsers(dest='command', metavar='command')
    sub.required = True

    data_opts = opfArgumentParser(add_help=False)
    data_opts.add_argument('--data', required=True, help='Dataset file')
    data_opts.add_argument('--format', choices=opfio.DATA_FORMATS, default='libsvm', help='Dataset file format')
    data_opts.add_argument('--label-column', type=int, default=-1, help='CSV label column (negative counts from the end)')
    data_opts.add_argument('--header', action='store_true', help='CSV file has a header row')

    seed_opts = opfArgumentParser(add_help=False)
    seed_opts.add_argument('--seed', type=int, default=default_seed(), help='Random seed (default: POPF_SEED or 0)')

    metric_opts = opfArgumentParser(add_help=False)
    metric_opts.add_argument('--metric', choices=[m.value for m in DistanceMetric], default=evalConfig['metric'])
    metric_opts.add_argument('--positive-label', type=int, default=None, help='Class tag mapped to +1')

    p = sub.add_parser('train', parents=[data_opts, seed_opts, metric_opts], help='Train (and calibrate) a model')
    p.add_argument('--out', required=True, help='Model document to write')
    p.add_argument('--calibrate', action='store_true', help='Fit the P-OPF sigmoid')
    p.add_argument('--optimizer', choices=[a.value for a in Algorithm], default='nm')
    p.add_argument('--score-mode', choices=opfcalib.SCORE_MODES, default=evalConfig.get('score_mode', 'training'))
    p.set_defaults(func=cmd_train, cv_folds=int(evalConfig.get('cv_folds', 3)))

    p = sub.add_parser('predict', parents=[data_opts], help='Classify a dataset with a model')
    p.add_argument('--model', required=True)
    p.add_argument('--proba', action='store_true', help='Emit P(y=+1) and the OPF cost')
    p.add_argument('--theta', type=float, default=None, help='Decision threshold (default: the model value)')
    p.add_argument('--fast', action='store_true', help='Sorted-cost early-stop classification')
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser('benchmark', parents=[data_opts, seed_opts, metric_opts], help='Repeated holdout benchmark')
    p.add_argument('--methods', default=','.join(evalConfig['methods']), help='e.g. opf,popf-nm,popf-pso')
    p.add_argument('--runs', type=int, default=int(evalConfig['runs']))
    p.add_argument('--train-frac', type=float, default=float(evalConfig['train_fraction']))
    p.add_argument('--alpha', type=float, default=float(evalConfig['alpha']))
    p.add_argument('--out-dir', required=True)
    p.add_argument('--workers', type=int, default=1)
    p.add_argument('--timed', action=argparse.BooleanOptionalAction, default=False,
                   help='Measure wall-clock times (forces sequential runs; times are 0 otherwise)')
    p.add_argument('--stratified', action=argparse.BooleanOptionalAction, default=bool(evalConfig['stratified']))
    p.add_argument('--score-mode', choices=opfcalib.SCORE_MODES, default=evalConfig.get('score_mode', 'training'))
    p.set_defaults(func=cmd_benchmark, theta=float(evalConfig['theta']))

    p = sub.add_parser('landscape', parents=[data_opts, seed_opts, metric_opts], help='Objective grid CSV')
    p.add_argument('--steps', type=int, default=int(evalConfig.get('landscape_steps', 21)))
    p.add_argument('--train-frac', type=float, default=float(evalConfig['train_fraction']))
    p.add_argument('--out', default=None, help='CSV file (default: stdout)')
    p.set_defaults(func=cmd_landscape, box=optimConfig['box'])

    sweep = evalConfig.get('sweep', {})
    p = sub.add_parser('sweep', parents=[data_opts], help='Balanced accuracy per decision threshold')
    p.add_argument('--model', required=True)
    p.add_argument('--grid-start', type=float, default=float(sweep.get('start', 0.01)))
    p.add_argument('--grid-end', type=float, default=float(sweep.get('end', 0.99)))
    p.add_argument('--grid-steps', type=int, default=int(sweep.get('steps', 99)))
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser('gen-synthetic', parents=[seed_opts], help='Write a Gaussian-blob dataset as CSV')
    p.add_argument('--n', type=int, default=200)
    p.add_argument('--d', type=int, default=2)
    p.add_argument('--separation', type=float, default=1.0)
    p.add_argument('--preset', choices=sorted(synthConfig), default=None)
    p.add_argument('--out', required=True)
    p.set_defaults(func=cmd_gen_synthetic)

    return parser


### Main
def main(argv=None):
    """
    Parse the command line, run the subcommand and map errors to exit codes.
    """
    parser = None
    try:
        parser = build_parser()
        args = parser.parse_args(argv)
        if args.verbose:
            set_console_level(logging.DEBUG)
        opfLogger.debug("CLI::: %s" % args)
        return args.func(args)

    except opfUsageError as e:
        if parser is not None:
            sys.stderr.write(parser.format_usage())
        sys.stderr.write("%s\n" % e.errstr)
        return e.errval

    except opfError as e:
        opfLogger.error("CLI::: %s" % e.errstr)
        return e.errval

    except KeyboardInterrupt:
        opfLogger.error("CLI::: interrupted")
        return ERRRUN

    except Exception as e:
        opfLogger.exception("CLI::: unhandled exception: %s" % e)
        return ERRRUN


if __name__ == "__main__":
    sys.exit(main())
