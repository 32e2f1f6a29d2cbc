# -*- coding: utf-8 -*-
import io

import numpy as np
import pytest

from opfbase import opfInputError, opfOptimError
import opfcalib
import opfforest
from opfoptim import (Algorithm, NMParams, OptimizerConfig, PSOParams, SearchBox,
                      grid_evaluate, minimize, write_grid_csv)

ALL = list(Algorithm)
SWARMS = [Algorithm.PSO, Algorithm.BA, Algorithm.FFA]


def sphere(a, b):
    return (a - 1.0) ** 2 + (b + 2.0) ** 2


def test_nelder_mead_sphere():
    res = minimize(sphere, OptimizerConfig(Algorithm.NM))
    assert res.value < 1e-6
    assert np.hypot(res.point[0] - 1.0, res.point[1] + 2.0) < 1e-3
    assert res.converged and res.algorithm == 'NM'


@pytest.mark.parametrize("alg", SWARMS)
def test_swarms_sphere(alg):
    res = minimize(sphere, OptimizerConfig(alg, seed=17))
    assert res.value < 1e-2
    assert res.iterations == 400
    assert res.evaluations == 20 * 401


def test_constant_objective():
    for alg in ALL:
        res = minimize(lambda a, b: 7.0, OptimizerConfig(alg, agents=5, iterations=10))
        assert res.value == 7.0
        assert SearchBox().contains(res.point)


@pytest.mark.parametrize("alg", ALL)
def test_points_stay_in_box(alg):
    box = SearchBox(-1.0, 2.0, 0.5, 3.0)
    seen = []
    # minimum outside the box pulls every method against the walls
    minimize(lambda a, b: (a - 5.0) ** 2 + (b + 4.0) ** 2, OptimizerConfig(alg, agents=8, iterations=50, box=box),
             on_evaluate=lambda pt, val: seen.append(pt))
    assert seen
    assert all(box.contains(pt) for pt in seen)


@pytest.mark.parametrize("alg", ALL)
def test_seed_determinism(alg):
    cfg = OptimizerConfig(alg, agents=10, iterations=60, seed=2**63 + 5)
    first = minimize(sphere, cfg, trace=True)
    second = minimize(sphere, cfg, trace=True)
    assert first == second


@pytest.mark.parametrize("alg", ALL)
def test_trace_is_non_increasing(alg):
    res = minimize(sphere, OptimizerConfig(alg, agents=10, iterations=60, seed=1), trace=True)
    assert res.trace
    assert all(a >= b for a, b in zip(res.trace, res.trace[1:]))
    assert res.trace[-1] == res.value


def test_non_finite_objective_aborts():
    with pytest.raises(opfOptimError):
        minimize(lambda a, b: float('nan'), OptimizerConfig(Algorithm.PSO, agents=3, iterations=2))


def test_config_validation():
    with pytest.raises(opfInputError):
        OptimizerConfig('cmaes')
    with pytest.raises(opfInputError):
        OptimizerConfig(Algorithm.NM, params=PSOParams())
    with pytest.raises(opfInputError):
        OptimizerConfig(Algorithm.NM, params=NMParams(p=0.0))
    with pytest.raises(opfInputError):
        OptimizerConfig(Algorithm.PSO, agents=0)
    with pytest.raises(opfInputError):
        SearchBox(1.0, -1.0, 0.0, 1.0)


def test_config_defaults_from_yaml():
    cfg = OptimizerConfig.from_config('ba', seed=4)
    assert (cfg.agents, cfg.iterations, cfg.seed) == (20, 400, 4)
    assert (cfg.params.q_min, cfg.params.q_max, cfg.params.alpha, cfg.params.gamma) == (0.0, 1.0, 1.0, 1.0)
    assert cfg.box == SearchBox()
    nm = OptimizerConfig.from_config('nm')
    assert (nm.params.p, nm.params.max_it) == (0.001, 1000)
    ffa = OptimizerConfig.from_config('ffa')
    assert (ffa.params.gamma, ffa.params.beta, ffa.params.alpha) == (1.0, 0.9, 0.7)


def test_grid_corners():
    grid = grid_evaluate(lambda a, b: 10 * a + b, SearchBox(), 2)
    assert grid.tolist() == [[-110.0, -90.0], [90.0, 110.0]]


def test_grid_separable():
    grid = grid_evaluate(lambda a, b: a, SearchBox(), 3)
    assert grid.tolist() == [[-10.0] * 3, [0.0] * 3, [10.0] * 3]


def test_grid_steps_too_small():
    with pytest.raises(opfInputError):
        grid_evaluate(sphere, SearchBox(), 1)


def test_write_grid_csv():
    box = SearchBox()
    out = io.StringIO()
    write_grid_csv(out, box, grid_evaluate(lambda a, b: a * b, box, 2))
    assert out.getvalue().splitlines() == ['A,B,F', '-10.0,-10.0,100.0', '-10.0,10.0,-100.0',
                                           '10.0,-10.0,-100.0', '10.0,10.0,100.0']


def test_nelder_mead_matches_coarse_grid(blobs):
    forest = opfforest.train(blobs)
    scored = opfcalib.score_samples(forest, blobs)
    objective = lambda a, b: opfcalib.objective(a, b, scored)
    res = minimize(objective, OptimizerConfig(Algorithm.NM))
    assert res.value <= grid_evaluate(objective, SearchBox(), 21).min() + 1e-6
