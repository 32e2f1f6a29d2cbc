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

Implements the derivative-free minimizers over the 2-D (A, B) search box:
Nelder-Mead simplex (NM), Particle Swarm Optimization (PSO), Bat Algorithm (BA)
and Firefly Algorithm (FFA), plus the grid evaluator of the fitness landscape.

All candidate points are clamped to the box before they are evaluated. The
swarm methods draw every random number from one numpy Generator seeded with
the configured seed, so a (config, seed) pair always gives the same result.
"""

import csv
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Optional, Tuple

import numpy as np

from opflogger import opfLogger, TRACE_TAG
from opfbase import opfInputError, opfOptimError
from opfcore import check_seed, make_rng

__all__ = ('Algorithm', 'SearchBox', 'NMParams', 'PSOParams', 'BAParams', 'FFAParams',
            'OptimizerConfig', 'OptimResult', 'minimize', 'grid_axes', 'grid_evaluate', 'write_grid_csv')


class Algorithm(str, Enum):
    NM = 'nm'
    PSO = 'pso'
    BA = 'ba'
    FFA = 'ffa'

    @classmethod
    def parse(cls, name):
        if isinstance(name, cls):
            return name
        try:
            return cls(str(name).strip().lower())
        except ValueError:
            raise opfInputError("Optim::: Algorithm.parse(): unknown optimizer '%s' (use one of %s)" %
                                (name, [a.value for a in cls]))

    @property
    def tag(self):
        return self.value.upper()


@dataclass(frozen=True)
class SearchBox:
    """
    The rectangle [a_min, a_max] x [b_min, b_max] searched for (A, B).
    """
    a_min: float = -10.0
    a_max: float = 10.0
    b_min: float = -10.0
    b_max: float = 10.0

    def __post_init__(self):
        vals = (self.a_min, self.a_max, self.b_min, self.b_max)
        if not all(math.isfinite(v) for v in vals) or not (self.a_min < self.a_max and self.b_min < self.b_max):
            raise opfInputError("Optim::: SearchBox(): invalid box %s" % (vals,))

    @classmethod
    def from_list(cls, vals):
        return cls(*[float(v) for v in vals])

    @property
    def lower(self):
        return np.array([self.a_min, self.b_min])

    @property
    def upper(self):
        return np.array([self.a_max, self.b_max])

    @property
    def span(self):
        return self.upper - self.lower

    @property
    def center(self):
        return (self.lower + self.upper) / 2.0

    def clamp(self, points):
        return np.clip(points, self.lower, self.upper)

    def contains(self, point):
        a, b = point
        return self.a_min <= a <= self.a_max and self.b_min <= b <= self.b_max


### Table of the per-algorithm parameters

@dataclass(frozen=True)
class NMParams:
    p: float = 0.001        # tolerance on simplex diameter and value spread
    max_it: int = 1000
    restarts: int = 1

@dataclass(frozen=True)
class PSOParams:
    c1: float = 2.0
    c2: float = 2.0
    w: float = 0.5

@dataclass(frozen=True)
class BAParams:
    q_min: float = 0.0      # frequency range
    q_max: float = 1.0
    alpha: float = 1.0      # loudness decay
    gamma: float = 1.0      # pulse rate growth

@dataclass(frozen=True)
class FFAParams:
    gamma: float = 1.0      # light absorption
    beta: float = 0.9       # attractiveness at distance 0
    alpha: float = 0.7      # randomization, no cooling

PARAMS_CLASS = {Algorithm.NM: NMParams, Algorithm.PSO: PSOParams,
                Algorithm.BA: BAParams, Algorithm.FFA: FFAParams}


@dataclass(frozen=True)
class OptimizerConfig:
    algorithm: Algorithm
    agents: int = 20
    iterations: int = 400
    box: SearchBox = field(default_factory=SearchBox)
    params: object = None
    seed: int = 0
    velocity_clamp: float = 0.5

    def __post_init__(self):
        alg = Algorithm.parse(self.algorithm)
        object.__setattr__(self, 'algorithm', alg)
        params = self.params if self.params is not None else PARAMS_CLASS[alg]()
        if not isinstance(params, PARAMS_CLASS[alg]):
            raise opfInputError("Optim::: OptimizerConfig(): %s needs %s, got %r" %
                                (alg.tag, PARAMS_CLASS[alg].__name__, params))
        object.__setattr__(self, 'params', params)
        object.__setattr__(self, 'seed', check_seed(self.seed))
        if int(self.agents) < 1 or int(self.iterations) < 1:
            raise opfInputError("Optim::: OptimizerConfig(): agents and iterations must be positive (%s, %s)" %
                                (self.agents, self.iterations))
        if alg is Algorithm.NM and (params.p <= 0 or params.max_it < 1 or params.restarts < 0):
            raise opfInputError("Optim::: OptimizerConfig(): invalid NM parameters %s" % (params,))
        if not 0 < self.velocity_clamp <= 1:
            raise opfInputError("Optim::: OptimizerConfig(): velocity_clamp must be in (0, 1]")

    @classmethod
    def from_config(cls, algorithm, seed=0, cfg=None):
        """
        Build the configuration of `algorithm` from the optimConfig document.
        """
        if cfg is None:
            from opfconfig import optimConfig as cfg
        alg = Algorithm.parse(algorithm)
        return cls(alg, int(cfg['agents']), int(cfg['iterations']), SearchBox.from_list(cfg['box']),
                   PARAMS_CLASS[alg](**cfg[alg.value]), seed, float(cfg['velocity_clamp']))

    def with_seed(self, seed):
        return replace(self, seed=seed)


@dataclass(frozen=True)
class OptimResult:
    point: Tuple[float, float]
    value: float
    evaluations: int
    trace: Optional[Tuple[float, ...]] = None
    algorithm: str = ''
    iterations: int = 0
    converged: bool = True


class _Evaluator:
    """
    Counting wrapper around the objective: clamps, checks finiteness, feeds the
    evaluation hook and keeps the best point seen (first one on ties).
    """
    def __init__(self, objective, box, on_evaluate=None):
        self.objective = objective
        self.box = box
        self.on_evaluate = on_evaluate
        self.count = 0
        self.best_point = None
        self.best_value = np.inf

    def __call__(self, point):
        pt = self.box.clamp(np.asarray(point, dtype=np.float64))
        a, b = float(pt[0]), float(pt[1])
        val = float(self.objective(a, b))
        self.count += 1
        if self.on_evaluate is not None:
            self.on_evaluate((a, b), val)
        if not math.isfinite(val):
            raise opfOptimError("Optim::: objective is not finite (%s) at (A=%.6g, B=%.6g)" % (val, a, b))
        if val < self.best_value:
            self.best_value = val
            self.best_point = (a, b)
        return val


def _nelder_mead(ev, config, trace):
    prm = config.params
    box = config.box
    step = 0.1 * box.span
    x0 = box.center
    it = 0
    restarts_left = prm.restarts
    converged = False

    while True:
        sim = box.clamp(np.array([x0, x0 + [step[0], 0.0], x0 + [0.0, step[1]]]))
        fsim = np.array([ev(x) for x in sim])
        order = np.argsort(fsim, kind='stable')
        sim, fsim = sim[order], fsim[order]

        converged = False
        while it < prm.max_it:
            diam = max(np.linalg.norm(sim[i] - sim[j]) for i in range(3) for j in range(i + 1, 3))
            if diam <= prm.p and (fsim[-1] - fsim[0]) <= prm.p:
                converged = True
                break

            xbar = sim[:-1].mean(axis=0)
            xr = box.clamp(2.0 * xbar - sim[-1])
            fxr = ev(xr)
            shrink = False

            if fxr < fsim[0]:
                xe = box.clamp(3.0 * xbar - 2.0 * sim[-1])
                fxe = ev(xe)
                if fxe < fxr:
                    sim[-1], fsim[-1] = xe, fxe
                else:
                    sim[-1], fsim[-1] = xr, fxr
            elif fxr < fsim[-2]:
                sim[-1], fsim[-1] = xr, fxr
            elif fxr < fsim[-1]:
                # outside contraction
                xc = box.clamp(1.5 * xbar - 0.5 * sim[-1])
                fxc = ev(xc)
                if fxc <= fxr:
                    sim[-1], fsim[-1] = xc, fxc
                else:
                    shrink = True
            else:
                # inside contraction
                xcc = box.clamp(0.5 * xbar + 0.5 * sim[-1])
                fxcc = ev(xcc)
                if fxcc < fsim[-1]:
                    sim[-1], fsim[-1] = xcc, fxcc
                else:
                    shrink = True

            if shrink:
                for j in (1, 2):
                    sim[j] = box.clamp(sim[0] + 0.5 * (sim[j] - sim[0]))
                    fsim[j] = ev(sim[j])

            order = np.argsort(fsim, kind='stable')
            sim, fsim = sim[order], fsim[order]
            it += 1
            trace.append(ev.best_value)

        if not converged or restarts_left == 0:
            break
        # restart from the best vertex with the initial step
        restarts_left -= 1
        x0 = sim[0].copy()
        opfLogger.debug("Optim::: NM restart from (%.6g, %.6g) after %d iterations" % (x0[0], x0[1], it))

    return it, converged


def _pso(ev, config, trace):
    prm = config.params
    box = config.box
    rng = make_rng(config.seed)
    vmax = config.velocity_clamp * box.span
    n = config.agents

    x = rng.uniform(box.lower, box.upper, size=(n, 2))
    v = rng.uniform(-vmax, vmax, size=(n, 2))
    f = np.array([ev(xi) for xi in x])
    pbest, pbest_f = x.copy(), f.copy()
    gbest = pbest[int(np.argmin(pbest_f))].copy()

    for it in range(config.iterations):
        r1 = rng.random((n, 2))
        r2 = rng.random((n, 2))
        v = prm.w * v + prm.c1 * r1 * (pbest - x) + prm.c2 * r2 * (gbest - x)
        v = np.clip(v, -vmax, vmax)
        x = box.clamp(x + v)
        for i in range(n):
            fi = ev(x[i])
            if fi < pbest_f[i]:
                pbest[i], pbest_f[i] = x[i], fi
        gbest = pbest[int(np.argmin(pbest_f))].copy()
        trace.append(ev.best_value)

    return config.iterations, True


def _bat(ev, config, trace):
    prm = config.params
    box = config.box
    rng = make_rng(config.seed)
    vmax = config.velocity_clamp * box.span
    n = config.agents

    x = rng.uniform(box.lower, box.upper, size=(n, 2))
    v = np.zeros((n, 2))
    f = np.array([ev(xi) for xi in x])
    loudness = np.ones(n)
    r0 = rng.random(n)
    pulse = np.zeros(n)
    ib = int(np.argmin(f))
    xbest, fbest = x[ib].copy(), f[ib]

    for t in range(1, config.iterations + 1):
        for i in range(n):
            q = prm.q_min + (prm.q_max - prm.q_min) * rng.random()
            v[i] = np.clip(v[i] + (x[i] - xbest) * q, -vmax, vmax)
            cand = box.clamp(x[i] + v[i])
            if rng.random() > pulse[i]:
                # local random walk around the best bat
                cand = box.clamp(xbest + rng.uniform(-1.0, 1.0, size=2) * loudness.mean())
            fc = ev(cand)
            if rng.random() < loudness[i] and fc <= f[i]:
                x[i], f[i] = cand, fc
                loudness[i] *= prm.alpha
                pulse[i] = r0[i] * (1.0 - math.exp(-prm.gamma * t))
            if fc <= fbest:
                xbest, fbest = cand.copy(), fc
        trace.append(ev.best_value)

    return config.iterations, True


def _firefly(ev, config, trace):
    prm = config.params
    box = config.box
    rng = make_rng(config.seed)
    n = config.agents

    x = rng.uniform(box.lower, box.upper, size=(n, 2))
    f = np.array([ev(xi) for xi in x])

    for it in range(config.iterations):
        for i in range(n):
            moved = False
            for j in range(n):
                if f[j] < f[i]:
                    r2 = float(np.sum((x[i] - x[j]) ** 2))
                    attract = prm.beta * math.exp(-prm.gamma * r2)
                    x[i] = x[i] + attract * (x[j] - x[i]) + prm.alpha * (rng.random(2) - 0.5)
                    moved = True
            if not moved:
                # the brightest firefly walks randomly
                x[i] = x[i] + prm.alpha * (rng.random(2) - 0.5)
            x[i] = box.clamp(x[i])
        f = np.array([ev(xi) for xi in x])
        trace.append(ev.best_value)

    return config.iterations, True


RUNNERS = {Algorithm.NM: _nelder_mead, Algorithm.PSO: _pso,
           Algorithm.BA: _bat, Algorithm.FFA: _firefly}


def minimize(objective, config, on_evaluate=None, trace=False):
    """
    Minimize objective(A, B) over config.box with the configured algorithm.

    on_evaluate(point, value) is called for every evaluated point; the trace
    (best value so far after each iteration) is returned when trace=True.
    """
    ev = _Evaluator(objective, config.box, on_evaluate)
    best_trace = []
    iterations, converged = RUNNERS[config.algorithm](ev, config, best_trace)

    for it, val in enumerate(best_trace):
        opfLogger.debug("Optim::: %s %s it=%d best=%.10g" % (TRACE_TAG, config.algorithm.tag, it, val))
    opfLogger.info("Optim::: %s: F=%.10g at (A=%.6g, B=%.6g), %d evaluations, %d iterations%s" %
                   (config.algorithm.tag, ev.best_value, ev.best_point[0], ev.best_point[1],
                    ev.count, iterations, '' if converged else ' (not converged)'))

    return OptimResult(ev.best_point, ev.best_value, ev.count,
                       tuple(best_trace) if trace else None,
                       config.algorithm.tag, iterations, converged)


def grid_axes(box, steps):
    if int(steps) < 2:
        raise opfInputError("Optim::: grid_evaluate(): steps must be >= 2, got %s" % steps)
    return np.linspace(box.a_min, box.a_max, int(steps)), np.linspace(box.b_min, box.b_max, int(steps))


def grid_evaluate(objective, box, steps):
    """
    Evaluate objective on a steps x steps lattice including the box corners.
    Row i holds A = a_i, column j holds B = b_j.
    """
    a_vals, b_vals = grid_axes(box, steps)
    grid = np.empty((a_vals.size, b_vals.size))
    for i, a in enumerate(a_vals):
        for j, b in enumerate(b_vals):
            val = float(objective(float(a), float(b)))
            if not math.isfinite(val):
                raise opfOptimError("Optim::: grid_evaluate(): objective is not finite at (A=%.6g, B=%.6g)" % (a, b))
            grid[i, j] = val
    return grid


def write_grid_csv(stream, box, grid):
    """
    Write the lattice as CSV rows "A,B,F" in row-major order.
    """
    a_vals, b_vals = grid_axes(box, grid.shape[0])
    writer = csv.writer(stream, lineterminator='\n')
    writer.writerow(('A', 'B', 'F'))
    for i, a in enumerate(a_vals):
        for j, b in enumerate(b_vals):
            writer.writerow((repr(float(a)), repr(float(b)), repr(float(grid[i, j]))))
