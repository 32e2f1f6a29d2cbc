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

Implements the popfpy configuration (read `opfconfig.yaml`)
"""
import os
import sys

import yaml

from opflogger import opfLogger
from opfbase import opfConfigError

__all__ = ('YAMLCFG_FILE', 'optimConfig', 'evalConfig', 'synthConfig',
            'read_config', 'default_seed');

### Custom configuration START

# Configuration file, next to this module unless POPF_CONFIG is set
YAMLCFG_FILE = os.environ.get('POPF_CONFIG',
                    os.path.join(os.path.dirname(os.path.abspath(__file__)), 'opfconfig.yaml'))

# Environment variable with the default seed of the stochastic commands
SEED_ENV = 'POPF_SEED'

# Keys which must be present in each configuration document
OPTIM_KEYS = ('agents', 'iterations', 'box', 'velocity_clamp', 'nm', 'pso', 'ba', 'ffa')
EVAL_KEYS  = ('train_fraction', 'runs', 'stratified', 'alpha', 'metric', 'theta', 'methods')

### Custom configuration END


### Python version
PY39 = (sys.version_info[0] == 3) and (sys.version_info[1] >= 9)
if not PY39:
    opfLogger.error("This program requires minimum Python 3.9!")
    raise SystemExit(3)


def read_config(cfg_file):
    """
    Read the three configuration documents (optim, eval, synth) from cfg_file.
    """
    try:
        with open(cfg_file, 'r') as stream:
            optim_cfg, eval_cfg, synth_cfg = yaml.load_all(stream, Loader=yaml.SafeLoader)

    except yaml.YAMLError as e:
        raise opfConfigError("Config::: read_config(): Error in configuration file %s: %s" % (cfg_file, e))

    except (OSError, ValueError) as e:
        raise opfConfigError("Config::: read_config(): Configuration file %s could not be read: %s" % (cfg_file, e))

    for cfg, keys, doc in ((optim_cfg, OPTIM_KEYS, 'optimConfig'), (eval_cfg, EVAL_KEYS, 'evalConfig')):
        missing = [k for k in keys if k not in (cfg or {})]
        if missing:
            raise opfConfigError("Config::: read_config(): %s misses the keys %s" % (doc, missing))

    opfLogger.debug("Config::: read %s" % cfg_file)
    return optim_cfg, eval_cfg, synth_cfg or {}


def default_seed():
    """
    The seed used when no --seed is given: POPF_SEED or 0.
    """
    seed_str = os.environ.get(SEED_ENV)
    if seed_str is None or seed_str.strip() == '':
        return 0

    try:
        return int(seed_str)
    except ValueError:
        opfLogger.warning("Config::: %s=%s is not an integer, using seed 0" % (SEED_ENV, seed_str))
        return 0


### Read the configuration parameters
optimConfig, evalConfig, synthConfig = read_config(YAMLCFG_FILE)

# Display config info
opfLogger.debug("optimConfig: %s" % optimConfig)
opfLogger.debug("evalConfig: %s" % evalConfig)
opfLogger.debug("synthConfig: %s" % synthConfig)
