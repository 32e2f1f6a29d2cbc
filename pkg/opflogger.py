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

Implements the custom logging for the popfpy

The console handler writes to stderr only: stdout is reserved for the CSV data
emitted by the command line tool.
"""

import os
import logging
import logging.config

### Logging parameters
LOGLEVEL = logging.INFO
LOGFILEBYTES = 3*102400
LOG_FILENAME = os.environ.get('POPF_LOGFILE', 'popf.log')
CONSOLE_LEVEL = os.environ.get('POPF_LOGLEVEL', 'WARNING').upper()
TRACE_TAG = 'Trace::'
# POPF_TRACE=1 writes the per-iteration optimizer trace (DEBUG) to the log file
TRACE_ENABLED = os.environ.get('POPF_TRACE', '0') == '1'

### Define the logging filter
# Filter out the per-iteration optimizer trace messages
class NoTraceFilter(logging.Filter):

    def __init__(self, filter_str=None, enabled=None):
        logging.Filter.__init__(self)
        self.filterstr = filter_str
        if enabled is None:
            enabled = os.environ.get('POPF_TRACE', '0') != '1'
        self.enabled = enabled

    def filter(self, rec):
        if self.filterstr is None or not self.enabled:
            allow = True
        else:
            allow = self.filterstr not in rec.getMessage()

        return allow

### Define the logging configuration
def logging_config(log_filename=LOG_FILENAME, trace=TRACE_ENABLED):
    """
    The dictConfig dictionary. With trace the file handler takes DEBUG records
    and lets the optimizer trace through.
    """
    return {
        'version': 1,
        'disable_existing_loggers': False,
        'root': {
            'level': 'DEBUG',
            'handlers': ['file', 'console']
        },
        'formatters': {
            'full': {
                'format': '%(asctime)s [%(levelname)s] (%(threadName)-10s) %(message)s'
            },
            'short': {
                'format': '%(asctime)s %(message)s'
            }
        },
        'handlers': {
            'file': {
                'level': logging.DEBUG if trace else LOGLEVEL,
                'class': 'logging.handlers.RotatingFileHandler',
                'mode': 'a',
                'maxBytes': LOGFILEBYTES,
                'backupCount': 5,
                'formatter': 'full',
                'filename': log_filename,
                'delay': True,
                'filters': ['NoTrace']
            },
            'console': {
                'level': CONSOLE_LEVEL,
                'class': 'logging.StreamHandler',
                'stream': 'ext://sys.stderr',
                'formatter': 'short',
            }
        },
        'filters':{
            'NoTrace': {
                '()': NoTraceFilter,
                'filter_str': TRACE_TAG,
                'enabled': not trace
            }
        }
    }

OPFLOGGING = logging_config()

### Build the opflogger
def opf_logger(config=None):
    """Build and return the logger.
    :return: logger -- Logger instance
    """
    _logger = logging.getLogger()

    # Use the OPFLOGGING logger configuration
    logging.config.dictConfig(config or OPFLOGGING)

    return _logger

def set_console_level(level):
    """
    Change the level of the stderr handler(s), e.g. for the --verbose flag.
    """
    for hdl in opfLogger.handlers:
        if isinstance(hdl, logging.StreamHandler) and \
            not isinstance(hdl, logging.FileHandler):
            hdl.setLevel(level)


opfLogger = opf_logger()
