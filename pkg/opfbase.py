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

Implements the opfError hierarchy shared by all popfpy modules.

The error value (errval) of every exception is also the exit code used by the
command line tool.
"""

__all__ = ('ERRNONE', 'ERRUSAGE', 'ERRDATA', 'ERRRUN',
            'opfError', 'opfUsageError', 'opfInputError', 'opfDatasetError',
            'opfDegenerateError', 'opfParseError', 'opfModelError',
            'opfOptimError', 'opfConfigError')

# Error values (levels); these are also the process exit codes
ERRNONE  = 0 #Success
ERRUSAGE = 1 #Wrong command line usage
ERRDATA  = 2 #Bad input data, dataset or model document
ERRRUN   = 3 #Runtime failure


class opfError(Exception):
    """
    Base exception raised by the popfpy modules.
    """
    errlevel = ERRRUN

    def __init__(self, errstr, errval=None):
        self.errstr = errstr
        self.errval = self.errlevel if errval is None else errval
        self.errmsg = "%s (errstr='%s', errval=%d)" % (self.__class__.__name__, self.errstr, self.errval)
        super().__init__(self.errmsg)

    def __str__(self):
        return self.errmsg

    def __repr__(self):
        return "<%s (errstr='%s', errval=%d)>" % (self.__class__.__name__, self.errstr, self.errval)


class opfUsageError(opfError):
    """ Wrong command line usage """
    errlevel = ERRUSAGE

class opfInputError(opfError):
    """ Invalid input: dimension mismatch, parameter out of range, ... """
    errlevel = ERRDATA

class opfDatasetError(opfError):
    """ The dataset is not supported by the operation (e.g. not exactly two classes) """
    errlevel = ERRDATA

class opfDegenerateError(opfError):
    """ A class is empty or covers the whole sample set """
    errlevel = ERRDATA

class opfModelError(opfError):
    """ Model document cannot be loaded or does not support the query """
    errlevel = ERRDATA

class opfOptimError(opfError):
    """ The optimizer hit a non-finite objective value """
    errlevel = ERRRUN

class opfConfigError(opfError):
    """ The YAML configuration could not be read """
    errlevel = ERRRUN


class opfParseError(opfError):
    """
    Dataset file parse error. The line number is 1-based.
    """
    errlevel = ERRDATA

    def __init__(self, errstr, line_no=None, errval=None):
        self.line_no = line_no
        if line_no is not None:
            errstr = "line %d: %s" % (line_no, errstr)
        super().__init__(errstr, errval)
