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

Implements the Events class as group of events and counters used by the
benchmark runs (one entry per compared method).
"""
from threading import Event
from threading import RLock

class opfEventsClass:
    """
    Events and counters shared by all benchmark runs/threads.
    eventAbort is set by the first failed run; the other runs check it and stop.
    """
    def __init__(self, method_ids):
        self.method_ids = tuple(method_ids)
        self._lock = RLock()

        self.eventErrList       = {}
        self.eventErrcountList  = {}
        self.eventRuncountList  = {}
        for id in self.method_ids:
            self.eventErrList[id] = Event()
            self.eventErrList[id].clear()
            self.eventErrcountList[id] = 0
            self.eventRuncountList[id] = 0

        self.jobRuncount = 0
        self.eventAbort = Event()
        self.eventAbort.clear()

    def runDone(self, id):
        with self._lock:
            self.eventRuncountList[id] += 1

    def runFailed(self, id):
        with self._lock:
            self.eventErrList[id].set()
            self.eventErrcountList[id] += 1
            self.eventAbort.set()

    def splitDone(self):
        with self._lock:
            self.jobRuncount += 1

    def clearEvents(self):
        self.eventAbort.clear()

    def resetEventsLists(self):
        with self._lock:
            self.jobRuncount = 0
            for id in self.method_ids:
                self.eventErrList[id].clear()
                self.eventErrcountList[id] = 0
                self.eventRuncountList[id] = 0

    def __repr__(self):
        return "<%s (method_ids=%s)>" % (self.__class__.__name__, self.method_ids)

    def __str__(self):
        ret_str = "Events: abort=%s, runs=%d, " % (self.eventAbort.is_set(), self.jobRuncount)
        for id in self.method_ids:
            ret_str = ret_str + "%s:(%d,%d,%d), " % (id, self.eventErrList[id].is_set(), self.eventRuncountList[id], self.eventErrcountList[id])

        return ret_str
