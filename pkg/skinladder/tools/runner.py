# coding: utf-8
#
'''Trajectory farming: launchers, progress reporting and retries

A launcher maps a job function over independent work items, serially or on a
bounded process pool. Results are collected by item index, so aggregation
order, and with it every output file, does not depend on the worker count.
'''
from __future__ import division, print_function, unicode_literals

import concurrent.futures
import logging
import os
import sys
from collections import OrderedDict

from skinladder.common.errors import NumericalError, UsageError
from skinladder.trajectory import initial_state, run_trajectory

logger = logging.getLogger(__name__)

#
# Interfaces of a launcher:
#
# class XxxLauncher(object):
#     # Check if the launcher is possible on current system
#     @classmethod
#     def is_available(cls): pass
#
#     # Register extra cmdline arguments
#     @classmethod
#     def register_cmdline_args(cls, argparser): pass
#
#     # Accept values from parsed arguments
#     def parse_cmdline_args(cls, namespace): pass
#
#     # Run fn on every item. Yields (index, outcome) pairs as items finish,
#     # where outcome is fn's return value or the exception it raised.
#     def run(self, fn, items): pass
#
#     # Ordered map for jobs that must all succeed (grid scans)
#     def map(self, fn, items): pass
#


class SerialLauncher(object):
    '''Run every item in the calling process'''
    @classmethod
    def is_available(cls):
        return True

    @classmethod
    def register_cmdline_args(cls, argparser):
        pass

    @classmethod
    def parse_cmdline_args(cls, namespace):
        return {}

    def __init__(self, args=None):
        self.args = args or {}

    @property
    def workers(self):
        return 1

    def run(self, fn, items):
        for i, item in enumerate(items):
            try:
                yield i, fn(item)
            except Exception as e:
                yield i, e

    def map(self, fn, items):
        return list(map(fn, items))


class ProcessPoolLauncher(object):
    '''Run items on a bounded pool of worker processes'''
    @classmethod
    def is_available(cls):
        return (os.cpu_count() or 1) > 1

    @classmethod
    def register_cmdline_args(cls, argparser):
        argparser.add_argument("--workers",
                               type=int,
                               default=None,
                               metavar="N",
                               help="Number of worker processes")

    @classmethod
    def parse_cmdline_args(cls, namespace):
        return {"workers": namespace.workers}

    def __init__(self, args):
        workers = args.get("workers") or os.cpu_count() or 1
        if workers < 1:
            raise UsageError("Worker count must be >= 1, got '%s'" % workers)
        self.args = args
        self._workers = workers

    @property
    def workers(self):
        return self._workers

    def run(self, fn, items):
        with concurrent.futures.ProcessPoolExecutor(self._workers) as pool:
            futures = dict((pool.submit(fn, item), i)
                           for i, item in enumerate(items))
            for f in concurrent.futures.as_completed(futures):
                try:
                    yield futures[f], f.result()
                except Exception as e:
                    yield futures[f], e

    def map(self, fn, items):
        with concurrent.futures.ProcessPoolExecutor(self._workers) as pool:
            return list(pool.map(fn, items))


def make_launcher(name, workers):
    '''Launcher for --launcher {serial,process,auto}

    auto picks the process pool when more than one worker is asked for.
    '''
    if workers is not None and workers < 1:
        raise UsageError("Worker count must be >= 1, got '%s'" % workers)
    if name == "serial":
        return SerialLauncher()
    elif name == "process":
        return ProcessPoolLauncher({"workers": workers})
    elif name == "auto":
        if workers and workers > 1 and ProcessPoolLauncher.is_available():
            return ProcessPoolLauncher({"workers": workers})
        return SerialLauncher()
    raise UsageError("Unknown launcher '%s'" % name)


class SimpleProgressReporter(object):
    '''A simple progress reporter'''
    def __init__(self, stream=None):
        self.stream = stream or sys.stdout
        self.total = 0
        self.finished = 0

    def run_begin(self, name, total):
        '''Notify the start of a batch of work items'''
        self.stream.write("Start %s:\n" % name)
        self.stream.flush()
        self.total = total
        self.finished = 0

    def run_end(self, name, stats):
        '''Notify the end of the batch'''
        self.stream.write("Done.\n")
        stats_str = ", ".join("%d %s" % (len(v), k)
                              for k, v in stats.items()) + "\n"
        self.stream.write(stats_str)
        self.stream.flush()

    def item_begin(self, label):
        '''Notify the start of one item'''
        self.finished += 1
        completed = float(self.finished) / float(max(self.total, 1)) * 100
        self.stream.write("   [%3.0f%%] %s ... " % (completed, label))
        self.stream.flush()

    def item_end(self, label, result):
        '''Notify the result of one item'''
        self.stream.write("%s\n" % result)
        self.stream.flush()


class NullProgressReporter(object):
    def run_begin(self, name, total):
        pass

    def run_end(self, name, stats):
        pass

    def item_begin(self, label):
        pass

    def item_end(self, label, result):
        pass


def trajectory_job(job):
    '''Worker entry point; module level so process pools can pickle it'''
    cfg, tcfg, initial = job
    return run_trajectory(cfg, tcfg, initial=initial)


def run_trajectories(cfg, tcfg, n_traj, launcher, reporter=None,
                     initial="neel"):
    '''Run trajectories 0..n_traj-1 and return their series in id order

    A trajectory whose worker fails is run once more with the same random
    stream; a second failure aborts the whole run. Usage errors are never
    retried.

    Returns:
        (series, stats): the ObservableSeries list and the OrderedDict of
        trajectory ids that succeeded, were retried and failed.
    '''
    if n_traj < 1:
        raise UsageError("Trajectory count must be >= 1, got '%s'" % n_traj)
    # odd N or an unknown state name
    initial_state(cfg, initial)
    reporter = reporter or NullProgressReporter()
    jobs = [(cfg, tcfg.replace(trajectory_id=i), initial)
            for i in range(n_traj)]
    stats = OrderedDict([("ok", []), ("retried", []), ("failed", [])])
    series = [None] * n_traj
    name = "%d trajectories N=%d delta=%g gamma=%g" % (n_traj, cfg.N,
                                                       cfg.delta, cfg.gamma)
    reporter.run_begin(name, n_traj)

    failed = []
    for i, outcome in launcher.run(trajectory_job, jobs):
        label = "trajectory %d" % i
        reporter.item_begin(label)
        if isinstance(outcome, Exception):
            if isinstance(outcome, UsageError):
                raise outcome
            logger.warning("trajectory %d failed, will retry: %s", i, outcome)
            failed.append(i)
            reporter.item_end(label, "failed (%s)" % outcome)
        else:
            series[i] = outcome
            stats["ok"].append(i)
            reporter.item_end(label, "ok")

    errors = OrderedDict()
    for i, outcome in launcher.run(trajectory_job, [jobs[i] for i in failed]):
        traj = failed[i]
        label = "trajectory %d (retry)" % traj
        reporter.item_begin(label)
        if isinstance(outcome, Exception):
            errors[traj] = outcome
            stats["failed"].append(traj)
            reporter.item_end(label, "failed (%s)" % outcome)
        else:
            series[traj] = outcome
            stats["retried"].append(traj)
            reporter.item_end(label, "ok")

    for k in stats:
        stats[k].sort()
    reporter.run_end(name, stats)
    if errors:
        detail = "; ".join("trajectory %d: %s" % (k, v)
                           for k, v in sorted(errors.items()))
        raise NumericalError("%d trajectories failed twice: %s" %
                             (len(errors), detail))
    return series, stats
