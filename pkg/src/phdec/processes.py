# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Worker processes for independent jobs (scenario runs, audit samples).

Results come back in submission order whatever the number of workers, so a
parallel run writes the same reports as a sequential one.
'''
import logging
import multiprocessing
import os
import typing

import psutil

from . import consts
from .errors import PHError, SolverError

if typing.TYPE_CHECKING:
    from multiprocessing.connection import Connection

logger = logging.getLogger(__name__)

T = typing.TypeVar('T')
R = typing.TypeVar('R')

JobType = typing.Callable[[typing.Any], typing.Any]


def thread_limit() -> int:
    """Workers allowed: ``PH_THREADS`` if set, else the logical CPU count."""
    value = os.environ.get(consts.THREADS_ENV, '').strip()
    if value:
        try:
            return max(1, int(value))
        except ValueError:
            logger.warning('Ignoring invalid %s=%s', consts.THREADS_ENV, value)
    return psutil.cpu_count(logical=True) or 1


class Workers:
    """
    Pool of worker processes connected by pipes. Every worker runs ``job`` on
    whatever arrives through its pipe until it receives ``None``.
    """

    children: typing.List[typing.Tuple['Connection', multiprocessing.Process, psutil.Process]]
    job: JobType

    def __init__(self, job: JobType, workers: typing.Optional[int] = None) -> None:
        self.children = []
        self.job = job
        for _ in range(workers or thread_limit()):
            self.add_child()

    def add_child(self) -> None:
        own_conn, child_conn = multiprocessing.Pipe()
        task = multiprocessing.Process(target=Workers.runner, args=(self.job, child_conn))
        task.start()
        logger.debug('ADD WORKER PID: %s', task.pid)
        self.children.append((own_conn, task, psutil.Process(task.pid)))

    def _drop(self, index: int, reason: Exception) -> None:
        own_conn, task, _ = self.children[index]
        logger.warning('Missing worker found: %s', reason)
        try:
            own_conn.close()
        except Exception:
            logger.debug('Could not close pipe of worker %s', task.pid)
        try:
            task.kill()
            task.join(1)
            task.close()
        except Exception:
            logger.debug('Could not close worker %s', task.pid)

    def alive(self) -> typing.List[int]:
        """Indices of live workers; dead or zombie workers are replaced."""
        missing: typing.List[int] = []
        for i, (_, _, proc) in enumerate(self.children):
            try:
                if proc.status() == psutil.STATUS_ZOMBIE:
                    raise psutil.ZombieProcess(proc.pid)
                logger.debug('Worker %s: cpu %s%%, rss %s', proc.pid, proc.cpu_percent(), proc.memory_info().rss)
            except (psutil.ZombieProcess, psutil.NoSuchProcess) as e:
                self._drop(i, e)
                missing.append(i)
        if missing:
            self.children[:] = [child for i, child in enumerate(self.children) if i not in missing]
            for _ in missing:
                self.add_child()
        return list(range(len(self.children)))

    def map(self, jobs: typing.Sequence[typing.Any]) -> typing.List[typing.Any]:
        """Runs every job, results in submission order. Job errors are re-raised here."""
        results: typing.Dict[int, typing.Any] = {}
        pending = list(enumerate(jobs))
        while pending:
            workers = self.alive()
            batch, pending = pending[: len(workers)], pending[len(workers) :]
            sent: typing.List[typing.Tuple[int, int]] = []
            for worker, (index, job) in zip(workers, batch):
                self.children[worker][0].send((index, job))
                sent.append((worker, index))
            for worker, index in sent:
                try:
                    _, (ok, value) = self.children[worker][0].recv()
                except (EOFError, OSError) as e:
                    # Worker died on this job, run it again on a fresh one
                    logger.warning('Worker lost while running job %s: %s', index, e)
                    pending.append((index, jobs[index]))
                    continue
                if not ok:
                    raise value
                results[index] = value
        return [results[i] for i in range(len(jobs))]

    def stop(self) -> None:
        for conn, task, proc in self.children:
            try:
                conn.send(None)
                task.join(1)
            except Exception as e:
                logger.info('STOPPING worker %s: %s', proc.pid, e)
            if task.is_alive():
                try:
                    proc.kill()
                except Exception as e:
                    logger.info('KILLING worker %s: %s', proc.pid, e)

    def __enter__(self) -> 'Workers':
        return self

    def __exit__(self, *args: typing.Any) -> None:
        self.stop()

    @staticmethod
    def runner(job: JobType, conn: 'Connection') -> None:
        while True:
            try:
                message = conn.recv()
            except EOFError:
                return
            if message is None:
                return
            index, payload = message
            try:
                conn.send((index, (True, job(payload))))
            except PHError as e:
                conn.send((index, (False, e)))
            except Exception as e:  # anything else is a bug in the job, report it
                conn.send((index, (False, SolverError(f'worker job failed: {e!r}'))))


def run_all(job: typing.Callable[[T], R], jobs: typing.Sequence[T], workers: typing.Optional[int] = None) -> typing.List[R]:
    """
    ``[job(j) for j in jobs]``, in worker processes when more than one worker
    is allowed and there is more than one job.
    """
    count = min(workers or thread_limit(), len(jobs))
    if count <= 1:
        return [job(j) for j in jobs]
    logger.info('Running %d jobs on %d workers', len(jobs), count)
    with Workers(job, count) as pool:
        return pool.map(jobs)
