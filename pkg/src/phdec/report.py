# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
CSV reports. Files are written next to their final name and moved into place,
so a failed run never leaves a partial file behind.
'''
import csv
import dataclasses
import logging
import os
import tempfile
import typing

import numpy as np

from .forms import Cochain

if typing.TYPE_CHECKING:
    from .dirac import AuditResult
    from .dynamics import TrajectoryRecord

logger = logging.getLogger(__name__)

NUMBER_FORMAT: typing.Final[str] = '%.17e'

Cell = typing.Union[str, int, float, bool, np.floating, np.integer]


@dataclasses.dataclass(frozen=True)
class CheckRow:
    suite: str
    check: str
    value: float
    threshold: float
    passed: bool

    def cells(self) -> typing.Tuple[Cell, ...]:
        return (self.suite, self.check, self.value, self.threshold, 'true' if self.passed else 'false')


CHECK_COLUMNS = ('suite', 'check', 'value', 'threshold', 'passed')


def format_cell(value: Cell) -> str:
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return NUMBER_FORMAT % float(value)
    return str(value)


def write_csv(path: str, header: typing.Sequence[str], rows: typing.Iterable[typing.Sequence[Cell]]) -> str:
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix='.' + os.path.basename(path), suffix='.tmp', dir=directory)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(header)
            for row in rows:
                writer.writerow([format_cell(v) for v in row])
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise
    logger.debug('Wrote %s', path)
    return path


def write_trajectory(directory: str, record: 'TrajectoryRecord', name: str = 'trajectory.csv') -> typing.List[str]:
    """Trajectory, probe series and (if recorded) surface snapshots. Returns the written paths."""
    from .dynamics import CSV_COLUMNS  # pylint: disable=import-outside-toplevel

    written = [write_csv(os.path.join(directory, name), CSV_COLUMNS, record.rows)]
    written.append(write_csv(os.path.join(directory, 'probe.csv'), ('t', 'elevation'), record.probe))
    for step, positions in sorted(record.snapshots.items()):
        written.append(write_csv(os.path.join(directory, f'sigma_{step}.csv'), ('x', 'y'), positions.tolist()))
    return written


def write_checks(path: str, rows: typing.Sequence[CheckRow]) -> str:
    return write_csv(path, CHECK_COLUMNS, [row.cells() for row in rows])


AUDIT_COLUMNS = ('formulation', 'state_id', 'pair_id', 'normalized_residual')


def write_audit(path: str, audits: typing.Sequence[typing.Tuple[int, 'AuditResult']], threshold: float) -> str:
    """
    One row per audited pair of structure tuples. The last line is a summary
    ``summary,<states>,<pairs>,<largest residual>``; residuals above
    ``threshold`` are logged.
    """
    rows: typing.List[typing.Sequence[Cell]] = []
    worst = 0.0
    for state_id, audit in audits:
        for pair_id, residual in audit.pairs:
            rows.append((audit.formulation, state_id, pair_id, residual))
            worst = max(worst, residual)
    if worst > threshold:
        logger.warning('Dirac audit residual %.3e above %.1e', worst, threshold)
    rows.append(('summary', len(audits), len(rows), worst))
    return write_csv(path, AUDIT_COLUMNS, rows)


def dump_cochain(path: str, cochain: Cochain) -> str:
    """``simplex_id,value`` rows."""
    return write_csv(path, ('simplex_id', 'value'), ((i, float(v)) for i, v in enumerate(cochain.values)))


def read_cochain(path: str, cochain_like: Cochain) -> Cochain:
    with open(path, 'r', encoding='utf-8') as f:
        reader = csv.reader(f)
        next(reader)
        values = np.zeros(len(cochain_like.values))
        for simplex, value in reader:
            values[int(simplex)] = float(value)
    return Cochain(cochain_like.degree, values, cochain_like.complex)
