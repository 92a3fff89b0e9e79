# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
import os
from unittest import TestCase

import numpy as np

from phdec import dirac, dynamics, report
from phdec.report import CheckRow

from .utils import fixtures, tools


class TestReport(TestCase):
    def test_format(self) -> None:
        self.assertEqual(report.format_cell(True), 'true')
        self.assertEqual(report.format_cell(np.bool_(False)), 'false')
        self.assertEqual(report.format_cell(7), '7')
        self.assertEqual(report.format_cell(np.int64(7)), '7')
        self.assertEqual(report.format_cell(0.5), '5.00000000000000000e-01')
        self.assertEqual(report.format_cell(np.float64(-0.25)), '-2.50000000000000000e-01')
        self.assertEqual(report.format_cell('tank'), 'tank')
        self.assertEqual(report.format_cell(float('inf')), 'inf')

    def test_write_csv(self) -> None:
        with tools.temp_dir() as directory:
            path = os.path.join(directory, 'nested', 'table.csv')
            report.write_csv(path, ('a', 'b'), [(1, 0.1), (2, True)])
            with open(path, 'r', encoding='utf-8') as f:
                lines = f.read().splitlines()
            self.assertEqual(lines, ['a,b', '1,1.00000000000000006e-01', '2,true'])
            # no temporary files left behind
            self.assertEqual(os.listdir(os.path.dirname(path)), ['table.csv'])

    def test_checks(self) -> None:
        rows = [CheckRow('forms', 'adjoint_d', 1e-14, 1e-11, True), CheckRow('forms', 'wedge', 1.0, 1e-12, False)]
        with tools.temp_dir() as directory:
            path = report.write_checks(os.path.join(directory, 'check_forms.csv'), rows)
            read = tools.read_csv(path)
        self.assertEqual(list(read[0].keys()), list(report.CHECK_COLUMNS))
        self.assertEqual([r['passed'] for r in read], ['true', 'false'])
        self.assertEqual(float(read[0]['value']), 1e-14)

    def test_audit(self) -> None:
        audits = [
            (7, dirac.AuditResult('v', 2e-17, 1e-17, 4, 4, 4, [(0, 1e-17), (1, 2e-17)])),
            (8, dirac.AuditResult('omega', 3e-18, 0.0, 3, 3, 3, [(0, 3e-18)])),
        ]
        with tools.temp_dir() as directory:
            path = report.write_audit(os.path.join(directory, 'audit_dirac.csv'), audits, 1e-9)
            read = tools.read_csv(path)
        self.assertEqual(list(read[0].keys()), list(report.AUDIT_COLUMNS))
        keys = [(r['formulation'], r['state_id'], r['pair_id']) for r in read[:3]]
        self.assertEqual(keys, [('v', '7', '0'), ('v', '7', '1'), ('omega', '8', '0')])
        summary = read[-1]
        self.assertEqual((summary['formulation'], summary['state_id'], summary['pair_id']), ('summary', '2', '3'))
        self.assertEqual(float(summary['normalized_residual']), 2e-17)

    def test_cochain(self) -> None:
        c = fixtures.tank(4, 2)
        cochain = fixtures.random_cochain(c, 1, fixtures.rng())
        with tools.temp_dir() as directory:
            path = report.dump_cochain(os.path.join(directory, 'v.csv'), cochain)
            loaded = report.read_cochain(path, cochain)
        self.assertEqual(loaded.degree, 1)
        self.assertTrue(np.array_equal(loaded.values, cochain.values))

    def test_trajectory(self) -> None:
        record = dynamics.TrajectoryRecord(
            rows=[(0.0, 1.0, 0.5, 0.25, 0.25, 0.0, 0.25, 0.0), (0.1, 1.0, 0.5, 0.25, 0.25, 0.0, 0.25, 0.0)],
            probe=[(0.0, 0.01), (0.1, 0.009)],
            snapshots={3: np.zeros((2, 2))},
            steps=1,
        )
        with tools.temp_dir() as directory:
            written = report.write_trajectory(directory, record)
            self.assertEqual(
                [os.path.basename(p) for p in written], ['trajectory.csv', 'probe.csv', 'sigma_3.csv']
            )
            rows = tools.read_csv(written[0])
            self.assertEqual(tuple(rows[0].keys()), dynamics.CSV_COLUMNS)
            self.assertEqual(float(rows[1]['t']), 0.1)
            self.assertEqual(len(tools.read_csv(written[1])), 2)
            self.assertEqual(len(tools.read_csv(written[2])), 2)
