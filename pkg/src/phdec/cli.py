# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
``ph`` command line: scenario runs, property suites and mesh utilities.

Exit codes: 0 everything passed, 1 runtime failure or a threshold missed,
2 configuration, mesh or usage error.
'''
import argparse
import logging
import os
import sys
import typing

from . import config, consts, dynamics, log, meshgen, processes, report, suites
from .complex import load_mesh, mesh_info, write_mesh
from .errors import ConfigError, MeshError, PHError
from .report import CheckRow

logger = logging.getLogger(__name__)


def _fail(command: str, error: Exception, code: int) -> int:
    sys.stderr.write(f'ph {command} error: {error}\n')
    logger.error('MAIN: %s', error)
    return code


# run
def run_thresholds(cfg: config.RunConfig, scenario: dynamics.Scenario, record: dynamics.TrajectoryRecord) -> typing.List[CheckRow]:
    rows: typing.List[CheckRow] = []
    inflow = scenario.inflow is not None and scenario.inflow.active

    def add(name: str, value: float, tolerance: str, default: float) -> None:
        threshold = cfg.tolerance(tolerance, default)
        rows.append(CheckRow('run', name, value, threshold, bool(value <= threshold)))

    if inflow:
        add('power_residual', record.power_residual(), 'power', consts.TOL_POWER)
    else:
        add('energy_drift', record.energy_drift(), 'energy', consts.TOL_ENERGY)
        add('area_drift', record.area_drift(), 'area', consts.TOL_AREA)
    if scenario.formulation == dynamics.ROTATIONAL:
        add('div_residual', record.max_divergence(), 'solenoidal', consts.TOL_SOLENOIDAL)
    return rows


def _run_job(cfg: config.RunConfig) -> typing.Tuple[typing.List[str], typing.List[CheckRow]]:
    scenario = dynamics.Scenario.from_config(cfg)
    record = dynamics.run_scenario(scenario)
    rows = run_thresholds(cfg, scenario, record)
    directory = cfg.output.directory
    if not os.path.isabs(directory) and cfg.source != '<stream>':
        directory = os.path.join(os.path.dirname(os.path.abspath(cfg.source)), directory)
    written = report.write_trajectory(directory, record)
    written.append(report.write_checks(os.path.join(directory, 'summary.csv'), rows))
    return written, rows


def cmd_run(args: argparse.Namespace) -> int:
    try:
        configs = [config.read(path) for path in args.config]
        log.setup_from_config(configs[0])
        for cfg in configs:
            # mesh and scenario errors are reported before anything runs
            dynamics.Scenario.from_config(cfg)
    except (ConfigError, MeshError) as e:
        return _fail('run', e, consts.EXIT_USAGE)

    try:
        results = processes.run_all(_run_job, configs)
    except PHError as e:
        return _fail('run', e, consts.EXIT_FAILURE)

    passed = True
    for cfg, (written, rows) in zip(configs, results):
        sys.stdout.write(f'{cfg.source}:\n')
        for row in rows:
            status = 'ok' if row.passed else 'FAILED'
            sys.stdout.write(f'  {row.check} = {row.value:.6e} (threshold {row.threshold:.1e}) {status}\n')
            passed = passed and row.passed
        for path in written[:1]:
            sys.stdout.write(f'  trajectory written to {path}\n')
    return consts.EXIT_OK if passed else consts.EXIT_FAILURE


# check
def cmd_check(args: argparse.Namespace) -> int:
    log.setup_log(args.loglevel)
    if args.suite not in suites.SUITES:
        return _fail('check', ConfigError(f'unknown suite {args.suite}, use one of {", ".join(suites.SUITES)}'), consts.EXIT_USAGE)
    try:
        c = load_mesh(args.mesh)
    except MeshError as e:
        return _fail('check', e, consts.EXIT_USAGE)
    try:
        if args.suite == 'dirac':
            rows, audits = suites.dirac_audits(c, args.seed)
            suites.log_outcome(args.suite, rows)
        else:
            rows, audits = suites.run_suite(args.suite, c, args.seed), []
    except PHError as e:
        return _fail('check', e, consts.EXIT_FAILURE)

    path = report.write_checks(os.path.join(args.output, f'check_{args.suite}.csv'), rows)
    failed = [row for row in rows if not row.passed]
    for row in rows:
        status = 'ok' if row.passed else 'FAILED'
        sys.stdout.write(f'{row.suite}.{row.check} = {row.value:.6e} (threshold {row.threshold:.1e}) {status}\n')
    if audits:
        audit_path = report.write_audit(
            os.path.join(args.output, f'audit_{args.suite}.csv'), audits, suites.DIRAC_PAIR_THRESHOLD
        )
        sys.stdout.write(f'pair audit written to {audit_path}\n')
    sys.stdout.write(f'{len(rows) - len(failed)}/{len(rows)} checks passed, report written to {path}\n')
    return consts.EXIT_OK if not failed else consts.EXIT_FAILURE


# meshes
def cmd_mesh_info(args: argparse.Namespace) -> int:
    log.setup_log(args.loglevel)
    try:
        c = load_mesh(args.path)
    except MeshError as e:
        return _fail('mesh-info', e, consts.EXIT_USAGE)
    for key, value in mesh_info(c).items():
        sys.stdout.write(f'{key}: {value}\n')
    return consts.EXIT_OK


MESH_KINDS: typing.Final[typing.Tuple[str, ...]] = ('tank', 'square', 'disc', 'annulus')


def cmd_mesh_gen(args: argparse.Namespace) -> int:
    log.setup_log(args.loglevel)
    try:
        if args.kind == 'tank':
            c = meshgen.tank(args.nx, args.ny, args.length, args.depth)
        elif args.kind == 'square':
            c = meshgen.structured_rectangle(args.nx, args.ny, args.length, args.depth, sigma=())
        elif args.kind == 'disc':
            c = meshgen.polygon_disc(args.nx, args.length, args.ny)
        else:
            c = meshgen.annulus(args.nx, 0.5 * args.length, args.length, args.ny)
        write_mesh(c, args.output)
    except (MeshError, OSError) as e:
        return _fail('mesh-gen', e, consts.EXIT_USAGE)
    sys.stdout.write(f'{c} written to {args.output}\n')
    return consts.EXIT_OK


def parser() -> argparse.ArgumentParser:
    main_parser = argparse.ArgumentParser(prog='ph', description='Structure preserving free surface flow solver')
    main_parser.add_argument('--version', action='version', version=consts.VERSION)
    commands = main_parser.add_subparsers(dest='command', metavar='command')

    run = commands.add_parser('run', help='Run one or more scenario configuration files')
    run.add_argument('config', nargs='+', help=f'Configuration file (default name: {consts.CONFIGFILE})')
    run.set_defaults(func=cmd_run)

    check = commands.add_parser('check', help='Run a property suite on a mesh')
    check.add_argument('suite', help=f'One of: {", ".join(suites.SUITES)}')
    check.add_argument('--mesh', required=True, help='Mesh file')
    check.add_argument('--seed', type=int, default=consts.DEFAULT_SEED, help='Random seed')
    check.add_argument('--output', default='.', help='Directory for the check report')
    check.add_argument('--loglevel', default='ERROR', help='Log level')
    check.set_defaults(func=cmd_check)

    info = commands.add_parser('mesh-info', help='Print mesh statistics')
    info.add_argument('path', help='Mesh file')
    info.add_argument('--loglevel', default='ERROR', help='Log level')
    info.set_defaults(func=cmd_mesh_info)

    gen = commands.add_parser('mesh-gen', help='Write a generated mesh')
    gen.add_argument('kind', choices=MESH_KINDS)
    gen.add_argument('output', help='Mesh file to write')
    gen.add_argument('--nx', type=int, default=16, help='Cells along x (segments around for disc and annulus)')
    gen.add_argument('--ny', type=int, default=4, help='Cells along y (rings for disc and annulus)')
    gen.add_argument('--length', type=float, default=1.0, help='Width (radius for disc and annulus)')
    gen.add_argument('--depth', type=float, default=1.0, help='Height')
    gen.add_argument('--loglevel', default='ERROR', help='Log level')
    gen.set_defaults(func=cmd_mesh_gen)
    return main_parser


def main(argv: typing.Optional[typing.Sequence[str]] = None) -> int:
    main_parser = parser()
    args = main_parser.parse_args(argv)
    if not getattr(args, 'func', None):
        main_parser.print_help()
        return consts.EXIT_USAGE
    return int(args.func(args))
