# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Logging setup
'''
import logging
import sys
import typing
from logging.handlers import RotatingFileHandler

from phdec import consts

if typing.TYPE_CHECKING:
    from phdec import config

logger = logging.getLogger(__name__)


def setup_log(
    loglevel: str = 'ERROR',
    logfile: str = '',
    logsize: int = 32 * 1024 * 1024,
    lognumber: int = 3,
    cfg: typing.Optional['config.RunConfig'] = None,
) -> None:
    log = logging.getLogger()
    if logfile:
        fileh = RotatingFileHandler(
            filename=logfile,
            mode='a',
            maxBytes=logsize,
            backupCount=lognumber,
        )
        fileh.setFormatter(logging.Formatter(consts.LOGFORMAT))
        log.setLevel(loglevel)
        log.addHandler(fileh)
    else:
        log.setLevel(loglevel)
        handler = logging.StreamHandler(sys.stderr)
        handler.setLevel(loglevel)
        handler.setFormatter(logging.Formatter('%(levelname)s - %(message)s'))
        log.addHandler(handler)

    # If debug, print config
    if cfg is not None and loglevel.lower() == 'debug':
        logger.debug('%s', cfg)


def setup_from_config(cfg: 'config.RunConfig') -> None:
    setup_log(
        loglevel=cfg.output.loglevel,
        logfile=cfg.output.logfile,
        logsize=cfg.output.logsize,
        lognumber=cfg.output.lognumber,
        cfg=cfg,
    )
