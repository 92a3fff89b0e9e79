#!/usr/bin/env python3
# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
ph command line launcher
'''
import sys

from phdec.cli import main

if __name__ == "__main__":
    sys.exit(main())
