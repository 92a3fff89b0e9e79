# -*- coding: utf-8 -*-
#
# Copyright (c) 2026 The phdec developers
# All rights reserved. Distributed under the BSD 3-Clause license, see LICENSE.
'''
Structure preserving discretization of free surface Euler flow as a
port-Hamiltonian system over simplicial meshes.
'''
from .consts import VERSION as __version__  # noqa: F401
