# Copyright 2026, the wcotools developers
#
# This file is part of wcotools.
#
# wcotools is free software: you can redistribute it and/or modify
# it under the terms of the GNU Lesser General Public License as
# published by the Free Software Foundation, either version 2.1 of
# the License, or (at your option) any later version.
#
# wcotools is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU Lesser General Public License for more details.
#
# You should have received a copy of the GNU Lesser General Public
# License along with wcotools.  If not, see
# <http://www.gnu.org/licenses/>.
#
import logging

from .util import package_version

__version__ = package_version()

# Exceptions
from . import exception

# Configuration
from .config import ToleranceConfig

# Measure spaces
from .measurespace import AtomKind, FiniteMeasureSpace, Partition, PFunction, cozero, \
    conditional_expectation, genuine_atom, lp_norm, nonatomic_cell, refine

# Self-maps
from .dynamics import SelfMap, compose_power, detect_period, fiber_partition, \
    pushforward_of_fiber_constant, radon_nikodym

# Operators
from .weightedsum import WeightedSumOperator

# Closed range criteria
from .rangecriteria import BandScheme, ClosedRangeAnalysis, Criterion, RangeVerdict

# Polar decomposition, invertibility, spectral measure, injectivity
from .polarspectral import apply_inverse, injectivity_check, oracle_polar, \
    periodic_invertibility, polar_decomposition, spectral_measure, verify_partial_isometry

# Scenarios and reports
from .scenario import Scenario, generate_random, load_scenario, save_scenario
from .checks import Report, run_batch, run_checks, validate_report
from .selftest import SelfTest

logging.getLogger(__name__).addHandler(logging.NullHandler())
