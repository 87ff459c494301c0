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
import configparser
import logging
import math
import os
import threading

#
# Configfile constants
#
WCOCONFIG = "~/.config/wcotools/wcotools.conf"
TOLERANCE_SECTION = "Tolerance"
TOLERANCE_BASE = "base"
TOLERANCE_ENV = "WCO_TOL"
DEFAULT_TOLERANCE = 1e-12

# Each check's tolerance is base * multiplier.
multipliers = {"cozero": 1,
               "injectivity": 1,
               "invertibility": 1,
               "fiber_constant": 1e2,
               "adjoint": 1e2,
               "wstarw": 1e2,
               "partial_isometry": 1e2,
               "polar": 1e2,
               "norm_inequality": 1e2,
               "inverse": 1e3,
               "singular_values": 1e4,
               "oracle_polar": 1e4,
               "power": 1e4}


class ToleranceConfig:

    """
    Relative tolerance family.

    The base tolerance is read from the [Tolerance] section of the
    configuration file, if it exists, and the WCO_TOL environment
    variable overrides it.

    Parameter:
    path        The configuration file path.  The default is
                ~/.config/wcotools/wcotools.conf
    """

    def __init__(self, path=None):
        self.log = logging.getLogger(__name__)
        self._lock = threading.Lock()
        self.path = os.path.expanduser(path or WCOCONFIG)

        self._config = configparser.ConfigParser()
        self._config.read((self.path,))

        base = self._config.get(TOLERANCE_SECTION, TOLERANCE_BASE, fallback=None)
        source = self.path

        with_env = os.environ.get(TOLERANCE_ENV)
        if with_env:
            base = with_env
            source = TOLERANCE_ENV

        self._base = DEFAULT_TOLERANCE
        if base is not None:
            self.base = self._parse(base, source)

    def _parse(self, value, source):
        try:
            tol = float(value)
        except ValueError as ex:
            raise ValueError("{0}: invalid tolerance: {1}".format(source, value)) from ex

        return tol

    @property
    def base(self):
        with self._lock:
            return self._base

    @base.setter
    def base(self, value):
        if not (math.isfinite(value) and 0 < value < 1):
            raise ValueError("Base tolerance must be in (0, 1): {0}".format(value))

        with self._lock:
            self._base = value

        self.log.debug("Base relative tolerance {0!r}".format(value))

    def __getitem__(self, check):
        """Get the relative tolerance for a check, e.g. tols["adjoint"]."""
        try:
            return self.base * multipliers[check]
        except KeyError as ex:
            raise KeyError("No tolerance is defined for {0}".format(check)) from ex


def tolerances():
    """Get the tolerance family for the current configuration and environment."""
    return ToleranceConfig()
