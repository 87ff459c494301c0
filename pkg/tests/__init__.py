# Copyright 2026, the wcotools developers
#
# This file is part of wcotools.
#
# wcotools is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 2 of the License, or
# (at your option) any later version.
#
# wcotools is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with wcotools.  If not, see <http://www.gnu.org/licenses/>.
#
from . import checks
from . import config
from . import dynamics
from . import measurespace
from . import polarspectral
from . import rangecriteria
from . import scenario
from . import selftest
from . import weightedsum
