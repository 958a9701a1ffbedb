"""Numerical holomorphic dynamics on the unit ball B^q and the Siegel half-space H^q.

Kobayashi geometry, Denjoy-Wolff data, divergence rates and hyperbolic
steps, canonical semi-models of linear fractional maps, Valiron/Abel
solutions and one-parameter semigroups.  Hot kernels run under numba
unless ``KOBDYN_NUMBA=0``.
"""

from . import ball, errors, functional, invariants, lft, maps, semigroups, specs, verify
from ._accel import USE_NUMBA
from .ball import cayley, cayley_inverse, distance, kobayashi_distance, siegel_distance
from .errors import (ConsistencyFailure, ConstraintViolated, DomainEscape, HypothesisFailed,
                     Inconclusive, KobdynError, NotConverged, NotHyperbolic, SpecError)
from .functional import abel_solve, valiron_solve
from .invariants import canonical_dimension, divergence_rate, hyperbolic_step, model_distance
from .lft import (HyperbolicLFTForm, ParabolicLFTForm, canonical_semi_model_hyperbolic,
                  parabolic_model_dichotomy)
from .maps import SelfMap, classify, denjoy_wolff, lft_map, orbit, transport
from .semigroups import Semigroup

__version__ = "0.1.0"
