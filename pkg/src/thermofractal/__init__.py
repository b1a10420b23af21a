"""Numerical thermodynamic formalism for intermittent circle maps.

Pressure curves, spectral-gap diagnostics, Legendre rate functions and
multifractal spectra for full-branch circle maps and skew products over
expanding circle endomorphisms.
"""

from .errors import (BudgetError, DataError, DomainError, NumericalError,
                     ThermofractalError)
from .maps import (BaseEndoSpec, C2FiberRule, CircleMapSpec, SkewProductSpec,
                   evaluate, inverse_branches, make_c2_intermittent,
                   make_doubling, make_manneville_pomeau,
                   make_piecewise_linear, make_skew_product, map_from_json,
                   map_to_json)
from .transfer import (EigenData, GapDiagnostic, OperatorDiscretization,
                       build_discretization, equilibrium_observable_average,
                       gap_certificate, leading_eigen)
from .pressure import (PressureCurve, PressureValue, detect_transition,
                       left_slope_at_transition, periodic_orbit_pressure,
                       pressure_at, pressure_curve, skew_pressure)
from .multifractal import (FreeEnergy, RateFunction, SpectrumResult,
                           entropy_spectrum, free_energy, hausdorff_spectrum,
                           lambda_extremes, rate_function, tau_check, tau_hat)
from .ldp import (CylinderEnsemble, RateComparison, compare_rate,
                  empirical_rate, enumerate_cylinders)

__version__ = "0.1.0"
