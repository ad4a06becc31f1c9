"""Thermometry with periodically modulated quantum probes.

Floquet sideband weights, secular steady states, temperature QFI and
Cramer-Rao error bounds, a Lindblad dynamics check, and a small
modulation designer.
"""

from .bath import NearlyFlat, SubOhmic, Tabulated, kms_response, nfbs_limit, spectral_response
from .errors import (
    ConfigError,
    ConvergenceError,
    ProbeDecoupledError,
    RegimeError,
    ThermometryError,
)
from .modulation import Modulation, SidebandSet, sideband_weights, sideband_weights_analytic, sideband_weights_quadrature
from .qfi import QfiReport, error_bound, qfi, qfi_closed_form, qfi_fidelity_difference, qfi_population_derivative
from .steadystate import FiniteN, Oscillator, SteadyState, effective_boltzmann, steady_state

__version__ = "0.1.0"
