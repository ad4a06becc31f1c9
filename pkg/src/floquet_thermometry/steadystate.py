"""Secular steady state of the modulated probe.

The probe relaxes to a Gibbs-like ladder whose Boltzmann factor mixes all
sidebands. Sidebands with w_m >= 0 pump down at G(w_m) P_m and up at
G(w_m) P_m exp(-w_m/T); sidebands with w_m < 0 swap the roles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ProbeDecoupledError, RegimeError

DEFAULT_SIDEBAND_TOL = 1e-3
TRUNCATION_TOL = 1e-18
MAX_LEVELS = 1_000_000


@dataclass(frozen=True)
class FiniteN:
    """Equispaced N-level probe, levels n = 0 .. N-1. N = 2 is the two-level system."""

    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"FiniteN needs an integer N >= 2, got {self.N}")


@dataclass(frozen=True)
class Oscillator:
    """Harmonic oscillator truncated at level N_max; None picks N_max adaptively."""

    N_max: int | None = None

    def __post_init__(self):
        if self.N_max is not None and (int(self.N_max) != self.N_max or self.N_max < 2):
            raise ValueError(f"oscillator truncation needs N_max >= 2, got {self.N_max}")


ProbeSpec = FiniteN | Oscillator


def _sideband_terms(spec, sidebands, T):
    if not T > 0:
        raise ValueError(f"temperature must be > 0, got {T}")
    w = sidebands.omega
    a = np.abs(w)
    with np.errstate(divide="ignore"):
        logpg = np.log(sidebands.P * spec(a))
    live = np.isfinite(logpg)
    if not np.any(live):
        raise ProbeDecoupledError("probe decoupled: every G(|w_m|) P_m vanishes, no steady state")
    return w[live], a[live], logpg[live]


def log_boltzmann_parts(spec, sidebands, T):
    """log of the numerator and denominator of the effective Boltzmann factor."""
    w, a, logpg = _sideband_terms(spec, sidebands, T)
    pos = w >= 0
    log_num = logsumexp(np.where(pos, logpg - a / T, logpg))
    log_den = logsumexp(np.where(pos, logpg, logpg - a / T))
    return float(log_num), float(log_den)


def log_boltzmann_shift(spec, sidebands, T, h) -> float:
    """log x(T+h) - log x(T), computed without subtracting two large logs."""
    w, a, logpg = _sideband_terms(spec, sidebands, T)
    pos = w >= 0
    d = a * (h / (T * (T + h)))  # -a/(T+h) + a/T

    def shift(active, expo):
        logw = expo - logsumexp(expo)
        dd = np.where(active, d, 0.0)
        if np.max(np.abs(dd)) > 0.5:
            return float(logsumexp(logw + dd))
        return math.log1p(float(np.dot(np.exp(logw), np.expm1(dd))))

    num = shift(pos, np.where(pos, logpg - a / T, logpg))
    den = shift(~pos, np.where(pos, logpg, logpg - a / T))
    return num - den


def log_population_shift(log_pops: np.ndarray, dlogx: float) -> np.ndarray:
    """log rho_n(x e^d) - log rho_n(x) for a geometric ladder."""
    n = np.arange(len(log_pops))
    nd = n * dlogx
    if abs(nd[-1]) > 0.5:
        return nd - float(logsumexp(log_pops + nd))
    return nd - math.log1p(float(np.dot(np.exp(log_pops), np.expm1(nd))))


def _check_complete(sidebands, tol):
    if tol is not None and not sidebands.is_complete(tol):
        raise RegimeError(
            f"sideband set incomplete: deficit {sidebands.deficit:.3g} exceeds {tol:g}",
            sidebands.deficit,
        )


def log_effective_boltzmann(spec, sidebands, T, tol=DEFAULT_SIDEBAND_TOL) -> float:
    _check_complete(sidebands, tol)
    ln, ld = log_boltzmann_parts(spec, sidebands, T)
    return ln - ld


def effective_boltzmann(spec, sidebands, T, tol=DEFAULT_SIDEBAND_TOL) -> float:
    """exp(-w_eff/T): ratio of upward to downward sideband-summed rates."""
    return math.exp(log_effective_boltzmann(spec, sidebands, T, tol))


def positive_sideband_boltzmann(spec, sidebands, T) -> float:
    """Boltzmann factor keeping only sidebands with w_m > 0."""
    keep = sidebands.omega > 0
    g = spec(sidebands.omega[keep])
    pg = sidebands.P[keep] * g
    return float(np.sum(pg * np.exp(-sidebands.omega[keep] / T)) / np.sum(pg))


@dataclass(frozen=True)
class SteadyState:
    boltzmann: float
    populations: np.ndarray
    N_eff: float
    truncation_error: float = 0.0
    omega_eff: float | None = None

    @property
    def levels(self) -> int:
        return len(self.populations)


def oscillator_levels(x: float, tol: float = TRUNCATION_TOL) -> int:
    """Smallest N_max >= 2 with tail mass x**(N_max+1) below tol."""
    if x <= 0:
        return 2
    n = math.ceil(math.log(tol) / math.log(x)) - 1
    if n > MAX_LEVELS:
        raise RegimeError(f"oscillator needs more than {MAX_LEVELS} levels at Boltzmann factor {x}", x)
    return max(2, n)


def level_count(probe, x: float) -> int:
    if isinstance(probe, FiniteN):
        return probe.N
    if probe.N_max is not None:
        return probe.N_max + 1
    return oscillator_levels(x) + 1


def log_populations(logx: float, n_levels: int) -> np.ndarray:
    """log of x**n / sum_k x**k for n < n_levels, accurate for tiny x."""
    n = np.arange(n_levels)
    if logx == -math.inf:
        out = np.full(n_levels, -math.inf)
        out[0] = 0.0
        return out
    x = math.exp(logx)
    # log sum_{k<L} x^k = log1p(-x^L) - log1p(-x)
    logZ = math.log1p(-math.exp(n_levels * logx)) - math.log1p(-x)
    return n * logx - logZ


def steady_state(probe, boltzmann: float, T: float | None = None) -> SteadyState:
    """Populations of the Gibbs ladder with ratio ``boltzmann`` between neighbours."""
    x = float(boltzmann)
    if not 0 <= x < 1:
        raise ValueError(f"Boltzmann factor must lie in [0, 1), got {x}")
    L = level_count(probe, x)
    logx = math.log(x) if x > 0 else -math.inf
    pops = np.exp(log_populations(logx, L))
    tail = 0.0
    if isinstance(probe, Oscillator):
        tail = x**L
        n_eff = x / (1 - x)
    else:
        n_eff = float(np.dot(np.arange(L), pops))
    omega_eff = None
    if T is not None:
        omega_eff = -T * logx if x > 0 else math.inf
    return SteadyState(x, pops, n_eff, tail, omega_eff)
