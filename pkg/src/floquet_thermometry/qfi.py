"""Quantum Fisher information for temperature and the Cramer-Rao error bound.

The steady state is diagonal, so the QFI reduces to the classical Fisher
information of the level populations, H = sum_n (d rho_n/dT)^2 / rho_n.
Three independent evaluations are provided:

* closed form from the sideband sums kappa, zeta, C (positive sidebands only),
* central finite differences of the populations,
* second differences of the fidelity between neighbouring-temperature states.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import logsumexp

from . import steadystate as ss
from .errors import ConvergenceError, RegimeError
from .modulation import Modulation, SidebandSet, sideband_weights

NEGATIVE_SIDEBAND_TOL = 1e-9


@dataclass
class QfiReport:
    T: float
    H: float
    method: str
    measurements: int = 1
    components: dict | None = None
    R: float | None = None
    meta: dict = field(default_factory=dict)

    @property
    def xi(self) -> float:
        return error_bound(self.H, self.T, self.measurements)


def error_bound(H: float, T: float, measurements: int = 1) -> float:
    """Cramer-Rao relative error bound 1/(T sqrt(M H)); infinite when H == 0."""
    if H < 0 or not T > 0 or measurements < 1:
        raise ValueError("need H >= 0, T > 0 and at least one measurement")
    if H == 0:
        return math.inf
    return 1.0 / (T * math.sqrt(measurements * H))


def sideband_qfi_term(P: float, omega: float, T: float) -> float:
    """P e^{w/T} w^2 / ((e^{w/T} - 1)^2 T^4), the QFI of one thermal ladder."""
    if P == 0 or omega <= 0:
        return 0.0
    q = math.exp(-omega / T)
    return P * q * omega**2 / ((1 - q) ** 2 * T**4)


def no_control_qfi(omega0: float, T: float) -> float:
    return sideband_qfi_term(1.0, omega0, T)


# ------------------------------------------------------------- closed form


def negative_sideband_weight(spec, sidebands, T) -> float:
    """Largest share of the Boltzmann numerator or denominator owed to w_m < 0."""
    w, a, logpg = ss._sideband_terms(spec, sidebands, T)
    neg = w < 0
    if not np.any(neg):
        return 0.0
    num = np.where(neg, logpg, logpg - a / T)
    den = np.where(neg, logpg - a / T, logpg)
    share_num = math.exp(logsumexp(num[neg]) - logsumexp(num))
    share_den = math.exp(logsumexp(den[neg]) - logsumexp(den))
    return max(share_num, share_den)


def _ladder_fisher(logx: float, n_levels: int) -> float:
    """sum_n x^n (n S - x S')^2 / S^3, with S = sum x^n and x S' = sum n x^n."""
    if logx == -math.inf:
        return 0.0
    n = np.arange(n_levels)
    xn = np.exp(n * logx)
    S = xn.sum()
    xSp = np.dot(n, xn)
    return float(np.dot(xn, (n * S - xSp) ** 2) / S**3)


def qfi_closed_form(probe, spec, sidebands, T, measurements=1, strict=False,
                    tol=ss.DEFAULT_SIDEBAND_TOL) -> QfiReport:
    """H = A_gen / B_gen built from kappa = sum e^{-w/T} P G, zeta = sum P G and
    C = sum e^{-w/T} P G w over sidebands with w_m > 0.

    Outside the positive-sideband regime this falls back to the
    population-derivative route, or raises RegimeError when ``strict``.
    """
    ss._check_complete(sidebands, tol)
    weight = negative_sideband_weight(spec, sidebands, T)
    if weight > NEGATIVE_SIDEBAND_TOL:
        if strict:
            raise RegimeError(
                f"negative-frequency sidebands carry {weight:.3g} of the Boltzmann factor", weight
            )
        rep = qfi_population_derivative(probe, spec, sidebands, T, measurements=measurements, tol=tol)
        rep.meta["negative_sideband_weight"] = weight
        rep.meta["fallback_from"] = "ClosedForm"
        return rep

    keep = sidebands.omega > 0
    w = sidebands.omega[keep]
    with np.errstate(divide="ignore"):
        logpg = np.log(sidebands.P[keep] * spec(w))
    live = np.isfinite(logpg)
    w, logpg = w[live], logpg[live]
    log_kappa = logsumexp(logpg - w / T)
    log_zeta = logsumexp(logpg)
    # C / kappa: Boltzmann-weighted mean sideband frequency
    mean_w = float(np.dot(np.exp(logpg - w / T - log_kappa), w))
    logx = float(log_kappa - log_zeta)
    if isinstance(probe, ss.Oscillator) and probe.N_max is None:
        # untruncated ladder: the sum is the Bose variance x/(1-x)^2
        x = math.exp(logx)
        L, var_n = None, x / (1 - x) ** 2
    else:
        L = ss.level_count(probe, math.exp(logx))
        var_n = _ladder_fisher(logx, L)
    H = mean_w**2 * var_n / T**4
    return QfiReport(T, H, "ClosedForm", measurements, meta={"levels": L})


def log_boltzmann_slope(spec, sidebands, T) -> float:
    """d log x / dT from the sideband sums, valid for either sign of w_m."""
    w, a, logpg = ss._sideband_terms(spec, sidebands, T)
    pos = w >= 0
    num = np.where(pos, logpg - a / T, logpg)
    den = np.where(pos, logpg, logpg - a / T)
    s_num = np.exp(num - logsumexp(num))
    s_den = np.exp(den - logsumexp(den))
    return float(np.dot(s_num[pos], a[pos]) - np.dot(s_den[~pos], a[~pos])) / T**2


def ladder_qfi(probe, spec, sidebands, T) -> float:
    """(d log x/dT)^2 Var(n) for any sideband set; a fast exact surrogate."""
    logx = ss.log_effective_boltzmann(spec, sidebands, T, None)
    if isinstance(probe, ss.Oscillator) and probe.N_max is None:
        x = math.exp(logx)
        var_n = x / (1 - x) ** 2
    else:
        var_n = _ladder_fisher(logx, ss.level_count(probe, math.exp(logx)))
    return log_boltzmann_slope(spec, sidebands, T) ** 2 * var_n


# --------------------------------------------------------- finite differences


class _Shifts:
    """Log-population differences between T and T + h for one sideband set."""

    def __init__(self, probe, spec, sidebands, T, h_max, tol):
        ss._check_complete(sidebands, tol)
        self.args = (spec, sidebands, T)
        self.levels = ss.level_count(probe, ss.effective_boltzmann(spec, sidebands, T + h_max, None))
        self.lp = ss.log_populations(ss.log_effective_boltzmann(spec, sidebands, T, None), self.levels)

    def __call__(self, h):
        d = ss.log_boltzmann_shift(*self.args, h)
        return ss.log_population_shift(self.lp, d)


def qfi_population_derivative(probe, spec, sidebands, T, step=1e-4, measurements=1,
                              rtol=1e-8, tol=ss.DEFAULT_SIDEBAND_TOL) -> QfiReport:
    """Central differences of log-populations, halving the step with
    Richardson extrapolation until two refinements agree to ``rtol``."""
    if not T > 0:
        raise ValueError("temperature must be > 0")
    h = max(step * T, 1e-12)
    shift = _Shifts(probe, spec, sidebands, T, h, tol)
    rho = np.exp(shift.lp)
    live = rho > 0
    meta = {"levels": shift.levels}

    def score(hh):
        return (shift(hh)[live] - shift(-hh)[live]) / (2 * hh)

    d_prev = score(h)
    H_prev = None
    for _ in range(30):
        h /= 2
        d = score(h)
        extrap = (4 * d - d_prev) / 3
        H = float(np.dot(rho[live], extrap**2))
        if H_prev is not None and (abs(H - H_prev) <= rtol * abs(H) or H == H_prev == 0):
            return QfiReport(T, H, "PopulationDerivative", measurements, meta=meta | {"step": h})
        H_prev, d_prev = H, d
    raise ConvergenceError(f"population-derivative QFI did not converge at T={T}")


def fidelity(lp_a: np.ndarray, lp_b: np.ndarray) -> float:
    """sum_n sqrt(p_n q_n) for diagonal states given as log-populations."""
    return float(np.sum(np.exp(0.5 * (lp_a + lp_b))))


def _one_minus_fidelity(lp, dlp):
    # 1 - sum sqrt(pq) = 1/2 sum (sqrt p - sqrt q)^2 for normalized p, q
    live = np.isfinite(lp)
    diff = np.exp(0.5 * lp[live]) * np.expm1(0.5 * dlp[live])
    return 0.5 * float(np.dot(diff, diff))


def qfi_fidelity_difference(probe, spec, sidebands, T, eps=1e-3, measurements=1,
                            rtol=1e-9, tol=ss.DEFAULT_SIDEBAND_TOL) -> QfiReport:
    """H from the curvature of the fidelity F(T, T+e) at e = 0.

    F(e) = 1 - H e^2 / 8 + O(e^4), so H = 4 (2 - F(+e) - F(-e)) / e^2.
    """
    if not T > 0:
        raise ValueError("temperature must be > 0")
    e = eps * T
    shift = _Shifts(probe, spec, sidebands, T, e, tol)
    lp, L = shift.lp, shift.levels

    def curvature(ee):
        return 4 * (_one_minus_fidelity(lp, shift(ee)) + _one_minus_fidelity(lp, shift(-ee))) / ee**2

    c_prev = curvature(e)
    R_prev = None
    for _ in range(20):
        e /= 2
        c = curvature(e)
        R = (4 * c - c_prev) / 3
        if R_prev is not None and abs(R - R_prev) <= rtol * abs(R):
            return QfiReport(T, R, "FidelityDifference", measurements, meta={"levels": L, "eps": e})
        if c == 0 and c_prev == 0:
            return QfiReport(T, 0.0, "FidelityDifference", measurements, meta={"levels": L, "eps": e})
        R_prev, c_prev = R, c
    raise ConvergenceError(f"fidelity-difference QFI did not converge at T={T}")


# ---------------------------------------------------- decomposition, dispatch


def decompose(H: float, sidebands: SidebandSet, T: float) -> dict:
    """Split H into the m = -1, 0, +1 single-ladder terms and the remainder."""
    parts = {
        "H_m1": sideband_qfi_term(sidebands.weight(-1), sidebands.omega0 - sidebands.Delta, T),
        "H_0": sideband_qfi_term(sidebands.weight(0), sidebands.omega0, T),
        "H_p1": sideband_qfi_term(sidebands.weight(1), sidebands.omega0 + sidebands.Delta, T),
    }
    parts["H_rem"] = H - (parts["H_m1"] + parts["H_0"] + parts["H_p1"])
    return parts


METHODS = {
    "auto": qfi_closed_form,
    "closed": qfi_closed_form,
    "population": qfi_population_derivative,
    "fidelity": qfi_fidelity_difference,
}


def qfi(probe, spec, sidebands, T, method="auto", measurements=1,
        tol=ss.DEFAULT_SIDEBAND_TOL, with_components=False) -> QfiReport:
    rep = METHODS[method](probe, spec, sidebands, T, measurements=measurements, tol=tol)
    if with_components:
        rep.components = decompose(rep.H, sidebands, T)
    return rep


# ------------------------------------------------------- sinusoidal, flat bath


def qfi_sinusoidal_closed(mu: float, Delta: float, omega0: float, T: float, measurements=1) -> QfiReport:
    """QFI of the oscillator under weak sinusoidal modulation in a flat bath,
    keeping sidebands m = 0, +-1 with P_0 = 1 - mu^2/2 and P_1 = mu^2/4.

    The A/B ratio is evaluated after dividing out its leading exponentials,
    so it stays finite down to T -> 0.
    """
    if not T > 0 or not 0 <= Delta < omega0 or not 0 <= mu < 1:
        raise ValueError("need T > 0, 0 <= Delta < omega0 and 0 <= mu < 1")
    m2 = mu * mu
    H = _sin_total(mu, Delta, omega0, T)
    parts = {
        "H_m1": sideband_qfi_term(m2 / 4, omega0 - Delta, T),
        "H_0": sideband_qfi_term(1 - m2 / 2, omega0, T),
        "H_p1": sideband_qfi_term(m2 / 4, omega0 + Delta, T),
    }
    parts["H_rem"] = H - (parts["H_m1"] + parts["H_0"] + parts["H_p1"])
    rep = QfiReport(T, H, "ClosedForm", measurements, components=parts)
    T1 = (omega0 - Delta) / 4
    rep.R = dominance_indicator(sideband_qfi_term(m2 / 4, omega0 - Delta, T1), _sin_total(mu, Delta, omega0, T1))
    return rep


def _sin_total(mu, Delta, omega0, T):
    m2 = mu * mu
    u = math.exp(-Delta / T)
    v = math.exp(-omega0 / T)
    w = math.exp(-(omega0 - Delta) / T)
    a1 = (m2 - 2) * omega0 * u + m2 * (-omega0 * (1 + u * u) / 2 + Delta * (1 - u * u) / 2)
    b1 = m2 * u * v + 4 * v - 4 - 2 * m2 * v + m2 * w
    b2 = m2 * u * u + 4 * u - 2 * m2 * u + m2
    return 16 * w * a1 * a1 / (T**4 * b1 * b1 * b2)


def h_rem_explicit(mu, Delta, omega0, T) -> float:
    """Remainder term written out directly; overflows for T << omega0."""
    m2 = mu * mu
    eD, e0 = math.exp(Delta / T), math.exp(omega0 / T)
    l1 = 64 * eD**3 * ((m2 - 2) * omega0 + m2 * (-omega0 * math.cosh(Delta / T) + Delta * math.sinh(Delta / T))) ** 2
    l2 = (m2 + eD * (4 - 4 * e0 - 2 * m2 + eD * m2)) ** 2 * (m2 + eD * (4 + (eD - 2) * m2))
    bracket = (
        -eD * m2 * (Delta - omega0) ** 2 / (eD - e0) ** 2
        + 2 * (m2 - 2) * omega0**2 / (e0 - 1) ** 2
        - eD * m2 * (Delta + omega0) ** 2 / (math.exp((Delta + omega0) / T) - 1) ** 2
        + l1 / l2
    )
    return e0 * bracket / (4 * T**4)


def dominance_indicator(h_m1: float, h_total: float) -> float:
    """R = ln(H_-1 / |H - H_-1|) at T_-1; R > 0 means the m = -1 sideband dominates."""
    if h_m1 <= 0:
        return -math.inf
    gap = abs(h_total - h_m1)
    if gap == 0:
        return math.inf
    return math.log(h_m1 / gap)


def dominance_at_t_minus1(probe, spec, sidebands, method="auto", tol=ss.DEFAULT_SIDEBAND_TOL) -> float:
    omega_m1 = sidebands.omega0 - sidebands.Delta
    if omega_m1 <= 0 or sidebands.weight(-1) == 0:
        return -math.inf
    T1 = omega_m1 / 4
    H = qfi(probe, spec, sidebands, T1, method=method, tol=tol).H
    return dominance_indicator(sideband_qfi_term(sidebands.weight(-1), omega_m1, T1), H)


# --------------------------------------------------- characteristic scales


def t0_fixed_point(omega0: float) -> float:
    """Peak temperature of the unmodulated QFI: T0 = w0 coth(w0/2T0)/4."""
    if not omega0 > 0:
        raise ValueError("omega0 must be > 0")

    def f(T):
        return T - omega0 / (4 * math.tanh(omega0 / (2 * T)))

    return optimize.bisect(f, omega0 / 4, omega0, xtol=1e-14 * omega0, rtol=1e-15, maxiter=200)


def eta(spec, sidebands) -> float:
    """Spectral-weight ratio (P0 G(w0) + P1 G(w1) + P-1 G(w-1)) / (P-1 G(w-1)) >= 1."""
    w0, D = sidebands.omega0, sidebands.Delta
    Pm1, P0, P1 = sidebands.weight(-1), sidebands.weight(0), sidebands.weight(1)
    g = lambda w: float(spec(abs(w)))  # noqa: E731
    den = Pm1 * g(w0 - D) if w0 - D > 0 else 0.0
    if den == 0:
        return math.inf
    return (P0 * g(w0) + P1 * g(w0 + D) + den) / den


def qfi_eta(eta_value: float, omega_m1: float, T: float) -> float:
    """Low-temperature QFI eta e^{w/T} w^2 / ((eta e^{w/T} - 1)^2 T^4)."""
    if math.isinf(eta_value):
        return 0.0
    z = math.exp(-omega_m1 / T) / eta_value
    return z * omega_m1**2 / ((1 - z) ** 2 * T**4)


@dataclass
class ScalingFit:
    slope: float
    intercept: float
    T: np.ndarray
    H: np.ndarray
    eta: np.ndarray


def scaling_exponent(spec, kappa: float, Ts, mu=0.2, omega0=1.0, M=None, probe=None,
                     regime_factor=100.0, tol=ss.DEFAULT_SIDEBAND_TOL) -> ScalingFit:
    """Least-squares slope of log H vs log T with the gap locked to w_-1 = kappa T."""
    probe = probe or ss.Oscillator()
    Ts = np.asarray(Ts, dtype=float)
    Hs, etas = [], []
    for T in Ts:
        w_m1 = kappa * T
        floor = regime_factor * float(spec(w_m1))
        if not T > floor:
            raise RegimeError(f"T={T:g} is not above the regime floor {floor:g}", floor)
        mod = Modulation.sinusoidal(omega0, omega0 - w_m1, mu)
        sb = sideband_weights(mod, M)
        H = qfi(probe, spec, sb, T, tol=tol).H
        if not H > 0:
            raise RegimeError(f"QFI vanishes at T={T:g}; w_-1 = {w_m1:g} sits outside the bath response", 0.0)
        Hs.append(H)
        etas.append(eta(spec, sb))
    Hs = np.array(Hs)
    slope, intercept = np.polyfit(np.log(Ts), np.log(Hs), 1)
    return ScalingFit(float(slope), float(intercept), Ts, Hs, np.array(etas))
