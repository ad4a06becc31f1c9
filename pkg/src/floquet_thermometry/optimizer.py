"""Modulation design: place QFI peaks at target temperatures.

Single target: a sideband at w_-1 = w0 - Delta puts a QFI peak near
T_-1 = w_-1/4. The seed Delta = w0 - 4T* is refined by Nelder-Mead on
(Delta, mu), maximizing H(T*) while holding the peak at T*.

Several targets: two harmonics l < l' of a base frequency Delta put
sidebands near 4T1 and 4T2, the carrier serves the highest target. A scan
over l' fixes the integer geometry, then (mu_l, mu_l', Delta) are refined
to maximize min_i H(T_i) T_i^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import ConfigError, RegimeError, ThermometryError
from .modulation import Modulation, sideband_weights
from .qfi import error_bound, ladder_qfi, qfi
from .scan import find_peaks
from .steadystate import DEFAULT_SIDEBAND_TOL, Oscillator

PEAK_PENALTY = 1e4
LOG_STEP = 1e-4


@dataclass
class DesignProblem:
    targets: list
    spec: object
    probe: object = field(default_factory=Oscillator)
    omega0: float = 1.0
    mu_max: float = 0.2
    families: tuple = ("sinusoidal",)
    regime_factor: float = 100.0
    seed: int = 0
    tol: float = DEFAULT_SIDEBAND_TOL

    def __post_init__(self):
        self.targets = [float(t) for t in self.targets]
        if not self.targets or min(self.targets) <= 0:
            raise ConfigError("design targets must be positive temperatures")
        if not 0 < self.mu_max < 1:
            raise ConfigError("mu_max must lie in (0, 1)")
        bad = set(self.families) - {"sinusoidal", "pipulse"}
        if bad:
            raise ConfigError(f"unknown modulation families {sorted(bad)}")

    @property
    def objective(self) -> str:
        return "MaxQfiAtSingleT" if len(self.unique_targets()) == 1 else "MaxMinQfiOverTargets"

    def unique_targets(self) -> list:
        out = []
        for t in sorted(self.targets):
            if not out or abs(t - out[-1]) > 1e-9 * t:
                out.append(t)
        return out

    def check_regime(self, T) -> dict:
        """Raise if T sits below the floor set by G at the matched sideband 4T."""
        w = 4 * T
        g = float(self.spec(w)) if w >= 0 else 0.0
        floor = self.regime_factor * g
        if not T > floor:
            raise RegimeError(f"target T={T:g} below the regime floor {floor:g}", floor)
        flag = {"T": T, "floor": floor}
        if hasattr(self.spec, "omega_min"):
            flag["below_omega_min"] = w < self.spec.omega_min
        return flag


@dataclass
class DesignResult:
    modulation: Modulation
    achieved: list  # (T, H, xi) per target
    peaks: list
    trace: list
    seed_modulation: Modulation
    seed_H: list
    meta: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "modulation": self.modulation.to_dict(),
            "achieved": [{"T": T, "H": H, "xi": xi} for T, H, xi in self.achieved],
            "peaks": list(self.peaks),
            "seed_modulation": self.seed_modulation.to_dict(),
            "seed_H": list(self.seed_H),
            "trace": list(self.trace),
            "meta": self.meta,
        }


def _H(problem, mod, T):
    sb = sideband_weights(mod)
    return qfi(problem.probe, problem.spec, sb, T, tol=problem.tol).H


def _surrogate(problem, mod):
    """T -> H for one modulation, sidebands computed once."""
    sb = sideband_weights(mod)
    if not sb.is_complete(problem.tol):
        raise RegimeError("sideband set incomplete", sb.deficit)
    return lambda T: ladder_qfi(problem.probe, problem.spec, sb, T)


def _achieved(problem, mod, targets):
    out = []
    for T in targets:
        H = _H(problem, mod, T)
        out.append((T, H, error_bound(H, T)))
    return out


def _log_slope(f, T, h=LOG_STEP):
    return (math.log(f(T * math.exp(h))) - math.log(f(T * math.exp(-h)))) / (2 * h)


def _peaks_near(problem, mod, targets, n=240):
    lo, hi = min(targets) / 10, min(max(targets) * 10, 10 * problem.omega0)
    sb = sideband_weights(mod)
    f = lambda T: qfi(problem.probe, problem.spec, sb, T, tol=problem.tol).H  # noqa: E731
    return find_peaks(f, np.geomspace(lo, hi, n))


def _simplex(fun, x0, bounds, seed, restarts=3, jitter=0.02):
    """Nelder-Mead from x0 and jittered copies; returns the best result and a trace."""
    rng = np.random.default_rng(seed)
    lo, hi = np.array(bounds).T
    starts = [np.asarray(x0, float)]
    for _ in range(restarts - 1):
        starts.append(np.clip(starts[0] + jitter * rng.standard_normal(len(x0)), lo, hi))
    trace, best = [], None
    for x in starts:
        res = optimize.minimize(fun, x, method="Nelder-Mead", bounds=bounds,
                                options={"xatol": 1e-6, "fatol": 1e-12, "maxiter": 2000})
        trace.append(float(res.fun))
        if best is None or res.fun < best.fun:
            best = res
    return best, trace


def _guarded(fn):
    def wrapped(z):
        try:
            v = fn(z)
        except (ThermometryError, ValueError, FloatingPointError):
            return math.inf
        return v if math.isfinite(v) else math.inf

    return wrapped


# ---------------------------------------------------------------- single peak


def _design_sinusoidal(problem, T):
    w0, mu_max = problem.omega0, problem.mu_max

    def make(z):
        return Modulation.sinusoidal(w0, float(z[0]) * w0, float(z[1]) * mu_max)

    def cost(z):
        f = _surrogate(problem, make(z))
        H = f(T)
        if H <= 0:
            return math.inf
        return -math.log(H) + PEAK_PENALTY * _log_slope(f, T) ** 2

    seed = make([1 - 4 * T / w0, 1.0])
    res, trace = _simplex(_guarded(cost), [1 - 4 * T / w0, 1.0],
                          [(0.0, 1 - 1e-9), (0.0, 1.0)], problem.seed)
    return make(res.x), seed, trace


def _design_pipulse(problem, T):
    w0 = problem.omega0

    def make(z):
        return Modulation.pi_pulse(w0, float(z[0]) * w0)

    def cost(z):
        f = _surrogate(problem, make(z))
        H = f(T)
        if H <= 0:
            return math.inf
        return -math.log(H) + PEAK_PENALTY * _log_slope(f, T) ** 2

    z0 = [1 - 4 * T / w0]
    res, trace = _simplex(_guarded(cost), z0, [(1e-6, 1 - 1e-9)], problem.seed)
    return make(res.x), make(z0), trace


def design_single_peak(problem: DesignProblem) -> DesignResult:
    targets = problem.unique_targets()
    if len(targets) != 1:
        raise ConfigError("design_single_peak needs exactly one distinct target")
    T = targets[0]
    if not 4 * T < problem.omega0:
        raise ConfigError(f"target T={T:g} needs w_-1 = 4T below w0={problem.omega0:g}")
    flag = problem.check_regime(T)

    candidates = []
    for fam in problem.families:
        design = _design_sinusoidal if fam == "sinusoidal" else _design_pipulse
        mod, seed, trace = design(problem, T)
        H, H_seed = _H(problem, mod, T), _H(problem, seed, T)
        if H < H_seed:  # never hand back something worse than the seed
            mod, H = seed, H_seed
        candidates.append((H, fam, mod, seed, H_seed, trace))
    H, fam, mod, seed, H_seed, trace = max(candidates, key=lambda c: c[0])

    return DesignResult(
        modulation=mod,
        achieved=_achieved(problem, mod, [T]),
        peaks=_peaks_near(problem, mod, [T]),
        trace=trace,
        seed_modulation=seed,
        seed_H=[H_seed],
        meta={
            "objective": problem.objective,
            "family": fam,
            "family_H": {c[1]: c[0] for c in candidates},
            "regime": [flag],
        },
    )


# ------------------------------------------------------------------ multi peak


def harmonic_geometry(targets, omega0, l_max=None):
    """Integer (l, l') and Delta placing w0 - l'Delta = 4T1 and w0 - l Delta ~ 4T2."""
    T1, T2 = targets[0], targets[1]
    if not 4 * T2 < omega0:
        raise ConfigError("harmonic targets need 4T below w0")
    out = []
    l_max = l_max or 160
    for lp in range(2, l_max + 1):
        Delta = (omega0 - 4 * T1) / lp
        l = int(round((omega0 - 4 * T2) / Delta))
        if 1 <= l < lp and lp * Delta < omega0:
            out.append((l, lp, Delta))
    if not out:
        raise ConfigError("no integer harmonic geometry satisfies max harmonic * Delta < w0")
    return out


def design_multi_peak(problem: DesignProblem, l_max=None) -> DesignResult:
    targets = problem.unique_targets()
    if len(targets) == 1:
        return design_single_peak(problem)
    if len(targets) == 2:
        targets_h = [targets[0], targets[0]]
    elif len(targets) == 3:
        targets_h = targets[:2]
    else:
        raise ConfigError("multi-peak design supports two or three distinct targets")
    flags = [problem.check_regime(T) for T in targets]
    w0, mu_max = problem.omega0, problem.mu_max

    def score(mod):
        f = _surrogate(problem, mod)
        return min(f(T) * T * T for T in targets)

    # integer search at a fixed amplitude pair; ties go to the smaller l
    best = None
    for l, lp, Delta in harmonic_geometry(targets_h, w0, l_max):
        comps = {lp: mu_max} if l == lp or len(targets) == 2 else {l: mu_max, lp: mu_max / 2}
        try:
            s = score(Modulation.multi_harmonic(w0, Delta, comps))
        except ThermometryError:
            continue
        if best is None or s > best[0]:
            best = (s, l, lp, Delta)
    if best is None:
        raise ConfigError("no feasible harmonic geometry for these targets")
    _, l, lp, Delta0 = best
    two = len(targets) == 3

    def make(z):
        comps = {lp: float(z[1]) * mu_max}
        if two:
            comps[l] = float(z[0]) * mu_max
        return Modulation.multi_harmonic(w0, float(z[2]) * Delta0, comps)

    def cost(z):
        s = score(make(z))
        return -math.log(s) if s > 0 else math.inf

    z0 = [1.0, 0.5, 1.0] if two else [0.0, 1.0, 1.0]
    seed = make(z0)
    dmax = (1 - 1e-9) / (lp * Delta0 / w0)
    res, trace = _simplex(_guarded(cost), z0, [(0.0, 1.0), (0.0, 1.0), (0.9, min(1.1, dmax))], problem.seed)
    mod = make(res.x)
    if score(mod) < score(seed):
        mod = seed
    return DesignResult(
        modulation=mod,
        achieved=_achieved(problem, mod, targets),
        peaks=_peaks_near(problem, mod, targets),
        trace=trace,
        seed_modulation=seed,
        seed_H=[_H(problem, seed, T) for T in targets],
        meta={"objective": problem.objective, "family": "multiharmonic", "l": l, "l_prime": lp,
              "regime": flags},
    )
