"""Sideband-summed Lindblad dynamics of the truncated probe.

d rho/dt = -i[w_eff n, rho] + C1 D[rho] + C2 D'[rho],
D[rho]  = a rho a+ - {a+ a, rho}/2,   D'[rho] = a+ rho a - {a a+, rho}/2.

The dissipator is phase covariant, so the coherent term is handled exactly
by integrating in the frame rotating at w_eff and rotating back at
checkpoints. Time is measured in units of 1/C1 inside the integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from . import steadystate as ss
from .errors import ConvergenceError

POSITIVITY_TOL = 1e-9


def build_rates(spec, sidebands, T, tol=ss.DEFAULT_SIDEBAND_TOL) -> tuple[float, float]:
    """Total downward (C1) and upward (C2) rates summed over sidebands."""
    ss._check_complete(sidebands, tol)
    if not T > 0:
        raise ValueError("temperature must be > 0")
    w = sidebands.omega
    pg = sidebands.P * spec(np.abs(w))
    boltz = np.exp(-np.abs(w) / T)
    pos = w >= 0
    C1 = math.fsum(pg[pos]) + math.fsum(pg[~pos] * boltz[~pos])
    C2 = math.fsum(pg[pos] * boltz[pos]) + math.fsum(pg[~pos])
    if C1 == 0 and C2 == 0:
        raise ss.ProbeDecoupledError("probe decoupled: every G(|w_m|) P_m vanishes")
    return C1, C2


def ladder(n_levels: int) -> np.ndarray:
    """Truncated annihilation operator."""
    return np.diag(np.sqrt(np.arange(1, n_levels, dtype=float)), 1)


def ground_state(n_levels: int) -> np.ndarray:
    rho = np.zeros((n_levels, n_levels), complex)
    rho[0, 0] = 1
    return rho


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    return 0.5 * float(np.abs(np.linalg.eigvalsh(a - b)).sum())


def dissipator(rho, a, r):
    """D[rho] + r D'[rho] for Hermitian rho (units of C1)."""
    ad = a.conj().T
    n = ad @ a
    nn = a @ ad
    return (a @ rho @ ad - 0.5 * (n @ rho + rho @ n)
            + r * (ad @ rho @ a - 0.5 * (nn @ rho + rho @ nn)))


def _fast_dissipator(L, r):
    """Elementwise form of ``dissipator`` on the truncated ladder, O(L^2)."""
    k = np.arange(L, dtype=float)
    sq = np.sqrt(k)
    lower = np.outer(sq[1:], sq[1:])  # a rho a+ couples (i+1, j+1) -> (i, j)
    n_down = k
    n_up = np.where(k < L - 1, k + 1, 0.0)  # a a+ is singular at the cutoff
    decay = -0.5 * ((n_down[:, None] + n_down[None, :]) + r * (n_up[:, None] + n_up[None, :]))
    gain_up = r * lower

    def f(rho):
        out = decay * rho
        out[:-1, :-1] += lower * rho[1:, 1:]
        out[1:, 1:] += gain_up * rho[:-1, :-1]
        return out

    return f


@dataclass(frozen=True)
class Checkpoint:
    t: float
    trace_distance: float
    trace: float
    min_eig: float


@dataclass
class LindbladRun:
    C1: float
    C2: float
    t_final: float
    integrator: str
    log: list[Checkpoint]
    rho_final: np.ndarray
    steady: np.ndarray
    leak: float
    meta: dict = field(default_factory=dict)

    @property
    def final_distance(self) -> float:
        return self.log[-1].trace_distance

    def rows(self):
        for c in self.log:
            yield (c.t, c.trace_distance, c.trace, c.min_eig)


LOG_COLUMNS = ("t", "trace_distance", "trace", "min_eig")


def evolve(rho0, rates, t_final=None, checkpoints=41, omega_eff=0.0, method="RK45",
           atol=1e-12, rtol=1e-10) -> LindbladRun:
    """Integrate from rho0 and log the distance to the truncated Gibbs ladder."""
    C1, C2 = rates
    if not C1 > C2 > 0:
        raise ValueError(f"need C1 > C2 > 0, got C1={C1}, C2={C2}")
    rho0 = np.asarray(rho0, dtype=complex)
    L = rho0.shape[0]
    if rho0.shape != (L, L) or not np.allclose(rho0, rho0.conj().T, atol=1e-12):
        raise ValueError("initial state must be a square Hermitian matrix")
    if abs(np.trace(rho0).real - 1) > 1e-10 or np.linalg.eigvalsh(rho0).min() < -POSITIVITY_TOL:
        raise ValueError("initial state must be a unit-trace positive matrix")
    r = C2 / C1
    if t_final is None:
        t_final = 40.0 / (C1 - C2)
    s_final = C1 * t_final
    ts = np.linspace(0.0, s_final, checkpoints) if np.ndim(checkpoints) == 0 else C1 * np.asarray(checkpoints)
    gen = _fast_dissipator(L, r)

    def rhs(_, y):
        return gen(y.reshape(L, L)).ravel()

    # the fastest modes decay at ~(L-1)(1+r); cap the step inside the explicit stability region
    sol = solve_ivp(rhs, (0.0, ts[-1]), rho0.ravel(), method=method, t_eval=ts, atol=atol,
                    rtol=rtol, max_step=3.0 / ((L - 1) * (1 + r)))
    if sol.status != 0:
        raise ConvergenceError(f"Lindblad integration failed: {sol.message}")

    steady = np.diag(np.exp(ss.log_populations(math.log(r), L))).astype(complex)
    levels = np.arange(L)
    log = []
    rho = rho0
    for s, y in zip(sol.t, sol.y.T):
        t = s / C1
        angle = math.fmod(omega_eff * t, 2 * math.pi)
        rot = np.exp(-1j * np.fmod(angle * levels, 2 * math.pi))
        rho = y.reshape(L, L) * np.outer(rot, rot.conj())
        rho = 0.5 * (rho + rho.conj().T)
        ev = np.linalg.eigvalsh(rho)
        cp = Checkpoint(t, trace_distance(rho, steady), float(np.trace(rho).real), float(ev.min()))
        log.append(cp)
        if cp.min_eig < -POSITIVITY_TOL:
            raise ConvergenceError(f"positivity lost at t={t:.6g}: min eigenvalue {cp.min_eig:.3g}")
    leak = float(rho[-1, -1].real)
    return LindbladRun(C1, C2, float(ts[-1] / C1), f"solve_ivp/{method}", log, rho, steady, leak)


def birth_death_generator(rates, n_levels: int) -> np.ndarray:
    """Population generator of the truncated ladder (columns sum to zero)."""
    C1, C2 = rates
    n = np.arange(1, n_levels, dtype=float)
    Q = np.zeros((n_levels, n_levels))
    Q[np.arange(n_levels - 1), np.arange(1, n_levels)] = C1 * n  # n -> n-1
    Q[np.arange(1, n_levels), np.arange(n_levels - 1)] = C2 * n  # n-1 -> n
    Q -= np.diag(Q.sum(axis=0))
    return Q


def populations_expm(p0, rates, t) -> np.ndarray:
    """Populations at time t from the matrix exponential of the birth-death chain."""
    p0 = np.asarray(p0, dtype=float)
    return expm(birth_death_generator(rates, len(p0)) * t) @ p0


def secular_ratio(rates, sidebands) -> float:
    """C1 * max(tau, 1/min|w_m|); small values support the secular treatment."""
    C1 = rates[0]
    tau = 2 * math.pi / sidebands.Delta if sidebands.Delta > 0 else 0.0
    live = sidebands.omega[sidebands.P > 0]
    wmin = np.abs(live).min()
    return C1 * max(tau, 1 / wmin if wmin > 0 else math.inf)


def verify(spec, sidebands, T, N_max=60, rho0=None, checkpoints=41, t_final=None,
           tol=ss.DEFAULT_SIDEBAND_TOL) -> LindbladRun:
    """Relax from the ground state (or rho0) and compare with the analytic ladder."""
    rates = build_rates(spec, sidebands, T, tol)
    L = N_max + 1
    rho0 = ground_state(L) if rho0 is None else rho0
    omega_eff = -T * math.log(rates[1] / rates[0])
    run = evolve(rho0, rates, t_final, checkpoints, omega_eff)
    p_expm = populations_expm(np.diag(rho0).real, rates, run.t_final)
    run.meta.update(
        omega_eff=omega_eff,
        T=T,
        expm_population_error=float(np.abs(p_expm - np.diag(run.rho_final).real).max()),
        secular_ratio=secular_ratio(rates, sidebands),
    )
    run.meta["secular_ok"] = run.meta["secular_ratio"] < 1e-2
    return run
