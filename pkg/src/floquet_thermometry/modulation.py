"""Periodic frequency modulations and their Floquet sideband weights.

A modulation w(t) = w0 + sum_k [s_k sin(k D t) + c_k cos(k D t)] dresses the
probe transition into sidebands at w_m = w0 + m D with weights

    P_m = | (1/tau) int_0^tau exp(-i int_0^t (w(t') - w0) dt') exp(i m D t) dt |^2.

Two independent routes compute P_m: numerical quadrature over one period
(any kind) and Bessel-function closed forms (sinusoidal, multi-harmonic,
pi-pulse).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize, special

from .errors import ConfigError, ConvergenceError

KINDS = ("generic", "sinusoidal", "multiharmonic", "pipulse")


@dataclass(frozen=True)
class Modulation:
    """Periodic diagonal modulation of the probe frequency.

    ``harmonics`` holds (k, s_k, c_k) triples of the Fourier series of
    w(t) - w0. ``components`` holds (l, mu_l) pairs for the multi-harmonic
    kind, where mu_l is the modulation index of harmonic l (amplitude
    mu_l * l * Delta). Use the classmethod constructors.
    """

    omega0: float
    Delta: float
    kind: str = "generic"
    harmonics: tuple = ()
    mu: float | None = None
    components: tuple = ()

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown modulation kind {self.kind!r}")
        if not self.omega0 > 0:
            raise ConfigError(f"omega0 must be > 0, got {self.omega0}")
        if not self.Delta > 0:
            raise ConfigError(f"Delta must be > 0, got {self.Delta}")
        top = self.max_harmonic if self.kind != "pipulse" else 1
        if top * self.Delta >= self.omega0:
            raise ConfigError(
                f"resource bound violated: max harmonic {top} * Delta {self.Delta} >= omega0 {self.omega0}"
            )
        for k, _, _ in self.harmonics:
            if int(k) != k or k < 1:
                raise ConfigError(f"harmonic index must be a positive integer, got {k}")

    @classmethod
    def sinusoidal(cls, omega0, Delta, mu):
        if not 0 <= mu < 1:
            raise ConfigError(f"sinusoidal modulation needs 0 <= mu < 1, got {mu}")
        return cls(omega0, Delta, "sinusoidal", ((1, mu * Delta, 0.0),) if mu else (), float(mu))

    @classmethod
    def multi_harmonic(cls, omega0, Delta, components):
        """components: (l, mu_l) pairs or a {l: mu_l} mapping of modulation indices."""
        if isinstance(components, dict):
            components = components.items()
        comps = tuple((int(l), float(mu)) for l, mu in components)
        ls = [l for l, _ in comps]
        if len(set(ls)) != len(ls):
            raise ConfigError("multi-harmonic components need distinct harmonic indices")
        for l, mu in comps:
            if l < 1 or mu < 0:
                raise ConfigError(f"bad multi-harmonic component (l={l}, mu={mu})")
        harm = tuple((l, mu * l * Delta, 0.0) for l, mu in comps if mu)
        return cls(omega0, Delta, "multiharmonic", harm, None, comps)

    @classmethod
    def pi_pulse(cls, omega0, Delta):
        return cls(omega0, Delta, "pipulse")

    @classmethod
    def generic(cls, omega0, Delta, harmonics):
        return cls(omega0, Delta, "generic", tuple((int(k), float(s), float(c)) for k, s, c in harmonics))

    @property
    def tau(self) -> float:
        return 2 * math.pi / self.Delta

    @property
    def max_harmonic(self) -> int:
        return max((int(k) for k, s, c in self.harmonics if s or c), default=0)

    def phase(self, theta):
        """Accumulated phase int_0^t (w - w0) dt' at theta = Delta t, constant dropped.

        Accepts complex theta (used for contour-shifted quadrature).
        """
        if self.kind == "pipulse":
            th = np.mod(np.real(theta), 2 * math.pi)
            return np.where(th < math.pi, 0.0, math.pi)
        out = np.zeros_like(np.asarray(theta, dtype=complex))
        for k, s, c in self.harmonics:
            kD = k * self.Delta
            out = out - (s / kD) * np.cos(k * theta) + (c / kD) * np.sin(k * theta)
        return out

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "omega0": self.omega0, "Delta": self.Delta}
        if self.kind == "sinusoidal":
            d["mu"] = self.mu
        elif self.kind == "multiharmonic":
            d["harmonics"] = [{"l": l, "mu_l": mu} for l, mu in self.components]
        elif self.kind == "generic":
            d["harmonics"] = [{"m": k, "s": s, "c": c} for k, s, c in self.harmonics]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Modulation":
        try:
            kind = str(d.get("kind", "sinusoidal")).lower().replace("-", "").replace("_", "")
            w0, D = float(d["omega0"]), float(d["Delta"])
            if kind == "sinusoidal":
                return cls.sinusoidal(w0, D, float(d["mu"]))
            if kind == "multiharmonic":
                return cls.multi_harmonic(w0, D, [(h["l"], h["mu_l"]) for h in d["harmonics"]])
            if kind == "pipulse":
                return cls.pi_pulse(w0, D)
            if kind == "generic":
                return cls.generic(
                    w0, D, [(h["m"], h.get("s", 0.0), h.get("c", 0.0)) for h in d["harmonics"]]
                )
        except KeyError as exc:
            raise ConfigError(f"modulation block missing field {exc}") from None
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(f"bad modulation block: {exc}") from None
        raise ConfigError(f"unknown modulation kind {d.get('kind')!r}")


def eval_omega(mod: Modulation, t):
    """Instantaneous frequency w(t).

    For the pi-pulse kind the phase flips are delta kicks; between kicks
    the frequency is w0, which is what this returns.
    """
    t = np.asarray(t, dtype=float)
    out = np.full_like(t, mod.omega0)
    for k, s, c in mod.harmonics:
        out = out + s * np.sin(k * mod.Delta * t) + c * np.cos(k * mod.Delta * t)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SidebandSet:
    """Sidebands m in [-M, M] with frequencies w0 + m Delta and weights P_m."""

    omega0: float
    Delta: float
    m: np.ndarray
    P: np.ndarray
    method: str = "analytic"
    tail_bound: float = 0.0
    omega: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        m = np.asarray(self.m, dtype=int)
        P = np.asarray(self.P, dtype=float)
        if m.shape != P.shape:
            raise ValueError("m and P must have the same shape")
        if np.any(P < 0):
            raise ValueError("sideband weights must be non-negative")
        w = self.omega0 + m * self.Delta
        for a in (m, P, w):
            a.setflags(write=False)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "omega", w)

    @property
    def M(self) -> int:
        return int(np.max(np.abs(self.m))) if self.m.size else 0

    @property
    def deficit(self) -> float:
        return max(0.0, 1.0 - math.fsum(self.P))

    def is_complete(self, tol: float) -> bool:
        return self.deficit <= tol

    def weight(self, m: int) -> float:
        hit = np.nonzero(self.m == m)[0]
        return float(self.P[hit[0]]) if hit.size else 0.0

    def restrict(self, M: int) -> "SidebandSet":
        keep = np.abs(self.m) <= M
        return SidebandSet(self.omega0, self.Delta, self.m[keep], self.P[keep], self.method, self.tail_bound)

    @classmethod
    def unmodulated(cls, omega0: float, Delta: float = 1.0) -> "SidebandSet":
        return cls(omega0, Delta, np.array([0]), np.array([1.0]))


def default_cutoff(mod: Modulation) -> int:
    if mod.kind == "pipulse":
        # square-wave tail ~ 4/(pi^2 M); 511 keeps it below 1e-3
        return 511
    return max(8, mod.max_harmonic + 8)


# ---------------------------------------------------------------- quadrature


def _smooth_coefficient(mod: Modulation, m: int, rtol: float, kmin: int, kmax: int = 22):
    """Fourier coefficient c_m of exp(-i phase) by trapezoid on a shifted contour.

    Shifting theta -> theta + i*sigma leaves the period integral unchanged
    (the integrand is entire and periodic) but brings the integrand's size
    down to |c_m|, so tiny weights keep full relative precision.
    """
    probe = np.linspace(0.0, 2 * math.pi, 256, endpoint=False)
    lmin = min((int(k) for k, s, c in mod.harmonics if s or c), default=1)

    def logsize(sig):
        z = probe + 1j * sig
        return float(np.max(np.imag(mod.phase(z)))) - m * sig

    sigma = 0.0
    if m != 0 and mod.harmonics:
        hi = 40.0 / lmin
        lo, hi = (0.0, hi) if m > 0 else (-hi, 0.0)
        sigma = optimize.minimize_scalar(logsize, bounds=(lo, hi), method="bounded",
                                         options={"xatol": 1e-6}).x

    prev = None
    for k in range(kmin, kmax + 1):
        K = 2**k
        z = np.arange(K) * (2 * math.pi / K) + 1j * sigma
        expo = -1j * mod.phase(z) + 1j * m * z
        shift = np.max(expo.real)
        scale = math.exp(shift)
        c = np.mean(np.exp(expo - shift)) * scale
        P = abs(c) ** 2
        # rounding floor: |c| is only known to ~eps * scale
        dc = 1e-14 * scale
        if prev is not None and (abs(P - prev) <= rtol * P + 2 * math.sqrt(P) * dc + dc * dc or P < 1e-280):
            return P
        prev = P
    raise ConvergenceError(f"sideband quadrature for m={m} did not converge by 2^{kmax} samples")


def _pipulse_coefficients(ms, rtol):
    # phase is piecewise constant: 0 on [0, pi), pi on [pi, 2pi); composite
    # Gauss-Legendre on each half, panel count doubled until converged
    x, w = np.polynomial.legendre.leggauss(16)
    panels = max(4, int(np.max(np.abs(ms))))
    prev = None
    while panels <= 2**15:
        edges = np.linspace(0.0, math.pi, panels + 1)
        h = edges[1] - edges[0]
        th = (edges[:-1, None] + (x[None, :] + 1) * (h / 2)).ravel()
        wt = np.tile(w * (h / 2), panels)
        signed = np.concatenate([wt, -wt])
        nodes = np.concatenate([th, th + math.pi])
        P = np.empty(len(ms))
        for i in range(0, len(ms), 64):
            blk = ms[i:i + 64]
            P[i:i + 64] = np.abs(np.exp(1j * np.outer(blk, nodes)) @ signed / (2 * math.pi)) ** 2
        if prev is not None and np.all(np.abs(P - prev) <= rtol * P + 1e-28):
            return P
        prev = P
        panels *= 2
    raise ConvergenceError("pi-pulse sideband quadrature did not converge")


def sideband_weights_quadrature(mod: Modulation, M: int | None = None, rtol: float = 1e-12) -> SidebandSet:
    """P_m for |m| <= M by trapezoidal quadrature over one period.

    The sample count doubles until successive P_m agree to ``rtol``.
    """
    M = default_cutoff(mod) if M is None else int(M)
    if M < 1:
        raise ConfigError("sideband cutoff M must be >= 1")
    ms = np.arange(-M, M + 1)
    if mod.kind == "pipulse":
        P = _pipulse_coefficients(ms, rtol)
    else:
        band = M + 4 * max(mod.max_harmonic, 1)
        kmin = max(5, int(math.ceil(math.log2(2 * band))))
        P = np.array([_smooth_coefficient(mod, int(m), rtol, kmin) for m in ms])
    return SidebandSet(mod.omega0, mod.Delta, ms, P, method="quadrature")


# ------------------------------------------------------------------ analytic


def _bessel_order_cutoff(mu: float, eps: float = 1e-17) -> int:
    a = int(math.ceil(mu)) + 1
    while abs(special.jv(a, mu)) > eps:
        a += 1
    return a


def sideband_weights_analytic(mod: Modulation, M: int | None = None) -> SidebandSet:
    """Closed-form P_m.

    Sinusoidal: J_m(mu)^2. Multi-harmonic: squared modulus of the sum over
    integer tuples (a_l) with sum a_l*l = m of prod i^a J_a(mu_l).
    Pi-pulse: 4/(pi^2 m^2) for odd m, zero otherwise.
    """
    M = default_cutoff(mod) if M is None else int(M)
    if M < 1:
        raise ConfigError("sideband cutoff M must be >= 1")
    ms = np.arange(-M, M + 1)
    tail = 0.0
    if mod.kind == "sinusoidal":
        P = special.jv(ms, mod.mu) ** 2
    elif mod.kind == "multiharmonic":
        coeffs = {0: 1.0 + 0j}
        for l, mu in mod.components:
            if mu == 0:
                continue
            A = _bessel_order_cutoff(mu)
            a = np.arange(-A, A + 1)
            amp = (1j) ** (a % 4) * special.jv(a, mu)
            tail += 2 * abs(special.jv(A + 1, mu)) ** 2
            new = {}
            for shift, v in coeffs.items():
                for ai, ci in zip(a, amp):
                    key = shift + int(ai) * l
                    new[key] = new.get(key, 0.0) + v * ci
            coeffs = new
        P = np.array([abs(coeffs.get(int(m), 0.0)) ** 2 for m in ms])
    elif mod.kind == "pipulse":
        odd = ms % 2 == 1
        P = np.zeros(ms.shape)
        P[odd] = 4.0 / (math.pi**2 * ms[odd].astype(float) ** 2)
    else:
        raise ConfigError("generic modulations have no closed-form weights; use quadrature")
    return SidebandSet(mod.omega0, mod.Delta, ms, P, method="analytic", tail_bound=tail)


def sideband_weights(mod: Modulation, M: int | None = None) -> SidebandSet:
    """Analytic weights where available, quadrature otherwise."""
    if mod.kind == "generic":
        return sideband_weights_quadrature(mod, M)
    return sideband_weights_analytic(mod, M)
