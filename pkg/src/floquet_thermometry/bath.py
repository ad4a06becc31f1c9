"""Bath spectral-response functions G(w) and their KMS extension.

All spectra accept scalars or numpy arrays of non-negative frequencies.
Units: hbar = k_B = 1.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError


def _check_nonnegative(omega):
    w = np.asarray(omega, dtype=float)
    if np.any(w < 0) or np.any(np.isnan(w)):
        raise ValueError("spectral_response is defined for omega >= 0 only")
    return w


@dataclass(frozen=True)
class SubOhmic:
    """G(w) = gamma * w**s / wc**(s-1) * exp(-w/wc).

    Sub-Ohmic for s < 1, Ohmic for s == 1, super-Ohmic for s > 1.
    """

    s: float
    omega_c: float
    gamma: float

    def __post_init__(self):
        if not self.s > 0:
            raise ConfigError(f"exponent s must be > 0, got {self.s}")
        if not self.omega_c > 0:
            raise ConfigError(f"cutoff omega_c must be > 0, got {self.omega_c}")
        if not self.gamma >= 0:
            raise ConfigError(f"gamma must be >= 0, got {self.gamma}")

    def __call__(self, omega):
        w = _check_nonnegative(omega)
        return self.gamma * w**self.s * self.omega_c ** (1.0 - self.s) * np.exp(-w / self.omega_c)


@dataclass(frozen=True)
class NearlyFlat:
    """Flat plateau G0 on [omega_min, omega_c], hard zero outside."""

    G0: float
    omega_min: float
    omega_c: float

    def __post_init__(self):
        if not self.G0 >= 0:
            raise ConfigError(f"G0 must be >= 0, got {self.G0}")
        if not 0 <= self.omega_min < self.omega_c:
            raise ConfigError("need 0 <= omega_min < omega_c")

    def __call__(self, omega):
        w = _check_nonnegative(omega)
        return np.where((w >= self.omega_min) & (w <= self.omega_c), self.G0, 0.0)


@dataclass(frozen=True)
class Tabulated:
    """Piecewise-linear interpolation through (omega, G) points.

    Frequencies must be strictly increasing. Evaluating outside the table
    raises instead of extrapolating.
    """

    omega: tuple
    G: tuple
    _w: np.ndarray = field(init=False, repr=False, compare=False)
    _g: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        w = np.asarray(self.omega, dtype=float)
        g = np.asarray(self.G, dtype=float)
        if w.ndim != 1 or w.shape != g.shape or w.size < 2:
            raise ConfigError("tabulated spectrum needs two equal-length columns with >= 2 rows")
        if np.any(w < 0) or np.any(g < 0):
            raise ConfigError("tabulated spectrum must have omega >= 0 and G >= 0")
        if np.any(np.diff(w) <= 0):
            raise ConfigError("tabulated omega must be strictly increasing")
        object.__setattr__(self, "omega", tuple(w))
        object.__setattr__(self, "G", tuple(g))
        object.__setattr__(self, "_w", w)
        object.__setattr__(self, "_g", g)

    def __call__(self, omega):
        w = _check_nonnegative(omega)
        if np.any(w < self._w[0]) or np.any(w > self._w[-1]):
            raise ValueError(
                f"omega outside tabulated range [{self._w[0]}, {self._w[-1]}]"
            )
        return np.interp(w, self._w, self._g)

    @classmethod
    def from_csv(cls, path) -> "Tabulated":
        with open(Path(path), newline="") as fh:
            reader = csv.reader(fh)
            header = [h.strip() for h in next(reader)]
            if header != ["omega", "G"]:
                raise ConfigError(f"{path}: expected header 'omega,G', got {','.join(header)}")
            rows = [(float(a), float(b)) for a, b in reader if a.strip()]
        w, g = zip(*rows) if rows else ((), ())
        return cls(w, g)


BathSpectrum = SubOhmic | NearlyFlat | Tabulated


def spectral_response(spec: BathSpectrum, omega):
    """G(omega) for omega >= 0. Returns a float for scalar input."""
    out = spec(omega)
    return float(out) if np.ndim(out) == 0 else out


def kms_response(spec: BathSpectrum, omega, T: float):
    """G extended to negative frequencies by G(-w) = G(w) exp(-w/T)."""
    if not T > 0:
        raise ValueError(f"temperature must be > 0, got {T}")
    w = np.asarray(omega, dtype=float)
    a = np.abs(w)
    g = spec(a)
    out = np.where(w >= 0, g, g * np.exp(-a / T))
    return float(out) if np.ndim(out) == 0 else out


def nfbs_limit(s: float, omega_c: float, gamma: float) -> NearlyFlat:
    """Nearly flat spectrum reached from the sub-Ohmic family as s -> 0.

    The plateau height is the sub-Ohmic maximum, G(s*wc) = gamma s^s wc e^-s,
    and the lower edge sits at that maximum.
    """
    if not 0 < s < 1:
        raise ConfigError(f"nearly-flat limit needs 0 < s < 1, got s={s}")
    if not omega_c > 0 or not gamma > 0:
        raise ConfigError("omega_c and gamma must be positive")
    G0 = gamma * s**s * omega_c * math.exp(-s)
    return NearlyFlat(G0=G0, omega_min=s * omega_c, omega_c=omega_c)


def spectrum_from_dict(d: dict, base_dir=None) -> BathSpectrum:
    """Build a spectrum from a config block.

    family: "subohmic" (s, omega_c, gamma), "nfbs" (G0, omega_min, omega_c),
    "nfbs_limit" (s, omega_c, gamma), "tabulated" (csv path, or omega/G lists).
    """
    try:
        family = d["family"].lower()
        if family in ("subohmic", "sub_ohmic", "ohmic"):
            return SubOhmic(float(d["s"]), float(d["omega_c"]), float(d["gamma"]))
        if family in ("nfbs", "nearly_flat", "nearlyflat"):
            return NearlyFlat(float(d["G0"]), float(d["omega_min"]), float(d["omega_c"]))
        if family == "nfbs_limit":
            return nfbs_limit(float(d["s"]), float(d["omega_c"]), float(d["gamma"]))
        if family == "tabulated":
            if "csv" in d:
                p = Path(d["csv"])
                if base_dir is not None and not p.is_absolute():
                    p = Path(base_dir) / p
                return Tabulated.from_csv(p)
            return Tabulated(tuple(d["omega"]), tuple(d["G"]))
    except KeyError as exc:
        raise ConfigError(f"spectrum block missing field {exc}") from None
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad spectrum block: {exc}") from None
    raise ConfigError(f"unknown spectrum family {d.get('family')!r}")


def spectrum_to_dict(spec: BathSpectrum) -> dict:
    if isinstance(spec, SubOhmic):
        return {"family": "subohmic", "s": spec.s, "omega_c": spec.omega_c, "gamma": spec.gamma}
    if isinstance(spec, NearlyFlat):
        return {"family": "nfbs", "G0": spec.G0, "omega_min": spec.omega_min, "omega_c": spec.omega_c}
    return {"family": "tabulated", "omega": list(spec.omega), "G": list(spec.G)}
