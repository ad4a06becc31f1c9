"""Temperature scans of the QFI, peak location and CSV output."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial

import numpy as np
from scipy import optimize

from .qfi import dominance_at_t_minus1, qfi
from .steadystate import DEFAULT_SIDEBAND_TOL

SCAN_COLUMNS = ("T", "H", "H_m1", "H_0", "H_p1", "H_rem", "xi", "R")


def fmt(v: float) -> str:
    """Fixed 17-significant-digit rendering, 'inf'/'-inf'/'nan' spelled out."""
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return "%.17g" % v


def write_csv(path_or_fh, header, rows):
    lines = [",".join(header)] + [",".join(fmt(v) for v in row) for row in rows]
    text = "\n".join(lines) + "\n"
    if hasattr(path_or_fh, "write"):
        path_or_fh.write(text)
    else:
        with open(path_or_fh, "w", newline="") as fh:
            fh.write(text)


@dataclass
class ScanResult:
    T: np.ndarray
    H: np.ndarray
    H_m1: np.ndarray
    H_0: np.ndarray
    H_p1: np.ndarray
    H_rem: np.ndarray
    xi: np.ndarray
    R: float

    def rows(self):
        for i in range(len(self.T)):
            yield (self.T[i], self.H[i], self.H_m1[i], self.H_0[i], self.H_p1[i],
                   self.H_rem[i], self.xi[i], self.R)

    def to_csv(self, path_or_fh):
        write_csv(path_or_fh, SCAN_COLUMNS, self.rows())

    def to_dict(self) -> dict:
        d = {k: [float(v) for v in getattr(self, k)] for k in SCAN_COLUMNS[:-1]}
        d["R"] = float(self.R)
        return d


def _point(T, probe, spec, sidebands, method, measurements, tol):
    rep = qfi(probe, spec, sidebands, T, method=method, measurements=measurements,
              tol=tol, with_components=True)
    c = rep.components
    return rep.H, c["H_m1"], c["H_0"], c["H_p1"], c["H_rem"], rep.xi


def scan_temperatures(probe, spec, sidebands, Ts, method="auto", measurements=1,
                      workers=1, tol=DEFAULT_SIDEBAND_TOL) -> ScanResult:
    """QFI and its sideband decomposition on a temperature grid.

    R is a property of the modulation, evaluated once at T_-1 and repeated.
    """
    Ts = np.asarray(Ts, dtype=float)
    fn = partial(_point, probe=probe, spec=spec, sidebands=sidebands, method=method,
                 measurements=measurements, tol=tol)
    if workers > 1 and len(Ts) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            out = list(pool.map(fn, Ts, chunksize=max(1, len(Ts) // (4 * workers))))
    else:
        out = [fn(T) for T in Ts]
    cols = np.array(out, dtype=float).reshape(len(Ts), 6).T
    R = dominance_at_t_minus1(probe, spec, sidebands, method=method, tol=tol)
    return ScanResult(Ts, *cols, R)


def local_maxima(H) -> np.ndarray:
    """Indices i with H[i-1] < H[i] >= H[i+1] (interior points only)."""
    H = np.asarray(H)
    i = np.arange(1, len(H) - 1)
    return i[(H[i] > H[i - 1]) & (H[i] >= H[i + 1])]


def refine_peak(f, T_lo, T_mid, T_hi, xtol=1e-10) -> float:
    """Golden-section search on log T inside a bracket from a discrete maximum."""
    g = lambda s: -f(math.exp(s))  # noqa: E731
    res = optimize.minimize_scalar(
        g, bracket=(math.log(T_lo), math.log(T_mid), math.log(T_hi)), method="golden",
        tol=xtol,
    )
    return math.exp(res.x)


def find_peaks(f, Ts, H=None, refine=True) -> list[float]:
    """Temperatures of the local maxima of f on (and between) the grid Ts."""
    Ts = np.asarray(Ts, dtype=float)
    if H is None:
        H = np.array([f(T) for T in Ts])
    idx = local_maxima(H)
    if not refine:
        return [float(Ts[i]) for i in idx]
    return [refine_peak(f, Ts[i - 1], Ts[i], Ts[i + 1]) for i in idx]


def lowest_temperature_below(Ts, xi, threshold) -> float:
    """Smallest grid temperature whose error bound is at or below ``threshold``."""
    ok = np.asarray(xi) <= threshold
    if not np.any(ok):
        return math.inf
    return float(np.asarray(Ts)[ok].min())
