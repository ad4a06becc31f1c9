"""Data tables behind the three figure presets."""

from __future__ import annotations

import numpy as np

from . import config
from .modulation import Modulation, SidebandSet, sideband_weights
from .qfi import error_bound, no_control_qfi, qfi
from .scan import SCAN_COLUMNS, scan_temperatures


def _no_control(Ts, omega0=1.0):
    H = np.array([no_control_qfi(omega0, T) for T in Ts])
    xi = np.array([error_bound(h, T) for h, T in zip(H, Ts)])
    return H, xi


def fig1_table(cfg=None, workers=1):
    """Double-peaked scan (flat bath) with sub-Ohmic and no-control columns."""
    cfg = cfg or config.fig1()
    Ts = cfg.scan.temperatures()
    sb = cfg.sidebands()
    res = scan_temperatures(cfg.probe, cfg.spectrum, sb, Ts, cfg.method, cfg.measurements,
                            workers, cfg.sideband_tol)
    sub = scan_temperatures(cfg.probe, config.subohmic_fig1(), sb, Ts, cfg.method,
                            cfg.measurements, workers, cfg.sideband_tol)
    H0, xi0 = _no_control(Ts, cfg.modulation.omega0)
    header = SCAN_COLUMNS + ("xi_subohmic", "H_nocontrol", "xi_nocontrol")
    rows = [r + (a, b, c) for r, a, b, c in zip(res.rows(), sub.xi, H0, xi0)]
    return header, rows, res


def fig2_table(cfg=None, cutoffs=(1, 3)):
    """xi at T = T_-1 while Delta sweeps T_-1 = (w0 - Delta)/4 over the scan grid."""
    cfg = cfg or config.fig2()
    w0, mu = cfg.modulation.omega0, cfg.modulation.mu
    rows = []
    for T1 in cfg.scan.temperatures():
        Delta = w0 - 4 * T1
        mod = Modulation.sinusoidal(w0, Delta, mu)
        xis = []
        for M in cutoffs:
            sb = sideband_weights(mod, M)
            xis.append(qfi(cfg.probe, cfg.spectrum, sb, T1, cfg.method, cfg.measurements,
                           tol=cfg.sideband_tol).xi)
        rows.append((T1, Delta, *xis, error_bound(no_control_qfi(w0, T1), T1, cfg.measurements)))
    header = ("T_m1", "Delta") + tuple(f"xi_M{M}" for M in cutoffs) + ("xi_nocontrol",)
    return header, rows


def fig3_table(cfg=None, workers=1):
    """Multi-harmonic scan with the unmodulated comparison columns."""
    cfg = cfg or config.fig3()
    Ts = cfg.scan.temperatures()
    res = scan_temperatures(cfg.probe, cfg.spectrum, cfg.sidebands(), Ts, cfg.method,
                            cfg.measurements, workers, cfg.sideband_tol)
    H0, xi0 = _no_control(Ts, cfg.modulation.omega0)
    header = SCAN_COLUMNS + ("H_nocontrol", "xi_nocontrol")
    rows = [r + (a, b) for r, a, b in zip(res.rows(), H0, xi0)]
    return header, rows, res


def unmodulated(omega0=1.0) -> SidebandSet:
    return SidebandSet.unmodulated(omega0)
