"""JSON run configuration and the built-in figure presets."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bath import SubOhmic, nfbs_limit, spectrum_from_dict
from .errors import ConfigError
from .modulation import Modulation, sideband_weights
from .steadystate import DEFAULT_SIDEBAND_TOL, FiniteN, Oscillator

# flat plateau G0 ~ 1e-9 on [1e-5, 100]
NFBS = dict(family="nfbs_limit", s=1e-7, omega_c=100.0, gamma=1e-11)
SUBOHMIC = dict(family="subohmic", s=0.1, omega_c=100.0, gamma=1e-11)


def probe_from_dict(d: dict):
    kind = str(d.get("kind", "oscillator")).lower()
    try:
        if kind in ("oscillator", "harmonic"):
            n = d.get("N_max")
            return Oscillator(None if n is None else int(n))
        if kind in ("finite", "finiten", "n_level", "nlevel"):
            return FiniteN(int(d["N"]))
    except KeyError as exc:
        raise ConfigError(f"probe block missing field {exc}") from None
    except ValueError as exc:
        raise ConfigError(f"bad probe block: {exc}") from None
    raise ConfigError(f"unknown probe kind {kind!r}")


@dataclass
class ScanGrid:
    T_min: float = 1e-3
    T_max: float = 1.0
    count: int = 301

    def __post_init__(self):
        if not 0 < self.T_min < self.T_max or int(self.count) < 2:
            raise ConfigError("scan grid needs 0 < T_min < T_max and count >= 2")
        self.count = int(self.count)

    def temperatures(self) -> np.ndarray:
        return np.geomspace(self.T_min, self.T_max, self.count)


@dataclass
class RunConfig:
    spectrum: object
    modulation: Modulation | None = None
    probe: object = field(default_factory=Oscillator)
    sideband_cutoff: int | None = None
    sideband_tol: float = DEFAULT_SIDEBAND_TOL
    scan: ScanGrid = field(default_factory=ScanGrid)
    method: str = "auto"
    measurements: int = 1
    temperatures: list = field(default_factory=list)
    lindblad: dict = field(default_factory=dict)
    design: dict = field(default_factory=dict)
    out: str | None = None

    def sidebands(self):
        if self.modulation is None:
            raise ConfigError("this command needs a modulation block")
        return sideband_weights(self.modulation, self.sideband_cutoff)

    @classmethod
    def from_dict(cls, d: dict, base_dir=None) -> "RunConfig":
        if not isinstance(d, dict):
            raise ConfigError("configuration must be a JSON object")
        if "spectrum" not in d:
            raise ConfigError("configuration needs a spectrum block")
        spec = spectrum_from_dict(d["spectrum"], base_dir)
        mod = Modulation.from_dict(d["modulation"]) if "modulation" in d else None
        probe = probe_from_dict(d.get("probe", {}))
        sb = d.get("sidebands", {})
        tol = d.get("tolerances", {})
        method = tol.get("method", d.get("method", "auto"))
        if method not in ("auto", "closed", "population", "fidelity"):
            raise ConfigError(f"unknown QFI method {method!r}")
        try:
            cfg = cls(
                spectrum=spec,
                modulation=mod,
                probe=probe,
                sideband_cutoff=None if sb.get("M") is None else int(sb["M"]),
                sideband_tol=float(tol.get("sideband", sb.get("tol", DEFAULT_SIDEBAND_TOL))),
                scan=ScanGrid(**d.get("scan", {})),
                method=method,
                measurements=int(d.get("measurements", 1)),
                temperatures=[float(t) for t in d.get("temperatures", [])],
                lindblad=dict(d.get("lindblad", {})),
                design=dict(d.get("design", {})),
                out=d.get("output", {}).get("path"),
            )
        except TypeError as exc:
            raise ConfigError(f"bad configuration: {exc}") from None
        if cfg.measurements < 1:
            raise ConfigError("measurements must be a positive integer")
        if any(t <= 0 for t in cfg.temperatures):
            raise ConfigError("temperatures must be positive")
        return cfg


def load_config(path) -> RunConfig:
    p = Path(path)
    try:
        d = json.loads(p.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file {p} not found") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{p}: invalid JSON ({exc})") from None
    return RunConfig.from_dict(d, base_dir=p.parent)


# ------------------------------------------------------------------- presets


def fig1() -> RunConfig:
    return RunConfig(
        spectrum=nfbs_limit(NFBS["s"], NFBS["omega_c"], NFBS["gamma"]),
        modulation=Modulation.sinusoidal(1.0, 0.9, 0.2),
        sideband_cutoff=3,
        scan=ScanGrid(1e-3, 1.0, 301),
    )


def fig2() -> RunConfig:
    # scan block reinterpreted: grid of T_-1 = (w0 - Delta)/4
    return RunConfig(
        spectrum=nfbs_limit(NFBS["s"], NFBS["omega_c"], NFBS["gamma"]),
        modulation=Modulation.sinusoidal(1.0, 0.99, 0.2),
        sideband_cutoff=1,
        scan=ScanGrid(1e-4, 1e-2, 41),
    )


def fig3() -> RunConfig:
    return RunConfig(
        spectrum=nfbs_limit(NFBS["s"], NFBS["omega_c"], NFBS["gamma"]),
        modulation=Modulation.multi_harmonic(1.0, 0.01, {80: 0.394, 99: 0.115}),
        scan=ScanGrid(1e-4, 1.0, 401),
    )


def subohmic_fig1():
    return SubOhmic(SUBOHMIC["s"], SUBOHMIC["omega_c"], SUBOHMIC["gamma"])


PRESETS = {"fig1": fig1, "fig2": fig2, "fig3": fig3}
