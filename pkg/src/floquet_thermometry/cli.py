"""Command-line front end.

    floquet-thermo sidebands --config run.json
    floquet-thermo qfi-scan --config run.json --out scan.csv --workers 4
    floquet-thermo reproduce fig3 --out fig3.csv

Exit codes: 0 ok, 2 bad configuration, 3 non-convergence, 4 regime violation.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from contextlib import contextmanager

import numpy as np

from . import config, figures, lindblad
from .errors import ConfigError, ThermometryError
from .optimizer import DesignProblem, design_multi_peak, design_single_peak
from .qfi import qfi
from .scan import SCAN_COLUMNS, fmt, scan_temperatures, write_csv
from .steadystate import effective_boltzmann, steady_state


def _jsonable(v):
    if isinstance(v, dict):
        return {k: _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple, np.ndarray)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (float, np.floating)):
        v = float(v)
        # JSON has no infinities; keep the same spelling as the CSVs
        return v if math.isfinite(v) else fmt(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


@contextmanager
def _sink(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def emit(args, header, rows, extra=None):
    with _sink(args.out) as fh:
        if args.format == "json":
            doc = {"columns": list(header), "rows": [list(r) for r in rows]}
            if extra:
                doc["meta"] = extra
            json.dump(_jsonable(doc), fh, indent=2, sort_keys=True)
            fh.write("\n")
        else:
            write_csv(fh, header, rows)


def _config(args):
    if args.config is None:
        raise ConfigError("--config is required for this command")
    cfg = config.load_config(args.config)
    if args.sidebands is not None:
        cfg.sideband_cutoff = args.sidebands
    if args.out is None:
        args.out = cfg.out
    return cfg


def _temperatures(cfg):
    return cfg.temperatures or list(cfg.scan.temperatures())


def _meta(cfg, sb=None):
    m = {"method": cfg.method, "sideband_tol": cfg.sideband_tol, "measurements": cfg.measurements}
    if sb is not None:
        m.update(sideband_cutoff=sb.M, deficit=sb.deficit)
    if cfg.modulation is not None:
        m["modulation"] = cfg.modulation.to_dict()
    return m


# ------------------------------------------------------------------ commands


def cmd_sidebands(args):
    cfg = _config(args)
    sb = cfg.sidebands()
    rows = [(int(m), w, P, sb.deficit) for m, w, P in zip(sb.m, sb.omega, sb.P)]
    rows = [r for r in rows if r[2] > 0]  # e.g. even orders of a pi-pulse
    emit(args, ("m", "omega_m", "P_m", "deficit"), rows, _meta(cfg, sb))
    return 0


def cmd_steady_state(args):
    cfg = _config(args)
    sb = cfg.sidebands()
    rows, pops = [], {}
    for T in _temperatures(cfg):
        st = steady_state(cfg.probe, effective_boltzmann(cfg.spectrum, sb, T, cfg.sideband_tol), T)
        rows.append((T, st.boltzmann, st.N_eff, st.omega_eff, st.levels, st.truncation_error))
        pops[fmt(T)] = st.populations
    extra = _meta(cfg, sb)
    if args.format == "json":
        extra["populations"] = pops
    emit(args, ("T", "boltzmann", "N_eff", "omega_eff", "levels", "truncation_error"), rows, extra)
    return 0


def cmd_qfi_scan(args):
    cfg = _config(args)
    sb = cfg.sidebands()
    res = scan_temperatures(cfg.probe, cfg.spectrum, sb, cfg.scan.temperatures(), cfg.method,
                            cfg.measurements, args.workers, cfg.sideband_tol)
    emit(args, SCAN_COLUMNS, list(res.rows()), _meta(cfg, sb))
    return 0


def cmd_error_bound(args):
    cfg = _config(args)
    sb = cfg.sidebands()
    rows = []
    for T in _temperatures(cfg):
        rep = qfi(cfg.probe, cfg.spectrum, sb, T, cfg.method, cfg.measurements, cfg.sideband_tol)
        rows.append((T, rep.H, rep.xi, cfg.measurements))
    emit(args, ("T", "H", "xi", "M_measurements"), rows, _meta(cfg, sb))
    return 0


def cmd_lindblad_verify(args):
    cfg = _config(args)
    sb = cfg.sidebands()
    opts = cfg.lindblad
    temps = opts.get("T", cfg.temperatures or [0.1])
    temps = temps if isinstance(temps, list) else [temps]
    threshold = float(opts.get("threshold", 1e-8))
    rows, summary, ok = [], [], True
    for T in temps:
        run = lindblad.verify(cfg.spectrum, sb, float(T), N_max=int(opts.get("N_max", 60)),
                              checkpoints=int(opts.get("checkpoints", 41)),
                              t_final=opts.get("t_final"), tol=cfg.sideband_tol)
        passed = (run.final_distance < threshold and run.leak < 1e-10
                  and all(abs(c.trace - 1) < 1e-10 and c.min_eig >= -1e-9 for c in run.log))
        ok &= passed
        rows.extend(run.rows() if len(temps) == 1 else ((T,) + r for r in run.rows()))
        summary.append({"T": T, "C1": run.C1, "C2": run.C2, "final_distance": run.final_distance,
                        "leak": run.leak, "passed": passed, **run.meta})
        print(f"lindblad T={T:g}: distance {run.final_distance:.3e} "
              f"{'PASS' if passed else 'FAIL'}", file=sys.stderr)
    header = lindblad.LOG_COLUMNS if len(temps) == 1 else ("T",) + lindblad.LOG_COLUMNS
    emit(args, header, rows, {"runs": summary})
    return 0 if ok else 3


def cmd_optimize(args):
    cfg = _config(args)
    d = cfg.design
    if "targets" not in d:
        raise ConfigError("design block needs a targets list")
    problem = DesignProblem(
        targets=d["targets"],
        spec=cfg.spectrum,
        probe=cfg.probe,
        omega0=float(d.get("omega0", 1.0)),
        mu_max=float(d.get("mu_max", 0.2)),
        families=tuple(d.get("families", ["sinusoidal"])),
        regime_factor=float(d.get("regime_factor", 100.0)),
        seed=int(d.get("seed", 0)),
        tol=cfg.sideband_tol,
    )
    design = design_single_peak if len(problem.unique_targets()) == 1 else design_multi_peak
    result = design(problem)
    if args.format == "csv":
        emit(args, ("T", "H", "xi"), result.achieved)
    else:
        with _sink(args.out) as fh:
            json.dump(_jsonable(result.to_dict()), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def cmd_reproduce(args):
    preset = config.PRESETS[args.figure]()
    if args.sidebands is not None:
        preset.sideband_cutoff = args.sidebands
    if args.figure == "fig1":
        header, rows, _ = figures.fig1_table(preset, args.workers)
    elif args.figure == "fig2":
        header, rows = figures.fig2_table(preset)
    else:
        header, rows, _ = figures.fig3_table(preset, args.workers)
    emit(args, header, rows, _meta(preset))
    return 0


COMMANDS = {
    "sidebands": cmd_sidebands,
    "steady-state": cmd_steady_state,
    "qfi-scan": cmd_qfi_scan,
    "error-bound": cmd_error_bound,
    "lindblad-verify": cmd_lindblad_verify,
    "optimize": cmd_optimize,
    "reproduce": cmd_reproduce,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--workers", type=int, default=1, help="processes for scans")
    common.add_argument("--sidebands", type=int, help="override the sideband cutoff M")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    parser = argparse.ArgumentParser(prog="floquet-thermo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common])
        if name == "reproduce":
            p.add_argument("figure", choices=sorted(config.PRESETS))
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.workers < 1:
        print("error: --workers must be >= 1", file=sys.stderr)
        return 2
    try:
        return COMMANDS[args.command](args)
    except ThermometryError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ConfigError.exit_code


if __name__ == "__main__":
    sys.exit(main())
