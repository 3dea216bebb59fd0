"""Command-line front end: ``debris-resonance <command> [--config FILE] [flags]``.

Exit status is 0 on success, 2 on configuration errors and 1 on any other
failure.  Output files are written atomically; a map is only written once
every cell has been computed.
"""

from __future__ import annotations

import argparse
import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import selftest
from .amplitude import pendulum_reduce
from .cartesian import CartesianModel
from .cartography import (
    amplitude_map,
    dominant_map,
    equilibrium_table,
    fli_map,
    format_equilibria,
    island_center,
    write_atomic,
)
from .config import RunConfig, apply_overrides, load_config
from .core import STATUS_OK, resonant_semimajor_axis, wrap_pi
from .errors import ConfigError, ResonanceError
from .hamiltonian import ToyModel21, build_model
from .integrators import make_stepper
from .kaula import describe_index, resonant_indices, secular_indices, term_magnitude

COMMANDS = ("fli-map", "dominant-map", "amplitude-map", "equilibria", "propagate", "term-table", "self-test")
FULL_SCALE_DAYS = 5000.0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="debris-resonance", description="Geopotential resonance tools.")
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", help="configuration file (sectioned key = value)")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--grid", help="grid resolution override, NXxNY")
    ap.add_argument("--model", help="hamiltonian[:preset] | toy[:t1+t2+t3] | cartesian[:degree]")
    ap.add_argument("--horizon", type=float, help="FLI horizon in sidereal days")
    ap.add_argument("--step", type=float, help="integration step in seconds")
    ap.add_argument("--workers", type=int, help="worker processes for map sweeps")
    ap.add_argument("--format", dest="fmt", choices=("csv", "pixmap", "both"), help="map output format")
    ap.add_argument("--stem", help="output file stem")
    ap.add_argument("--full-scale", action="store_true",
                    help=f"allow FLI horizons beyond {FULL_SCALE_DAYS:g} sidereal days")
    return ap


def _stem(cfg: RunConfig, default: str) -> str:
    return cfg.stem or default


def _resonant_model(cfg: RunConfig):
    m = cfg.model
    coeffs = cfg.coefficients()
    if m.kind == "toy":
        return ToyModel21.build(m.labels or ("t1", "t2", "t3"), coeffs, cfg.constants)
    if m.kind == "cartesian":
        raise ConfigError("this command needs a hamiltonian or toy model")
    return build_model(m.resonance, m.harmonics, coeffs, cfg.constants, e_order=m.e_order, labels=m.labels)


def _deg(cfg, key, default=0.0):
    return math.radians(cfg.fixed_value(key, default))


def _angle(cfg):
    for key in ("angle", "lambda", "sigma"):
        if key in cfg.fixed:
            return math.radians(cfg.fixed[key])
    return 0.0


def cmd_fli_map(cfg: RunConfig, full_scale: bool, out=sys.stdout) -> int:
    settings = cfg.fli_settings()
    days = settings.horizon / cfg.constants.sidereal_day
    if days > FULL_SCALE_DAYS and not full_scale:
        raise ConfigError(f"horizon of {days:g} sidereal days needs --full-scale")
    grid = cfg.grid()
    result = fli_map(grid, cfg.map_config())
    paths = result.write(cfg.out_dir, _stem(cfg, "fli_map"), cfg.fmt)
    x, y = island_center(result)
    n_bad = int(np.count_nonzero(result.status != STATUS_OK))
    print(f"FLI map {grid.shape[1]}x{grid.shape[0]}: minimum at {grid.x.name}={x:.4f}, {grid.y.name}={y:.4f}; "
          f"{n_bad} flagged cells", file=out)
    for p in paths:
        print(f"wrote {p}", file=out)
    return 0


def _ei_axes(cfg: RunConfig):
    grid = cfg.grid()
    if grid.x.name != "e" or grid.y.name != "i":
        raise ConfigError("this command needs [grid] x = e ... and y = i ...")
    return grid


def cmd_dominant_map(cfg: RunConfig, out=sys.stdout) -> int:
    grid = _ei_axes(cfg)
    a_km = cfg.fixed.get("a")
    result = dominant_map(cfg.model.resonance, (grid.x.min, grid.x.max), (grid.y.min, grid.y.max),
                          (grid.x.count, grid.y.count), cfg.coefficients(), a_km)
    for p in result.write(cfg.out_dir, _stem(cfg, "dominant_map"), cfg.fmt):
        print(f"wrote {p}", file=out)
    print(f"labels (value = index): {result.meta['labels']}", file=out)
    return 0


def cmd_amplitude_map(cfg: RunConfig, out=sys.stdout) -> int:
    omega = _deg(cfg, "omega")
    if cfg.x is None or cfg.y is None:
        e = cfg.fixed_value("e", 0.005)
        i = _deg(cfg, "i")
        if cfg.model.kind == "cartesian":
            target = cfg.model.resonance
        else:
            target = _resonant_model(cfg)
        text = pendulum_reduce(target, e, i, omega, cfg.constants, cfg.coefficients()).report()
        print(text, file=out)
        if cfg.stem:
            print(f"wrote {write_atomic(Path(cfg.out_dir) / (cfg.stem + '.txt'), text + chr(10))}", file=out)
        return 0
    grid = _ei_axes(cfg)
    result = amplitude_map(_resonant_model(cfg), (grid.x.min, grid.x.max), (grid.y.min, grid.y.max),
                           (grid.x.count, grid.y.count), omega)
    for p in result.write(cfg.out_dir, _stem(cfg, "amplitude_map"), cfg.fmt):
        print(f"wrote {p}", file=out)
    return 0


def cmd_equilibria(cfg: RunConfig, out=sys.stdout) -> int:
    model = _resonant_model(cfg)
    e = cfg.fixed_value("e", 0.005)
    rows = equilibrium_table(model, e, _deg(cfg, "i"), _deg(cfg, "omega"), _deg(cfg, "Omega"))
    text = format_equilibria(rows)
    print(text, end="", file=out)
    if cfg.stem:
        print(f"wrote {write_atomic(Path(cfg.out_dir) / (cfg.stem + '.csv'), text)}", file=out)
    return 0


def cmd_propagate(cfg: RunConfig, out=sys.stdout) -> int:
    """Single trajectory: elements every ``[run] every`` steps for ``[run] days`` sidereal days."""
    res = cfg.model.resonance
    if cfg.model.kind == "cartesian":
        model = CartesianModel(cfg.force, cfg.coefficients(), cfg.constants)
    else:
        model = _resonant_model(cfg)
    a = cfg.fixed_value("a", resonant_semimajor_axis(res.p_res, res.q_res, cfg.constants))
    e = cfg.fixed_value("e", 0.005)
    i, om, Om, ang = _deg(cfg, "i"), _deg(cfg, "omega"), _deg(cfg, "Omega"), _angle(cfg)
    if isinstance(model, CartesianModel):
        y0 = model.state_from_resonant(a, e, i, ang, om, Om, res.p_res)
    else:
        y0 = model.state_from_elements(a, e, i, ang, om, Om)
    tu = model.constants.time_unit_s
    st_cfg = cfg.stepper_config()
    stepper = make_stepper(model.field, 0.0, y0, st_cfg, tu)
    n_steps = max(1, int(round(cfg.days * cfg.constants.sidereal_day / st_cfg.h)))

    lines = ["t_s,a_km,e,i_deg,angle_deg,omega_deg,Omega_deg"]

    def emit(t, y):
        if model.status(y)[0] != STATUS_OK:
            raise ResonanceError(f"trajectory left the domain at t = {t * tu:.1f} s")
        a_, e_, i_, x_, w_, O_ = (float(np.ravel(v)[0]) for v in model.elements_from_state(y))
        if isinstance(model, CartesianModel):
            x_ = x_ + w_ + res.p_res * (O_ - float(model.theta(t)))
        vals = [t * tu, a_, e_, math.degrees(i_)] + [math.degrees(float(wrap_pi(v))) for v in (x_, w_, O_)]
        lines.append(",".join(repr(float(v)) for v in vals))

    emit(0.0, y0)
    for k in range(1, n_steps + 1):
        y = stepper.step()
        if k % cfg.every == 0 or k == n_steps:
            emit(stepper.t, y)
    text = "\n".join(lines) + "\n"
    path = write_atomic(Path(cfg.out_dir) / (_stem(cfg, "trajectory") + ".csv"), text)
    print(f"wrote {path} ({len(lines) - 1} samples)", file=out)
    return 0


def cmd_term_table(cfg: RunConfig, out=sys.stdout) -> int:
    """Kaula index table for the configured resonance with magnitudes at (a, e, i)."""
    res = cfg.model.resonance
    coeffs = cfg.coefficients()
    cc = cfg.constants.canonical()
    a = cfg.fixed_value("a", resonant_semimajor_axis(res.p_res, res.q_res, cfg.constants)) / cc.length_unit_km
    e, i = cfg.fixed_value("e", 0.005), _deg(cfg, "i")
    keys = ("n", "m", "p", "q", "class", "trig", "e_order", "angle", "coefficient")
    lines = [",".join(keys) + ",magnitude"]
    for idx in list(secular_indices()) + list(resonant_indices(res)):
        row = describe_index(idx, res)
        mag = float(term_magnitude(idx, a, e, i, coeffs, cc)) if coeffs.Jnm(idx.n, idx.m) else 0.0
        lines.append(",".join(str(row.get(k, "")) for k in keys) + f",{mag!r}")
    text = "\n".join(lines) + "\n"
    print(text, end="", file=out)
    if cfg.stem:
        print(f"wrote {write_atomic(Path(cfg.out_dir) / (cfg.stem + '.csv'), text)}", file=out)
    return 0


def run(command: str, cfg: RunConfig, full_scale: bool = False, out=None) -> int:
    out = out or sys.stdout
    if command == "fli-map":
        return cmd_fli_map(cfg, full_scale, out)
    if command == "dominant-map":
        return cmd_dominant_map(cfg, out)
    if command == "amplitude-map":
        return cmd_amplitude_map(cfg, out)
    if command == "equilibria":
        return cmd_equilibria(cfg, out)
    if command == "propagate":
        return cmd_propagate(cfg, out)
    if command == "term-table":
        return cmd_term_table(cfg, out)
    if command == "self-test":
        return 0 if selftest.run(out) else 1
    raise ConfigError(f"unknown command {command!r}")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config) if args.config else load_config(text="")
        cfg = apply_overrides(cfg, out=args.out, grid=args.grid, model=args.model, horizon=args.horizon,
                              step=args.step, workers=args.workers, fmt=args.fmt)
        if args.stem:
            cfg = replace(cfg, stem=args.stem)
        return run(args.command, cfg, args.full_scale)
    except ConfigError as exc:
        print(f"debris-resonance: configuration error: {exc}", file=sys.stderr)
        return 2
    except (ResonanceError, ValueError) as exc:
        print(f"debris-resonance: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
