"""Run configuration: a sectioned ``key = value`` file plus command-line overrides.

All angles are in degrees and lengths in km at this boundary.  Every key is
validated before any computation starts; unknown sections and keys are
rejected.
"""

from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

from .cartesian import ForceModelConfig
from .cartography import Axis, GridSpec, MapConfig
from .core import STANDARD, Constants, GravityCoefficients, default_coefficients, load_coefficients
from .errors import ConfigError
from .fli import FliSettings
from .integrators import StepperConfig
from .kaula import ResonanceId

SIDEREAL_DAY = STANDARD.sidereal_day

SCHEMA = {
    "constants": {"mu_E", "R_E", "sidereal_day", "Gm_S", "Gm_M", "P_r", "a_S"},
    "coefficients": {"path", "scale"},
    "model": {"kind", "resonance", "harmonics", "labels", "e_order"},
    "force": {"degree", "order", "sun", "moon", "srp", "C_r", "area_to_mass", "epoch_s", "theta0_deg"},
    "stepper": {"scheme", "h_s", "h_days", "tolerance", "max_iter"},
    "fli": {"horizon_days", "stride", "cap", "renorm", "tangent"},
    "grid": {"x", "y", "a", "e", "i", "angle", "lambda", "sigma", "omega", "Omega"},
    "output": {"dir", "format", "stem"},
    "run": {"workers", "chunk", "days", "every"},
}

FIXED_KEYS = ("a", "e", "i", "angle", "lambda", "sigma", "omega", "Omega")


@dataclass(frozen=True)
class ModelSpec:
    kind: str = "hamiltonian"
    resonance: ResonanceId = ResonanceId(1, 1)
    harmonics: str = "deg4"
    labels: tuple | None = None
    e_order: int | None = None

    def __post_init__(self):
        if self.kind not in ("hamiltonian", "toy", "cartesian"):
            raise ConfigError(f"model kind must be hamiltonian, toy or cartesian, not {self.kind!r}")


@dataclass(frozen=True)
class RunConfig:
    constants: Constants = STANDARD
    coeffs_path: str | None = None
    coeffs_scale: float = 1e-6
    model: ModelSpec = field(default_factory=ModelSpec)
    force: ForceModelConfig = field(default_factory=ForceModelConfig)
    stepper: StepperConfig | None = None
    horizon_days: float | None = None
    stride: int | None = None
    cap: float = 300.0
    renorm: float = 1e8
    tangent: tuple | None = None
    x: Axis | None = None
    y: Axis | None = None
    fixed: dict = field(default_factory=dict)
    out_dir: str = "."
    fmt: str = "csv"
    stem: str | None = None
    workers: int = 1
    chunk: int = 400
    days: float = 10.0
    every: int = 1

    def coefficients(self) -> GravityCoefficients:
        if self.coeffs_path is None:
            return default_coefficients()
        return load_coefficients(self.coeffs_path, self.coeffs_scale)

    def stepper_config(self) -> StepperConfig:
        if self.stepper is not None:
            return self.stepper
        if self.model.kind == "cartesian":
            return StepperConfig(h=600.0, scheme="ABM12_11")
        return StepperConfig(h=0.25 * SIDEREAL_DAY)

    def fli_settings(self) -> FliSettings:
        cart = self.model.kind == "cartesian"
        days = self.horizon_days if self.horizon_days is not None else (500.0 if cart else 465.0)
        stride = self.stride if self.stride is not None else (6 if cart else 4)
        return FliSettings(horizon=days * SIDEREAL_DAY, stepper=self.stepper_config(), stride=stride,
                           cap=self.cap, tangent=self.tangent, renorm=self.renorm)

    def grid(self) -> GridSpec:
        if self.x is None or self.y is None:
            raise ConfigError("this command needs [grid] x and y axes")
        return GridSpec(self.x, self.y, self.fixed, self.model.kind, self.model.resonance.label)

    def map_config(self) -> MapConfig:
        return MapConfig(fli=self.fli_settings(), harmonics=self.model.harmonics, labels=self.model.labels,
                         e_order=self.model.e_order, force=self.force, coeffs=self.coefficients(),
                         workers=self.workers, chunk=self.chunk, constants=self.constants)

    def fixed_value(self, key: str, default: float) -> float:
        return float(self.fixed.get(key, default))


def _float(sec, key, raw):
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {key}: expected a number, got {raw!r}") from exc


def _int(sec, key, raw):
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{sec}] {key}: expected an integer, got {raw!r}") from exc


def _bool(sec, key, raw):
    low = raw.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"[{sec}] {key}: expected a boolean, got {raw!r}")


def parse_axis(text: str) -> Axis:
    """``name min max count`` (whitespace or colon separated)."""
    parts = text.replace(":", " ").split()
    if len(parts) != 4:
        raise ConfigError(f"axis must be 'name min max count', got {text!r}")
    name, lo, hi, n = parts
    return Axis(name, _float("grid", name, lo), _float("grid", name, hi), _int("grid", name, n))


def parse_labels(text: str):
    labels = tuple(s for s in text.replace("+", " ").replace(",", " ").split() if s)
    return labels or None


def recipe_names() -> list:
    """Names of the bundled figure recipes."""
    return sorted(p.stem for p in (Path(__file__).parent / "recipes").glob("*.cfg"))


def recipe_path(name) -> Path:
    """Path of a bundled recipe given as ``fig3-topleft`` or ``fig3-topleft.cfg``."""
    stem = Path(str(name)).name.removesuffix(".cfg")
    p = Path(__file__).parent / "recipes" / f"{stem}.cfg"
    if not p.is_file():
        raise ConfigError(f"configuration file not found: {name}")
    return p


def load_config(path=None, text: str | None = None) -> RunConfig:
    """Parse and validate a configuration file (or string)."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        if text is not None:
            cp.read_string(text)
        elif path is not None:
            p = Path(path)
            if not p.is_file():
                p = recipe_path(path)
            cp.read_string(p.read_text(), source=str(p))
    except configparser.Error as exc:
        raise ConfigError(f"malformed configuration: {exc}") from exc
    for sec in cp.sections():
        if sec not in SCHEMA:
            raise ConfigError(f"unknown section [{sec}]")
        unknown = set(cp[sec]) - SCHEMA[sec]
        if unknown:
            raise ConfigError(f"unknown key(s) in [{sec}]: {', '.join(sorted(unknown))}")
    kw = {}
    g = lambda sec: cp[sec] if cp.has_section(sec) else {}  # noqa: E731

    consts = {k: _float("constants", k, v) for k, v in g("constants").items()}
    if consts:
        try:
            kw["constants"] = replace(STANDARD, **consts)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    co = g("coefficients")
    if "path" in co:
        kw["coeffs_path"] = co["path"]
    if "scale" in co:
        kw["coeffs_scale"] = _float("coefficients", "scale", co["scale"])

    m = g("model")
    mkw = {}
    if "kind" in m:
        mkw["kind"] = m["kind"].strip()
    if "resonance" in m:
        try:
            mkw["resonance"] = ResonanceId.parse(m["resonance"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    if "harmonics" in m:
        mkw["harmonics"] = m["harmonics"].strip()
    if "labels" in m:
        mkw["labels"] = parse_labels(m["labels"])
    if "e_order" in m:
        mkw["e_order"] = _int("model", "e_order", m["e_order"])
    kw["model"] = ModelSpec(**mkw)

    f = g("force")
    fkw = {}
    for key in ("degree", "order"):
        if key in f:
            fkw[key] = _int("force", key, f[key])
    for key, name in (("sun", "include_sun"), ("moon", "include_moon"), ("srp", "include_srp")):
        if key in f:
            fkw[name] = _bool("force", key, f[key])
    if "C_r" in f:
        fkw["C_r"] = _float("force", "C_r", f["C_r"])
    if "area_to_mass" in f:
        fkw["area_to_mass"] = _float("force", "area_to_mass", f["area_to_mass"])
    if "epoch_s" in f:
        fkw["epoch"] = _float("force", "epoch_s", f["epoch_s"])
    if "theta0_deg" in f:
        fkw["theta0"] = math.radians(_float("force", "theta0_deg", f["theta0_deg"]))
    kw["force"] = ForceModelConfig(**fkw)

    s = g("stepper")
    if s:
        skw = {}
        if "h_s" in s and "h_days" in s:
            raise ConfigError("[stepper] give either h_s or h_days, not both")
        if "h_s" in s:
            skw["h"] = _float("stepper", "h_s", s["h_s"])
        if "h_days" in s:
            skw["h"] = _float("stepper", "h_days", s["h_days"]) * SIDEREAL_DAY
        if "scheme" in s:
            skw["scheme"] = s["scheme"].strip()
        if "tolerance" in s:
            skw["tolerance"] = _float("stepper", "tolerance", s["tolerance"])
        if "max_iter" in s:
            skw["max_iter"] = _int("stepper", "max_iter", s["max_iter"])
        if "h" not in skw:
            scheme = skw.get("scheme", "ABM12_11" if kw["model"].kind == "cartesian" else "RK4")
            skw["h"] = 600.0 if scheme == "ABM12_11" else 0.25 * SIDEREAL_DAY
        kw["stepper"] = StepperConfig(**skw)

    fl = g("fli")
    if "horizon_days" in fl:
        kw["horizon_days"] = _float("fli", "horizon_days", fl["horizon_days"])
    if "stride" in fl:
        kw["stride"] = _int("fli", "stride", fl["stride"])
    if "cap" in fl:
        kw["cap"] = _float("fli", "cap", fl["cap"])
    if "renorm" in fl:
        kw["renorm"] = _float("fli", "renorm", fl["renorm"])
    if "tangent" in fl:
        kw["tangent"] = tuple(_float("fli", "tangent", v) for v in fl["tangent"].replace(",", " ").split())

    gr = g("grid")
    if "x" in gr:
        kw["x"] = parse_axis(gr["x"])
    if "y" in gr:
        kw["y"] = parse_axis(gr["y"])
    kw["fixed"] = {k: _float("grid", k, gr[k]) for k in FIXED_KEYS if k in gr}

    o = g("output")
    if "dir" in o:
        kw["out_dir"] = o["dir"]
    if "format" in o:
        kw["fmt"] = o["format"].strip()
    if "stem" in o:
        kw["stem"] = o["stem"].strip()

    r = g("run")
    for key in ("workers", "chunk", "every"):
        if key in r:
            kw[key] = _int("run", key, r[key])
    if "days" in r:
        kw["days"] = _float("run", "days", r["days"])

    cfg = RunConfig(**kw)
    validate(cfg)
    return cfg


def validate(cfg: RunConfig):
    if cfg.fmt not in ("csv", "pixmap", "both"):
        raise ConfigError(f"[output] format must be csv, pixmap or both, not {cfg.fmt!r}")
    if cfg.workers < 1 or cfg.chunk < 1 or cfg.every < 1:
        raise ConfigError("[run] workers, chunk and every must be positive")
    if cfg.horizon_days is not None and not cfg.horizon_days > 0.0:
        raise ConfigError("[fli] horizon_days must be positive")
    if not cfg.days > 0.0:
        raise ConfigError("[run] days must be positive")
    if cfg.x is not None and cfg.y is not None:
        cfg.grid()
    fixed = dict(cfg.fixed)
    if "e" in fixed and not 0.0 <= fixed["e"] < 1.0:
        raise ConfigError("[grid] e must lie in [0, 1)")
    cfg.fli_settings()


def apply_overrides(cfg: RunConfig, *, out=None, grid=None, model=None, horizon=None, step=None, workers=None,
                    fmt=None) -> RunConfig:
    """Apply command-line flag overrides and re-validate."""
    kw = {}
    if out is not None:
        kw["out_dir"] = out
    if fmt is not None:
        kw["fmt"] = fmt
    if workers is not None:
        kw["workers"] = workers
    if horizon is not None:
        kw["horizon_days"] = horizon
    if model is not None:
        kind, _, spec = model.partition(":")
        mkw = {"kind": kind}
        force = cfg.force
        if kind == "hamiltonian" and spec:
            mkw["harmonics"] = spec
        elif kind == "toy":
            mkw["resonance"] = ResonanceId(2, 1)
            mkw["labels"] = parse_labels(spec) if spec else ("t1", "t2", "t3")
        elif kind == "cartesian" and spec:
            deg = _int("model", "cartesian degree", spec)
            force = replace(force, degree=deg, order=min(force.order, deg) if deg < force.order else force.order)
        kw["model"] = replace(cfg.model, **mkw)
        kw["force"] = force
    if step is not None:
        base = cfg.stepper_config() if model is None else replace(cfg, **kw).stepper_config()
        kw["stepper"] = replace(base, h=float(step))
    if grid is not None:
        try:
            nx, ny = (int(v) for v in grid.lower().split("x"))
        except ValueError as exc:
            raise ConfigError(f"--grid expects NXxNY, got {grid!r}") from exc
        if cfg.x is None or cfg.y is None:
            raise ConfigError("--grid needs [grid] x and y axes in the configuration")
        kw["x"] = Axis(cfg.x.name, cfg.x.min, cfg.x.max, nx)
        kw["y"] = Axis(cfg.y.name, cfg.y.min, cfg.y.max, ny)
    new = replace(cfg, **kw)
    validate(new)
    return new
