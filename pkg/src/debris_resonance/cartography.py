"""Grid sweeps: FLI maps, dominant-term maps, amplitude maps and equilibrium tables.

Grids are split into fixed-size chunks whose composition does not depend on
the worker count, and every per-cell computation is independent of the rest
of its chunk, so a map is bitwise reproducible however it is scheduled.
"""

from __future__ import annotations

import hashlib
import math
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cartesian import CartesianModel, ForceModelConfig
from .core import (
    STANDARD,
    Constants,
    STATUS_NAMES,
    STATUS_OK,
    GravityCoefficients,
    default_coefficients,
    resonant_semimajor_axis,
)
from .errors import ConfigError
from .fli import FliSettings, model_fli
from .hamiltonian.models import (
    ResonantModel,
    ToyModel21,
    build_model,
    dominant_index,
    find_equilibria,
    tracked_labels,
)
from .integrators import StepperConfig
from .kaula import ResonanceId

ENV_MAX_WORKERS = "DEBRIS_RESONANCE_MAX_WORKERS"
SIDEREAL_DAY = STANDARD.sidereal_day

AXIS_NAMES = ("a", "e", "i", "angle", "omega", "Omega")
ANGLE_ALIASES = {"lambda": "angle", "sigma": "angle", "phi": "angle"}
MODEL_KINDS = ("hamiltonian", "toy", "cartesian")


def canonical_axis(name: str) -> str:
    name = ANGLE_ALIASES.get(name, name)
    if name not in AXIS_NAMES:
        raise ConfigError(f"unknown axis {name!r}; choose from {AXIS_NAMES + tuple(ANGLE_ALIASES)}")
    return name


@dataclass(frozen=True)
class Axis:
    """One swept element: a in km, e dimensionless, angles in degrees."""

    name: str
    min: float
    max: float
    count: int

    def __post_init__(self):
        object.__setattr__(self, "name", canonical_axis(self.name))
        if self.count < 2:
            raise ConfigError(f"axis {self.name}: count must be at least 2")
        if not self.max > self.min:
            raise ConfigError(f"axis {self.name}: empty range")

    def values(self) -> np.ndarray:
        return np.linspace(self.min, self.max, self.count)

    @property
    def spacing(self) -> float:
        return (self.max - self.min) / (self.count - 1)


@dataclass(frozen=True)
class GridSpec:
    """Two swept axes plus fixed elements (a km, e, angles in degrees).

    ``model`` is one of hamiltonian, toy, cartesian; ``resonance`` selects
    the resonant angle (lambda for 1:1, sigma for 2:1) used for the angle axis.
    """

    x: Axis
    y: Axis
    fixed: dict = field(default_factory=dict)
    model: str = "hamiltonian"
    resonance: str = "1:1"

    def __post_init__(self):
        if self.x.name == self.y.name:
            raise ConfigError("swept axes must be distinct")
        fixed = {canonical_axis(k): float(v) for k, v in self.fixed.items()}
        object.__setattr__(self, "fixed", fixed)
        if self.model not in MODEL_KINDS:
            raise ConfigError(f"unknown model kind {self.model!r}; choose from {MODEL_KINDS}")

    @property
    def shape(self):
        return (self.y.count, self.x.count)

    def res_id(self) -> ResonanceId:
        return ResonanceId.parse(self.resonance)

    def mesh(self):
        """(X, Y) arrays of shape (ny, nx)."""
        return np.meshgrid(self.x.values(), self.y.values())

    def elements(self):
        """Flattened per-cell (a_km, e, i, angle, omega, Omega); angles in radians."""
        res = self.res_id()
        defaults = {"a": resonant_semimajor_axis(res.p_res, res.q_res), "e": 0.005, "i": 0.0, "angle": 0.0,
                    "omega": 0.0, "Omega": 0.0}
        defaults.update(self.fixed)
        X, Y = self.mesh()
        vals = {k: np.full(X.size, v) for k, v in defaults.items()}
        vals[self.x.name] = X.ravel().copy()
        vals[self.y.name] = Y.ravel().copy()
        for k in ("i", "angle", "omega", "Omega"):
            vals[k] = np.radians(vals[k])
        return tuple(vals[k] for k in AXIS_NAMES)

    def describe(self) -> dict:
        return {"x": f"{self.x.name} {self.x.min} {self.x.max} {self.x.count}",
                "y": f"{self.y.name} {self.y.min} {self.y.max} {self.y.count}",
                "fixed": " ".join(f"{k}={self.fixed[k]!r}" for k in sorted(self.fixed)),
                "model": self.model, "resonance": self.resonance}


@dataclass
class MapResult:
    values: np.ndarray  # (ny, nx); NaN where the cell carries no value
    status: np.ndarray  # (ny, nx) int8 codes, see core.STATUS_NAMES
    grid: GridSpec
    kind: str  # fli | width_km | dominant_index
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.values.shape != self.grid.shape or self.status.shape != self.grid.shape:
            raise ValueError("map dimensions do not match the grid")

    def value_range(self):
        ok = np.isfinite(self.values)
        if not np.any(ok):
            return float("nan"), float("nan")
        return float(np.min(self.values[ok])), float(np.max(self.values[ok]))

    def metadata(self) -> dict:
        lo, hi = self.value_range()
        out = {"kind": self.kind}
        out.update(self.grid.describe())
        out.update({k: self.meta[k] for k in sorted(self.meta)})
        out["value_min"] = repr(lo)
        out["value_max"] = repr(hi)
        return out

    def csv_text(self) -> str:
        lines = [f"# {k} = {v}" for k, v in self.metadata().items()]
        lines.append("x,y,value,status")
        X, Y = self.grid.mesh()
        for x, y, v, s in zip(X.ravel(), Y.ravel(), self.values.ravel(), self.status.ravel()):
            val = "" if not np.isfinite(v) else repr(float(v))
            lines.append(f"{float(x)!r},{float(y)!r},{val},{STATUS_NAMES[int(s)]}")
        return "\n".join(lines) + "\n"

    def pgm_text(self, maxval: int = 255) -> str:
        """Plain graymap (P2), first row = largest y; flagged cells are black."""
        lo, hi = self.value_range()
        ny, nx = self.grid.shape
        span = hi - lo if np.isfinite(hi - lo) and hi > lo else 1.0
        img = np.zeros((ny, nx), dtype=int)
        ok = np.isfinite(self.values)
        img[ok] = np.rint((self.values[ok] - lo) / span * maxval).astype(int)
        header = ["P2"] + [f"# {k} = {v}" for k, v in self.metadata().items()] + [f"{nx} {ny}", str(maxval)]
        rows = [" ".join(str(v) for v in row) for row in img[::-1]]
        return "\n".join(header + rows) + "\n"

    def write(self, out_dir, stem: str, fmt: str = "csv") -> list:
        """Write csv and/or pgm files atomically; returns the written paths."""
        if fmt not in ("csv", "pixmap", "both"):
            raise ConfigError(f"unknown format {fmt!r}")
        paths = []
        out_dir = Path(out_dir)
        if fmt in ("csv", "both"):
            paths.append(write_atomic(out_dir / f"{stem}.csv", self.csv_text()))
        if fmt in ("pixmap", "both"):
            paths.append(write_atomic(out_dir / f"{stem}.pgm", self.pgm_text()))
        return paths


def write_atomic(path, text: str) -> Path:
    """Write ``text`` to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def read_csv_map(path):
    """(metadata dict, rows as (x, y, value|None, status)) from a map CSV."""
    meta, rows = {}, []
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            k, _, v = line[1:].partition("=")
            meta[k.strip()] = v.strip()
        elif line and not line.startswith("x,"):
            x, y, v, s = line.split(",")
            rows.append((float(x), float(y), float(v) if v else None, s))
    return meta, rows


# ---------------------------------------------------------------------------
# FLI maps
# ---------------------------------------------------------------------------

def default_hamiltonian_fli() -> FliSettings:
    return FliSettings(horizon=465 * SIDEREAL_DAY, stepper=StepperConfig(h=0.25 * SIDEREAL_DAY), stride=4)


def default_cartesian_fli() -> FliSettings:
    return FliSettings(horizon=500 * SIDEREAL_DAY, stepper=StepperConfig(h=600.0, scheme="ABM12_11"), stride=6)


@dataclass(frozen=True)
class MapConfig:
    """Model and run settings for a map sweep."""

    fli: FliSettings | None = None
    harmonics: str | tuple = "deg4"
    labels: tuple | None = None
    e_order: int | None = None
    force: ForceModelConfig = field(default_factory=ForceModelConfig)
    coeffs: GravityCoefficients | None = None
    workers: int = 1
    chunk: int = 400
    constants: Constants = STANDARD

    def __post_init__(self):
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.chunk < 1:
            raise ConfigError("chunk must be at least 1")

    def settings_for(self, kind: str) -> FliSettings:
        if self.fli is not None:
            return self.fli
        return default_cartesian_fli() if kind == "cartesian" else default_hamiltonian_fli()


def build_map_model(grid: GridSpec, cfg: MapConfig):
    coeffs = cfg.coeffs or default_coefficients()
    res = grid.res_id()
    if grid.model == "cartesian":
        return CartesianModel(cfg.force, coeffs, cfg.constants)
    if grid.model == "toy":
        if res != ResonanceId(2, 1):
            raise ConfigError("the toy model is defined for the 2:1 resonance")
        return ToyModel21.build(cfg.labels or ("t1", "t2", "t3"), coeffs, cfg.constants)
    return build_model(res, cfg.harmonics, coeffs, cfg.constants, e_order=cfg.e_order, labels=cfg.labels)


def initial_states(model, grid: GridSpec):
    a, e, i, ang, om, Om = grid.elements()
    if isinstance(model, CartesianModel):
        return model.state_from_resonant(a, e, i, ang, om, Om, grid.res_id().p_res)
    return model.state_from_elements(a, e, i, ang, om, Om)


def effective_workers(requested: int) -> int:
    cap = os.environ.get(ENV_MAX_WORKERS)
    n = max(1, int(requested))
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError as exc:
            raise ConfigError(f"{ENV_MAX_WORKERS} must be an integer") from exc
    return n


def _fli_chunk(args):
    model, x0, settings = args
    return model_fli(model, x0, settings)


def _run_chunks(fn, model, states, settings, cfg: MapConfig):
    N = states.shape[1]
    bounds = [(k, min(N, k + cfg.chunk)) for k in range(0, N, cfg.chunk)]
    tasks = [(model, states[:, lo:hi], settings) for lo, hi in bounds]
    workers = effective_workers(cfg.workers)
    if workers == 1 or len(tasks) == 1:
        results = [fn(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, tasks))
    values = np.concatenate([r[0] for r in results])
    codes = np.concatenate([r[1] for r in results])
    return values, codes


def config_hash(grid: GridSpec, cfg: MapConfig, settings: FliSettings) -> str:
    text = repr((grid.describe(), cfg.harmonics, cfg.labels, cfg.e_order, cfg.force, cfg.constants, settings))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def fli_map(grid: GridSpec, cfg: MapConfig = MapConfig()) -> MapResult:
    """One FLI per grid cell; cells that leave the domain are flagged, never dropped."""
    model = build_map_model(grid, cfg)
    settings = cfg.settings_for(grid.model)
    states = initial_states(model, grid)
    values, codes = _run_chunks(_fli_chunk, model, states, settings, cfg)
    meta = {"horizon_s": repr(settings.horizon), "step_s": repr(settings.stepper.h),
            "scheme": settings.stepper.scheme, "config_hash": config_hash(grid, cfg, settings),
            "model_name": getattr(model, "name", grid.model)}
    return MapResult(values.reshape(grid.shape), codes.reshape(grid.shape), grid, "fli", meta)


def island_center(result: MapResult):
    """(x, y) of the cell with the smallest FLI among ok cells."""
    v = np.where(result.status == STATUS_OK, result.values, np.inf)
    iy, ix = np.unravel_index(np.argmin(v), v.shape)
    return result.grid.x.values()[ix], result.grid.y.values()[iy]


def separatrix_width(result: MapResult, x_value: float):
    """Distance in y between the two FLI maxima bracketing the minimum along the column nearest x_value."""
    ix = int(np.argmin(np.abs(result.grid.x.values() - x_value)))
    col = np.where(result.status[:, ix] == STATUS_OK, result.values[:, ix], np.nan)
    y = result.grid.y.values()
    k = int(np.nanargmin(col))
    lo = int(np.nanargmax(col[: k + 1]))
    hi = k + int(np.nanargmax(col[k:]))
    return y[hi] - y[lo], y[lo], y[hi]


# ---------------------------------------------------------------------------
# dominant-term and amplitude maps, equilibria
# ---------------------------------------------------------------------------

def dominant_map(resonance: ResonanceId | str, e_range, i_range, resolution=(50, 50),
                 coeffs: GravityCoefficients | None = None, a_km: float | None = None) -> MapResult:
    """Index of the dominant tracked harmonic on an (e, i [deg]) grid."""
    if isinstance(resonance, str):
        resonance = ResonanceId.parse(resonance)
    nx, ny = resolution
    grid = GridSpec(Axis("e", e_range[0], e_range[1], nx), Axis("i", i_range[0], i_range[1], ny),
                    model="hamiltonian", resonance=resonance.label)
    X, Y = grid.mesh()
    idx = dominant_index(resonance, X, np.radians(Y), a_km, coeffs)
    labels = tracked_labels(resonance)
    meta = {"labels": " ".join(labels)}
    return MapResult(idx.astype(float), np.zeros(grid.shape, dtype=np.int8), grid, "dominant_index", meta)


def amplitude_map(model: ResonantModel, e_range, i_range, resolution=(50, 50), omega: float = 0.0) -> MapResult:
    from .amplitude import amplitude_scan

    return amplitude_scan(model, e_range, i_range, omega, resolution)


def equilibrium_table(model: ResonantModel, e: float, i: float, omega: float = 0.0, Omega: float = 0.0,
                      reference: str | None = None):
    """Equilibria at fixed (e, i, omega, Omega); angles in radians."""
    return find_equilibria(model, e, i, omega, Omega, reference=reference)


def format_equilibria(reports) -> str:
    lines = ["angle_deg,a_km,stability,eig_re_1_s,eig_im_1_s"]
    for r in reports:
        ev = max(r.eigenvalues, key=lambda z: (z.imag, z.real))
        lines.append(f"{r.angle_deg:.4f},{r.a_km:.4f},{r.stability},{ev.real:.6e},{ev.imag:.6e}")
    return "\n".join(lines) + "\n"
