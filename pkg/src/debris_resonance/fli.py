"""Fast Lyapunov Indicator: running supremum of log ||v(t)|| along the variational flow."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import STATUS_DIVERGED, STATUS_NAMES, STATUS_OK, STATUS_SATURATED
from .errors import ConfigError, Diverged
from .integrators import StepperConfig, make_stepper, tangent_field


@dataclass(frozen=True)
class FliSettings:
    """FLI run settings.

    ``horizon`` is in seconds.  ``tangent`` is the initial tangent vector
    (default: unit vector along the first state component, the action or
    semimajor-axis direction).  The supremum is sampled every ``stride``
    steps and at the final step.  Trajectories whose FLI reaches ``cap``
    stop early and are flagged saturated.  The tangent is renormalized when
    its norm exceeds ``renorm``; the log of each rescale is kept in a ledger.
    """

    horizon: float
    stepper: StepperConfig = field(default_factory=StepperConfig)
    stride: int = 1
    cap: float = 300.0
    tangent: tuple | None = None
    renorm: float = 1e8

    def __post_init__(self):
        if not self.horizon > 0.0:
            raise ConfigError("FLI horizon must be positive")
        if self.stride < 1:
            raise ConfigError("stride must be at least 1")
        if self.tangent is not None and not np.any(np.asarray(self.tangent, dtype=float) != 0.0):
            raise ConfigError("initial tangent must be nonzero")
        if not self.renorm > 1.0:
            raise ConfigError("renormalization threshold must exceed 1")


@dataclass(frozen=True)
class FliValue:
    value: float
    status: str = "ok"

    @property
    def saturated(self) -> bool:
        return self.status == "saturated"

    @property
    def ok(self) -> bool:
        return self.status in ("ok", "saturated")


def fli_batch(field, x0, settings: FliSettings, *, jacobian=None, field_and_jacobian=None,
              status=None, time_unit_s: float = 1.0, t0: float = 0.0, v0=None):
    """FLI for a batch of initial states ``x0`` of shape (d, N).

    ``v0`` (d, N), if given, supplies per-cell initial tangents and takes
    precedence over ``settings.tangent``.

    Returns ``(values, codes)``: values (N,) with NaN for cells that left the
    domain, and integer status codes (see ``core.STATUS_NAMES``).
    """
    x0 = np.asarray(x0, dtype=float)
    if x0.ndim == 1:
        x0 = x0[:, None]
    d, N = x0.shape
    if v0 is not None:
        V0 = np.asarray(v0, dtype=float).reshape(d, -1)
        V0 = np.broadcast_to(V0, (d, N)).copy()
    else:
        u = np.zeros(d)
        if settings.tangent is None:
            u[0] = 1.0
        else:
            u = np.asarray(settings.tangent, dtype=float)
            if u.shape != (d,):
                raise ConfigError(f"tangent must have {d} components")
        V0 = np.repeat(u[:, None], N, axis=1)
    F = tangent_field(field, jacobian, field_and_jacobian)
    st = make_stepper(F, t0, np.concatenate([x0, V0]), settings.stepper, time_unit_s)
    n_steps = max(1, int(round(settings.horizon / time_unit_s / st.h)))

    values = np.full(N, -np.inf)
    codes = np.full(N, STATUS_OK, dtype=np.int8)
    ledger = np.zeros(N)
    idx = np.arange(N)
    if status is not None:
        s0 = status(x0)
        bad = s0 != STATUS_OK
        codes[bad] = s0[bad]
        values[bad] = np.nan
        if np.any(bad):
            st.select(~bad)
            idx = idx[~bad]
            ledger = ledger[~bad]

    for k in range(1, n_steps + 1):
        if idx.size == 0:
            break
        Y = st.step()
        if k % settings.stride and k != n_steps:
            continue
        x, v = Y[:d], Y[d:]
        nv = np.linalg.norm(v, axis=0)
        finite = np.all(np.isfinite(Y), axis=0) & np.isfinite(nv) & (nv > 0.0)
        code = np.where(finite, STATUS_OK, STATUS_DIVERGED).astype(np.int8)
        if status is not None:
            sc = status(np.where(finite, x, x0[:, idx]))
            code = np.where(finite, sc, code).astype(np.int8)
        with np.errstate(divide="ignore", invalid="ignore"):
            log_v = np.log(nv) + ledger
        good = code == STATUS_OK
        values[idx[good]] = np.maximum(values[idx[good]], log_v[good])
        sat = good & (values[idx] >= settings.cap)
        drop = ~good | sat
        if np.any(~good):
            codes[idx[~good]] = code[~good]
            values[idx[~good]] = np.nan
        if np.any(sat):
            codes[idx[sat]] = STATUS_SATURATED
        big = good & (nv > settings.renorm)
        if np.any(big):
            fac = np.where(big, 1.0 / nv, 1.0)
            st.rescale(slice(d, None), fac)
            ledger = ledger + np.where(big, np.log(nv), 0.0)
        if np.any(drop):
            keep = ~drop
            st.select(keep)
            idx = idx[keep]
            ledger = ledger[keep]
    return values, codes


def compute_fli(field, jacobian, x0, settings: FliSettings, *, status=None, time_unit_s: float = 1.0,
                field_and_jacobian=None):
    """FLI of one initial condition (1-D ``x0``) or a list for a batch (2-D)."""
    x0 = np.asarray(x0, dtype=float)
    values, codes = fli_batch(field, x0, settings, jacobian=jacobian, field_and_jacobian=field_and_jacobian,
                              status=status, time_unit_s=time_unit_s)
    out = [FliValue(float(v), STATUS_NAMES[int(c)]) for v, c in zip(values, codes)]
    return out[0] if x0.ndim == 1 else out


def model_fli(model, x0, settings: FliSettings):
    """FLI for a Hamiltonian or Cartesian model object exposing ``field_and_jacobian``,
    ``status`` and ``constants.time_unit_s``.

    Without an explicit tangent, a model's ``default_tangent(x0)`` is used
    when it has one (Cartesian models perturb the velocity along itself).
    """
    v0 = None
    if settings.tangent is None and hasattr(model, "default_tangent"):
        v0 = model.default_tangent(np.asarray(x0, dtype=float).reshape(len(x0), -1))
    return fli_batch(model.field, x0, settings, field_and_jacobian=model.field_and_jacobian,
                     status=model.status, time_unit_s=model.constants.time_unit_s, v0=v0)


def require_ok(value: FliValue) -> float:
    """Return the FLI value or raise Diverged for a flagged trajectory."""
    if not value.ok or not math.isfinite(value.value):
        raise Diverged(f"trajectory flagged {value.status}")
    return value.value
