"""Pulse envelopes, the physical driving field, and tau-rescaling.

The field is ``F(t) = F0 * m(t) * cos(omega(t) * t)`` with the carrier
phase taken literally as the product ``omega(t) * t``; the chirp design
formulas are derived under exactly this convention. An alternate
``integrated`` phase mode (``phi = int omega dt'``) exists for sensitivity
studies only and is never the default.

All evaluation here is in pulse-local time: t = 0 at pulse start. Specs
with a nonzero start time T0 are evaluated at ``t - T0`` (the CLI shifts
absolute times).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Union

import numpy as np
from scipy.optimize import brentq

if TYPE_CHECKING:  # pragma: no cover
    from .optimizer import ChirpProfile

SHAPES = ("square", "sine", "sine_squared", "tabulated")

# integer codes shared with the integration kernels
SHAPE_CODES = {name: i for i, name in enumerate(SHAPES)}

PHASE_MODES = ("literal", "integrated")


@dataclass(frozen=True)
class Envelope:
    """Dimensionless envelope m(t) in [0, 1], zero outside the pulse window.

    The sine and sine-squared shapes span a single arch over the window,
    i.e. Omega = pi / duration, peaking at mid-pulse.
    """

    shape: str
    table_t: Optional[np.ndarray] = None  # tabulated only, local time
    table_m: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise ValueError(f"unknown envelope shape {self.shape!r}; choose from {SHAPES}")
        if self.shape == "tabulated":
            t, m = self.table_t, self.table_m
            if t is None or m is None:
                raise ValueError("tabulated envelope needs sample arrays")
            t = np.asarray(t, float)
            m = np.asarray(m, float)
            if t.ndim != 1 or t.shape != m.shape or t.size < 2:
                raise ValueError("tabulated envelope needs matching 1-d sample arrays")
            if np.any(np.diff(t) <= 0):
                raise ValueError("tabulated envelope times must be strictly increasing")
            if np.any(m < 0.0) or np.any(m > 1.0):
                raise ValueError("tabulated envelope values must lie in [0, 1]")
            object.__setattr__(self, "table_t", t)
            object.__setattr__(self, "table_m", m)
            t.setflags(write=False)
            m.setflags(write=False)
        elif self.table_t is not None or self.table_m is not None:
            raise ValueError(f"{self.shape} envelope takes no sample table")


@dataclass(frozen=True)
class FixedCarrier:
    omega: float  # a.u.


@dataclass(frozen=True)
class ChirpedCarrier:
    profile: "ChirpProfile"


Carrier = Union[FixedCarrier, ChirpedCarrier]


@dataclass(frozen=True)
class PulseSpec:
    """A drive pulse: amplitude, envelope, window and carrier.

    ``carrier`` may be None while a pulse is still being designed; the
    dynamics module requires it to be set.
    """

    f0: float  # peak field amplitude, a.u.
    envelope: Envelope
    t0: float
    t1: float
    carrier: Optional[Carrier] = None
    phase_mode: str = "literal"

    def __post_init__(self):
        if self.t1 <= self.t0:
            raise ValueError("pulse window must have t1 > t0")
        # f0 = 0 is a degenerate but useful edge (drive switched off entirely,
        # the state must freeze); anything negative is a sign error
        if self.f0 < 0.0:
            raise ValueError("peak amplitude F0 must not be negative")
        if self.phase_mode not in PHASE_MODES:
            raise ValueError(f"phase_mode must be one of {PHASE_MODES}")

    @property
    def duration(self) -> float:
        return self.t1 - self.t0


def make_pulse(f0: float, shape: str, duration: float, carrier: Optional[Carrier] = None,
               table_t=None, table_m=None, phase_mode: str = "literal") -> PulseSpec:
    """Convenience constructor for a pulse starting at t = 0."""
    env = Envelope(shape, table_t=None if table_t is None else np.asarray(table_t, float),
                   table_m=None if table_m is None else np.asarray(table_m, float))
    return PulseSpec(f0=f0, envelope=env, t0=0.0, t1=duration, carrier=carrier,
                     phase_mode=phase_mode)


def load_envelope_csv(path) -> Envelope:
    """Read a tabulated envelope: two-column CSV (t_au, m), header required."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or len(rows[0]) < 2:
        raise ValueError(f"{path}: expected a two-column CSV with a header row")
    try:
        float(rows[0][0])
    except ValueError:
        pass  # header present, as required
    else:
        raise ValueError(f"{path}: missing header row")
    t = np.array([float(r[0]) for r in rows[1:]])
    m = np.array([float(r[1]) for r in rows[1:]])
    return Envelope("tabulated", table_t=t, table_m=m)


# --- envelope evaluation -------------------------------------------------

def _env_local(env: Envelope, duration: float, u):
    """m at local time u (scalar or array), zero outside [0, duration]."""
    u = np.asarray(u, float)
    inside = (u >= 0.0) & (u <= duration)
    if env.shape == "square":
        m = np.where(inside, 1.0, 0.0)
    elif env.shape == "sine":
        m = np.where(inside, np.sin(np.pi * u / duration), 0.0)
    elif env.shape == "sine_squared":
        m = np.where(inside, np.sin(np.pi * u / duration) ** 2, 0.0)
    else:
        m = np.where(inside, np.interp(u, env.table_t, env.table_m, left=0.0, right=0.0), 0.0)
    # guard the open edges of sine shapes against -0.0 / tiny negatives
    return np.clip(m, 0.0, 1.0)


def envelope_value(spec: PulseSpec, t):
    """Envelope m(t) at absolute time t; vectorized over t."""
    out = _env_local(spec.envelope, spec.duration, np.asarray(t, float) - spec.t0)
    return float(out) if out.ndim == 0 else out


def carrier_phase(spec: PulseSpec, u):
    """Carrier phase phi(u) at local time u under the pulse's phase mode.

    Chirped carriers are linearly interpolated between profile samples; a
    query outside the sampled domain is a hard error (the design grid is
    expected to cover the full pulse).
    """
    u = np.asarray(u, float)
    car = spec.carrier
    if car is None:
        raise ValueError("pulse has no carrier; attach FixedCarrier or ChirpedCarrier")
    if isinstance(car, FixedCarrier):
        return car.omega * u
    prof = car.profile
    tmin, tmax = prof.times[0], prof.times[-1]
    if np.any(u < tmin - 1e-9) or np.any(u > tmax + 1e-9):
        raise ValueError(
            f"chirped carrier queried at t outside its sampled domain "
            f"[{tmin}, {tmax}]"
        )
    uc = np.clip(u, tmin, tmax)
    omega = np.interp(uc, prof.times, prof.omega)
    if spec.phase_mode == "literal":
        return omega * uc
    # integrated mode: phi(u) = int_0^u omega dt', exact for the piecewise-
    # linear omega(t) model (quadratic within each profile segment)
    phi_knots = _cumtrapz(prof.omega, prof.times)
    k = np.clip(np.searchsorted(prof.times, uc, side="right") - 1, 0, prof.times.size - 2)
    dt = uc - prof.times[k]
    slope = (prof.omega[k + 1] - prof.omega[k]) / (prof.times[k + 1] - prof.times[k])
    return phi_knots[k] + prof.omega[k] * dt + 0.5 * slope * dt * dt


def _cumtrapz(y, x):
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))
    return out


def field_value(spec: PulseSpec, t):
    """Physical field F(t) = F0 m(t) cos(phi(t)); vectorized over t.

    Zero outside the pulse window (the carrier is not queried there, so a
    chirp profile only needs to cover the window itself).
    """
    scalar = np.isscalar(t) or np.ndim(t) == 0
    u = np.atleast_1d(np.asarray(t, float)) - spec.t0
    m = np.atleast_1d(_env_local(spec.envelope, spec.duration, u))
    out = np.zeros_like(m)
    mask = m > 0.0
    if np.any(mask):
        out[mask] = spec.f0 * m[mask] * np.cos(carrier_phase(spec, u[mask]))
    return float(out[0]) if scalar else out


# --- integral helpers (closed forms where available) ---------------------

def envelope_area(shape: str, duration: float) -> float:
    """int_0^D m(t) dt for the analytic shapes."""
    if shape == "square":
        return duration
    if shape == "sine":
        return 2.0 * duration / math.pi
    if shape == "sine_squared":
        return 0.5 * duration
    raise ValueError(f"no closed-form area for shape {shape!r}")


def envelope_mean_square(shape: str, duration: float, t: float) -> float:
    """(1/t) int_0^t m^2 dt' for the analytic shapes; m(0)^2 in the t -> 0 limit."""
    if t < 0 or t > duration * (1 + 1e-12):
        raise ValueError("t outside the pulse window")
    omega = math.pi / duration
    if shape == "square":
        return 1.0
    if shape == "sine":
        if t == 0.0:
            return 0.0
        return 0.5 - math.sin(2 * omega * t) / (4 * omega * t)
    if shape == "sine_squared":
        if t == 0.0:
            return 0.0
        return (0.375 - math.sin(2 * omega * t) / (4 * omega * t)
                + math.sin(4 * omega * t) / (32 * omega * t))
    raise ValueError(f"no closed-form mean square for shape {shape!r}")


def _cum_area(env: Envelope, duration: float, u: float) -> float:
    """int_0^u m dt' in local time, closed form or trapezoid for tables."""
    u = min(max(u, 0.0), duration)
    omega = math.pi / duration
    if env.shape == "square":
        return u
    if env.shape == "sine":
        return (1.0 - math.cos(omega * u)) / omega
    if env.shape == "sine_squared":
        return 0.5 * u - math.sin(2 * omega * u) / (4 * omega)
    t, m = env.table_t, env.table_m
    knots = _cumtrapz(m, t)
    if u <= t[0]:
        return 0.0
    k = min(int(np.searchsorted(t, u, side="right")) - 1, t.size - 2)
    dt = u - t[k]
    slope = (m[k + 1] - m[k]) / (t[k + 1] - t[k])
    return float(knots[k] + m[k] * dt + 0.5 * slope * dt * dt)


def tau_of_t(spec: PulseSpec, mu_ab: float, t: float) -> float:
    """Rescaled time tau(t) = (F0 mu_ab / 2) * int_{t0}^{t} m dt'."""
    return 0.5 * spec.f0 * mu_ab * _cum_area(spec.envelope, spec.duration, t - spec.t0)


def tau_max(spec: PulseSpec, mu_ab: float) -> float:
    return tau_of_t(spec, mu_ab, spec.t1)


def t_of_tau(spec: PulseSpec, mu_ab: float, tau: float) -> float:
    """Inverse of :func:`tau_of_t`.

    tau is flat wherever m = 0; there the *start* of the flat interval is
    returned, so t_of_tau(tau_of_t(t)) = t holds on the strictly-increasing
    interior of the envelope.
    """
    rate = 0.5 * spec.f0 * mu_ab
    total = tau_max(spec, mu_ab)
    if tau < -1e-12 * total or tau > total * (1 + 1e-12):
        raise ValueError(f"tau = {tau} outside [0, {total}]")
    tau = min(max(tau, 0.0), total)
    env, dur = spec.envelope, spec.duration
    if env.shape == "square":
        return spec.t0 + tau / rate
    if env.shape == "sine":
        omega = math.pi / dur
        c = 1.0 - tau * omega / rate
        return spec.t0 + math.acos(min(1.0, max(-1.0, c))) / omega

    def resid(u):
        return rate * _cum_area(env, dur, u) - tau

    if resid(0.0) >= 0.0:
        return spec.t0
    # leftmost root: bisect on the first grid bracket for tabulated envelopes
    lo, hi = 0.0, dur
    if env.shape == "tabulated":
        knots = rate * _cumtrapz(env.table_m, env.table_t)
        k = int(np.searchsorted(knots, tau, side="left"))
        k = min(max(k, 1), knots.size - 1)
        lo, hi = env.table_t[k - 1], env.table_t[k]
        if knots[k] == knots[k - 1]:  # flat (m = 0) segment: report its start
            return spec.t0 + float(lo)
    return spec.t0 + brentq(resid, lo, hi, xtol=1e-14, rtol=1e-15)


def x_of_tau(spec: PulseSpec, mu_ab: float, tau: float) -> float:
    """x(tau) = (F0 mu_ab / 2) * t(tau), the rescaled clock."""
    return 0.5 * spec.f0 * mu_ab * (t_of_tau(spec, mu_ab, tau) - spec.t0)


def pi_pulse_duration(f0: float, mu_ab: float, shape: str, target: float = math.pi) -> float:
    """Duration D solving (F0 mu_ab / 2) * int_0^D m = target.

    The default target pi is one full population oscillation of the
    resonantly driven pair; pass pi/2 for a half oscillation (a pi-pulse
    proper, complete transfer).
    """
    if f0 <= 0 or mu_ab <= 0:
        raise ValueError("f0 and mu_ab must be positive")
    area_needed = 2.0 * target / (f0 * mu_ab)
    if shape == "square":
        return area_needed
    if shape == "sine":
        return 0.5 * math.pi * area_needed
    if shape == "sine_squared":
        return 2.0 * area_needed
    raise ValueError(f"pi-pulse duration needs an analytic shape, not {shape!r}")
