"""Figures of merit extracted from simulated trajectories.

Turns a Trajectory into the quantities the design theory makes claims
about: the amplitude of the population oscillation, how much population
sits outside the selected pair versus the m(t)*sigma_tot^2 loss envelope,
peak leakage per perturbing level versus its closed-form bound, and
side-by-side resonant/optimized comparisons.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence, TextIO

import numpy as np

from .dynamics import Trajectory, populations
from .optimizer import PerturberStrength, leakage_bound
from .pulse import PulseSpec, envelope_value
from .qsystem import TransitionPair

# population wiggles smaller than this are measurement noise on the slow
# oscillation, not oscillations of their own
DEFAULT_PROMINENCE = 1e-3


def _refine_max(t: np.ndarray, y: np.ndarray, k: int) -> tuple[float, float]:
    """Parabolic refinement of a grid maximum through points k-1, k, k+1."""
    if k == 0 or k == y.size - 1:
        return float(t[k]), float(y[k])
    y0, y1, y2 = y[k - 1], y[k], y[k + 1]
    denom = y0 - 2.0 * y1 + y2
    if denom >= 0.0:  # flat or non-concave: keep the grid point
        return float(t[k]), float(y1)
    off = 0.5 * (y0 - y2) / denom
    off = max(-0.5, min(0.5, off))
    dt = t[k + 1] - t[k] if off >= 0 else t[k] - t[k - 1]
    return float(t[k] + off * dt), float(y1 - 0.25 * (y0 - y2) * off)


def _count_oscillations(y: np.ndarray, prominence: float) -> tuple[int, list[int]]:
    """Count maxima of y with a hysteresis band.

    A maximum is registered once the series has dropped by ``prominence``
    below the running peak; this keeps integrator-resolution wiggles from
    masquerading as population oscillations.
    """
    maxima: list[int] = []
    peak = y[0]
    peak_idx = 0
    trough = y[0]
    armed = y[0] > prominence  # rising from the start counts once it falls
    for k in range(1, y.size):
        v = y[k]
        if v > peak:
            peak = v
            peak_idx = k
        if armed and peak - v >= prominence:
            maxima.append(peak_idx)
            armed = False
            trough = v
        if not armed:
            trough = min(trough, v)
            if v - trough >= prominence:
                armed = True
                peak = v
                peak_idx = k
    return len(maxima), maxima


@dataclass(frozen=True)
class TransferMetrics:
    target_level: int
    max_transfer: float
    time_of_max: float
    min_retained: float  # min over t of Pi_alpha + Pi_beta
    peak_leakage: dict[int, float]
    peak_leakage_time: dict[int, float]
    oscillation_count: int
    maxima_times: tuple[float, ...]

    def to_json_dict(self) -> dict:
        return {
            "target_level": self.target_level,
            "max_transfer": self.max_transfer,
            "time_of_max_au": self.time_of_max,
            "min_retained": self.min_retained,
            "peak_leakage": {str(k): v for k, v in self.peak_leakage.items()},
            "oscillation_count": self.oscillation_count,
            "maxima_times_au": list(self.maxima_times),
        }


def transfer_metrics(traj: Trajectory, pair: TransitionPair,
                     perturbers: Sequence[int] = (),
                     target: Optional[int] = None,
                     prominence: float = DEFAULT_PROMINENCE) -> TransferMetrics:
    """Oscillation amplitude and leakage extrema of one run.

    The transfer target defaults to whichever selected level the run did
    *not* start in; pass ``target`` explicitly for custom initial states.
    """
    pops = populations(traj)
    t = traj.times
    if target is None:
        if traj.initial_level == pair.alpha:
            target = pair.beta
        elif traj.initial_level == pair.beta:
            target = pair.alpha
        else:
            raise ValueError("run started from a custom state; pass target= explicitly")

    y = pops[:, target]
    k = int(np.argmax(y))
    t_max, y_max = _refine_max(t, y, k)
    n_osc, maxima = _count_oscillations(y, prominence)

    retained = pops[:, pair.alpha] + pops[:, pair.beta]
    k_min = int(np.argmin(retained))
    _, neg_min = _refine_max(t, -retained, k_min)  # refined like the peaks
    peak_leak = {}
    peak_leak_t = {}
    for p in perturbers:
        kp = int(np.argmax(pops[:, p]))
        tp, yp = _refine_max(t, pops[:, p], kp)
        peak_leak[int(p)] = yp
        peak_leak_t[int(p)] = tp

    return TransferMetrics(
        target_level=int(target),
        max_transfer=min(y_max, 1.0),
        time_of_max=t_max,
        min_retained=max(-neg_min, 0.0),
        peak_leakage=peak_leak,
        peak_leakage_time=peak_leak_t,
        oscillation_count=n_osc,
        maxima_times=tuple(float(t[i]) for i in maxima),
    )


@dataclass(frozen=True)
class LossEnvelopeReport:
    max_ratio: float
    median_ratio: float
    fraction_above_one: float
    n_checked: int

    def to_json_dict(self) -> dict:
        return {
            "max_ratio": self.max_ratio,
            "median_ratio": self.median_ratio,
            "fraction_above_one": self.fraction_above_one,
            "n_checked": self.n_checked,
        }


def loss_envelope_check(traj: Trajectory, pair: TransitionPair, sigma_tot_sq: float,
                        spec: PulseSpec, threshold: float = 1e-6) -> LossEnvelopeReport:
    """Instantaneous loss 1 - Pi_a - Pi_b against the m(t) sigma_tot^2 envelope.

    The ratio r(t) = loss / (m sigma_tot^2) is evaluated wherever the
    denominator exceeds ``threshold`` (this skips the vanishing edges of
    sine-family pulses, where the ratio is 0/0).
    """
    pops = populations(traj)
    loss = 1.0 - pops[:, pair.alpha] - pops[:, pair.beta]
    env = np.asarray(envelope_value(spec, traj.times + spec.t0)) * sigma_tot_sq
    mask = env > threshold
    if not np.any(mask):
        return LossEnvelopeReport(0.0, 0.0, 0.0, 0)
    r = loss[mask] / env[mask]
    return LossEnvelopeReport(
        max_ratio=float(np.max(r)),
        median_ratio=float(np.median(r)),
        fraction_above_one=float(np.mean(r > 1.0)),
        n_checked=int(r.size),
    )


def leakage_vs_bound(traj: Trajectory, strengths: Sequence[PerturberStrength],
                     slack: float = 0.1) -> dict[int, dict]:
    """Peak simulated population of each perturbing level against its
    closed-form bound. Bounds above 1 hold for any probability and are
    flagged uninformative."""
    pops = populations(traj)
    out: dict[int, dict] = {}
    for s in strengths:
        bound = leakage_bound(s)
        kp = int(np.argmax(pops[:, s.level]))
        _, peak = _refine_max(traj.times, pops[:, s.level], kp)
        out[s.level] = {
            "peak": peak,
            "bound": bound,
            "ok": peak <= bound * (1.0 + slack),
            "informative": bound < 1.0,
        }
    return out


@dataclass(frozen=True)
class ComparisonReport:
    resonant: TransferMetrics
    optimized: TransferMetrics
    amplitude_gain: float
    times: np.ndarray
    series: dict[str, np.ndarray]  # e.g. "resonant.pop_0" -> values on times

    def to_json_dict(self) -> dict:
        return {
            "resonant": self.resonant.to_json_dict(),
            "optimized": self.optimized.to_json_dict(),
            "amplitude_gain": self.amplitude_gain,
        }

    def to_json(self, stream: TextIO) -> None:
        json.dump(self.to_json_dict(), stream, indent=2)
        stream.write("\n")

    def to_csv(self, stream: TextIO) -> None:
        """Long format (t_au, series, value) for plotting tools."""
        stream.write("t_au,series,value\n")
        for name in sorted(self.series):
            vals = self.series[name]
            for k in range(self.times.size):
                stream.write(f"{self.times[k]:.17g},{name},{vals[k]:.17g}\n")


def compare_runs(resonant: Trajectory, optimized: Trajectory, pair: TransitionPair,
                 perturbers: Sequence[int] = ()) -> ComparisonReport:
    """Side-by-side metrics for a resonant and an optimized run of the same
    pulse. Trajectories on different report grids are resampled onto the
    resonant one."""
    t = resonant.times
    pops_res = populations(resonant)
    pops_opt = populations(optimized)
    if optimized.times.shape != t.shape or not np.array_equal(optimized.times, t):
        pops_opt = np.column_stack([
            np.interp(t, optimized.times, pops_opt[:, i])
            for i in range(pops_opt.shape[1])
        ])
        optimized = Trajectory(times=t, amplitudes=np.sqrt(pops_opt).astype(complex),
                               picture=optimized.picture,
                               initial_level=optimized.initial_level,
                               norm_drift=optimized.norm_drift, stats=optimized.stats)

    m_res = transfer_metrics(resonant, pair, perturbers)
    m_opt = transfer_metrics(optimized, pair, perturbers)
    series: dict[str, np.ndarray] = {}
    for i in range(pops_res.shape[1]):
        series[f"resonant.pop_{i}"] = pops_res[:, i]
        series[f"optimized.pop_{i}"] = pops_opt[:, i]
    return ComparisonReport(
        resonant=m_res,
        optimized=m_opt,
        amplitude_gain=m_opt.max_transfer - m_res.max_transfer,
        times=t,
        series=series,
    )
