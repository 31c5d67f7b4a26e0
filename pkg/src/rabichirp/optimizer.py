"""Closed-form pulse-design quantities and the optimized carrier frequency.

For each level p coupled to one of the selected levels, a dimensionless
perturbation strength

    sigma = F0 * mu_p / (2 * (w_ab - w_p))

gauges how strongly the drive stirs it: sigma^2 is (approximately) the peak
population that leaks into p, so sigma^2 << 1 is the weak-drive regime. The
carrier frequency that best cancels the perturber-induced shift of the
driven transition is computed either in closed form (first order) or by
fixed-point iteration of the self-consistent detuning Delta(t), where

    Delta(t) = (omega(t) - w_ab) / (w_p - w_ab).

Both are sampled on a uniform grid with cumulative-trapezoid integrals; the
first fixed-point iterate reproduces the first-order profile exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional, TextIO

import numpy as np

from .errors import DegeneracyError, DivergenceError
from .pulse import Envelope, PulseSpec, _env_local, pi_pulse_duration
from .qsystem import LevelSystem, TransitionPair, perturber_sets, transition_sign_and_freq

DEFAULT_GRID = 4096
DEFAULT_TOL = 1e-12
DEFAULT_MAX_ITER = 50

# fixed-point denominators (1 - Delta), (1 - delta*Delta) must stay positive;
# below this floor the recurrence is meaningless and we abort
_DENOM_FLOOR = 1e-9


@dataclass(frozen=True)
class PerturberStrength:
    """Strength and geometry of one perturbing level.

    ``sigma`` keeps the sign of the detuning denominator (diagnostic only;
    every formula below uses sigma^2). ``sign_product`` is s_ba*s_bp for a
    beta-side perturber, s_ab*s_aq for an alpha-side one, and fixes the
    direction of the optimizing frequency shift. ``freq_offset`` is the
    signed gap w_p - w_ab between the perturbing and driven transition
    frequencies.
    """

    level: int
    side: str  # "alpha" | "beta": which selected level it couples to
    mu: float
    omega: float  # transition frequency to its selected level, a.u.
    sigma: float
    delta: float
    sign_product: int
    freq_offset: float

    @property
    def sigma_sq(self) -> float:
        return self.sigma * self.sigma


def perturber_strength(f0: float, mu_p: float, omega_ab: float, omega_p: float,
                       sign_product: int, level: int = -1, side: str = "beta") -> PerturberStrength:
    """Build a PerturberStrength from raw transition quantities."""
    if omega_ab <= 0.0 or omega_p <= 0.0:
        raise ValueError("transition frequencies must be positive")
    if omega_ab == omega_p:
        raise DegeneracyError(
            f"perturbing transition (w = {omega_p}) is degenerate with the driven "
            "one; sigma is undefined"
        )
    gap = omega_ab - omega_p
    return PerturberStrength(
        level=level,
        side=side,
        mu=mu_p,
        omega=omega_p,
        sigma=f0 * mu_p / (2.0 * gap),
        delta=gap / (omega_ab + omega_p),
        sign_product=sign_product,
        freq_offset=-gap,
    )


def perturber_strengths(sys: LevelSystem, pair: TransitionPair, f0: float) -> list[PerturberStrength]:
    """All perturbers of both selected levels, sorted alpha-side then beta-side,
    each side by level id (a fixed order keeps summations reproducible)."""
    a, b = pair.alpha, pair.beta
    q_ids, p_ids = perturber_sets(sys, pair)
    s_ab, w_ab = transition_sign_and_freq(sys, a, b)
    s_ba = -s_ab
    out = []
    for q in q_ids:
        s_aq, w_aq = transition_sign_and_freq(sys, a, q)
        out.append(perturber_strength(f0, sys.mu(a, q), w_ab, w_aq,
                                      sign_product=s_ab * s_aq, level=q, side="alpha"))
    for p in p_ids:
        s_bp, w_bp = transition_sign_and_freq(sys, b, p)
        out.append(perturber_strength(f0, sys.mu(b, p), w_ab, w_bp,
                                      sign_product=s_ba * s_bp, level=p, side="beta"))
    return out


def leakage_bound(s: PerturberStrength) -> float:
    """Upper bound sigma^2 (1 + |delta|)^2 on the perturbing level's population."""
    return s.sigma_sq * (1.0 + abs(s.delta)) ** 2


def max_drive(leakage_budget: float, mu_p: float, omega_ab: float, omega_p: float) -> float:
    """Largest F0 keeping one perturber's leakage below the budget."""
    if not 0.0 < leakage_budget < 1.0:
        raise ValueError(f"leakage budget must lie in (0, 1), got {leakage_budget}")
    return abs(2.0 * (omega_ab - omega_p) / mu_p) * math.sqrt(leakage_budget)


def sigma_tot_sq(strengths: list[PerturberStrength]) -> float:
    """Total perturbation strength: the plain sum of sigma^2 over both sides."""
    return float(sum(s.sigma_sq for s in strengths))


@dataclass(frozen=True)
class ChirpProfile:
    """Sampled optimized carrier omega(t) on [0, D], plus its provenance.

    ``delta`` holds, for every perturber, the normalized detuning
    (omega(t) - w_ab) / (w_p - w_ab) evaluated from the final profile, one
    row per perturber in the order of ``perturber_levels``.
    """

    times: np.ndarray
    omega: np.ndarray
    omega_ab: float
    perturber_levels: tuple[int, ...]
    delta: np.ndarray  # (n_perturbers, n_samples)
    order: str  # "first_order" | "recurrent"
    iterations: int
    converged: bool

    def __post_init__(self):
        for arr in (self.times, self.omega, self.delta):
            arr.setflags(write=False)

    def to_csv(self, stream: TextIO) -> None:
        cols = ["t_au", "omega_au"] + [f"delta_{lv}" for lv in self.perturber_levels]
        stream.write(",".join(cols) + "\n")
        for k in range(self.times.size):
            row = [self.times[k], self.omega[k]] + [self.delta[i, k] for i in range(self.delta.shape[0])]
            stream.write(",".join(f"{v:.17g}" for v in row) + "\n")


def _mean_square_grid(env: Envelope, duration: float, times: np.ndarray) -> np.ndarray:
    """(1/t) int_0^t m^2 dt' on the grid by cumulative trapezoid; the t = 0
    sample takes the continuity limit m(0)^2."""
    m2 = _env_local(env, duration, times) ** 2
    cum = np.zeros_like(m2)
    cum[1:] = np.cumsum(0.5 * (m2[1:] + m2[:-1]) * np.diff(times))
    out = np.empty_like(m2)
    out[0] = m2[0]
    out[1:] = cum[1:] / times[1:]
    return out


def iterate_delta_fixed_point(sign_product: int, sigma: float, delta: float,
                              times: np.ndarray, m2: np.ndarray,
                              tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER):
    """Fixed-point iteration for one perturber's normalized detuning Delta(t).

    ``m2`` holds the raw squared-envelope samples m(t)^2 on the grid.
    Iterate k+1 re-evaluates

        Delta(t) = sp * sigma^2 (1 - delta) (1/t) int_0^t
                   m^2 / ((1 - Delta_k)(1 - delta Delta_k)) dt'

    from Delta_0 = 0, so the first iterate is exactly the first-order
    profile. Returns ``(Delta, iterations, converged, diffs)`` where diffs
    is the sup-norm change per iteration. Raises DivergenceError if either
    denominator collapses.
    """
    coef = sign_product * sigma * sigma * (1.0 - delta)
    d_cur = np.zeros_like(times)
    diffs: list[float] = []
    for it in range(1, max_iter + 1):
        if np.min(1.0 - d_cur) < _DENOM_FLOOR or np.min(1.0 - delta * d_cur) < _DENOM_FLOOR:
            raise DivergenceError(
                "fixed-point denominator vanished (Delta approached 1); the "
                "recurrence has no solution at this drive strength"
            )
        integrand = m2 / ((1.0 - d_cur) * (1.0 - delta * d_cur))
        cum = np.zeros_like(integrand)
        cum[1:] = np.cumsum(0.5 * (integrand[1:] + integrand[:-1]) * np.diff(times))
        d_next = np.empty_like(d_cur)
        d_next[0] = coef * integrand[0]
        d_next[1:] = coef * cum[1:] / times[1:]
        diff = float(np.max(np.abs(d_next - d_cur)))
        diffs.append(diff)
        d_cur = d_next
        if diff < tol:
            return d_cur, it, True, diffs
    return d_cur, max_iter, False, diffs


def _chirp(sys: LevelSystem, pair: TransitionPair, spec: PulseSpec, n_samples: int,
           order: str, tol: float, max_iter: int) -> ChirpProfile:
    _, w_ab = transition_sign_and_freq(sys, pair.alpha, pair.beta)
    strengths = perturber_strengths(sys, pair, spec.f0)
    duration = spec.duration
    times = np.linspace(0.0, duration, n_samples)
    m2 = _env_local(spec.envelope, duration, times) ** 2
    mean_m2 = _mean_square_grid(spec.envelope, duration, times)

    shift = np.zeros_like(times)
    iterations = 1
    converged = True
    for s in strengths:
        if s.mu == 0.0:
            continue
        if order == "first_order":
            d_t = s.sign_product * s.sigma_sq * (1.0 - s.delta) * mean_m2
        else:
            d_t, its, conv, _ = iterate_delta_fixed_point(
                s.sign_product, s.sigma, s.delta, times, m2, tol, max_iter)
            iterations = max(iterations, its)
            converged = converged and conv
        shift = shift + s.freq_offset * d_t

    omega = w_ab + shift
    levels = tuple(s.level for s in strengths)
    if strengths:
        offsets = np.array([s.freq_offset for s in strengths])
        delta = (omega[None, :] - w_ab) / offsets[:, None]
    else:
        delta = np.zeros((0, n_samples))
    return ChirpProfile(times=times, omega=omega, omega_ab=w_ab,
                        perturber_levels=levels, delta=delta, order=order,
                        iterations=iterations, converged=converged)


def first_order_chirp(sys: LevelSystem, pair: TransitionPair, spec: PulseSpec,
                      n_samples: int = DEFAULT_GRID) -> ChirpProfile:
    """Closed-form optimized carrier: w_ab plus the summed perturber shifts
    scaled by the running mean of m^2. Constant in t for a square pulse."""
    return _chirp(sys, pair, spec, n_samples, "first_order", DEFAULT_TOL, 1)


def recurrent_chirp(sys: LevelSystem, pair: TransitionPair, spec: PulseSpec,
                    n_samples: int = DEFAULT_GRID, tol: float = DEFAULT_TOL,
                    max_iter: int = DEFAULT_MAX_ITER) -> ChirpProfile:
    """Self-consistent optimized carrier by fixed-point iteration.

    Each perturber's Delta is iterated with its own denominators and the
    resulting shifts are summed; with several perturbers this extends the
    single-perturber recurrence (reported as order="recurrent" either way).
    Non-convergence within ``max_iter`` is flagged, not raised.
    """
    return _chirp(sys, pair, spec, n_samples, "recurrent", tol, max_iter)


@dataclass(frozen=True)
class DesignReport:
    """Everything the closed-form theory says about one candidate design."""

    f0: float
    omega_ab: float
    perturbers: list[PerturberStrength]
    sigma_tot_sq: float
    leakage_bounds: dict[int, float]
    leakage_budget: Optional[float]
    f0_max: dict[int, float]
    f0_max_overall: Optional[float]
    pi_pulse_shape: str
    pi_pulse_target: float
    pi_pulse_duration: float

    def to_json_dict(self) -> dict:
        return {
            "f0_au": self.f0,
            "omega_ab_au": self.omega_ab,
            "sigma_tot_sq": self.sigma_tot_sq,
            "perturbers": [
                {
                    "level": s.level,
                    "side": s.side,
                    "mu_au": s.mu,
                    "omega_au": s.omega,
                    "sigma": s.sigma,
                    "sigma_sq": s.sigma_sq,
                    "delta": s.delta,
                    "sign_product": s.sign_product,
                    "freq_offset_au": s.freq_offset,
                    "leakage_bound": self.leakage_bounds[s.level],
                    "f0_max_au": self.f0_max.get(s.level),
                }
                for s in self.perturbers
            ],
            "leakage_budget": self.leakage_budget,
            "f0_max_overall_au": self.f0_max_overall,
            "pi_pulse": {
                "shape": self.pi_pulse_shape,
                "target_angle": self.pi_pulse_target,
                "duration_au": self.pi_pulse_duration,
            },
        }

    def to_json(self, stream: TextIO) -> None:
        json.dump(self.to_json_dict(), stream, indent=2)
        stream.write("\n")


def design_report(sys: LevelSystem, pair: TransitionPair, f0: float, shape: str,
                  leakage_budget: Optional[float] = None,
                  pi_target: float = math.pi) -> DesignReport:
    """Assemble the full closed-form report for a drive amplitude and shape."""
    _, w_ab = transition_sign_and_freq(sys, pair.alpha, pair.beta)
    strengths = perturber_strengths(sys, pair, f0)
    bounds = {s.level: leakage_bound(s) for s in strengths}
    f0_caps: dict[int, float] = {}
    overall = None
    if leakage_budget is not None:
        for s in strengths:
            f0_caps[s.level] = max_drive(leakage_budget, s.mu, w_ab, s.omega)
        if f0_caps:
            overall = min(f0_caps.values())
    mu_ab = sys.mu(pair.alpha, pair.beta)
    return DesignReport(
        f0=f0,
        omega_ab=w_ab,
        perturbers=strengths,
        sigma_tot_sq=sigma_tot_sq(strengths),
        leakage_bounds=bounds,
        leakage_budget=leakage_budget,
        f0_max=f0_caps,
        f0_max_overall=overall,
        pi_pulse_shape=shape,
        pi_pulse_target=pi_target,
        pi_pulse_duration=pi_pulse_duration(f0, abs(mu_ab), shape, target=pi_target),
    )
