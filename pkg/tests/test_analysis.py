import io
import math

import numpy as np
import pytest

from rabichirp import (ChirpedCarrier, FixedCarrier, IntegratorOptions, Trajectory,
                       compare_runs, first_order_chirp, integrate, leakage_vs_bound,
                       loss_envelope_check, make_pulse, perturber_strengths,
                       pi_pulse_duration, recurrent_chirp, sigma_tot_sq,
                       transfer_metrics, transition_sign_and_freq)
from rabichirp.dynamics import IntegratorStats

from conftest import f0_for_sigma_sq


def fabricate(times, pops, initial_level=1):
    """Hand-built trajectory from a population table (phases all zero)."""
    amps = np.sqrt(np.asarray(pops, float)).astype(complex)
    stats = IntegratorStats(steps=1, rejected=0, rhs_evals=1, err_accum=0.0,
                            status=0, t_reached=float(times[-1]), norm_flagged=False)
    return Trajectory(times=np.asarray(times, float), amplitudes=amps,
                      picture="interaction", initial_level=initial_level,
                      norm_drift=0.0, stats=stats)


@pytest.fixture(scope="module")
def two_level_pi_run(sys_two, pair01):
    w = transition_sign_and_freq(sys_two, 1, 0)[1]
    mu = sys_two.mu(0, 1)
    f0 = 2e-3 * w / mu
    d = 2 * math.pi / (f0 * mu)
    spec = make_pulse(f0, "square", d, carrier=FixedCarrier(w))
    return integrate(sys_two, pair01, spec)


class TestTransferMetrics:
    def test_two_level_full_oscillation(self, two_level_pi_run, pair01):
        m = transfer_metrics(two_level_pi_run, pair01)
        assert m.target_level == 0  # run starts in beta
        assert m.max_transfer >= 1 - 1e-4
        assert m.oscillation_count == 1
        assert m.min_retained == pytest.approx(1.0, abs=1e-9)
        assert m.time_of_max == pytest.approx(two_level_pi_run.times[-1] / 2, rel=1e-2)

    def test_zero_field_no_transfer(self, sys_two, pair01):
        w = transition_sign_and_freq(sys_two, 1, 0)[1]
        spec = make_pulse(0.0, "square", 1e4, carrier=FixedCarrier(w))
        traj = integrate(sys_two, pair01, spec, opts=IntegratorOptions(n_report=50))
        m = transfer_metrics(traj, pair01)
        assert m.max_transfer == 0.0
        assert m.min_retained == 1.0
        assert m.oscillation_count == 0

    def test_oscillation_count_multiple(self, pair01):
        t = np.linspace(0, 10, 2001)
        pb = np.cos(math.pi * t / 5) ** 2  # two full oscillations of the pair
        pops = np.column_stack([1 - pb, pb])
        m = transfer_metrics(fabricate(t, pops), pair01)
        assert m.oscillation_count == 2
        assert m.maxima_times == pytest.approx((2.5, 7.5), abs=0.01)

    def test_tiny_wiggles_not_counted(self, pair01):
        t = np.linspace(0, 10, 2001)
        pb = np.sin(math.pi * t / 10) ** 2
        pb = pb + 1e-5 * np.sin(40 * t)  # sub-prominence jitter near the peak
        pops = np.column_stack([np.clip(pb, 0, 1), 1 - np.clip(pb, 0, 1)])
        m = transfer_metrics(fabricate(t, pops, initial_level=1), pair01)
        assert m.oscillation_count == 1

    def test_custom_initial_needs_target(self, sys_two, pair01):
        y0 = np.array([1, 1j], complex) / math.sqrt(2)
        w = transition_sign_and_freq(sys_two, 1, 0)[1]
        spec = make_pulse(1e-4, "square", 1e4, carrier=FixedCarrier(w))
        traj = integrate(sys_two, pair01, spec, initial=y0, opts=IntegratorOptions(n_report=20))
        with pytest.raises(ValueError, match="target"):
            transfer_metrics(traj, pair01)
        m = transfer_metrics(traj, pair01, target=1)
        assert m.target_level == 1

    def test_time_reversal_same_max(self, two_level_pi_run, pair01):
        rev = Trajectory(times=two_level_pi_run.times,
                         amplitudes=two_level_pi_run.amplitudes[::-1].copy(),
                         picture="interaction", initial_level=1,
                         norm_drift=0.0, stats=two_level_pi_run.stats)
        a = transfer_metrics(two_level_pi_run, pair01)
        b = transfer_metrics(rev, pair01)
        assert a.max_transfer == pytest.approx(b.max_transfer, abs=1e-12)

    def test_peak_leakage_bounded_by_retained(self, sys_hf3, pair01, hf3_quantities):
        q = hf3_quantities
        f0 = f0_for_sigma_sq(2.0, q["gap"], q["mu_bp"])
        d = pi_pulse_duration(f0, q["mu_ab"], "sine")
        spec = make_pulse(f0, "sine", d, carrier=FixedCarrier(q["w_ab"]))
        traj = integrate(sys_hf3, pair01, spec)
        m = transfer_metrics(traj, pair01, [2])
        # slack covers the parabolic refinement and the integrator norm drift
        assert m.peak_leakage[2] <= 1 - m.min_retained + 1e-9
        assert 0 <= m.peak_leakage[2] <= 1

    def test_probabilities_in_range(self, two_level_pi_run, pair01):
        m = transfer_metrics(two_level_pi_run, pair01)
        for v in (m.max_transfer, m.min_retained):
            assert 0.0 <= v <= 1.0 + 1e-9


class TestLossEnvelope:
    def test_no_perturbers_zero(self, two_level_pi_run, sys_two, pair01):
        w = transition_sign_and_freq(sys_two, 1, 0)[1]
        spec = make_pulse(1e-4, "square", two_level_pi_run.times[-1],
                          carrier=FixedCarrier(w))
        rep = loss_envelope_check(two_level_pi_run, pair01, 0.0, spec)
        assert rep.n_checked == 0
        assert rep.max_ratio == 0.0

    def test_multi12_optimized_within_envelope(self, sys_multi12, pair01):
        f0 = 3.5e-4
        mu_ab = sys_multi12.mu(0, 1)
        d = pi_pulse_duration(f0, mu_ab, "sine")
        bare = make_pulse(f0, "sine", d)
        prof = first_order_chirp(sys_multi12, pair01, bare)
        spec = make_pulse(f0, "sine", d, carrier=ChirpedCarrier(prof))
        traj = integrate(sys_multi12, pair01, spec)
        s2 = sigma_tot_sq(perturber_strengths(sys_multi12, pair01, f0))
        rep = loss_envelope_check(traj, pair01, s2, spec)
        assert rep.max_ratio <= 1.2
        assert rep.median_ratio < 1.0

    def test_strong_drive_reported_not_asserted(self, sys_hf3, pair01, hf3_quantities):
        # sigma^2 = 2 sits far outside the small-perturbation regime: the
        # check still runs and reports, the caller decides what to make of it
        q = hf3_quantities
        f0 = f0_for_sigma_sq(2.0, q["gap"], q["mu_bp"])
        d = pi_pulse_duration(f0, q["mu_ab"], "sine")
        spec = make_pulse(f0, "sine", d, carrier=FixedCarrier(q["w_ab"]))
        traj = integrate(sys_hf3, pair01, spec)
        rep = loss_envelope_check(traj, pair01, 2.0, spec)
        assert rep.n_checked > 0
        assert math.isfinite(rep.max_ratio)


class TestLeakageVsBound:
    def test_hf3_weak_drive_within_bound(self, sys_hf3, pair01, hf3_quantities):
        q = hf3_quantities
        f0 = f0_for_sigma_sq(0.04, q["gap"], q["mu_bp"])
        d = pi_pulse_duration(f0, q["mu_ab"], "sine")
        spec = make_pulse(f0, "sine", d, carrier=FixedCarrier(q["w_ab"]))
        traj = integrate(sys_hf3, pair01, spec)
        strengths = perturber_strengths(sys_hf3, pair01, f0)
        rep = leakage_vs_bound(traj, strengths)
        assert rep[2]["ok"]
        assert rep[2]["informative"]
        assert rep[2]["peak"] <= 0.0402 * 1.1

    def test_zero_sigma_zero_peak(self, sys_hf3, pair01):
        w = transition_sign_and_freq(sys_hf3, 1, 0)[1]
        spec = make_pulse(0.0, "square", 1e4, carrier=FixedCarrier(w))
        traj = integrate(sys_hf3, pair01, spec, opts=IntegratorOptions(n_report=20))
        strengths = perturber_strengths(sys_hf3, pair01, 0.0)
        rep = leakage_vs_bound(traj, strengths)
        assert rep[2]["peak"] == 0.0
        assert rep[2]["bound"] == 0.0
        assert rep[2]["ok"]

    def test_no_perturbers_empty_report(self, two_level_pi_run):
        assert leakage_vs_bound(two_level_pi_run, []) == {}

    def test_strong_drive_flagged_uninformative(self, sys_hf3, pair01, hf3_quantities):
        q = hf3_quantities
        f0 = f0_for_sigma_sq(2.0, q["gap"], q["mu_bp"])
        d = pi_pulse_duration(f0, q["mu_ab"], "sine")
        spec = make_pulse(f0, "sine", d, carrier=FixedCarrier(q["w_ab"]))
        traj = integrate(sys_hf3, pair01, spec)
        strengths = perturber_strengths(sys_hf3, pair01, f0)
        rep = leakage_vs_bound(traj, strengths)
        assert rep[2]["bound"] > 1.0
        assert rep[2]["ok"]
        assert not rep[2]["informative"]


class TestCompareRuns:
    def test_identical_runs_zero_gain(self, two_level_pi_run, pair01):
        rep = compare_runs(two_level_pi_run, two_level_pi_run, pair01)
        assert rep.amplitude_gain == 0.0

    def test_hf3_strong_drive_gain_positive(self, sys_hf3, pair01, hf3_quantities):
        q = hf3_quantities
        f0 = f0_for_sigma_sq(2.0, q["gap"], q["mu_bp"])
        d = pi_pulse_duration(f0, q["mu_ab"], "square", target=2 * math.pi)
        bare = make_pulse(f0, "square", d)
        prof = recurrent_chirp(sys_hf3, pair01, bare)
        res = integrate(sys_hf3, pair01, make_pulse(f0, "square", d,
                                                    carrier=FixedCarrier(q["w_ab"])))
        opt = integrate(sys_hf3, pair01, make_pulse(f0, "square", d,
                                                    carrier=ChirpedCarrier(prof)))
        rep = compare_runs(res, opt, pair01, [2])
        assert rep.amplitude_gain > 0
        assert rep.optimized.max_transfer > rep.resonant.max_transfer

    def test_mismatched_grids_resampled(self, sys_two, pair01):
        w = transition_sign_and_freq(sys_two, 1, 0)[1]
        spec = make_pulse(1e-4, "square", 1e4, carrier=FixedCarrier(w))
        a = integrate(sys_two, pair01, spec, opts=IntegratorOptions(n_report=100))
        b = integrate(sys_two, pair01, spec, opts=IntegratorOptions(n_report=173))
        rep = compare_runs(a, b, pair01)
        assert abs(rep.amplitude_gain) < 1e-8
        assert rep.times.size == 100

    def test_csv_long_format(self, two_level_pi_run, pair01):
        rep = compare_runs(two_level_pi_run, two_level_pi_run, pair01)
        buf = io.StringIO()
        rep.to_csv(buf)
        lines = buf.getvalue().strip().split("\n")
        assert lines[0] == "t_au,series,value"
        # 2 runs x 2 levels x n_report rows
        assert len(lines) - 1 == 4 * two_level_pi_run.times.size
        assert lines[1].split(",")[1] == "optimized.pop_0"
