"""Hot integration kernels.

A self-contained Dormand-Prince 5(4) stepper over the complex amplitude
vector, with the driven-system right-hand sides inlined:

* mode 0: interaction picture, da/dt = -i V(t) a with both exponential
  terms of the coupling kept (no rotating-wave approximation anywhere);
* mode 1: Schrodinger picture, dc/dt = -i (diag(E) - mu F(t)) c.

Everything below must stay numba-nopython compatible: scalar math via the
``math`` module, no closures, preallocated work arrays, status codes
instead of exceptions. The same source runs as plain Python when the
numpy backend is selected (see ``backend.py``). The stage combinations
are hand-unrolled: these loops execute tens of millions of times per
nanosecond-scale pulse.
"""

import math

import numpy as np

from .backend import jit, jit_inline

# Dormand-Prince 5(4) tableau, spelled out as scalars so the compiler can
# fold them. The propagated solution is 5th order; the last stage is FSAL
# (its weights are the propagation weights).
_A21 = 1.0 / 5.0
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0,
                                49.0 / 176.0, -5103.0 / 18656.0)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_C2, _C3, _C4, _C5 = 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0
# error weights: 5th-order minus embedded 4th-order solution
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600.0, -71.0 / 16695.0, 71.0 / 1920.0,
                                -17253.0 / 339200.0, 22.0 / 525.0, -1.0 / 40.0)
# dense-output polynomial (4th-order interpolant): y(t0 + h*th) =
# y0 + h * sum_s K[s] * sum_m P[s, m] * th**(m+1)
_P = np.array([
    [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0,
     -12715105075.0 / 11282082432.0],
    [0.0, 0.0, 0.0, 0.0],
    [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0,
     87487479700.0 / 32700410799.0],
    [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0,
     -10690763975.0 / 1880347072.0],
    [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0,
     701980252875.0 / 199316789632.0],
    [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0,
     -1453857185.0 / 822651844.0],
    [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0,
     69997945.0 / 29380423.0],
])

# integrator status codes
OK = 0
UNDERFLOW = 1
MAX_STEPS = 2


@jit_inline
def _bisect(grid, x):
    """Largest k with grid[k] <= x, clamped to [0, len-2]."""
    lo = 0
    hi = grid.shape[0] - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if grid[mid] <= x:
            lo = mid
        else:
            hi = mid
    return lo


@jit_inline
def _envelope_scalar(env_code, duration, tab_t, tab_m, t):
    if t < 0.0 or t > duration:
        return 0.0
    if env_code == 0:  # square
        return 1.0
    if env_code == 1:  # sine, single arch
        v = math.sin(math.pi * t / duration)
        return v if v > 0.0 else 0.0
    if env_code == 2:  # sine squared
        v = math.sin(math.pi * t / duration)
        return v * v
    # tabulated, linear interpolation, zero outside the table
    if t < tab_t[0] or t > tab_t[tab_t.shape[0] - 1]:
        return 0.0
    k = _bisect(tab_t, t)
    w = (t - tab_t[k]) / (tab_t[k + 1] - tab_t[k])
    return tab_m[k] + w * (tab_m[k + 1] - tab_m[k])


@jit_inline
def _carrier_phase_scalar(car_mode, car_w0, car_t, car_w, car_phi, phase_mode, t):
    """Carrier phase phi(t). Literal mode: omega(t)*t with omega linearly
    interpolated; integrated mode uses the precomputed phase knots (exact
    for piecewise-linear omega). Queries are clamped to the sampled domain:
    outside it the envelope is zero and the phase is irrelevant."""
    if car_mode == 0:
        return car_w0 * t
    n = car_t.shape[0]
    tc = t
    if tc < car_t[0]:
        tc = car_t[0]
    elif tc > car_t[n - 1]:
        tc = car_t[n - 1]
    k = _bisect(car_t, tc)
    dt = tc - car_t[k]
    slope = (car_w[k + 1] - car_w[k]) / (car_t[k + 1] - car_t[k])
    if phase_mode == 0:
        return (car_w[k] + slope * dt) * t
    return car_phi[k] + car_w[k] * dt + 0.5 * slope * dt * dt


@jit_inline
def _rhs(mode, t, y, out,
         pair_i, pair_j, pair_mu, pair_s, pair_w, energies,
         f0, env_code, duration, tab_t, tab_m,
         car_mode, car_w0, car_t, car_w, car_phi, phase_mode):
    n = y.shape[0]
    m = _envelope_scalar(env_code, duration, tab_t, tab_m, t)

    if mode == 0:
        # interaction picture: zero diagonal, Hermitian coupling with both
        # the near-resonant and the counter-rotating exponential
        for c in range(n):
            out[c] = 0.0 + 0.0j
        if m == 0.0:
            return
        phi = _carrier_phase_scalar(car_mode, car_w0, car_t, car_w, car_phi, phase_mode, t)
        for k in range(pair_i.shape[0]):
            i = pair_i[k]
            j = pair_j[k]
            pref = 0.5 * f0 * pair_mu[k] * m
            th1 = pair_s[k] * (phi - pair_w[k] * t)
            th2 = pair_s[k] * (phi + pair_w[k] * t)
            # V_ij = pref * (e^{i th1} + e^{-i th2}); out += -i V y
            vr = pref * (math.cos(th1) + math.cos(th2))
            vi = pref * (math.sin(th1) - math.sin(th2))
            yj = y[j]
            yi = y[i]
            out[i] += complex(vi * yj.real + vr * yj.imag, vi * yj.imag - vr * yj.real)
            out[j] += complex(-vi * yi.real + vr * yi.imag, -vi * yi.imag - vr * yi.real)
    else:
        # Schrodinger picture: dc/dt = -i diag(E) c + i F(t) mu c
        fld = 0.0
        if m != 0.0:
            phi = _carrier_phase_scalar(car_mode, car_w0, car_t, car_w, car_phi, phase_mode, t)
            fld = f0 * m * math.cos(phi)
        for c in range(n):
            e = energies[c]
            yc = y[c]
            out[c] = complex(e * yc.imag, -e * yc.real)
        if fld != 0.0:
            for k in range(pair_i.shape[0]):
                i = pair_i[k]
                j = pair_j[k]
                w = fld * pair_mu[k]
                yj = y[j]
                yi = y[i]
                out[i] += complex(-w * yj.imag, w * yj.real)
                out[j] += complex(-w * yi.imag, w * yi.real)


@jit
def integrate_adaptive(mode,
                       pair_i, pair_j, pair_mu, pair_s, pair_w, energies,
                       f0, env_code, duration, tab_t, tab_m,
                       car_mode, car_w0, car_t, car_w, car_phi, phase_mode,
                       y0, t_eval, rtol, atol, max_step, max_steps):
    """Adaptive DOPRI5(4) over [0, t_eval[-1]] with dense output at t_eval.

    Returns (y_out, steps, rejected, n_rhs, err_accum, status, t_reached)
    where err_accum sums the unscaled RMS local-error estimates of the
    accepted steps (a crude global-error proxy).
    """
    n = y0.shape[0]
    nt = t_eval.shape[0]
    t_end = t_eval[nt - 1]

    y_out = np.zeros((nt, n), np.complex128)
    y = y0.copy()
    k1 = np.zeros(n, np.complex128)
    k2 = np.zeros(n, np.complex128)
    k3 = np.zeros(n, np.complex128)
    k4 = np.zeros(n, np.complex128)
    k5 = np.zeros(n, np.complex128)
    k6 = np.zeros(n, np.complex128)
    k7 = np.zeros(n, np.complex128)
    ys = np.zeros(n, np.complex128)
    yn = np.zeros(n, np.complex128)

    idx = 0
    while idx < nt and t_eval[idx] <= 0.0:
        for c in range(n):
            y_out[idx, c] = y[c]
        idx += 1

    t = 0.0
    _rhs(mode, t, y, k1, pair_i, pair_j, pair_mu, pair_s, pair_w, energies,
         f0, env_code, duration, tab_t, tab_m,
         car_mode, car_w0, car_t, car_w, car_phi, phase_mode)
    n_rhs = 1
    steps = 0
    rejected = 0
    err_accum = 0.0
    status = OK
    h = max_step * 0.1
    was_rejected = False

    while t < t_end:
        if steps + rejected >= max_steps:
            status = MAX_STEPS
            break
        if h > max_step:
            h = max_step
        last = False
        if t + h >= t_end:
            h = t_end - t
            last = True
        if h < 1e-13 * (1.0 if t < 1.0 else t):
            status = UNDERFLOW
            break

        for c in range(n):
            ys[c] = y[c] + h * (_A21 * k1[c])
        _rhs(mode, t + _C2 * h, ys, k2, pair_i, pair_j, pair_mu, pair_s, pair_w,
             energies, f0, env_code, duration, tab_t, tab_m,
             car_mode, car_w0, car_t, car_w, car_phi, phase_mode)
        for c in range(n):
            ys[c] = y[c] + h * (_A31 * k1[c] + _A32 * k2[c])
        _rhs(mode, t + _C3 * h, ys, k3, pair_i, pair_j, pair_mu, pair_s, pair_w,
             energies, f0, env_code, duration, tab_t, tab_m,
             car_mode, car_w0, car_t, car_w, car_phi, phase_mode)
        for c in range(n):
            ys[c] = y[c] + h * (_A41 * k1[c] + _A42 * k2[c] + _A43 * k3[c])
        _rhs(mode, t + _C4 * h, ys, k4, pair_i, pair_j, pair_mu, pair_s, pair_w,
             energies, f0, env_code, duration, tab_t, tab_m,
             car_mode, car_w0, car_t, car_w, car_phi, phase_mode)
        for c in range(n):
            ys[c] = y[c] + h * (_A51 * k1[c] + _A52 * k2[c] + _A53 * k3[c] + _A54 * k4[c])
        _rhs(mode, t + _C5 * h, ys, k5, pair_i, pair_j, pair_mu, pair_s, pair_w,
             energies, f0, env_code, duration, tab_t, tab_m,
             car_mode, car_w0, car_t, car_w, car_phi, phase_mode)
        for c in range(n):
            ys[c] = y[c] + h * (_A61 * k1[c] + _A62 * k2[c] + _A63 * k3[c]
                                + _A64 * k4[c] + _A65 * k5[c])
        _rhs(mode, t + h, ys, k6, pair_i, pair_j, pair_mu, pair_s, pair_w,
             energies, f0, env_code, duration, tab_t, tab_m,
             car_mode, car_w0, car_t, car_w, car_phi, phase_mode)
        for c in range(n):
            yn[c] = y[c] + h * (_B1 * k1[c] + _B3 * k3[c] + _B4 * k4[c]
                                + _B5 * k5[c] + _B6 * k6[c])
        _rhs(mode, t + h, yn, k7, pair_i, pair_j, pair_mu, pair_s, pair_w,
             energies, f0, env_code, duration, tab_t, tab_m,
             car_mode, car_w0, car_t, car_w, car_phi, phase_mode)
        n_rhs += 6

        err_sq = 0.0
        err_abs_sq = 0.0
        for c in range(n):
            e = h * (_E1 * k1[c] + _E3 * k3[c] + _E4 * k4[c]
                     + _E5 * k5[c] + _E6 * k6[c] + _E7 * k7[c])
            ea2 = e.real * e.real + e.imag * e.imag
            y0c = y[c]
            y1c = yn[c]
            m0 = y0c.real * y0c.real + y0c.imag * y0c.imag
            m1 = y1c.real * y1c.real + y1c.imag * y1c.imag
            sc = atol + rtol * math.sqrt(m0 if m0 > m1 else m1)
            err_sq += ea2 / (sc * sc)
            err_abs_sq += ea2
        err_norm = math.sqrt(err_sq / n)

        if err_norm <= 1.0:
            t_old = t
            t = t_end if last else t + h
            while idx < nt and t_eval[idx] <= t:
                th = (t_eval[idx] - t_old) / h
                if th >= 1.0:
                    for c in range(n):
                        y_out[idx, c] = yn[c]
                else:
                    th2 = th * th
                    b1 = _P[0, 0] * th + _P[0, 1] * th2 + _P[0, 2] * th2 * th + _P[0, 3] * th2 * th2
                    b3 = _P[2, 0] * th + _P[2, 1] * th2 + _P[2, 2] * th2 * th + _P[2, 3] * th2 * th2
                    b4 = _P[3, 0] * th + _P[3, 1] * th2 + _P[3, 2] * th2 * th + _P[3, 3] * th2 * th2
                    b5 = _P[4, 0] * th + _P[4, 1] * th2 + _P[4, 2] * th2 * th + _P[4, 3] * th2 * th2
                    b6 = _P[5, 0] * th + _P[5, 1] * th2 + _P[5, 2] * th2 * th + _P[5, 3] * th2 * th2
                    b7 = _P[6, 0] * th + _P[6, 1] * th2 + _P[6, 2] * th2 * th + _P[6, 3] * th2 * th2
                    for c in range(n):
                        y_out[idx, c] = y[c] + h * (b1 * k1[c] + b3 * k3[c] + b4 * k4[c]
                                                    + b5 * k5[c] + b6 * k6[c] + b7 * k7[c])
                idx += 1
            for c in range(n):
                y[c] = yn[c]
                k1[c] = k7[c]
            err_accum += math.sqrt(err_abs_sq / n)
            steps += 1
            if err_norm == 0.0:
                factor = 10.0
            else:
                factor = 0.9 * err_norm ** -0.2
                if factor > 10.0:
                    factor = 10.0
            if was_rejected and factor > 1.0:
                factor = 1.0
            was_rejected = False
            h *= factor
        else:
            rejected += 1
            was_rejected = True
            factor = 0.9 * err_norm ** -0.2
            if factor < 0.2:
                factor = 0.2
            h *= factor

    # flush any report times not reached (failed runs): hold the last state
    while idx < nt:
        for c in range(n):
            y_out[idx, c] = y[c]
        idx += 1

    return y_out, steps, rejected, n_rhs, err_accum, status, t
