"""Compiled DOP853 stepper for u_k'' = (x - 2 sum_j u_j^2 - eps_k) u_k.

State layout: y = [u_1..u_n, u_1'..u_n'].
"""

import math

import numpy as np
from numba import njit

from . import _dop853_tableau as tab

N_STAGES = tab.N_STAGES
A_TAB = np.ascontiguousarray(tab.A)
B_TAB = np.ascontiguousarray(tab.B)
C_TAB = np.ascontiguousarray(tab.C)
E3_TAB = np.ascontiguousarray(tab.E3)
E5_TAB = np.ascontiguousarray(tab.E5)
D_TAB = np.ascontiguousarray(tab.D)

STATUS_OK = 0
STATUS_UNDERFLOW = 1
STATUS_BLOWUP = 2
STATUS_MAX_STEPS = 3

# Lund-stabilised PI controller constants (Hairer's DOP853 conventions).
SAFE = 0.9
FAC_MIN = 1.0 / 3.0
FAC_MAX = 6.0
BETA = 0.04
EXPO1 = 1.0 / 8.0 - BETA * 0.2


@njit(cache=True)
def deriv(x, y, eps, out):
    n = eps.size
    s = 0.0
    for k in range(n):
        s += y[k] * y[k]
    for k in range(n):
        out[k] = y[n + k]
        out[n + k] = (x - 2.0 * s - eps[k]) * y[k]


@njit(cache=True)
def local_frequency(x, eps_max):
    """Fastest oscillation frequency of the linearised system at x."""
    w2 = 1.0
    if -x + eps_max > w2:
        w2 = -x + eps_max
    if 2.0 * x > w2:
        w2 = 2.0 * x
    if eps_max > w2:
        w2 = eps_max
    return math.sqrt(w2)


@njit(cache=True, nogil=True)
def sample_grid(x0, x1, dx_max, eps_max, phase_per_sample):
    """Monotone grid from x0 to x1 (both included) whose spacing keeps the
    local phase advance below ``phase_per_sample``."""
    direction = 1.0 if x1 > x0 else -1.0
    cap = 16
    out = np.empty(cap)
    out[0] = x0
    m = 1
    x = x0
    while True:
        dx = phase_per_sample / local_frequency(x, eps_max)
        if dx > dx_max:
            dx = dx_max
        x = x + direction * dx
        if direction * (x1 - x) <= 1e-12 * (1.0 + abs(x1)):
            x = x1
        if m == cap:
            new = np.empty(2 * cap)
            new[:cap] = out
            out = new
            cap *= 2
        out[m] = x
        m += 1
        if x == x1:
            break
    return out[:m]


@njit(cache=True)
def _error_norm(K, h, scale, N):
    e5 = 0.0
    e3 = 0.0
    for i in range(N):
        a5 = 0.0
        a3 = 0.0
        for j in range(N_STAGES + 1):
            a5 += E5_TAB[j] * K[j, i]
            a3 += E3_TAB[j] * K[j, i]
        a5 /= scale[i]
        a3 /= scale[i]
        e5 += a5 * a5
        e3 += a3 * a3
    if e5 == 0.0 and e3 == 0.0:
        return 0.0
    return abs(h) * e5 / math.sqrt((e5 + 0.01 * e3) * N)


@njit(cache=True)
def _initial_step(x0, y0, f0, eps, direction, rtol, atol, N):
    # Hairer's starting-step heuristic for an order-8 method.
    scale = np.empty(N)
    d0 = 0.0
    d1 = 0.0
    for i in range(N):
        scale[i] = atol + rtol * abs(y0[i])
        d0 += (y0[i] / scale[i]) ** 2
        d1 += (f0[i] / scale[i]) ** 2
    d0 = math.sqrt(d0 / N)
    d1 = math.sqrt(d1 / N)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    y1 = np.empty(N)
    for i in range(N):
        y1[i] = y0[i] + h0 * direction * f0[i]
    f1 = np.empty(N)
    deriv(x0 + h0 * direction, y1, eps, f1)
    d2 = 0.0
    for i in range(N):
        d2 += ((f1[i] - f0[i]) / scale[i]) ** 2
    d2 = math.sqrt(d2 / N) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / 8.0)
    return min(100.0 * h0, h1)


@njit(cache=True, nogil=True)
def integrate_dense(x0, y0, x1, eps, rtol, atol, max_step, max_phase_step,
                    xs, blowup, max_steps):
    """Integrate from x0 to x1 and record the dense solution at ``xs``.

    ``xs`` must be monotone in the integration direction with xs[0] == x0.
    Returns (ys, n_filled, status, x_last, nsteps, nfev, nreject).
    """
    N = y0.size
    n = N // 2
    eps_max = eps[n - 1]
    direction = 1.0 if x1 > x0 else -1.0
    K = np.zeros((16, N))
    F = np.zeros((7, N))
    ys = np.empty((xs.size, N))
    ytmp = np.empty(N)
    y_new = np.empty(N)
    scale = np.empty(N)

    y = y0.copy()
    x = x0
    deriv(x, y, eps, K[0])
    nfev = 1
    ys[0] = y
    filled = 1

    h_abs = _initial_step(x, y, K[0], eps, direction, rtol, atol, N)
    nfev += 1
    facold = 1e-4
    nsteps = 0
    nreject = 0
    rejected_last = False

    while direction * (x1 - x) > 0.0:
        if nsteps >= max_steps:
            return ys, filled, STATUS_MAX_STEPS, x, nsteps, nfev, nreject
        cap = min(max_step, max_phase_step / local_frequency(x, eps_max))
        if h_abs > cap:
            h_abs = cap
        if h_abs < 1e-14 * max(1.0, abs(x)):
            return ys, filled, STATUS_UNDERFLOW, x, nsteps, nfev, nreject
        last = False
        if h_abs >= direction * (x1 - x):
            h_abs = direction * (x1 - x)
            last = True
        h = direction * h_abs

        for s in range(1, N_STAGES):
            for i in range(N):
                acc = 0.0
                for j in range(s):
                    acc += A_TAB[s, j] * K[j, i]
                ytmp[i] = y[i] + h * acc
            deriv(x + C_TAB[s] * h, ytmp, eps, K[s])
        for i in range(N):
            acc = 0.0
            for j in range(N_STAGES):
                acc += B_TAB[j] * K[j, i]
            y_new[i] = y[i] + h * acc
        x_new = x1 if last else x + h
        deriv(x_new, y_new, eps, K[N_STAGES])
        nfev += N_STAGES

        for i in range(N):
            scale[i] = atol + rtol * max(abs(y[i]), abs(y_new[i]))
        err = _error_norm(K, h, scale, N)
        nsteps += 1

        if err <= 1.0:
            # dense output on (x, x_new]
            if filled < xs.size and direction * (x_new - xs[filled]) >= 0.0:
                for s in range(N_STAGES + 1, 16):
                    for i in range(N):
                        acc = 0.0
                        for j in range(s):
                            acc += A_TAB[s, j] * K[j, i]
                        ytmp[i] = y[i] + h * acc
                    deriv(x + C_TAB[s] * h, ytmp, eps, K[s])
                nfev += 3
                for i in range(N):
                    dy = y_new[i] - y[i]
                    F[0, i] = dy
                    F[1, i] = h * K[0, i] - dy
                    F[2, i] = 2.0 * dy - h * (K[N_STAGES, i] + K[0, i])
                    for r in range(4):
                        acc = 0.0
                        for j in range(16):
                            acc += D_TAB[r, j] * K[j, i]
                        F[3 + r, i] = h * acc
                while filled < xs.size and direction * (x_new - xs[filled]) >= 0.0:
                    th = (xs[filled] - x) / h
                    for i in range(N):
                        v = 0.0
                        for r in range(6, -1, -1):
                            v += F[r, i]
                            if (6 - r) % 2 == 0:
                                v *= th
                            else:
                                v *= 1.0 - th
                        ys[filled, i] = y[i] + v
                    filled += 1

            x = x_new
            for i in range(N):
                y[i] = y_new[i]
                K[0, i] = K[N_STAGES, i]
            for k in range(n):
                if abs(y[k]) > blowup:
                    return ys, filled, STATUS_BLOWUP, x, nsteps, nfev, nreject

            fac11 = err ** EXPO1 if err > 0.0 else 0.0
            fac = fac11 / facold ** BETA
            fac = max(1.0 / FAC_MAX, min(1.0 / FAC_MIN, fac / SAFE))
            facold = max(err, 1e-4)
            h_new = h_abs / fac
            if rejected_last:
                h_new = min(h_new, h_abs)
            rejected_last = False
            h_abs = h_new
        else:
            fac11 = err ** EXPO1
            h_abs = h_abs / min(1.0 / FAC_MIN, fac11 / SAFE)
            rejected_last = True
            nreject += 1

    return ys, filled, STATUS_OK, x, nsteps, nfev, nreject
