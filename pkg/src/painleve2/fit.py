"""Recover (sigma, I1, I2, phi1, phi2) from a numerical trajectory tail.

The tail model is

    u1 = s*sqrt(x/2) + s*rho*(2x)^{-1/4} cos[(2 sqrt2/3) x^{3/2} - 1.5 rho^2 ln x + phi1]
    u2 = s*A cos[sqrt(eps) x - (A^2 sqrt(eps)/2) ln x + phi2]

with the log-phase coefficients tied to the amplitudes. The sign s is
frozen before the least-squares stage.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.optimize import least_squares

from .asymptotics import SQRT2, final_tail
from .errors import AmbiguousSignError, DomainError, FitError
from .model import EquationParams, FinalAsymptotics, Trajectory, wrap_phase

FIT_CSV_HEADER = ("eps", "sigma", "I1", "I2", "sin_phi1", "cos_phi1",
                  "sin_phi2", "cos_phi2", "rms_residual")
PHASE_GRID = 64
MIN_PERIODS = 20


@dataclass(frozen=True)
class Corrections:
    """Finite-x corrections applied by the tail model."""

    renormalize: bool = False
    shift_phase: bool = False

    @classmethod
    def both(cls) -> "Corrections":
        return cls(True, True)

    @classmethod
    def none(cls) -> "Corrections":
        return cls(False, False)


@dataclass(frozen=True)
class FitReport:
    final: FinalAsymptotics
    rms_residual: float
    window: tuple
    used_corrections: Corrections
    n_points: int = 0
    restarts: int = 0

    def __post_init__(self):
        if not self.window[0] < self.window[1]:
            raise DomainError("fit window must have x_lo < x_hi")
        if not self.rms_residual >= 0.0:
            raise DomainError("rms residual must be >= 0")

    def csv_row(self) -> list:
        f = self.final
        return [f.eps, f.sigma, f.I1, f.I2, math.sin(f.phi1), math.cos(f.phi1),
                math.sin(f.phi2), math.cos(f.phi2), self.rms_residual]


def final_asymptote_model(x, fin: FinalAsymptotics, params: EquationParams,
                          corrections: Corrections = Corrections()):
    """(u1, u2) of the x -> +inf tail at x > 0."""
    return final_tail(x, fin.sigma, fin.rho, fin.A, fin.phi1, fin.phi2,
                      params.epsilon, corrections.renormalize,
                      corrections.shift_phase)


def estimate_sigma(tail: Trajectory) -> int:
    """Sign of the regular part, from the windowed mean of u1."""
    x = tail.x
    if x.size == 0:
        raise DomainError("empty window")
    eps = tail.params.eps[-1]
    if np.min(x) <= 10.0 * max(1.0, eps):
        raise DomainError("sigma estimate needs x > 10 max(1, eps)")
    mean = float(np.mean(tail.u[:, 0]))
    # regular part is sqrt(x/2) >= 2.2 here; oscillations average out
    floor = 0.25 * float(np.mean(np.sqrt(x / 2.0)))
    if abs(mean) < floor:
        raise AmbiguousSignError(
            f"mean u1 = {mean:.3g} below noise floor {floor:.3g}")
    return 1 if mean > 0.0 else -1


def default_window(traj: Trajectory, params: EquationParams) -> tuple:
    """Last 20% of the trajectory, widened (not below max(50, 10 eps)) until
    it holds MIN_PERIODS periods of the slow sqrt(eps) oscillation."""
    eps = params.epsilon
    x_lo_all, x_hi = float(np.min(traj.x)), float(np.max(traj.x))
    floor = max(50.0, 10.0 * eps)
    x_lo = x_hi - 0.2 * (x_hi - x_lo_all)
    x_lo = min(x_lo, x_hi - MIN_PERIODS * 2.0 * math.pi / math.sqrt(eps))
    x_lo = max(x_lo, floor, x_lo_all)
    if not x_lo < x_hi:
        raise DomainError("trajectory does not reach the fit region")
    return x_lo, x_hi


def _model_and_jacobian(theta, x, sigma, eps, corr: Corrections):
    rho, A, phi1, phi2 = theta
    se = math.sqrt(eps)
    lx = np.log(x)
    psi2 = se * x - 0.5 * A * A * se * lx + phi2
    c2, s2 = np.cos(psi2), np.sin(psi2)
    u2 = sigma * A * c2
    du2_dA = sigma * (c2 + A * A * se * lx * s2)
    du2_dphi2 = -sigma * A * s2

    env = (2.0 * x) ** -0.25
    psi1 = (2.0 * SQRT2 / 3.0) * x ** 1.5 - 1.5 * rho * rho * lx + phi1
    dshift_dA = 0.0
    if corr.shift_phase:
        # shift = -2 pi I2 sqrt(eps/(2x)), I2 = A^2 sqrt(eps)/2
        psi1 = psi1 - math.pi * A * A * eps / np.sqrt(2.0 * x)
        dshift_dA = -2.0 * math.pi * A * eps / np.sqrt(2.0 * x)
    c1, s1 = np.cos(psi1), np.sin(psi1)
    osc = sigma * rho * env * c1
    du1_drho = sigma * env * (c1 + 3.0 * rho * rho * lx * s1)
    du1_dphi1 = -sigma * rho * env * s1
    du1_dA = -sigma * rho * env * s1 * dshift_dA
    du1_dphi2 = np.zeros_like(x)
    if corr.renormalize:
        g = x - 2.0 * u2 * u2
        if np.any(g <= 0.0):
            g = np.maximum(g, 1e-300)
        root = np.sqrt(g / 2.0)
        regular = sigma * root
        du1_dA = du1_dA - sigma * u2 * du2_dA / root
        du1_dphi2 = -sigma * u2 * du2_dphi2 / root
    else:
        regular = sigma * np.sqrt(x / 2.0)
    u1 = regular + osc

    zeros = np.zeros_like(x)
    J1 = np.column_stack([du1_drho, du1_dA, du1_dphi1, du1_dphi2])
    J2 = np.column_stack([zeros, du2_dA, zeros, du2_dphi2])
    return u1, u2, np.vstack([J1, J2])


def _matched_phase(signal, base_phase):
    """Phase offset on a PHASE_GRID grid maximising sum signal*cos(base+phi)."""
    grid = np.arange(PHASE_GRID) * (2.0 * math.pi / PHASE_GRID)
    c, s = np.cos(base_phase), np.sin(base_phase)
    sc, ss = float(np.dot(signal, c)), float(np.dot(signal, s))
    # sum signal*cos(base+phi) = sc cos(phi) - ss sin(phi)
    score = sc * np.cos(grid) - ss * np.sin(grid)
    return float(grid[int(np.argmax(score))])


def fit_tail(traj: Trajectory, window=None, params: EquationParams | None = None,
             corrections: Corrections = Corrections(),
             max_restarts: int = 8) -> FitReport:
    """Least-squares fit of the tail model on ``window`` = (x_lo, x_hi).

    Uses a trust-region solver with the analytic Jacobian. When the first
    solve does not explain most of the oscillatory signal, restarts from
    shifted phase corners and keeps the best candidate.
    """
    params = params or traj.params
    eps = params.epsilon
    if window is None:
        window = default_window(traj, params)
    x_lo, x_hi = float(window[0]), float(window[1])
    if not 0.0 < x_lo < x_hi:
        raise DomainError("fit window must satisfy 0 < x_lo < x_hi")
    tail = traj.window(x_lo, x_hi)
    x = tail.x
    if x.size < 16:
        raise DomainError("too few samples inside the fit window")
    span = x_hi - x_lo
    periods_slow = span * math.sqrt(eps) / (2.0 * math.pi)
    periods_fast = span * math.sqrt(2.0 * x_lo) / (2.0 * math.pi)
    if min(periods_slow, periods_fast) < MIN_PERIODS:
        warnings.warn(f"fit window holds only {periods_slow:.1f} slow periods",
                      stacklevel=2)

    sigma = estimate_sigma(tail)
    u1d, u2d = tail.u[:, 0], tail.u[:, 1]
    env = (2.0 * x) ** -0.25
    osc1 = sigma * (u1d - sigma * np.sqrt(x / 2.0)) / env
    rho0 = SQRT2 * float(np.sqrt(np.mean(osc1 ** 2)))
    A0 = SQRT2 * float(np.sqrt(np.mean(u2d ** 2)))
    lx = np.log(x)
    base1 = (2.0 * SQRT2 / 3.0) * x ** 1.5 - 1.5 * rho0 * rho0 * lx
    base2 = math.sqrt(eps) * x - 0.5 * A0 * A0 * math.sqrt(eps) * lx
    phi1_0 = _matched_phase(osc1, base1)
    phi2_0 = _matched_phase(sigma * u2d, base2)

    data = np.concatenate([u1d, u2d])
    detrended = np.concatenate([u1d - sigma * np.sqrt(x / 2.0), u2d])
    signal_rms = float(np.sqrt(np.mean(detrended ** 2)))

    def resid(theta):
        u1, u2, _ = _model_and_jacobian(theta, x, sigma, eps, corrections)
        return np.concatenate([u1, u2]) - data

    def jac(theta):
        return _model_and_jacobian(theta, x, sigma, eps, corrections)[2]

    def solve(start):
        return least_squares(resid, start, jac=jac, method="trf",
                             bounds=([0.0, 0.0, -np.inf, -np.inf], np.inf),
                             x_scale="jac", xtol=1e-15, ftol=1e-15, gtol=1e-15,
                             max_nfev=2000)

    def rms(res):
        return float(np.sqrt(np.mean(res.fun ** 2)))

    def good(res):
        return res.success and rms(res) < 0.25 * max(signal_rms, 1e-12)

    start = np.array([max(rho0, 1e-6), max(A0, 1e-6), phi1_0, phi2_0])
    best = solve(start)
    restarts = 0
    if not good(best):
        corners = [(a, b) for a in np.arange(4) * (math.pi / 2)
                   for b in (0.0, math.pi)]
        for d1, d2 in corners[:max_restarts]:
            restarts += 1
            cand = solve(start + np.array([0.0, 0.0, d1, d2]))
            if rms(cand) < rms(best):
                best = cand
            if good(best):
                break
    rho, A, phi1, phi2 = best.x
    candidate = FinalAsymptotics.from_amplitudes(
        sigma, float(rho), float(A), float(wrap_phase(phi1)),
        float(wrap_phase(phi2)), eps)
    if not good(best):
        raise FitError(f"fit did not converge (rms={rms(best):.3g})",
                       best=candidate)
    return FitReport(candidate, rms(best), (x_lo, x_hi), corrections,
                     int(x.size), restarts)
