"""Closed-form tails of the two-variable solution at x -> -inf and x -> +inf.

Both evaluators accept scalar or array ``x`` and return numpy values.
"""

import numpy as np

from .errors import CorrectionDomainError, DomainError

SQRT2 = np.sqrt(2.0)


def initial_tail(x, alpha, phi, eps):
    """(u1, u2, du1, du2) of the x -> -inf expansion at x < 0.

    u1 = a1 s^{-1/4} sin[(2/3) s^{3/2} + c1 ln s + phi1]
    u2 = a2 (s+eps)^{-1/4} sin[(2/3) (s+eps)^{3/2} + c2 ln s + phi2]

    with s = -x, c1 = (3 a1^2 + 2 a2^2)/4, c2 = (3 a2^2 + 2 a1^2)/4. The
    logarithm in the u2 phase is ln(-x), not ln(-x+eps), as written.
    Derivatives are exact derivatives of these expressions.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x >= 0.0):
        raise DomainError("initial tail needs x < 0")
    a1, a2 = alpha
    phi1, phi2 = phi
    s = -x
    c1 = (3.0 * a1 * a1 + 2.0 * a2 * a2) / 4.0
    c2 = (3.0 * a2 * a2 + 2.0 * a1 * a1) / 4.0
    log_s = np.log(s)

    th1 = (2.0 / 3.0) * s ** 1.5 + c1 * log_s + phi1
    env1 = s ** -0.25
    u1 = a1 * env1 * np.sin(th1)
    du1_ds = a1 * (-0.25 * env1 / s * np.sin(th1)
                   + env1 * np.cos(th1) * (np.sqrt(s) + c1 / s))

    r = s + eps
    th2 = (2.0 / 3.0) * r ** 1.5 + c2 * log_s + phi2
    env2 = r ** -0.25
    u2 = a2 * env2 * np.sin(th2)
    du2_ds = a2 * (-0.25 * env2 / r * np.sin(th2)
                   + env2 * np.cos(th2) * (np.sqrt(r) + c2 / s))
    return u1, u2, -du1_ds, -du2_ds


def final_u2(x, sigma, A, phi2, eps):
    """Oscillating second channel at x -> +inf."""
    x = np.asarray(x, dtype=float)
    se = np.sqrt(eps)
    return sigma * A * np.cos(se * x - 0.5 * A * A * se * np.log(x) + phi2)


def phase_shift_phi1(x, I2, eps):
    """Finite-x shift of phi1 induced by the Goldstone action I2."""
    x = np.asarray(x, dtype=float)
    return -2.0 * np.pi * I2 * np.sqrt(eps / (2.0 * x))


def final_tail(x, sigma, rho, A, phi1, phi2, eps,
               renormalize=False, shift_phase=False):
    """(u1, u2) of the x -> +inf expansion, optionally with the two
    leading finite-x corrections.

    renormalize: regular part sigma*sqrt(x/2) -> sigma*sqrt((x - 2 u2^2)/2)
    shift_phase: phi1 -> phi1 - 2 pi I2 sqrt(eps / (2x)), I2 = A^2 sqrt(eps)/2
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise DomainError("final tail needs x > 0")
    u2 = final_u2(x, sigma, A, phi2, eps)
    if renormalize:
        arg = x - 2.0 * u2 * u2
        if np.any(arg <= 0.0):
            raise CorrectionDomainError("x - 2 u2^2 <= 0 inside the window")
        regular = sigma * np.sqrt(arg / 2.0)
    else:
        regular = sigma * np.sqrt(x / 2.0)
    ph = phi1
    if shift_phase:
        ph = phi1 + phase_shift_phi1(x, 0.5 * A * A * np.sqrt(eps), eps)
    theta1 = (2.0 * SQRT2 / 3.0) * x ** 1.5 - 1.5 * rho * rho * np.log(x) + ph
    u1 = regular + sigma * rho * (2.0 * x) ** -0.25 * np.cos(theta1)
    return u1, u2
