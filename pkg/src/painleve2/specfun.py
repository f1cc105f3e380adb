"""Argument of the Gamma function on the positive imaginary axis."""

import math

import numpy as np

from .errors import DomainError

# Bernoulli numbers B_2 .. B_18 for the Stirling tail.
_BERNOULLI = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
)
_SHIFT = 16


def arg_gamma_imag(y):
    """Continuous branch of arg Gamma(iy) for y > 0.

    Returns Im log Gamma(iy) where log Gamma is the analytic continuation
    of the real log-Gamma function, i.e. the branch that tends to -pi/2 as
    y -> 0+ and varies smoothly in y. It is *not* wrapped into (-pi, pi];
    callers only use it inside trigonometric functions of phase sums.

    The argument is shifted upward by 16 with the recurrence
    Gamma(z) = Gamma(z + k) / prod_j (z + j), then the Stirling series is
    summed at |z + k| >= 16, which is good to ~1e-15 absolute.

    Accepts a scalar or an array; returns the same shape.
    """
    y_arr = np.asarray(y, dtype=float)
    if not np.all(np.isfinite(y_arr)) or np.any(y_arr <= 0.0):
        raise DomainError("arg_gamma_imag requires finite y > 0")

    z = _SHIFT + 1j * y_arr
    # Im[(z - 1/2) log z - z]; log is principal and Re z > 0, so no wrap.
    log_z = np.log(z)
    acc = np.imag((z - 0.5) * log_z - z)
    inv_z = 1.0 / z
    inv_z2 = inv_z * inv_z
    power = inv_z
    for m, b in enumerate(_BERNOULLI, start=1):
        acc = acc + np.imag(b / (2 * m * (2 * m - 1)) * power)
        power = power * inv_z2
    # Undo the shift: subtract sum_j arg(iy + j), j = 0..k-1.
    j = np.arange(_SHIFT, dtype=float)
    acc = acc - np.sum(np.arctan2(y_arr[..., None], j), axis=-1)

    if np.ndim(y) == 0:
        return float(acc)
    return acc


def arg_gamma_imag_limit(y):
    """arg Gamma(iy) extended by continuity to y = 0 (value -pi/2)."""
    if y == 0.0:
        return -0.5 * math.pi
    return arg_gamma_imag(y)
