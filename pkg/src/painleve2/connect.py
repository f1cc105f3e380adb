"""Connection map between the x -> -inf and x -> +inf tails (n = 2).

Also houses the scalar P-II reduction, the finite-x correction recipe and
the phase-averaged actions for small initial action.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .asymptotics import final_u2, phase_shift_phi1
from .errors import (
    ConnectionDomainError,
    CorrectionDomainError,
    DomainError,
    PainleveError,
    SeparatrixError,
)
from .model import (
    EquationParams,
    FinalAsymptotics,
    InitialAsymptotics,
    TransitionConstants,
    wrap_phase,
)
from .specfun import arg_gamma_imag

SEPARATRIX_TOL = 1e-12
PHI2_FORMS = ("validated", "printed")
LN2 = math.log(2.0)

# Samples per RNG chunk. Fixed so that sample i is always drawn from the
# Philox stream keyed by (seed, i // RNG_CHUNK), whatever the thread count.
RNG_CHUNK = 1 << 16


def _arg_gamma_or_limit(y):
    """arg Gamma(iy), with the y -> 0+ limit -pi/2 filled in at y == 0."""
    y = np.asarray(y, dtype=float)
    out = np.full(y.shape, -0.5 * math.pi)
    pos = y > 0.0
    if np.any(pos):
        out[pos] = arg_gamma_imag(y[pos])
    return out if out.ndim else float(out)


def _validate_pair(init: InitialAsymptotics, params: EquationParams):
    params.require_two()
    if init.n != 2:
        raise DomainError("initial data must have two amplitudes")
    return params.epsilon


def transition_constants(init: InitialAsymptotics,
                         params: EquationParams) -> TransitionConstants:
    """Probabilities p_k = exp(-pi alpha_k^2) and the combined phases Phi_k."""
    eps = _validate_pair(init, params)
    a1, a2 = init.alpha
    phi1, phi2 = init.phi
    s1, s2 = a1 * a1, a2 * a2
    log_eps4 = math.log(eps / 4.0)
    Phi1 = (0.25 * math.pi + _arg_gamma_or_limit(s1 / 2.0) + phi1
            - 1.5 * s1 * LN2 + 0.5 * s2 * log_eps4)
    Phi2 = (0.25 * math.pi + _arg_gamma_or_limit(s2 / 2.0) + phi2
            - 1.5 * s2 * LN2 + 0.5 * s1 * log_eps4)
    return TransitionConstants(math.exp(-math.pi * s1), math.exp(-math.pi * s2),
                               Phi1, Phi2)


def _combined_phases(s1, s2, phi1, phi2, eps):
    """Vectorized Phi_1, Phi_2 from squared amplitudes s_k = alpha_k^2."""
    log_eps4 = np.log(eps / 4.0)
    Phi1 = (0.25 * np.pi + _arg_gamma_or_limit(s1 / 2.0) + phi1
            - 1.5 * s1 * LN2 + 0.5 * s2 * log_eps4)
    Phi2 = (0.25 * np.pi + _arg_gamma_or_limit(s2 / 2.0) + phi2
            - 1.5 * s2 * LN2 + 0.5 * s1 * log_eps4)
    return Phi1, Phi2


def _actions(s1, s2, Phi1, Phi2):
    """Final actions (I1, I2, D) from squared amplitudes and phases.

    Works on arrays. The log argument of I1 is D = 1 - |p1 p2 T|^2. With
    weights a = p1 p2, b = p2 q1, c = q2 (q = 1 - p, a + b + c = 1) it
    expands to

        D = 4 [a b sin^2 Phi1 + a c sin^2 Phi2 + b c sin^2(Phi1 - Phi2)],

    a sum of nonnegative terms that keeps full relative accuracy for p
    near 0 and near 1, and reduces to 4 p1 q1 sin^2 Phi1 when q2 = 0.
    """
    q1 = -np.expm1(-np.pi * s1)
    q2 = -np.expm1(-np.pi * s2)
    p1 = np.exp(-np.pi * s1)
    p2 = np.exp(-np.pi * s2)
    a, b, c = p1 * p2, p2 * q1, q2
    sin1 = np.sin(Phi1)
    D = 4.0 * (a * b * sin1 ** 2 + a * c * np.sin(Phi2) ** 2
               + b * c * np.sin(Phi1 - Phi2) ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        I1 = -np.log(D) / (4.0 * np.pi)
        I2 = (-(np.log(4.0 * p2 * p1 * q1) + 2.0 * np.log(np.abs(sin1)))
              / (2.0 * np.pi) - 2.0 * I1)
    return I1, I2, D, p1, p2, q1


def connect_forward(init: InitialAsymptotics, params: EquationParams,
                    phi2_form: str = "validated") -> FinalAsymptotics:
    """Final tail parameters (sigma, I1, I2, phi1, phi2) for n = 2.

    phi2 carries the term -arg S. With W = p1 + (1 - p1) e^{2i Phi1}:

    - ``"validated"``: S = sigma (e^{i Phi2} - e^{-i Phi2} W). This form
      matches integrated trajectories to the fit accuracy.
    - ``"printed"``: S = e^{i Phi2} + e^{-i Phi2} W. This is the literature
      form, kept for comparison. It is off by O(1) against integration.

    Raises SeparatrixError when |sin Phi1| < 1e-12 (I2 diverges there) and
    ConnectionDomainError when the I1 log argument is not positive or when
    alpha1 = 0, where sigma is undefined and I2 diverges.
    """
    eps = _validate_pair(init, params)
    if phi2_form not in PHI2_FORMS:
        raise DomainError(f"phi2_form must be one of {PHI2_FORMS}")
    a1, a2 = init.alpha
    if a1 == 0.0:
        raise ConnectionDomainError(
            "alpha1 = 0: sigma is undefined and I2 diverges")
    tc = transition_constants(init, params)
    Phi1, Phi2 = tc.Phi1, tc.Phi2
    sin1 = math.sin(Phi1)
    if abs(sin1) < SEPARATRIX_TOL:
        raise SeparatrixError(
            f"|sin Phi1| = {abs(sin1):.3e} < {SEPARATRIX_TOL}: I2 diverges")

    I1, I2, D, p1, p2, q1 = (float(v) for v in
                             _actions(a1 * a1, a2 * a2, Phi1, Phi2))
    if not D > 0.0:
        raise ConnectionDomainError(f"log argument D = {D:.3e} <= 0")
    # D <= 1 up to rounding; clamp only at that level
    if -1e-14 < I1 < 0.0:
        I1 = 0.0
    if -1e-12 < I2 < 0.0:
        I2 = 0.0
    if I1 < 0.0 or I2 < 0.0:
        raise ConnectionDomainError(f"negative action: I1={I1}, I2={I2}")

    T = 1.0 + (q1 / p1) * np.exp(2j * Phi1) + ((1.0 - p2) / (p1 * p2)) * np.exp(2j * Phi2)
    phi1_f = (-0.75 * math.pi - 7.0 * LN2 * I1
              + _arg_gamma_or_limit(2.0 * I1) - np.angle(T))
    sigma = 1 if sin1 > 0.0 else -1
    W = p1 + q1 * np.exp(2j * Phi1)
    if phi2_form == "printed":
        S = np.exp(1j * Phi2) + np.exp(-1j * Phi2) * W
    else:
        S = sigma * (np.exp(1j * Phi2) - np.exp(-1j * Phi2) * W)
    phi2_f = (0.75 * math.pi - (2.0 / 3.0) * eps ** 1.5
              - I2 * math.log(4.0 * math.sqrt(eps))
              + _arg_gamma_or_limit(I2) - np.angle(S))
    return FinalAsymptotics(sigma, I1, I2, float(phi1_f), float(phi2_f), eps)


def connect_forward_scalar(alpha1: float, phi1: float):
    """Connection formulas of the single-variable P-II u'' = x u - 2 u^3.

    Independent of connect_forward; returns (sigma, I1, phi1_final).
    """
    if not (math.isfinite(alpha1) and alpha1 > 0.0):
        raise DomainError("alpha1 must be > 0")
    s = alpha1 * alpha1
    p = math.exp(-math.pi * s)
    q = -math.expm1(-math.pi * s)
    Phi = 0.25 * math.pi + float(arg_gamma_imag(s / 2.0)) + phi1 - 1.5 * s * LN2
    sin_phi = math.sin(Phi)
    if abs(sin_phi) < SEPARATRIX_TOL:
        raise SeparatrixError("sin Phi1 vanishes")
    I1 = -math.log(4.0 * p * q * sin_phi * sin_phi) / (4.0 * math.pi)
    if -1e-14 < I1 < 0.0:
        I1 = 0.0
    arg_T = math.atan2((q / p) * math.sin(2.0 * Phi), 1.0 + (q / p) * math.cos(2.0 * Phi))
    arg_g = -0.5 * math.pi if I1 == 0.0 else float(arg_gamma_imag(2.0 * I1))
    phi_f = -0.75 * math.pi - 7.0 * LN2 * I1 + arg_g - arg_T
    return (1 if sin_phi > 0.0 else -1), I1, float(wrap_phase(phi_f))


@dataclass(frozen=True)
class CorrectionRecipe:
    """How to evaluate the final tail at finite x.

    ``phi1_shift`` is added to phi1 at each requested x; ``renormalize``
    tells the evaluator to use sqrt((x - 2 u2^2)/2) as the regular part.
    """

    x: np.ndarray
    phi1_shift: np.ndarray
    renormalize: bool = True


def apply_corrections(fin: FinalAsymptotics, params: EquationParams,
                      x) -> CorrectionRecipe:
    eps = params.epsilon
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if np.any(x <= 0.0):
        raise CorrectionDomainError("corrections need x > 0")
    u2 = final_u2(x, fin.sigma, fin.A, fin.phi2, eps)
    if np.any(x - 2.0 * u2 * u2 <= 0.0):
        raise CorrectionDomainError("x - 2 u2^2 <= 0 inside the window")
    return CorrectionRecipe(x, phase_shift_phi1(x, fin.I2, eps), True)


def spanning_tree_constant_c1(grid_points_per_axis: int) -> float:
    """Midpoint-rule value of (1/pi^2) int_0^pi int_0^pi
    ln[4 - 2cos(2a) - 2cos(2b)] da db.

    The integrand is evaluated as ln(4 sin^2 a + 4 sin^2 b); midpoint nodes
    never touch the logarithmic singularities at the corners.
    """
    n = int(grid_points_per_axis)
    if n < 8:
        raise DomainError("need at least 8 points per axis")
    nodes = (np.arange(n) + 0.5) * (math.pi / n)
    s2 = 4.0 * np.sin(nodes) ** 2
    row_sums = []
    block = max(1, (1 << 22) // n)
    for start in range(0, n, block):
        vals = np.log(s2[start:start + block, None] + s2[None, :])
        row_sums.extend(vals.sum(axis=1))
    return math.fsum(row_sums) / (n * n)


@dataclass(frozen=True)
class AverageReport:
    mean_I1: float
    mean_I2: float
    std_err_I1: float
    std_err_I2: float
    n_samples: int
    method: str
    n_discarded: int = 0


def phase_sample_chunk(seed: int, chunk: int, size: int) -> np.ndarray:
    """Uniform phases on [0, 2pi)^2 for one fixed-size chunk of samples."""
    bitgen = np.random.Philox(key=seed, counter=[0, chunk, 0, 0])
    return np.random.Generator(bitgen).random((size, 2)) * (2.0 * math.pi)


def _chunk_sums(s, eps, phases):
    Phi1, Phi2 = _combined_phases(s, s, phases[:, 0], phases[:, 1], eps)
    I1, I2, D, *_ = _actions(s, s, Phi1, Phi2)
    ok = (np.abs(np.sin(Phi1)) >= SEPARATRIX_TOL) & (D > 0.0) & np.isfinite(I2)
    I1, I2 = I1[ok], I2[ok]
    return (int(ok.sum()), float(I1.sum()), float(I2.sum()),
            float(np.dot(I1, I1)), float(np.dot(I2, I2)))


def averaged_actions(initial_action: float, params: EquationParams,
                     method: str = "monte_carlo", n_samples: int = 1_000_000,
                     seed: int = 0, threads: int = 1) -> AverageReport:
    """Phase averages <I1>, <I2> at alpha1 = alpha2 = sqrt(2 * action).

    monte_carlo: uniform (varphi1, varphi2) from a Philox stream.
    tensor_quadrature: midpoint grid on the 2-torus with about n_samples
    nodes; the reported error is the change against the half-resolution
    grid.
    """
    eps = params.epsilon
    if not (math.isfinite(initial_action) and initial_action > 0.0):
        raise DomainError("initial action must be > 0")
    if not eps > 0.0:
        raise DomainError("eps must be > 0")
    if n_samples < 1:
        raise DomainError("n_samples must be >= 1")
    s = 2.0 * initial_action

    if method == "monte_carlo":
        sizes = [min(RNG_CHUNK, n_samples - c * RNG_CHUNK)
                 for c in range(-(-n_samples // RNG_CHUNK))]

        def work(c):
            return _chunk_sums(s, eps, phase_sample_chunk(seed, c, sizes[c]))

        if threads > 1:
            with ThreadPoolExecutor(threads) as pool:
                parts = list(pool.map(work, range(len(sizes))))
        else:
            parts = [work(c) for c in range(len(sizes))]
        n_ok = sum(p[0] for p in parts)
        if n_ok == 0:
            raise PainleveError("every sample was singular")
        m1 = math.fsum(p[1] for p in parts) / n_ok
        m2 = math.fsum(p[2] for p in parts) / n_ok
        v1 = max(math.fsum(p[3] for p in parts) / n_ok - m1 * m1, 0.0)
        v2 = max(math.fsum(p[4] for p in parts) / n_ok - m2 * m2, 0.0)
        denom = max(n_ok - 1, 1)
        return AverageReport(m1, m2, math.sqrt(v1 / denom),
                             math.sqrt(v2 / denom), n_ok, method,
                             n_samples - n_ok)

    if method == "tensor_quadrature":
        m = max(int(math.isqrt(n_samples)), 2)

        def grid_mean(k):
            nodes = (np.arange(k) + 0.5) * (2.0 * math.pi / k)
            g1, g2 = np.meshgrid(nodes, nodes, indexing="ij")
            n_ok, s1, s2, _, _ = _chunk_sums(
                s, eps, np.column_stack([g1.ravel(), g2.ravel()]))
            return n_ok, s1 / n_ok, s2 / n_ok

        n_ok, m1, m2 = grid_mean(m)
        _, h1, h2 = grid_mean(max(m // 2, 1))
        return AverageReport(m1, m2, abs(m1 - h1), abs(m2 - h2), n_ok, method,
                             m * m - n_ok)

    raise DomainError(f"unknown averaging method {method!r}")
