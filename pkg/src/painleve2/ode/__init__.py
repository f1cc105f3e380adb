"""Integration of u_k'' = x u_k - 2 u_k sum_j u_j^2 - eps_k u_k.

The stepper is an embedded 8(5,3) Runge-Kutta pair (DOP853) with a PI
step-size controller and 7th-order dense output, compiled with numba.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass

import numpy as np

from ..asymptotics import initial_tail
from ..errors import DomainError, IntegrationError
from ..model import EquationParams, InitialAsymptotics, Trajectory, TrajectoryState
from . import _kernel

TRAJECTORY_HEADER = ("x", "u1", "du1", "u2", "du2")


@dataclass(frozen=True)
class IntegrationOptions:
    abs_tol: float = 1e-11
    rel_tol: float = 1e-11
    max_step: float = math.inf
    dense_output_dx: float = 0.05
    # samples never advance the fastest local phase by more than this
    phase_per_sample: float = math.pi / 8
    blowup: float = 1e3
    max_steps: int = 50_000_000

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol"):
            v = getattr(self, name)
            if not 0.0 < v <= 1e-3:
                raise DomainError(f"{name} must lie in (0, 1e-3], got {v}")
        if not self.dense_output_dx > 0.0:
            raise DomainError("dense_output_dx must be > 0")
        if not self.max_step > 0.0:
            raise DomainError("max_step must be > 0")
        if not 0.0 < self.phase_per_sample <= math.pi / 4:
            raise DomainError("phase_per_sample must lie in (0, pi/4]")


def rhs(x: float, state: TrajectoryState, params: EquationParams):
    """(u', u'') at x. Uses the symmetric coupling sum_j u_j^2."""
    if state.n != params.n:
        raise DomainError("state and params disagree on n")
    out = np.empty(2 * params.n)
    _kernel.deriv(float(x), state.as_vector(), params.as_array(), out)
    return out[:params.n], out[params.n:]


def second_derivative(x, u, params: EquationParams) -> np.ndarray:
    """u'' for arbitrary (possibly non-solution) u at x."""
    u = np.asarray(u, dtype=float)
    eps = params.as_array()
    return (x - 2.0 * np.dot(u, u) - eps) * u


def seed_initial_state(init: InitialAsymptotics, params: EquationParams,
                       x0: float) -> TrajectoryState:
    """State at x0 < 0 from the x -> -inf expansion (n = 2).

    Terms dropped by the expansion are O(|x0|^{-7/4}) in u.
    """
    params.require_two()
    if not x0 < 0.0:
        raise DomainError(f"seed point must be negative, got {x0}")
    if x0 > -50.0:
        warnings.warn(f"seeding at x0={x0} > -50: asymptotic expansion is "
                      "inaccurate this close to the origin", stacklevel=2)
    u1, u2, du1, du2 = initial_tail(x0, init.alpha, init.phi, params.epsilon)
    return TrajectoryState(x0, [float(u1), float(u2)], [float(du1), float(du2)])


def integrate(state0: TrajectoryState, x0: float, x1: float,
              params: EquationParams,
              opts: IntegrationOptions | None = None) -> Trajectory:
    """Integrate from x0 to x1 (either direction) with dense sampling.

    Raises IntegrationError on step-size underflow, blow-up beyond
    ``opts.blowup`` or when the step budget is exhausted.
    """
    opts = opts or IntegrationOptions()
    if state0.n != params.n:
        raise DomainError("state and params disagree on n")
    if not (math.isfinite(x0) and math.isfinite(x1)) or x0 == x1:
        raise DomainError("need finite x0 != x1")
    eps = params.as_array()
    xs = _kernel.sample_grid(float(x0), float(x1), opts.dense_output_dx,
                             float(eps[-1]), opts.phase_per_sample)
    ys, filled, status, x_last, nsteps, nfev, nrej = _kernel.integrate_dense(
        float(x0), state0.as_vector(), float(x1), eps, opts.rel_tol,
        opts.abs_tol, opts.max_step, math.pi / 2, xs, opts.blowup,
        opts.max_steps)
    if status != _kernel.STATUS_OK:
        reason = {_kernel.STATUS_UNDERFLOW: "step size underflow",
                  _kernel.STATUS_BLOWUP: f"|u| exceeded {opts.blowup}",
                  _kernel.STATUS_MAX_STEPS: "step budget exhausted"}[status]
        raise IntegrationError(f"{reason} at x={x_last:.6g}", last_x=x_last)
    n = params.n
    meta = {"abs_tol": opts.abs_tol, "rel_tol": opts.rel_tol,
            "steps": int(nsteps), "nfev": int(nfev), "rejected": int(nrej)}
    return Trajectory(params, xs[:filled], ys[:filled, :n], ys[:filled, n:], meta)


def hamiltonian_energy(state: TrajectoryState, x: float,
                       params: EquationParams) -> float:
    """P^2/2 - x X^2/2 + X^4/2 + sum_k eps_k u_k^2 / 2 with P = u'."""
    u, p = state.u, state.du
    X2 = float(np.dot(u, u))
    return (0.5 * float(np.dot(p, p)) - 0.5 * x * X2 + 0.5 * X2 * X2
            + 0.5 * float(np.dot(params.as_array(), u * u)))


def write_trajectory_csv(traj: Trajectory, stream) -> None:
    """Columns x, u1, du1, u2, du2 (two-variable trajectories only)."""
    traj.params.require_two()
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(TRAJECTORY_HEADER)
    for x, u, du in zip(traj.x, traj.u, traj.du):
        w.writerow([repr(float(v)) for v in (x, u[0], du[0], u[1], du[1])])


def read_trajectory_csv(stream, params: EquationParams) -> Trajectory:
    r = csv.reader(stream)
    header = tuple(next(r))
    if header != TRAJECTORY_HEADER:
        raise DomainError(f"unexpected trajectory header {header}")
    data = np.array([[float(v) for v in row] for row in r if row], dtype=float)
    if data.size == 0:
        raise DomainError("empty trajectory file")
    return Trajectory(params, data[:, 0], data[:, [1, 3]], data[:, [2, 4]],
                      {"source": "csv"})


__all__ = [
    "IntegrationOptions",
    "TRAJECTORY_HEADER",
    "hamiltonian_energy",
    "integrate",
    "read_trajectory_csv",
    "rhs",
    "second_derivative",
    "seed_initial_state",
    "write_trajectory_csv",
]
