"""Value types shared across the package.

All types are immutable. Phases are stored reduced to [0, 2*pi).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, UnsupportedDimensionError

TWO_PI = 2.0 * math.pi


def wrap_phase(phi):
    """Reduce an angle (or array of angles) to [0, 2*pi)."""
    out = np.mod(phi, TWO_PI)
    if np.ndim(out) == 0:
        out = float(out)
        # np.mod can return 2*pi for tiny negative inputs
        return 0.0 if out >= TWO_PI else out
    return np.where(out >= TWO_PI, 0.0, out)


@dataclass(frozen=True)
class EquationParams:
    """Offsets eps_1 < ... < eps_n of the coupled system, with eps_1 = 0."""

    eps: tuple

    def __post_init__(self):
        eps = tuple(float(e) for e in np.atleast_1d(self.eps))
        if not eps:
            raise DomainError("need at least one variable")
        if not all(math.isfinite(e) for e in eps):
            raise DomainError("offsets must be finite")
        if eps[0] != 0.0:
            raise DomainError("eps_1 must be 0 (shift x to enforce it)")
        if any(b <= a for a, b in zip(eps, eps[1:])):
            raise DomainError("offsets must be strictly increasing")
        object.__setattr__(self, "eps", eps)

    @classmethod
    def two(cls, eps: float) -> "EquationParams":
        """Two-variable system with offset eps > 0 on the second channel."""
        if not eps > 0.0:
            raise DomainError(f"eps must be > 0, got {eps}")
        return cls((0.0, eps))

    @property
    def n(self) -> int:
        return len(self.eps)

    @property
    def epsilon(self) -> float:
        """The single offset eps_2 of the two-variable system."""
        self.require_two()
        return self.eps[1]

    def require_two(self):
        if self.n != 2:
            raise UnsupportedDimensionError(
                f"only defined for n=2, got n={self.n}")

    def as_array(self) -> np.ndarray:
        return np.asarray(self.eps, dtype=float)


@dataclass(frozen=True)
class InitialAsymptotics:
    """Amplitudes alpha_k >= 0 and phases varphi_k of the x -> -inf tail."""

    alpha: tuple
    phi: tuple

    def __post_init__(self):
        alpha = tuple(float(a) for a in np.atleast_1d(self.alpha))
        phi = tuple(float(p) for p in np.atleast_1d(self.phi))
        if len(alpha) != len(phi):
            raise DomainError("alpha and phi must have equal length")
        if not all(math.isfinite(a) and a >= 0.0 for a in alpha):
            raise DomainError("amplitudes must be finite and >= 0")
        if not all(math.isfinite(p) for p in phi):
            raise DomainError("phases must be finite")
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "phi", tuple(wrap_phase(p) for p in phi))

    @property
    def n(self) -> int:
        return len(self.alpha)

    @property
    def adiabatic_invariants(self) -> tuple:
        """Actions alpha_k**2 / 2 conserved as x -> -inf."""
        return tuple(a * a / 2.0 for a in self.alpha)


@dataclass(frozen=True)
class TransitionConstants:
    p1: float
    p2: float
    Phi1: float
    Phi2: float

    def __post_init__(self):
        for p in (self.p1, self.p2):
            if not 0.0 < p <= 1.0:
                raise DomainError(f"probability out of (0, 1]: {p}")


@dataclass(frozen=True)
class FinalAsymptotics:
    """Parameters of the x -> +inf tail: sign, actions and phases.

    ``eps`` is carried so the amplitude A = sqrt(2 I2 / sqrt(eps)) can be
    recovered. ``warnings`` collects non-fatal notes from the producer.
    """

    sigma: int
    I1: float
    I2: float
    phi1: float
    phi2: float
    eps: float
    warnings: tuple = field(default=(), compare=False)

    def __post_init__(self):
        if self.sigma not in (-1, 1):
            raise DomainError(f"sigma must be +1 or -1, got {self.sigma}")
        if not (self.I1 >= 0.0 and self.I2 >= 0.0):
            raise DomainError(f"actions must be >= 0: {self.I1}, {self.I2}")
        if not self.eps > 0.0:
            raise DomainError("eps must be > 0")
        object.__setattr__(self, "sigma", int(self.sigma))
        object.__setattr__(self, "phi1", wrap_phase(self.phi1))
        object.__setattr__(self, "phi2", wrap_phase(self.phi2))

    @classmethod
    def from_amplitudes(cls, sigma, rho, A, phi1, phi2, eps, warnings=()):
        if rho < 0.0 or A < 0.0:
            raise DomainError("amplitudes must be >= 0")
        return cls(sigma, rho * rho / 2.0, A * A * math.sqrt(eps) / 2.0,
                   phi1, phi2, eps, warnings)

    @property
    def rho(self) -> float:
        return math.sqrt(2.0 * self.I1)

    @property
    def A(self) -> float:
        return math.sqrt(2.0 * self.I2 / math.sqrt(self.eps))


@dataclass(frozen=True)
class TrajectoryState:
    x: float
    u: np.ndarray
    du: np.ndarray

    def __post_init__(self):
        u = np.array(self.u, dtype=float).reshape(-1)
        du = np.array(self.du, dtype=float).reshape(-1)
        if u.shape != du.shape:
            raise DomainError("u and du must have the same length")
        if not (math.isfinite(self.x) and np.all(np.isfinite(u))
                and np.all(np.isfinite(du))):
            raise DomainError("state entries must be finite")
        u.setflags(write=False)
        du.setflags(write=False)
        object.__setattr__(self, "x", float(self.x))
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "du", du)

    @property
    def n(self) -> int:
        return self.u.size

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.u, self.du])

    def negated(self) -> "TrajectoryState":
        return TrajectoryState(self.x, -self.u, -self.du)


@dataclass(frozen=True)
class Trajectory:
    """Densely sampled solution. Rows of ``u``/``du`` align with ``x``.

    ``x`` is strictly monotone; it increases for forward integrations and
    decreases for backward ones.
    """

    params: EquationParams
    x: np.ndarray
    u: np.ndarray
    du: np.ndarray
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float)
        u = np.asarray(self.u, dtype=float)
        du = np.asarray(self.du, dtype=float)
        if u.ndim != 2 or u.shape != du.shape or u.shape[0] != x.size:
            raise DomainError("inconsistent trajectory array shapes")
        if x.size > 1:
            d = np.diff(x)
            if not (np.all(d > 0) or np.all(d < 0)):
                raise DomainError("trajectory x must be strictly monotone")
        for a in (x, u, du):
            a.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "du", du)

    def __len__(self):
        return self.x.size

    def state(self, i: int) -> TrajectoryState:
        return TrajectoryState(self.x[i], self.u[i], self.du[i])

    @property
    def first(self) -> TrajectoryState:
        return self.state(0)

    @property
    def last(self) -> TrajectoryState:
        return self.state(-1)

    def window(self, x_lo: float, x_hi: float) -> "Trajectory":
        """Samples with x_lo <= x <= x_hi, in increasing x."""
        order = np.argsort(self.x)
        x = self.x[order]
        mask = (x >= x_lo) & (x <= x_hi)
        idx = order[mask]
        return Trajectory(self.params, self.x[idx], self.u[idx],
                          self.du[idx], dict(self.meta))


@dataclass(frozen=True)
class LaxPair:
    """Hermitian matrices H(t, x), H_1(t, x) of the Lax pair."""

    H: np.ndarray
    H1: np.ndarray
    t: float
    x: float
