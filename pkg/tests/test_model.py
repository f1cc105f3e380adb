import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from painleve2 import (
    EquationParams,
    FinalAsymptotics,
    InitialAsymptotics,
    Trajectory,
    TrajectoryState,
    transition_constants,
)
from painleve2.errors import DomainError, UnsupportedDimensionError
from painleve2.model import wrap_phase


def test_params_two():
    p = EquationParams.two(1.5)
    assert p.n == 2 and p.epsilon == 1.5
    assert p.as_array().tolist() == [0.0, 1.5]


@pytest.mark.parametrize("eps", [(1.0, 2.0), (0.0, 1.0, 1.0), (0.0, -1.0), (0.0, math.nan)])
def test_params_invalid(eps):
    with pytest.raises(DomainError):
        EquationParams(eps)


def test_params_epsilon_needs_two():
    with pytest.raises(UnsupportedDimensionError):
        EquationParams((0.0, 1.0, 2.0)).epsilon
    with pytest.raises(DomainError):
        EquationParams.two(0.0)


def test_initial_wraps_and_invariants():
    init = InitialAsymptotics((0.2, 0.4), (-0.5, 7.0))
    assert init.phi[0] == pytest.approx(2 * math.pi - 0.5)
    assert init.phi[1] == pytest.approx(7.0 - 2 * math.pi)
    assert init.adiabatic_invariants == pytest.approx((0.02, 0.08))
    with pytest.raises(DomainError):
        InitialAsymptotics((-0.1, 0.2), (0.0, 0.0))
    with pytest.raises(DomainError):
        InitialAsymptotics((0.1,), (0.0, 0.0))


def test_wrap_phase_edge():
    assert wrap_phase(-1e-18) == 0.0
    assert 0.0 <= wrap_phase(-1e-300) < 2 * math.pi
    assert np.all(wrap_phase(np.array([-1e-18, 3.0])) < 2 * math.pi)


@given(st.floats(0.0, 3.0), st.floats(0.0, 3.0), st.floats(0.05, 10.0))
def test_amplitude_round_trip(rho, A, eps):
    f = FinalAsymptotics.from_amplitudes(1, rho, A, 0.0, 0.0, eps)
    assert f.rho == pytest.approx(rho, rel=1e-14, abs=1e-14)
    assert f.A == pytest.approx(A, rel=1e-14, abs=1e-14)
    g = FinalAsymptotics(1, f.I1, f.I2, 0.0, 0.0, eps)
    assert g.I1 == f.I1 and g.I2 == f.I2


def test_final_validation():
    with pytest.raises(DomainError):
        FinalAsymptotics(0, 0.1, 0.1, 0.0, 0.0, 1.0)
    with pytest.raises(DomainError):
        FinalAsymptotics(1, -0.1, 0.1, 0.0, 0.0, 1.0)


@given(st.floats(0.0, 2.0), st.floats(0.0, 2.0))
def test_probabilities_exact(a1, a2):
    tc = transition_constants(InitialAsymptotics((a1, a2), (0.3, 0.7)),
                              EquationParams.two(1.0))
    assert tc.p1 == pytest.approx(math.exp(-math.pi * a1 * a1), rel=1e-15)
    assert tc.p2 == pytest.approx(math.exp(-math.pi * a2 * a2), rel=1e-15)


def test_state_is_read_only():
    s = TrajectoryState(0.0, [1.0, 2.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        s.u[0] = 3.0
    assert s.negated().u.tolist() == [-1.0, -2.0]
    with pytest.raises(DomainError):
        TrajectoryState(0.0, [math.inf], [0.0])


def test_trajectory_window_and_direction():
    p = EquationParams.two(1.0)
    x = np.array([3.0, 2.0, 1.0, 0.0])
    u = np.arange(8.0).reshape(4, 2)
    tr = Trajectory(p, x, u, u)
    w = tr.window(0.5, 2.5)
    assert w.x.tolist() == [1.0, 2.0]
    assert w.u[0].tolist() == [4.0, 5.0]
    with pytest.raises(DomainError):
        Trajectory(p, np.array([0.0, 1.0, 1.0]), np.zeros((3, 2)), np.zeros((3, 2)))
