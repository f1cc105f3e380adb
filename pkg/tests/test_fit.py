import math
import warnings

import numpy as np
import pytest

from painleve2 import EquationParams, FinalAsymptotics, Trajectory, connect_forward
from painleve2.errors import AmbiguousSignError, DomainError
from painleve2.fit import (
    FIT_CSV_HEADER,
    Corrections,
    FitReport,
    default_window,
    estimate_sigma,
    final_asymptote_model,
    fit_tail,
)
from painleve2.ode import integrate, seed_initial_state


def synthetic(fin, params, corr, lo=400.0, hi=500.0, m=40001):
    x = np.linspace(lo, hi, m)
    u1, u2 = final_asymptote_model(x, fin, params, corr)
    u = np.column_stack([u1, u2])
    return Trajectory(params, x, u, np.gradient(u, x, axis=0))


@pytest.mark.filterwarnings("ignore:fit window")
@pytest.mark.parametrize("corr", [Corrections.none(), Corrections.both(),
                                  Corrections(True, False), Corrections(False, True)])
@pytest.mark.parametrize("sigma", [1, -1])
def test_round_trip(corr, sigma):
    p = EquationParams.two(1.0)
    fin = FinalAsymptotics.from_amplitudes(sigma, 0.3, 0.25, 1.0, 2.0, 1.0)
    rep = fit_tail(synthetic(fin, p, corr), (400.0, 500.0), p, corr)
    got = rep.final
    assert got.sigma == sigma
    assert got.I1 == pytest.approx(fin.I1, abs=1e-6)
    assert got.I2 == pytest.approx(fin.I2, abs=1e-6)
    for a, b in ((got.phi1, 1.0), (got.phi2, 2.0)):
        assert abs(math.sin(a) - math.sin(b)) < 1e-6
        assert abs(math.cos(a) - math.cos(b)) < 1e-6
    assert rep.rms_residual < 1e-10


def test_fig1_pipeline_eps1(fig1_init, eps1):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        s0 = seed_initial_state(fig1_init, eps1, -500.0)
    tr = integrate(s0, -500.0, 500.0, eps1)
    rep = fit_tail(tr, None, eps1, Corrections.both())
    ref = connect_forward(fig1_init, eps1)
    assert rep.final.sigma == ref.sigma == -1
    assert rep.final.I1 == pytest.approx(ref.I1, abs=0.02)
    assert rep.final.I2 == pytest.approx(ref.I2, abs=0.02)
    assert math.sin(rep.final.phi1) == pytest.approx(math.sin(ref.phi1), abs=0.05)
    assert math.sin(rep.final.phi2) == pytest.approx(math.sin(ref.phi2), abs=0.05)


def test_sigma_ambiguous():
    p = EquationParams.two(1.0)
    x = np.linspace(100.0, 200.0, 1000)
    u = np.column_stack([np.sin(x), np.cos(x)])
    with pytest.raises(AmbiguousSignError):
        estimate_sigma(Trajectory(p, x, u, u))
    with pytest.raises(DomainError):
        estimate_sigma(Trajectory(p, x - 95.0, u, u))


def test_default_window():
    p = EquationParams.two(1.0)
    x = np.linspace(-500.0, 500.0, 11)
    tr = Trajectory(p, x, np.zeros((11, 2)), np.zeros((11, 2)))
    lo, hi = default_window(tr, p)
    assert hi == 500.0 and lo == pytest.approx(300.0)
    small = EquationParams.two(0.05)
    lo, _ = default_window(Trajectory(small, x, np.zeros((11, 2)), np.zeros((11, 2))), small)
    # widened to 20 slow periods, floored at 50
    assert lo == 50.0


def test_report_row_and_validation():
    fin = FinalAsymptotics(-1, 0.1, 0.2, 1.0, 2.0, 1.0)
    rep = FitReport(fin, 0.01, (1.0, 2.0), Corrections.none())
    row = rep.csv_row()
    assert len(row) == len(FIT_CSV_HEADER)
    assert row[:4] == [1.0, -1, 0.1, 0.2]
    with pytest.raises(DomainError):
        FitReport(fin, 0.01, (2.0, 1.0), Corrections.none())


def test_window_checks():
    p = EquationParams.two(1.0)
    fin = FinalAsymptotics.from_amplitudes(1, 0.3, 0.25, 1.0, 2.0, 1.0)
    tr = synthetic(fin, p, Corrections.none(), m=2001)
    with pytest.raises(DomainError):
        fit_tail(tr, (-1.0, 500.0), p)
    with pytest.raises(DomainError):
        fit_tail(tr, (450.0, 450.001), p)
    with pytest.warns(UserWarning):
        fit_tail(tr, (480.0, 500.0), p)
