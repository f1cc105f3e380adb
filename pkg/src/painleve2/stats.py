"""Parameter sweeps and phase ensembles through the analytic map and the
full integrate-and-fit pipeline."""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .connect import (
    AverageReport,
    averaged_actions,
    connect_forward,
    phase_sample_chunk,
)
from .errors import DomainError, PainleveError
from .fit import Corrections, FitReport, fit_tail
from .model import EquationParams, FinalAsymptotics, InitialAsymptotics
from .ode import IntegrationOptions, integrate, seed_initial_state

SWEEPS = ("eps", "phi1", "action")
PIPELINES = ("analytic", "numeric", "both")
EPS_FLOOR = 0.05

SCAN_HEADER = (
    "sweep", "value", "flag",
    "an_sigma", "an_I1", "an_I2", "an_sin_phi1", "an_sin_phi2",
    "num_sigma", "num_I1", "num_I2", "num_sin_phi1", "num_sin_phi2",
    "rms_residual", "d_I1", "d_I2", "d_sin_phi1", "d_sin_phi2", "sigma_agree",
)


@dataclass(frozen=True)
class ScanSpec:
    """One-parameter sweep.

    ``sweep`` picks the varied quantity: ``eps``, ``phi1`` (initial phase
    of the first channel) or ``action`` (alpha1 = alpha2 = sqrt(2 value)).
    The remaining initial data come from ``alpha``/``phi``/``eps``.
    """

    sweep: str
    values: tuple
    alpha: tuple = (0.9, 0.8)
    phi: tuple = (math.pi / 2, math.pi / 3)
    eps: float = 1.0
    pipeline: str = "analytic"
    half_width: float = 500.0
    options: IntegrationOptions = field(default_factory=IntegrationOptions)
    corrections: Corrections = field(default_factory=Corrections.both)
    eps_floor: float = EPS_FLOOR

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if self.sweep not in SWEEPS:
            raise DomainError(f"sweep must be one of {SWEEPS}")
        if self.pipeline not in PIPELINES:
            raise DomainError(f"pipeline must be one of {PIPELINES}")
        if not self.values:
            raise DomainError("sweep grid is empty")
        if not all(math.isfinite(v) for v in self.values):
            raise DomainError("sweep grid must be finite")
        eps_vals = self.values if self.sweep == "eps" else (self.eps,)
        if min(eps_vals) < self.eps_floor:
            raise DomainError(f"eps must be >= {self.eps_floor}")
        if self.sweep == "action" and min(self.values) <= 0.0:
            raise DomainError("actions must be > 0")
        if not self.half_width > 0.0:
            raise DomainError("half_width must be > 0")

    @classmethod
    def grid(cls, sweep: str, lo: float, hi: float, points: int, *,
             open_interval: bool = False, **kw) -> "ScanSpec":
        """Uniform grid on [lo, hi], or on the open interval (lo, hi) with
        the end points dropped."""
        if points < 1:
            raise DomainError("need at least one grid point")
        if open_interval:
            vals = np.linspace(lo, hi, points + 2)[1:-1]
        else:
            vals = np.linspace(lo, hi, points)
        return cls(sweep, tuple(vals), **kw)

    def point(self, value: float):
        a, p, e = tuple(self.alpha), tuple(self.phi), self.eps
        if self.sweep == "eps":
            e = value
        elif self.sweep == "phi1":
            p = (value, p[1])
        else:
            a = (math.sqrt(2.0 * value),) * 2
        return InitialAsymptotics(a, p), EquationParams.two(e)


@dataclass(frozen=True)
class ScanRow:
    value: float
    analytic: FinalAsymptotics | None = None
    numeric: FitReport | None = None
    flag: str = ""

    @property
    def deltas(self):
        """(|dI1|, |dI2|, |d sin phi1|, |d sin phi2|, sigma agreement)."""
        if self.analytic is None or self.numeric is None:
            return None
        a, n = self.analytic, self.numeric.final
        return (abs(n.I1 - a.I1), abs(n.I2 - a.I2),
                abs(math.sin(n.phi1) - math.sin(a.phi1)),
                abs(math.sin(n.phi2) - math.sin(a.phi2)),
                n.sigma == a.sigma)


@dataclass(frozen=True)
class ScanResult:
    spec: ScanSpec
    rows: tuple

    @property
    def n_flagged(self) -> int:
        return sum(1 for r in self.rows if r.flag)

    def max_deltas(self):
        ds = [r.deltas for r in self.rows if r.deltas is not None]
        if not ds:
            return None
        return tuple(max(d[k] for d in ds) for k in range(4))


def _numeric(init, params, spec: ScanSpec) -> FitReport:
    L = spec.half_width
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        state = seed_initial_state(init, params, -L)
        traj = integrate(state, -L, L, params, spec.options)
        return fit_tail(traj, None, params, spec.corrections)


def _scan_point(spec: ScanSpec, value: float) -> ScanRow:
    init, params = spec.point(value)
    analytic = numeric = None
    flags = []
    if spec.pipeline != "numeric":
        try:
            analytic = connect_forward(init, params)
        except PainleveError as exc:
            flags.append(f"analytic: {type(exc).__name__}")
    if spec.pipeline != "analytic":
        try:
            numeric = _numeric(init, params, spec)
        except PainleveError as exc:
            flags.append(f"numeric: {type(exc).__name__}")
    return ScanRow(value, analytic, numeric, "; ".join(flags))


def run_scan(spec: ScanSpec, threads: int = 1) -> ScanResult:
    """Evaluate every grid point. Failures become flagged rows; the scan
    itself never aborts. Row order follows the grid."""
    if threads > 1 and spec.pipeline != "analytic":
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(lambda v: _scan_point(spec, v), spec.values))
    else:
        rows = [_scan_point(spec, v) for v in spec.values]
    return ScanResult(spec, tuple(rows))


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, int):
        return str(v)
    return f"{float(v):.17g}"


def scan_rows_for_csv(result: ScanResult):
    for r in result.rows:
        a = r.analytic
        n = r.numeric.final if r.numeric is not None else None
        an = ([a.sigma, a.I1, a.I2, math.sin(a.phi1), math.sin(a.phi2)]
              if a is not None else [None] * 5)
        nu = ([n.sigma, n.I1, n.I2, math.sin(n.phi1), math.sin(n.phi2),
               r.numeric.rms_residual] if n is not None else [None] * 6)
        d = list(r.deltas) if r.deltas is not None else [None] * 5
        yield [result.spec.sweep, _fmt(r.value), r.flag] + [_fmt(v) for v in an + nu + d]


def write_scan_csv(result: ScanResult, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(SCAN_HEADER)
    for row in scan_rows_for_csv(result):
        w.writerow(row)


@dataclass(frozen=True)
class VacuumDecayResult:
    report: AverageReport
    # columns varphi1, varphi2, I1, I2 (numeric pipeline: fitted values)
    samples: np.ndarray | None = None
    analytic_paired: AverageReport | None = None


def _mean_report(I1, I2, n_total, method):
    n = I1.size
    if n == 0:
        raise PainleveError("every sample failed")
    d = max(n - 1, 1)
    return AverageReport(float(np.mean(I1)), float(np.mean(I2)),
                         float(np.std(I1) / math.sqrt(d)),
                         float(np.std(I2) / math.sqrt(d)), n, method, n_total - n)


def run_vacuum_decay(action: float, eps: float, n_samples: int = 1_000_000,
                     pipeline: str = "analytic", seed: int = 0, threads: int = 1,
                     method: str = "monte_carlo", half_width: float = 500.0,
                     options: IntegrationOptions | None = None,
                     dump_samples: bool = False) -> VacuumDecayResult:
    """Phase averages of the final actions at alpha1 = alpha2 = sqrt(2 action).

    The numeric pipeline integrates and fits each sample (n_samples <= 100)
    and also reports the analytic map on the same phases.
    """
    if not (math.isfinite(action) and 0.0 < action <= 0.1):
        raise DomainError("action must lie in (0, 0.1]")
    params = EquationParams.two(eps)
    if pipeline == "analytic":
        rep = averaged_actions(action, params, method, n_samples, seed, threads)
        samples = None
        if dump_samples:
            ph = phase_sample_chunk(seed, 0, min(n_samples, 1 << 16))
            samples = _analytic_samples(action, params, ph)
        return VacuumDecayResult(rep, samples)
    if pipeline != "numeric":
        raise DomainError("pipeline must be 'analytic' or 'numeric'")
    if not 1 <= n_samples <= 100:
        raise DomainError("numeric pipeline allows 1..100 samples")

    phases = phase_sample_chunk(seed, 0, n_samples)
    a = math.sqrt(2.0 * action)
    spec_opts = options or IntegrationOptions()
    dummy = ScanSpec("eps", (eps,), alpha=(a, a), eps=eps, pipeline="numeric",
                     half_width=half_width, options=spec_opts,
                     eps_floor=min(EPS_FLOOR, eps))

    def one(ph):
        init = InitialAsymptotics((a, a), tuple(ph))
        try:
            fin_a = connect_forward(init, params)
        except PainleveError:
            fin_a = None
        try:
            fin_n = _numeric(init, params, dummy).final
        except PainleveError:
            fin_n = None
        return fin_a, fin_n

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            res = list(pool.map(one, phases))
    else:
        res = [one(ph) for ph in phases]
    ok = [i for i, (fa, fn) in enumerate(res) if fa is not None and fn is not None]
    I1n = np.array([res[i][1].I1 for i in ok])
    I2n = np.array([res[i][1].I2 for i in ok])
    I1a = np.array([res[i][0].I1 for i in ok])
    I2a = np.array([res[i][0].I2 for i in ok])
    samples = None
    if dump_samples:
        samples = np.column_stack([phases[ok], I1n, I2n])
    return VacuumDecayResult(_mean_report(I1n, I2n, n_samples, "numeric"), samples,
                             _mean_report(I1a, I2a, n_samples, "analytic_paired"))


def _analytic_samples(action, params, phases):
    a = math.sqrt(2.0 * action)
    rows = []
    for ph in phases:
        try:
            f = connect_forward(InitialAsymptotics((a, a), tuple(ph)), params)
        except PainleveError:
            continue
        rows.append((ph[0], ph[1], f.I1, f.I2))
    return np.array(rows).reshape(-1, 4)


def write_samples_csv(samples: np.ndarray, stream) -> None:
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(("varphi1", "varphi2", "I1", "I2"))
    for row in samples:
        w.writerow([_fmt(v) for v in row])


__all__ = [
    "SCAN_HEADER",
    "ScanResult",
    "ScanRow",
    "ScanSpec",
    "VacuumDecayResult",
    "run_scan",
    "run_vacuum_decay",
    "write_samples_csv",
    "write_scan_csv",
]
