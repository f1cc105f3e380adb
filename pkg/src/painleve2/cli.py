"""Command-line entry point ``painleve2``.

Every subcommand writes CSV to stdout unless ``--output`` names a file.
Options may also come from a ``key = value`` file given by ``--config``;
keys are long option names with or without leading dashes, and flags on
the command line override the file.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import math
import os
import sys

import numpy as np

from .asymptotics import final_tail, initial_tail
from .connect import (
    PHI2_FORMS,
    averaged_actions,
    connect_forward,
    spanning_tree_constant_c1,
)
from .errors import ConnectionDomainError, DomainError, NumericalFailure, SeparatrixError
from .fit import FIT_CSV_HEADER, Corrections, fit_tail
from .lax import (
    positive_x_shift,
    spectrum_scan,
    write_spectrum_csv,
    zero_curvature_residual,
)
from .model import EquationParams, InitialAsymptotics
from .ode import (
    IntegrationOptions,
    integrate,
    read_trajectory_csv,
    seed_initial_state,
    write_trajectory_csv,
)
from .stats import ScanSpec, run_scan, run_vacuum_decay, write_samples_csv, write_scan_csv

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NUMERICAL = 3

CONNECT_HEADER = ("eps", "sigma", "I1", "I2", "phi1", "phi2", "rho", "A")
AVERAGE_HEADER = ("action", "eps", "method", "mean_I1", "std_err_I1",
                  "mean_I2", "std_err_I2", "n_samples", "n_discarded")
LAX_HEADER = ("n_points", "max_frobenius", "mean_frobenius", "max_entry")

# options holding angles; --degrees converts them to radians
ANGLE_OPTIONS = ("phi1", "phi2")

CORRECTIONS = {
    "none": Corrections.none(),
    "both": Corrections.both(),
    "renormalize": Corrections(True, False),
    "shift": Corrections(False, True),
}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def g17(v) -> str:
    return f"{float(v):.17g}"


def _initial_args(p, eps_default=None):
    p.add_argument("--eps", type=float, default=eps_default,
                   required=eps_default is None)
    p.add_argument("--alpha1", type=float, default=0.9)
    p.add_argument("--alpha2", type=float, default=0.8)
    p.add_argument("--phi1", type=float, default=math.pi / 2)
    p.add_argument("--phi2", type=float, default=math.pi / 3)


def _integration_args(p):
    p.add_argument("--abs-tol", type=float, default=1e-11)
    p.add_argument("--rel-tol", type=float, default=1e-11)
    p.add_argument("--dx", type=float, default=0.05,
                   help="largest spacing of the output grid")


def _output_arg(p):
    p.add_argument("--output", default=None, help="file to write (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="painleve2", description=__doc__.splitlines()[0])
    parser.add_argument("--config", default=None,
                        help="key = value file; command-line flags win")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker cap (default: $PAINLEVE_THREADS or 1)")
    parser.add_argument("--degrees", action="store_true",
                        help="read --phi1/--phi2 in degrees")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("connect", help="analytic connection map, one CSV row")
    _initial_args(p)
    p.add_argument("--phi2-form", choices=PHI2_FORMS, default="validated")
    _output_arg(p)

    p = sub.add_parser("simulate", help="seed and integrate, trajectory CSV")
    _initial_args(p)
    p.add_argument("--x0", type=float, default=-500.0)
    p.add_argument("--x1", type=float, default=500.0)
    _integration_args(p)
    _output_arg(p)

    p = sub.add_parser("fit", help="fit the x -> +inf tail of a trajectory CSV")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--input", default=None, help="trajectory CSV (default stdin)")
    p.add_argument("--x-lo", type=float, default=None)
    p.add_argument("--x-hi", type=float, default=None)
    p.add_argument("--corrections", choices=sorted(CORRECTIONS), default="both")
    _output_arg(p)

    p = sub.add_parser("scan", help="sweep eps, phi1 or the action")
    p.add_argument("--sweep", choices=("eps", "phi1", "action"), required=True)
    p.add_argument("--lo", type=float, required=True)
    p.add_argument("--hi", type=float, required=True)
    p.add_argument("--points", type=int, default=20)
    p.add_argument("--open", action="store_true",
                   help="drop the interval end points")
    _initial_args(p, eps_default=1.0)
    p.add_argument("--pipeline", choices=("analytic", "numeric", "both"),
                   default="analytic")
    p.add_argument("--half-width", type=float, default=500.0)
    p.add_argument("--corrections", choices=sorted(CORRECTIONS), default="both")
    _integration_args(p)
    _output_arg(p)

    p = sub.add_parser("average", help="phase-averaged final actions")
    p.add_argument("--action", type=float, required=True)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--samples", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--method", choices=("monte_carlo", "tensor_quadrature"),
                   default="monte_carlo")
    p.add_argument("--pipeline", choices=("analytic", "numeric"), default="analytic")
    p.add_argument("--half-width", type=float, default=500.0)
    p.add_argument("--dump", default=None, help="write per-sample CSV here")
    _output_arg(p)

    p = sub.add_parser("lax-check", help="zero-curvature residual along a trajectory")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--input", default=None, help="trajectory CSV (default stdin)")
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--t-max", type=float, default=3.0)
    p.add_argument("--seed", type=int, default=0)
    _output_arg(p)

    p = sub.add_parser("spectrum", help="eigenvalues of H(t, x) over t")
    p.add_argument("--x", type=float, required=True)
    _initial_args(p)
    p.add_argument("--sigma", type=int, choices=(-1, 1), default=-1)
    p.add_argument("--rho", type=float, default=0.12)
    p.add_argument("--amp", type=float, default=0.2)
    p.add_argument("--t-min", type=float, default=-4.0)
    p.add_argument("--t-max", type=float, default=4.0)
    p.add_argument("--points", type=int, default=801)
    p.add_argument("--shift", choices=("none", "positive-x"), default="none")
    _output_arg(p)

    p = sub.add_parser("c1", help="midpoint quadrature of the spanning-tree constant")
    p.add_argument("--resolution", type=int, default=4096)
    _output_arg(p)
    return parser


def read_config(path: str) -> dict:
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DomainError(f"{path}:{lineno}: expected key = value")
            key, value = (s.strip() for s in line.split("=", 1))
            out[key.lstrip("-").replace("-", "_")] = value
    return out


def _apply_config(parser, command, cfg: dict):
    """Install config values as defaults of the parser and subcommand."""
    sub = _subparser(parser, command)
    known = {a.dest: a for a in sub._actions} | {a.dest: a for a in parser._actions}
    for key, raw in cfg.items():
        if key not in known or key in ("help", "config", "command"):
            raise DomainError(f"unknown config key {key!r}")
        action = known[key]
        if isinstance(action, argparse._StoreTrueAction):
            value = raw.lower() in ("1", "true", "yes", "on")
        else:
            try:
                value = action.type(raw) if action.type else raw
            except ValueError:
                raise DomainError(f"config key {key!r}: cannot parse {raw!r}") from None
            if action.choices is not None and value not in action.choices:
                raise DomainError(f"config key {key!r}: {raw!r} not in {action.choices}")
        action.required = False
        target = sub if key in {a.dest for a in sub._actions} else parser
        target.set_defaults(**{key: value})


def _subparser(parser, name):
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            return action.choices[name]
    raise KeyError(name)


def _threads(args) -> int:
    n = args.threads
    if n is None:
        env = os.environ.get("PAINLEVE_THREADS", "").strip()
        n = int(env) if env else 1
    if n < 1:
        raise DomainError("threads must be >= 1")
    return n


@contextlib.contextmanager
def _sink(path):
    if path is None:
        yield sys.stdout
    else:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            yield fh


@contextlib.contextmanager
def _source(path):
    if path is None:
        yield sys.stdin
    else:
        with open(path, newline="", encoding="utf-8") as fh:
            yield fh


def _initial(args):
    init = InitialAsymptotics((args.alpha1, args.alpha2), (args.phi1, args.phi2))
    return init, EquationParams.two(args.eps)


def _options(args):
    return IntegrationOptions(abs_tol=args.abs_tol, rel_tol=args.rel_tol,
                              dense_output_dx=args.dx)


def cmd_connect(args):
    init, params = _initial(args)
    f = connect_forward(init, params, args.phi2_form)
    with _sink(args.output) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(CONNECT_HEADER)
        w.writerow([g17(f.eps), f.sigma] + [g17(v) for v in
                                             (f.I1, f.I2, f.phi1, f.phi2, f.rho, f.A)])


def cmd_simulate(args):
    init, params = _initial(args)
    state = seed_initial_state(init, params, args.x0)
    traj = integrate(state, args.x0, args.x1, params, _options(args))
    with _sink(args.output) as out:
        write_trajectory_csv(traj, out)


def cmd_fit(args):
    params = EquationParams.two(args.eps)
    with _source(args.input) as fh:
        traj = read_trajectory_csv(fh, params)
    window = None
    if args.x_lo is not None or args.x_hi is not None:
        if args.x_lo is None or args.x_hi is None:
            raise DomainError("give both --x-lo and --x-hi")
        window = (args.x_lo, args.x_hi)
    rep = fit_tail(traj, window, params, CORRECTIONS[args.corrections])
    with _sink(args.output) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(FIT_CSV_HEADER)
        row = rep.csv_row()
        w.writerow([g17(row[0]), row[1]] + [g17(v) for v in row[2:]])


def cmd_scan(args):
    spec = ScanSpec.grid(
        args.sweep, args.lo, args.hi, args.points, open_interval=args.open,
        alpha=(args.alpha1, args.alpha2), phi=(args.phi1, args.phi2),
        eps=args.eps, pipeline=args.pipeline, half_width=args.half_width,
        options=_options(args), corrections=CORRECTIONS[args.corrections])
    result = run_scan(spec, _threads(args))
    with _sink(args.output) as out:
        write_scan_csv(result, out)


def cmd_average(args):
    threads = _threads(args)
    if not 0.0 < args.action <= 0.1:
        raise DomainError("action must lie in (0, 0.1]")
    if args.pipeline == "analytic":
        rep = averaged_actions(args.action, EquationParams.two(args.eps),
                               args.method, args.samples, args.seed, threads)
        res = None
        if args.dump:
            res = run_vacuum_decay(args.action, args.eps, args.samples, "analytic",
                                   args.seed, threads, args.method,
                                   dump_samples=True)
    else:
        res = run_vacuum_decay(args.action, args.eps, args.samples, "numeric",
                               args.seed, threads, half_width=args.half_width,
                               dump_samples=bool(args.dump))
        rep = res.report
    with _sink(args.output) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(AVERAGE_HEADER)
        w.writerow([g17(args.action), g17(args.eps), rep.method,
                    g17(rep.mean_I1), g17(rep.std_err_I1), g17(rep.mean_I2),
                    g17(rep.std_err_I2), rep.n_samples, rep.n_discarded])
    if args.dump and res is not None and res.samples is not None:
        with _sink(args.dump) as out:
            write_samples_csv(res.samples, out)


def cmd_lax_check(args):
    params = EquationParams.two(args.eps)
    if args.points < 1:
        raise DomainError("points must be >= 1")
    with _source(args.input) as fh:
        traj = read_trajectory_csv(fh, params)
    rng = np.random.default_rng(args.seed)
    idx = rng.integers(0, traj.x.size, args.points)
    ts = rng.uniform(-args.t_max, args.t_max, args.points)
    fro, ent = [], []
    for i, t in zip(idx, ts):
        r = zero_curvature_residual(t, traj.x[i], traj.u[i], traj.du[i], params)
        fro.append(r.frobenius_norm)
        ent.append(r.max_entry)
    with _sink(args.output) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(LAX_HEADER)
        w.writerow([args.points, g17(max(fro)), g17(np.mean(fro)), g17(max(ent))])


def _state_at(args, params):
    x = args.x
    if x < 0.0:
        u1, u2, du1, du2 = initial_tail(x, (args.alpha1, args.alpha2),
                                        (args.phi1, args.phi2), args.eps)
        return np.array([u1, u2], dtype=float), np.array([du1, du2], dtype=float)
    if x > 0.0:
        def at(z):
            return np.array(final_tail(z, args.sigma, args.rho, args.amp,
                                       args.phi1, args.phi2, args.eps), dtype=float)
        h = 1e-5 * max(1.0, x)
        # the tail is only asymptotic, so its derivative is taken numerically
        return at(x), (at(x + h) - at(x - h)) / (2.0 * h)
    raise DomainError("x must be nonzero")


def cmd_spectrum(args):
    params = EquationParams.two(args.eps)
    if args.points < 2 or not args.t_min < args.t_max:
        raise DomainError("need t-min < t-max and at least 2 points")
    u, du = _state_at(args, params)
    ts = np.linspace(args.t_min, args.t_max, args.points)
    shift = positive_x_shift if args.shift == "positive-x" else None
    eigs = spectrum_scan(ts, args.x, u, du, params, shift)
    with _sink(args.output) as out:
        write_spectrum_csv(ts, eigs, out)


def cmd_c1(args):
    v = spanning_tree_constant_c1(args.resolution)
    with _sink(args.output) as out:
        w = csv.writer(out, lineterminator="\n")
        w.writerow(("resolution", "c1"))
        w.writerow([args.resolution, g17(v)])


COMMANDS = {
    "connect": cmd_connect,
    "simulate": cmd_simulate,
    "fit": cmd_fit,
    "scan": cmd_scan,
    "average": cmd_average,
    "lax-check": cmd_lax_check,
    "spectrum": cmd_spectrum,
    "c1": cmd_c1,
}


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config", default=None)
        known, _ = pre.parse_known_args(argv)
        command = next((a for a in argv if a in COMMANDS), None)
        if known.config and command is not None:
            _apply_config(parser, command, read_config(known.config))
        args = parser.parse_args(argv)
        if args.degrees:
            for name in ANGLE_OPTIONS:
                if hasattr(args, name):
                    setattr(args, name, math.radians(getattr(args, name)))
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except (DomainError, OSError) as exc:
        print(f"painleve2: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except (NumericalFailure, SeparatrixError, ConnectionDomainError) as exc:
        print(f"painleve2: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
