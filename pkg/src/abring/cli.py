"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 domain error, 3 accuracy budget or
failed audit.  Every flag may also come from a JSON file given with
``--config``; explicit flags win.  ``--save-config`` writes the effective
arguments so a run can be repeated exactly.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .analysis import GridSpec, find_resonant_flux, find_zeros, sweep, symmetry_audit, write_atomic
from .dynamics import (
    Propagator,
    WavePacketSpec,
    build_gaussian,
    cage_experiment,
    measure_transmission,
    snapshots_to_csv,
)
from .errors import AbringError, AccuracyBudgetExceededError, DomainError
from .model import Gauge, RingSpec, build_lattice
from .scattering import solve_closed_form, solve_linear

EXIT_OK, EXIT_USAGE, EXIT_DOMAIN, EXIT_ACCURACY = 0, 1, 2, 3
_NOT_SAVED = {"config", "save_config", "command"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _round(obj):
    if isinstance(obj, float):
        return float(f"{obj:.12g}") if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def _dumps(obj) -> str:
    return json.dumps(_round(obj), indent=2) + "\n"


def _emit(text: str, output=None):
    if output:
        write_atomic(output, text)
    else:
        sys.stdout.write(text)


def _add_ring(p, flux=True):
    g = p.add_argument_group("ring")
    g.add_argument("--n-alpha", type=int, help="links in the upper arm (>= 1)")
    g.add_argument("--n-beta", type=int, help="links in the lower arm (>= 1)")
    if flux:
        g.add_argument("--flux", type=float, help="total synthetic flux in radians (default 0)")
        g.add_argument("--flux-in-pi", type=float, help="total flux in units of pi; overrides --flux")
    g.add_argument("--coupling", type=float, help="hopping J (default 1)")


def _add_common(p):
    p.add_argument("--config", help="JSON file supplying any of these flags (keys use underscores)")
    p.add_argument("--save-config", help="write the effective arguments as JSON to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="abring", description="Transport through a two-arm coupled-resonator ring with synthetic flux.")
    parser.add_argument("--version", action="version", version=f"abring {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("transmit", help="scattering coefficients at one wave vector")
    _add_ring(p)
    p.add_argument("--k", type=float, help="wave vector in radians")
    p.add_argument("--method", choices=["oracle", "closed"], help="linear solve (oracle, default) or closed form")
    p.add_argument("--output", help="write JSON here instead of stdout")
    _add_common(p)

    p = sub.add_parser("sweep", help="tabulate T and R over a (k, flux) grid as CSV")
    _add_ring(p, flux=False)
    p.add_argument("--k-start", type=float, help="first k (default 0.01)")
    p.add_argument("--k-stop", type=float, help="last k (default pi - 0.01)")
    p.add_argument("--k-num", type=int, help="number of k points (default 401)")
    p.add_argument("--flux-start", type=float, help="first flux (default -pi)")
    p.add_argument("--flux-stop", type=float, help="last flux (default pi)")
    p.add_argument("--flux-num", type=int, help="number of flux points (default 401)")
    p.add_argument("--output", help="CSV path (default sweep.csv); a .json sidecar is written next to it")
    _add_common(p)

    p = sub.add_parser("zeros", help="transmission zeros at flux 0 or pi")
    _add_ring(p)
    p.add_argument("--output", help="write JSON here instead of stdout")
    _add_common(p)

    p = sub.add_parser("resonances", help="fluxes giving full transmission at wave vector k")
    _add_ring(p, flux=False)
    p.add_argument("--k", type=float, help="wave vector in radians")
    p.add_argument("--no-fallback", action="store_const", const=True,
                   help="fail instead of scanning numerically when no closed form applies")
    p.add_argument("--output", help="write JSON here instead of stdout")
    _add_common(p)

    p = sub.add_parser("evolve", help="wave-packet transmission through the lattice")
    _add_ring(p)
    p.add_argument("--k", type=float, help="carrier wave vector, 0 < k < pi")
    p.add_argument("--width", type=float, help="Gaussian parameter w (default 0.05)")
    p.add_argument("--center", type=float, help="packet centre site in the input lead (default: automatic)")
    p.add_argument("--lead-len", type=int, help="sites per lead (default: automatic)")
    p.add_argument("--gauge", choices=[g.value for g in Gauge], help="gauge of the ring phases (default single_link)")
    p.add_argument("--sample-dt", type=float, help="sampling interval of the trace (default 0.5)")
    p.add_argument("--output", help="trace CSV path (time,p_in,p_ring,p_out,norm)")
    p.add_argument("--snapshot-times", help="comma-separated times for per-site density snapshots")
    p.add_argument("--snapshot-output", help="snapshot CSV path (time,site,density)")
    _add_common(p)

    p = sub.add_parser("cage", help="leakage of a photon started in the ring bound state")
    _add_ring(p)
    p.add_argument("--k", type=float, help="wave vector with sin(Na k) = sin(Nb k) = 0")
    p.add_argument("--t-final", type=float, help="evolution time (default 200/J)")
    p.add_argument("--lead-len", type=int, help="sites per lead (default 20)")
    p.add_argument("--noise", type=float, help="relative norm of a random ring perturbation (default 0)")
    p.add_argument("--seed", type=int, help="seed for the perturbation (default 0)")
    _add_common(p)

    p = sub.add_parser("audit", help="randomised unitarity and symmetry audit")
    _add_ring(p, flux=False)
    p.add_argument("--samples", type=int, help="number of random (k, flux) samples (default 1000)")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--output", help="write the JSON report here instead of stdout")
    _add_common(p)
    return parser


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise UsageError("missing required argument(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _get(args, name, default):
    value = getattr(args, name, None)
    return default if value is None else value


def _spec(args, with_flux=True) -> RingSpec:
    _need(args, "n_alpha", "n_beta")
    flux = 0.0
    if with_flux:
        flux = _get(args, "flux", 0.0)
        if getattr(args, "flux_in_pi", None) is not None:
            flux = args.flux_in_pi * math.pi
    return RingSpec(args.n_alpha, args.n_beta, flux, _get(args, "coupling", 1.0))


def cmd_transmit(args) -> int:
    _need(args, "k")
    spec = _spec(args)
    method = _get(args, "method", "oracle")
    sol = solve_linear(spec, args.k) if method == "oracle" else solve_closed_form(spec, args.k)
    _emit(_dumps(sol.to_dict()), args.output)
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _spec(args, with_flux=False)
    kg = GridSpec(_get(args, "k_start", 0.01), _get(args, "k_stop", math.pi - 0.01), _get(args, "k_num", 401))
    fg = GridSpec(_get(args, "flux_start", -math.pi), _get(args, "flux_stop", math.pi), _get(args, "flux_num", 401))
    grid = sweep(spec, kg, fg)
    out = _get(args, "output", "sweep.csv")
    grid.write(out)
    print(f"sweep: {kg.num}x{fg.num} points, T in [{grid.T.min():.12g}, {grid.T.max():.12g}] -> {out}")
    return EXIT_OK


def cmd_zeros(args) -> int:
    spec = _spec(args)
    zeros = find_zeros(spec.n_alpha, spec.n_beta, spec.flux)
    _emit(_dumps({"n_alpha": spec.n_alpha, "n_beta": spec.n_beta, "flux": spec.flux, "zeros": zeros}), args.output)
    return EXIT_OK


def cmd_resonances(args) -> int:
    _need(args, "k")
    spec = _spec(args, with_flux=False)
    res = find_resonant_flux(spec.n_alpha, spec.n_beta, args.k, fallback=not args.no_fallback)
    _emit(_dumps(res.to_dict()), args.output)
    return EXIT_OK


def cmd_evolve(args) -> int:
    _need(args, "k")
    spec = _spec(args)
    packet = WavePacketSpec(args.k, args.center, _get(args, "width", 0.05))
    gauge = Gauge(_get(args, "gauge", Gauge.SINGLE_LINK.value))
    run = measure_transmission(spec, packet, args.lead_len, gauge=gauge, sample_dt=_get(args, "sample_dt", 0.5))
    if args.output:
        write_atomic(args.output, run.trace.to_csv())
    if args.snapshot_times:
        _need(args, "snapshot_output")
        times = [float(x) for x in args.snapshot_times.split(",") if x.strip()]
        system = build_lattice(spec, gauge, run.lead_len)
        psi0 = build_gaussian(system, packet, run.center)
        dens = np.abs(Propagator(system.matrix).states(psi0, times)) ** 2
        write_atomic(args.snapshot_output, snapshots_to_csv(times, dens))
    print(f"T_dyn={run.T_dyn:.12g} T_analytic={run.T_analytic:.12g} t_stop={run.t_stop:.12g} lead_len={run.lead_len}")
    return EXIT_OK


def cmd_cage(args) -> int:
    _need(args, "k")
    spec = _spec(args)
    leakage = cage_experiment(
        spec, args.k,
        t_final=args.t_final,
        lead_len=_get(args, "lead_len", 20),
        noise=_get(args, "noise", 0.0),
        seed=_get(args, "seed", 0),
    )
    print(f"leakage={leakage:.12g}")
    return EXIT_OK


def cmd_audit(args) -> int:
    spec = _spec(args, with_flux=False)
    report = symmetry_audit(spec, _get(args, "samples", 1000), _get(args, "seed", 0))
    _emit(_dumps(report.to_dict()), args.output)
    return EXIT_OK if report.passed else EXIT_ACCURACY


COMMANDS = {
    "transmit": cmd_transmit,
    "sweep": cmd_sweep,
    "zeros": cmd_zeros,
    "resonances": cmd_resonances,
    "evolve": cmd_evolve,
    "cage": cmd_cage,
    "audit": cmd_audit,
}


def _apply_config(parser, argv):
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help(sys.stderr)
        raise SystemExit(EXIT_USAGE)
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                config = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}")
        if config.get("command", args.command) != args.command:
            raise UsageError(f"config is for '{config['command']}', not '{args.command}'")
        for key, value in config.items():
            if key in _NOT_SAVED:
                continue
            if not hasattr(args, key):
                raise UsageError(f"unknown config key {key!r} for '{args.command}'")
            if getattr(args, key) is None:
                setattr(args, key, value)
    return args


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        if args.save_config:
            saved = {"command": args.command}
            saved.update({k: v for k, v in sorted(vars(args).items()) if k not in _NOT_SAVED})
            write_atomic(args.save_config, json.dumps(saved, indent=2) + "\n")
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"abring: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AccuracyBudgetExceededError as exc:
        print(f"abring: accuracy budget exceeded: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except DomainError as exc:
        print(f"abring: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except AbringError as exc:  # pragma: no cover
        print(f"abring: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
