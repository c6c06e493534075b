"""Command-line interface.

Subcommands: gen-unitary, exact-dist, sample, sweep-t, detector-curves,
verify. Long flag names only. Every output file carries the producing
command's parameters in its metadata header, so any file can be regenerated
from its own header. Exit codes: 0 success, 1 usage or input error,
2 size-guard violation, 3 invariant failure.

A default seed may be supplied through the CVBOSON_SEED environment variable.
"""

import argparse
import json
import os
import sys

import numpy as np

from .distribution import distribution_table
from .errors import GuardLimitError, InvariantViolation
from .estimate import build_estimate_report, deviation_sweep, estimate_perm_from_samples
from .fock import check_unitary, haar_unitary
from .io import _atomic_writer, fmt17, read_unitary_json, write_csv, write_unitary_json
from .povm import detector_curves
from .sampler import sample_cv1, sample_dprcv1, sample_fock, sample_prcv1
from .verify import run_checks
from .version import VERSION

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_GUARD = 2
EXIT_INVARIANT = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; remap that to a usage error."""

    def error(self, message):
        raise UsageError(message)


def _default_seed(value):
    if value is not None:
        return value
    env = os.environ.get("CVBOSON_SEED")
    if env is None:
        raise UsageError("no --seed given and CVBOSON_SEED is not set")
    try:
        return int(env)
    except ValueError as exc:
        raise UsageError(f"CVBOSON_SEED must be an integer, got {env!r}") from exc


def _load_unitary(path):
    u, meta = read_unitary_json(path)
    return check_unitary(u), meta


def _cmd_gen_unitary(args):
    seed = _default_seed(args.seed)
    u = haar_unitary(args.modes, seed)
    write_unitary_json(
        args.out,
        u,
        meta={"seed": seed, "generator": "haar", "version": VERSION},
    )
    return EXIT_OK


def _cmd_exact_dist(args):
    u, u_meta = _load_unitary(args.unitary)
    table = distribution_table(u, args.photons, args.t)
    meta = {
        "command": "exact-dist",
        "unitary": args.unitary,
        "photons": args.photons,
        "t": fmt17(args.t),
        "detector": "dprcv1",
    }
    if "seed" in u_meta:
        meta["unitary_seed"] = u_meta["seed"]
    rows = [
        ["".join(map(str, pattern)), probability]
        for pattern, probability in table.entries.items()
    ]
    if args.out:
        write_csv(args.out, ["pattern", "probability"], rows, meta)
    else:
        for pattern, probability in rows:
            print(f"{pattern},{fmt17(probability)}")
    return EXIT_OK


def _format_outcome(kind, row):
    if kind == "dprcv1":
        return "".join(str(int(x)) for x in row)
    if kind == "fock":
        return ",".join(str(int(x)) for x in row)
    if kind == "prcv1":
        return ",".join(fmt17(x) for x in row)
    return ",".join(f"{fmt17(x.real)},{fmt17(x.imag)}" for x in row)


def _cmd_sample(args):
    u, u_meta = _load_unitary(args.unitary)
    seed = _default_seed(args.seed)
    if args.detector == "dprcv1":
        if args.t is None:
            raise UsageError("--t is required for the dprcv1 detector")
        batch = sample_dprcv1(u, args.photons, args.t, args.shots, seed, threads=args.threads)
    elif args.detector == "prcv1":
        batch = sample_prcv1(u, args.photons, args.shots, seed, threads=args.threads)
    elif args.detector == "cv1":
        batch = sample_cv1(
            u,
            args.photons,
            args.shots,
            seed,
            grid_radial=args.grid_radial,
            grid_angular=args.grid_angular,
            threads=args.threads,
        )
    else:
        batch = sample_fock(u, args.photons, args.shots, seed, threads=args.threads)
    meta = {
        "command": "sample",
        "unitary": args.unitary,
        "photons": args.photons,
        "detector": args.detector,
        "shots": args.shots,
        "seed": seed,
    }
    if args.t is not None:
        meta["t"] = fmt17(args.t)
    if args.detector == "cv1":
        meta["grid_radial"] = args.grid_radial
        meta["grid_angular"] = args.grid_angular
    if "seed" in u_meta:
        meta["unitary_seed"] = u_meta["seed"]
    rows = [
        [shot, _format_outcome(batch.kind, row)]
        for shot, row in enumerate(batch.outcomes)
    ]
    write_csv(args.out, ["shot", "outcome"], rows, meta)
    return EXIT_OK


def _cmd_sweep_t(args):
    u, u_meta = _load_unitary(args.unitary)
    t_grid = np.geomspace(args.t_min, args.t_max, args.points)
    sweep = deviation_sweep(u, args.photons, t_grid)
    meta = {
        "command": "sweep-t",
        "unitary": args.unitary,
        "photons": args.photons,
        "t_min": fmt17(args.t_min),
        "t_max": fmt17(args.t_max),
        "points": args.points,
        "perm_sq_true": fmt17(sweep.perm_sq_true),
        "degenerate": sweep.degenerate,
    }
    if not sweep.degenerate:
        meta["linear_coeff"] = fmt17(sweep.linear_coeff)
        meta["quadratic_bound"] = fmt17(sweep.quadratic_bound)
    if "seed" in u_meta:
        meta["unitary_seed"] = u_meta["seed"]
    rows = []
    for t, delta in zip(sweep.t_values, sweep.deviations):
        ratio = sweep.perm_sq_true + delta
        rows.append([float(t), ratio * t**args.photons, ratio, delta])
    write_csv(args.out, ["t", "p_exact", "p_over_tN", "delta"], rows, meta)

    if args.report:
        t_work = float(t_grid[0])
        if args.shots:
            seed = _default_seed(args.seed)
            batch = sample_dprcv1(u, args.photons, t_work, args.shots, seed)
            p_tilde = estimate_perm_from_samples(batch, t_work, args.photons).value
        else:
            p_tilde = float(
                sweep.perm_sq_true + sweep.deviations[0]
            )  # exact ratio at the working threshold
        report = build_estimate_report(
            u,
            args.photons,
            t_work,
            p_tilde=p_tilde,
            lower_bound=args.lower_bound,
            g=args.g,
        )
        with _atomic_writer(args.report) as handle:
            json.dump(report.as_dict(), handle, indent=1)
            handle.write("\n")
    return EXIT_OK


def _cmd_detector_curves(args):
    grid = np.linspace(0.0, args.t_max, args.points)
    table = detector_curves(grid)
    meta = {
        "command": "detector-curves",
        "t_max": fmt17(args.t_max),
        "points": args.points,
    }
    rows = [[float(t), float(eta), float(p_dark)] for t, eta, p_dark in table]
    write_csv(args.out, ["t", "eta", "p_dark"], rows, meta)
    return EXIT_OK


def _cmd_verify(args):
    results = run_checks(args.level)
    for result in results:
        status = "PASS" if result.passed else "FAIL"
        print(f"{status} {result.name} ({result.seconds:.2f}s): {result.detail}")
    failed = [r for r in results if not r.passed]
    if failed:
        print(f"{len(failed)} of {len(results)} checks failed")
        return EXIT_INVARIANT
    print(f"all {len(results)} checks passed")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="cvboson", description=__doc__)
    parser.add_argument("--version", action="version", version=f"cvboson {VERSION}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-unitary", help="generate a Haar-random unitary JSON file")
    p.add_argument("--modes", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_gen_unitary)

    p = sub.add_parser("exact-dist", help="exact click-pattern distribution CSV")
    p.add_argument("--unitary", required=True)
    p.add_argument("--photons", type=int, required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_exact_dist)

    p = sub.add_parser("sample", help="draw reproducible measurement samples")
    p.add_argument("--unitary", required=True)
    p.add_argument("--photons", type=int, required=True)
    p.add_argument(
        "--detector", choices=("fock", "dprcv1", "prcv1", "cv1"), required=True
    )
    p.add_argument("--t", type=float)
    p.add_argument("--shots", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--grid-radial", type=int, default=512)
    p.add_argument("--grid-angular", type=int, default=256)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("sweep-t", help="threshold sweep of the first-N-clicks probability")
    p.add_argument("--unitary", required=True)
    p.add_argument("--photons", type=int, required=True)
    p.add_argument("--t-min", type=float, default=1e-4)
    p.add_argument("--t-max", type=float, default=1e-2)
    p.add_argument("--points", type=int, default=12)
    p.add_argument("--out", required=True)
    p.add_argument("--report", help="also write an estimate report JSON here")
    p.add_argument("--shots", type=int, help="sample-based estimate for the report")
    p.add_argument("--seed", type=int)
    p.add_argument("--g", type=float, default=1.1)
    p.add_argument("--lower-bound", type=float)
    p.set_defaults(func=_cmd_sweep_t)

    p = sub.add_parser("detector-curves", help="efficiency and dark-count curves CSV")
    p.add_argument("--t-max", type=float, default=3.0)
    p.add_argument("--points", type=int, default=301)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_detector_curves)

    p = sub.add_parser("verify", help="run the invariant suite")
    p.add_argument("--level", choices=("quick", "full"), default="quick")
    p.set_defaults(func=_cmd_verify)

    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except GuardLimitError as exc:
        print(f"guard violation: {exc}", file=sys.stderr)
        return EXIT_GUARD
    except InvariantViolation as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
