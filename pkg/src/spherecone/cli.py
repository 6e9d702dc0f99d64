"""Command-line interface: point generation, discrepancy evaluation,
the sphere trial integral, stratified-scaling studies and option-pricing
tables.

Exit codes: 0 on success, 2 on configuration/usage errors, 3 on numeric
failures.  CSV output uses 17 significant digits so that written point
sets round-trip losslessly.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys

import numpy as np

from . import finance, lds, spheremap, wce
from .errors import DomainError, ConfigurationError, NumericError

_FMT = "%.17g"


def _emit_csv(header, rows, path):
    out = open(path, "w", newline="") if path else sys.stdout
    try:
        writer = csv.writer(out)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_FMT % v if isinstance(v, float) else v
                             for v in row])
    finally:
        if path:
            out.close()


def _direction_table(args):
    if getattr(args, "dirfile", None):
        return lds.DirectionNumberTable.from_file(args.dirfile)
    return None  # SobolStream falls back to the embedded table


def _int_list(text):
    return [int(v) for v in text.split(",") if v]


def _kernel_params(args):
    return wce.KernelParams(mu=args.mu, A=args.A, B=args.B, d=args.d)


def cmd_points(args):
    table = _direction_table(args)
    if args.gen == "sobol":
        stream = lds.SobolStream(args.dim, seed=args.seed,
                                 scramble=args.scramble, table=table)
        pts = stream.take(args.n)
        _emit_csv([f"x{i+1}" for i in range(args.dim)],
                  [list(map(float, row)) for row in pts], args.output)
        return 0
    if args.gen == "sphere":
        stream = lds.SobolStream(args.dim, seed=args.seed,
                                 scramble=args.scramble, table=table)
        cube = stream.take(args.n)
    elif args.gen == "random":
        rng = np.random.Generator(np.random.Philox(
            np.random.SeedSequence([int(args.seed)])))
        cube = rng.random((args.n, args.dim))
    else:
        raise ConfigurationError(f"unknown generator {args.gen!r}")
    pts = spheremap.lift_to_space(cube)
    if args.polar:
        header = ["radius"] + [f"y{i+1}" for i in range(args.dim)]
        rows = [[float(pts.radii[i])] + list(map(float, pts.directions[i]))
                for i in range(len(pts))]
    else:
        header = [f"x{i+1}" for i in range(args.dim)]
        rows = [list(map(float, row)) for row in pts.cartesian]
    _emit_csv(header, rows, args.output)
    return 0


def cmd_sphere_map(args):
    table = _direction_table(args)
    if args.gen == "sobol":
        cube = lds.SobolStream(args.dim, seed=args.seed,
                               scramble=args.scramble, table=table
                               ).take(args.n)
    else:
        rng = np.random.Generator(np.random.Philox(
            np.random.SeedSequence([int(args.seed)])))
        cube = rng.random((args.n, args.dim))
    pts = spheremap.map_to_sphere(cube)
    _emit_csv([f"y{i+1}" for i in range(args.dim + 1)],
              [list(map(float, row)) for row in pts], args.output)
    return 0


def _read_points(path):
    """Read a point CSV (cartesian `x1..` or polar `radius,y1..`)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = np.array([[float(v) for v in row] for row in reader])
    if header and header[0] == "radius":
        return spheremap.SpacePoints(rows[:, 1:], rows[:, 0])
    return spheremap.SpacePoints.from_cartesian(rows)


def cmd_wce(args):
    pts = _read_points(args.input)
    p = wce.KernelParams(mu=args.mu, A=args.A, B=args.B,
                         d=pts.directions.shape[1] - 1)
    report = wce.wce_nakagami(p, pts)
    json.dump({"wce": report.wce,
               "double_sum_term": report.double_sum_term,
               "single_sum_term": report.single_sum_term,
               "W_K": report.W_K,
               "n_points": report.n_points}, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def cmd_rms_wce(args):
    p = _kernel_params(args)
    out = {"iid_constant": wce.rms_wce_iid(p)}
    if args.N:
        out["iid_expected_wce_sq"] = out["iid_constant"] / args.N
    if args.input:
        pts = _read_points(args.input)
        out["fixed_directions_expected_wce_sq"] = wce.rms_wce_fixed_directions(
            p, pts.directions)
    json.dump(out, sys.stdout, indent=2)
    sys.stdout.write("\n")
    return 0


def _trial_points(gen, dim, n, seed, table):
    """Points on S^{dim-1} for the trial integral."""
    if gen == "inverse_beta":
        cube = lds.SobolStream(dim - 1, seed=seed, scramble=True,
                               table=table).take(n)
        return spheremap.map_to_sphere(cube)
    if gen == "inverse_normal":
        cube = lds.SobolStream(dim, seed=seed, scramble=True,
                               table=table).take(n)
        from .specfun import inv_normal_cdf
        z = inv_normal_cdf(np.clip(cube, 2.0**-33, 1.0 - 2.0**-33))
        return z / np.linalg.norm(z, axis=1, keepdims=True)
    if gen == "random":
        rng = np.random.Generator(np.random.Philox(
            np.random.SeedSequence([int(seed)])))
        return spheremap.map_to_sphere(rng.random((n, dim - 1)))
    raise ConfigurationError(f"unknown generator {gen!r}")


def trial_integral_errors(dim, N_list, gen, seed, table=None):
    """|1 - (1/N) sum (sum_i y_i)^2| on S^{dim-1} for each N."""
    errors = []
    for n in N_list:
        y = _trial_points(gen, dim, n, seed, table)
        est = float(np.mean(y.sum(axis=1)**2))
        errors.append(abs(1.0 - est))
    return errors


def cmd_trial_integral(args):
    table = _direction_table(args)
    n_list = _int_list(args.n_list)
    rows = []
    for gen in args.gen.split(","):
        errs = trial_integral_errors(args.dim, n_list, gen, args.seed, table)
        rows.extend([gen, n, e] for n, e in zip(n_list, errs))
    _emit_csv(["generator", "N", "abs_error"], rows, args.output)
    return 0


def strata_scaling(p, M_list, seed, draws=0):
    """Exact-formula E[wce^2] at K = round(sqrt(M)) per M, optional
    empirical means over stratified draws, and log-log slopes."""
    rows = []
    for M in M_list:
        K = max(1, int(round(math.sqrt(M))))
        part = spheremap.equal_area_partition_s2(M)
        shells = spheremap.radial_shells(p.mu, p.B, K)
        pred = wce.stratified_expected_wce_sq(p, part, shells, seed=seed)
        row = {"M": M, "K": K, "N": M * K, "formula": pred.value}
        if draws:
            vals = [wce.wce_nakagami(
                p, spheremap.stratified_sample(part, shells, seed + 1000 + i)
            ).wce**2 for i in range(draws)]
            row["empirical"] = float(np.mean(vals))
            row["empirical_se"] = float(np.std(vals, ddof=1) / math.sqrt(draws))
        rows.append(row)
    logs_n = np.log([r["N"] for r in rows])
    logs_f = np.log([r["formula"] for r in rows])
    slope = float(np.polyfit(logs_n, logs_f, 1)[0]) if len(rows) > 1 else None
    return rows, slope


def cmd_strata(args):
    p = _kernel_params(args)
    rows, slope = strata_scaling(p, _int_list(args.M_list), args.seed,
                                 args.draws)
    header = list(rows[0].keys())
    _emit_csv(header, [[float(r[k]) for k in header] for r in rows],
              args.output)
    if slope is not None:
        print(f"# log-log slope of formula vs N: {slope:.6f}",
              file=sys.stderr)
    return 0


def cmd_lambda(args):
    print(_FMT % wce.lambda_k(args.mu, args.c, args.K))
    return 0


def _option_spec(args):
    return finance.OptionSpec(
        S0=args.S0, K_strike=args.K, T=args.T, sigma=args.sigma, r=args.r,
        d_steps=args.steps, kind=args.kind, barrier_b=args.barrier)


_GEN_ALIASES = {"mc": "mc", "sobol": "sobol_inverse_normal",
                "sphere": "sphere_normal"}


def cmd_price(args):
    spec = _option_spec(args)
    if args.N % args.reps:
        raise ConfigurationError(
            f"N={args.N} not divisible by reps={args.reps}")
    est = finance.price_option(spec, args.construction,
                               _GEN_ALIASES[args.gen],
                               args.N // args.reps, args.reps, args.seed)
    _emit_csv(
        ["kind", "generator", "construction", "N", "reps", "mean",
         "std_dev_across_replicates", "std_error"],
        [[spec.kind, est.generator, est.construction, args.N, args.reps,
          est.mean, est.std_dev_across_replicates, est.std_error]],
        args.output)
    return 0


def cmd_table(args):
    spec = _option_spec(args)
    header, rows = finance.experiment_table(spec, _int_list(args.n_list),
                                            args.seed)
    _emit_csv(header, rows, args.output)
    return 0


def _add_common(sp, output=True, dirfile=False):
    sp.add_argument("--seed", type=int, default=0)
    if output:
        sp.add_argument("--output", default=None)
    if dirfile:
        sp.add_argument("--dirfile", default=None,
                        help="direction-number file overriding the "
                        "embedded table (also settable via "
                        "SPHERECONE_DIRFILE)")


def build_parser():
    ap = argparse.ArgumentParser(
        prog="spherecone",
        description="Normally distributed QMC point sets, spherical-cone "
        "discrepancies and option-pricing experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("points", help="generate points in R^dim")
    sp.add_argument("--dim", type=int, required=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--gen", default="sphere",
                    choices=["sphere", "sobol", "random"])
    sp.add_argument("--scramble", action="store_true")
    sp.add_argument("--polar", action="store_true",
                    help="emit radius,y1..yd instead of cartesian")
    _add_common(sp, dirfile=True)
    sp.set_defaults(func=cmd_points)

    sp = sub.add_parser("sphere-map", help="map cube points onto S^dim")
    sp.add_argument("--dim", type=int, required=True,
                    help="cube dimension; output lies on S^dim")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--gen", default="sobol", choices=["sobol", "random"])
    sp.add_argument("--scramble", action="store_true")
    _add_common(sp, dirfile=True)
    sp.set_defaults(func=cmd_sphere_map)

    sp = sub.add_parser("wce", help="worst-case error of a point CSV")
    sp.add_argument("--input", required=True)
    sp.add_argument("--mu", type=float, required=True)
    sp.add_argument("--A", type=float, required=True)
    sp.add_argument("--B", type=float, required=True)
    sp.set_defaults(func=cmd_wce)

    sp = sub.add_parser("rms-wce", help="expected squared wce laws")
    sp.add_argument("--mu", type=float, required=True)
    sp.add_argument("--A", type=float, required=True)
    sp.add_argument("--B", type=float, required=True)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--N", type=int, default=0)
    sp.add_argument("--input", default=None,
                    help="direction CSV for the fixed-directions law")
    sp.set_defaults(func=cmd_rms_wce)

    sp = sub.add_parser("trial-integral",
                        help="error of the sphere trial integral")
    sp.add_argument("--dim", type=int, default=16,
                    help="ambient dimension (sphere S^{dim-1})")
    sp.add_argument("--n-list", default="1024,4096,16384,65536,262144")
    sp.add_argument("--gen", default="inverse_beta",
                    help="comma list of inverse_beta,inverse_normal,random")
    _add_common(sp, dirfile=True)
    sp.set_defaults(func=cmd_trial_integral)

    sp = sub.add_parser("strata", help="stratified-sampling scaling study")
    sp.add_argument("--mu", type=float, required=True)
    sp.add_argument("--A", type=float, required=True)
    sp.add_argument("--B", type=float, required=True)
    sp.add_argument("--d", type=int, default=2)
    sp.add_argument("--M-list", default="64,256,1024,4096")
    sp.add_argument("--draws", type=int, default=0,
                    help="empirical stratified draws per M (0 = formula only)")
    _add_common(sp)
    sp.set_defaults(func=cmd_strata)

    sp = sub.add_parser("lambda", help="the shell mean Lambda_K")
    sp.add_argument("--mu", type=float, required=True)
    sp.add_argument("--c", type=float, required=True)
    sp.add_argument("--K", type=int, required=True)
    sp.set_defaults(func=cmd_lambda)

    for name in ("price", "table"):
        sp = sub.add_parser(name, help=f"option pricing ({name})")
        sp.add_argument("--kind", default="asian",
                        choices=["asian", "barrier", "digital"])
        sp.add_argument("--S0", type=float, default=100.0)
        sp.add_argument("--K", type=float, default=100.0)
        sp.add_argument("--T", type=float, default=1.0)
        sp.add_argument("--sigma", type=float, default=0.2)
        sp.add_argument("--r", type=float, default=0.05)
        sp.add_argument("--steps", type=int, default=30)
        sp.add_argument("--barrier", type=float, default=None)
        if name == "price":
            sp.add_argument("--N", type=int, required=True)
            sp.add_argument("--reps", type=int, default=128)
            sp.add_argument("--gen", default="sobol",
                            choices=list(_GEN_ALIASES))
            sp.add_argument("--construction", default="standard",
                            choices=["standard", "pca"])
            sp.set_defaults(func=cmd_price)
        else:
            sp.add_argument("--n-list", default="32768,65536")
            sp.set_defaults(func=cmd_table)
        _add_common(sp)
    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (DomainError, ConfigurationError, FileNotFoundError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericError, ArithmeticError) as exc:
        print(f"numeric error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
