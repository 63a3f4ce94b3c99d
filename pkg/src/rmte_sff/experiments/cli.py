"""Command line front end.

    python -m rmte_sff run --model rmte --N 16 --eps 0.05 --realizations 200 --out res/
    python -m rmte_sff theory --kind extrapolated --N 24 --eps 0.1 --out curve.csv
    python -m rmte_sff figure fig1 --out figs/
    python -m rmte_sff collapse res/a res/b --tau-min 0.0625
    python -m rmte_sff thouless res/a --delta 0.005
"""

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .. import theory
from ..ensemble import EnsembleSpec
from ..errors import CapacityError, ConfigError, RmteError, ThoulessNotFound
from ..rng import PhaseDistribution
from ..spectra import extract_thouless
from .analysis import collapse_check
from .figures import recipes, render
from .io import load_estimate, theory_curves_to_csv, write_atomic
from .runner import run

# flag name -> EnsembleSpec field
SPEC_FLAGS = {
    "model": str, "N": int, "L": int, "eps": float, "gamma": float, "dist": str,
    "kA": float, "kB": float, "realizations": int, "seed": int, "t_max": int,
    "moments": str, "alpha": float, "spacing_realizations": int, "eig_method": str,
    "max_dim": int, "out": str,
}
FIELD_OF = {"seed": "master_seed"}


def _progress(done, total):
    print(f"\r  block {done}/{total}", end="" if done < total else "\n", file=sys.stderr, flush=True)


def spec_from_args(args):
    cfg = {}
    if args.config:
        try:
            text = Path(args.config).read_text()
        except OSError as exc:
            raise ConfigError("config", f"cannot read {args.config}: {exc}") from exc
        cfg = EnsembleSpec.from_json(text).to_dict()
    for flag in SPEC_FLAGS:
        val = getattr(args, flag.replace("-", "_"), None)
        if val is None:
            continue
        key = FIELD_OF.get(flag, flag)
        if flag == "moments":
            try:
                val = [int(v) for v in str(val).split(",") if v]
            except ValueError as exc:
                raise ConfigError("moments", f"expected comma-separated integers, got {val!r}") from exc
        if flag == "dist":
            val = {"kind": val}
        cfg[key] = val
    return EnsembleSpec.from_dict(cfg)


def cmd_run(args):
    spec = spec_from_args(args)
    if spec.out is None:
        raise ConfigError("out", "an output directory is required (--out or config field)")
    est, outdir = run(spec, workers=args.workers, progress=None if args.quiet else _progress)
    print(f"wrote {outdir} ({est.realizations} realizations, {len(est.times)} times)")
    return 0


def cmd_theory(args):
    dist = PhaseDistribution.from_dict(args.dist)
    N, L = args.N, args.L
    kind = args.kind
    if kind in ("short", "extrapolated"):
        t = np.arange(1, (args.t_max or 4 * N**L) + 1)
        if args.m == 1:
            vals = theory.sff_prediction(t, N, L, args.eps, dist, kind)
        else:
            vals = theory.moment_prediction(t, args.m, N, args.eps, dist, kind, L)
        curve = theory.TheoryCurve(t, vals, f"K{args.m}_{kind}", xname="t")
    elif kind == "scaled":
        tau = np.geomspace(args.tau_min, args.tau_max, args.points)
        curve = theory.TheoryCurve(tau, theory.sff_prediction_scaled(tau, args.Gamma, L),
                                   "kappa_scaled", xname="tau")
    elif kind == "perturbative":
        tp = np.linspace(0, args.tau_max, args.points)
        curve = theory.TheoryCurve(tp, theory.sff_perturbative(tp, args.Lambda),
                                   "kappa_perturbative", xname="tau_pert")
    elif kind == "thouless":
        g = np.linspace(args.tau_min, args.tau_max, args.points)
        curve = theory.TheoryCurve(g, [theory.thouless_time_lambert(x, args.delta) for x in g],
                                   "thouless_lambert", xname="Gamma")
    else:
        raise ConfigError("kind", f"unknown theory kind {kind!r}")
    text = theory_curves_to_csv([curve])
    if args.out:
        write_atomic(args.out, text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_figure(args):
    table = recipes(args.paper_scale)
    if args.name == "list" or args.name not in table:
        for name, r in table.items():
            print(f"{name:6s} mirrors {r.mirrors:6s} {r.description}")
        return 0 if args.name == "list" else 2
    paths = render(table[args.name], args.out, args.workers, args.realizations,
                   None if args.quiet else _progress)
    for p in paths:
        if str(p).endswith(".svg"):
            print(f"wrote {p}")
    return 0


def cmd_collapse(args):
    ests = [load_estimate(d) for d in args.dirs]
    report = collapse_check(ests, args.tau_min, args.m)
    print(report)
    for p in report.pairs:
        print(f"  pair {p['pair']}: {p['over']}/{p['points']} over, max z = {p['max_z']:.3g}")
    return 0 if report.passed else 1


def cmd_thouless(args):
    est = load_estimate(args.dir)
    try:
        t, tau = extract_thouless(est, args.delta, args.mode, args.run_length, args.alpha, args.t_min)
    except ThoulessNotFound as exc:
        print(f"no Thouless time: {exc} (smallest deviation {exc.min_deviation:.4g})")
        return 1
    out = {"t_Th": t, "tau_Th": tau}
    spec = est.spec
    if spec:
        s = EnsembleSpec.from_dict(spec)
        if s.Gamma > 0 and args.mode == "relative":
            out["tau_Th_lambert"] = theory.thouless_time_lambert(s.Gamma, args.delta)
            out["Gamma"] = s.Gamma
    print(json.dumps(out))
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="rmte_sff", description=__doc__.split("\n")[0])
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="estimate SFF moments of one ensemble")
    r.add_argument("--config", help="JSON EnsembleSpec; flags override its fields")
    for flag, typ in SPEC_FLAGS.items():
        r.add_argument(f"--{flag.replace('_', '-')}", dest=flag, type=typ)
    r.add_argument("--workers", type=int, default=1)
    r.add_argument("--quiet", action="store_true")
    r.set_defaults(func=cmd_run)

    t = sub.add_parser("theory", help="write a theory curve as CSV")
    t.add_argument("--kind", default="extrapolated",
                   choices=["short", "extrapolated", "scaled", "perturbative", "thouless"])
    t.add_argument("--N", type=int, default=24)
    t.add_argument("--L", type=int, default=2)
    t.add_argument("--eps", type=float, default=0.0)
    t.add_argument("--dist", default="uniform", choices=["uniform", "arcsine", "point"])
    t.add_argument("--m", type=int, default=1)
    t.add_argument("--t-max", dest="t_max", type=int)
    t.add_argument("--Gamma", type=float, default=1.0)
    t.add_argument("--Lambda", type=float, default=0.005)
    t.add_argument("--delta", type=float, default=0.005)
    t.add_argument("--tau-min", dest="tau_min", type=float, default=1e-3)
    t.add_argument("--tau-max", dest="tau_max", type=float, default=4.0)
    t.add_argument("--points", type=int, default=400)
    t.add_argument("--out")
    t.set_defaults(func=cmd_theory)

    f = sub.add_parser("figure", help="run a named figure preset ('list' to show all)")
    f.add_argument("name")
    f.add_argument("--out", default="figures")
    f.add_argument("--paper-scale", action="store_true")
    f.add_argument("--realizations", type=int)
    f.add_argument("--workers", type=int, default=1)
    f.add_argument("--quiet", action="store_true")
    f.set_defaults(func=cmd_figure)

    c = sub.add_parser("collapse", help="compare rescaled estimates at equal Gamma")
    c.add_argument("dirs", nargs="+")
    c.add_argument("--tau-min", dest="tau_min", type=float, required=True)
    c.add_argument("--m", type=int, default=1)
    c.set_defaults(func=cmd_collapse)

    h = sub.add_parser("thouless", help="extract the Thouless time of a stored run")
    h.add_argument("dir")
    h.add_argument("--delta", type=float, default=0.005)
    h.add_argument("--mode", choices=["relative", "absolute"], default="relative")
    h.add_argument("--run-length", dest="run_length", type=int, default=5)
    h.add_argument("--alpha", type=float, default=0.05)
    h.add_argument("--t-min", dest="t_min", type=int)
    h.set_defaults(func=cmd_thouless)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 3
    except (RmteError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
