"""Command-line front end.

Commands: build, distances, hitting, spectral, ld, verify, sweep.  Every run
is deterministic given its flags (seeds included); outputs are written
atomically and rerunning overwrites identically.  Config may also be given
as a JSON file via ``--config``; explicit flags win on conflict.

Exit codes: 0 success, 2 precondition violation, 3 numerical guard,
4 verification failure, 1 anything else.
"""

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import constructions
from .analysis import (
    cutoff_sweep,
    precutoff_ratio,
    run_verification_suite,
    suite_passed,
)
from .chain import distance_curve, default_horizon
from .errors import (
    MixlabError,
    NumericalGuardError,
    PreconditionError,
    VerificationFailure,
)
from .hitting import hitting_pmf
from .large_deviation import empirical_rate, psi
from .serialize import atomic_write_json, atomic_write_text, fmt17
from .spectral import cheeger_bounds, cheeger_exact, eigen_summary

EXAMPLES = ("basic", "aldous", "1", "2", "3", "ratio2", "4", "5")


def _build_example(args):
    """Dispatch --example to the matching builder; returns (chain, graph)."""
    ex, n = args.example, args.n
    if ex == "basic":
        return constructions.basic_segment_chain(n), None
    if ex == "aldous":
        return constructions.aldous_chain(n), None
    if ex == "1":
        return constructions.example1(n), None
    if ex == "2":
        return constructions.example2(n), None
    if ex == "3":
        return constructions.example3(n, args.M), None
    if ex == "ratio2":
        return constructions.ratio_two_variant(n), None
    if ex == "4":
        gc = constructions.example4(n, args.L, seed=args.seed)
        return gc.chain, gc.graph
    if ex == "5":
        gc = constructions.example5(n, args.L, seed=args.seed)
        return gc.chain, gc.graph
    raise PreconditionError("unknown example %r" % ex)


def _chain_edge_list(chain):
    """Conductance edge list pi(u) P(u,v) for a reversible chain (u < v)."""
    P = chain.dense_kernel()
    pi = chain.stationary
    lines = []
    n = chain.n_states
    for u in range(n):
        for v in range(u + 1, n):
            if P[u, v] > 0:
                lines.append("%s %s %s" % (chain.labels[u], chain.labels[v],
                                           fmt17(pi[u] * P[u, v])))
    return "\n".join(lines) + "\n"


def _chain_roles(chain):
    roles = {}
    for name in ("z", "zp", "b", "v"):
        if name in chain.labels:
            roles[name] = name
    return roles


def _out(args, filename):
    os.makedirs(args.out_dir, exist_ok=True)
    return os.path.join(args.out_dir, filename)


def cmd_build(args):
    chain, graph = _build_example(args)
    tag = chain.chain_id
    if graph is not None:
        atomic_write_text(_out(args, tag + ".edges"), graph.to_edge_list_text())
        atomic_write_json(_out(args, tag + ".roles.json"),
                          graph.roles_json_obj())
    else:
        atomic_write_text(_out(args, tag + ".edges"), _chain_edge_list(chain))
        atomic_write_json(_out(args, tag + ".roles.json"), _chain_roles(chain))
    P = chain.kernel
    if chain.sparse:
        row_dev = float(np.abs(np.asarray(P.sum(axis=1)).ravel() - 1.0).max())
    else:
        row_dev = float(np.abs(P.sum(axis=1) - 1.0).max())
    summary = {
        "chain_id": tag,
        "n_states": chain.n_states,
        "row_sum_max_dev": row_dev,
        "is_lazy": bool(chain.is_lazy),
    }
    atomic_write_json(_out(args, tag + ".kernel.json"), summary)
    print("wrote %s artifacts to %s" % (tag, args.out_dir))
    return 0


def cmd_distances(args):
    chain, _ = _build_example(args)
    horizon = args.horizon or default_horizon(chain)
    for metric in args.metric:
        p = None
        name = metric
        if metric.startswith("lp"):
            p = np.inf if metric == "lpinf" else float(metric[2:])
            name = "lp"
        curve = distance_curve(chain, name, horizon, p=p)
        path = _out(args, "%s_%s.csv" % (chain.chain_id, metric))
        atomic_write_text(path, curve.to_csv())
        atomic_write_json(_out(args, "%s_%s.json" % (chain.chain_id, metric)),
                          curve.to_json_obj())
        print("wrote %s" % path)
    return 0


def cmd_hitting(args):
    chain, graph = _build_example(args)
    if graph is not None:
        src = graph.roles["a"]
        Z = graph.roles["Z"]
    else:
        src = chain.index(args.source) if args.source else 0
        Z = [chain.index(args.target or "z")]
    h = hitting_pmf(chain, src, Z, horizon=args.horizon)
    path = _out(args, chain.chain_id + "_hitting.csv")
    atomic_write_text(path, h.to_csv())
    atomic_write_json(_out(args, chain.chain_id + "_hitting.json"),
                      h.to_json_obj())
    print("wrote %s (mean %s, residual %s)"
          % (path, fmt17(h.mean()), fmt17(h.residual)))
    return 0


def cmd_spectral(args):
    chain, _ = _build_example(args)
    summary = eigen_summary(chain)
    if chain.n_states <= 20 and args.exact:
        est = cheeger_exact(chain)
    else:
        est = cheeger_bounds(chain)
    obj = {
        "chain_id": chain.chain_id,
        "lambda2": summary.lambda2,
        "lambda_min": summary.lambda_min,
        "t_rel": summary.t_rel,
        "cheeger_lower": est.lower,
        "cheeger_upper": est.upper,
        "cheeger_exact": est.exact,
        "witness_set": ([chain.labels[i] for i in est.witness_set]
                        if est.witness_set is not None else None),
    }
    atomic_write_json(_out(args, chain.chain_id + "_spectral.json"), obj)
    print("conductance in [%s, %s]" % (fmt17(est.lower), fmt17(est.upper)))
    return 0


def cmd_ld(args):
    if args.ld_command == "psi":
        lines = ["s,psi"]
        for s in args.s:
            lines.append("%s,%s" % (fmt17(s), fmt17(psi(s))))
        text = "\n".join(lines) + "\n"
        if args.out_dir:
            path = _out(args, "psi.csv")
            atomic_write_text(path, text)
            print("wrote %s" % path)
        else:
            sys.stdout.write(text)
        return 0
    if args.ld_command == "check":
        rows = []
        for s in args.s:
            analytic = psi(s)
            emp = empirical_rate(args.N, s)
            rows.append({"s": s, "psi": analytic, "empirical": emp,
                         "gap": emp - analytic})
            print("s=%g  psi=%s  empirical(N=%d)=%s"
                  % (s, fmt17(analytic), args.N, fmt17(emp)))
        if args.out_dir:
            atomic_write_json(_out(args, "ld_check.json"), rows)
        return 0
    raise PreconditionError("ld needs a subcommand: psi or check")


def cmd_verify(args):
    rows = run_verification_suite(seed=args.seed, n_chains=args.chains,
                                  only=args.only)
    report_path = args.out or _out(args, "report.json")
    atomic_write_json(report_path, rows)
    ok = suite_passed(rows)
    failed = [r for r in rows if not r["pass"]]
    print("%d checks, %d failed -> %s" % (len(rows), len(failed), report_path))
    for r in failed[:10]:
        print("  FAIL %s slack=%s %s"
              % (r["check_id"], fmt17(r["slack"]), r["params"]))
    if not ok:
        raise VerificationFailure("%d suite checks failed" % len(failed))
    return 0


_SWEEP_BUILDERS = {
    "basic": constructions.basic_segment_chain,
    "aldous": constructions.aldous_chain,
    "1": constructions.example1,
    "2": constructions.example2,
    "ratio2": constructions.ratio_two_variant,
}


def cmd_sweep(args):
    if args.example == "3":
        def builder(n):
            return constructions.example3(n, args.M)
    elif args.example in _SWEEP_BUILDERS:
        base = _SWEEP_BUILDERS[args.example]

        def builder(n):
            return base(n)
    else:
        raise PreconditionError("sweep supports examples %s and 3"
                                % ", ".join(sorted(_SWEEP_BUILDERS)))
    horizon_fn = (lambda n: args.horizon) if args.horizon else None
    # chains at different sizes are independent; build/curve them in parallel
    if args.threads > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            list(pool.map(builder, args.n_grid))  # warm any caches; cheap
    report = cutoff_sweep(builder, args.n_grid, metric=args.metric,
                          horizon_fn=horizon_fn)
    atomic_write_json(_out(args, "sweep_%s_%s.json"
                           % (args.example, args.metric)),
                      report.to_json_obj())
    lines = ["n,eps,ratio,window"]
    for n in report.n_grid:
        for eps in report.eps_grid:
            lines.append("%d,%s,%s,%d" % (n, fmt17(eps),
                                          fmt17(report.ratios[n][eps]),
                                          report.windows[n][eps]))
    atomic_write_text(_out(args, "sweep_%s_%s.csv"
                           % (args.example, args.metric)),
                      "\n".join(lines) + "\n")
    print("verdict: %s (pre-cutoff ratio %s)"
          % (report.verdict, fmt17(precutoff_ratio(report))))
    return 0


def _add_builder_flags(p):
    p.add_argument("--example", required=True, choices=EXAMPLES)
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--M", type=int, default=2)
    p.add_argument("--L", type=int, default=2)


def make_parser():
    parser = argparse.ArgumentParser(prog="mixlab")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out-dir", default="out")
    parser.add_argument("--threads", type=int, default=1)
    parser.add_argument("--config", default=None,
                        help="JSON file of defaults; explicit flags win")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build")
    _add_builder_flags(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("distances")
    _add_builder_flags(p)
    p.add_argument("--metric", nargs="*", default=["tv"],
                   help="any of tv separation dbar lp<p> lpinf")
    p.add_argument("--horizon", type=int, default=None)
    p.set_defaults(func=cmd_distances)

    p = sub.add_parser("hitting")
    _add_builder_flags(p)
    p.add_argument("--source", default=None)
    p.add_argument("--target", default=None)
    p.add_argument("--horizon", type=int, default=None)
    p.set_defaults(func=cmd_hitting)

    p = sub.add_parser("spectral")
    _add_builder_flags(p)
    p.add_argument("--exact", action="store_true",
                   help="exhaustive conductance (small chains only)")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("ld")
    ldsub = p.add_subparsers(dest="ld_command", required=True)
    q = ldsub.add_parser("psi")
    q.add_argument("--s", type=float, nargs="+", required=True)
    q.set_defaults(func=cmd_ld)
    q = ldsub.add_parser("check")
    q.add_argument("--N", type=int, default=200)
    q.add_argument("--s", type=float, nargs="+", required=True)
    q.set_defaults(func=cmd_ld)

    p = sub.add_parser("verify")
    p.add_argument("what", nargs="?", default="all")
    p.add_argument("--chains", type=int, default=25)
    p.add_argument("--only", default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("sweep")
    p.add_argument("--example", required=True)
    p.add_argument("--M", type=int, default=2)
    p.add_argument("--n-grid", type=int, nargs="+", required=True)
    p.add_argument("--metric", default="tv",
                   choices=["tv", "separation", "dbar"])
    p.add_argument("--horizon", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    return parser


def _apply_config(parser, argv):
    ns, _ = parser.parse_known_args(argv)
    if ns.config:
        with open(ns.config) as fh:
            cfg = json.load(fh)
        parser.set_defaults(**cfg)
        for sp_action in parser._subparsers._group_actions:
            for sp in sp_action.choices.values():
                sp.set_defaults(**{k: v for k, v in cfg.items()
                                   if k != "command"})
    return parser.parse_args(argv)


def main(argv=None):
    parser = make_parser()
    try:
        args = _apply_config(parser, sys.argv[1:] if argv is None else argv)
        return args.func(args)
    except (PreconditionError, ValueError) as exc:
        print("precondition: %s" % exc, file=sys.stderr)
        return 2
    except NumericalGuardError as exc:
        print("numerical guard: %s" % exc, file=sys.stderr)
        return 3
    except VerificationFailure as exc:
        print("verification failure: %s" % exc, file=sys.stderr)
        return 4
    except MixlabError as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
