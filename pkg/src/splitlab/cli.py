"""``splitlab`` command line.

Subcommands: ``silver``, ``run``, ``check``, ``certify`` and ``search``.
``splitlab --config FILE`` reads a JSON object whose keys mirror the flags
(``command`` selects the subcommand, dashes become underscores).

Exit codes: 0 success / pass, 1 failed check or certificate, 2 usage error,
3 conjecture violation found.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import certificates as cert
from . import harness
from .algorithms import silver_schedule
from .instances import INSTANCE_IDS, huber_1d
from .operators import Quadratic
from .rates import BOUND_IDS, CONJECTURE_IDS

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_USAGE = 2
EXIT_VIOLATION = 3


def _add_run_options(p):
    p.add_argument("--instance", required=True, choices=INSTANCE_IDS)
    p.add_argument("--param", action="append", default=[], metavar="KEY=VALUE",
                   help="instance parameter, repeatable")
    p.add_argument("--algorithm", choices=harness.ALGORITHM_IDS)
    p.add_argument("--gamma", type=float, default=1.0)
    lam = p.add_mutually_exclusive_group()
    lam.add_argument("--lambda", dest="lam", type=float, default=None)
    lam.add_argument("--lambda-schedule", metavar="silver:K")
    p.add_argument("--iters", type=int, required=True)
    p.add_argument("--w1", metavar="CSVLIST", help="starting point, comma separated")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="splitlab", description=__doc__.splitlines()[0])
    parser.add_argument("--config", metavar="FILE", help="JSON document mirroring the flags")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("silver", help="print the silver stepsize schedule")
    p.add_argument("--k", type=int, required=True)

    p = sub.add_parser("run", help="run a method and write the trace CSV")
    _add_run_options(p)
    p.add_argument("--out", required=True, metavar="FILE")
    p.add_argument("--extras", action="store_true",
                   help="print the observed dist_P(y^N) next to both closed-form candidates")

    p = sub.add_parser("check", help="compare a run with a bound")
    p.add_argument("--bound", required=True, choices=BOUND_IDS)
    _add_run_options(p)
    p.add_argument("--k", type=int, help="silver level for silver-gd / conj-silver-drs")
    p.add_argument("--out", metavar="FILE", help="bound-check CSV")

    p = sub.add_parser("certify", help="numerical certificates of the proof identities")
    p.add_argument("--which", default="all", choices=cert.CERTIFICATE_IDS + ("all",))
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("search", help="random search for conjecture violations")
    p.add_argument("--target", required=True, choices=CONJECTURE_IDS)
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dim", type=int, default=5)
    return parser


def _config_args(parser, path) -> argparse.Namespace:
    """Translate a JSON config into the argv the flags would have produced."""
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        parser.error(f"cannot read config: {exc}")
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        parser.error(f"config line {exc.lineno} column {exc.colno}: {exc.msg}")
    if not isinstance(cfg, dict) or "command" not in cfg:
        parser.error("config must be a JSON object with a 'command' key")
    argv = [str(cfg.pop("command"))]
    for key, value in cfg.items():
        flag = "--" + ("lambda" if key in ("lambda", "lam") else key.replace("_", "-"))
        if key in ("param", "params") and isinstance(value, dict):
            for k, v in value.items():
                argv += ["--param", f"{k}={json.dumps(v) if not isinstance(v, str) else v}"]
        elif isinstance(value, bool):
            if value:
                argv.append(flag)
        elif isinstance(value, list) and key == "w1":
            argv += [flag, ",".join(repr(float(v)) for v in value)]
        elif isinstance(value, list):
            for v in value:
                argv += [flag, str(v)]
        else:
            argv += [flag, str(value)]
    return parser.parse_args(argv)


def _run_config(args) -> dict:
    cfg = {
        "instance": args.instance,
        "params": args.param,
        "algorithm": args.algorithm,
        "gamma": args.gamma,
        "iters": args.iters,
        "w1": args.w1,
    }
    if args.lambda_schedule is not None:
        cfg["lambda_schedule"] = args.lambda_schedule
    elif args.lam is not None:
        cfg["lambda"] = args.lam
    return cfg


def cmd_silver(args) -> int:
    for v in silver_schedule(args.k).values:
        print(f"{v:.17g}")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = _run_config(args)
    cfg["out"] = args.out
    harness.run_experiment(cfg)
    print(f"wrote {args.out}")
    if args.extras:
        if args.instance != "two-subspace":
            print("--extras is only defined for the two-subspace instance", file=sys.stderr)
        else:
            ex = harness.two_subspace_extras(harness.parse_config(cfg)["params"].get("N", 2))
            print(f"dist_P(y^N) observed = {ex['dist_P_yN']!r}")
            print(f"candidate sqrt((N-1)^(N-1)/N^N)   = {ex['candidate_a']!r}")
            print(f"candidate sqrt((N-1)^N/N^(N+1))   = {ex['candidate_b']!r}")
    return EXIT_OK


def cmd_check(args) -> int:
    cfg = _run_config(args)
    cfg["bound"] = args.bound
    cfg["bound_out"] = args.out
    cfg["k"] = args.k
    result = harness.run_experiment(cfg)
    rep = result["report"]
    print(harness.BOUND_HEADER)
    print(rep.csv_row())
    print(rep.summary())
    return EXIT_OK if rep.passed else EXIT_FAIL


def _certificates(which: str, trials: int, seed: int):
    if which in ("thm31", "all"):
        for N in range(2, 11):
            for dim in range(1, 6):
                yield cert.check_thm31_identity(N, dim, trials, seed)
    if which in ("prop44", "all"):
        yield cert.check_prop44_grid(20, trials, seed)
    if which in ("lemma51-base", "all"):
        yield cert.check_lemma51("base_identity", trials=trials, seed=seed)
    if which in ("lemma51-traj", "all"):
        for k in (1, 2, 3, 4):
            for F in (Quadratic([[1.0]]), huber_1d(0.1), huber_1d(1.0 / (2 * 2.414213562373095**k - 1))):
                yield cert.check_lemma51("trajectory", k=k, F=F, x0=[1.0])
    if which in ("interp", "all"):
        for F in (Quadratic([[1.0, 0.0], [0.0, 0.5]]), huber_1d(0.1), huber_1d(1.0)):
            yield cert.check_interpolation(F, trials=trials, seed=seed)


def cmd_certify(args) -> int:
    ok = True
    for rep in _certificates(args.which, args.trials, args.seed):
        print(rep.summary())
        ok &= rep.passed
    return EXIT_OK if ok else EXIT_FAIL


def cmd_search(args) -> int:
    rep = harness.conjecture_search(args.target, args.budget, args.seed, args.dim)
    print(rep.summary())
    if rep.found_violation:
        v = rep.violations[0]
        print(f"reproduce: splitlab search --target {args.target} --budget {args.budget} "
              f"--seed {args.seed} --dim {args.dim}  (cell trial={v['trial']}; "
              f"splitlab.harness.reproduce_trial({args.target!r}, {args.seed}, {v['trial']}, {args.dim}))")
        return EXIT_VIOLATION
    return EXIT_OK


COMMANDS = {"silver": cmd_silver, "run": cmd_run, "check": cmd_check, "certify": cmd_certify,
            "search": cmd_search}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.config:
        args = _config_args(parser, args.config)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except harness.ConfigError as exc:
        print(f"splitlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"splitlab {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
