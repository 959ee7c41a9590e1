"""Command line: ``sbp pack|check|dynamics|enumerate|gen|experiment``.

Exit status: 0 success, 1 domain error (JSON on stderr), 2 usage error,
3 packing is not a (strong) NE, 4 a proven bound was violated.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Any, Sequence

from .costs import CostRule, Pricer, format_costs, format_rule, parse_rule
from .enumeration import enumerate_ne, measure
from .equilibrium import best_response_dynamics, is_nash, is_strong_nash
from .errors import SBPError, TheoremViolation
from .experiment import Suite, parse_checks, run_suite, to_csv
from .instances import (POA_LB, RANDOM, FamilySpec, dump_instance, dump_packing, gen_family,
                        load_instance, load_packing, packing_to_json)
from .model import parse_rational, singletons
from .packers import bfd_pack, ffd_pack, opt_solve

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2
EXIT_NOT_NE = 3
EXIT_VIOLATION = 4

log = logging.getLogger("sbpgame")


def _rule(args: argparse.Namespace) -> CostRule:
    if getattr(args, "lam", None) is not None:
        return CostRule.local(parse_rational(args.lam))
    return parse_rule(args.rule or "local:3/4:triangular")


def _read(path: str) -> str:
    return Path(path).read_text()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj: Any) -> str:
    return json.dumps(obj, separators=(",", ":")) + "\n"


def cmd_pack(args: argparse.Namespace) -> int:
    instance = load_instance(_read(args.instance))
    packer = {"bfd": bfd_pack, "ffd": ffd_pack, "opt": opt_solve}[args.algo]
    result = packer(instance)
    _emit(_json(result.to_json(instance, with_trace=args.trace)), args.out)
    return EXIT_OK


def cmd_check(args: argparse.Namespace) -> int:
    instance = load_instance(_read(args.instance))
    packing = load_packing(_read(args.packing), instance)
    rule = _rule(args)
    out: dict[str, Any] = {"rule": format_rule(rule),
                           "costs": format_costs(Pricer(rule, instance).costs(packing))}
    status = EXIT_OK
    ne = is_nash(rule, instance, packing)
    out["is_ne"] = ne.is_ne
    out["witness"] = ne.witness.to_json() if ne.witness else None
    if args.strong:
        strong = is_strong_nash(rule, instance, packing, max_coalition=args.max_coalition)
        out["is_strong_ne"] = strong.is_ne
        out["coalition_witness"] = strong.witness.to_json() if strong.witness else None
        if not strong:
            status = EXIT_NOT_NE
    if (args.ne or not args.strong) and not ne:
        status = EXIT_NOT_NE
    _emit(_json(out), args.out)
    return status


def cmd_dynamics(args: argparse.Namespace) -> int:
    instance = load_instance(_read(args.instance))
    start = load_packing(_read(args.packing), instance) if args.packing else singletons(instance)
    traj = best_response_dynamics(_rule(args), instance, start, args.max_steps)
    _emit(_json(traj.to_json()), args.out)
    return EXIT_OK


def cmd_enumerate(args: argparse.Namespace) -> int:
    instance = load_instance(_read(args.instance))
    rule = _rule(args)
    report = measure(rule, instance).to_json()
    if args.list_ne:
        report["ne_packings"] = [packing_to_json(p.canonical(instance))["bins"]
                                 for p in enumerate_ne(rule, instance)]
    _emit(_json(report), args.out)
    return EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    if args.family == "poa-lb":
        spec = FamilySpec(POA_LB, k=args.k)
    else:
        spec = FamilySpec(RANDOM, n=args.n, grid=args.grid, seed=args.seed)
    gen = gen_family(spec)
    _emit(dump_instance(gen.instance), args.out)
    if args.ref_packings:
        if gen.ref_ne is None:
            raise SBPError("reference packings exist only for the poa-lb family")
        d = Path(args.ref_packings)
        d.mkdir(parents=True, exist_ok=True)
        (d / "ref_ne.json").write_text(dump_packing(gen.ref_ne, gen.instance))
        (d / "ref_opt.json").write_text(dump_packing(gen.ref_opt, gen.instance))
    if gen.degenerate:
        log.warning("k=1 is degenerate: eps = 1/3 coincides with the regular item size")
    return EXIT_OK


def cmd_experiment(args: argparse.Namespace) -> int:
    rules = [parse_rule(r) for r in args.rule] if args.rule else []
    if args.lam:
        rules += [CostRule.local(parse_rational(x)) for x in args.lam]
    suite = Suite(trials=args.trials, n=args.n, grid=args.grid, seed=args.seed,
                  rules=rules or [parse_rule("local:3/4:triangular")],
                  checks=parse_checks(args.checks), n_min=args.n_min)
    result = run_suite(suite)
    _emit(to_csv(result.records, timing=not args.no_timing), args.out)
    if result.aborted:
        sys.stderr.write(_json({"error": TheoremViolation.kind,
                                "violations": result.violations}))
        return EXIT_VIOLATION
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sbp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def rule_flags(p: argparse.ArgumentParser) -> None:
        g = p.add_mutually_exclusive_group()
        g.add_argument("--rule", help="local:<lambda>[:triangular|quadratic], proportional, "
                                      "egalitarian (default local:3/4:triangular)")
        g.add_argument("--lambda", dest="lam", metavar="P/Q",
                       help="shorthand for --rule local:P/Q:triangular")

    p = sub.add_parser("pack", help="pack an instance with BFD, FFD or the exact solver")
    p.add_argument("--algo", choices=["bfd", "ffd", "opt"], required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("--trace", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_pack)

    p = sub.add_parser("check", help="test a packing for NE / strong NE")
    rule_flags(p)
    p.add_argument("--instance", required=True)
    p.add_argument("--packing", required=True)
    p.add_argument("--ne", action="store_true", help="exit 3 unless the packing is an NE")
    p.add_argument("--strong", action="store_true", help="exit 3 unless it is a strong NE")
    p.add_argument("--max-coalition", type=int)
    p.add_argument("--out")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("dynamics", help="run best-response dynamics")
    rule_flags(p)
    p.add_argument("--instance", required=True)
    p.add_argument("--packing", help="start packing (default: every item alone)")
    p.add_argument("--max-steps", type=int, default=1000)
    p.add_argument("--out")
    p.set_defaults(func=cmd_dynamics)

    p = sub.add_parser("enumerate", help="enumerate all NE of a small instance")
    rule_flags(p)
    p.add_argument("--instance", required=True)
    p.add_argument("--list-ne", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("gen", help="generate an instance")
    p.add_argument("--family", choices=["poa-lb", "random"], required=True)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--grid", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.add_argument("--ref-packings", metavar="DIR")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("experiment", help="run a seeded random suite and write CSV")
    p.add_argument("--rule", action="append")
    p.add_argument("--lambda", dest="lam", action="append", metavar="P/Q")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--n", type=int, default=8, help="maximum item count")
    p.add_argument("--n-min", type=int)
    p.add_argument("--grid", type=int, default=12)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--checks", default="pos,poa_bound",
                   help="comma list of pos, poa_bound, bfd_ne, bfd_strong_ne, bfd_ratio")
    p.add_argument("--no-timing", action="store_true", help="leave wall_time_ms empty")
    p.add_argument("--out")
    p.set_defaults(func=cmd_experiment)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except TheoremViolation as exc:
        sys.stderr.write(_json(exc.to_json()))
        return EXIT_VIOLATION
    except SBPError as exc:
        sys.stderr.write(_json(exc.to_json()))
        return EXIT_DOMAIN
    except OSError as exc:
        sys.stderr.write(_json({"error": "io", "message": str(exc)}))
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
