"""
Q2 MPC toolkit - command line front end
check | run | gen-msp | gen-structure
"""
import argparse
import logging
import sys
from typing import List, Optional

from pydantic import ValidationError

from config.run_config import AdversarySpec, RunConfig
from src.commands import (
    EXIT_PARSE,
    cmd_check,
    cmd_gen_msp,
    cmd_gen_structure,
    cmd_run,
    exit_code_for,
)
from src.errors import ConfigError, Q2MpcError

logger = logging.getLogger(__name__)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="q2mpc",
        description="Multiparty computation secure against Q2 adversary structures (simulated)",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="check the premises of an MSP and adversary structure")
    check.add_argument("--msp", required=True, help="MSP file or threshold:n,t,q")
    check.add_argument("--structure", help="structure file (default: induced by the MSP)")
    check.add_argument("--verbose", action="store_true", help="list maximal sets and settings")

    run = sub.add_parser("run", help="evaluate a circuit with the MPC protocol")
    run.add_argument("--circuit", required=True, help="circuit file")
    run.add_argument("--msp", required=True, help="MSP file or threshold:n,t,q")
    run.add_argument("--structure", help="structure file (default: induced by the MSP)")
    run.add_argument("--inputs", default="", help="wire=value or P<i>=value pairs, comma separated")
    run.add_argument("--adversary", default="honest", help="strategy name[:key=value,...]")
    run.add_argument("--corrupt", default="", help="corrupt players, comma separated")
    run.add_argument("--no-rushing", action="store_true", help="corrupt players do not see honest messages first")
    run.add_argument("--overpowered", action="store_true", help="allow a corrupt set outside the structure")
    run.add_argument("--k", type=int, help="security parameter (error <= 2^-k)")
    run.add_argument("--seed", type=int, default=0, help="master seed")
    run.add_argument("--trials", type=int, default=1, help="number of independent runs")
    run.add_argument("--workers", type=int, help="worker processes for the trials")
    run.add_argument("--report", help="also write the report to this file")

    gen_msp = sub.add_parser("gen-msp", help="write a threshold MSP")
    gen_msp.add_argument("kind", choices=["threshold"])
    gen_msp.add_argument("--n", type=int, required=True)
    gen_msp.add_argument("--t", type=int, required=True)
    gen_msp.add_argument("--q", type=int, required=True)
    gen_msp.add_argument("--output")

    gen_structure = sub.add_parser("gen-structure", help="write a threshold adversary structure")
    gen_structure.add_argument("kind", choices=["threshold"])
    gen_structure.add_argument("--n", type=int, required=True)
    gen_structure.add_argument("--t", type=int, required=True)
    gen_structure.add_argument("--output")

    return parser


def _run_config(args, settings) -> RunConfig:
    return RunConfig(
        circuit=args.circuit,
        msp=args.msp,
        structure=args.structure,
        inputs=args.inputs,
        adversary=AdversarySpec(strategy=args.adversary, corrupt=args.corrupt, rushing=not args.no_rushing),
        overpowered=args.overpowered,
        k=args.k if args.k is not None else settings.default_k,
        seed=args.seed,
        trials=args.trials,
        workers=args.workers if args.workers is not None else settings.trial_workers,
        report=args.report,
    )


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        from config.protocol_config import load_protocol_config
        settings = load_protocol_config()
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_PARSE
    settings.setup_logging()

    try:
        if args.command == "check":
            report, code = cmd_check(args.msp, args.structure, args.verbose, settings.describe())
        elif args.command == "run":
            report, code = cmd_run(_run_config(args, settings))
        elif args.command == "gen-msp":
            report, code = cmd_gen_msp(args.n, args.t, args.q, args.output)
        else:
            report, code = cmd_gen_structure(args.n, args.t, args.output)
    except ValidationError as e:
        print(f"invalid options: {e}", file=sys.stderr)
        return EXIT_PARSE
    except (Q2MpcError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return exit_code_for(e) if isinstance(e, Q2MpcError) else EXIT_PARSE
    sys.stdout.write(report)
    return code


if __name__ == "__main__":
    sys.exit(main())
