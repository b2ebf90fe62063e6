from __future__ import annotations

import argparse
import sys
from functools import partial
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import pandas as pd
from joblib import Parallel, delayed

from src.config import CONFIG
from src.errors import DivergesError, ExhaustedError, PoleError, QidError, SlowConvergenceError, UsageError
from src.identities import LATTICE_IDENTITIES, catalog, check, derivations, get_identity, lattice_check, shift_params
from src.numerics import format_scalar, parse_scalar
from src.report import Report, SampleRecord
from src.sampler import SampleConfig, sample
from src.series import SeriesSpec, eval_h2, eval_series
from src.utils.io import dump_json, save_json
from src.utils.logging import set_level, setup_logging
from src.utils.metrics import pass_rate


logger = setup_logging(name="cli")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_DIVERGES = 2
EXIT_POLE = 3
EXIT_USAGE = 4

Task = Tuple[Callable[..., SampleRecord], tuple]


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:
        raise UsageError(message)


def _scalar_list(text: str) -> List[complex]:
    if not text.strip():
        return []
    return [parse_scalar(item) for item in text.split(",")]


def _check_sample(name: str, index: int, params: Dict[str, Any], tol: float) -> SampleRecord:
    try:
        return SampleRecord.from_check(index, check(get_identity(name), params, tol))
    except QidError as exc:
        logger.warning("%s sample %d refused: %s", name, index, exc)
        return SampleRecord.from_error(index, params, exc)


def _lattice_sample(name: str, index: int, params: Dict[str, Any], m: int, tol: float) -> SampleRecord:
    try:
        return SampleRecord.from_check(index, lattice_check(get_identity(name), params, m, tol))
    except QidError as exc:
        logger.warning("%s lattice sample %d (m=%d) refused: %s", name, index, m, exc)
        return SampleRecord.from_error(index, params, exc, m=m)


def _run(tasks: Sequence[Task], jobs: int) -> List[SampleRecord]:
    return list(Parallel(n_jobs=jobs)(delayed(fn)(*args) for fn, args in tasks))


def _lattice_point(params: Dict[str, Any], m: int) -> complex:
    return complex(params["q"]) ** (1 + m)


def _shift_admissible(params: Dict[str, Any], m: int) -> bool:
    return get_identity("finite_shift").admissible(shift_params(params, m)).ok


def _sample_config(args: argparse.Namespace) -> SampleConfig:
    try:
        return SampleConfig(
            seed=args.seed,
            count=args.samples,
            real_only=args.real_only,
            q_range=(CONFIG.q_range[0], args.q_max),
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def verify_identity(name: str, args: argparse.Namespace) -> Report:
    identity = get_identity(name)
    report = Report(identity=name, seed=args.seed, tol=args.tol)
    logger.info("Verifying %s on %d samples (seed %d)", name, args.samples, args.seed)
    try:
        draws = sample(identity, _sample_config(args))
    except ExhaustedError as exc:
        logger.error("%s", exc)
        return report
    tasks = [(_check_sample, (name, index, params, args.tol)) for index, params in enumerate(draws)]
    report.samples = _run(tasks, args.jobs)
    return report


def lattice_identity(name: str, args: argparse.Namespace) -> Report:
    identity = get_identity(name)
    report = Report(identity=name, seed=args.seed, tol=args.tol)
    cfg = _sample_config(args)
    tasks: List[Task] = []
    for m in range(1, args.m_max + 1):
        try:
            draws = sample(
                identity,
                cfg,
                overrides={"c": partial(_lattice_point, m=m)},
                accept=partial(_shift_admissible, m=m),
            )
        except ExhaustedError as exc:
            logger.error("m=%d: %s", m, exc)
            return Report(identity=name, seed=args.seed, tol=args.tol)
        for params in draws:
            tasks.append((_lattice_sample, (name, len(tasks), params, m, args.tol)))
    logger.info("Lattice checks for %s: m = 1..%d, %d samples each", name, args.m_max, args.samples)
    report.samples = _run(tasks, args.jobs)
    return report


def _summary_table(reports: Sequence[Report]) -> str:
    rows = []
    for report in reports:
        summary = report.summary()
        rows.append(
            {
                "identity": report.identity,
                "count": summary["count"],
                "passed": summary["passed"],
                "pass_rate": pass_rate(summary),
                "max_rel_err": summary["max_rel_err"],
                "mean_rel_err": summary["mean_rel_err"],
            }
        )
    return pd.DataFrame(rows).to_string(index=False)


def _emit(reports: List[Report], args: argparse.Namespace, as_list: bool) -> int:
    payload: Any = [r.to_dict() for r in reports] if as_list else reports[0].to_dict()
    if args.out is not None:
        save_json(payload, args.out)
        logger.info("Saved report to %s", args.out)
    if args.json:
        sys.stdout.write(dump_json(payload))
    else:
        print(_summary_table(reports))
    failed = [r.identity for r in reports if not r.passed]
    if failed:
        logger.warning("Failed: %s", ", ".join(failed))
        return EXIT_FAILED
    return EXIT_OK


def cmd_list(args: argparse.Namespace) -> int:
    for identity in catalog():
        print(f"{identity.name:<18} {','.join(identity.params):<8} {identity.region:<52} {identity.reference}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    num, den = args.num, args.den
    if args.series == "h2":
        if len(num) != 2 or len(den) != 2:
            raise UsageError("h2 takes exactly two --num and two --den values")
        result = eval_h2(*num, *den)
    else:
        if args.q is None or args.z is None:
            raise UsageError(f"--q and --z are required for {args.series}")
        try:
            if args.series == "phi":
                spec = SeriesSpec.unilateral(num, den, args.q, args.z)
            else:
                if len(num) != len(den):
                    raise UsageError("psi takes as many --num as --den values")
                spec = SeriesSpec.bilateral(num, den, args.q, args.z)
        except QidError:
            raise
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
        result = eval_series(spec)

    if args.json:
        sys.stdout.write(
            dump_json(
                {
                    "series": args.series,
                    "value": format_scalar(result.value),
                    "rel_err_estimate": result.rel_err_estimate,
                    "cancellation_digits": result.cancellation_digits,
                }
            )
        )
    else:
        print(f"value: {format_scalar(result.value)}")
        print(f"rel_err_estimate: {result.rel_err_estimate:.3e}")
        print(f"cancellation_digits: {result.cancellation_digits:.2f}")
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    if args.identity == "all":
        names = [identity.name for identity in catalog()]
    else:
        try:
            names = [get_identity(args.identity).name]
        except KeyError as exc:
            raise UsageError(f"unknown identity {args.identity!r}") from exc
    reports = [verify_identity(name, args) for name in names]
    return _emit(reports, args, as_list=args.identity == "all")


def cmd_lattice(args: argparse.Namespace) -> int:
    if not CONFIG.m_min <= args.m_max <= CONFIG.m_max:
        raise UsageError(f"--m-max must be in [{CONFIG.m_min}, {CONFIG.m_max}], got {args.m_max}")
    return _emit([lattice_identity(args.identity, args)], args, as_list=False)


def cmd_chain(args: argparse.Namespace) -> int:
    known = [identity.name for identity in derivations()]
    if args.name == "all":
        names = known
    elif args.name in known:
        names = [args.name]
    else:
        raise UsageError(f"unknown derivation {args.name!r}; choose from {', '.join(known)}")
    reports = [verify_identity(name, args) for name in names]
    return _emit(reports, args, as_list=args.name == "all")


def _add_batch_flags(parser: argparse.ArgumentParser, samples: int) -> None:
    parser.add_argument("--samples", type=int, default=samples, help="Samples per identity")
    parser.add_argument("--seed", type=int, default=CONFIG.random_seed, help="Sampler seed")
    parser.add_argument("--tol", type=float, default=CONFIG.base_tol, help="Base tolerance")
    parser.add_argument("--real-only", action="store_true", help="Draw real parameters only")
    parser.add_argument("--q-max", type=float, default=CONFIG.q_range[1], help="Upper bound of |q|")
    parser.add_argument("--jobs", type=int, default=1, help="Parallel workers")
    parser.add_argument("--out", type=Path, default=None, help="Write the JSON report here")
    parser.add_argument("--json", action="store_true", help="Print the JSON report to stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qid", description="Evaluate q-series and verify q-series identities")
    parser.add_argument(
        "--log-level",
        default="INFO",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Level for all package loggers",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    list_parser = commands.add_parser("list", help="List catalog identities")
    list_parser.set_defaults(handler=cmd_list)

    eval_parser = commands.add_parser("eval", help="Evaluate one series")
    eval_parser.add_argument("--series", required=True, choices=["phi", "psi", "h2"])
    eval_parser.add_argument("--num", type=_scalar_list, default=[], help="Numerator parameters, comma separated")
    eval_parser.add_argument("--den", type=_scalar_list, default=[], help="Denominator parameters, comma separated")
    eval_parser.add_argument("--q", type=parse_scalar, default=None, help="Base q")
    eval_parser.add_argument("--z", type=parse_scalar, default=None, help="Argument z")
    eval_parser.add_argument("--json", action="store_true", help="Print JSON")
    eval_parser.set_defaults(handler=cmd_eval)

    verify_parser = commands.add_parser("verify", help="Verify identities on sampled parameters")
    verify_parser.add_argument("--identity", required=True, help="Identity name or 'all'")
    _add_batch_flags(verify_parser, CONFIG.sample_count)
    verify_parser.set_defaults(handler=cmd_verify)

    lattice_parser = commands.add_parser("lattice", help="Split-series checks at c = q^(1+m)")
    lattice_parser.add_argument("--identity", required=True, choices=list(LATTICE_IDENTITIES))
    lattice_parser.add_argument("--m-max", type=int, default=5, help="Largest m")
    _add_batch_flags(lattice_parser, 20)
    lattice_parser.set_defaults(handler=cmd_lattice)

    chain_parser = commands.add_parser("chain", help="Verify derivation chains")
    chain_parser.add_argument("--name", required=True, help="Derivation name or 'all'")
    _add_batch_flags(chain_parser, 50)
    chain_parser.set_defaults(handler=cmd_chain)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        set_level(args.log_level)
        if getattr(args, "jobs", 1) < 1:
            raise UsageError("--jobs must be positive")
        return args.handler(args)
    except UsageError as exc:
        logger.error("usage: %s", exc)
        return EXIT_USAGE
    except (DivergesError, SlowConvergenceError) as exc:
        logger.error("%s", exc)
        return EXIT_DIVERGES
    except PoleError as exc:
        logger.error("%s", exc)
        return EXIT_POLE
    except QidError as exc:
        logger.error("%s", exc)
        return EXIT_FAILED


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
