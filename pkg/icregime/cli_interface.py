import argparse
import logging
import sys
import traceback
from typing import Any, Callable, Dict, List, Optional, Tuple

from dotenv import load_dotenv

from . import regimes, regions, verifier
from .config import OUTPUT, SAMPLING, log_level, resolve_tolerances
from .errors import (ArgumentError, ConvergenceError, GridOverflowError, ICRegimeError, ModelValidationError,
                     NumericError, RegimeError, SchemaError, SizeCapError)
from .icregime_types import GridSpec, RunConfig, SampleSpec
from .model import DiscreteBroadcastChannel, DiscreteTwoOutputChannel, GaussianIC, TwoOutputSystem, load_channel_spec
from .plotting import gnuplot_script, polygon_csv
from .report_logger import ReportLogger, channel_digest

load_dotenv()

logger = logging.getLogger("icregime.cli")

EXIT_OK, EXIT_FAILED, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
CSV_VERBS = ("region", "vertices", "slice", "regime-list")


class UsageError(ICRegimeError):
    pass


# ---------------- Argument parsing ----------------

def _floats(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _ints(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _assignments(text: str) -> Dict[int, float]:
    fixed = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep:
            raise argparse.ArgumentTypeError(f"expected i=v pairs, got {part!r}")
        try:
            fixed[int(key)] = float(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected i=v pairs, got {part!r}")
    return fixed


def _tolerance(text: str) -> Tuple[str, float]:
    name, sep, value = text.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected name=value, got {text!r}")
    try:
        return name.strip(), float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"tolerance {name!r} needs a number, got {value!r}")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("input", nargs="?", help="channel-spec JSON file")
    common.add_argument("--output", help="write the report here instead of standard output")
    common.add_argument("--format", choices=("json", "csv"), default="json")
    common.add_argument("--precision", type=int, default=OUTPUT["precision"])
    common.add_argument("--no-timestamp", action="store_true", help="omit timings so reports are byte-stable")
    common.add_argument("--seed", type=int, default=SAMPLING["seed"])
    common.add_argument("--tol", type=_tolerance, action="append", default=[], metavar="NAME=VALUE")
    common.add_argument("--progress", action="store_true")
    common.add_argument("--log-level", default=None)
    common.add_argument("--workers", type=int, default=None)

    parser = argparse.ArgumentParser(prog="icregime",
                                     description="Strong-interference regimes of K-user interference channels")
    verbs = parser.add_subparsers(dest="command", metavar="VERB")
    verbs.required = True

    def verb(name: str, help_text: str) -> argparse.ArgumentParser:
        return verbs.add_parser(name, parents=[common], help=help_text)

    verb("check-gaussian", "closed-form K-user regime check").add_argument("--shift", type=int, default=0)
    verb("check-3user", "3-user regime check with free-parameter witness")
    verb("check-variant46", "3-user fully-product variant check")
    p = verb("regime-list", "list condition sets")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--variant", choices=("41", "46"))
    p.add_argument("--orders", action="store_true", help="every cyclic order instead of the K rotations")
    verb("region", "subset bounds of the joint-decoding region").add_argument("--simplified", action="store_true")
    p = verb("membership", "test a rate vector")
    p.add_argument("--rates", type=_floats, required=True)
    p.add_argument("--simplified", action="store_true")
    verb("sum-capacity", "sum capacity in the strong-interference regime")
    verb("vertices", "vertices of the region (K <= 3)").add_argument("--simplified", action="store_true")
    p = verb("slice", "2-D cross-section polygon")
    p.add_argument("--fix", type=_assignments, default={})
    p.add_argument("--simplified", action="store_true")
    p.add_argument("--script", help="also write a gnuplot script drawing the CSV")
    p = verb("support", "support function in a direction")
    p.add_argument("--direction", type=_floats, required=True)
    p.add_argument("--simplified", action="store_true")
    verb("redundancy", "compare the full and simplified regions").add_argument("--shift", type=int, default=0)
    verb("grid-gap", "grid minimum of the degradedness gap").add_argument("--resolution", type=int, default=8)
    for name in ("lemma1", "lemma3", "lemma4", "corollary1"):
        p = verb(name, f"sampled {name} gap")
        p.add_argument("--d-size", type=int, default=1)
        p.add_argument("--samples", type=int, default=200)
        p.add_argument("--concentration", type=float, default=SAMPLING["dirichlet_concentration"])
        if name == "lemma4":
            p.add_argument("--u-size", type=int, default=2)
        if name == "corollary1":
            p.add_argument("--lhs-fixed", type=_ints, default=[])
    verb("degrade-test", "is the second channel a garbling of the first").add_argument("--second")
    verb("bc-order", "more-capable order of a broadcast channel").add_argument("--resolution", type=int, default=64)
    verb("bc-sumcap", "broadcast sum capacity").add_argument("--strongest", type=int, default=1)
    verb("degraded-equivalent", "degraded construction of a ratio-degraded system")
    return parser


def config_from_args(args: argparse.Namespace) -> RunConfig:
    shared = {"command", "input", "output", "format", "precision", "no_timestamp", "seed", "tol",
              "progress", "log_level", "workers"}
    options = {k: v for k, v in vars(args).items() if k not in shared}
    options["progress"] = args.progress
    options["workers"] = args.workers
    return RunConfig(command=args.command, input_path=args.input, output_path=args.output, seed=args.seed,
                     format=args.format, precision=args.precision, tolerance_overrides=dict(args.tol),
                     timestamp=not args.no_timestamp, options=options)


# ---------------- Verb handlers ----------------

Outcome = Tuple[int, Dict[str, Any], Optional[str]]


def _load(config: RunConfig, kind):
    if not config.input_path:
        raise UsageError(f"{config.command} needs a channel-spec file")
    model = load_channel_spec(config.input_path)
    if not isinstance(model, kind):
        names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise SchemaError("type", f"{config.command} expects a {names} spec, got {type(model).__name__}")
    return model


def _header(config: RunConfig, model=None) -> Dict[str, Any]:
    header = {"operation": config.command}
    if model is not None:
        header["channel_digest"] = channel_digest(model)
    return header


def _passed(ok: bool) -> int:
    return EXIT_OK if ok else EXIT_FAILED


def _check_gaussian(config, tol) -> Outcome:
    ic = _load(config, GaussianIC)
    shift = config.options["shift"]
    result = regimes.gaussian_kuser_check(ic, shift, tol["ratio_relative"], tol["alpha_slack"])
    return _passed(result.passed), {**_header(config, ic), "shift": shift, **result.to_json()}, None


def _check_3user(config, tol) -> Outcome:
    ic = _load(config, GaussianIC)
    result = regimes.gaussian_3user_check(ic, tol["ratio_relative"], tol["alpha_slack"])
    return _passed(result.passed), {**_header(config, ic), **result.to_json()}, None


def _check_variant46(config, tol) -> Outcome:
    ic = _load(config, GaussianIC)
    result = regimes.gaussian_variant46_check(ic, tol["ratio_relative"], tol["alpha_slack"])
    return _passed(result.passed), {**_header(config, ic), **result.to_json()}, None


def _regime_list(config, tol) -> Outcome:
    K, variant = config.options["k"], config.options["variant"]
    if variant:
        if K != 3:
            raise UsageError("--variant applies to K=3 only")
        sets = [regimes.generate_3user_variant(variant)]
    elif config.options["orders"]:
        sets = regimes.enumerate_cyclic_regimes(K)
    else:
        sets = [regimes.generate_kuser_regime(K, s) for s in range(K)]
    csv = None
    if config.format == "csv":
        rows = ["label,index,lhs,cond,smaller_receiver,larger_receiver,factorization"]
        for cs in sets:
            for i, q in enumerate(cs.inequalities, start=1):
                fact = "|".join(" ".join(map(str, b)) for b in q.factorization)
                rows.append(f"{cs.label},{i},{' '.join(map(str, q.lhs))},{' '.join(map(str, q.cond))},"
                            f"{q.smaller_receiver},{q.larger_receiver},{fact}")
        csv = "\n".join(rows) + "\n"
    report = {**_header(config), "K": K, "regimes": [cs.to_json() for cs in sets]}
    return EXIT_OK, report, csv


def _region_of(config) -> Tuple[GaussianIC, regions.RegionSpec]:
    ic = _load(config, GaussianIC)
    build = regions.region_simplified if config.options.get("simplified") else regions.region_full
    return ic, build(ic)


def _region(config, tol) -> Outcome:
    ic, region = _region_of(config)
    csv = None
    if config.format == "csv":
        rows = ["subset,bound,argmin_receivers"]
        for s in region.subsets():
            rows.append(f"{' '.join(map(str, sorted(s)))},{region.constraints[s]:.{config.precision}f},"
                        f"{' '.join(map(str, region.provenance[s]))}")
        csv = "\n".join(rows) + "\n"
    return EXIT_OK, {**_header(config, ic), **regions.region_to_json(region)}, csv


def _membership(config, tol) -> Outcome:
    ic, region = _region_of(config)
    result = regions.membership(region, config.options["rates"], tol["membership"])
    report = {**_header(config, ic), "rates": config.options["rates"], **result.to_json()}
    return _passed(result.inside), report, None


def _sum_capacity(config, tol) -> Outcome:
    ic = _load(config, GaussianIC)
    bound, attained = regions.sum_capacity(ic), regions.max_sum_rate(ic)
    report = {**_header(config, ic), "sum_capacity": bound, "max_sum_rate": attained,
              "full_set_binds": attained >= bound - tol["bound_equality"]}
    return EXIT_OK, report, None


def _vertices(config, tol) -> Outcome:
    ic, region = _region_of(config)
    points = [v.rates.tolist() for v in regions.vertices(region, tol["vertex_dedup"])]
    csv = None
    if config.format == "csv":
        rows = [",".join(f"r{i}" for i in range(1, region.K + 1))]
        rows += [",".join(f"{x:.{config.precision}f}" for x in p) for p in points]
        csv = "\n".join(rows) + "\n"
    return EXIT_OK, {**_header(config, ic), "K": region.K, "vertices": points}, csv


def _slice(config, tol) -> Outcome:
    ic, region = _region_of(config)
    fixed = config.options["fix"]
    points = regions.slice_polygon(region, fixed)
    free = [i for i in range(1, region.K + 1) if i not in fixed]
    report = {**_header(config, ic), "fixed": {str(k): v for k, v in sorted(fixed.items())},
              "free": free, "polygon": [list(p) for p in points]}
    csv = polygon_csv(points, free, fixed, config.precision) if config.format == "csv" else None
    script = config.options.get("script")
    if script:
        if not config.output_path or config.format != "csv":
            raise UsageError("--script needs --format csv and --output for the polygon data")
        with open(script, "w", encoding="utf-8") as f:
            f.write(gnuplot_script(config.output_path, free, fixed, config.precision))
    return EXIT_OK, report, csv


def _support(config, tol) -> Outcome:
    ic, region = _region_of(config)
    direction = config.options["direction"]
    return EXIT_OK, {**_header(config, ic), "direction": direction,
                     "support": regions.support(region, direction)}, None


def _redundancy(config, tol) -> Outcome:
    ic = _load(config, GaussianIC)
    result = regions.redundancy_check(ic, config.options["shift"])
    return _passed(result.equivalent), {**_header(config, ic), "shift": config.options["shift"],
                                        **result.to_json()}, None


def _gap_outcome(config, tol, report) -> Outcome:
    body = {**report.to_json(), "operation": config.command}
    return _passed(not report.violated(tol["gap"])), body, None


def _grid_gap(config, tol) -> Outcome:
    ch = _load(config, DiscreteTwoOutputChannel)
    report = verifier.grid_min_gap(ch, GridSpec(config.options["resolution"]), config.options["workers"],
                                   config.options["progress"], config.seed)
    return _gap_outcome(config, tol, report)


def _sample_spec(config) -> SampleSpec:
    return SampleSpec(config.options["samples"], config.seed, config.options["concentration"])


def _lemma(config, tol) -> Outcome:
    ch = _load(config, DiscreteTwoOutputChannel)
    opts, spec = config.options, _sample_spec(config)
    workers, progress = opts["workers"], opts["progress"]
    if config.command == "lemma1":
        report = verifier.sample_lemma1_gap(ch, opts["d_size"], spec, workers, progress)
    elif config.command == "lemma3":
        report = verifier.sample_lemma3_gap_n2(ch, opts["d_size"], spec, workers, progress)
    elif config.command == "lemma4":
        report = verifier.sample_lemma4_gap(ch, opts["u_size"], opts["d_size"], spec, workers, progress)
    else:
        report = verifier.corollary1_gap(ch, opts["lhs_fixed"], opts["d_size"], spec, workers, progress)
    return _gap_outcome(config, tol, report)


def _degrade_test(config, tol) -> Outcome:
    first = _load(config, DiscreteBroadcastChannel)
    if config.options["second"]:
        other = load_channel_spec(config.options["second"])
        if not isinstance(other, DiscreteBroadcastChannel):
            raise SchemaError("type", "--second expects a broadcast spec")
        p1, p2 = first.marginals[0], other.marginals[0]
    elif first.K >= 2:
        p1, p2 = first.marginals[0], first.marginals[1]
    else:
        raise UsageError("degrade-test needs two channels: a 2-receiver spec or --second")
    forward = verifier.degradation_feasibility(p1, p2, tol["lp_feasibility"])
    backward = verifier.degradation_feasibility(p2, p1, tol["lp_feasibility"])
    report = {**_header(config, first), "second_degraded_from_first": forward.to_json(),
              "first_degraded_from_second": backward.to_json()}
    return _passed(forward.degraded), report, None


def _bc_order(config, tol) -> Outcome:
    bc = _load(config, DiscreteBroadcastChannel)
    result = verifier.bc_more_capable_order(bc, GridSpec(config.options["resolution"]), config.seed)
    return _passed(result.order is not None), {**_header(config, bc), **result.to_json()}, None


def _bc_sumcap(config, tol) -> Outcome:
    bc = _load(config, DiscreteBroadcastChannel)
    result = verifier.bc_sum_capacity(bc, config.options["strongest"])
    return EXIT_OK, {**_header(config, bc), "strongest": config.options["strongest"], **result.to_json()}, None


def _degraded_equivalent(config, tol) -> Outcome:
    system = _load(config, TwoOutputSystem)
    construction = regimes.degraded_equivalent(system)
    mean, variance = construction.conditional_law(system)
    report = {**_header(config, system), **construction.to_json(),
              "conditional_mean": mean.tolist(), "conditional_variance": variance}
    return EXIT_OK, report, None


HANDLERS: Dict[str, Callable[[RunConfig, Dict[str, float]], Outcome]] = {
    "check-gaussian": _check_gaussian,
    "check-3user": _check_3user,
    "check-variant46": _check_variant46,
    "regime-list": _regime_list,
    "region": _region,
    "membership": _membership,
    "sum-capacity": _sum_capacity,
    "vertices": _vertices,
    "slice": _slice,
    "support": _support,
    "redundancy": _redundancy,
    "grid-gap": _grid_gap,
    "lemma1": _lemma,
    "lemma3": _lemma,
    "lemma4": _lemma,
    "corollary1": _lemma,
    "degrade-test": _degrade_test,
    "bc-order": _bc_order,
    "bc-sumcap": _bc_sumcap,
    "degraded-equivalent": _degraded_equivalent,
}


# ---------------- Run ----------------

def _emit(config: RunConfig, text: str) -> None:
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)


def run(config: RunConfig) -> int:
    """Dispatch one verb; library errors become exit codes and an {"error": ...} report."""
    report_logger = ReportLogger(timestamp=config.timestamp, precision=config.precision)
    try:
        if config.format == "csv" and config.command not in CSV_VERBS:
            raise UsageError(f"--format csv is not available for {config.command}")
        if not 0 <= config.precision <= OUTPUT["max_precision"]:
            raise UsageError(f"--precision must lie in [0, {OUTPUT['max_precision']}]")
        try:
            tol = resolve_tolerances(config.tolerance_overrides)
        except KeyError as e:
            raise UsageError(str(e.args[0]))
        code, report, csv = HANDLERS[config.command](config, tol)
    except RegimeError as e:
        code, report, csv = EXIT_FAILED, {"operation": config.command, "error": str(e)}, None
    except (UsageError, ArgumentError, SchemaError, ModelValidationError, SizeCapError, GridOverflowError,
            OSError) as e:
        code, report, csv = EXIT_USAGE, {"operation": config.command, "error": str(e)}, None
        if isinstance(e, SchemaError):
            report["field"] = e.field
    except (NumericError, ConvergenceError) as e:
        code, report, csv = EXIT_NUMERIC, {"operation": config.command, "error": str(e)}, None
    except Exception as e:
        logger.error(traceback.format_exc())
        code, report, csv = EXIT_NUMERIC, {"operation": config.command, "error": str(e)}, None
    report["exit_code"] = code
    report_logger.log_report(report)
    _emit(config, csv if csv is not None else report_logger.render(report))
    return code


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=(args.log_level or log_level()).upper(),
                        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    return run(config_from_args(args))


if __name__ == "__main__":
    sys.exit(main())
