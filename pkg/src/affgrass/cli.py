"""Command-line entry point: ``affgrass <verb> --scenario FILE --out DIR``."""

import argparse
import os
import sys

from .exceptions import ParseError, ValidationError
from .fixtures import get_fixture
from .scenario import (
    EXPERIMENTS,
    ScenarioConfig,
    load_scenario,
    run_experiment,
    with_overrides,
    write_bundle,
    write_scenario,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INVALID = 2
EXIT_RECIPE = 3

# name -> (fixture, k, experiment, extra fields)
FIXTURE_SCENARIOS = {
    "saff2_lines_full": ("saff2", 1, "full", {}),
    "saff2_points_classify": ("saff2", 0, "classify", {}),
    "saff2_points_cesaro": ("saff2", 0, "cesaro", {}),
    "symmetric_aff3_k0": ("symmetric_aff3", 0, "classify", {}),
    "symmetric_aff3_k1": ("symmetric_aff3", 1, "classify", {}),
    "symmetric_aff3_k2": ("symmetric_aff3", 2, "classify", {}),
    "scalar_two_atom_lil": ("scalar_two_atom", 0, "lil", {"N": 100_000}),
    "scalar_contracting_cesaro": ("scalar_contracting", 0, "cesaro", {}),
    "scalar_expanding_cesaro": ("scalar_expanding", 0, "cesaro", {}),
    "diagonal3_spectrum": ("diagonal3", 0, "spectrum", {}),
    "symmetric_sl2_ratio": ("symmetric_sl2", 0, "ratio", {"N": 100_000}),
}


def fixture_scenario(name):
    fixture, k, experiment, extra = FIXTURE_SCENARIOS[name]
    mu = get_fixture(fixture)
    return ScenarioConfig(mu.group_kind, mu.d, k, mu, experiment, **extra)


def build_parser():
    parser = argparse.ArgumentParser(prog="affgrass", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)
    for verb in EXPERIMENTS:
        p = sub.add_parser(verb, help=f"run the {verb} experiment")
        p.add_argument("--scenario", required=True, help="scenario JSON file")
        p.add_argument("--out", required=True, help="output directory")
        p.add_argument("--workers", type=int, default=None,
                       help="worker threads (default: machine parallelism)")
        p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
        p.add_argument("--no-plots", action="store_true", help="skip SVG output")
    p = sub.add_parser("fixtures", help="write the built-in scenario files")
    p.add_argument("--out", required=True, help="output directory")
    return parser


def _fail(msg, code):
    print(f"affgrass: {msg}", file=sys.stderr)
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.verb == "fixtures":
        os.makedirs(args.out, exist_ok=True)
        for name in FIXTURE_SCENARIOS:
            path = os.path.join(args.out, f"{name}.json")
            write_scenario(fixture_scenario(name), path)
            print(path)
        return EXIT_OK
    try:
        cfg = load_scenario(args.scenario)
        cfg = with_overrides(cfg, experiment=args.verb, seed=args.seed, out=args.out)
    except (ParseError, ValidationError) as exc:
        return _fail(f"invalid scenario: {exc}", EXIT_INVALID)
    except OSError as exc:
        return _fail(f"cannot read scenario: {exc}", EXIT_INVALID)
    n_jobs = args.workers if args.workers is not None else (os.cpu_count() or 1)
    if n_jobs < 1:
        return _fail("--workers must be >= 1", EXIT_INVALID)
    bundle = run_experiment(cfg, n_jobs=n_jobs)
    write_bundle(bundle, args.out, plots=not args.no_plots)
    if bundle.failed_stage is not None:
        code = {"RecipeFailure": EXIT_RECIPE, "ValidationError": EXIT_INVALID}.get(
            bundle.error_kind, EXIT_ERROR)
        return _fail(f"stage {bundle.failed_stage} failed: {bundle.error}", code)
    verdict = bundle.reports.get("classify", {}).get("verdict")
    if verdict == "inconclusive":
        print("classifier verdict inconclusive", file=sys.stderr)
        return EXIT_RECIPE
    print(f"wrote {args.out}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
