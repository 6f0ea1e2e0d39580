"""Command-line harness for the approximation experiments.

Examples:
    python harness.py lebesgue --out lebesgue.csv
    python harness.py divergence --grid 8192
    python harness.py walsh-converge --config runs/walsh.json --inclusive-limit
    PWAPPROX_THREADS=4 python harness.py reconstruct --seed 11

Config precedence, lowest first: experiment bank defaults, ``--config``
file (local path or gs:// URL), then the flags below. Reports go to
``--out`` or stdout; notices go to stderr.
"""

import argparse
import sys
import time
from typing import Any, Dict, List, Optional

from pydantic import ValidationError

from SignalModel.errors import ApproxInputError, GramDiagnosticError, SequenceRangeError, TruncationConfigError
from experiments import EXPERIMENTS, load_json_source, resolve_config, run_experiment

EXIT_CONFIG_ERROR = 2

HELP = {
    "reconstruct": "Sup-error sweep of one approximation engine",
    "walsh-converge": "Dyadic Walsh sweep of engines A and B",
    "divergence": "Kernel norms and worst-case values for an adversarial system",
    "lebesgue": "Dirichlet Lebesgue constants and log-growth ratios",
    "riesz": "Gram eigenvalues and Riesz bound estimates",
    "export-kernel": "Kernel, adversarial transfer, signal or system on the grid",
    "functional-converge": "Measurement-functional process sup error",
}


def _print_error(key: str, msg: str) -> None:
    print(f"[Config Error] {key}: {msg}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="JSON config file (local path or gs://bucket/object)")
    common.add_argument("--grid", type=int, default=None, help="Spectral grid size M (power of two)")
    common.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    common.add_argument("--inclusive-limit", action="store_true", help="Dyadic limit U = 2^N instead of 2^N - 1")
    common.add_argument("--seed", type=int, default=None, help="Seed for the sequence perturbations and random signals")

    parser = argparse.ArgumentParser(description="Paley-Wiener system approximation experiments")
    sub = parser.add_subparsers(dest="experiment", required=True, metavar="experiment")
    for name in EXPERIMENTS:
        sub.add_parser(name, parents=[common], help=HELP[name], description=HELP[name])
    return parser


def overrides_from_args(args: argparse.Namespace) -> Dict[str, Any]:
    """Config keys set explicitly on the command line."""
    overrides: Dict[str, Any] = {}
    if args.grid is not None:
        overrides["grid"] = args.grid
    if args.out is not None:
        overrides["out"] = args.out
    if args.inclusive_limit:
        overrides["inclusive_limit"] = True
    if args.seed is not None:
        overrides["sequence"] = {"seed": args.seed}
        overrides["signal"] = {"seed": args.seed}
    return overrides


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)

    try:
        source = load_json_source(args.config) if args.config else None
        config = resolve_config(args.experiment, source, overrides_from_args(args))
    except ValidationError as e:
        for err in e.errors():
            _print_error(".".join(str(p) for p in err["loc"]) or args.experiment, err["msg"])
        return EXIT_CONFIG_ERROR
    except (OSError, ValueError, RuntimeError) as e:
        _print_error("config", str(e))
        return EXIT_CONFIG_ERROR

    start = time.time()
    try:
        report = run_experiment(config)
    except GramDiagnosticError as e:
        smallest = "n/a" if e.eigenvalues is None or e.eigenvalues.size == 0 else repr(float(e.eigenvalues[0]))
        _print_error("sequence", f"{e} (smallest eigenvalue {smallest})")
        return EXIT_CONFIG_ERROR
    except (ApproxInputError, SequenceRangeError, TruncationConfigError) as e:
        _print_error(config.experiment, str(e))
        return EXIT_CONFIG_ERROR
    elapsed = time.time() - start

    if config.out:
        report.save(config.out)
        print(f"Saved results to {config.out}", file=sys.stderr)
    else:
        report.write_csv(sys.stdout)
    print(f"[{config.experiment}] {len(report.rows)} rows in {elapsed:.2f}s", file=sys.stderr)
    return 0


if __name__ == "__main__":
    sys.exit(main())
