"""Command-line entry point.

    qedft generate-functional --config cfg.json [--out DIR] [--seed N]
    qedft run-dft             --config cfg.json [--out DIR] [--functional F] [--reference R]
    qedft pure-vqe            --config cfg.json [--out DIR]
    qedft sweep               --config cfg.json [--out DIR]
    qedft compare             --run DIR --reference R [--out DIR]
    qedft import-functional   --input FILE --out DIR

Flags mirror RunConfig fields and override the config file.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, parse_config
from .runs import (
    cmd_compare,
    cmd_generate_functional,
    cmd_import_functional,
    cmd_pure_vqe,
    cmd_run_dft,
    cmd_sweep,
)


def _add_common(parser):
    parser.add_argument("--config", required=True, help="JSON run configuration")
    parser.add_argument("--out", default=None, help="output directory (overrides config)")
    parser.add_argument("--seed", type=int, default=None, help="seed override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qedft",
        description="Quantum-enhanced lattice DFT workbench for Fermi-Hubbard models",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate-functional", help="filling scan -> functional file")
    _add_common(p)

    p = sub.add_parser("run-dft", help="self-consistent KS run")
    _add_common(p)
    p.add_argument("--functional", default=None, help="functional file path override")
    p.add_argument("--reference", default=None, help="ed | balda | file:<path>")

    p = sub.add_parser("pure-vqe", help="direct VQE on the configured model")
    _add_common(p)
    p.add_argument("--reference", default=None, help="ed | balda | file:<path>")

    p = sub.add_parser("sweep", help="functional-quality sweep over (shape, U, depth)")
    _add_common(p)

    p = sub.add_parser("compare", help="metrics for a finished run vs a reference")
    p.add_argument("--run", required=True, help="run directory with config.json + result.json")
    p.add_argument("--reference", required=True, help="ed | balda | file:<path>")
    p.add_argument("--out", default=None)

    p = sub.add_parser("import-functional", help="canonicalize a scan or functional file")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    return parser


def _load_with_overrides(args) -> "RunConfig":
    data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        raise ConfigError("top level: expected a JSON object")
    if args.seed is not None:
        data["seed"] = args.seed
    if getattr(args, "reference", None) is not None:
        data["reference"] = args.reference
    if getattr(args, "functional", None) is not None:
        data["functional"] = {"source": "FILE", "path": args.functional}
    if args.out is not None:
        data["out"] = str(args.out)
    return parse_config(data)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "generate-functional":
            config = _load_with_overrides(args)
            functional, path = cmd_generate_functional(config, args.out)
            print(f"wrote {path} ({functional.describe()})")
        elif args.command == "run-dft":
            config = _load_with_overrides(args)
            result, report = cmd_run_dft(config, args.out)
            status = "converged" if result.converged else "NOT converged"
            print(f"E = {result.energy:.10f} after {result.iterations} iterations ({status})")
            if report is not None:
                print(f"vs {report.reference_tag}: delta_n = {report.delta_n:.6g}, "
                      f"delta_E = {report.delta_e:.6g}")
        elif args.command == "pure-vqe":
            config = _load_with_overrides(args)
            result, report = cmd_pure_vqe(config, args.out)
            print(f"E = {result.energy:.10f} (|grad| = {result.gradient_norm:.3g})")
            if report is not None:
                print(f"vs {report.reference_tag}: delta_n = {report.delta_n:.6g}, "
                      f"delta_E = {report.delta_e:.6g}")
        elif args.command == "sweep":
            config = _load_with_overrides(args)
            rows = cmd_sweep(config, args.out)
            print(f"swept {len(rows)} points")
        elif args.command == "compare":
            report = cmd_compare(args.run, args.reference, args.out)
            print(f"vs {report.reference_tag}: delta_n = {report.delta_n:.6g}, "
                  f"delta_E = {report.delta_e:.6g}")
        elif args.command == "import-functional":
            functional, path = cmd_import_functional(args.input, args.out)
            print(f"wrote {path} ({functional.describe()})")
        else:  # pragma: no cover - argparse enforces the choices
            raise AssertionError(args.command)
    except (ConfigError, ValueError, FileNotFoundError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
