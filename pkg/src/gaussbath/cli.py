"""Command-line entry point.

Exit codes: 0 success, 2 invalid input, 3 numerical-quality failure
(including runs whose telemetry gates fail; their data is still written),
4 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .config import PRESETS, RunConfig, available_presets, load_config, load_preset
from .errors import NumericalError, ValidationError

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4
OUT_DIR_ENV = "GAUSSBATH_OUT_DIR"

log = logging.getLogger("gaussbath")


def _default_out_dir() -> str:
    return os.environ.get(OUT_DIR_ENV, "out")


def _guarded(label: str, fn) -> int:
    try:
        return fn()
    except ValidationError as exc:
        print(f"{label}: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except NumericalError as exc:
        print(f"{label}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"{label}: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


def _execute(config: RunConfig, args) -> int:
    from .experiment import emit, run

    if args.dt is not None or args.samples is not None:
        config = config.with_overrides(dt=args.dt, samples=args.samples)
    record = run(config)
    paths = emit(record, args.out_dir, plot=not args.no_plot)
    status = "ok" if record.telemetry.passed else "FAILED (" + "; ".join(record.telemetry.failures) + ")"
    print(f"{config.name}: {len(record.samples)} samples -> {paths['csv']} [{status}]")
    return EXIT_OK if record.telemetry.passed else EXIT_NUMERICAL


def _run_many(jobs: list[tuple[str, callable]], n_jobs: int) -> int:
    def one(job):
        label, load = job
        return _guarded(label, lambda: load())

    if n_jobs > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            codes = list(pool.map(one, jobs))
    else:
        codes = [one(j) for j in jobs]
    return max(codes)


def cmd_run(args) -> int:
    jobs = [(path, lambda p=path: _execute(load_config(p), args)) for path in args.configs]
    return _run_many(jobs, args.jobs)


def cmd_preset(args) -> int:
    names = list(PRESETS) if "all" in args.names else args.names
    jobs = [(name, lambda n=name: _execute(load_preset(n), args)) for name in names]
    return _run_many(jobs, args.jobs)


def cmd_validate(args) -> int:
    def check():
        config = load_config(args.config)
        spec = config.model
        cols = ", ".join(c.label for c in config.columns)
        print(
            f"{args.config}: ok ({spec.kind}, N={spec.n_modes}, tau={spec.switching.duration:g}, "
            f"dt={config.dt:g}, {config.samples + 1} rows; columns: {cols})"
        )
        return EXIT_OK

    return _guarded(args.config, check)


def cmd_oracle(args) -> int:
    from .experiment import compare_with_oracle, write_oracle_csv

    def check():
        source = args.config
        config = load_config(source) if Path(source).is_file() else load_preset(source)
        comparison = compare_with_oracle(config, n_max=args.n_max, oracle_dt=args.oracle_dt)
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"{config.name}_oracle.csv"
        write_oracle_csv(comparison, path)
        for name, diff in comparison.max_differences.items():
            print(f"{name}: max |gaussian - fock| = {diff:.3e}")
        print(f"max leakage {comparison.leakage.max():.3e}; table -> {path}")
        if not comparison.passed:
            print(f"disagreement above {comparison.tolerance:g} nats", file=sys.stderr)
            return EXIT_NUMERICAL
        return EXIT_OK

    return _guarded(args.config, check)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gaussbath", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def output_flags(p):
        p.add_argument("--out-dir", default=_default_out_dir(), help=f"output directory (default: ${OUT_DIR_ENV} or ./out)")
        p.add_argument("--dt", type=float, help="override the integration step")
        p.add_argument("--samples", type=int, help="override the number of sample intervals")
        p.add_argument("--jobs", type=int, default=1, help="run several configs in parallel threads")
        p.add_argument("--no-plot", action="store_true", help="skip the PNG figure")

    p = sub.add_parser("run", help="run one or more config files")
    p.add_argument("configs", nargs="+")
    output_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("preset", help="run a shipped figure preset")
    p.add_argument("names", nargs="+", choices=list(PRESETS) + ["all"])
    output_flags(p)
    p.set_defaults(func=cmd_preset)

    p = sub.add_parser("validate", help="check a config file without running it")
    p.add_argument("config")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("oracle", help="cross-check a tiny config against the truncated Fock oracle")
    p.add_argument("config", help=f"config path or preset name ({', '.join(n for n in available_presets() if n not in PRESETS)})")
    p.add_argument("--out-dir", default=_default_out_dir())
    p.add_argument("--n-max", type=int, help="Fock cutoff per mode")
    p.add_argument("--oracle-dt", type=float, help="oracle step while the coupling ramps")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
