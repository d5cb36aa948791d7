"""Command-line entry point.

    slopecoder sweep  --config FILE [--out DIR] [--<key> VALUE ...]
    slopecoder oracle --nmax 6 --kmax 1 --alphas 0.25,0.5,1,2
    slopecoder trace  --config FILE --alpha 1.6
    slopecoder curves --source bern:0.5|bsms:0.2 --out FILE
"""
import argparse
import sys
from pathlib import Path

from .errors import ConfigError
from .experiment import (ExperimentConfig, curves_csv, emit_energy_trace, load_config, run_oracle_suite,
                         run_sweep)


def _add_config_flags(parser):
    parser.add_argument("--config", help="key = value config file")
    for key in ExperimentConfig.PARSERS:
        if key == "out":
            continue
        parser.add_argument(f"--{key.replace('_', '-')}", dest=key, metavar="VALUE",
                            help=f"override config key '{key}'")


def _config(args):
    cfg = load_config(args.config) if args.config else ExperimentConfig()
    overrides = {key: getattr(args, key, None) for key in ExperimentConfig.PARSERS if key != "out"}
    return cfg.with_overrides(**overrides).validate()


def _write(text, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text)


def cmd_sweep(args):
    cfg = _config(args)
    rows, agg = run_sweep(cfg, out=args.out, workers=args.workers)
    print(f"wrote {rows} and {agg}")
    return 0


def cmd_oracle(args):
    try:
        alphas = [float(v) for v in args.alphas.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--alphas: not a comma-separated list of numbers: {args.alphas!r}") from None
    caps = [float(v) for v in args.caps.split(",") if v.strip()]
    result = run_oracle_suite(args.nmax, args.kmax, alphas, caps=caps)
    sys.stdout.write(result.to_text())
    if args.out:
        _write(result.to_csv(), args.out)
    return 0 if result.violations == 0 else 1


def cmd_trace(args):
    cfg = _config(args)
    text, res = emit_energy_trace(cfg, args.alpha_trace, args.trial)
    _write(text, args.out)
    if args.out not in (None, "-"):
        print(f"{res.iterations} iterations, converged={res.converged}, final energy {res.energy:.6f}")
    return 0


def cmd_curves(args):
    _write(curves_csv(args.source, args.step), args.out)
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="slopecoder", description="Fixed-slope Viterbi lossy coder",
                                     allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", allow_abbrev=False, help="run a slope sweep and write rows.csv / aggregate.csv")
    _add_config_flags(p)
    p.add_argument("--out", help="output directory (overrides config 'out')")
    p.add_argument("--workers", type=int, help="worker processes (capped by SLOPECODER_THREADS)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oracle", allow_abbrev=False, help="exhaustive P1/P2 equivalence and phi-lemma checks")
    p.add_argument("--nmax", type=int, default=6)
    p.add_argument("--kmax", type=int, default=1)
    p.add_argument("--alphas", default="0.25,0.5,1,2")
    p.add_argument("--caps", default="32", help="comma-separated coefficient caps")
    p.add_argument("--out", help="CSV report path")
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("trace", allow_abbrev=False, help="energy trace of one fixed-slope run")
    _add_config_flags(p)
    # --alpha is the slope of this single run, not a config key
    p.add_argument("--alpha", dest="alpha_trace", type=float, required=True)
    p.add_argument("--trial", type=int, default=0)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("curves", allow_abbrev=False, help="reference rate-distortion curve as CSV")
    p.add_argument("--source", required=True, help="bern:<p> or bsms:<q>")
    p.add_argument("--step", type=float, default=1e-3)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_curves)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError, OSError) as exc:
        print(f"slopecoder {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
