"""Command-line front end.

Subcommands: ``dump`` (print a sequence event list), ``sqc`` (single-quantum
decay under DD), ``mqc`` (spin-counting experiment), ``filter`` (analytic
filter-function prediction).  Exit codes: 0 success, 1 domain error
(unrealizable sequence, bad configuration), 2 usage error.
"""

from __future__ import annotations

import argparse
import sys as _sys
from pathlib import Path

from . import __version__
from .config import ConfigError, parse_duration, read_document, resolve, write_manifest
from .experiment import run_mqc
from .filters import chi
from .propagate import sqc_dd_experiment
from .sequence import (DDScheme, NegativeDelayError, UnrealizableError, dumps,
                       gen_mqc_cycle, generate, repeat)


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spindd",
                                description="dipolar spin-cluster DD/MQC simulator")
    p.add_argument("--version", action="version", version=f"spindd {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    d = sub.add_parser("dump", help="print the event list of a named sequence")
    d.add_argument("--scheme", required=True,
                   choices=["cpmg", "cpmgp", "udd", "uddp", "rudd", "ruddp", "none", "mqc"])
    d.add_argument("--n", type=int, default=1, help="pulse count N")
    d.add_argument("--tau", type=parse_duration, help="CPMG half-gap, e.g. 2us")
    d.add_argument("--t", type=parse_duration, help="total duration, e.g. 58.1us")
    d.add_argument("--tau-pi", type=parse_duration, default="0s", help="pi-pulse width")
    d.add_argument("--cycles", type=int, default=1)
    d.add_argument("--delta", type=parse_duration, default="2us", help="mqc: cycle gap")
    d.add_argument("--tau-90", type=parse_duration, default="0s", help="mqc: pi/2 width")
    d.add_argument("--alpha", type=float, default=0.0, help="mqc: phase shift, rad")
    d.add_argument("--m", type=int, default=1, help="mqc: cycles")

    for name, help_text in (("sqc", "single-quantum DD decay"),
                            ("mqc", "multiple-quantum spin counting"),
                            ("filter", "analytic filter-function prediction")):
        c = sub.add_parser(name, help=help_text)
        c.add_argument("--config", required=True, type=Path)
        c.add_argument("--out", required=True, type=Path, help="output directory")
        c.add_argument("--seed", type=int, default=None, help="override the config seed")
        c.add_argument("--threads", type=int, default=1)
        c.add_argument("--force", action="store_true", help="overwrite existing outputs")
    return p


def _outputs(out_dir: Path, names, force: bool) -> list:
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = [out_dir / n for n in names]
    if not force:
        clashes = [str(p) for p in paths if p.exists()]
        if clashes:
            raise FileExistsError("refusing to overwrite (use --force): " + ", ".join(clashes))
    return paths


def _cmd_dump(args) -> int:
    if args.scheme == "mqc":
        seq = gen_mqc_cycle(args.delta, args.tau_90, alpha=args.alpha, cycles=args.m)
    else:
        scheme = DDScheme(args.scheme, n=args.n, tau=args.tau, total_duration=args.t,
                          tau_pi=args.tau_pi, cycles=args.cycles)
        seq = repeat(generate(scheme), args.cycles)
    print("# kind,duration_s,phase_rad,amplitude_hz")
    print(dumps(seq), end="")
    return 0


def _cmd_sqc(args) -> int:
    cfg = resolve(read_document(args.config), seed_override=args.seed, require=("scheme",))
    (signal_path, manifest_path) = _outputs(args.out, ["signal.csv", "manifest.txt"], args.force)
    table = sqc_dd_experiment(cfg.system, cfg.scheme, cfg.noise, cfg.prop,
                              readout_times=cfg.readout_times or None)
    table.write_csv(signal_path)
    write_manifest(manifest_path, cfg.resolved)
    return 0


def _cmd_mqc(args) -> int:
    cfg = resolve(read_document(args.config), seed_override=args.seed, require=("mqc",))
    spectrum_path, sweep_path, manifest_path = _outputs(
        args.out, ["spectrum.csv", "sweep.csv", "manifest.txt"], args.force)
    result = run_mqc(cfg.system, cfg.mqc, cfg.noise, threads=args.threads)
    result.write_spectrum_csv(spectrum_path)
    result.write_sweep_csv(sweep_path)
    write_manifest(manifest_path, cfg.resolved)
    return 0


def _cmd_filter(args) -> int:
    cfg = resolve(read_document(args.config), seed_override=args.seed, require=("scheme",))
    filter_path, chi_path, manifest_path = _outputs(
        args.out, ["filter.csv", "chi.csv", "manifest.txt"], args.force)
    seq = repeat(generate(cfg.scheme.delta_limit()), cfg.scheme.cycles)
    result = chi(seq, cfg.noise)
    result.write_csv(filter_path, chi_path)
    write_manifest(manifest_path, cfg.resolved)
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"dump": _cmd_dump, "sqc": _cmd_sqc, "mqc": _cmd_mqc, "filter": _cmd_filter}
    try:
        return handlers[args.command](args)
    except (NegativeDelayError, UnrealizableError, ConfigError, FileExistsError,
            FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=_sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
