"""Command-line front end.

Data goes to ``--out`` or standard output; diagnostics go to standard error.
Exit status: 0 success, 1 a ``validate`` run failed its 4-SE check,
2 usage, configuration or domain error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, ScenarioConfig, load_config
from .experiments import default_threads, figure_ids, render, run_figure, run_sweep, run_task, run_validate
from .model import DomainError
from .optimizer import UnsupportedConfiguration
from .spam import NoProfitableSpam

log = logging.getLogger("qualdiff")

CONFIG_COMMANDS = {
    "eval": "expected profit per buyer of a given product line",
    "optimize": "optimal qualities for a fixed number of variants",
    "variants": "optimal number of displayed variants up to product.m_max",
    "phase": "produce nothing, one variant or two distinct variants",
    "price": "joint optimal quality and price for identical buyers",
    "spam": "optimal spam campaign (quality and number of offers)",
    "sweep": "1-D or 2-D parameter sweep of any of the tasks above",
    "validate": "Monte Carlo check of an analytic expectation",
}


def _common(p: argparse.ArgumentParser, config_required: bool = True) -> None:
    p.add_argument("--config", required=config_required, help="scenario file (TOML)")
    p.add_argument("--out", help="output file (default: standard output)")
    p.add_argument("--format", choices=("csv", "json"), default=None, help="output format (default csv)")
    p.add_argument("--seed", type=int, default=12345, help="random seed (validate)")
    p.add_argument("--threads", type=int, default=None,
                   help="worker count (default: $QUALDIFF_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qualdiff", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in CONFIG_COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        _common(p)
        if name == "validate":
            p.add_argument("--n-buyers", type=int, default=1_000_000)
            p.add_argument("--n-se", type=float, default=4.0, help="pass band in standard errors")
    p = sub.add_parser("figure", help="reproduce the data behind a figure")
    p.add_argument("figure_id", choices=list(figure_ids()))
    _common(p, config_required=False)
    return parser


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8", newline="\n")
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _resolve(args, cfg: ScenarioConfig | None) -> tuple[str, str | None]:
    fmt = args.format
    out = args.out
    if cfg is not None and cfg.output is not None:
        fmt = fmt or cfg.output.format
        out = out or cfg.output.path
    return fmt or "csv", out


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    threads = args.threads if args.threads is not None else default_threads()
    if threads < 1:
        parser.error("--threads must be >= 1")

    try:
        if args.command == "figure":
            cfg = load_config(args.config) if args.config else None
            result = run_figure(args.figure_id, threads)
        else:
            cfg = load_config(args.config)
            if args.command == "sweep":
                result = run_sweep(cfg, threads)
            elif args.command == "validate":
                report = run_validate(cfg, args.n_buyers, args.seed, threads, args.n_se)
                meta = {"task": "validate", "seed": args.seed, "n_buyers": args.n_buyers,
                        "parameters": cfg.model_dump(exclude_none=True, exclude={"output"})}
                result = report.as_result(meta)
                status = "PASS" if report.passed else "FAIL"
                log.info("%s: analytic=%.12g sampled=%.12g se=%.3g", status, report.analytic,
                         report.sampled, report.standard_error)
            else:
                result = run_task(args.command, cfg)
        result.meta.setdefault("seed", args.seed)
        fmt, out = _resolve(args, cfg)
        _emit(render(result, fmt), out)
    except (ConfigError, DomainError, UnsupportedConfiguration, NoProfitableSpam, ValueError) as exc:
        log.error("%s", exc)
        return 2
    if args.command == "validate" and not report.passed:
        return 1
    return 0
