"""``opinionnet`` command line.

Exit status: 0 on success, 1 on a validation error (bad config, bad
arguments, failed oracle check), 2 on an I/O error.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import __version__
from .config import parse_config
from .errors import ConfigError
from .experiments import BASE, SUITES, ExperimentSpec, default_workers, run_suite, summarize

OK, INVALID, IO_ERROR = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors; here 2 is reserved for I/O failures
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(INVALID, f"{self.prog}: error: {message}\n")


def _add_run_opts(p: argparse.ArgumentParser, replicas_default: int) -> None:
    p.add_argument("--replicas", type=int, default=replicas_default, help=f"replicas per point (default {replicas_default})")
    p.add_argument("--seed", type=int, default=None, help="seed of replica 0; replica r uses seed + r")
    p.add_argument("--out", default="out", help="output directory (default ./out)")
    p.add_argument("--workers", type=int, default=1, help="worker processes (0 = one per CPU)")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="opinionnet", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one config, possibly replicated")
    p.add_argument("--config", required=True, help="JSON config file")
    _add_run_opts(p, 1)

    p = sub.add_parser("suite", help="run a prebuilt experiment suite")
    p.add_argument("--name", required=True, choices=SUITES)
    _add_run_opts(p, 10)

    p = sub.add_parser("summarize", help="aggregate a finished manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", default=None, help="write the summary here instead of stdout")

    p = sub.add_parser("oracle-check", help="compare fast kernels against brute-force references")
    p.add_argument("--seed", type=int, default=0)
    return ap


def _workers(n: int) -> int:
    return default_workers() if n == 0 else n


def _cmd_run(args) -> int:
    cfg = parse_config(args.config)
    seed = cfg.seed if args.seed is None else args.seed
    spec = ExperimentSpec(cfg, replicas=args.replicas, seed_base=seed)
    m = run_suite(spec, args.out, workers=_workers(args.workers))
    print(f"{len(m.runs)} run(s) written; manifest {m.path}")
    return OK


def _cmd_suite(args) -> int:
    spec = ExperimentSpec(BASE, replicas=args.replicas, seed_base=args.seed or 0, suite=args.name)
    m = run_suite(spec, args.out, workers=_workers(args.workers))
    print(f"{len(m.runs)} run(s) written; manifest {m.path}")
    return OK


def _cmd_summarize(args) -> int:
    text = json.dumps(summarize(args.manifest), sort_keys=True, indent=1) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return OK


def _cmd_oracle(args) -> int:
    from .oracles import run_all

    results = run_all(args.seed)
    for name, ok, detail in results:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
    return OK if all(ok for _, ok, _ in results) else INVALID


COMMANDS = {"run": _cmd_run, "suite": _cmd_suite, "summarize": _cmd_summarize, "oracle-check": _cmd_oracle}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        for name, msg in e.problems.items():
            print(f"error: {name}: {msg}", file=sys.stderr)
        return INVALID
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return IO_ERROR
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return INVALID
