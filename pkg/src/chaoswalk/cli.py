"""Command line front end.

Subcommands: ``run``, ``figure``, ``compare``, ``portrait``,
``validate``.  Exit codes: 0 success, 1 usage or configuration error,
2 comparison tolerance failure, 3 numeric-guard failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import FIGURE_NAMES, ConfigError, load_config, parse_config
from .linalg import NonFiniteError, NotHermitianError
from .runner import compare, run
from .walk import NumericGuardError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_TOLERANCE = 2
EXIT_NUMERIC = 3

_FIGURE_TEXT = """\
experiment.kind = figure
figure.name = {name}
figure.seed = {seed}
outputs.dir = {out}
"""

_PORTRAIT_TEXT = """\
experiment.kind = portrait
portrait.g = {g}
portrait.tau = {tau}
portrait.orbits = {orbits}
portrait.steps = {steps}
portrait.seed = {seed}
outputs.dir = {out}
"""


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    manifest = run(cfg, out_dir=args.out, force=args.force, resume=args.resume)
    root = Path(args.out) if args.out else Path(cfg["outputs.dir"])
    print(f"wrote {len(manifest.outputs)} artifacts under {root}")
    return EXIT_OK


def _cmd_figure(args) -> int:
    out = args.out if args.out is not None else args.name
    cfg = parse_config(_FIGURE_TEXT.format(name=args.name, seed=args.seed, out=out))
    manifest = run(cfg, force=args.force, resume=args.resume)
    print(f"wrote {len(manifest.outputs)} artifacts under {out}")
    return EXIT_OK


def _cmd_compare(args) -> int:
    report = compare(args.dir_a, args.dir_b, metric=args.metric, tolerance=args.tolerance)
    print(json.dumps(report, indent=2, sort_keys=True))
    return EXIT_OK if report["pass"] else EXIT_TOLERANCE


def _cmd_portrait(args) -> int:
    cfg = parse_config(
        _PORTRAIT_TEXT.format(
            g=args.g,
            tau=args.tau,
            orbits=args.orbits,
            steps=args.steps,
            seed=args.seed,
            out=args.out,
        )
    )
    run(cfg, force=args.force)
    print(f"wrote portrait under {args.out}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    print(f"ok: experiment.kind = {cfg.kind}")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chaoswalk",
        description="Coined quantum walks on a ring with chaotic coins.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a config file")
    p_run.add_argument("config", help="path to a config file")
    p_run.add_argument("--out", help="override outputs.dir")
    p_run.add_argument("--force", action="store_true", help="overwrite a finished run")
    p_run.add_argument("--resume", action="store_true", help="continue from checkpoints")
    p_run.set_defaults(handler=_cmd_run)

    p_fig = sub.add_parser("figure", help="reproduce one figure's data")
    p_fig.add_argument("name", choices=FIGURE_NAMES)
    p_fig.add_argument("--out", help="output directory (default: the figure name)")
    p_fig.add_argument("--seed", type=int, default=7, help="master seed for random coins")
    p_fig.add_argument("--force", action="store_true", help="overwrite a finished run")
    p_fig.add_argument("--resume", action="store_true", help="continue from checkpoints")
    p_fig.set_defaults(handler=_cmd_figure)

    p_cmp = sub.add_parser("compare", help="diff the CSV series of two run directories")
    p_cmp.add_argument("dir_a")
    p_cmp.add_argument("dir_b")
    p_cmp.add_argument("--metric", choices=("tv", "ks"), default="tv")
    p_cmp.add_argument("--tolerance", type=float, default=0.05)
    p_cmp.set_defaults(handler=_cmd_compare)

    p_por = sub.add_parser("portrait", help="classical-map phase portrait")
    p_por.add_argument("--g", type=float, required=True, help="kick strength")
    p_por.add_argument("--tau", type=float, default=1.0)
    p_por.add_argument("--orbits", type=int, default=100)
    p_por.add_argument("--steps", type=int, default=1000)
    p_por.add_argument("--seed", type=int, default=0)
    p_por.add_argument("--out", default="portrait")
    p_por.add_argument("--force", action="store_true")
    p_por.set_defaults(handler=_cmd_portrait)

    p_val = sub.add_parser("validate", help="parse and validate a config file")
    p_val.add_argument("config")
    p_val.set_defaults(handler=_cmd_validate)

    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; 1 is this tool's usage code.
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE
    try:
        return args.handler(args)
    except (NumericGuardError, NonFiniteError, NotHermitianError) as exc:
        print(f"numeric guard: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ConfigError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
