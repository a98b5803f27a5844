"""Command line: ``python -m fransonsim {run,sweep,analyze,report,presets} ...``."""
from __future__ import annotations

import argparse
import os
import sys

from . import runner


def _scenario(arg):
    """A scenario file path, or the name of a shipped preset."""
    if os.path.exists(arg):
        return runner.load_scenario(arg)
    if arg in runner.preset_names():
        return runner.load_preset(arg)
    raise SystemExit(f"no scenario file or preset named {arg!r}")


def _apply(s, args):
    return runner.override(s, seed=args.seed, steps=args.steps, integration=args.integration,
                           tags=True if getattr(args, "tags", False) else None)


def _emit(text, out_dir, name):
    sys.stdout.write(text)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, name), "w") as fh:
            fh.write(text)


def cmd_run(args):
    s = _apply(_scenario(args.scenario), args)
    r = runner.run_scenario(s, args.out)
    sys.stdout.write(runner.format_report([r.report], args.format))
    for note in r.notes:
        print(f"warning: {note}", file=sys.stderr)
    return 0


def cmd_sweep(args):
    s = _apply(_scenario(args.scenario), args)
    z = [float(x) for x in args.thicknesses.split(",") if x.strip()]
    rows = runner.sweep_thickness(s, z, args.out)
    sys.stdout.write(runner.format_sweep(rows))
    return 0


def cmd_analyze(args):
    s = None if args.scenario is None else _scenario(args.scenario)
    r = runner.analyze_tags(args.tags, s)
    ext = "jsonl" if args.format == "json-lines" else "csv"
    _emit(runner.format_report([r.report], args.format), args.out, f"report_from_tags.{ext}")
    return 0


def cmd_report(args):
    r = runner.report_from_run(args.run_dir)
    sys.stdout.write(runner.format_report([r.report], args.format))
    return 0


def cmd_presets(args):
    for name in runner.preset_names():
        print(name)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="fransonsim", description=__doc__)
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp, run_flags=True):
        sp.add_argument("--out", help="output directory")
        sp.add_argument("--format", choices=("csv", "json-lines"), default="csv")
        if run_flags:
            sp.add_argument("--seed", type=int)
            sp.add_argument("--steps", type=int, help="phase steps per scan")
            sp.add_argument("--integration", type=float, help="seconds per step")
            sp.add_argument("--tags", action="store_true", help="write per-step tag files")

    sp = sub.add_parser("run", help="run one scenario")
    sp.add_argument("scenario", help="scenario YAML file or preset name")
    common(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("sweep", help="run one scenario at several thicknesses")
    sp.add_argument("--thicknesses", required=True, help="comma-separated, micrometres")
    sp.add_argument("scenario")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("analyze", help="re-analyse persisted tag files")
    sp.add_argument("tags", nargs="+")
    sp.add_argument("--scenario", help="override the run directory's scenario")
    common(sp, run_flags=False)
    sp.set_defaults(func=cmd_analyze)

    sp = sub.add_parser("report", help="rebuild the report of a run directory")
    sp.add_argument("run_dir")
    common(sp, run_flags=False)
    sp.set_defaults(func=cmd_report)

    sp = sub.add_parser("presets", help="list shipped scenario presets")
    sp.set_defaults(func=cmd_presets)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (runner.ScenarioError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
