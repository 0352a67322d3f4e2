"""``torsion-lab`` command line.

Every subcommand accepts ``--config FILE`` with ``key = value`` lines using
the long flag names (``max-index = 5``); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import harness
from .presentation import PresentationError, load_presentation
from .selfcheck import SUITES, format_results, run_selfcheck

log = logging.getLogger("torsion_lab")

BOOL_TRUE = {"1", "true", "yes", "on"}
BOOL_FALSE = {"0", "false", "no", "off"}


class ConfigError(ValueError):
    pass


def read_config(path: Path) -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip().replace("_", "-")] = value.strip()
    return out


def _coerce(action: argparse.Action, value: str):
    if action.const is True and action.nargs == 0:  # store_true
        v = value.lower()
        if v in BOOL_TRUE:
            return True
        if v in BOOL_FALSE:
            return False
        raise ConfigError(f"{action.dest}: expected a boolean, got {value!r}")
    if action.type is not None:
        try:
            return action.type(value)
        except ValueError as exc:
            raise ConfigError(f"{action.dest}: {exc}") from None
    return value


def merge_config(parser: argparse.ArgumentParser, args: argparse.Namespace) -> argparse.Namespace:
    """Fill options left at ``None`` from the config file, then apply defaults."""
    options = {
        opt[2:]: a for a in parser._actions for opt in a.option_strings if opt.startswith("--")
    }
    values = read_config(args.config) if getattr(args, "config", None) else {}
    for key, value in values.items():
        action = options.get(key)
        if action is None or key == "config":
            raise ConfigError(f"unknown config key {key!r}")
        if getattr(args, action.dest) is None:
            setattr(args, action.dest, _coerce(action, value))
    for dest, default in getattr(args, "_defaults", {}).items():
        if getattr(args, dest) is None:
            setattr(args, dest, default)
    return args


def _add_common(p: argparse.ArgumentParser, defaults: dict):
    p.add_argument("--config", type=Path, help="key = value file; flags override it")
    p.add_argument("--out", type=Path, default=None, help="CSV output path (stdout if omitted)")
    p.set_defaults(_defaults=defaults)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="torsion-lab", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    check = sub.add_parser("check", help="low-index and cyclic covers of a presentation")
    check.add_argument("presentation", type=Path)
    check.add_argument("--max-index", type=int, default=None)
    check.add_argument("--max-n", type=int, default=None, help="also include cyclic covers 2..N")
    check.add_argument("--volume", type=float, default=None)
    check.add_argument("--jobs", type=int, default=None)
    check.add_argument("--conjugates", action="store_const", const=True, default=None,
                       help="list every subgroup, not one per conjugacy class")
    check.add_argument("--diagnostics", action="store_const", const=True, default=None)
    check.add_argument("--budget", type=int, default=None, help="low-index search node budget")
    _add_common(check, {"max_index": 4, "max_n": 0, "jobs": 1, "conjugates": False,
                        "diagnostics": False, "budget": 2_000_000})

    cyc = sub.add_parser("cyclic", help="cyclic branched cover torsion via resultants")
    cyc.add_argument("presentation", type=Path)
    cyc.add_argument("--max-n", type=int, default=None)
    _add_common(cyc, {"max_n": 20})

    dens = sub.add_parser("density", help="spectral densities of J along a tower")
    dens.add_argument("presentation", type=Path)
    dens.add_argument("--tower", choices=("cyclic", "low-index"), default=None)
    dens.add_argument("--max-n", type=int, default=None)
    _add_common(dens, {"tower": "cyclic", "max_n": 12})

    sc = sub.add_parser("selfcheck", help="run the seeded invariant suites")
    sc.add_argument("--seed", type=int, default=None)
    sc.add_argument("--max-index", type=int, default=None)
    sc.add_argument("--presentations", type=Path, default=None,
                    help="directory of .pres files to use instead of the bundled ones")
    sc.add_argument("--suite", action="append", choices=sorted(SUITES), default=None)
    sc.add_argument("--config", type=Path)
    sc.set_defaults(_defaults={"seed": 0, "max_index": 6})
    return ap


def _emit(out: Path | None, header, rows) -> None:
    text = harness.write_csv(out, header, rows)
    if out is None:
        sys.stdout.write(text)


def cmd_check(args) -> int:
    cfg = harness.ExperimentConfig(
        presentation=args.presentation,
        max_index=args.max_index,
        cyclic_max_n=args.max_n,
        out=args.out,
        jobs=args.jobs,
        volume=args.volume,
        conjugates=args.conjugates,
        diagnostics=args.diagnostics,
        budget=args.budget,
    )
    rows, summary = harness.run_experiment(cfg)
    if args.out is None:
        sys.stdout.write(harness.write_csv(None, harness.CSV_COLUMNS,
                                           [harness.row_to_csv(r) for r in rows]))
    for line in summary.lines():
        print(line, file=sys.stderr if args.out is None else sys.stdout)
    return 0


def cmd_cyclic(args) -> int:
    p = load_presentation(args.presentation)
    _emit(args.out, harness.GROWTH_COLUMNS, harness.growth_csv_rows(p, args.max_n))
    return 0


def cmd_density(args) -> int:
    p = load_presentation(args.presentation)
    rep, rows = harness.density_report(p, args.max_n, args.tower)
    _emit(args.out, harness.DENSITY_COLUMNS, rows)
    stream = sys.stderr if args.out is None else sys.stdout
    print(f"norm bound: {harness.fmt_float(rep.norm_bound)}", file=stream)
    print(f"envelope ln det F / 2: {harness.fmt_float(rep.half_envelope_log_det)}", file=stream)
    print(f"min ln det'/N: {harness.fmt_float(min(r.log_det_per_index for r in rep.rows))}",
          file=stream)
    return 0


def cmd_selfcheck(args) -> int:
    results = run_selfcheck(args.seed, args.presentations, args.max_index, args.suite)
    print(format_results(results))
    return 0 if all(r.ok for r in results) else 1


COMMANDS = {"check": cmd_check, "cyclic": cmd_cyclic, "density": cmd_density,
            "selfcheck": cmd_selfcheck}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    subparser = parser._subparsers._group_actions[0].choices[args.command]
    try:
        merge_config(subparser, args)
        return COMMANDS[args.command](args)
    except (ConfigError, PresentationError, OSError, ValueError) as exc:
        print(f"torsion-lab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
