"""Command-line entry point: ``hitchin-forge <subcommand> [options]``.

Subcommands write CSV tables (``--out -`` for standard output) whose
comment header records the library version, the configuration hash and
the census completeness radius.  Exit codes: 0 success, 1 invariant
failure, 2 configuration error, 3 numeric failure.
"""
import argparse
import csv
import io
import json
import sys
import warnings

from . import __version__
from . import config as cfgmod
from . import experiments as ex
from .census import dumps_census, load_census
from .errors import (NUMERIC_ERRORS, ConfigError, DiscretenessSuspect, EigenFailure,
                     FormatVersionMismatch)

SUBCOMMANDS = ("census", "entropy", "graft-sweep", "pressure-length", "pants-entropy", "check")

EXIT_OK, EXIT_INVARIANT, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


def _fmt(v):
    if isinstance(v, float):
        return repr(float(v))
    return str(v)


def table(columns, rows, meta):
    buf = io.StringIO()
    buf.write(f"# hitchin-forge {__version__}\n")
    for k, v in meta.items():
        buf.write(f"# {k}={_fmt(v)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    return buf.getvalue()


def _emit(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _meta(s, c=None, **extra):
    m = {"config_hash": s.hash if hasattr(s, "hash") else s}
    if c is not None:
        m["r_star"] = float(c.r_star)
    m.update(extra)
    return m


def _ray_census(s, c0):
    """Census with the ray-grid labels, reusing a loaded census if given."""
    reps = s.ray_reps(s.cfg["ray"]["grid"])
    if c0 is None:
        return ex.census(s, reps)
    missing = {k: v for k, v in reps.items() if k not in c0.lengths}
    return c0.with_labels(missing) if missing else c0


def cmd_census(s, c0):
    return dumps_census(_ray_census(s, c0)), True


def cmd_entropy(s, c0):
    c, rows = ex.entropy_rows(s, _ray_census(s, c0))
    cols = ("label", "R0", "R1", "delta", "stderr", "rows")
    return table(cols, rows, _meta(s, c)), True


def cmd_graft_sweep(s, c0):
    c, rows = ex.graft_sweep(s, _ray_census(s, c0))
    return table(ex.GRAFT_COLUMNS, rows, _meta(s, c)), True


def cmd_pressure_length(s, c0):
    c, path = ex.ray_path(s, c=c0)
    c, rows = ex.pressure_rows(s, c, path)
    return table(ex.PRESSURE_COLUMNS, rows, _meta(s, c, h=float(s.cfg["ray"]["h"]))), True


def cmd_pants_entropy(cfg, h):
    rows = ex.pants_rows(cfg)
    meta = {"config_hash": h, "r_star": float(cfg["pants"]["radius"])}
    return table(ex.PANTS_COLUMNS, rows, meta), True


def cmd_check(s, c0):
    c, checks = ex.check_suite(s, None if c0 is None else _ray_census(s, c0))
    rows = [(k.name, "pass" if k.ok else "FAIL", k.detail) for k in checks]
    for name, status, detail in rows:
        print(f"{status:4s}  {name}: {detail}", file=sys.stderr)
    return table(("invariant", "status", "detail"), rows, _meta(s, c)), all(k.ok for k in checks)


def build_parser():
    p = argparse.ArgumentParser(prog="hitchin-forge", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="SUBCOMMAND")
    for name in SUBCOMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", help="JSON configuration file (defaults are used when omitted)")
        sp.add_argument("--out", help="output path, '-' for standard output")
        sp.add_argument("--seed", type=int, help="RNG seed (overrides the config)")
        sp.add_argument("--max-word-len", type=int, help="census word-length cap (overrides the config)")
        sp.add_argument("--census", help="reuse a saved census instead of enumerating")
        sp.add_argument("--strict", action="store_true",
                        help="reject a census saved under another config hash and treat "
                             "discreteness warnings as numeric failures")
    sub.add_parser("schema", help="print the configuration JSON schema")
    return p


def run(argv=None):
    args = build_parser().parse_args(argv)
    if args.command == "schema":
        sys.stdout.write(json.dumps(cfgmod.SCHEMA, indent=2) + "\n")
        return EXIT_OK
    try:
        with warnings.catch_warnings():
            if args.strict:
                warnings.simplefilter("error", DiscretenessSuspect)
            cfg = cfgmod.override(cfgmod.load(args.config), args.seed, args.max_word_len)
            out = args.out if args.out is not None else cfg.get("out")
            if args.command == "pants-entropy":
                text, ok = cmd_pants_entropy(cfg, cfgmod.config_hash(cfg))
            else:
                s = ex.setup(cfg)
                c0 = None
                if args.census:
                    c0 = load_census(args.census, expected_hash=s.hash, strict=args.strict)
                handler = {"census": cmd_census, "entropy": cmd_entropy,
                           "graft-sweep": cmd_graft_sweep, "pressure-length": cmd_pressure_length,
                           "check": cmd_check}[args.command]
                text, ok = handler(s, c0)
    except OSError as exc:
        print(f"hitchin-forge: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, FormatVersionMismatch) as exc:
        print(f"hitchin-forge: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EigenFailure as exc:
        print(f"hitchin-forge: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except NUMERIC_ERRORS as exc:
        print(f"hitchin-forge: numeric failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except DiscretenessSuspect as exc:
        print(f"hitchin-forge: numeric failure (DiscretenessSuspect): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(text, out)
    return EXIT_OK if ok else EXIT_INVARIANT


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
