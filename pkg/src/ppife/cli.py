"""Command line driver for single runs and convergence studies.

Examples::

    ppife --preset table1
    ppife --ns 20 --theta 0.5 --epsilon -1 --sigma0 100
    ppife --config run.cfg --beta-plus 10 --csv errors.csv

Config files hold one ``key = value`` per line; ``#`` starts a comment.
Command line flags override file entries.
"""
import argparse
import logging
import sys
from dataclasses import replace

from .exceptions import UsageError
from .study import LARGE_STUDY, PRESETS, RunConfig, config_keys, run_study

_INT_KEYS = {"epsilon"}
_FLOAT_KEYS = {"theta", "sigma0", "alpha", "beta_minus", "beta_plus", "dt_ratio", "t_final"}
_PATH_KEYS = {"csv", "export", "mesh_dump", "matrix_dump", "init"}


def _parse_study(text):
    try:
        return tuple(int(v) for v in str(text).replace(",", " ").split())
    except ValueError as exc:
        raise UsageError(f"bad mesh list {text!r}") from exc


def _convert(key, value):
    try:
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError as exc:
        raise UsageError(f"bad value for {key}: {value!r}") from exc
    if key in ("study", "ns"):
        return _parse_study(value)
    return str(value)


def read_config_file(path):
    """Parse a ``key = value`` file into a dict of typed values."""
    valid = set(config_keys()) | {"ns", "preset"}
    entries = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (s.strip() for s in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in valid:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}; "
                                 f"valid keys: {', '.join(sorted(valid))}")
            entries[key] = value if key == "preset" else _convert(key, value)
    return entries


def build_parser():
    p = argparse.ArgumentParser(prog="ppife", description=__doc__.split("\n\n")[0],
                                argument_default=argparse.SUPPRESS)
    p.add_argument("--config", help="key = value configuration file")
    p.add_argument("--preset", help=f"parameter preset: {', '.join(PRESETS)}")
    p.add_argument("--ns", help="single mesh size N_s")
    p.add_argument("--study", help="comma separated mesh sizes, e.g. 10,20,40")
    p.add_argument("--large", action="store_true", help="append N_s = 320, 640, 1280")
    p.add_argument("--theta")
    p.add_argument("--epsilon")
    p.add_argument("--sigma0")
    p.add_argument("--alpha")
    p.add_argument("--beta-minus", dest="beta_minus")
    p.add_argument("--beta-plus", dest="beta_plus")
    p.add_argument("--dt-ratio", dest="dt_ratio", help="time step dt = ratio * h")
    p.add_argument("--t-final", dest="t_final")
    p.add_argument("--init", help="interpolation or elliptic")
    p.add_argument("--csv", help="write the error table as CSV")
    p.add_argument("--export", help="dump the finest-mesh field as 'x y value side'")
    p.add_argument("--mesh-dump", dest="mesh_dump")
    p.add_argument("--matrix-dump", dest="matrix_dump", help="MatrixMarket stiffness dump")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def parse_config(argv=None):
    """Build a validated :class:`RunConfig` from flags and an optional file."""
    parser = build_parser()
    parser.__class__ = _Parser
    ns = vars(parser.parse_args(argv))
    values = {}

    file_entries = read_config_file(ns.pop("config")) if "config" in ns else {}
    preset = ns.pop("preset", file_entries.pop("preset", None))
    if preset is not None:
        if preset not in PRESETS:
            raise UsageError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
        values.update(PRESETS[preset])
    values.update(file_entries)
    large = ns.pop("large", False)
    ns.pop("verbose", None)
    for key, value in ns.items():
        values[key] = _convert(key, value)
    if "ns" in values:
        values["study"] = values.pop("ns")
    if large:
        values["study"] = tuple(values.get("study", RunConfig.study)) + LARGE_STUDY
    valid = set(config_keys())
    unknown = set(values) - valid
    if unknown:
        raise UsageError(f"unknown keys {sorted(unknown)}; valid keys: {', '.join(sorted(valid))}")
    return replace(RunConfig(), **values).validate()


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    logging.basicConfig(level=logging.INFO if ("-v" in argv or "--verbose" in argv)
                        else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = parse_config(argv)
    except UsageError as exc:
        print(f"ppife: error: {exc}", file=sys.stderr)
        return 2
    report = run_study(cfg, out=sys.stdout)
    for ns, msg in report.failures:
        print(f"ppife: N_s = {ns} failed: {msg}", file=sys.stderr)
    return 0 if report.ok else 1


if __name__ == "__main__":
    sys.exit(main())
