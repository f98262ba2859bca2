"""Command-line front end: ``genmap``, ``run`` and ``sweep``.

Configuration is resolved as built-in defaults, then an optional flat
``key=value`` file (``--config``), then command-line flags.  Keys are the
:class:`~desegsim.engine.SimConfig` field names, with the leader parameters
(``nol``, ``fc``, ``pmutation``, ``cluster_radius``, ``radius_competition``,
``pif``) given at top level.  Lines starting with ``#`` are ignored.

Exit codes: 0 success, 1 usage or configuration error, 2 runtime error.
Set ``DESEGSIM_LOG`` (e.g. ``DEBUG``) to change log verbosity.
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
import tempfile

from .engine import SimConfig, run
from .foundress import FoundressConfig
from .mapgen import emit_region_raster, generate_voronoi_map
from .sweep import SweepSpec, cell_config, run_sweep, summary_csv, sweep_csv

log = logging.getLogger("desegsim")

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2

_FOUNDRESS_KEYS = {f.name: f.type for f in dataclasses.fields(FoundressConfig)}
_SIM_KEYS = {f.name for f in dataclasses.fields(SimConfig)} - {"foundress"}
_INT_KEYS = {
    "map_width", "map_height", "map_regions", "map_seed", "population", "ir",
    "influence_duration", "max_ticks", "equilibrium_window", "seed", "nol",
}
_STR_KEYS = {"map_path", "happiness"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _coerce(key: str, raw: str):
    if key in _STR_KEYS:
        return raw
    if key == "map_seed" and raw.lower() in ("", "none"):
        return None
    try:
        return int(raw) if key in _INT_KEYS else float(raw)
    except ValueError:
        raise UsageError(f"bad value for {key}: {raw!r}") from None


def read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    for lineno, line in enumerate(lines, 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        if key not in _SIM_KEYS and key not in _FOUNDRESS_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw)
    return values


def build_config(values: dict) -> SimConfig:
    sim = {k: v for k, v in values.items() if k in _SIM_KEYS}
    leaders = {k: v for k, v in values.items() if k in _FOUNDRESS_KEYS}
    try:
        return SimConfig(foundress=FoundressConfig(**leaders), **sim)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _add_config_flags(p: argparse.ArgumentParser, lists: bool = False) -> None:
    g = p.add_argument_group("simulation")
    g.add_argument("--config", help="key=value config file")
    g.add_argument("--map", dest="map_path", help="region raster file")
    g.add_argument("--map-width", type=int)
    g.add_argument("--map-height", type=int)
    g.add_argument("--map-regions", type=int)
    g.add_argument("--map-seed", type=int)
    g.add_argument("--population", type=int)
    g.add_argument("--pdtu", type=float)
    g.add_argument("--segregation-threshold", type=float)
    g.add_argument("--happiness", choices=["base", "literal", "reconciled"])
    g.add_argument("--influence-duration", type=int)
    g.add_argument("--max-ticks", type=int)
    g.add_argument("--equilibrium-window", type=int)
    g.add_argument("--seed", type=int)
    g.add_argument("--expat-fraction", type=float)
    g.add_argument("--pmutation", type=float)
    g.add_argument("--cluster-radius", type=float)
    g.add_argument("--radius-competition", type=float)
    if lists:
        g.add_argument("--nol", help="comma-separated leader counts")
        g.add_argument("--fc", help="comma-separated cooperative fractions")
        g.add_argument("--ir", help="comma-separated influence periods")
        g.add_argument("--pif", help="comma-separated fight probabilities")
    else:
        g.add_argument("--nol", type=int)
        g.add_argument("--fc", type=float)
        g.add_argument("--ir", type=int)
        g.add_argument("--pif", type=float)


def _resolve(args, skip=()) -> dict:
    values = read_config_file(args.config) if args.config else {}
    for key in _SIM_KEYS | set(_FOUNDRESS_KEYS):
        if key in skip:
            continue
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    return values


def _parse_list(text: str | None, kind, default) -> tuple:
    if text is None:
        return (default,)
    try:
        return tuple(kind(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise UsageError(f"bad list {text!r}") from None


def _write_atomic(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".desegsim-")
    try:
        with os.fdopen(fd, "w", encoding="ascii", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def cmd_genmap(args) -> int:
    if args.width < 1 or args.height < 1:
        raise UsageError("width and height must be positive")
    if not 1 <= args.regions <= args.width * args.height:
        raise UsageError(f"--regions must lie in 1..{args.width * args.height}")
    raster = generate_voronoi_map(args.width, args.height, args.regions, args.seed)
    _write_atomic(args.output, emit_region_raster(raster))
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = build_config(_resolve(args))
    try:
        raster = cfg.load_raster()
    except (OSError, ValueError) as exc:
        raise UsageError(f"cannot load map: {exc}") from None
    try:
        result = run(cfg, raster=raster)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    log.info("stopped after %d ticks (%s)", len(result.rows), result.stop_reason)
    _write_atomic(args.output, result.to_csv())
    return EXIT_OK


def cmd_sweep(args) -> int:
    values = _resolve(args, skip=("nol", "fc", "ir", "pif"))
    base = build_config(values)
    f = base.foundress
    try:
        spec = SweepSpec(
            nol=_parse_list(args.nol, int, f.nol),
            fc=_parse_list(args.fc, float, f.fc),
            ir=_parse_list(args.ir, int, base.ir),
            pif=_parse_list(args.pif, float, f.pif),
            replicates=args.replicates,
            base=base,
            warmup=args.warmup,
        )
        for nol, fc, ir, pif in spec.cells():
            dataclasses.replace(base, ir=ir).with_foundress(nol=nol, fc=fc, pif=pif)
        raster = cell_config(spec, 0, 0).load_raster()
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    try:
        rows = run_sweep(spec, workers=args.workers, raster=raster)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _write_atomic(args.output, sweep_csv(rows))
    if args.summary:
        _write_atomic(args.summary, summary_csv(rows))
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="desegsim", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("genmap", help="write a synthetic Voronoi region raster")
    p.add_argument("--width", type=int, default=100)
    p.add_argument("--height", type=int, default=100)
    p.add_argument("--regions", type=int, default=54)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_genmap)

    p = sub.add_parser("run", help="single run, per-tick CSV")
    _add_config_flags(p)
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="parameter grid with replicates, aggregate CSV")
    _add_config_flags(p, lists=True)
    p.add_argument("--replicates", type=int, default=10)
    p.add_argument("--warmup", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--summary", help="also write per-cell mean/std CSV here")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("DESEGSIM_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"desegsim: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - top-level boundary
        log.exception("run failed")
        print(f"desegsim: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
