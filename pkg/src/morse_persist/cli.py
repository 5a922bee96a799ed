"""morse-persist command line.

Exit codes: 0 ok, 2 bad configuration, 3 bad input data, 4 internal invariant violated.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .dot import emit_dot
from .grid import Box, GridError
from .gridmap import MapError
from .interval import MapSpecError
from .morse import MorphismError
from .persistence import DecompositionError, OpError
from .pipeline import ConfigError, InvariantViolation, PipelineConfig, public, run_pipeline
from .timeseries import DataError

EXIT_CONFIG, EXIT_DATA, EXIT_INVARIANT = 2, 3, 4
COMMANDS = ("analyze", "morse", "mixing", "barcode", "merge-tree")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def parse_depths(text: str) -> tuple[int, int]:
    try:
        if ".." in text:
            a, b = text.split("..", 1)
            return int(a), int(b)
        k = int(text)
        return k, k
    except ValueError:
        raise ConfigError(f"depths must look like 3..6, got {text!r}") from None


def parse_box(text: str) -> Box:
    parts = [p for p in text.replace(";", ",").split(",") if p.strip()]
    if not parts or len(parts) % 2:
        raise ConfigError(f"box needs lo,hi pairs, got {text!r}")
    try:
        vals = [Fraction(p.strip()) for p in parts]
    except ValueError:
        raise ConfigError(f"box bounds must be numbers, got {text!r}") from None
    try:
        return Box(tuple(vals[0::2]), tuple(vals[1::2]))
    except GridError as exc:
        raise ConfigError(str(exc)) from None


def _frac(text: str | None) -> Fraction | None:
    if text is None:
        return None
    try:
        return Fraction(text)
    except ValueError:
        raise ConfigError(f"not a number: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="morse-persist", description="Morse decompositions of grid maps across resolutions.")
    p.add_argument("command", choices=COMMANDS)
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--map", help='polynomial map, coordinates separated by ";", e.g. "x^2"')
    src.add_argument("--observations", metavar="CSV", help="time series, one row per step")
    src.add_argument("--samples", metavar="CSV", help="pairs x,f(x), one row per pair")
    p.add_argument("--box", default="0,1", help="lo,hi per axis (default 0,1)")
    p.add_argument("--depths", default="3..6", help="depth range k0..k1 (default 3..6)")
    p.add_argument("--delay", type=int, help="delay-embed the first column of --observations")
    p.add_argument("--mu", help="fixed threshold on transition counts")
    p.add_argument("--schedule-mu", help="threshold at the finest depth, shrunk by M^2 per coarsening")
    p.add_argument("--lambda", dest="morita_lambda", help="Morita ratio threshold")
    p.add_argument("--morita-mu", type=int, default=1, help="Morita count threshold (default 1)")
    p.add_argument("--format", dest="fmt", default="json", choices=("json", "dot"))
    p.add_argument("--output", "-o", help="write here instead of stdout")
    return p


def config_from_args(args) -> PipelineConfig:
    lo, hi = parse_depths(args.depths)
    if args.map:
        source, path = "map", None
    elif args.observations:
        source, path = "observations", args.observations
    else:
        source, path = "samples", args.samples
    if args.delay is not None and source != "observations":
        raise ConfigError("--delay only applies to --observations")
    cfg = PipelineConfig(
        source=source,
        box=parse_box(args.box),
        depth_min=lo,
        depth_max=hi,
        map_text=args.map,
        data_path=path,
        delay=args.delay,
        mu=_frac(args.mu),
        schedule_mu=_frac(args.schedule_mu),
        morita_lambda=_frac(args.morita_lambda),
        morita_mu=args.morita_mu,
        output_format=args.fmt,
    )
    cfg.validate()
    return cfg


def render(command: str, report: dict, fmt: str) -> str:
    if fmt == "dot":
        if command == "merge-tree":
            tree = report.get("_tree")
            if tree is None:
                raise InvariantViolation("no merge tree: refinement is not a morphism at some level")
            return emit_dot(tree)
        if command in ("analyze", "morse"):
            return "".join(
                emit_dot(g, name=f"MorseGraph_depth{k}") for k, g in zip(report["depths"], report["_graphs"])
            )
        raise ConfigError(f"--format dot is not available for {command}")
    out = public(report)
    if command == "morse":
        out = {
            "depths": out["depths"],
            "levels": [{k: lv[k] for k in ("depth", "morse", "morse_graph")} for lv in out["levels"]],
        }
    elif command == "mixing":
        out = {"depths": out["depths"], "levels": [{"depth": lv["depth"], "mixing": lv["mixing"]} for lv in out["levels"]]}
    elif command == "barcode":
        out = {"depths": out["depths"], "barcode": out["barcode"]}
    elif command == "merge-tree":
        out = {
            "depths": out["depths"],
            "merge_tree": out["merge_tree"],
            "persistent_morse_sets": out["persistent_morse_sets"],
        }
    return json.dumps(out, indent=2, sort_keys=True) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = config_from_args(args)
        report = run_pipeline(cfg)
        text = render(args.command, report, cfg.output_format)
    except (ConfigError, MapSpecError, MapError) as exc:
        print(f"morse-persist: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (DataError, GridError) as exc:
        print(f"morse-persist: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (InvariantViolation, MorphismError, OpError, DecompositionError, AssertionError) as exc:
        print(f"morse-persist: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
