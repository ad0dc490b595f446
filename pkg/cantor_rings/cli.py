"""Command-line entry point: JSON in, JSON out, exit codes for shell pipelines."""

from __future__ import annotations

import argparse
import json
import logging
import math
from pathlib import Path
import sys

import colorlog
import numpy as np

from . import __version__
from .abstract_map import AbstractMap, load_map, preset_map
from .cantor_exception import (
    CantorException,
    ConvergenceError,
    EscapedError,
    NotBracketed,
    ResolutionError,
    SpecError,
)
from .certify import TrapSpec, certify
from .config_flow import RunConfig, resolve
from .const import DOMAIN, PRESETS, ExitCode, RenderMode, TrapMode, Verdict
from .critical import oracle_all_critical, predicted, refine
from .dynamics import itinerary, locate_component, parabolic_orbit
from .family import FamilyMap
from .helper import complex_to_dict, json_float, parse_degrees
from .parabolic import (
    ParabolicMap,
    PLambdaMap,
    PLambdaSpec,
    PnMap,
    PnSpec,
    parabolic_critical,
)
from .params import audit_budget, synth, synth_uniform
from .render import RenderJob, render, write_image

_LOGGER: logging.Logger = logging.getLogger(__name__)

VERDICT_CODES = {
    Verdict.CERTIFIED: ExitCode.OK,
    Verdict.FAILED: ExitCode.FAILED,
    Verdict.INCONCLUSIVE: ExitCode.INCONCLUSIVE,
}

# Output sections of the parabolic command, in payload order
PARABOLIC_SECTIONS = ("fixed_check", "critical", "certify")


def setup_logging(config: RunConfig) -> None:
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(
        colorlog.ColoredFormatter(
            "%(log_color)s%(levelname)-8s%(reset)s %(name)s: %(message)s"
        )
    )
    root = logging.getLogger()
    root.handlers[:] = [handler]
    root.setLevel(config.default_level.upper())
    for name, level in config.log_levels.items():
        logging.getLogger(name).setLevel(level.upper())
    if config.verbose:
        logging.getLogger(DOMAIN).setLevel(logging.DEBUG)


def parse_complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", "").replace("i", "j"))
    except ValueError as ex:
        raise SpecError(f"Invalid complex number '{text}'", field="z") from ex


def emit(config: RunConfig, payload) -> None:
    text = json.dumps(payload, indent=2)
    if config.out and config.command != "render":
        Path(config.out).write_text(text + "\n", "utf-8")
        _LOGGER.info("Wrote %s", config.out)
    else:
        sys.stdout.write(text + "\n")


def read_map(config: RunConfig) -> AbstractMap:
    if config.preset:
        amap = preset_map(config.preset)
    else:
        try:
            if config.spec:
                text = Path(config.spec).read_text("utf-8")
            else:
                text = sys.stdin.read()
            obj = json.loads(text)
        except (OSError, json.JSONDecodeError) as ex:
            raise SpecError(f"Could not read spec JSON: {ex}", field="/") from ex
        amap = load_map(obj)
    if isinstance(amap, ParabolicMap):
        amap.exclusion = config.exclusion
    return amap


def _certify(config: RunConfig, amap: AbstractMap):
    options = config.options
    traps = None
    if options.get("s_trap") or options.get("outer_trap"):
        traps = TrapSpec(options.get("s_trap"), options.get("outer_trap"))
    return certify(
        amap,
        traps=traps,
        mode=TrapMode(options.get("traps", TrapMode.AUTO)),
        samples=config.samples,
        circles=config.ring_circles,
        threads=config.threads,
    )


def cmd_synth(config: RunConfig) -> int:
    options = config.options
    degrees = parse_degrees(options["degrees"])
    if options.get("uniform") is not None:
        spec = synth_uniform(len(degrees), options["uniform"])
        emit(config, {"spec": spec.to_json(), "budget": None})
        return ExitCode.OK
    spec, budget = synth(options["p"], degrees, options.get("shrink", 1.0))
    emit(config, {"spec": spec.to_json(), "budget": budget.as_dict()})
    return ExitCode.OK


def cmd_audit(config: RunConfig) -> int:
    amap = read_map(config)
    if not isinstance(amap, FamilyMap):
        raise SpecError("audit needs a hyperbolic family spec", field="/kind")
    report = audit_budget(amap.spec, amap.fitted_budget())
    emit(
        config,
        {
            "budget": amap.fitted_budget().as_dict(),
            "entries": report.as_list(),
            "pass": report.passed,
        },
    )
    return ExitCode.OK if report.passed else ExitCode.FAILED


def cmd_critical(config: RunConfig) -> int:
    amap = read_map(config)
    if isinstance(amap, ParabolicMap):
        emit(config, parabolic_critical(amap, config.threads, config.newton_tol).as_dict())
        return ExitCode.OK
    clusters = refine(
        amap.spec,
        predicted(amap.spec, amap.fitted_budget()),
        config.threads,
        config.newton_tol,
    )
    payload = {"clusters": [cluster.as_dict() for cluster in clusters]}
    if config.options.get("oracle"):
        payload["oracle"] = oracle_all_critical(amap.spec).as_dict()
    emit(config, payload)
    return ExitCode.OK


def cmd_certify(config: RunConfig) -> int:
    report = _certify(config, read_map(config))
    emit(config, report.as_dict())
    return VERDICT_CODES[report.verdict]


def _random_points(config: RunConfig, layout, count: int) -> np.ndarray:
    rng = config.rng()
    lo = math.log(abs(layout.inner.center) + layout.inner.radius)
    hi = math.log(layout.outer_radius)
    radii = np.exp(rng.uniform(lo, hi, count))
    return radii * np.exp(2j * math.pi * rng.uniform(0.0, 1.0, count))


def cmd_itinerary(config: RunConfig) -> int:
    options = config.options
    amap = read_map(config)
    report = _certify(config, amap)
    if options.get("z"):
        points = [parse_complex(options["z"])]
    else:
        points = list(_random_points(config, report.layout, options.get("random", 1)))
    results = []
    for z in points:
        entry = {"z": complex_to_dict(complex(z))}
        try:
            symbols = itinerary(amap, report, z, options.get("length", 8))
            entry["itinerary"] = "".join(map(str, symbols))
        except EscapedError as ex:
            entry["itinerary"] = "".join(map(str, ex.symbols))
            entry["escaped"] = ex.step
        results.append(entry)
    emit(config, {"verdict": report.verdict.value, "orbits": results})
    return ExitCode.OK


def cmd_locate(config: RunConfig) -> int:
    options = config.options
    amap = read_map(config)
    report = _certify(config, amap)
    prefix = [int(symbol) for symbol in options["prefix"]]
    try:
        lo, hi = locate_component(amap, report, prefix, options.get("angle", 0.0))
    except NotBracketed as ex:
        _LOGGER.error(ex.message)
        emit(config, {"prefix": options["prefix"], "error": ex.message})
        return ExitCode.FAILED
    emit(
        config,
        {"prefix": options["prefix"], "interval": [json_float(lo), json_float(hi)]},
    )
    return ExitCode.OK


def cmd_parabolic(config: RunConfig) -> int:
    options = config.options
    if options["family"] == "plambda":
        spec = PLambdaSpec(options["m"], options["n"], parse_complex(options["lam"]))
        amap = PLambdaMap(spec, config.exclusion)
    else:
        amap = PnMap(PnSpec.from_scale(options["n"], options["s"]), config.exclusion)
    sections = [name for name in PARABOLIC_SECTIONS if options.get(name)]
    sections = sections or list(PARABOLIC_SECTIONS)
    payload = {"spec": amap.to_json()}
    fixed = amap.fixed_check()
    code = ExitCode.OK
    if "fixed_check" in sections:
        payload["fixed_point"] = fixed.as_dict()
        if not fixed.check().passed:
            code = ExitCode.FAILED
    if "critical" in sections:
        critical = parabolic_critical(amap, config.threads, config.newton_tol)
        payload["critical"] = critical.as_dict()
    if "certify" not in sections:
        emit(config, payload)
        return code
    report = certify(
        amap,
        mode=TrapMode.LEMMA,
        samples=config.samples,
        circles=config.ring_circles,
        threads=config.threads,
        extra_checks=[fixed.check()],
    )
    payload["report"] = report.as_dict()
    if isinstance(amap, PLambdaMap) and report.clusters:
        start = report.clusters[0].points[0]
        payload["parabolic_orbit"] = {
            "start": complex_to_dict(start),
            "steps": parabolic_orbit(
                amap, start, amap.fixed_point, 0.1, max_iter=config.locate_max_iter
            ),
        }
    emit(config, payload)
    return VERDICT_CODES[report.verdict]


def cmd_render(config: RunConfig) -> int:
    options = config.options
    if not config.out:
        raise SpecError("render needs --out FILE", field="out")
    amap = read_map(config)
    report = _certify(config, amap)
    if not report.certified and not options.get("force"):
        _LOGGER.error("Refusing to render a %s map; pass --force", report.verdict.value)
        emit(config, report.as_dict())
        return VERDICT_CODES[report.verdict]
    viewport = {"center": 0j, "half_width": 1.2 * report.layout.outer_radius}
    if config.preset:
        viewport = next(p["viewport"] for p in PRESETS if p["id"] == config.preset)
    center = options.get("center")
    job = RenderJob(
        amap,
        report.layout,
        parse_complex(center) if center else complex(viewport["center"]),
        options.get("halfwidth") or viewport["half_width"],
        options.get("px", 512),
        options.get("px", 512),
        RenderMode(options.get("mode", RenderMode.BASIN)),
        options.get("depth", 0),
        config.max_iter,
    )
    write_image(config.out, render(job, config.threads))
    return ExitCode.OK


def cmd_presets(config: RunConfig) -> int:
    listing = []
    for preset in PRESETS:
        amap = preset_map(preset["id"])
        listing.append(
            {
                "id": preset["id"],
                "kind": amap.kind.value,
                "spec": amap.to_json(),
                "signature": amap.signature().as_dict(),
            }
        )
    emit(config, listing)
    return ExitCode.OK


COMMANDS = {
    "synth": cmd_synth,
    "audit": cmd_audit,
    "critical": cmd_critical,
    "certify": cmd_certify,
    "itinerary": cmd_itinerary,
    "locate": cmd_locate,
    "parabolic": cmd_parabolic,
    "render": cmd_render,
    "presets": cmd_presets,
}


def _add_input(parser: argparse.ArgumentParser) -> None:
    group = parser.add_mutually_exclusive_group()
    group.add_argument("--preset", help="named example map")
    group.add_argument("--spec", help="spec JSON file (default: stdin)")


def _add_sections(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group(
        "sections", "any combination; all three when none is given"
    )
    group.add_argument("--certify", action="store_true")
    group.add_argument("--critical", action="store_true")
    group.add_argument("--fixed-check", action="store_true", dest="fixed_check")


def _add_traps(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--traps", choices=[mode.value for mode in TrapMode], default=TrapMode.AUTO.value
    )
    parser.add_argument("--s-trap", type=float, dest="s_trap")
    parser.add_argument("--outer-trap", type=float, dest="outer_trap")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cantor-rings", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--config", help="configuration.yaml path")
    parser.add_argument("--threads", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--samples", type=int)
    parser.add_argument("--max-iter", type=int, dest="max_iter")
    parser.add_argument("-o", "--out")
    parser.add_argument("-v", "--verbose", action="store_true", default=None)
    commands = parser.add_subparsers(dest="command", required=True)

    synth_parser = commands.add_parser("synth", help="parameters from the budget")
    synth_parser.add_argument("-p", type=int, choices=[0, 1], default=1)
    synth_parser.add_argument("-d", "--degrees", required=True, help="e.g. 5,5,5,5")
    synth_parser.add_argument("--shrink", type=float, default=1.0)
    synth_parser.add_argument("--uniform", type=float, metavar="S")

    for name, text in (
        ("audit", "check the budget inequalities"),
        ("critical", "refine the free critical points"),
        ("certify", "certify the Cantor-circle structure"),
    ):
        sub = commands.add_parser(name, help=text)
        _add_input(sub)
        if name == "critical":
            sub.add_argument("--oracle", action="store_true")
        if name == "certify":
            _add_traps(sub)

    itinerary_parser = commands.add_parser("itinerary", help="band symbols of orbits")
    _add_input(itinerary_parser)
    _add_traps(itinerary_parser)
    itinerary_parser.add_argument("--z")
    itinerary_parser.add_argument("--random", type=int, default=1)
    itinerary_parser.add_argument("--length", type=int, default=8)

    locate_parser = commands.add_parser("locate", help="radial interval of a prefix")
    _add_input(locate_parser)
    _add_traps(locate_parser)
    locate_parser.add_argument("--prefix", required=True)
    locate_parser.add_argument("--angle", type=float, default=0.0)

    parabolic_parser = commands.add_parser("parabolic", help="P_lambda and P_n maps")
    families = parabolic_parser.add_subparsers(dest="family", required=True)
    plambda_parser = families.add_parser("plambda")
    plambda_parser.add_argument("--m", type=int, default=3)
    plambda_parser.add_argument("--n", type=int, default=2)
    plambda_parser.add_argument("--lam", default="1e-10")
    _add_sections(plambda_parser)
    pn_parser = families.add_parser("pn")
    pn_parser.add_argument("--n", type=int, default=3)
    pn_parser.add_argument("--s", type=float)
    _add_sections(pn_parser)

    render_parser = commands.add_parser("render", help="basin images")
    _add_input(render_parser)
    _add_traps(render_parser)
    render_parser.add_argument("--center")
    render_parser.add_argument("--halfwidth", type=float)
    render_parser.add_argument("--px", type=int, default=512)
    render_parser.add_argument(
        "--mode", choices=[mode.value for mode in RenderMode], default="basin"
    )
    render_parser.add_argument("--depth", type=int, default=0)
    render_parser.add_argument("--force", action="store_true")
    render_parser.add_argument("--out", default=argparse.SUPPRESS)

    commands.add_parser("presets", help="list the named example maps")
    return parser


def run(config: RunConfig) -> int:
    try:
        return int(COMMANDS[config.command](config))
    except SpecError as ex:
        _LOGGER.error("%s (at %s)", ex.message, ex.field)
        sys.stderr.write(json.dumps({"error": ex.message, "field": ex.field}) + "\n")
        return ExitCode.USAGE
    except (ResolutionError, ConvergenceError) as ex:
        _LOGGER.error(ex.message)
        return ExitCode.INCONCLUSIVE
    except CantorException as ex:
        _LOGGER.error(ex.message)
        sys.stderr.write(json.dumps({"error": ex.message}) + "\n")
        return ExitCode.USAGE


def main(argv=None) -> int:
    args = vars(build_parser().parse_args(argv))
    config_path = args.pop("config")
    if args.get("command") == "parabolic" and args.get("family") == "pn" and args["s"] is None:
        args["s"] = 1 / (25 * args["n"] ** 2)
    try:
        config = resolve(args, config_path)
    except SpecError as ex:
        sys.stderr.write(json.dumps({"error": ex.message, "field": ex.field}) + "\n")
        return ExitCode.USAGE
    setup_logging(config)
    return run(config)
