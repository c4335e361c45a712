"""Command-line front end: ``python -m camotraj <verb> --config scenario.json`` or ``python -m camotraj serve``."""

from __future__ import annotations

import argparse
import asyncio
from collections.abc import Sequence
import json
import logging
from pathlib import Path
import sys

from pydantic import ValidationError
import uvicorn

from camotraj.config import settings
from camotraj.exceptions import CamouflageError, ScenarioConfigError
from camotraj.schemas.scenario import ScenarioConfig
from camotraj.services.scenario_runner import ScenarioResult, load_scenario, run_batch, run_scenario

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2

# Scenario modes each verb accepts; ``ccls`` and ``validate`` take any.
VERB_MODES: dict[str, set[str]] = {
    "solve": {"analytic", "ode", "infinity"},
    "simulate": {"guidance"},
    "energy": {"energy-compare"},
}


def build_parser() -> argparse.ArgumentParser:
    """Return the argument parser for every verb."""

    parser = argparse.ArgumentParser(
        prog="camotraj",
        description="Solve, simulate and export energy-optimal motion camouflage engagements",
    )
    verbs = parser.add_subparsers(dest="verb", required=True)
    helps = {
        "solve": "analytic or numerical k-path plus shadower reconstruction",
        "simulate": "closed-loop MCPN guidance run",
        "energy": "optimal versus straight-line energy comparison",
        "ccls": "export constraint-line segments only",
        "validate": "check scenario files without running them",
    }
    for verb, help_text in helps.items():
        sub = verbs.add_parser(verb, help=help_text)
        sub.add_argument(
            "--config",
            action="append",
            required=True,
            type=Path,
            help="scenario JSON file; repeat for several",
        )
        if verb == "validate":
            continue
        sub.add_argument("--out", type=Path, default=None, help="output directory (default: settings.output_dir)")
        sub.add_argument("--dt", type=float, default=None, help="step override in seconds")
        sub.add_argument("--batch", action="store_true", help="run the scenarios concurrently")
        if verb == "ccls":
            sub.add_argument("--interval", type=float, default=None, help="CCL spacing when the scenario sets none")

    serve = verbs.add_parser("serve", help="run the HTTP service with uvicorn")
    serve.add_argument("--host", default="127.0.0.1", help="bind address")
    serve.add_argument("--port", type=int, default=None, help="listen port (default: settings.app_port)")
    return parser


def _describe_validation(path: Path, exc: ValidationError) -> str:
    """Return one line per violated field."""

    lines = [f"{path}: {exc.error_count()} invalid field(s)"]
    for error in exc.errors():
        location = ".".join(str(part) for part in error["loc"]) or "<config>"
        lines.append(f"  {location}: {error['msg']}")
    return "\n".join(lines)


def _prepare(verb: str, config: ScenarioConfig, interval: float | None) -> ScenarioConfig:
    allowed = VERB_MODES.get(verb)
    if allowed is not None and config.mode not in allowed:
        raise ScenarioConfigError(
            f"scenario {config.name} has mode {config.mode!r}; '{verb}' runs {', '.join(sorted(allowed))}"
        )
    if verb == "ccls":
        if config.mode == "infinity":
            raise ScenarioConfigError(
                "constraint lines at infinity are parallel; export the direction e instead of CCL segments"
            )
        if config.ccl_interval is None:
            if interval is None:
                raise ScenarioConfigError(f"scenario {config.name} sets no ccl_interval; pass --interval")
            config = config.model_copy(update={"ccl_interval": interval})
    return config


def _report(result: ScenarioResult) -> None:
    print(json.dumps(result.summary.to_payload(), indent=2))
    for path in result.files:
        print(f"wrote {path}")


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return its exit status."""

    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=settings.log_level.upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )

    if args.verb == "serve":
        port = settings.app_port if args.port is None else args.port
        logger.info("Serving the scenario API on %s:%s", args.host, port)
        uvicorn.run("camotraj.main:app", host=args.host, port=port, log_level=settings.log_level.lower())
        return EXIT_OK

    configs: list[ScenarioConfig] = []
    invalid = False
    for path in args.config:
        try:
            configs.append(load_scenario(path))
        except ValidationError as exc:
            print(_describe_validation(path, exc), file=sys.stderr)
            invalid = True
        except OSError as exc:
            print(f"{path}: {exc}", file=sys.stderr)
            return EXIT_FAILURE
    if invalid:
        return EXIT_INVALID

    if args.verb == "validate":
        for config in configs:
            print(f"{config.name}: ok ({config.mode})")
        return EXIT_OK

    try:
        configs = [_prepare(args.verb, config, getattr(args, "interval", None)) for config in configs]
    except CamouflageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INVALID

    ccls_only = args.verb == "ccls"
    if args.batch:
        try:
            outcomes = asyncio.run(run_batch(configs, output_dir=args.out, dt=args.dt, ccls_only=ccls_only))
        except CamouflageError as exc:
            print(str(exc), file=sys.stderr)
            return EXIT_INVALID
    else:
        outcomes = []
        for config in configs:
            try:
                outcomes.append(run_scenario(config, output_dir=args.out, dt=args.dt, ccls_only=ccls_only))
            except Exception as exc:  # noqa: BLE001
                outcomes.append(exc)

    status = EXIT_OK
    for config, outcome in zip(configs, outcomes):
        if isinstance(outcome, CamouflageError):
            print(f"scenario {config.name}: {outcome}", file=sys.stderr)
            status = max(status, EXIT_INVALID)
        elif isinstance(outcome, BaseException):
            logger.error("Scenario %s crashed", config.name, exc_info=outcome)
            print(f"scenario {config.name}: unexpected error: {outcome}", file=sys.stderr)
            status = EXIT_FAILURE if status == EXIT_OK else status
        else:
            _report(outcome)
    return status
