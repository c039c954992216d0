"""Command-line entry point: ``kcqlab <kind> [--config file.json] [--field value ...]``.

Every config field of a kind is also a flag (``photons`` -> ``--photons``,
``known_length`` -> ``--known-length``). Flag values are read as JSON when
possible (``--lengths "[0, 4, 8]"``, ``--quantum false``) and as plain strings
otherwise. Flags override values from the config file.

Exit codes: 0 success, 2 validation error, 3 budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from .config import CONFIG_MODELS, parse_config
from .entropy import BudgetExceeded
from .experiments import run

EXIT_VALIDATION = 2
EXIT_BUDGET = 3


def _flag_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kcqlab", description="Keyed coherent-state cipher laboratory.")
    sub = parser.add_subparsers(dest="kind", required=True, metavar="kind")
    for kind, model in CONFIG_MODELS.items():
        p = sub.add_parser(kind, help=f"run the {kind} experiment")
        p.add_argument("--config", type=Path, help="JSON config document")
        for name, info in model.model_fields.items():
            if name == "kind":
                continue
            default = info.default if info.default_factory is None else info.default_factory()
            p.add_argument(f"--{name.replace('_', '-')}", dest=name, type=_flag_value, default=argparse.SUPPRESS,
                           help=f"default: {default!r}")
    return parser


def _error(msg: str) -> None:
    print(f"kcqlab: error: {msg}", file=sys.stderr)


def _format_validation(err: ValidationError) -> str:
    parts = []
    for e in err.errors():
        path = ".".join(str(x) for x in e["loc"]) or "<root>"
        parts.append(f"{path}: {e['msg']}")
    return "; ".join(parts)


def main(argv: list[str] | None = None) -> int:
    args = vars(build_parser().parse_args(argv))
    kind = args.pop("kind")
    config_path = args.pop("config", None)
    data: dict = {}
    try:
        if config_path is not None:
            data = json.loads(Path(config_path).read_text())
            if not isinstance(data, dict):
                raise ValueError("config: document must be a JSON object")
            if data.get("kind", kind) != kind:
                raise ValueError(f"kind: config file is for {data['kind']!r}, command is {kind!r}")
        data.update(args)
        data["kind"] = kind
        cfg = parse_config(data)
    except ValidationError as e:
        _error(_format_validation(e))
        return EXIT_VALIDATION
    except (ValueError, OSError) as e:
        _error(str(e))
        return EXIT_VALIDATION

    try:
        record = run(cfg)
    except BudgetExceeded as e:
        _error(str(e))
        return EXIT_BUDGET
    except ValueError as e:
        _error(str(e))
        return EXIT_VALIDATION

    text = record.render(cfg.format)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
