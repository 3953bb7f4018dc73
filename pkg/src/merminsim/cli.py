"""``merminsim`` command-line entry point.

Settings come from built-in defaults, then an optional ``--config`` file
(INI ``[experiment]`` section or JSON), then explicit flags; flags win.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .experiments import csv_table, run
from .mermin import CorrelatorError
from .noise import AllShotsDiscardedError
from .qstate import StateError
from .records import COMMANDS, FORMATS, PIPELINES, STATES, ConfigError, build_config, load_config_file, write_csv


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="INI or JSON file with experiment settings")
    common.add_argument("--n", type=int, help="number of particles")
    common.add_argument("--variant", choices=("odd-y", "even-y", "auto"))
    common.add_argument("--pipeline", choices=PIPELINES)
    common.add_argument("--shots", type=int, help="shots (or runs) per correlation term")
    common.add_argument("--seed", type=int)
    common.add_argument("--threads", type=int)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--format", choices=FORMATS)
    common.add_argument("--realization", choices=("bec", "cavity"), help="readout hardware")
    common.add_argument("--depolarizing-p", type=float, dest="depolarizing_p")
    common.add_argument("--readout-flip", type=float, dest="readout_flip_m")
    common.add_argument("--efficiency", type=float, dest="detector_efficiency_eta")

    parser = argparse.ArgumentParser(prog="merminsim", description="GHZ preparation and Mermin-inequality tests.")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.add_parser("prepare", parents=[common], help="prepare a GHZ state and report its fidelity")
    p = sub.add_parser("mermin", parents=[common], help="evaluate or sample the Mermin correlator")
    p.add_argument("--state", choices=STATES)
    sub.add_parser("lhv", parents=[common], help="enumerate deterministic local strategies")
    p = sub.add_parser("noise-sweep", parents=[common], help="sampled correlator along one noise axis")
    p.add_argument("--noise-axis", choices=("depolarizing_p", "readout_flip_m"), dest="noise_axis")
    p.add_argument("--grid", help="comma-separated noise levels")
    p = sub.add_parser("nmin", parents=[common], help="correlator under fluctuating atom number")
    p.add_argument("--dist", help="atom-number weights, e.g. 3:1,4:1,5:1")
    p.add_argument("--mode", choices=("constructive", "rejection"))
    return parser


def _fail(msg: str, code: int = 2) -> int:
    print(f"merminsim: error: {' '.join(str(msg).split())}", file=sys.stderr)
    return code


def main(argv: list[str] | None = None) -> int:
    # flags not given on the command line stay out, so file values survive
    args = {k: v for k, v in vars(build_parser().parse_args(argv)).items() if v is not None}
    command = args.pop("command", None)
    if command is None:
        return _fail(f"choose a command: {', '.join(COMMANDS)}")
    config_path = args.pop("config", None)
    try:
        file_values = load_config_file(config_path) if config_path else None
        cfg = build_config(command, file_values, args)
        if file_values and file_values.get("command", command) != command:
            raise ConfigError(f"config file is for {file_values['command']!r}, not {command!r}")
    except (ConfigError, OSError, json.JSONDecodeError, ValueError) as exc:
        return _fail(exc)
    try:
        record = run(cfg)
    except (StateError, CorrelatorError, AllShotsDiscardedError, ValueError) as exc:
        return _fail(exc, 1)

    if cfg.format == "json":
        text = record.to_json()
    else:
        text = write_csv(*csv_table(record))
    if cfg.out:
        Path(cfg.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if record.status != "ok":
        return _fail(f"{command} finished with status {record.status!r}", 1)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
