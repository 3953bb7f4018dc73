"""Experiment configuration, result records and their serialization."""
from __future__ import annotations

import configparser
import csv
import dataclasses
import hashlib
import io
import json
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Any

SCHEMA_VERSION = "1"
COMMANDS = ("prepare", "mermin", "lhv", "noise-sweep", "nmin")
PIPELINES = ("ideal", "bec", "cavity")
STATES = ("ghz", "product", "xplus-ghz")
FORMATS = ("json", "csv")

# per-pipeline upper limits on N (dense 2^N or 3^N vectors)
MAX_N = {"ideal": 14, "bec": 12, "cavity": 8}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    command: str
    n: int = 3
    variant: str = "auto"
    pipeline: str = "ideal"
    state: str = "ghz"
    realization: str = "bec"
    shots: int | None = None
    seed: int = 0
    depolarizing_p: float = 0.0
    readout_flip_m: float = 0.0
    detector_efficiency_eta: float = 1.0
    noise_axis: str = "readout_flip_m"
    grid: str = "0,0.02,0.04,0.06,0.08,0.1,0.12,0.14,0.16,0.18,0.2"
    dist: str = "3:1,4:1,5:1"
    mode: str = "constructive"
    # execution details, not echoed
    threads: int = field(default=1, metadata={"echo": False})
    out: str | None = field(default=None, metadata={"echo": False})
    format: str = field(default="json", metadata={"echo": False})

    def echo(self) -> dict:
        return {f.name: getattr(self, f.name) for f in dataclasses.fields(self)
                if f.metadata.get("echo", True)}

    def resolved_variant(self) -> str:
        if self.variant != "auto":
            return self.variant
        return "even-y" if self.pipeline == "cavity" else "odd-y"

    def grid_values(self) -> list[float]:
        try:
            return [float(x) for x in self.grid.split(",") if x.strip()]
        except ValueError:
            raise ConfigError(f"grid must be a comma-separated list of numbers, got {self.grid!r}") from None

    def dist_weights(self) -> dict[int, float]:
        """``"3:1,4:2"`` -> ``{3: 1.0, 4: 2.0}``; a bare ``"3,4"`` means equal weights."""
        out: dict[int, float] = {}
        try:
            for item in self.dist.split(","):
                item = item.strip()
                if not item:
                    continue
                n, _, w = item.partition(":")
                out[int(n)] = float(w) if w else 1.0
        except ValueError:
            raise ConfigError(f"dist must look like '3:1,4:1,5:1', got {self.dist!r}") from None
        if not out:
            raise ConfigError("dist is empty")
        return out

    def validate(self) -> "ExperimentConfig":
        """Check every field against the owning module's preconditions."""
        def need(cond, msg):
            if not cond:
                raise ConfigError(msg)

        need(self.command in COMMANDS, f"unknown command {self.command!r}")
        need(self.pipeline in PIPELINES, f"pipeline must be one of {PIPELINES}")
        need(self.state in STATES, f"state must be one of {STATES}")
        need(self.variant in ("auto", "odd-y", "even-y"), "variant must be odd-y or even-y")
        need(self.realization in ("bec", "cavity"), "realization must be bec or cavity")
        need(self.format in FORMATS, f"format must be one of {FORMATS}")
        need(self.seed >= 0, "seed must be non-negative")
        need(self.threads >= 1, "threads must be at least 1")
        need(self.shots is None or self.shots >= 0, "shots must be non-negative")
        need(0 <= self.depolarizing_p <= 1, "depolarizing_p must lie in [0, 1]")
        need(0 <= self.readout_flip_m <= 1, "readout_flip_m must lie in [0, 1]")
        need(0 < self.detector_efficiency_eta <= 1, "detector_efficiency_eta must lie in (0, 1]")
        cmd = self.command
        if cmd == "prepare":
            lo = 2 if self.pipeline == "cavity" else 1
            need(lo <= self.n <= MAX_N[self.pipeline],
                 f"{self.pipeline} pipeline supports {lo} <= n <= {MAX_N[self.pipeline]}, got {self.n}")
        elif cmd == "mermin":
            need(2 <= self.n <= MAX_N[self.pipeline],
                 f"mermin with the {self.pipeline} pipeline supports 2 <= n <= {MAX_N[self.pipeline]}, got {self.n}")
        elif cmd == "lhv":
            need(1 <= self.n <= 12, f"lhv enumeration supports 1 <= n <= 12, got {self.n}")
        elif cmd == "noise-sweep":
            need(2 <= self.n <= 10, f"noise-sweep supports 2 <= n <= 10, got {self.n}")
            need(self.noise_axis in ("depolarizing_p", "readout_flip_m"),
                 "noise_axis must be depolarizing_p or readout_flip_m")
            grid = self.grid_values()
            need(grid, "grid is empty")
            need(all(0 <= g <= 1 for g in grid), "grid values must lie in [0, 1]")
            need(self.shots is None or self.shots >= 1, "noise-sweep needs at least one shot")
        elif cmd == "nmin":
            w = self.dist_weights()
            need(min(w) >= 2, "dist atom numbers must be at least 2")
            need(max(w) <= 12, "dist atom numbers must be at most 12")
            need(all(v >= 0 for v in w.values()) and sum(w.values()) > 0, "dist weights must be non-negative")
            need(self.mode in ("constructive", "rejection"), "mode must be constructive or rejection")
            need(self.shots is None or self.shots >= 1, "nmin needs at least one run per term")
        return self


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}


def _coerce(name: str, value: Any) -> Any:
    if name not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key {name!r}")
    if value is None:
        return None
    kind = _FIELD_TYPES[name]
    try:
        if kind.startswith("int"):
            if isinstance(value, str) and value.strip().lower() in ("", "none"):
                return None
            if isinstance(value, float) and not value.is_integer():
                raise ValueError
            return int(value)
        if kind.startswith("float"):
            return float(value)
    except (TypeError, ValueError):
        raise ConfigError(f"config key {name!r} has invalid value {value!r}") from None
    return str(value)


def load_config_file(path: str | Path) -> dict:
    """Read a JSON file (a bare mapping or a result record's ``config``) or an INI file.

    INI files use an ``[experiment]`` section with ``key = value`` lines.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    if path.suffix.lower() == ".json":
        data = json.loads(text)
        if isinstance(data, dict) and isinstance(data.get("config"), dict):
            data = data["config"]
        if not isinstance(data, dict):
            raise ConfigError(f"{path} does not hold a JSON object")
        return dict(data)
    parser = configparser.ConfigParser()
    parser.read_string(text)
    section = "experiment" if parser.has_section("experiment") else parser.default_section
    return dict(parser[section])


def build_config(command: str | None, file_values: dict | None, overrides: dict) -> ExperimentConfig:
    """Defaults, then file values, then command-line overrides."""
    merged: dict[str, Any] = {}
    for src in (file_values or {}, overrides):
        for k, v in src.items():
            k = k.replace("-", "_")
            merged[k] = _coerce(k, v)
    if command is not None:
        merged["command"] = command
    if "command" not in merged:
        raise ConfigError("no command given")
    return ExperimentConfig(**merged).validate()


def experiment_id(config_echo: dict) -> str:
    blob = json.dumps(config_echo, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


@dataclass
class ResultRecord:
    experiment_id: str
    command: str
    config: dict
    seed: int
    status: str
    terms: list[dict]
    f_values: dict
    bound_report: dict | None
    details: dict
    wall_clock_s: float = 0.0
    schema_version: str = SCHEMA_VERSION

    def to_dict(self) -> dict:
        return _clean(dataclasses.asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2, allow_nan=False) + "\n"


def _clean(obj):
    """Plain Python types only; numpy scalars become int/float."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def format_number(x) -> str:
    """Shortest repr that round-trips the double exactly."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def write_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([format_number(_clean(r.get(c))) if r.get(c) is not None else "" for c in columns])
    return buf.getvalue()


def load_schema() -> dict:
    return json.loads(resources.files("merminsim").joinpath("schema/result_record.schema.json")
                      .read_text(encoding="utf-8"))
