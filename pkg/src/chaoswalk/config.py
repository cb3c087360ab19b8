"""Experiment configuration: a strict dotted-key text format.

One ``key = value`` assignment per line; blank lines and lines starting
with ``#`` are ignored.  Keys are validated against the schema of the
declared experiment kind: unknown keys, duplicate keys, keys from a
different kind and badly typed values are all hard errors that name the
offending key and line.  Values never depend on the environment.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

KINDS = ("walk", "portrait", "fidelity", "entropy", "spectra", "td_sweep", "figure")

FIGURE_NAMES = (
    "fig1",
    "fig2a",
    "fig2b",
    "fig2c",
    "fig3a",
    "fig3b",
    "fig4",
    "fig5a",
    "fig5b",
    "fig5c",
    "fig6a",
    "fig6b",
    "fig6c",
    "fig7a",
    "fig7b",
)


class ConfigError(ValueError):
    """A configuration file violates the schema."""


def _parse_int(raw: str) -> int:
    try:
        return int(raw, 10)
    except ValueError:
        raise ConfigError(f"expected an integer, got {raw!r}") from None


def _parse_float(raw: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"expected a number, got {raw!r}") from None


def _parse_int_list(raw: str) -> tuple[int, ...]:
    items = [s.strip() for s in raw.split(",") if s.strip()]
    if not items:
        raise ConfigError(f"expected a comma-separated integer list, got {raw!r}")
    return tuple(_parse_int(s) for s in items)


def _parse_str(raw: str) -> str:
    return raw


def _parse_formats(raw: str) -> tuple[str, ...]:
    items = tuple(s.strip() for s in raw.split(",") if s.strip())
    for item in items:
        if item not in ("csv", "cmx"):
            raise ConfigError(f"unknown output format {item!r} (know csv, cmx)")
    return items or ("csv",)


@dataclass(frozen=True)
class Field:
    parse: Any
    required: bool = False
    default: Any = None


_COIN_COMMON = {
    "coin.type": Field(_parse_str, required=True),
    "coin.m": Field(_parse_int, required=True),
    "coin.g": Field(_parse_float),
    "coin.tau": Field(_parse_float, default=1.0),
    "coin.seed": Field(_parse_int),
    "coin.path": Field(_parse_str),
}

_LATTICE_RUN = {
    "lattice.n": Field(_parse_int, required=True),
    "initial.coin_index": Field(_parse_int, default=0),
    "initial.site": Field(_parse_int, default=0),
    "run.t_max": Field(_parse_int, required=True),
    "run.sample_every": Field(_parse_int, default=1),
}

_OUTPUTS = {
    "outputs.dir": Field(_parse_str, required=True),
    "outputs.formats": Field(_parse_formats, default=("csv",)),
}

SCHEMAS: dict[str, dict[str, Field]] = {
    "walk": {
        **_COIN_COMMON,
        **_LATTICE_RUN,
        **_OUTPUTS,
        # Full site profiles can be bulky; by default they are written at
        # every sample time, but long runs may thin them independently.
        "run.snapshot_every": Field(_parse_int),
    },
    "fidelity": {
        **_COIN_COMMON,
        **_LATTICE_RUN,
        **_OUTPUTS,
        "fidelity.deltas": Field(_parse_int_list, default=(1, 3, 5, 7, 9)),
    },
    "entropy": {**_COIN_COMMON, **_LATTICE_RUN, **_OUTPUTS},
    "spectra": {
        **_COIN_COMMON,
        **_LATTICE_RUN,
        **_OUTPUTS,
        "spectra.window_start": Field(_parse_int, required=True),
        "spectra.window_end": Field(_parse_int, required=True),
    },
    "portrait": {
        **_OUTPUTS,
        "portrait.g": Field(_parse_float, required=True),
        "portrait.tau": Field(_parse_float, default=1.0),
        "portrait.orbits": Field(_parse_int, default=100),
        "portrait.steps": Field(_parse_int, default=1000),
        "portrait.seed": Field(_parse_int, default=0),
    },
    "td_sweep": {
        **_OUTPUTS,
        "coin.type": Field(_parse_str, required=True),
        "td.m_values": Field(_parse_int_list, required=True),
        "td.seeds_per_m": Field(_parse_int, default=5),
        "td.master_seed": Field(_parse_int, default=7),
    },
    "figure": {
        **_OUTPUTS,
        "figure.name": Field(_parse_str, required=True),
        "figure.seed": Field(_parse_int, default=7),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """A parsed, schema-validated experiment description."""

    kind: str
    values: dict[str, Any]
    text: str = field(repr=False, default="")

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def get(self, key: str, default: Any = None) -> Any:
        return self.values.get(key, default)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate configuration text (see module docstring)."""
    assignments: dict[str, str] = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.strip()
        if not key or not raw:
            raise ConfigError(f"line {lineno}: empty key or value in {line!r}")
        if key in assignments:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        assignments[key] = raw

    kind = assignments.pop("experiment.kind", None)
    if kind is None:
        raise ConfigError("missing required key 'experiment.kind'")
    if kind not in SCHEMAS:
        raise ConfigError(f"unknown experiment.kind {kind!r} (know {', '.join(KINDS)})")
    schema = SCHEMAS[kind]

    values: dict[str, Any] = {}
    for key, raw in assignments.items():
        if key not in schema:
            raise ConfigError(f"unknown key {key!r} for experiment.kind = {kind}")
        try:
            values[key] = schema[key].parse(raw)
        except ConfigError as exc:
            raise ConfigError(f"key {key!r}: {exc}") from None
    for key, spec in schema.items():
        if key not in values:
            if spec.required:
                raise ConfigError(f"missing required key {key!r} for kind {kind}")
            values[key] = spec.default

    config = ExperimentConfig(kind=kind, values=values, text=text)
    _validate_semantics(config)
    return config


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ConfigError(message)


def _validate_semantics(config: ExperimentConfig) -> None:
    kind = config.kind
    v = config.values
    if "coin.type" in v and v["coin.type"] is not None:
        coin_type = v["coin.type"]
        _require(
            coin_type in ("harper", "cue", "custom"),
            f"coin.type must be harper, cue or custom, got {coin_type!r}",
        )
        if kind == "td_sweep":
            _require(coin_type == "cue", "td_sweep needs coin.type = cue (seed ensembles)")
        else:
            m = v["coin.m"]
            _require(m >= 2 and m % 2 == 0, f"coin.m must be even and >= 2, got {m}")
            if coin_type == "harper":
                _require(v.get("coin.g") is not None, "harper coin needs coin.g")
                _require(v.get("coin.seed") is None, "coin.seed is only for coin.type = cue")
                _require(v.get("coin.path") is None, "coin.path is only for coin.type = custom")
            elif coin_type == "cue":
                _require(v.get("coin.seed") is not None, "cue coin needs coin.seed")
                _require(v.get("coin.g") is None, "coin.g is only for coin.type = harper")
                _require(v.get("coin.path") is None, "coin.path is only for coin.type = custom")
            else:
                _require(v.get("coin.path") is not None, "custom coin needs coin.path")
                _require(v.get("coin.g") is None, "coin.g is only for coin.type = harper")
                _require(v.get("coin.seed") is None, "coin.seed is only for coin.type = cue")
    if "lattice.n" in v:
        _require(v["lattice.n"] >= 2, f"lattice.n must be >= 2, got {v['lattice.n']}")
        _require(v["run.t_max"] >= 0, "run.t_max must be non-negative")
        _require(v["run.sample_every"] >= 1, "run.sample_every must be >= 1")
    if kind == "walk" and v.get("run.snapshot_every") is not None:
        _require(v["run.snapshot_every"] >= 1, "run.snapshot_every must be >= 1")
    if kind == "spectra":
        _require(
            0 <= v["spectra.window_start"] <= v["spectra.window_end"] <= v["run.t_max"],
            "need 0 <= spectra.window_start <= spectra.window_end <= run.t_max",
        )
    if kind == "portrait":
        _require(v["portrait.orbits"] >= 1, "portrait.orbits must be >= 1")
        _require(v["portrait.steps"] >= 1, "portrait.steps must be >= 1")
    if kind == "td_sweep":
        for m in v["td.m_values"]:
            _require(m >= 2 and m % 2 == 0, f"td.m_values entries must be even, got {m}")
        _require(v["td.seeds_per_m"] >= 1, "td.seeds_per_m must be >= 1")
    if kind == "figure":
        _require(
            v["figure.name"] in FIGURE_NAMES,
            f"unknown figure.name {v['figure.name']!r}",
        )


def load_config(path) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())
