"""Run configuration from a YAML or JSON file, overridable by CLI flags."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import yaml

from .verify import Budgets, VerifyError


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class Config:
    schema: str | None = None
    budgets: Budgets = field(default_factory=Budgets)
    seed: int = 0
    output_dir: str = "."
    format: str = "json"
    jobs: int = 1

    def __post_init__(self):
        if self.format not in ("json", "text"):
            raise ConfigError(f"format must be json or text, got {self.format!r}")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")


_BUDGET_KEYS = {f.name for f in fields(Budgets)}
_TOP_KEYS = {"schema", "budgets", "seed", "output_dir", "format", "jobs"}


def config_from_dict(data: dict, source: str = "<config>") -> Config:
    if not isinstance(data, dict):
        raise ConfigError(f"{source}: top level must be a mapping")
    unknown = set(data) - _TOP_KEYS
    if unknown:
        raise ConfigError(f"{source}: unknown keys {sorted(unknown)}")
    raw_b = data.get("budgets") or {}
    if not isinstance(raw_b, dict):
        raise ConfigError(f"{source}: budgets must be a mapping")
    bad_b = set(raw_b) - _BUDGET_KEYS
    if bad_b:
        raise ConfigError(f"{source}: unknown budget keys {sorted(bad_b)}")
    try:
        budgets = Budgets(**{k: (str(v) if k == "level" else int(v)) for k, v in raw_b.items()})
        schema = data.get("schema")
        if schema is not None:
            base = Path(source).parent if source != "<config>" else Path(".")
            schema = str(base / str(schema))
        return Config(
            schema=schema,
            budgets=budgets,
            seed=int(data.get("seed", 0)),
            output_dir=str(data.get("output_dir", ".")),
            format=str(data.get("format", "json")),
            jobs=int(data.get("jobs", 1)),
        )
    except (TypeError, ValueError, VerifyError) as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_config(path: str | Path) -> Config:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {p}: {exc}") from None
    try:
        data = json.loads(text) if p.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as exc:
        raise ConfigError(f"{p}: cannot parse: {exc}") from None
    return config_from_dict(data or {}, str(p))


def with_overrides(cfg: Config, **kw) -> Config:
    """Apply non-None overrides; budget fields go into ``budgets``."""
    top = {k: v for k, v in kw.items() if v is not None and k in _TOP_KEYS - {"budgets"}}
    bud = {k: v for k, v in kw.items() if v is not None and k in _BUDGET_KEYS}
    try:
        return replace(cfg, budgets=replace(cfg.budgets, **bud), **top)
    except VerifyError as exc:
        raise ConfigError(str(exc)) from None
