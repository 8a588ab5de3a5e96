"""Run configuration: TOML file plus CLI-flag overrides (flags win)."""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from semrules.autoencoder import TrainConfig
from semrules.benchmark import PlantedRule, SynthSpec


class ConfigError(ValueError):
    """Raised for unusable run configurations."""


@dataclass
class DataPaths:
    timeseries: str
    graph: str
    schema: str | None = None
    binding: str = ""
    kinds: str | None = None


@dataclass
class RunConfig:
    """Everything a pipeline or bench run needs, resolved and hashable.

    Exactly one of ``data`` (real files) or ``synth`` (generator spec)
    must be present.
    """

    seed: int = 0
    output_dir: str = "out"
    bins: int = 5
    neighbor_depth: int = 1
    similarity_threshold: float = 0.8
    max_antecedents: int = 1
    data: DataPaths | None = None
    synth: SynthSpec | None = None
    train: TrainConfig = field(default_factory=TrainConfig)
    fp_min_support: float = 0.2
    fp_min_confidence: float = 0.8
    hho_population: int = 50
    hho_iterations: int = 2000
    bench: dict = field(default_factory=dict)

    def __post_init__(self) -> None:
        if (self.data is None) == (self.synth is None):
            raise ConfigError("config needs exactly one of [data] paths or a [synth] spec")
        if not 0.0 < self.similarity_threshold < 1.0:
            raise ConfigError(f"similarity threshold must be in (0, 1), got {self.similarity_threshold}")
        if self.max_antecedents < 1:
            raise ConfigError(f"max antecedents must be >= 1, got {self.max_antecedents}")
        if self.bins < 1:
            raise ConfigError(f"bins must be >= 1, got {self.bins}")
        if self.neighbor_depth < 0:
            raise ConfigError(f"neighbor depth must be >= 0, got {self.neighbor_depth}")


def load_config(path: str | Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such config file: {path}")
    try:
        return tomllib.loads(path.read_text())
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc


def build_run_config(raw: dict, overrides: dict | None = None) -> RunConfig:
    """Merge a parsed TOML dict with CLI overrides (override values win)."""
    raw = dict(raw)
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    raw.update({k: v for k, v in overrides.items() if k not in ("train",)})

    data = None
    if "data" in raw:
        section = raw["data"]
        try:
            data = DataPaths(
                timeseries=section["timeseries"],
                graph=section["graph"],
                schema=section.get("schema"),
                binding=section["binding"],
                kinds=section.get("kinds"),
            )
        except KeyError as exc:
            raise ConfigError(f"[data] section missing key {exc}") from exc

    synth = None
    if "synth" in raw or data is None:
        # No [data] section means the default synthetic demo spec.
        section = dict(raw.get("synth", {}))
        planted = tuple(
            PlantedRule(
                antecedents=tuple((str(s), int(level)) for s, level in entry["antecedents"]),
                consequent=(str(entry["consequent"][0]), int(entry["consequent"][1])),
                confidence=float(entry.get("confidence", 1.0)),
                support=float(entry.get("support", 0.3)),
            )
            for entry in section.pop("planted", [])
        )
        seed = int(raw.get("seed", 0))
        synth = SynthSpec(
            sources=int(section.get("sources", 6)),
            nodes=int(section.get("nodes", 10)),
            template=str(section.get("template", "chain")),
            transactions=int(section.get("transactions", 2000)),
            bins=int(section.get("bins", raw.get("bins", 5))),
            planted=planted,
            noise_rate=float(section.get("noise_rate", 1.0)),
            seed=int(section.get("seed", seed)),
        )

    train_section = dict(raw.get("train", {}))
    train_section.update(overrides.get("train", {}))
    hidden = train_section.get("hidden_dims")
    train = TrainConfig(
        learning_rate=float(train_section.get("learning_rate", 5e-3)),
        epochs=int(train_section.get("epochs", 20)),
        weight_decay=float(train_section.get("weight_decay", 2e-8)),
        noise_factor=float(train_section.get("noise_factor", 0.5)),
        batch_size=int(train_section.get("batch_size", 64)),
        seed=int(train_section.get("seed", raw.get("seed", 0))),
        hidden_dims=None if hidden is None else tuple(int(h) for h in hidden),
    )

    fp = raw.get("fp_growth", {})
    hho = raw.get("hho", {})
    return RunConfig(
        seed=int(raw.get("seed", 0)),
        output_dir=str(raw.get("output_dir", "out")),
        bins=int(raw.get("bins", 5)),
        neighbor_depth=int(raw.get("neighbor_depth", 1)),
        similarity_threshold=float(raw.get("similarity_threshold", 0.8)),
        max_antecedents=int(raw.get("max_antecedents", 1)),
        data=data,
        synth=synth,
        train=train,
        fp_min_support=float(fp.get("min_support", 0.2)),
        fp_min_confidence=float(fp.get("min_confidence", 0.8)),
        hho_population=int(hho.get("population", 50)),
        hho_iterations=int(hho.get("iterations", 2000)),
        bench=dict(raw.get("bench", {})),
    )


def config_to_dict(config: RunConfig) -> dict:
    out = asdict(config)
    for name in ("train", "synth", "data"):
        if out.get(name) is not None and not isinstance(out[name], dict):  # pragma: no cover
            out[name] = asdict(getattr(config, name))
    return out


def config_hash(config: RunConfig) -> str:
    blob = json.dumps(config_to_dict(config), sort_keys=True, default=str).encode()
    return hashlib.sha256(blob).hexdigest()


def field_names(cls) -> set[str]:
    return {f.name for f in fields(cls)}
