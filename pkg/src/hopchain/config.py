"""Engine configuration: one versioned document covering every stage, with
named presets for the benchmark settings, bound validation, and a content
digest stamped into output files for provenance.
"""

import hashlib
import json
from dataclasses import asdict, dataclass, field

from .chains import PipelineConfig
from .errors import ConfigError, FormatError
from .fileio import atomic_write_text
from .lexical import Bm25Params
from .reencoder import OBJECTIVES, TrainConfig

PRESETS = ("eqasc_baseline", "expanded", "semantic", "hybrid")


@dataclass(frozen=True)
class EngineConfig:
    corpus_path: str = ""
    stopwords_path: str = ""
    index_path: str = ""
    fact_embeddings_path: str = ""
    query_embeddings_path: str = ""
    model_path: str = ""
    chains_path: str = ""
    report_path: str = ""
    stem: bool = False
    seed: int = 0
    bm25: Bm25Params = field(default_factory=Bm25Params)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    train: TrainConfig = field(default_factory=TrainConfig)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "EngineConfig":
        data = dict(payload)
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        for key, maker in (("bm25", Bm25Params), ("pipeline", PipelineConfig), ("train", TrainConfig)):
            if key in data and isinstance(data[key], dict):
                try:
                    data[key] = maker(**data[key])
                except TypeError as exc:
                    raise ConfigError(f"bad {key} section: {exc}") from exc
        return cls(**data)

    def digest(self) -> str:
        """Stable short hash of the full configuration."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode()).hexdigest()[:12]


def validate(config: EngineConfig) -> list[str]:
    """All invariant violations, each naming the field and the bound.
    Empty list means the config is usable."""
    violations: list[str] = []
    pipeline = config.pipeline
    for name in ("n_first", "m_second", "k_chains", "semantic_n", "semantic_m"):
        value = getattr(pipeline, name)
        if not isinstance(value, int) or value < 1:
            violations.append(f"pipeline.{name}: must be a positive integer, got {value!r}")
    if not 0.0 <= pipeline.merge_fraction <= 1.0:
        violations.append(
            f"pipeline.merge_fraction: must be in [0, 1], got {pipeline.merge_fraction!r}"
        )
    if config.bm25.k1 < 0:
        violations.append(f"bm25.k1: must be >= 0, got {config.bm25.k1!r}")
    if not 0.0 <= config.bm25.b <= 1.0:
        violations.append(f"bm25.b: must be in [0, 1], got {config.bm25.b!r}")
    train = config.train
    if train.learning_rate <= 0:
        violations.append(f"train.learning_rate: must be > 0, got {train.learning_rate!r}")
    if train.epochs < 1:
        violations.append(f"train.epochs: must be >= 1, got {train.epochs!r}")
    if train.batch_size < 1:
        violations.append(f"train.batch_size: must be >= 1, got {train.batch_size!r}")
    if train.hidden is not None and train.hidden < 1:
        violations.append(f"train.hidden: must be >= 1 (or null for 4*dim), got {train.hidden!r}")
    if train.objective not in OBJECTIVES:
        violations.append(f"train.objective: must be one of {OBJECTIVES}, got {train.objective!r}")
    if not isinstance(config.seed, int):
        violations.append(f"seed: must be an integer, got {config.seed!r}")
    return violations


def presets(name: str) -> EngineConfig:
    """Named stage-size presets.

    eqasc_baseline: N=20, M=4, K=10 (the original chain-mining settings)
    expanded:       N=M=K=200
    semantic:       dense pipeline defaults, N=5, M=2, K=10
    hybrid:         expanded syntactic merged with semantic (fraction 0.25)
    """
    table = {
        "eqasc_baseline": PipelineConfig(n_first=20, m_second=4, k_chains=10),
        "expanded": PipelineConfig(n_first=200, m_second=200, k_chains=200),
        "semantic": PipelineConfig(n_first=20, m_second=4, k_chains=10, semantic_n=5, semantic_m=2),
        "hybrid": PipelineConfig(
            n_first=200, m_second=200, k_chains=200, semantic_n=5, semantic_m=2, merge_fraction=0.25
        ),
    }
    if name not in table:
        raise ConfigError(f"unknown preset {name!r}; valid presets: {', '.join(PRESETS)}")
    return EngineConfig(pipeline=table[name])


def derive_seed(master_seed: int, stage: str) -> int:
    """Deterministic per-stage seed: sha256 over '<seed>:<stage>'."""
    digest = hashlib.sha256(f"{master_seed}:{stage}".encode()).digest()
    return int.from_bytes(digest[:8], "big") % (2**63)


def save_config(path, config: EngineConfig) -> None:
    atomic_write_text(path, json.dumps(config.to_dict(), sort_keys=True, indent=2) + "\n")


def load_config(path) -> EngineConfig:
    with open(path, encoding="utf-8") as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise FormatError(f"invalid config JSON: {exc.msg}") from exc
    return EngineConfig.from_dict(payload)
