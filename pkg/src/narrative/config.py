"""Pipeline configuration: one TOML file, env and flag overrides.

Precedence is flags > environment > file > defaults. Environment variables
cover the two values that are most often secrets or per-host:
NARRATIVE_ADAPTER_URL and NARRATIVE_FIREHOSE_URL.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from importlib import resources

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from .errors import ConfigError
from .topics import NmfConfig

ENV_ADAPTER_URL = "NARRATIVE_ADAPTER_URL"
ENV_FIREHOSE_URL = "NARRATIVE_FIREHOSE_URL"


def _bundled(name: str) -> str:
    return str(resources.files("narrative").joinpath("data", name))


@dataclass(frozen=True)
class PipelineConfig:
    keywords_path: str = field(default_factory=lambda: _bundled("keywords.txt"))
    lexicon_path: str = field(default_factory=lambda: _bundled("sentiment_lexicon.tsv"))
    emotion_lexicon_path: str = field(default_factory=lambda: _bundled("emotion_lexicon.tsv"))
    stopwords_path: str = field(default_factory=lambda: _bundled("stopwords.txt"))
    staging_path: str = "staging.db"
    labeled_path: str = "labeled.db"
    snapshot_dir: str = "snapshots"
    firehose_url: str | None = None
    adapter_url: str | None = None
    nmf: NmfConfig = field(default_factory=NmfConfig)
    batch_size: int = 64
    window_days: int = 7
    min_tokens: int = 3
    min_df: int = 2
    max_df_ratio: float = 0.95
    max_terms: int = 5000
    top_n: int = 20
    seed: int = 0
    buffer_max_size: int = 200
    flush_interval: float = 5.0
    flush_max_retries: int = 3

    def validate(self) -> None:
        for label, path in (
            ("keywords", self.keywords_path),
            ("lexicon", self.lexicon_path),
            ("emotion lexicon", self.emotion_lexicon_path),
            ("stopwords", self.stopwords_path),
        ):
            if not os.path.exists(path):
                raise ConfigError(f"{label} file not found: {path}")
        if self.batch_size < 1 or self.batch_size > 64:
            raise ConfigError("batch_size must be in 1..64")
        if self.window_days < 1:
            raise ConfigError("window_days must be >= 1")
        if self.min_tokens < 1:
            raise ConfigError("min_tokens must be >= 1")


_TOP_LEVEL_KEYS = {
    "keywords_path",
    "lexicon_path",
    "emotion_lexicon_path",
    "stopwords_path",
    "staging_path",
    "labeled_path",
    "snapshot_dir",
    "firehose_url",
    "adapter_url",
    "batch_size",
    "window_days",
    "min_tokens",
    "min_df",
    "max_df_ratio",
    "max_terms",
    "top_n",
    "seed",
    "buffer_max_size",
    "flush_interval",
    "flush_max_retries",
}


def load_config(
    path: str | None = None,
    env: dict[str, str] | None = None,
    overrides: dict[str, object] | None = None,
) -> PipelineConfig:
    """Assemble a config with flags > env > file > defaults precedence."""
    env = os.environ if env is None else env
    values: dict[str, object] = {}
    nmf_values: dict[str, object] = {}
    if path is not None:
        try:
            with open(path, "rb") as fh:
                doc = tomllib.load(fh)
        except FileNotFoundError as exc:
            raise ConfigError(f"config file not found: {path}") from exc
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"config file {path} is not valid TOML: {exc}") from exc
        for key, value in doc.items():
            if key == "nmf":
                if not isinstance(value, dict):
                    raise ConfigError("[nmf] must be a table")
                nmf_values.update(value)
            elif key in _TOP_LEVEL_KEYS:
                values[key] = value
            else:
                raise ConfigError(f"unknown config key: {key}")
    if env.get(ENV_ADAPTER_URL):
        values["adapter_url"] = env[ENV_ADAPTER_URL]
    if env.get(ENV_FIREHOSE_URL):
        values["firehose_url"] = env[ENV_FIREHOSE_URL]
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key == "nmf" and isinstance(value, dict):
            nmf_values.update(value)
        else:
            values[key] = value
    try:
        nmf_values.setdefault("seed", values.get("seed", 0))
        return PipelineConfig(nmf=NmfConfig(**nmf_values), **values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad configuration value: {exc}") from exc


def load_stopwords(path: str) -> frozenset[str]:
    with open(path, encoding="utf-8") as fh:
        return frozenset(
            line.strip().lower()
            for line in fh
            if line.strip() and not line.startswith("#")
        )
