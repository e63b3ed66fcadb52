"""Server configuration: key=value file plus environment credentials."""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from .adapters import (
    DEFAULT_TRANSLATE_MODELS,
    Adapter,
    LANGUAGES,
    RuleAdapter,
    TransformersAdapter,
)

# Bearer token for an external MT service; never read from the config
# file so credentials stay out of version control.
MT_TOKEN_ENV = "MS_MT_TOKEN"

ADAPTERS = ("rule", "transformers")


@dataclass
class ServerConfig:
    adapter: str = "rule"
    host: str = "127.0.0.1"
    port: int = 9000
    workers: int = 4
    ner_model: str = "dslim/bert-base-NER"
    pos_model: str = "vblagoje/bert-english-uncased-finetuned-pos"
    fill_mask_model: str = "bert-base-uncased"
    translate_models: dict = field(
        default_factory=lambda: dict(DEFAULT_TRANSLATE_MODELS)
    )
    mt_url: str = ""

    def __post_init__(self) -> None:
        if self.adapter not in ADAPTERS:
            raise ValueError(f"unknown adapter: {self.adapter!r}")
        if self.port < 0 or self.workers < 1:
            raise ValueError("port must be >= 0 and workers >= 1")
        unknown = [lang for lang in self.translate_models if lang not in LANGUAGES]
        if unknown:
            raise ValueError(f"unsupported translate languages: {unknown}")

    def build_adapter(self) -> Adapter:
        if self.adapter == "rule":
            return RuleAdapter()
        return TransformersAdapter(
            ner_model=self.ner_model,
            pos_model=self.pos_model,
            fill_mask_model=self.fill_mask_model,
            translate_models=self.translate_models,
            mt_url=self.mt_url,
            mt_token=os.environ.get(MT_TOKEN_ENV, ""),
        )


_SCALARS = {
    "adapter": str,
    "host": str,
    "port": int,
    "workers": int,
    "ner_model": str,
    "pos_model": str,
    "fill_mask_model": str,
    "mt_url": str,
}


def parse_config_text(text: str) -> dict:
    """key = value lines; # comments; translate_model.<lang> keys nest."""
    values: dict = {}
    translate: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {lineno}: expected key=value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key.startswith("translate_model."):
            translate[key[len("translate_model.") :]] = value
        elif key in _SCALARS:
            try:
                values[key] = _SCALARS[key](value)
            except ValueError as exc:
                raise ValueError(f"config line {lineno}: {exc}") from exc
        else:
            raise ValueError(f"config line {lineno}: unknown key {key!r}")
    if translate:
        values["translate_models"] = {**dict(DEFAULT_TRANSLATE_MODELS), **translate}
    return values


def load_config(path: str | Path | None, overrides: dict | None = None) -> ServerConfig:
    values: dict = {}
    if path is not None:
        path = Path(path)
        if not path.is_file():
            raise ValueError(f"config file not found: {path}")
        values = parse_config_text(path.read_text(encoding="utf-8"))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = value
    return ServerConfig(**values)
