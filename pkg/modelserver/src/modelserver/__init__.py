"""Reference implementation of the genswap model backend wire protocol."""

from .adapters import Adapter, ModelLoadError, RuleAdapter, TransformersAdapter
from .app import create_app
from .config import ServerConfig, load_config

__all__ = [
    "Adapter",
    "ModelLoadError",
    "RuleAdapter",
    "TransformersAdapter",
    "ServerConfig",
    "create_app",
    "load_config",
]
