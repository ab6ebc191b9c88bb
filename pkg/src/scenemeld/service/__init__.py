from .api import create_app
from .config import EngineConfig, MattingConfig, load_config
from .engine import Engine, HistoryEntry, Session

__all__ = [
    "Engine",
    "EngineConfig",
    "HistoryEntry",
    "MattingConfig",
    "Session",
    "create_app",
    "load_config",
]
