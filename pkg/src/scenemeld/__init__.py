"""scenemeld: engine for composing unified, generated meeting environments."""

__version__ = "0.1.0"
