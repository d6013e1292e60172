"""Text normalization: grammar candidates, rankers and discriminative LMs."""

from pathlib import Path

__version__ = "0.1.0"

DATA_DIR = Path(__file__).parent / "data"


def data_path(name: str) -> Path:
    """Path of a shipped fixture file (grammars, lexicon, number words)."""
    return DATA_DIR / name
