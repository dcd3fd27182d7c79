"""Negation scope tagging and TF-IDF sentiment classification for colloquial Arabic."""

from importlib.resources import files

__version__ = "0.1.0"

DATA_DIR = files("negscope") / "data"


def data_path(name: str) -> str:
    """Path of a file shipped in ``negscope/data``."""
    return str(DATA_DIR / name)
