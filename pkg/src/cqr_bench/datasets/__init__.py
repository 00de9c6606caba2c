"""Bundled example data."""

from importlib.resources import files
from pathlib import Path


def bundled_csv_path() -> Path:
    """The bundled mixture-strength table: 1030 rows, 8 features, target ``strength``."""
    return Path(str(files(__package__).joinpath("mixtures_1030.csv")))
