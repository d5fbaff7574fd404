"""Bundled example machines and systems."""

from pathlib import Path

CORPUS = Path(__file__).parent
MACHINE_FILES = tuple(
    path for path in sorted(CORPUS.glob("*.yaml")) if not path.stem.startswith("kalman")
)
