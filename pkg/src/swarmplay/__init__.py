"""Imitation-guided swarms of game-playing agents over deterministic text worlds."""

__version__ = "0.1.0"
