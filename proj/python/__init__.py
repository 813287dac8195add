"""HashGraph simulation, delay attack and probability probe."""

from ._hashgraph import attack, probe, simulate

__all__ = ["attack", "probe", "simulate"]
