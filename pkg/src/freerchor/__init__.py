"""Freer arrows over user-defined effects, and choreographies built on them."""

from .arrows import FuncArrow, HostArrow, HostEnv, Left, Right, StateArrow
from .freer import FreerArrow, FreerChoiceArrow, FreerPreArrow, approximate, count, interp

__all__ = [
    "FreerArrow",
    "FreerChoiceArrow",
    "FreerPreArrow",
    "FuncArrow",
    "HostArrow",
    "HostEnv",
    "Left",
    "Right",
    "StateArrow",
    "approximate",
    "count",
    "interp",
]
