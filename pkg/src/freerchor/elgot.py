"""Unbounded iteration layered over freer choice arrows."""
from __future__ import annotations

from dataclasses import dataclass

from .arrows import Left, Right, lmap, right
from .effects import get_state, put_state
from .freer import FreerChoiceArrow


@dataclass(frozen=True)
class ElgotLoop:
    """``body`` yields ``Left(z)`` to exit into ``continuation`` or ``Right(x)`` to go again.

    Both halves are ordinary freer chains and can be analysed on their own.
    The loop as a whole cannot.
    """
    body: FreerChoiceArrow
    continuation: FreerChoiceArrow


def interp_elgot(handler, loop: ElgotLoop, target, max_iterations: int | None = None):
    body = loop.body.interp(handler, target)
    cont = loop.continuation.interp(handler, target)
    return target.elgot(body, cont, max_iterations)


def _zero_test(n):
    return Left(n) if n == 0 else Right(n)


def _decrement(x):
    return x - 1


def countdown_fixture() -> ElgotLoop:
    """Read the state, stop at zero, otherwise store one less and loop."""
    kind = FreerChoiceArrow
    body = get_state() >> kind.arr(_zero_test) >> right(lmap(_decrement, put_state()))
    return ElgotLoop(body, kind.identity())
