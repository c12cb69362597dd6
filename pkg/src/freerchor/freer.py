"""Reified arrow programs over an arbitrary effect signature.

A freer program is a chain of stages ending in a pure function::

    Comp(pre, effect, rest) | Hom(fn)

Each variant differs only in how ``pre`` routes its input around the
effect:

* :class:`FreerPreArrow` -- ``pre: x -> a``
* :class:`FreerArrow` -- ``pre: x -> (a, c)``; ``c`` is carried past the effect
* :class:`FreerChoiceArrow` -- ``pre: x -> Left((a, c)) | Right(w)``; ``w``
  bypasses the effect without firing it

Effects are opaque values. Only a handler gives them meaning, which is what
makes :func:`approximate` possible: the chain can be folded without running
anything.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Generic, Iterator, TypeVar

from .arrows import (
    ArrowChoice,
    Arrow,
    Left,
    PreArrow,
    Right,
    compose_fn,
    either_fn,
    first_fn,
    fst,
    identity_fn,
    left_fn,
)

M = TypeVar("M")


# -- routing helpers --------------------------------------------------------

def assoc(p):
    (a, b), c = p
    return (a, (b, c))


def unassoc(p):
    a, (b, c) = p
    return ((a, b), c)


def distr(p):
    e, d = p
    if isinstance(e, Left):
        return Left((e.value, d))
    return Right((e.value, d))


def undistr(e):
    if isinstance(e, Left):
        ab, d = e.value
        return (Left(ab), d)
    c, d = e.value
    return (Right(c), d)


def assocsum(e):
    if isinstance(e, Left):
        inner = e.value
        if isinstance(inner, Left):
            return Left(inner.value)
        return Right(Left(inner.value))
    return Right(Right(e.value))


def unassocsum(e):
    if isinstance(e, Left):
        return Left(Left(e.value))
    inner = e.value
    if isinstance(inner, Left):
        return Left(Right(inner.value))
    return Right(inner.value)


def _with_unit(x):
    return (x, ())


def _left_with_unit(x):
    return Left((x, ()))


# -- monoids ---------------------------------------------------------------

@dataclass(frozen=True)
class MonoidSpec(Generic[M]):
    empty: M
    combine: Callable[[M, M], M]

    def concat(self, items) -> M:
        acc = self.empty
        for item in items:
            acc = self.combine(acc, item)
        return acc


SUM = MonoidSpec(0, lambda a, b: a + b)
LIST = MonoidSpec((), lambda a, b: tuple(a) + tuple(b))
SET = MonoidSpec(frozenset(), lambda a, b: frozenset(a) | frozenset(b))


class MalformedChain(ValueError):
    pass


# -- the chains --------------------------------------------------------------

class _Freer:
    """Shared chain structure. Use one of the three public variants."""

    __slots__ = ("fn", "pre", "effect", "rest")

    def __init__(self, fn=None, pre=None, effect=None, rest=None):
        self.fn = fn
        self.pre = pre
        self.effect = effect
        self.rest = rest

    # constructors
    @classmethod
    def hom(cls, fn: Callable):
        return cls(fn=fn)

    @classmethod
    def comp(cls, pre: Callable, effect, rest):
        if type(rest) is not cls:
            raise TypeError(f"continuation must be {cls.__name__}, got {type(rest).__name__}")
        return cls(pre=pre, effect=effect, rest=rest)

    @classmethod
    def arr(cls, fn):
        return cls.hom(fn)

    @classmethod
    def embed(cls, effect):
        raise NotImplementedError

    @property
    def is_pure(self) -> bool:
        return self.rest is None

    def then(self, other):
        if type(other) is not type(self):
            raise TypeError(
                f"cannot compose {type(self).__name__} with {type(other).__name__}")
        if self.is_pure:
            if other.is_pure:
                return type(self).hom(compose_fn(self.fn, other.fn))
            # a pure prefix fuses into the next stage's routing function
            return type(self).comp(compose_fn(self.fn, other.pre), other.effect, other.rest)
        return type(self).comp(self.pre, self.effect, self.rest.then(other))

    def stages(self) -> Iterator[Any]:
        node = self
        while not node.is_pure:
            yield node.effect
            node = node.rest

    def approximate(self, summarize: Callable[[Any], M], monoid: MonoidSpec[M]) -> M:
        return monoid.concat(summarize(e) for e in self.stages())

    def count(self) -> int:
        return approximate(lambda _: 1, SUM, self)

    def validate(self):
        """Check the chain shape: stages with callables, one Hom at the tail."""
        node = self
        while not node.is_pure:
            if type(node.rest) is not type(self) or not callable(node.pre):
                raise MalformedChain(f"bad stage in {type(self).__name__}")
            if node.fn is not None:
                raise MalformedChain("stage also carries a terminal function")
            node = node.rest
        if not callable(node.fn) or node.effect is not None:
            raise MalformedChain("chain does not end in a terminal function")
        return self

    def render(self) -> str:
        return "\n".join(self.render_lines())

    def render_lines(self) -> list[str]:
        lines = []
        for i, effect in enumerate(self.stages()):
            head, *tail = debug_text(effect).splitlines()
            lines.append(f"Stage{i}: {head}")
            lines.extend("  " + t for t in tail)
        lines.append("Terminal")
        return lines

    def __repr__(self):
        return f"<{type(self).__name__} with {self.count()} stage(s)>"

    def _interp_stage(self, handled, target):
        raise NotImplementedError

    def interp(self, handler: Callable, target):
        # build from the tail so recursion depth never depends on chain length
        nodes = []
        node = self
        while not node.is_pure:
            nodes.append(node)
            node = node.rest
        result = target.arr(node.fn)
        for node in reversed(nodes):
            stage = node._interp_stage(handler(node.effect), target)
            result = target.arr(node.pre) >> stage >> result
        return result


class FreerPreArrow(_Freer, PreArrow):
    """Effects in a straight line; no strength."""

    __slots__ = ()

    @classmethod
    def embed(cls, effect):
        return cls.comp(identity_fn, effect, cls.hom(identity_fn))

    def _interp_stage(self, handled, target):
        return handled


class FreerArrow(_Freer, Arrow):
    """Freer pre-arrow plus a carried value around each effect."""

    __slots__ = ()

    @classmethod
    def embed(cls, effect):
        return cls.comp(_with_unit, effect, cls.hom(fst))

    def first(self):
        if self.is_pure:
            return FreerArrow.hom(first_fn(self.fn))
        return FreerArrow.comp(
            compose_fn(first_fn(self.pre), assoc),
            self.effect,
            FreerArrow.hom(unassoc) >> self.rest.first(),
        )

    def _interp_stage(self, handled, target):
        return handled.first()


class FreerChoiceArrow(_Freer, ArrowChoice):
    """Freer arrow whose stages may be bypassed by a ``Right`` routing value."""

    __slots__ = ()

    @classmethod
    def embed(cls, effect):
        return cls.comp(_left_with_unit, effect, cls.hom(either_fn(fst, identity_fn)))

    def first(self):
        if self.is_pure:
            return FreerChoiceArrow.hom(first_fn(self.fn))
        pre = compose_fn(compose_fn(first_fn(self.pre), distr), left_fn(assoc))
        back = compose_fn(left_fn(unassoc), undistr)
        return FreerChoiceArrow.comp(
            pre, self.effect, FreerChoiceArrow.hom(back) >> self.rest.first())

    def left(self):
        if self.is_pure:
            return FreerChoiceArrow.hom(left_fn(self.fn))
        return FreerChoiceArrow.comp(
            compose_fn(left_fn(self.pre), assocsum),
            self.effect,
            FreerChoiceArrow.hom(unassocsum) >> self.rest.left(),
        )

    def _interp_stage(self, handled, target):
        return handled.first().left()


FREER_VARIANTS = (FreerPreArrow, FreerArrow, FreerChoiceArrow)


# -- module-level spellings --------------------------------------------------

def hom(fn, kind=FreerChoiceArrow):
    return kind.hom(fn)


def embed(effect, kind=FreerChoiceArrow):
    return kind.embed(effect)


def interp(handler: Callable, program: _Freer, target):
    """Translate ``program`` into the arrow class ``target``.

    ``handler`` maps each effect to an arrow of class ``target``; pure
    terminals become ``target.arr``.
    """
    return program.interp(handler, target)


def approximate(summarize: Callable[[Any], M], monoid: MonoidSpec[M], program: _Freer) -> M:
    return program.approximate(summarize, monoid)


def count(program: _Freer) -> int:
    return program.count()


def debug_text(effect) -> str:
    return effect.debug() if hasattr(effect, "debug") else repr(effect)


def traced(handler: Callable, log: list, render: Callable[[Any], str] = debug_text) -> Callable:
    """Wrap ``handler`` so every effect that actually fires is appended to ``log``."""
    def handle(effect):
        handled = handler(effect)
        text = render(effect)

        def record(x):
            log.append(text)
            return x
        return type(handled).arr(record) >> handled
    return handle
