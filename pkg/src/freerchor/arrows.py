"""Arrow hierarchy and the concrete backends freer programs are interpreted into.

The hierarchy follows the usual layering::

    Category  ->  PreArrow  ->  Arrow  ->  ArrowChoice
    (id, >>)      (arr)         (first)     (left)

Products are plain 2-tuples and sums are :class:`Left` / :class:`Right`.
The unit value is ``()``.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Callable


@dataclass(frozen=True)
class Left:
    value: Any

    def __repr__(self):
        return f"Left({self.value!r})"


@dataclass(frozen=True)
class Right:
    value: Any

    def __repr__(self):
        return f"Right({self.value!r})"


class IterationLimitExceeded(RuntimeError):
    """An Elgot loop ran past its configured iteration cap."""

    def __init__(self, limit: int):
        super().__init__(f"iteration cap of {limit} exceeded after {limit} iterations")
        self.limit = limit


# -- plain functions used for routing --------------------------------------

def identity_fn(x):
    return x


def fst(p):
    return p[0]


def snd(p):
    return p[1]


def swap(p):
    return (p[1], p[0])


def dup(x):
    return (x, x)


def mirror(e):
    if isinstance(e, Left):
        return Right(e.value)
    return Left(e.value)


def untag(e):
    return e.value


def first_fn(f: Callable) -> Callable:
    def go(p):
        return (f(p[0]), p[1])
    return go


def left_fn(f: Callable) -> Callable:
    def go(e):
        if isinstance(e, Left):
            return Left(f(e.value))
        return e
    return go


def compose_fn(f: Callable, g: Callable) -> Callable:
    """``g`` after ``f``."""
    def go(x):
        return g(f(x))
    return go


def either_fn(f: Callable, g: Callable) -> Callable:
    def go(e):
        if isinstance(e, Left):
            return f(e.value)
        return g(e.value)
    return go


# -- class hierarchy --------------------------------------------------------

class Category:
    """Something with an identity and sequential composition (``>>``)."""

    @classmethod
    def identity(cls):
        raise NotImplementedError

    def then(self, other):
        raise NotImplementedError

    def __rshift__(self, other):
        return self.then(other)

    def _check_seam(self, other):
        if type(other) is not type(self):
            raise TypeError(
                f"cannot compose {type(self).__name__} with {type(other).__name__}")


class PreArrow(Category):

    @classmethod
    def arr(cls, fn: Callable):
        raise NotImplementedError

    @classmethod
    def identity(cls):
        return cls.arr(identity_fn)


class Arrow(PreArrow):

    def first(self):
        raise NotImplementedError


class ArrowChoice(Arrow):

    def left(self):
        raise NotImplementedError


class Backend(ArrowChoice):
    """A concrete arrow that can actually be run.

    Backends additionally know how to run an Elgot loop iteratively, since
    a recursive ``go = body >>> (exit ||| go)`` would grow the stack.
    """

    @classmethod
    def elgot(cls, body, exit_, max_iterations: int | None = None):
        raise NotImplementedError


def _check_cap(n, max_iterations):
    if max_iterations is not None and n > max_iterations:
        raise IterationLimitExceeded(max_iterations)


class FuncArrow(Backend):
    """Pure functions."""

    __slots__ = ("fn",)

    def __init__(self, fn: Callable[[Any], Any]):
        self.fn = fn

    def apply(self, x):
        return self.fn(x)

    __call__ = apply

    @classmethod
    def arr(cls, fn):
        return cls(fn)

    def then(self, other):
        self._check_seam(other)
        return FuncArrow(compose_fn(self.fn, other.fn))

    def first(self):
        return FuncArrow(first_fn(self.fn))

    def left(self):
        return FuncArrow(left_fn(self.fn))

    @classmethod
    def elgot(cls, body, exit_, max_iterations=None):
        def go(x):
            n = 0
            while True:
                n += 1
                _check_cap(n, max_iterations)
                r = body.fn(x)
                if isinstance(r, Left):
                    return exit_.fn(r.value)
                x = r.value
        return cls(go)


class StateArrow(Backend):
    """Computations ``(x, s) -> (y, s)`` threading a state value left to right."""

    __slots__ = ("fn",)

    def __init__(self, fn: Callable[[Any, Any], tuple]):
        self.fn = fn

    def run(self, x, s):
        return self.fn(x, s)

    @classmethod
    def arr(cls, fn):
        return cls(lambda x, s: (fn(x), s))

    def then(self, other):
        self._check_seam(other)
        f, g = self.fn, other.fn

        def go(x, s):
            y, s1 = f(x, s)
            return g(y, s1)
        return StateArrow(go)

    def first(self):
        f = self.fn

        def go(p, s):
            b, s1 = f(p[0], s)
            return (b, p[1]), s1
        return StateArrow(go)

    def left(self):
        f = self.fn

        def go(e, s):
            if isinstance(e, Left):
                b, s1 = f(e.value, s)
                return Left(b), s1
            return e, s
        return StateArrow(go)

    @classmethod
    def elgot(cls, body, exit_, max_iterations=None):
        def go(x, s):
            n = 0
            while True:
                n += 1
                _check_cap(n, max_iterations)
                r, s = body.fn(x, s)
                if isinstance(r, Left):
                    return exit_.fn(r.value, s)
                x = r.value
        return cls(go)


class HostArrow(Backend):
    """Procedures ``(x, env) -> y`` that may touch capabilities held in ``env``.

    ``env`` is supplied when the arrow is run, never captured at construction,
    so the same arrow can be evaluated against different environments.
    """

    __slots__ = ("fn", "name")

    def __init__(self, fn: Callable[[Any, Any], Any], name: str | None = None):
        self.fn = fn
        self.name = name

    def run(self, x, env=None):
        return self.fn(x, env)

    def __repr__(self):
        return f"HostArrow({self.name or '?'})"

    @classmethod
    def arr(cls, fn):
        return cls(lambda x, env: fn(x))

    def then(self, other):
        self._check_seam(other)
        f, g = self.fn, other.fn
        return HostArrow(lambda x, env: g(f(x, env), env))

    def first(self):
        f = self.fn
        return HostArrow(lambda p, env: (f(p[0], env), p[1]))

    def left(self):
        f = self.fn

        def go(e, env):
            if isinstance(e, Left):
                return Left(f(e.value, env))
            return e
        return HostArrow(go)

    @classmethod
    def elgot(cls, body, exit_, max_iterations=None):
        def go(x, env):
            n = 0
            while True:
                n += 1
                _check_cap(n, max_iterations)
                r = body.fn(x, env)
                if isinstance(r, Left):
                    return exit_.fn(r.value, env)
                x = r.value
        return cls(go)


def run_state(p: StateArrow, x, s0):
    return p.run(x, s0)


# -- derived combinators ----------------------------------------------------

def compose(f, g):
    return f.then(g)


def first(f):
    return f.first()


def left(f):
    return f.left()


def parallel(f, g):
    """``f *** g``: first f, swap, first g, swap."""
    kind = type(f)
    return f.first() >> kind.arr(swap) >> g.first() >> kind.arr(swap)


def second(f):
    return parallel(type(f).identity(), f)


def fanout(f, g):
    """``f &&& g``; ``f`` runs before ``g``."""
    return type(f).arr(dup) >> parallel(f, g)


def plus(f, g):
    """``f +++ g``: left f, mirror, left g, mirror."""
    kind = type(f)
    return f.left() >> kind.arr(mirror) >> g.left() >> kind.arr(mirror)


def right(f):
    return plus(type(f).identity(), f)


def fanin(f, g):
    """``f ||| g``."""
    return plus(f, g) >> type(f).arr(untag)


def lmap(fn: Callable, p):
    """Pre-compose a pure function."""
    return type(p).arr(fn) >> p


class ScriptExhausted(RuntimeError):
    pass


class HostEnv:
    """Capabilities a :class:`HostArrow` may use during one evaluation.

    ``inputs`` is the scripted input for this location, ``store`` its
    in-memory state and ``network`` the endpoint link (absent when running
    the global interpreter).
    """

    def __init__(self, location=None, inputs=(), store=None, network=None):
        self.location = location
        self.inputs = deque(inputs)
        self.store = {} if store is None else store
        self.network = network

    def next_input(self) -> str:
        if not self.inputs:
            raise ScriptExhausted(f"input script exhausted at {self.location}")
        return self.inputs.popleft()

    def __repr__(self):
        return f"HostEnv({self.location}, store={self.store!r})"
