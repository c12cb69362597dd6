"""State and web-service effect signatures, signature sums, handlers, fixtures."""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Callable

from .arrows import HostArrow, Left, Right, StateArrow, fanin, fanout
from .freer import FreerArrow, FreerChoiceArrow


class EvaluationError(RuntimeError):
    pass


# -- signatures ---------------------------------------------------------------

class StateEffect:
    """Signature of ``GetS`` / ``PutS``."""

    def debug(self):
        return type(self).__name__


@dataclass(frozen=True)
class GetS(StateEffect):
    def debug(self):
        return "GetS"


@dataclass(frozen=True)
class PutS(StateEffect):
    def debug(self):
        return "PutS"


GET = GetS()
PUT = PutS()


class WebServiceEffect:
    pass


@dataclass(frozen=True)
class WsGet(WebServiceEffect):
    url: str
    params: tuple = ()

    def __post_init__(self):
        if not self.url:
            raise ValueError("url must be nonempty")
        object.__setattr__(self, "params", tuple(self.params))

    def debug(self):
        return f"Get({self.url}, {list(self.params)})"


@dataclass(frozen=True)
class WsPost(WebServiceEffect):
    url: str
    params: tuple = ()

    def __post_init__(self):
        if not self.url:
            raise ValueError("url must be nonempty")
        object.__setattr__(self, "params", tuple(self.params))

    def debug(self):
        return f"Post({self.url}, {list(self.params)})"


@dataclass(frozen=True)
class Sum:
    """The signature ``left + right``. Used only as a type-level descriptor."""
    left: object
    right: object


@dataclass(frozen=True)
class InLeft:
    effect: object

    def debug(self):
        return f"InLeft({_debug(self.effect)})"


@dataclass(frozen=True)
class InRight:
    effect: object

    def debug(self):
        return f"InRight({_debug(self.effect)})"


def _debug(effect):
    return effect.debug() if hasattr(effect, "debug") else repr(effect)


@dataclass(frozen=True)
class Injection:
    sub: object
    sup: object
    inject: Callable

    def __call__(self, effect):
        return self.inject(effect)


def _inl(e):
    return InLeft(e)


def injection(sub, sup) -> Injection:
    """Find the injection of signature ``sub`` into ``sup``.

    Resolution tries, in order: ``sub`` itself, the left summand, then a
    recursive search of the right summand.
    """
    if sub == sup:
        return Injection(sub, sup, lambda e: e)
    if isinstance(sup, Sum):
        if sup.left == sub:
            return Injection(sub, sup, _inl)
        inner = injection(sub, sup.right)
        return Injection(sub, sup, lambda e: InRight(inner(e)))
    raise TypeError(f"no injection of {_sig_name(sub)} into {_sig_name(sup)}")


def _sig_name(sig):
    return getattr(sig, "__name__", repr(sig))


def combine_handlers(handle_left: Callable, handle_right: Callable) -> Callable:
    def handle(effect):
        if isinstance(effect, InLeft):
            return handle_left(effect.effect)
        if isinstance(effect, InRight):
            return handle_right(effect.effect)
        raise TypeError(f"not a sum effect: {effect!r}")
    return handle


# -- handlers ----------------------------------------------------------------

def _get(_, s):
    return s, s


def _put(v, _):
    return v, v


def state_handler(effect) -> StateArrow:
    if isinstance(effect, GetS):
        return StateArrow(_get)
    if isinstance(effect, PutS):
        return StateArrow(_put)
    raise TypeError(f"not a state effect: {effect!r}")


def host_state_handler(key: str = "state") -> Callable:
    """State effects over :class:`HostArrow`, keeping the state in ``env.store[key]``."""
    def get(_, env):
        return env.store[key]

    def put(v, env):
        env.store[key] = v
        return v

    def handle(effect):
        if isinstance(effect, GetS):
            return HostArrow(get, "GetS")
        if isinstance(effect, PutS):
            return HostArrow(put, "PutS")
        raise TypeError(f"not a state effect: {effect!r}")
    return handle


@dataclass
class WebBackendScript:
    get_responses: dict = field(default_factory=dict)
    post_log: list = field(default_factory=list)

    def respond(self, url, text, params=()):
        self.get_responses[(url, tuple(params))] = text
        return self


def web_handler(script: WebBackendScript) -> Callable:
    def handle(effect):
        if isinstance(effect, WsGet):
            key = (effect.url, effect.params)

            def get(_, env):
                try:
                    return script.get_responses[key]
                except KeyError:
                    raise EvaluationError(f"no scripted response for {effect.url}") from None
            return HostArrow(get, effect.debug())
        if isinstance(effect, WsPost):
            def post(body, env):
                script.post_log.append((effect.url, effect.params, body))
                return ()
            return HostArrow(post, effect.debug())
        raise TypeError(f"not a web-service effect: {effect!r}")
    return handle


# -- smart constructors ------------------------------------------------------

def get_state(sig=StateEffect, kind=FreerChoiceArrow):
    return kind.embed(injection(StateEffect, sig)(GET))


def put_state(sig=StateEffect, kind=FreerChoiceArrow):
    return kind.embed(injection(StateEffect, sig)(PUT))


def ws_get(url, params=(), sig=WebServiceEffect, kind=FreerChoiceArrow):
    return kind.embed(injection(WebServiceEffect, sig)(WsGet(url, params)))


def ws_post(url, params=(), sig=WebServiceEffect, kind=FreerChoiceArrow):
    return kind.embed(injection(WebServiceEffect, sig)(WsPost(url, params)))


# -- fixtures ----------------------------------------------------------------

_INT = re.compile(r"[+-]?[0-9]+")


def parse_int(text: str) -> int:
    """Strict decimal, surrounding whitespace allowed."""
    stripped = text.strip()
    if not _INT.fullmatch(stripped):
        raise EvaluationError(f"not a decimal integer: {text!r}")
    return int(stripped)


def _unit(_):
    return ()


def echo_ws(url1="url1", url2="url2", params=(), kind=FreerArrow):
    return ws_get(url1, params, kind=kind) >> ws_post(url2, params, kind=kind)


def forward(url1="url1", url2="url2", url3="url3", params=(), kind=FreerArrow):
    return (ws_get(url1, params, kind=kind)
            >> fanout(ws_post(url2, params, kind=kind), ws_post(url3, params, kind=kind))
            >> kind.arr(_unit))


def forward_if(url1="url1", url2="url2", url3="url3", params=(), m1="m1", m2="m2"):
    kind = FreerChoiceArrow

    def pick(n):
        return Left(m1) if n > 0 else Right(m2)

    return (ws_get(url1, params, kind=kind)
            >> kind.arr(parse_int)
            >> kind.arr(pick)
            >> fanin(ws_post(url2, params, kind=kind), ws_post(url3, params, kind=kind)))


FIXTURES = {
    "echo_ws": echo_ws,
    "forward": forward,
    "forward_if": forward_if,
}


def fixtures() -> dict:
    return {name: make() for name, make in FIXTURES.items()}
