"""Choreographies: one global program describing every party of a protocol.

A choreography is a :class:`FreerChoiceArrow` over three operations:

``LocalC(l, ar)``  run ``ar`` at ``l``             ``Located[b] -> Located[a]``
``CommC(s, d)``    move a value from ``s`` to ``d``  ``Located[t] -> Located[t]``
``CondC(l, sub)``  branch at ``l`` on the value     ``Located[b] -> a``

Because the choreography is data, its participants can be computed without
running it. Endpoint projection (see :mod:`freerchor.network`) uses that to
broadcast a branch choice only to the parties involved in the branch.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Any

from .arrows import HostArrow, Left, Right, fanin, fanout, fst
from .codec import TEXT, UNIT, Codec, DecodeError, either_codec
from .freer import SET, FreerChoiceArrow

Choreography = FreerChoiceArrow


class LocationError(RuntimeError):
    """A located value was used somewhere it does not live."""


class ChoreographyError(ValueError):
    """A choreography violates a construction rule."""


_NAME = re.compile(r"\S+")


@dataclass(frozen=True, order=True)
class Location:
    name: str

    def __post_init__(self):
        if not isinstance(self.name, str) or not _NAME.fullmatch(self.name):
            raise ValueError(f"invalid location name: {self.name!r}")

    def __str__(self):
        return self.name


def as_location(loc) -> Location:
    return loc if isinstance(loc, Location) else Location(loc)


class _Absent:
    __slots__ = ()

    def __repr__(self):
        return "ABSENT"

    def __reduce__(self):
        return "ABSENT"


ABSENT = _Absent()


@dataclass(frozen=True)
class Located:
    owner: Location
    value: Any = ABSENT

    @property
    def present(self) -> bool:
        return self.value is not ABSENT

    def unwrap(self, at: Location):
        if self.owner != at:
            raise LocationError(f"value owned by {self.owner} unwrapped at {at}")
        if not self.present:
            raise LocationError(f"value at {at} is absent")
        return self.value

    def __repr__(self):
        return f"{self.value!r}@{self.owner}"


# -- operations ----------------------------------------------------------------

def _inner_name(ar):
    return getattr(ar, "name", None) or "local"


@dataclass(frozen=True, eq=False)
class LocalC:
    loc: Location
    inner: HostArrow

    def debug(self):
        return f"Local({self.loc}: {_inner_name(self.inner)})"


@dataclass(frozen=True, eq=False)
class CommC:
    src: Location
    dst: Location
    codec: Codec = TEXT

    def debug(self):
        return f"Comm({self.src} -> {self.dst})"


@dataclass(frozen=True, eq=False)
class CondC:
    loc: Location
    sub: FreerChoiceArrow
    codec: Codec = UNIT
    # None: the branch returns unit; otherwise it returns a value located here
    result_owner: Location | None = None

    def debug(self):
        lines = [f"Cond({self.loc})"]
        lines.extend("  " + line for line in self.sub.render_lines())
        return "\n".join(lines)


def _op_participants(op) -> frozenset:
    if isinstance(op, LocalC):
        return frozenset({op.loc})
    if isinstance(op, CommC):
        return frozenset({op.src, op.dst})
    if isinstance(op, CondC):
        return frozenset({op.loc}) | participants(op.sub)
    raise TypeError(f"not a choreography operation: {op!r}")


def participants(c: FreerChoiceArrow) -> frozenset:
    return c.approximate(_op_participants, SET)


# -- smart constructors ----------------------------------------------------------

def locally(loc, inner: HostArrow) -> FreerChoiceArrow:
    return Choreography.embed(LocalC(as_location(loc), inner))


def locally0(loc, inner: HostArrow) -> FreerChoiceArrow:
    """Like :func:`locally` but starting from a plain unit input."""
    return wrap(loc) >> locally(loc, inner)


def comm(src, dst, codec: Codec = TEXT) -> FreerChoiceArrow:
    src, dst = as_location(src), as_location(dst)
    if src == dst:
        raise ChoreographyError(f"communication from {src} to itself")
    return Choreography.embed(CommC(src, dst, codec))


def cond_raw(loc, sub: FreerChoiceArrow, codec: Codec = UNIT,
             result_owner=None) -> FreerChoiceArrow:
    loc = as_location(loc)
    if result_owner is not None:
        result_owner = as_location(result_owner)
        if result_owner not in participants(sub) | {loc}:
            raise ChoreographyError(
                f"branch result owner {result_owner} does not take part in the branch")
    return Choreography.embed(CondC(loc, sub, codec, result_owner))


def cond_prime(loc, scrutinee: HostArrow, sub: FreerChoiceArrow,
               codec: Codec = UNIT, result_owner=None) -> FreerChoiceArrow:
    """Compute a value at ``loc`` then branch on it with ``sub``."""
    return locally(loc, scrutinee) >> cond_raw(loc, sub, codec, result_owner)


def wrap(loc) -> FreerChoiceArrow:
    loc = as_location(loc)
    return Choreography.hom(lambda v: Located(loc, v))


def _const_unit(_):
    return ()


def discard() -> FreerChoiceArrow:
    return Choreography.hom(_const_unit)


# -- fixture domain ------------------------------------------------------------

CLIENT = Location("client")
SERVER = Location("server")
PRIMARY = Location("primary")
BACKUP = Location("backup")


@dataclass(frozen=True)
class Put:
    key: str
    value: str

    def __str__(self):
        return f"Put {self.key} {self.value}"


@dataclass(frozen=True)
class Get:
    key: str

    def __str__(self):
        return f"Get {self.key}"


def parse_request(text: str):
    parts = text.split(" ")
    if len(parts) == 3 and parts[0] == "Put" and parts[1] and parts[2]:
        return Put(parts[1], parts[2])
    if len(parts) == 2 and parts[0] == "Get" and parts[1]:
        return Get(parts[1])
    raise DecodeError(f"not a request: {text!r}")


REQUEST = Codec("request", str, parse_request)
PUT_OR_UNIT = either_codec(REQUEST, UNIT)


def as_put(req):
    if isinstance(req, Put):
        return Left(req)
    return Right(())


def _read_line(_, env):
    return env.next_input()


def _read_request(_, env):
    return parse_request(env.next_input())


def _handle_request(req, env):
    if isinstance(req, Put):
        env.store[req.key] = req.value
        return "Ack"
    return env.store.get(req.key, "NotFound")


get_input = HostArrow(_read_line, "getInput")
get_request = HostArrow(_read_request, "getRequest")
handle_request = HostArrow(_handle_request, "handleRequest")
as_put_local = HostArrow(lambda req, env: as_put(req), "asPut")


def echo_choreo(get_input: HostArrow = get_input) -> FreerChoiceArrow:
    return (locally0(CLIENT, get_input)
            >> comm(CLIENT, SERVER)
            >> comm(SERVER, CLIENT))


def kvs_choreo(get_request: HostArrow = get_request,
               handle_request: HostArrow = handle_request) -> FreerChoiceArrow:
    replicate = (wrap(PRIMARY)
                 >> comm(PRIMARY, BACKUP, REQUEST)
                 >> locally(BACKUP, handle_request)
                 >> discard())
    branch = cond_prime(PRIMARY, as_put_local, fanin(replicate, discard()),
                        codec=PUT_OR_UNIT)
    return (locally0(CLIENT, get_request)
            >> comm(CLIENT, PRIMARY, REQUEST)
            >> fanout(locally(PRIMARY, handle_request), branch)
            >> Choreography.hom(fst)
            >> comm(PRIMARY, CLIENT))


@dataclass(frozen=True)
class ChoreoFixture:
    name: str
    build: Any
    locations: tuple
    input_location: Location
    description: str = ""


CHOREOGRAPHIES = {
    "echo": ChoreoFixture("echo", echo_choreo, (CLIENT, SERVER), CLIENT,
                          "client sends a line to server, server echoes it back"),
    "kvs": ChoreoFixture("kvs", kvs_choreo, (BACKUP, CLIENT, PRIMARY), CLIENT,
                         "key-value store with a primary and a backup replica"),
}


def choreo_fixtures() -> dict:
    return {name: fx.build() for name, fx in CHOREOGRAPHIES.items()}
