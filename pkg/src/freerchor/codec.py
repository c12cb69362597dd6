"""Text codecs for values that cross the wire."""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, Callable

from .arrows import Left, Right


class DecodeError(ValueError):
    pass


@dataclass(frozen=True)
class Codec:
    name: str
    encode: Callable[[Any], str]
    decode: Callable[[str], Any]

    def __repr__(self):
        return f"Codec({self.name})"


def _text_encode(v):
    if not isinstance(v, str):
        raise TypeError(f"text codec expects str, got {type(v).__name__}")
    return v


TEXT = Codec("text", _text_encode, lambda s: s)


def _int_decode(s):
    try:
        return int(s)
    except ValueError:
        raise DecodeError(f"not an integer: {s!r}") from None


INT = Codec("int", lambda v: str(int(v)), _int_decode)


def _unit_decode(s):
    if s != "()":
        raise DecodeError(f"not unit: {s!r}")
    return ()


UNIT = Codec("unit", lambda v: "()", _unit_decode)


def _json_encode(v):
    return json.dumps(_to_jsonable(v), sort_keys=True, separators=(",", ":"))


def _to_jsonable(v):
    if isinstance(v, Left):
        return {"Left": _to_jsonable(v.value)}
    if isinstance(v, Right):
        return {"Right": _to_jsonable(v.value)}
    if isinstance(v, tuple):
        return {"tuple": [_to_jsonable(x) for x in v]}
    if isinstance(v, list):
        return [_to_jsonable(x) for x in v]
    return v


def _from_jsonable(v):
    if isinstance(v, dict):
        if set(v) == {"Left"}:
            return Left(_from_jsonable(v["Left"]))
        if set(v) == {"Right"}:
            return Right(_from_jsonable(v["Right"]))
        if set(v) == {"tuple"}:
            return tuple(_from_jsonable(x) for x in v["tuple"])
        raise DecodeError(f"unknown tagged object: {v!r}")
    if isinstance(v, list):
        return [_from_jsonable(x) for x in v]
    return v


def _json_decode(s):
    try:
        return _from_jsonable(json.loads(s))
    except json.JSONDecodeError as exc:
        raise DecodeError(f"bad json payload: {exc}") from None


# ints, strings, tuples, lists, Left/Right and unit
JSON = Codec("json", _json_encode, _json_decode)


def either_codec(left: Codec, right: Codec) -> Codec:
    def encode(v):
        if isinstance(v, Left):
            return "L " + left.encode(v.value)
        if isinstance(v, Right):
            return "R " + right.encode(v.value)
        raise TypeError(f"expected Left or Right, got {v!r}")

    def decode(s):
        tag, sep, rest = s.partition(" ")
        if sep and tag == "L":
            return Left(left.decode(rest))
        if sep and tag == "R":
            return Right(right.decode(rest))
        raise DecodeError(f"not an either value: {s!r}")

    return Codec(f"either({left.name},{right.name})", encode, decode)
