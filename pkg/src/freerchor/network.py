"""Endpoint programs, endpoint projection and their execution.

:func:`epp` turns a choreography into the program one location runs. It is
an ordinary interpretation of the choreography chain whose target is again a
freer chain, so projection finishes before anything runs and its result can
be inspected with :func:`collect`.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Any

from .arrows import FuncArrow, HostArrow, HostEnv, Left, Right
from .choreo import (
    ABSENT,
    CommC,
    CondC,
    LocalC,
    Located,
    Location,
    LocationError,
    as_location,
    participants,
)
from .codec import Codec, DecodeError
from .freer import LIST, FreerChoiceArrow
from .transport import InMemoryTransport, Message, PeerFailed, Transport

NetworkProgram = FreerChoiceArrow


class ProtocolError(RuntimeError):
    pass


# -- operations ----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class RunN:
    inner: HostArrow

    def debug(self):
        return f"Run({getattr(self.inner, 'name', None) or 'local'})"


@dataclass(frozen=True, eq=False)
class SendN:
    dst: Location
    codec: Codec

    def debug(self):
        return f"Send({self.dst})"


@dataclass(frozen=True, eq=False)
class RecvN:
    src: Location
    codec: Codec
    kind: str = "data"

    def debug(self):
        return f"Recv({self.src})" if self.kind == "data" else f"Recv({self.src}, {self.kind})"


@dataclass(frozen=True, eq=False)
class BCastN:
    targets: tuple
    codec: Codec

    def __post_init__(self):
        if not self.targets:
            raise ValueError("broadcast needs at least one target")
        object.__setattr__(self, "targets", tuple(sorted(self.targets)))

    def debug(self):
        return f"BCast({', '.join(map(str, self.targets))})"


# -- events ------------------------------------------------------------------

@dataclass(frozen=True)
class LocalStep:
    def __str__(self):
        return "LocalStep"


@dataclass(frozen=True)
class Sent:
    loc: Location

    def __str__(self):
        return f"Sent({self.loc})"


@dataclass(frozen=True)
class Received:
    loc: Location

    def __str__(self):
        return f"Received({self.loc})"


@dataclass(frozen=True)
class Broadcast:
    locs: tuple

    def __str__(self):
        return "Broadcast({" + ", ".join(map(str, self.locs)) + "})"


def event_of(op):
    if isinstance(op, RunN):
        return LocalStep()
    if isinstance(op, SendN):
        return Sent(op.dst)
    if isinstance(op, RecvN):
        return Received(op.src)
    if isinstance(op, BCastN):
        return Broadcast(op.targets)
    raise TypeError(f"not a network operation: {op!r}")


def collect(p: FreerChoiceArrow) -> list:
    """Every endpoint event the program may perform, in program order.

    Events inside either arm of a branch are all included.
    """
    return list(p.approximate(lambda op: (event_of(op),), LIST))


def partners(p: FreerChoiceArrow) -> frozenset:
    found = set()
    for ev in collect(p):
        if isinstance(ev, (Sent, Received)):
            found.add(ev.loc)
        elif isinstance(ev, Broadcast):
            found.update(ev.locs)
    return frozenset(found)


def broadcast_targets(p: FreerChoiceArrow) -> list:
    return [ev.locs for ev in collect(p) if isinstance(ev, Broadcast)]


# -- projection ----------------------------------------------------------------

def _const(v):
    return lambda _: v


def _unwrap_at(loc):
    return lambda v: v.unwrap(loc)


def _wrap_at(loc):
    return lambda v: Located(loc, v)


def _absent_result(op: CondC):
    if op.result_owner is None:
        return ()
    return Located(op.result_owner, ABSENT)


def epp(c: FreerChoiceArrow, role) -> FreerChoiceArrow:
    """Project choreography ``c`` onto ``role``."""
    role = as_location(role)
    return c.interp(_ProjectionHandler(role), NetworkProgram)


class _ProjectionHandler:

    def __init__(self, role: Location):
        self.role = role

    def __call__(self, op):
        N = NetworkProgram
        role = self.role
        if isinstance(op, LocalC):
            if role == op.loc:
                return N.hom(_unwrap_at(role)) >> N.embed(RunN(op.inner)) >> N.hom(_wrap_at(role))
            return N.hom(_const(Located(op.loc, ABSENT)))
        if isinstance(op, CommC):
            if role == op.src:
                return (N.hom(_unwrap_at(role)) >> N.embed(SendN(op.dst, op.codec))
                        >> N.hom(_const(Located(op.dst, ABSENT))))
            if role == op.dst:
                return (N.hom(_const(())) >> N.embed(RecvN(op.src, op.codec))
                        >> N.hom(_wrap_at(role)))
            return N.hom(_const(Located(op.dst, ABSENT)))
        if isinstance(op, CondC):
            involved = participants(op.sub) | {op.loc}
            if role == op.loc:
                others = sorted(involved - {role})
                if others:
                    head = N.embed(BCastN(tuple(others), op.codec))
                else:
                    head = N.hom(_unwrap_at(role))
                return head >> epp(op.sub, role)
            if role in involved:
                return (N.hom(_const(())) >> N.embed(RecvN(op.loc, op.codec, "choice"))
                        >> epp(op.sub, role))
            return N.hom(_const(_absent_result(op)))
        raise TypeError(f"not a choreography operation: {op!r}")


# -- execution -----------------------------------------------------------------

@dataclass
class EndpointLink:
    """One location's view of a transport, with sequence numbering and logs."""

    location: Location
    transport: Transport
    timeout: float | None = 5.0
    sent_seq: dict = field(default_factory=dict)
    recv_seq: dict = field(default_factory=dict)
    # ("send" | "recv", peer name, seq, kind) per message
    messages: list = field(default_factory=list)
    # Event per executed network operation
    events: list = field(default_factory=list)

    def send(self, dst: Location, payload: str, kind: str = "data"):
        seq = self.sent_seq.get(dst, 0)
        self.sent_seq[dst] = seq + 1
        self.transport.send(Message(str(self.location), str(dst), seq, kind, payload))
        self.messages.append(("send", str(dst), seq, kind))

    def recv(self, src: Location, codec: Codec, kind: str = "data"):
        msg = self.transport.recv(self.location, src, self.timeout)
        expected = self.recv_seq.get(src, 0)
        if msg.seq != expected:
            raise ProtocolError(f"message from {src} has seq {msg.seq}, expected {expected}")
        if msg.kind != kind:
            raise ProtocolError(f"message from {src} seq {msg.seq} is {msg.kind}, expected {kind}")
        self.recv_seq[src] = expected + 1
        self.messages.append(("recv", str(src), msg.seq, kind))
        try:
            return codec.decode(msg.payload)
        except DecodeError as exc:
            raise DecodeError(f"cannot decode message from {src} seq {msg.seq}: {exc}") from None


def _run(op: RunN):
    inner = op.inner

    def go(x, env):
        env.network.events.append(LocalStep())
        return inner.fn(x, env)
    return HostArrow(go, op.debug())


def network_handler(op) -> HostArrow:
    """Meaning of each endpoint operation as a host procedure."""
    if isinstance(op, RunN):
        return _run(op)
    if isinstance(op, SendN):
        def send(v, env):
            env.network.events.append(Sent(op.dst))
            env.network.send(op.dst, op.codec.encode(v))
            return ()
        return HostArrow(send, op.debug())
    if isinstance(op, RecvN):
        def recv(_, env):
            env.network.events.append(Received(op.src))
            return env.network.recv(op.src, op.codec, op.kind)
        return HostArrow(recv, op.debug())
    if isinstance(op, BCastN):
        def bcast(located, env):
            value = located.unwrap(env.location)
            env.network.events.append(Broadcast(op.targets))
            payload = op.codec.encode(value)
            for target in op.targets:
                env.network.send(target, payload, "choice")
            return value
        return HostArrow(bcast, op.debug())
    raise TypeError(f"not a network operation: {op!r}")


def run_endpoint(p: FreerChoiceArrow, role, transport: Transport, env: HostEnv,
                 input=(), timeout: float | None = 5.0):
    role = as_location(role)
    env.location = role
    if env.network is None or env.network.transport is not transport:
        env.network = EndpointLink(role, transport, timeout)
    return p.interp(network_handler, HostArrow).run(input, env)


# -- global reference interpreter -------------------------------------------------

def _global_handler(envs: dict):
    def handle(op):
        if isinstance(op, LocalC):
            env = envs[op.loc]
            return FuncArrow(lambda v: Located(op.loc, op.inner.fn(v.unwrap(op.loc), env)))
        if isinstance(op, CommC):
            codec = op.codec
            return FuncArrow(
                lambda v: Located(op.dst, codec.decode(codec.encode(v.unwrap(op.src)))))
        if isinstance(op, CondC):
            sub = op.sub.interp(handle, FuncArrow)

            def branch(v):
                scrutinee = op.codec.decode(op.codec.encode(v.unwrap(op.loc)))
                out = sub.fn(scrutinee)
                _check_branch_result(op, out)
                return out
            return FuncArrow(branch)
        raise TypeError(f"not a choreography operation: {op!r}")
    return handle


def _check_branch_result(op: CondC, out):
    if op.result_owner is None:
        if out != ():
            raise LocationError(f"branch at {op.loc} must return unit, got {out!r}")
    elif not (isinstance(out, Located) and out.owner == op.result_owner):
        raise LocationError(f"branch at {op.loc} must return a value at {op.result_owner}")


def global_interp(c: FreerChoiceArrow, envs: dict, input=()):
    """Run the choreography as one sequential program; no transport involved.

    Returns the output and each location's store.
    """
    envs = {as_location(k): v for k, v in envs.items()}
    for loc, env in envs.items():
        env.location = loc
    out = c.interp(_global_handler(envs), FuncArrow).apply(input)
    return out, {loc: env.store for loc, env in envs.items()}


def restrict(value, role):
    """What ``role`` holds of a globally computed value."""
    role = as_location(role)
    if isinstance(value, Located):
        return value if value.owner == role else Located(value.owner, ABSENT)
    if isinstance(value, tuple):
        return tuple(restrict(v, role) for v in value)
    if isinstance(value, Left):
        return Left(restrict(value.value, role))
    if isinstance(value, Right):
        return Right(restrict(value.value, role))
    return value


# -- running every endpoint ----------------------------------------------------

@dataclass
class ProjectedRun:
    outputs: dict
    stores: dict
    links: dict
    transport: Any


def run_projected(c: FreerChoiceArrow, envs: dict, input=(), transport=None,
                  timeout: float = 5.0) -> ProjectedRun:
    """Run the projection for each location in ``envs`` on its own thread."""
    envs = {as_location(k): v for k, v in envs.items()}
    if transport is None:
        transport = InMemoryTransport(envs)
    programs = {loc: epp(c, loc) for loc in envs}
    outputs, errors = {}, []

    def worker(loc):
        try:
            outputs[loc] = run_endpoint(programs[loc], loc, transport, envs[loc], input, timeout)
        except BaseException as exc:  # reported to the caller below
            errors.append(exc)
            if not isinstance(exc, PeerFailed):
                transport.abort(PeerFailed(f"endpoint {loc} failed: {exc}"))

    threads = [threading.Thread(target=worker, args=(loc,), daemon=True, name=str(loc))
               for loc in sorted(envs)]
    for t in threads:
        t.start()
    for t in threads:
        t.join(timeout)
        if t.is_alive():
            raise TimeoutError(f"endpoint {t.name} did not finish within {timeout}s")
    if errors:
        # peers woken by the abort only echo the root cause
        raise next((e for e in errors if not isinstance(e, PeerFailed)), errors[0])
    return ProjectedRun(outputs, {loc: env.store for loc, env in envs.items()},
                        {loc: env.network for loc, env in envs.items()}, transport)
