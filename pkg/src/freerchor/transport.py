"""Message transports between named locations.

Both transports are reliable and FIFO per directed pair. Frames on TCP are
one JSON object per line::

    {"src":"client","dst":"server","seq":0,"kind":"data","payload":"hello"}
"""
from __future__ import annotations

import json
import socket
import threading
import time
from collections import Counter, deque
from dataclasses import asdict, dataclass

KINDS = ("data", "choice")


class TransportError(RuntimeError):
    pass


class PeerFailed(TransportError):
    """Raised to endpoints still waiting after another endpoint has failed."""


@dataclass(frozen=True)
class Message:
    src: str
    dst: str
    seq: int
    kind: str
    payload: str

    def to_wire(self) -> str:
        return json.dumps(asdict(self), separators=(",", ":"), ensure_ascii=False) + "\n"

    @classmethod
    def from_wire(cls, line: str) -> "Message":
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as exc:
            raise TransportError(f"malformed frame: {exc}") from None
        if not isinstance(obj, dict) or set(obj) != {"src", "dst", "seq", "kind", "payload"}:
            raise TransportError(f"malformed frame: {line.strip()!r}")
        if (not isinstance(obj["seq"], int) or obj["seq"] < 0 or obj["kind"] not in KINDS
                or not all(isinstance(obj[k], str) for k in ("src", "dst", "payload"))):
            raise TransportError(f"malformed frame: {line.strip()!r}")
        return cls(**obj)


class _Mailbox:
    """Per-sender FIFO queues for one receiving location."""

    def __init__(self):
        self._cond = threading.Condition()
        self._queues: dict[str, deque] = {}
        self._error: Exception | None = None

    def put(self, msg: Message):
        with self._cond:
            self._queues.setdefault(msg.src, deque()).append(msg)
            self._cond.notify_all()

    def fail(self, error: Exception):
        with self._cond:
            self._error = error
            self._cond.notify_all()

    def get(self, src: str, timeout: float | None) -> Message:
        deadline = None if timeout is None else time.monotonic() + timeout
        with self._cond:
            while True:
                q = self._queues.get(src)
                if q:
                    return q.popleft()
                if self._error is not None:
                    raise self._error
                remaining = None if deadline is None else deadline - time.monotonic()
                if remaining is not None and remaining <= 0:
                    raise TransportError(f"timed out waiting for a message from {src}")
                self._cond.wait(remaining)


class Transport:
    """``register`` a location, then ``send`` messages and ``recv`` them by sender."""

    def register(self, loc):
        raise NotImplementedError

    def send(self, msg: Message):
        raise NotImplementedError

    def recv(self, at, src, timeout: float | None = None) -> Message:
        raise NotImplementedError

    def abort(self, error: Exception):
        """Wake every pending and future ``recv`` with ``error``."""

    def close(self):
        pass


class InMemoryTransport(Transport):

    def __init__(self, locations=()):
        self._boxes: dict[str, _Mailbox] = {}
        self._lock = threading.Lock()
        self.delivered = Counter()
        for loc in locations:
            self.register(loc)

    def register(self, loc):
        name = str(loc)
        with self._lock:
            if name in self._boxes:
                raise TransportError(f"location {name} registered twice")
            self._boxes[name] = _Mailbox()

    def _box(self, name) -> _Mailbox:
        try:
            return self._boxes[name]
        except KeyError:
            raise TransportError(f"unregistered location {name}") from None

    def send(self, msg: Message):
        self._box(msg.src)
        box = self._box(msg.dst)
        with self._lock:
            self.delivered[msg.dst] += 1
        box.put(msg)

    def abort(self, error: Exception):
        for box in list(self._boxes.values()):
            box.fail(error)

    def recv(self, at, src, timeout=None) -> Message:
        if str(src) not in self._boxes:
            raise TransportError(f"recv from unregistered location {src}")
        return self._box(str(at)).get(str(src), timeout)


def parse_address(text: str) -> tuple[str, int]:
    host, sep, port = text.rpartition(":")
    if not sep or not host or not port.isdigit():
        raise ValueError(f"expected host:port, got {text!r}")
    return host, int(port)


def load_endpoint_config(path) -> dict[str, tuple[str, int]]:
    """Read a JSON object mapping location names to ``"host:port"``."""
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict):
        raise ValueError(f"{path}: expected a JSON object of location -> host:port")
    return {name: parse_address(addr) for name, addr in raw.items()}


class TcpTransport(Transport):
    """One listening socket for ``self_loc``; outbound connections opened lazily."""

    def __init__(self, config: dict, self_loc, connect_timeout: float = 5.0):
        self.config = {str(k): v for k, v in config.items()}
        self.self_loc = str(self_loc)
        if self.self_loc not in self.config:
            raise TransportError(f"no address configured for {self.self_loc}")
        self.connect_timeout = connect_timeout
        self._box = _Mailbox()
        self._out: dict[str, socket.socket] = {}
        self._out_lock = threading.Lock()
        self._conns: list[socket.socket] = []
        self._closed = False
        host, port = self.config[self.self_loc]
        self._server = socket.create_server((host, port), reuse_port=False)
        self._acceptor = threading.Thread(target=self._accept_loop, daemon=True)
        self._acceptor.start()

    def register(self, loc):
        if str(loc) != self.self_loc:
            raise TransportError(f"this transport serves {self.self_loc}, not {loc}")

    def _accept_loop(self):
        while not self._closed:
            try:
                conn, addr = self._server.accept()
            except OSError:
                return
            self._conns.append(conn)
            threading.Thread(target=self._read_loop, args=(conn, addr), daemon=True).start()

    def _read_loop(self, conn, addr):
        peer = f"{addr[0]}:{addr[1]}"
        with conn.makefile("r", encoding="utf-8", newline="\n") as fh:
            try:
                for line in fh:
                    msg = Message.from_wire(line)
                    if msg.dst != self.self_loc:
                        raise TransportError(
                            f"frame for {msg.dst} delivered to {self.self_loc}")
                    self._box.put(msg)
            except TransportError as exc:
                self._box.fail(TransportError(f"from peer {peer}: {exc}"))
            except (OSError, ValueError) as exc:
                if not self._closed:
                    self._box.fail(TransportError(f"connection from {peer} reset: {exc}"))

    def _connect(self, dst: str) -> socket.socket:
        try:
            addr = self.config[dst]
        except KeyError:
            raise TransportError(f"no address configured for {dst}") from None
        deadline = time.monotonic() + self.connect_timeout
        while True:
            try:
                return socket.create_connection(addr, timeout=self.connect_timeout)
            except OSError as exc:
                # peer may still be starting up
                if time.monotonic() >= deadline:
                    raise TransportError(f"cannot connect to {dst} at {addr}: {exc}") from None
                time.sleep(0.05)

    def send(self, msg: Message):
        if msg.src != self.self_loc:
            raise TransportError(f"{self.self_loc} cannot send as {msg.src}")
        with self._out_lock:
            sock = self._out.get(msg.dst)
            if sock is None:
                sock = self._out[msg.dst] = self._connect(msg.dst)
            try:
                sock.sendall(msg.to_wire().encode("utf-8"))
            except OSError as exc:
                raise TransportError(f"connection to {msg.dst} failed: {exc}") from None

    def recv(self, at, src, timeout=None) -> Message:
        self.register(at)
        if str(src) not in self.config:
            raise TransportError(f"recv from unknown location {src}")
        return self._box.get(str(src), timeout)

    def abort(self, error: Exception):
        self._box.fail(error)

    def close(self):
        self._closed = True
        with self._out_lock:
            for sock in self._out.values():
                try:
                    sock.shutdown(socket.SHUT_WR)
                except OSError:
                    pass
                sock.close()
            self._out.clear()
        self._server.close()
        for conn in self._conns:
            conn.close()
