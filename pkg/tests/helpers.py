"""Random program generators and independent oracles shared by the tests."""
from __future__ import annotations

import random
from dataclasses import dataclass

from freerchor.arrows import (
    FuncArrow,
    HostArrow,
    HostEnv,
    Left,
    Right,
    StateArrow,
    compose_fn,
    fanin,
    fanout,
    first_fn,
    fst,
    left_fn,
)
from freerchor.choreo import Location, comm, cond_prime, discard, locally, locally0, wrap
from freerchor.codec import INT, JSON
from freerchor.effects import (
    GET,
    PUT,
    StateEffect,
    Sum,
    WebBackendScript,
    WebServiceEffect,
    WsGet,
    WsPost,
    combine_handlers,
    get_state,
    host_state_handler,
    parse_int,
    put_state,
    state_handler,
    web_handler,
    ws_get,
    ws_post,
)
from freerchor.freer import FreerArrow, FreerChoiceArrow, FreerPreArrow
from freerchor.network import global_interp, restrict, run_projected
from freerchor.transport import InMemoryTransport


# -- a pure effect signature, for interpreting into FuncArrow -------------------

@dataclass(frozen=True)
class Affine:
    scale: int
    shift: int

    def debug(self):
        return f"Affine({self.scale}, {self.shift})"


def affine_handler(effect):
    return FuncArrow(lambda x: x * effect.scale + effect.shift)


# -- random integer programs -------------------------------------------------
#
# AST nodes:
#   ("get",) ("put",)          state effects, or Affine stand-ins for the pure backend
#   ("pure", a, b)             x -> a*x + b
#   ("seq", p, q)
#   ("fan", p, q)              fanout then add (needs strength)
#   ("branch", k, p, q)        p when x % k == 0 else q (needs choice)

def random_ast(rng: random.Random, depth: int, kind=FreerChoiceArrow):
    leaves = ["get", "put", "pure"]
    nodes = ["seq"]
    if kind in (FreerArrow, FreerChoiceArrow):
        nodes.append("fan")
    if kind is FreerChoiceArrow:
        nodes.append("branch")
    if depth <= 0 or rng.random() < 0.3:
        tag = rng.choice(leaves)
        if tag == "pure":
            return ("pure", rng.randint(-2, 2), rng.randint(-3, 3))
        return (tag,)
    tag = rng.choice(nodes)
    p = random_ast(rng, depth - 1, kind)
    q = random_ast(rng, depth - 1, kind)
    if tag == "branch":
        return ("branch", rng.randint(2, 3), p, q)
    return (tag, p, q)


PURE_STANDINS = {"get": Affine(1, 1), "put": Affine(2, -1)}


def build(ast, kind=FreerChoiceArrow, pure=False):
    tag = ast[0]
    if tag in ("get", "put"):
        if pure:
            return kind.embed(PURE_STANDINS[tag])
        return kind.embed(GET if tag == "get" else PUT)
    if tag == "pure":
        _, a, b = ast
        return kind.hom(lambda x: a * x + b)
    if tag == "seq":
        return build(ast[1], kind, pure) >> build(ast[2], kind, pure)
    if tag == "fan":
        return fanout(build(ast[1], kind, pure), build(ast[2], kind, pure)) >> kind.hom(
            lambda p: p[0] + p[1])
    if tag == "branch":
        k = ast[1]
        split = kind.hom(lambda x: Left(x) if x % k == 0 else Right(x))
        return split >> fanin(build(ast[2], kind, pure), build(ast[3], kind, pure))
    raise ValueError(ast)


def eval_ast(ast, x, store, trace):
    """Direct evaluation against a one-cell mutable store; ``trace`` records effects."""
    tag = ast[0]
    if tag == "get":
        trace.append("GetS")
        return store[0]
    if tag == "put":
        trace.append("PutS")
        store[0] = x
        return x
    if tag == "pure":
        return ast[1] * x + ast[2]
    if tag == "seq":
        return eval_ast(ast[2], eval_ast(ast[1], x, store, trace), store, trace)
    if tag == "fan":
        return eval_ast(ast[1], x, store, trace) + eval_ast(ast[2], x, store, trace)
    if tag == "branch":
        return eval_ast(ast[2] if x % ast[1] == 0 else ast[3], x, store, trace)
    raise ValueError(ast)


def eval_pure_ast(ast, x):
    tag = ast[0]
    if tag in ("get", "put"):
        e = PURE_STANDINS[tag]
        return x * e.scale + e.shift
    if tag == "pure":
        return ast[1] * x + ast[2]
    if tag == "seq":
        return eval_pure_ast(ast[2], eval_pure_ast(ast[1], x))
    if tag == "fan":
        return eval_pure_ast(ast[1], x) + eval_pure_ast(ast[2], x)
    return eval_pure_ast(ast[2] if x % ast[1] == 0 else ast[3], x)


def walk_chain(program, x, store, trace):
    """Evaluate a freer chain by stepping through its stages with a mutable store."""
    def fire(effect, a):
        trace.append(effect.debug())
        if effect == GET:
            return store[0]
        store[0] = a
        return a

    node = program
    while not node.is_pure:
        routed = node.pre(x)
        if isinstance(node, FreerPreArrow):
            x = fire(node.effect, routed)
        elif isinstance(node, FreerChoiceArrow):
            if isinstance(routed, Left):
                a, c = routed.value
                x = Left((fire(node.effect, a), c))
            else:
                x = routed
        else:
            a, c = routed
            x = (fire(node.effect, a), c)
        node = node.rest
    return node.fn(x)


# -- random choreographies -------------------------------------------------------

LOCS = (Location("a"), Location("b"), Location("c"))


def _bump(k, loc):
    def go(n, env):
        env.store.setdefault("log", []).append(n)
        return n + k
    return HostArrow(go, f"bump{k}@{loc}")


def _read_int(_, env):
    return int(env.next_input())


def _parity(n, env):
    return Left(n) if n % 2 == 0 else Right(n)


def random_choreography(rng: random.Random, max_stages: int = 6, allow_cond=True):
    """An ``() -> Located[int]`` choreography over up to three locations."""
    cur = rng.choice(LOCS)
    c = locally0(cur, HostArrow(_read_int, "readInt"))
    for _ in range(rng.randint(1, max_stages - 1)):
        roll = rng.random()
        if roll < 0.35:
            c = c >> locally(cur, _bump(rng.randint(1, 9), cur))
        elif roll < 0.75 or not allow_cond:
            dst = rng.choice([l for l in LOCS if l != cur])
            c = c >> comm(cur, dst, INT)
            cur = dst
        else:
            c = c >> fanout(FreerChoiceArrow.identity(), _random_cond(rng, cur)) >> FreerChoiceArrow.hom(
                lambda p: p[0])
    return c


def _random_branch(rng, owner):
    """A unit-valued branch body that starts from the unwrapped scrutinee at ``owner``."""
    body = wrap(owner)
    cur = owner
    for _ in range(rng.randint(0, 2)):
        if rng.random() < 0.5:
            body = body >> locally(cur, _bump(rng.randint(1, 9), cur))
        else:
            dst = rng.choice([l for l in LOCS if l != cur])
            body = body >> comm(cur, dst, INT)
            cur = dst
    return body >> discard()


def _random_cond(rng, owner):
    branches = fanin(_random_branch(rng, owner), _random_branch(rng, owner))
    return cond_prime(owner, HostArrow(_parity, "parity"), branches, codec=JSON)


def fresh_envs(inputs, locations=LOCS):
    return {loc: HostEnv(loc, list(inputs.get(loc, ()))) for loc in locations}


# -- law suite -------------------------------------------------------------------

BACKENDS = {
    "pure": (FuncArrow, affine_handler, True),
    "state": (StateArrow, state_handler, False),
}


def _evaluate(arrow, pure, x, s):
    return arrow.apply(x) if pure else arrow.run(x, s)


def _random_affine(rng):
    a, b = rng.randint(-3, 3), rng.randint(-5, 5)
    return lambda x: a * x + b


def _sample_input(rng, shape):
    x = rng.randint(-20, 20)
    if shape == "pair":
        return (x, rng.randint(-20, 20))
    if shape == "either":
        return Left(x) if rng.random() < 0.5 else Right(rng.randint(-20, 20))
    return x


def _laws(kind, rng, pure):
    """Name -> (lhs, rhs, input shape); each side maps an interpreter to a backend arrow."""
    K = kind
    f, g, h = (build(random_ast(rng, 3, kind), kind, pure) for _ in range(3))
    pf, pg = _random_affine(rng), _random_affine(rng)
    laws = {
        "category.assoc": (lambda I: I((f >> g) >> h), lambda I: I(f >> (g >> h)), "int"),
        "category.left_unit": (lambda I: I(K.identity() >> f), lambda I: I(f), "int"),
        "category.right_unit": (lambda I: I(f >> K.identity()), lambda I: I(f), "int"),
        "arr.functor": (lambda I: I(K.hom(compose_fn(pf, pg))),
                        lambda I: I(K.hom(pf) >> K.hom(pg)), "int"),
        "interp.compose": (lambda I: I(f >> g), lambda I: I(f) >> I(g), "int"),
    }
    if kind in (FreerArrow, FreerChoiceArrow):
        laws.update({
            "arrow.first_arr": (lambda I: I(K.hom(pf).first()),
                                lambda I: I(K.hom(first_fn(pf))), "pair"),
            "arrow.first_compose": (lambda I: I((f >> g).first()),
                                    lambda I: I(f.first() >> g.first()), "pair"),
            "arrow.first_fst": (lambda I: I(f.first() >> K.hom(fst)),
                                lambda I: I(K.hom(fst) >> f), "pair"),
            "interp.first": (lambda I: I(f.first()), lambda I: I(f).first(), "pair"),
        })
    if kind is FreerChoiceArrow:
        laws.update({
            "choice.left_arr": (lambda I: I(K.hom(pf).left()),
                                lambda I: I(K.hom(left_fn(pf))), "either"),
            "choice.left_compose": (lambda I: I((f >> g).left()),
                                    lambda I: I(f.left() >> g.left()), "either"),
            "choice.left_inject": (lambda I: I(f >> K.hom(Left)),
                                   lambda I: I(K.hom(Left) >> f.left()), "int"),
            "interp.left": (lambda I: I(f.left()), lambda I: I(f).left(), "either"),
        })
    return laws


def law_suite(kind, backend, seed, samples=100):
    """Check every law for one freer variant and backend.

    Returns ``{law: (checked, failures)}``; each sample draws fresh programs and input.
    """
    target, handler, pure = BACKENDS[backend]
    rng = random.Random(seed)

    def interp(p):
        return p.interp(handler, target)

    results = {}
    for _ in range(samples):
        for name, (lhs, rhs, shape) in _laws(kind, rng, pure).items():
            x, s = _sample_input(rng, shape), rng.randint(-20, 20)
            ok = _evaluate(lhs(interp), pure, x, s) == _evaluate(rhs(interp), pure, x, s)
            checked, failed = results.get(name, (0, []))
            results[name] = (checked + 1, failed if ok else failed + [(x, s)])
    return results


# -- projected vs global execution -----------------------------------------------

def compare_projected(c, inputs, locations=LOCS, rounds=1, timeout=5.0):
    """Run ``c`` globally and projected from identical environments.

    Returns ``(runs, mismatches)``; ``runs`` are the projected results per round.
    """
    g_envs = fresh_envs(inputs, locations)
    p_envs = fresh_envs(inputs, locations)
    transport = InMemoryTransport(locations)
    runs, mismatches = [], []
    for r in range(rounds):
        expected, g_stores = global_interp(c, g_envs, ())
        run = run_projected(c, p_envs, (), transport, timeout)
        runs.append(run)
        for loc in locations:
            if run.outputs[loc] != restrict(expected, loc):
                mismatches.append((r, loc, "output", run.outputs[loc], restrict(expected, loc)))
            if run.stores[loc] != g_stores[loc]:
                mismatches.append((r, loc, "store", run.stores[loc], g_stores[loc]))
    return runs, mismatches


def random_inputs(rng, locations=LOCS):
    return {loc: [str(rng.randint(-50, 50))] for loc in locations}


# -- mixed state and web effects ---------------------------------------------------

STATE_WEB = Sum(StateEffect, WebServiceEffect)


def mixed_program(sig=STATE_WEB):
    K = FreerChoiceArrow
    return (get_state(sig)
            >> K.arr(str)
            >> ws_post("log", sig=sig)
            >> ws_get("next", sig=sig)
            >> K.arr(parse_int)
            >> put_state(sig))


def run_mixed(s0, reply):
    script = WebBackendScript().respond("next", reply)
    env = HostEnv("here", store={"state": s0})
    handler = combine_handlers(host_state_handler(), web_handler(script))
    out = mixed_program().interp(handler, HostArrow).run((), env)
    return out, env.store["state"], script.post_log


def run_sequentially(s0, reply):
    """Each effect under its own handler, with the plumbing done by hand."""
    script = WebBackendScript().respond("next", reply)
    web = web_handler(script)
    v, s = state_handler(GET).run((), s0)
    web(WsPost("log")).run(str(v))
    text = web(WsGet("next")).run(())
    out, s = state_handler(PUT).run(parse_int(text), s)
    return out, s, script.post_log
