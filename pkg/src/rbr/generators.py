"""Constructors for the protocol families used as benchmarks.

All families use action sequences where the figures do; run
:func:`rbr.protocol.desugar` (the verifier does it on its own) to get
single-action transitions.
"""

from __future__ import annotations

from .protocol import (INCR, NOP, Guard, Protocol, ProtocolError, Read, Transition, Write,
                       require_valid)
from .qbf import QbfError


def _t(src, dst, *actions, guard=None):
    return Transition(src, dst, tuple(actions), guard)


def rd(sym, offset=0, reg=0):
    return Read(offset, reg, sym)


def wr(sym, reg=0):
    return Write(reg, sym)


def _check_m(m):
    if m < 1:
        raise ValueError("m must be at least 1")


def gen_fig1():
    """Two processes can reach q4 and q6 at round 1, never both: qE is safe."""
    ts = [
        _t("q0", "q0", INCR),
        _t("q0", "q1", wr("a")),
        _t("q0", "q2", INCR),
        _t("q2", "q3", wr("a")),
        _t("q3", "q4", rd("_", 1)),
        _t("q2", "q5", rd("a", 1)),
        _t("q5", "q6", rd("_", 0)),
        _t("q4", "q4", wr("b")),
        _t("q6", "qE", rd("b", 0)),
    ]
    return require_valid(Protocol("fig1", 1, 1, ("a", "b"), "q0", tuple(ts), "qE"))


def _bit(i, m, top):
    """Transitions of bit i of the binary counter (i in 1..m)."""
    zero, one = f"q{i}_0", f"q{i}_1"
    if top:
        one = "qE"
    move, wait = f"move{i}", f"wait{i}"
    up_move, up_wait = f"move{i + 1}", f"wait{i + 1}"
    return [
        _t(zero, zero, rd(wait), wr(up_wait), INCR),
        _t(zero, one, rd(move), wr(up_wait), INCR),
        _t(one, zero, rd(move), wr(up_move), INCR),
        _t(one, one, rd(wait), wr(up_wait), INCR),
    ]


def _counter_alphabet(m):
    return tuple(f"move{i}" for i in range(1, m + 2)) + tuple(f"wait{i}" for i in range(1, m + 2))


def _counter_bits(m):
    ts = []
    for i in range(1, m + 1):
        ts.append(_t("q0", f"q{i}_0", NOP))
        ts.extend(_bit(i, m, top=(i == m)))
    return ts


def gen_counter(m):
    """Binary counter: qE is first coverable at round 2^(m-1)."""
    _check_m(m)
    ts = [_t("q0", "q_tick", NOP), _t("q_tick", "q_tick", wr("move1"), INCR)]
    ts += _counter_bits(m)
    return require_valid(Protocol(f"counter{m}", 1, 0, _counter_alphabet(m), "q0", tuple(ts), "qE"))


def gen_cutoff(m):
    """Counter whose ticks are one-shot: every tick costs a process."""
    _check_m(m)
    ts = [
        _t("q0", "q_tick", NOP),
        _t("q_tick", "q_tick", INCR),
        _t("q_tick", "q_sink", wr("move1")),
    ]
    ts += _counter_bits(m)
    return require_valid(Protocol(f"cutoff{m}", 1, 0, _counter_alphabet(m), "q0", tuple(ts), "qE"))


def gen_drift(m):
    """Counter ticking only once the tick of the previous round is seen.

    Visibility 1: the ticker writes a marker, checks the previous round
    has no marker yet but has a tick, and ticks itself.
    """
    _check_m(m)
    alphabet = _counter_alphabet(m) + ("a",)
    ts = [
        _t("q0", "q_tick", INCR),
        _t("q_tick", "q_tick", INCR),
        _t("q_tick", "qB", wr("a")),
        _t("qB", "qC", rd("_", 1)),
        _t("qC", "qD", rd("move1", 1)),
        _t("qD", "q_tick", wr("move1")),
        _t("q0", "qA", wr("move1")),
    ]
    ts += _counter_bits(m)
    return require_valid(Protocol(f"drift{m}", 1, 1, alphabet, "q0", tuple(ts), "qE"))


def _aspnes_transitions():
    ts = []
    for p in (0, 1):
        o = 1 - p
        A, B, C, W, E, R = (f"{x}{p}" for x in "ABCWER")
        ts += [
            _t(A, C, Read(0, p, "top")),
            _t(A, B, Read(0, p, "_")),
            _t(B, C, Read(0, o, "_")),
            _t(B, f"C{o}", Read(0, o, "top")),
            _t(C, W, Write(p, "top")),
            _t(W, E, NOP, guard=Guard.ROUND_ZERO),
            _t(W, E, Read(1, o, "top")),
            _t(W, R, Read(1, o, "_"), guard=Guard.ROUND_POSITIVE),
            _t(E, A, INCR),
        ]
    return ts


def gen_aspnes(init_pref="A0"):
    """Round-based consensus for two preferences; decides p at R_p."""
    if init_pref not in ("A0", "A1"):
        raise ValueError("init_pref must be A0 or A1")
    other = "R1" if init_pref == "A0" else "R0"
    return require_valid(Protocol(f"aspnes_{init_pref}", 2, 1, ("top",), init_pref,
                                  tuple(_aspnes_transitions()), other))


def gen_aspnes_agreement():
    """Both preferences start; qF needs R0 and R1 at the same round."""
    ts = [_t("q0", "A0", NOP), _t("q0", "A1", NOP)]
    ts += _aspnes_transitions()
    ts += [
        _t("R0", "R0", INCR),
        _t("R1", "R1", INCR),
        _t("R0", "R0", Write(0, "b")),
        _t("R1", "qF", Read(0, 0, "b")),
    ]
    return require_valid(Protocol("aspnes_agreement", 2, 1, ("top", "b"), "q0", tuple(ts), "qF"))


def _lit(l):
    i = abs(l) - 1
    return f"x{i}" if l > 0 else f"nx{i}"


def gen_qbf(phi):
    """Protocol where qF is coverable iff phi is valid.

    Round k holds the k-th valuation of the counter in the literal
    symbols; a test gadget writes yes0/no0 for whether it satisfies the
    matrix and each variable gadget propagates the flag one level up.
    """
    n = phi.var_count
    if n % 2 or n < 2:
        raise QbfError("formula needs an even number of variables")
    alphabet = []
    for j in range(n + 1):
        alphabet += [f"wait{j}", f"yes{j}", f"no{j}"]
    for i in range(n):
        alphabet += [f"x{i}", f"nx{i}"]
    ts = [_t("q0", "q_test", NOP), _t("q0", "q_int", NOP)]
    for i in range(n):
        ts.append(_t("q0", f"f{i}", NOP))
    ts += [
        _t("q_int", "q_int", INCR),
        _t("q_int", "qF", rd(f"yes{n}")),
    ]

    chain = ["q_test"] + [f"c{j}" for j in range(1, len(phi.clauses))] + ["q_yes"]
    for j, clause in enumerate(phi.clauses):
        for l in dict.fromkeys(clause):
            ts.append(_t(chain[j], chain[j + 1], rd(_lit(l))))
        ts.append(_t(chain[j], "q_no", *(rd(_lit(-l)) for l in clause)))
    if not phi.clauses:
        ts.append(_t("q_test", "q_yes", NOP))
    ts += [
        _t("q_yes", "q_test", INCR, wr("yes0")),
        _t("q_no", "q_test", INCR, wr("no0")),
    ]

    for i in range(n):
        F, T = f"f{i}", f"t{i}"
        neg, pos = wr(f"nx{i}"), wr(f"x{i}")
        here = {b: rd(f"{b}{i}") for b in ("wait", "yes", "no")}
        up = {b: wr(f"{b}{i + 1}") for b in ("wait", "yes", "no")}
        if i % 2 == 0:
            ts += [
                _t(F, F, neg, INCR, here["wait"], up["wait"]),
                _t(F, F, neg, INCR, here["yes"], up["yes"]),
                _t(F, T, neg, INCR, here["no"], up["wait"]),
                _t(T, T, pos, INCR, here["wait"], up["wait"]),
                _t(T, F, pos, INCR, here["yes"], up["yes"]),
                _t(T, F, pos, INCR, here["no"], up["no"]),
            ]
        else:
            ts += [
                _t(F, F, neg, INCR, here["wait"], up["wait"]),
                _t(F, F, neg, INCR, here["no"], up["no"]),
                _t(F, T, neg, INCR, here["yes"], up["wait"]),
                _t(T, T, pos, INCR, here["wait"], up["wait"]),
                _t(T, F, pos, INCR, here["yes"], up["yes"]),
                _t(T, F, pos, INCR, here["no"], up["no"]),
            ]
    return require_valid(Protocol("qbf", 1, 0, tuple(alphabet), "q0", tuple(ts), "qF"))


FAMILIES = {
    "fig1": (gen_fig1, None),
    "counter": (gen_counter, int),
    "cutoff": (gen_cutoff, int),
    "drift": (gen_drift, int),
    "aspnes": (gen_aspnes, str),
    "agreement": (gen_aspnes_agreement, None),
}


def generate(family, param=None):
    if family not in FAMILIES:
        raise ProtocolError(f"unknown family {family!r}")
    fn, conv = FAMILIES[family]
    if conv is None:
        if param is not None:
            raise ProtocolError(f"family {family} takes no parameter")
        return fn()
    if param is None:
        raise ProtocolError(f"family {family} needs a parameter")
    return fn(conv(param))


def random_protocol(rng, max_states=5, max_registers=2, max_visibility=1,
                    max_symbols=2, max_transitions=10):
    """A small random single-action protocol (test input)."""
    n = rng.randint(2, max_states)
    states = [f"q{i}" for i in range(n)]
    d = rng.randint(1, max_registers)
    v = rng.randint(0, max_visibility)
    alphabet = tuple("abcdefgh"[:rng.randint(1, max_symbols)])
    ts = []
    for _ in range(rng.randint(1, max_transitions)):
        src, dst = rng.choice(states), rng.choice(states)
        kind = rng.choice(("incr", "nop", "read", "read", "write", "write"))
        if kind == "incr":
            a = INCR
        elif kind == "nop":
            a = NOP
        elif kind == "read":
            a = Read(rng.randint(0, v), rng.randrange(d), rng.choice(alphabet + ("_",)))
        else:
            a = Write(rng.randrange(d), rng.choice(alphabet))
        ts.append(Transition(src, dst, (a,)))
    error = rng.choice(states[1:])
    return require_valid(Protocol("random", d, v, alphabet, "q0", tuple(ts), error))
