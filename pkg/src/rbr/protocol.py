"""Round-based register protocols: data model, text format and desugaring.

A protocol is a finite automaton whose transitions carry actions on a
family of registers indexed by (round, id).  Every process has a private
round counter that only grows, and may touch registers of its current
round (writes) or of the last few rounds (reads, bounded by the
visibility).

Text format, one declaration per line, ``#`` starts a comment::

    name fig1
    registers 1
    visibility 1
    alphabet a b
    init q0
    error qE
    q0 -> q1 : write a
    q2 -> q5 : read[-1] a
    W0 -> E0 [k=0] : nop
    E0 -> A0 : incr; nop

The register index ``[r]`` of read/write may be dropped when there is a
single register per round.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Optional, Union

BLANK = "_"


class ProtocolError(ValueError):
    """Raised for malformed protocol text or an unusable protocol."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Guard(enum.Enum):
    ROUND_ZERO = "k=0"
    ROUND_POSITIVE = "k>0"

    def admits(self, k):
        return k == 0 if self is Guard.ROUND_ZERO else k > 0


@dataclass(frozen=True)
class Incr:
    def __str__(self):
        return "incr"


@dataclass(frozen=True)
class Nop:
    def __str__(self):
        return "nop"


@dataclass(frozen=True)
class Read:
    offset: int
    reg: int
    symbol: str

    def __str__(self):
        return f"read[-{self.offset}][{self.reg}] {self.symbol}"


@dataclass(frozen=True)
class Write:
    reg: int
    symbol: str

    def __str__(self):
        return f"write[{self.reg}] {self.symbol}"


Action = Union[Incr, Nop, Read, Write]
INCR = Incr()
NOP = Nop()


class RegisterRef(NamedTuple):
    round: int
    id: int

    def __str__(self):
        return f"r{self.round}.{self.id}"


class Location(NamedTuple):
    state: str
    round: int

    def __str__(self):
        return f"({self.state},{self.round})"


@dataclass(frozen=True)
class Transition:
    source: str
    target: str
    actions: tuple
    guard: Optional[Guard] = None

    @property
    def action(self):
        """The single action of a desugared transition."""
        if len(self.actions) != 1:
            raise ProtocolError(f"transition {self} has {len(self.actions)} actions")
        return self.actions[0]

    def enabled_at(self, k):
        return self.guard is None or self.guard.admits(k)

    def __str__(self):
        return format_transition(self)


@dataclass(frozen=True)
class Protocol:
    name: str
    registers: int
    visibility: int
    alphabet: tuple
    init: str
    transitions: tuple = ()
    error: Optional[str] = None
    # state -> name of the state it stands for in the protocol it was
    # desugared from; None for helper states.  Not part of equality.
    origin: Optional[dict] = field(default=None, compare=False, hash=False)

    @cached_property
    def states(self):
        seen = {self.init: None}
        if self.error is not None:
            seen[self.error] = None
        for t in self.transitions:
            seen[t.source] = None
            seen[t.target] = None
        return tuple(seen)

    def origin_of(self, state):
        if self.origin is None:
            return state
        return self.origin.get(state, state)

    @cached_property
    def is_simple(self):
        """True when every transition is unguarded with exactly one action."""
        return all(t.guard is None and len(t.actions) == 1 for t in self.transitions)

    @cached_property
    def transition_set(self):
        return frozenset(self.transitions)

    @cached_property
    def outgoing(self):
        """state -> transitions leaving it, in declaration order."""
        out = {q: [] for q in self.states}
        for t in self.transitions:
            out[t.source].append(t)
        return out

    @cached_property
    def writers(self):
        """(register id, symbol) -> transitions writing that symbol there."""
        out = {}
        for t in self.transitions:
            if len(t.actions) == 1 and isinstance(t.actions[0], Write):
                a = t.actions[0]
                out.setdefault((a.reg, a.symbol), []).append(t)
        return out

    def __str__(self):
        return print_protocol(self)


# ---------------------------------------------------------------- parsing

_DECL = re.compile(r"^(name|registers|visibility|alphabet|init|error)\b\s*(.*)$")
_TRANS = re.compile(r"^(\S+)\s*->\s*(\S+)\s*(?:\[\s*(k\s*=\s*0|k\s*>\s*0)\s*\])?\s*:\s*(.*)$")
_READ = re.compile(r"^read\s*\[\s*-\s*(\d+)\s*\]\s*(?:\[\s*(\d+)\s*\])?\s+(\S+)$")
_WRITE = re.compile(r"^write\s*(?:\[\s*(\d+)\s*\])?\s+(\S+)$")
_NAME = re.compile(r"^[A-Za-z0-9_@~.'+-]+$")


def _parse_action(text, registers, lineno):
    text = text.strip()
    if text == "incr":
        return INCR
    if text == "nop":
        return NOP
    m = _READ.match(text)
    if m:
        reg = m.group(2)
        if reg is None and registers != 1:
            raise ProtocolError(f"register index required in {text!r}", lineno)
        return Read(int(m.group(1)), int(reg or 0), m.group(3))
    m = _WRITE.match(text)
    if m:
        reg = m.group(1)
        if reg is None and registers != 1:
            raise ProtocolError(f"register index required in {text!r}", lineno)
        return Write(int(reg or 0), m.group(2))
    raise ProtocolError(f"unknown action {text!r}", lineno)


def parse_protocol(text):
    """Parse protocol text; raises ProtocolError naming the line at fault."""
    decls = {}
    pending = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _DECL.match(line)
        if m and "->" not in line:
            key, value = m.group(1), m.group(2).strip()
            if key in decls:
                raise ProtocolError(f"duplicate declaration {key!r}", lineno)
            decls[key] = (value, lineno)
            continue
        m = _TRANS.match(line)
        if not m:
            raise ProtocolError(f"cannot parse {line!r}", lineno)
        pending.append((m, lineno))

    for key in ("name", "registers", "visibility", "alphabet", "init"):
        if key not in decls:
            raise ProtocolError(f"missing declaration {key!r}")

    def number(key):
        value, lineno = decls[key]
        if not re.fullmatch(r"\d+", value):
            raise ProtocolError(f"{key} must be a non-negative integer, got {value!r}", lineno)
        return int(value)

    registers = number("registers")
    visibility = number("visibility")
    if registers < 1:
        raise ProtocolError("registers must be at least 1", decls["registers"][1])
    alphabet = tuple(decls["alphabet"][0].split())
    alpha_line = decls["alphabet"][1]
    if BLANK in alphabet:
        raise ProtocolError("the blank symbol cannot be declared in the alphabet", alpha_line)
    if len(set(alphabet)) != len(alphabet):
        raise ProtocolError("duplicate symbol in alphabet", alpha_line)
    name = decls["name"][0]
    init = decls["init"][0]
    error = decls["error"][0] if "error" in decls else None
    for key in ("name", "init", "error"):
        if key in decls and not _NAME.match(decls[key][0]):
            raise ProtocolError(f"bad {key} {decls[key][0]!r}", decls[key][1])

    transitions = []
    for m, lineno in pending:
        src, dst, guard, body = m.groups()
        for s in (src, dst):
            if not _NAME.match(s):
                raise ProtocolError(f"bad state name {s!r}", lineno)
        if guard is not None:
            guard = Guard.ROUND_ZERO if "=" in guard else Guard.ROUND_POSITIVE
        parts = [p for p in body.split(";")]
        if not parts or any(not p.strip() for p in parts):
            raise ProtocolError("empty action", lineno)
        actions = tuple(_parse_action(p, registers, lineno) for p in parts)
        for a in actions:
            _check_action(a, registers, visibility, alphabet, lineno)
        transitions.append(Transition(src, dst, actions, guard))

    return Protocol(name, registers, visibility, alphabet, init, tuple(transitions), error)


def _check_action(a, registers, visibility, alphabet, lineno):
    if isinstance(a, (Read, Write)) and not 0 <= a.reg < registers:
        raise ProtocolError(f"register index {a.reg} out of range in {a}", lineno)
    if isinstance(a, Read):
        if a.offset > visibility:
            raise ProtocolError(f"read offset {a.offset} exceeds visibility {visibility}", lineno)
        if a.symbol != BLANK and a.symbol not in alphabet:
            raise ProtocolError(f"unknown symbol {a.symbol!r}", lineno)
    if isinstance(a, Write):
        if a.symbol == BLANK:
            raise ProtocolError("cannot write the blank symbol", lineno)
        if a.symbol not in alphabet:
            raise ProtocolError(f"unknown symbol {a.symbol!r}", lineno)


def format_action(a, registers):
    if registers == 1 and isinstance(a, Read):
        return f"read[-{a.offset}] {a.symbol}"
    if registers == 1 and isinstance(a, Write):
        return f"write {a.symbol}"
    return str(a)


def format_transition(t, registers=2):
    guard = f" [{t.guard.value}]" if t.guard is not None else ""
    body = "; ".join(format_action(a, registers) for a in t.actions)
    return f"{t.source} -> {t.target}{guard} : {body}"


def print_protocol(p):
    lines = [
        f"name {p.name}",
        f"registers {p.registers}",
        f"visibility {p.visibility}",
        "alphabet " + " ".join(p.alphabet),
        f"init {p.init}",
    ]
    if p.error is not None:
        lines.append(f"error {p.error}")
    lines.extend(format_transition(t, p.registers) for t in p.transitions)
    return "\n".join(lines) + "\n"


# ------------------------------------------------------------- validation

class Violation(NamedTuple):
    kind: str
    where: str

    def __str__(self):
        return f"[{self.kind}] {self.where}"


def validate(p):
    """Return the list of well-formedness violations (empty when valid)."""
    out = []
    if p.registers < 1:
        out.append(Violation("bad-registers", str(p.registers)))
    if p.visibility < 0:
        out.append(Violation("bad-visibility", str(p.visibility)))
    if BLANK in p.alphabet:
        out.append(Violation("blank-in-alphabet", BLANK))
    if len(set(p.alphabet)) != len(p.alphabet):
        out.append(Violation("duplicate-symbol", " ".join(p.alphabet)))
    for t in p.transitions:
        where = format_transition(t, p.registers)
        if not t.actions:
            out.append(Violation("empty-actions", where))
        for a in t.actions:
            if isinstance(a, (Read, Write)) and not 0 <= a.reg < p.registers:
                out.append(Violation("register-out-of-range", where))
            if isinstance(a, Read):
                if a.offset < 0 or a.offset > p.visibility:
                    out.append(Violation("offset-exceeds-visibility", where))
                if a.symbol != BLANK and a.symbol not in p.alphabet:
                    out.append(Violation("unknown-symbol", where))
            elif isinstance(a, Write):
                if a.symbol == BLANK:
                    out.append(Violation("write-of-initial-value", where))
                elif a.symbol not in p.alphabet:
                    out.append(Violation("unknown-symbol", where))
            elif not isinstance(a, (Incr, Nop)):
                out.append(Violation("unknown-action", where))
    return out


def require_valid(p):
    problems = validate(p)
    if problems:
        raise ProtocolError("; ".join(str(v) for v in problems))
    return p


# -------------------------------------------------------------- desugaring

def _fresh(base, taken):
    name = base
    n = 1
    while name in taken:
        name = f"{base}'{n}"
        n += 1
    taken.add(name)
    return name


def split_actions(p):
    """Replace each multi-action transition by a chain of single actions.

    The guard stays on the first link, which is where the round is read.
    Intermediate states are fresh and have origin None.
    """
    if all(len(t.actions) == 1 for t in p.transitions):
        return p
    taken = set(p.states)
    origin = {q: p.origin_of(q) for q in p.states}
    out = []
    for idx, t in enumerate(p.transitions):
        if len(t.actions) == 1:
            out.append(t)
            continue
        chain = [t.source]
        for j in range(1, len(t.actions)):
            mid = _fresh(f"{t.source}~{idx}.{j}", taken)
            origin[mid] = None
            chain.append(mid)
        chain.append(t.target)
        for j, a in enumerate(t.actions):
            out.append(Transition(chain[j], chain[j + 1], (a,), t.guard if j == 0 else None))
    return Protocol(p.name, p.registers, p.visibility, p.alphabet, p.init,
                    tuple(out), p.error, origin)


def eliminate_guards(p):
    """Remove round guards by remembering in the state whether k = 0.

    Each state q becomes q@0 (round zero) and q@+ (positive round); incr
    always lands in the positive copy.  The error state keeps its name as
    a sink reachable by nop from both copies.
    """
    if all(t.guard is None for t in p.transitions):
        return p
    taken = set(p.states)
    zero, pos = {}, {}
    for q in p.states:
        zero[q] = _fresh(f"{q}@0", taken)
        pos[q] = _fresh(f"{q}@+", taken)
    origin = {}
    for q in p.states:
        origin[zero[q]] = origin[pos[q]] = p.origin_of(q)
    out = []
    for t in p.transitions:
        moves_round = any(isinstance(a, Incr) for a in t.actions)
        if t.guard is not Guard.ROUND_POSITIVE:
            dst = pos[t.target] if moves_round else zero[t.target]
            out.append(Transition(zero[t.source], dst, t.actions))
        if t.guard is not Guard.ROUND_ZERO:
            out.append(Transition(pos[t.source], pos[t.target], t.actions))
    error = None
    if p.error is not None:
        error = p.error
        origin[error] = p.origin_of(p.error)
        out.append(Transition(zero[p.error], error, (NOP,)))
        out.append(Transition(pos[p.error], error, (NOP,)))
    return Protocol(p.name, p.registers, p.visibility, p.alphabet, zero[p.init],
                    tuple(out), error, origin)


def desugar(p):
    """Single-action, guard-free protocol with the same coverability."""
    return eliminate_guards(split_actions(p))
