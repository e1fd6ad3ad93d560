"""Concrete semantics: processes, rounds and register valuations.

A configuration counts processes per location (state, round) and stores
the registers that are not blank.  Moves act on single-action
transitions; run :func:`rbr.protocol.desugar` first on protocols that use
action sequences.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

from .protocol import BLANK, Incr, Location, Nop, Read, RegisterRef, Transition, Write


class MoveNotEnabled(ValueError):
    """A move was applied to a configuration where it cannot fire."""

    def __init__(self, move, reason):
        self.move = move
        self.reason = reason
        super().__init__(f"{format_move(move)}: {reason}")


class Move(NamedTuple):
    transition: Transition
    round: int

    @property
    def source(self):
        return Location(self.transition.source, self.round)

    @property
    def target(self):
        bump = isinstance(self.transition.action, Incr)
        return Location(self.transition.target, self.round + bump)

    def __str__(self):
        return format_move(self)


def format_move(m):
    t = m.transition
    acts = "; ".join(str(a) for a in t.actions)
    return f"{m.round}: {t.source} -{acts}-> {t.target}"


@dataclass(frozen=True)
class ConcreteConfig:
    """Location multiset plus sparse valuation (blank registers absent)."""

    counts: tuple  # sorted ((Location, n), ...) with n >= 1
    values: tuple  # sorted ((RegisterRef, symbol), ...), symbol != BLANK

    @classmethod
    def of(cls, counts, values=None):
        c = tuple(sorted((Location(*loc), n) for loc, n in dict(counts).items() if n > 0))
        v = tuple(sorted((RegisterRef(*r), s) for r, s in dict(values or {}).items() if s != BLANK))
        return cls(c, v)

    @cached_property
    def count_map(self):
        return dict(self.counts)

    @cached_property
    def value_map(self):
        return dict(self.values)

    def count(self, loc):
        return self.count_map.get(loc, 0)

    def value(self, reg):
        return self.value_map.get(reg, BLANK)

    @property
    def support(self):
        return frozenset(loc for loc, _ in self.counts)

    @property
    def size(self):
        return sum(n for _, n in self.counts)

    def with_extra(self, loc, n):
        counts = self.count_map.copy()
        counts[Location(*loc)] = counts.get(loc, 0) + n
        return ConcreteConfig.of(counts, self.value_map)

    def __str__(self):
        locs = ", ".join(f"{loc}:{n}" for loc, n in self.counts)
        regs = ", ".join(f"{r}={s}" for r, s in self.values)
        return "{" + locs + "} [" + regs + "]"


def initial_concrete(p, n):
    if n < 1:
        raise ValueError("a configuration needs at least one process")
    return ConcreteConfig.of({(p.init, 0): n})


def read_value(config, k, read):
    r = k - read.offset
    if r < 0:
        return BLANK
    return config.value(RegisterRef(r, read.reg))


def _blocker(config, m, round_cap=None):
    """Why m cannot fire in config, or None when it can."""
    t = m.transition
    if config.count(m.source) < 1:
        return f"no process at {m.source}"
    if not t.enabled_at(m.round):
        return f"guard {t.guard.value} fails at round {m.round}"
    a = t.action
    if isinstance(a, Incr):
        if round_cap is not None and m.round + 1 > round_cap:
            return "round cap"
    elif isinstance(a, Read):
        got = read_value(config, m.round, a)
        if got != a.symbol:
            return f"register holds {got}, not {a.symbol}"
    elif not isinstance(a, (Write, Nop)):
        return f"unknown action {a!r}"
    return None


def enabled_moves(p, config, round_cap=None):
    """All moves that can fire; incr moves are limited by round_cap."""
    out = []
    for loc, _ in config.counts:
        for t in p.outgoing.get(loc.state, ()):
            m = Move(t, loc.round)
            if _blocker(config, m, round_cap) is None:
                out.append(m)
    return out


def apply_move(p, config, m):
    if m.transition not in p.transition_set:
        raise MoveNotEnabled(m, "transition not in protocol")
    why = _blocker(config, m)
    if why is not None:
        raise MoveNotEnabled(m, why)
    counts = config.count_map.copy()
    src, dst = m.source, m.target
    counts[src] -= 1
    counts[dst] = counts.get(dst, 0) + 1
    values = config.value_map
    a = m.transition.action
    if isinstance(a, Write):
        values = dict(values)
        values[RegisterRef(m.round, a.reg)] = a.symbol
    return ConcreteConfig.of(counts, values)


def replay(p, initial, schedule):
    """Configurations along schedule; raises MoveNotEnabled on a bad step."""
    configs = [initial]
    for m in schedule:
        configs.append(apply_move(p, configs[-1], m))
    return configs


@dataclass(frozen=True)
class ConcreteExecution:
    initial: ConcreteConfig
    schedule: tuple = ()

    @property
    def processes(self):
        return self.initial.size

    def configs(self, p):
        return replay(p, self.initial, self.schedule)

    def final(self, p):
        return self.configs(p)[-1]

    def dump(self):
        lines = [f"init n={self.processes}"]
        lines.extend(format_move(m) for m in self.schedule)
        return "\n".join(lines) + "\n"


def copycat_extend(p, run, target, extra):
    """Same run with `extra` more processes that end up at target.

    The process that reaches target is traced backwards through the moves
    that produced each of its locations; every such move is repeated
    `extra` more times right after it fires.  Repeats read the same
    values and write the same values, so the valuation never changes.
    """
    if extra < 0:
        raise ValueError("extra must be non-negative")
    target = Location(*target)
    configs = run.configs(p)
    if configs[-1].count(target) < 1:
        raise ValueError(f"target {target} is not covered by the execution")
    start = Location(p.init, 0)
    if any(loc != start for loc in run.initial.support):
        raise ValueError("execution must start from the initial location")
    marked = set()
    end = len(run.schedule)
    cur = target
    while cur != start:
        j = end - 1
        while j >= 0 and run.schedule[j].target != cur:
            j -= 1
        if j < 0:
            raise ValueError(f"no move produces {cur}")
        marked.add(j)
        cur = run.schedule[j].source
        end = j
    schedule = []
    for i, m in enumerate(run.schedule):
        schedule.append(m)
        if i in marked:
            schedule.extend([m] * extra)
    initial = run.initial.with_extra(start, extra)
    return ConcreteExecution(initial, tuple(schedule))


def rewrite_register(p, run, reg, index=None):
    """Extend run so that reg again holds the value of one of its writes.

    index selects the write move in run.schedule (default: the earliest
    write to reg).  A spare process is copied along to the writer's
    source location and repeats the write after the run ends.
    """
    reg = RegisterRef(*reg)
    writes = [i for i, m in enumerate(run.schedule)
              if isinstance(m.transition.action, Write)
              and RegisterRef(m.round, m.transition.action.reg) == reg]
    if not writes:
        raise ValueError(f"register {reg} is never written")
    if index is None:
        index = writes[0]
    elif index not in writes:
        raise ValueError(f"move {index} does not write {reg}")
    write = run.schedule[index]
    head = ConcreteExecution(run.initial, run.schedule[:index])
    head = copycat_extend(p, head, write.source, 1)
    schedule = head.schedule + run.schedule[index:] + (write,)
    return ConcreteExecution(head.initial, schedule)


def random_execution(p, n, steps, seed, round_cap=None):
    """Seeded random walk of at most `steps` moves; stops at deadlock.

    Without a round cap, incr moves are limited to `steps` rounds.
    """
    rng = random.Random(seed)
    if round_cap is None:
        round_cap = steps
    config = initial_concrete(p, n)
    schedule = []
    for _ in range(steps):
        moves = enabled_moves(p, config, round_cap)
        if not moves:
            break
        m = rng.choice(moves)
        schedule.append(m)
        config = apply_move(p, config, m)
    return ConcreteExecution(initial_concrete(p, n), tuple(schedule))


def active_rounds(p, run):
    """Largest number of rounds simultaneously hosting a non-idle process.

    Processes are tokens; each move goes to the smallest-numbered token
    sitting at its source.  A process is active at step i when it still
    moves at some step >= i.
    """
    tokens = []
    for loc, n in run.initial.counts:
        tokens.extend([loc] * n)
    where = list(tokens)
    # per step: location of every token before the step
    history = []
    owner = []
    for m in run.schedule:
        history.append(list(where))
        src = m.source
        for tok, loc in enumerate(where):
            if loc == src:
                break
        else:
            raise MoveNotEnabled(m, f"no process at {src}")
        owner.append(tok)
        where[tok] = m.target
    last_move = {}
    for i, tok in enumerate(owner):
        last_move[tok] = i
    best = 0
    for i, snapshot in enumerate(history):
        rounds = {snapshot[tok].round for tok, j in last_move.items() if j >= i}
        best = max(best, len(rounds))
    return best


def bounded_concrete_search(p, n, target_state, round_cap, node_budget=None):
    """Exhaustive BFS over configurations of n processes with rounds <= cap.

    Returns a shortest execution putting a process in target_state, or
    None when no such execution exists within the cap.
    """
    start = initial_concrete(p, n)
    parent = {start: None}
    queue = deque([start])
    while queue:
        config = queue.popleft()
        if any(loc.state == target_state for loc, _ in config.counts):
            path = []
            while parent[config] is not None:
                prev, m = parent[config]
                path.append(m)
                config = prev
            return ConcreteExecution(start, tuple(reversed(path)))
        for m in enabled_moves(p, config, round_cap):
            nxt = apply_move(p, config, m)
            if nxt not in parent:
                parent[nxt] = (config, m)
                if node_budget is not None and len(parent) > node_budget:
                    raise RuntimeError(f"node budget {node_budget} exceeded")
                queue.append(nxt)
    return None
