"""Abstract semantics and the bounded oracles built on it.

An abstract configuration keeps the set of covered locations and the set
of registers that have been written at least once.  Reading a written
register for value x only needs some writer of x to be coverable around
that register's round; this is sound and complete for coverability,
which :func:`lift` and :func:`concretize` make executable.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass

from .budget import BudgetExceeded, node_budget
from .concrete import (ConcreteExecution, Move, MoveNotEnabled, apply_move,
                       copycat_extend, initial_concrete)
from .protocol import BLANK, Incr, Location, Nop, ProtocolError, Read, RegisterRef, Write, split_actions


@dataclass(frozen=True)
class AbstractConfig:
    locs: frozenset
    written: frozenset

    def __str__(self):
        locs = ", ".join(str(loc) for loc in sorted(self.locs))
        regs = ", ".join(str(r) for r in sorted(self.written))
        return "{" + locs + "} written {" + regs + "}"


def initial_abstract(p):
    return AbstractConfig(frozenset([Location(p.init, 0)]), frozenset())


def writer_pair_covered(p, locs, reg_id, symbol, r):
    """Some transition writing symbol to register reg_id has both ends at round r."""
    for t in p.writers.get((reg_id, symbol), ()):
        if t.enabled_at(r) and (t.source, r) in locs and (t.target, r) in locs:
            return t
    return None


def _abstract_blocker(p, sigma, m):
    t = m.transition
    if Location(t.source, m.round) not in sigma.locs:
        return "source location not covered"
    if not t.enabled_at(m.round):
        return f"guard {t.guard.value} fails at round {m.round}"
    a = t.action
    if isinstance(a, Read):
        r = m.round - a.offset
        reg = RegisterRef(r, a.reg)
        if a.symbol == BLANK:
            if r >= 0 and reg in sigma.written:
                return f"blank read: {reg} already written"
        else:
            if r < 0 or reg not in sigma.written:
                return f"value read: {reg} never written"
            if writer_pair_covered(p, sigma.locs, a.reg, a.symbol, r) is None:
                return f"value read: no writer of {a.symbol} covered at round {r}"
    elif not isinstance(a, (Incr, Nop, Write)):
        return f"unknown action {a!r}"
    return None


def abstract_step(p, sigma, m):
    if m.transition not in p.transition_set:
        raise MoveNotEnabled(m, "transition not in protocol")
    why = _abstract_blocker(p, sigma, m)
    if why is not None:
        raise MoveNotEnabled(m, why)
    a = m.transition.action
    written = sigma.written
    if isinstance(a, Write):
        written = written | {RegisterRef(m.round, a.reg)}
    return AbstractConfig(sigma.locs | {m.target}, written)


def abstract_replay(p, start, schedule):
    configs = [start]
    for m in schedule:
        configs.append(abstract_step(p, configs[-1], m))
    return configs


@dataclass(frozen=True)
class AbstractExecution:
    schedule: tuple = ()
    start: AbstractConfig = None

    def configs(self, p):
        start = self.start if self.start is not None else initial_abstract(p)
        return abstract_replay(p, start, self.schedule)

    def final(self, p):
        return self.configs(p)[-1]

    def __len__(self):
        return len(self.schedule)


def lift(p, run):
    """The abstract execution following the same schedule as a concrete run."""
    run.configs(p)
    xi = AbstractExecution(tuple(run.schedule))
    xi.configs(p)
    return xi


def concretize(p, xi):
    """A concrete run covering exactly the locations of an abstract run.

    Before each move the source location is given a spare process by
    copycat, so it stays covered.  A read of a written register first
    lets one more spare process repeat a covered writer of the value.
    Returns (n, run) with n <= 2 * len(xi) + 1.
    """
    if xi.start is not None and xi.start != initial_abstract(p):
        raise ValueError("concretize needs an execution from the initial configuration")
    run = ConcreteExecution(initial_concrete(p, 1), ())
    final = run.initial
    sigma = initial_abstract(p)

    def ensure_two(run, final, loc):
        if final.count(loc) >= 2:
            return run, final
        run = copycat_extend(p, run, loc, 1)
        return run, run.final(p)

    for m in xi.schedule:
        sigma = abstract_step(p, sigma, m)
        a = m.transition.action
        if isinstance(a, Read) and a.symbol != BLANK:
            r = m.round - a.offset
            reg = RegisterRef(r, a.reg)
            if final.value(reg) != a.symbol:
                t = writer_pair_covered(p, sigma.locs, a.reg, a.symbol, r)
                w = Move(t, r)
                run, final = ensure_two(run, final, w.source)
                final = apply_move(p, final, w)
                run = ConcreteExecution(run.initial, run.schedule + (w,))
        run, final = ensure_two(run, final, m.source)
        final = apply_move(p, final, m)
        run = ConcreteExecution(run.initial, run.schedule + (m,))
    return run.processes, run


# ------------------------------------------------------------ bounded search

def _single_action(p):
    if all(len(t.actions) == 1 for t in p.transitions):
        return p
    return split_actions(p)


class _Saturator:
    """Closure of a location set under every move that is not a first write."""

    def __init__(self, p, cap):
        self.p = p
        self.cap = cap

    def enabled(self, t, k, locs, written):
        a = t.action
        if not t.enabled_at(k):
            return False
        if isinstance(a, Incr):
            return k + 1 <= self.cap
        if isinstance(a, Nop):
            return True
        if isinstance(a, Write):
            return RegisterRef(k, a.reg) in written
        r = k - a.offset
        reg = RegisterRef(r, a.reg)
        if a.symbol == BLANK:
            return r < 0 or reg not in written
        if r < 0 or reg not in written:
            return False
        return writer_pair_covered(self.p, locs, a.reg, a.symbol, r) is not None

    def run(self, locs, written, moves):
        """Grow locs in place, appending each productive move to moves."""
        out = self.p.outgoing
        changed = True
        while changed:
            changed = False
            for loc in list(locs):
                for t in out.get(loc.state, ()):
                    m = Move(t, loc.round)
                    tgt = m.target
                    if tgt in locs:
                        continue
                    if self.enabled(t, loc.round, locs, written):
                        locs.add(tgt)
                        moves.append(m)
                        changed = True

    def first_writes(self, locs, written):
        seen = set()
        for loc in sorted(locs):
            for t in self.p.outgoing.get(loc.state, ()):
                a = t.action
                if isinstance(a, Write) and t.enabled_at(loc.round):
                    reg = RegisterRef(loc.round, a.reg)
                    if reg not in written and (t, loc.round) not in seen:
                        seen.add((t, loc.round))
                        yield Move(t, loc.round), reg


class _Node:
    __slots__ = ("locs", "written", "last", "parent", "moves")

    def __init__(self, locs, written, last, parent, moves):
        self.locs = locs
        self.written = written
        self.last = last
        self.parent = parent
        self.moves = moves


def _search(p, cap, reduce=True, budget=None):
    """Yield search nodes; every reachable configuration is below one.

    Branching happens only on first writes.  Between two first writes the
    written set is fixed and enabledness only grows with the location set,
    so saturating is complete.  With reduce, a first write may not follow
    one more than v rounds later (only swap-proof first-write orders are
    explored, which loses nothing since swapping keeps the final
    configuration).
    """
    if cap < 0:
        return
    budget = node_budget(budget)
    sat = _Saturator(p, cap)
    locs = {Location(p.init, 0)}
    moves = []
    sat.run(locs, frozenset(), moves)
    root = _Node(frozenset(locs), frozenset(), None, None, tuple(moves))
    seen = {(root.locs, root.written, None)}
    queue = deque([root])
    yield root
    v = p.visibility
    while queue:
        node = queue.popleft()
        for m, reg in sat.first_writes(node.locs, node.written):
            if reduce and node.last is not None and node.last.round > reg.round + v:
                continue
            locs = set(node.locs)
            locs.add(m.target)
            written = node.written | {reg}
            moves = [m]
            sat.run(locs, written, moves)
            last = reg if reduce else None
            key = (frozenset(locs), written, last)
            if key in seen:
                continue
            seen.add(key)
            if budget is not None and len(seen) > budget:
                raise BudgetExceeded(f"abstract search exceeded {budget} nodes")
            child = _Node(key[0], written, last, node, tuple(moves))
            queue.append(child)
            yield child


def _path_schedule(node):
    parts = []
    while node is not None:
        parts.append(node.moves)
        node = node.parent
    out = []
    for part in reversed(parts):
        out.extend(part)
    return out


def _slice(p, schedule, goals):
    """Keep only the moves that the goal locations depend on, in order."""
    start = Location(p.init, 0)
    producer = {}
    first_write = {}
    present_at = {start: -1}
    for i, m in enumerate(schedule):
        producer.setdefault(m.target, i)
        present_at.setdefault(m.target, i)
        a = m.transition.action
        if isinstance(a, Write):
            first_write.setdefault(RegisterRef(m.round, a.reg), i)
    keep = set()
    todo = [producer[g] for g in goals if g != start]
    while todo:
        i = todo.pop()
        if i in keep:
            continue
        keep.add(i)
        m = schedule[i]
        needs = [m.source]
        a = m.transition.action
        if isinstance(a, Read) and a.symbol != BLANK:
            r = m.round - a.offset
            todo.append(first_write[RegisterRef(r, a.reg)])
            for w in p.writers.get((a.reg, a.symbol), ()):
                ends = (Location(w.source, r), Location(w.target, r))
                if w.enabled_at(r) and all(present_at.get(e, i) < i for e in ends):
                    needs.extend(ends)
                    break
        for loc in needs:
            if loc != start:
                todo.append(producer[loc])
    return tuple(schedule[i] for i in sorted(keep))


def bounded_abstract_reach(p, round_cap, target=None, node_budget=None, reduce=True):
    """Locations coverable with every location at round <= round_cap.

    Without target, returns the frozenset of coverable locations.  With a
    target (a location, or a bare state meaning any round), returns a
    witness AbstractExecution or None.  Protocols with action sequences
    are split first; the set result is then named by original states and
    the witness is over split_actions(p).
    """
    q = _single_action(p)
    if target is None:
        found = set()
        for node in _search(q, round_cap, reduce, node_budget):
            found |= node.locs
        if q is p:
            return frozenset(found)
        return frozenset(Location(q.origin_of(l.state), l.round)
                         for l in found if q.origin_of(l.state) is not None)

    if isinstance(target, str):
        def hit(locs):
            return [l for l in locs if q.origin_of(l.state) == target]
    else:
        target = Location(*target)

        def hit(locs):
            return [l for l in locs if l.round == target.round and q.origin_of(l.state) == target.state]
    for node in _search(q, round_cap, reduce, node_budget):
        goals = hit(node.locs)
        if goals:
            goal = min(goals, key=lambda l: (l.round, l.state))
            xi = AbstractExecution(_slice(q, _path_schedule(node), [goal]))
            xi.configs(q)
            return xi
    return None


def reachable_nodes(p, round_cap, reduce=True, node_budget=None):
    """(locs, written) of every search node; each reachable configuration is below one."""
    q = _single_action(p)
    return [(n.locs, n.written) for n in _search(q, round_cap, reduce, node_budget)]


def bounded_compatible(p, loc1, loc2, round_cap, node_budget=None):
    loc1, loc2 = Location(*loc1), Location(*loc2)
    if max(loc1.round, loc2.round) > round_cap:
        raise ValueError("locations must lie within the round cap")
    q = _single_action(p)
    for node in _search(q, round_cap, True, node_budget):
        if loc1 in node.locs and loc2 in node.locs:
            return True
    return False


# ---------------------------------------------------------- v = 0, d = 1

@dataclass(frozen=True)
class RoundInfo:
    round: int
    states: frozenset
    writable: frozenset

    def __str__(self):
        states = ", ".join(sorted(self.states))
        writable = ", ".join(sorted(self.writable))
        return f"round {self.round}: states = {{{states}}}; writable = {{{writable}}}"


def round_saturation_reach(p, round_cap):
    """Per-round coverable states and writable symbols when v = 0 and d = 1.

    Rounds only talk to each other through incr, so each round is a
    fixpoint seeded by the incr successors of the previous one: first
    close under nop and blank reads; if a write is then possible, close
    under nop, writes and reads of already writable symbols.
    """
    if p.visibility != 0 or p.registers != 1:
        raise ProtocolError("round saturation needs visibility 0 and one register per round")
    q = _single_action(p)
    out = []
    prev = None
    for k in range(round_cap + 1):
        if k == 0:
            seed = {q.init}
        else:
            seed = {t.target for s in prev for t in q.outgoing[s]
                    if isinstance(t.action, Incr) and t.enabled_at(k - 1)}

        def close(states, allow):
            todo = list(states)
            while todo:
                s = todo.pop()
                for t in q.outgoing[s]:
                    if t.target not in states and t.enabled_at(k) and allow(t.action, states):
                        states.add(t.target)
                        todo.append(t.target)
            return states

        before = close(set(seed), lambda a, _: isinstance(a, Nop)
                       or (isinstance(a, Read) and a.symbol == BLANK))

        def writable(states):
            return {t.action.symbol for s in states for t in q.outgoing[s]
                    if isinstance(t.action, Write) and t.enabled_at(k)}

        if writable(before):
            cur = set(before)
            while True:
                symbols = writable(cur)
                size = len(cur)
                cur = close(cur, lambda a, _: isinstance(a, (Nop, Write))
                            or (isinstance(a, Read) and a.symbol in symbols))
                if len(cur) == size:
                    break
            states, symbols = cur, writable(cur)
        else:
            states, symbols = before, set()
        prev = states
        names = frozenset(q.origin_of(s) for s in states if q.origin_of(s) is not None)
        out.append(RoundInfo(k, names, frozenset(symbols)))
    return out


def format_coverable(locs):
    return "\n".join(f"coverable: ({l.state},{l.round})"
                     for l in sorted(locs, key=lambda l: (l.round, l.state)))


def abstract_enabled_moves(p, sigma, round_cap=None):
    out = []
    for loc in sorted(sigma.locs):
        for t in p.outgoing.get(loc.state, ()):
            m = Move(t, loc.round)
            if round_cap is not None and isinstance(t.action, Incr) and loc.round + 1 > round_cap:
                continue
            if _abstract_blocker(p, sigma, m) is None:
                out.append(m)
    return out


def random_abstract_execution(p, steps, seed, round_cap=None, productive=True):
    """Seeded random abstract run (test input).

    With productive, only moves that add a location or a register are
    picked, so the run does not stall on self-loops.
    """
    rng = random.Random(seed)
    if round_cap is None:
        round_cap = steps
    sigma = initial_abstract(p)
    sched = []
    for _ in range(steps):
        moves = abstract_enabled_moves(p, sigma, round_cap)
        if productive:
            moves = [m for m in moves if abstract_step(p, sigma, m) != sigma]
        if not moves:
            break
        m = rng.choice(moves)
        sched.append(m)
        sigma = abstract_step(p, sigma, m)
    return AbstractExecution(tuple(sched))
