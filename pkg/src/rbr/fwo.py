"""First-write orders: the order in which registers stop being blank.

An order is a plain tuple of RegisterRef.  Two entries more than v rounds
apart can be swapped (earlier round first) without changing what any
process can observe; the swap-proof normal form is unique.
"""

from __future__ import annotations

import random

from .abstract import AbstractExecution, initial_abstract
from .protocol import RegisterRef, Write


class FwoMismatch(ValueError):
    pass


class ProjectionMismatch(ValueError):
    def __init__(self, k, left, right):
        self.round = k
        super().__init__(f"window projections differ at round {k}: "
                         f"{format_fwo(left)} vs {format_fwo(right)}")


def format_fwo(seq):
    return " ".join(str(r) for r in seq)


def parse_fwo(text):
    out = []
    for tok in text.split():
        if not tok.startswith("r") or "." not in tok:
            raise ValueError(f"bad register token {tok!r}")
        k, a = tok[1:].split(".", 1)
        out.append(RegisterRef(int(k), int(a)))
    if len(set(out)) != len(out):
        raise ValueError("repeated register in first-write order")
    return tuple(out)


def _first_write_positions(p, xi):
    """[(index in schedule, register)] for each first write along xi."""
    configs = xi.configs(p)
    out = []
    for i, m in enumerate(xi.schedule):
        a = m.transition.action
        if isinstance(a, Write):
            reg = RegisterRef(m.round, a.reg)
            if reg not in configs[i].written:
                out.append((i, reg))
    return out


def fwo_of(p, xi):
    return tuple(reg for _, reg in _first_write_positions(p, xi))


def window_projection(seq, k, v):
    lo = max(0, k - v)
    return tuple(r for r in seq if lo <= r.round <= k)


def can_swap(seq, i, v):
    return 0 <= i < len(seq) - 1 and seq[i].round > seq[i + 1].round + v


def is_swap_proof(seq, v):
    return not any(can_swap(seq, i, v) for i in range(len(seq) - 1))


def swap_normalize(seq, v, rng=None):
    """Apply swaps until none applies; leftmost first unless rng picks."""
    seq = list(seq)
    if rng is not None and not isinstance(rng, random.Random):
        rng = random.Random(rng)
    while True:
        spots = [i for i in range(len(seq) - 1) if can_swap(seq, i, v)]
        if not spots:
            return tuple(seq)
        i = rng.choice(spots) if rng is not None else spots[0]
        seq[i], seq[i + 1] = seq[i + 1], seq[i]


def swap_execution(p, xi, position):
    """Reorder xi so that first writes number position and position+1 swap.

    Moves between the two first writes are split by round: those below
    the round of the earlier-listed register go before both writes, the
    rest after them.  The final configuration is unchanged.
    """
    if xi.start is not None and xi.start != initial_abstract(p):
        raise ValueError("swap_execution needs an execution from the initial configuration")
    firsts = _first_write_positions(p, xi)
    seq = tuple(reg for _, reg in firsts)
    if not can_swap(seq, position, p.visibility):
        raise ValueError(f"no swap applies at position {position} of {format_fwo(seq)}")
    i, reg = firsts[position]
    j, _ = firsts[position + 1]
    k = reg.round
    s = xi.schedule[i + 1:j]
    low = tuple(m for m in s if m.round < k)
    high = tuple(m for m in s if m.round >= k)
    sched = xi.schedule[:i] + low + (xi.schedule[j], xi.schedule[i]) + high + xi.schedule[j + 1:]
    out = AbstractExecution(sched)
    out.configs(p)
    return out


def normalize_execution(p, xi):
    """Swap first writes (leftmost first) until the order is swap-proof."""
    v = p.visibility
    while True:
        seq = fwo_of(p, xi)
        spots = [i for i in range(len(seq) - 1) if can_swap(seq, i, v)]
        if not spots:
            return xi
        xi = swap_execution(p, xi, spots[0])


def _segments(p, xi):
    cuts = [i for i, _ in _first_write_positions(p, xi)]
    bounds = [0] + cuts + [len(xi.schedule)]
    return [xi.schedule[a:b] for a, b in zip(bounds, bounds[1:])]


def combine_same_fwo(p, xi1, xi2):
    """One execution covering both final location sets.

    Both runs are cut just before each first write and the pieces are
    interleaved; at each point the written set agrees with each input
    and the location set only has more, so every move stays enabled.
    """
    start = initial_abstract(p)
    for xi in (xi1, xi2):
        if xi.start is not None and xi.start != start:
            raise ValueError("combination needs executions from the initial configuration")
    w1, w2 = fwo_of(p, xi1), fwo_of(p, xi2)
    if w1 != w2:
        raise FwoMismatch(f"first-write orders differ: {format_fwo(w1)} vs {format_fwo(w2)}")
    sched = ()
    for a, b in zip(_segments(p, xi1), _segments(p, xi2)):
        sched += a + b
    out = AbstractExecution(sched)
    out.configs(p)
    return out


def first_projection_difference(seq1, seq2, v):
    """Smallest round whose window projections differ, or None."""
    top = max([r.round for r in seq1 + seq2], default=-1)
    for k in range(top + 1):
        if window_projection(seq1, k, v) != window_projection(seq2, k, v):
            return k
    return None


def combine_same_projections(p, xi1, xi2, v=None):
    if v is None:
        v = p.visibility
    elif v != p.visibility:
        raise ValueError(f"visibility {v} does not match the protocol's {p.visibility}")
    w1, w2 = fwo_of(p, xi1), fwo_of(p, xi2)
    k = first_projection_difference(w1, w2, v)
    if k is not None:
        raise ProjectionMismatch(k, window_projection(w1, k, v), window_projection(w2, k, v))
    return combine_same_fwo(p, normalize_execution(p, xi1), normalize_execution(p, xi2))
