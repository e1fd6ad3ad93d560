"""Decision procedure for coverability of an error state.

The search guesses, round by round, the order F_k in which the registers
visible at round k are first written (restricted to the window of rounds
k-v..k), and for every prefix f of F_k the set S_k[f] of states coverable
at round k by executions whose first writes so far are exactly f.  Only
the last max(v, 1) rounds are ever looked at again, so they form a finite
memory; a breadth-first search over that memory either meets the error
state or runs out of new memories.

Sets of states are int bitmasks.  A sequence F_r is stored as a tuple of
(r - round, id) pairs, so memories at different absolute rounds compare
equal when they behave the same.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, permutations

from .budget import BudgetExceeded, node_budget
from .protocol import BLANK, Incr, Nop, ProtocolError, RegisterRef, Write, desugar


class MalformedWitness(ValueError):
    pass


class InconsistentWindows(ValueError):
    pass


class Compiled:
    """A desugared protocol with states numbered and actions bucketed."""

    def __init__(self, p):
        q = desugar(p)
        self.protocol = q
        self.v = q.visibility
        self.d = q.registers
        self.names = q.states
        index = {s: i for i, s in enumerate(self.names)}
        self.index = index
        self.init = index[q.init]
        self.incr = []          # (src, tgt)
        self.nop = []           # (src, tgt)
        self.blank_reads = []   # (src, tgt, offset, reg)
        self.value_reads = []   # (src, tgt, offset, reg, pair masks)
        self.writes = []        # (src, tgt, reg)
        pairs = {}
        for t in q.transitions:
            a = t.action
            if isinstance(a, Write):
                m = (1 << index[t.source]) | (1 << index[t.target])
                pairs.setdefault((a.reg, a.symbol), []).append(m)
        self.write_sources = [0] * self.d
        for t in q.transitions:
            s, g = index[t.source], index[t.target]
            a = t.action
            if isinstance(a, Incr):
                self.incr.append((s, g))
            elif isinstance(a, Nop):
                self.nop.append((s, g))
            elif isinstance(a, Write):
                self.writes.append((s, g, a.reg))
                self.write_sources[a.reg] |= 1 << s
            elif a.symbol == BLANK:
                self.blank_reads.append((s, g, a.offset, a.reg))
            else:
                masks = tuple(pairs.get((a.reg, a.symbol), ()))
                if masks:
                    self.value_reads.append((s, g, a.offset, a.reg, masks))
        self._incr_cache = {}

    def mask_of(self, state):
        """Bits of every state standing for `state` (desugaring makes copies)."""
        q = self.protocol
        bits = 0
        for s, i in self.index.items():
            if s == state or q.origin_of(s) == state:
                bits |= 1 << i
        if not bits:
            raise ProtocolError(f"unknown state {state!r}")
        return bits

    def state_names(self, mask):
        out = set()
        for i, s in enumerate(self.names):
            if mask >> i & 1:
                o = self.protocol.origin_of(s)
                if o is not None:
                    out.add(o)
        return frozenset(out)

    def incr_successors(self, mask):
        hit = self._incr_cache.get(mask)
        if hit is None:
            hit = 0
            for s, g in self.incr:
                if mask >> s & 1:
                    hit |= 1 << g
            self._incr_cache[mask] = hit
        return hit

    def saturate(self, S, present, lookup):
        """Close S under moves allowed by the registers present in prefix f.

        present: set of (offset, id) first-written so far (offset = K - round).
        lookup(j): S_{K-j}[match(f)] for 1 <= j <= v, or None below round 0.
        """
        static = [(s, g) for s, g in self.nop]
        static += [(s, g) for s, g, a in self.writes if (0, a) in present]
        for s, g, j, a in self.blank_reads:
            if (j, a) not in present:
                static.append((s, g))
        dynamic = []
        for s, g, j, a, masks in self.value_reads:
            if (j, a) not in present:
                continue
            if j == 0:
                dynamic.append((s, g, masks))
            else:
                old = lookup(j)
                if old is not None and any(old & m == m for m in masks):
                    static.append((s, g))
        while True:
            before = S
            grew = True
            while grew:
                grew = False
                for s, g in static:
                    if S >> s & 1 and not S >> g & 1:
                        S |= 1 << g
                        grew = True
            for s, g, masks in dynamic:
                if S >> s & 1 and not S >> g & 1 and any(S & m == m for m in masks):
                    S |= 1 << g
            if S == before:
                return S


def _match_index(F_old, F_new, i, v):
    """match_{r,r+1}: index of the prefix of F_old aligned with F_new[:i].

    Entries are (offset from own round, id).  The shared rounds r+1-v..r
    appear in F_new with offset 1..v and in F_old with offset 0..v-1.
    """
    t = 0
    for off, _ in F_new[:i]:
        if 1 <= off <= v:
            t += 1
    seen = 0
    for pos, (off, _) in enumerate(F_old):
        if off <= v - 1:
            if seen == t:
                return pos
            seen += 1
    return len(F_old)


def round_body(C, K, F, older):
    """S_K[f] for every prefix f of F, or None when a prefix is rejected.

    older: ((F_{K-1}, S_{K-1}), (F_{K-2}, S_{K-2}), ...) newest first, at
    most v entries, only rounds >= 0.
    """
    v = C.v
    S_list = []
    present = set()
    for i in range(len(F) + 1):
        if i > 0:
            off, a = F[i - 1]
            present.add((off, a))
            if off == 0 and not (C.write_sources[a] & S_list[-1]):
                return None
        S = S_list[-1] if S_list else 0
        if K == 0 and i == 0:
            S |= 1 << C.init
        # chain of synchronised prefix indices into older rounds
        idx = []
        cur_F, cur_i = F, i
        for Fo, So in older:
            cur_i = _match_index(Fo, cur_F, cur_i, v)
            idx.append(So[cur_i])
            cur_F = Fo
        if older:
            S |= C.incr_successors(idx[0])

        def lookup(j, idx=idx):
            return idx[j - 1] if j <= len(idx) else None

        S_list.append(C.saturate(S, present, lookup))
    return tuple(S_list)


_EXT_CACHE = {}


def extensions(base, d):
    """Every way to insert 0..d distinct fresh round registers into base."""
    key = (base, d)
    hit = _EXT_CACHE.get(key)
    if hit is not None:
        return hit
    out = []
    n = len(base)
    for t in range(d + 1):
        for ids in permutations(range(d), t):
            for spots in combinations(range(n + t), t):
                seq = []
                bi = ni = 0
                for pos in range(n + t):
                    if ni < t and spots[ni] == pos:
                        seq.append((0, ids[ni]))
                        ni += 1
                    else:
                        seq.append(base[bi])
                        bi += 1
                out.append(tuple(seq))
    out = tuple(out)
    _EXT_CACHE[key] = out
    return out


@dataclass(frozen=True)
class WindowState:
    """Search memory at round k: (F_r, S_r) for the rounds still needed.

    rounds holds, oldest first, the last min(k+1, max(v, 1)) rounds.
    """

    k: int = field(compare=False)
    boundary: int
    rounds: tuple

    @property
    def key(self):
        return (self.boundary, self.rounds)

    def final_set(self):
        return self.rounds[-1][1][-1]


def _make_state(C, K, rounds):
    keep = max(C.v, 1)
    return WindowState(K, min(K, C.v + 1), tuple(rounds[-keep:]))


def initial_window_states(C):
    out = []
    for F in extensions((), C.d):
        S = round_body(C, 0, F, ())
        if S is not None:
            out.append((F, _make_state(C, 0, ((F, S),))))
    return out


def successor_window_states(C, w):
    """[(F_{k+1}, state)] for every non-rejected choice of F_{k+1}."""
    if not isinstance(C, Compiled):
        C = Compiled(C)
    v = C.v
    K = w.k + 1
    F_k = w.rounds[-1][0]
    base = tuple((off + 1, a) for off, a in F_k if off <= v - 1)
    older = tuple(reversed(w.rounds))[:v] if v > 0 else (w.rounds[-1],)
    out = []
    for F in extensions(base, C.d):
        S = round_body(C, K, F, older)
        if S is not None:
            out.append((F, _make_state(C, K, w.rounds + ((F, S),))))
    return out


@dataclass
class Verdict:
    status: str                      # SAFE, UNSAFE or INCONCLUSIVE
    round: int = None
    family: tuple = None             # F_0..F_k as tuples of RegisterRef
    final_states: frozenset = None   # S_k[F_k], original state names
    nodes: int = 0
    depth: int = 0
    seconds: float = 0.0

    def __str__(self):
        if self.status == "UNSAFE":
            return f"UNSAFE round={self.round}"
        if self.status == "INCONCLUSIVE":
            return f"INCONCLUSIVE rounds<={self.depth}"
        return "SAFE"


def _absolute(F, r):
    return tuple(RegisterRef(r - off, a) for off, a in F)


def _relative(F, r):
    return tuple((r - reg.round, reg.id) for reg in F)


def _expand_chunk(args):
    protocol, states = args
    C = Compiled(protocol)
    return [successor_window_states(C, w) for w in states]


def verify(p, error_state=None, max_rounds=None, budget=None, jobs=1):
    """Breadth-first search over window memories, one level per round.

    Returns UNSAFE at the smallest round where the error state is
    coverable, SAFE when no new memory appears, and INCONCLUSIVE when
    max_rounds is reached first.
    """
    started = time.perf_counter()
    if error_state is None:
        error_state = p.error
    if error_state is None:
        raise ProtocolError("no error state given")
    C = Compiled(p)
    target = C.mask_of(error_state)
    budget = node_budget(budget)
    parent = {}
    level = []
    for F, w in initial_window_states(C):
        if w.key in parent:
            continue
        parent[w.key] = (None, F)
        level.append(w)
    K = 0
    pool = ProcessPoolExecutor(jobs) if jobs and jobs > 1 else None
    try:
        while level:
            for w in level:
                if w.final_set() & target:
                    return _unsafe(C, parent, w, started)
            if max_rounds is not None and K >= max_rounds:
                return Verdict("INCONCLUSIVE", nodes=len(parent), depth=K,
                               seconds=time.perf_counter() - started)
            if pool is not None:
                chunks = [level[i::jobs] for i in range(jobs)]
                results = list(pool.map(_expand_chunk, [(p, c) for c in chunks]))
                expanded = []
                for i in range(len(level)):
                    expanded.append((level[i], results[i % jobs][i // jobs]))
            else:
                expanded = ((w, successor_window_states(C, w)) for w in level)
            nxt = []
            for w, succ in expanded:
                for F, s in succ:
                    if s.key in parent:
                        continue
                    parent[s.key] = (w.key, F)
                    if budget is not None and len(parent) > budget:
                        raise BudgetExceeded(f"verifier exceeded {budget} nodes")
                    nxt.append(s)
            level = nxt
            K += 1
    finally:
        if pool is not None:
            pool.shutdown()
    return Verdict("SAFE", nodes=len(parent), depth=K, seconds=time.perf_counter() - started)


def _unsafe(C, parent, w, started):
    rel = []
    key = w.key
    while key is not None:
        prev, F = parent[key]
        rel.append(F)
        key = prev
    rel.reverse()
    family = tuple(_absolute(F, r) for r, F in enumerate(rel))
    return Verdict("UNSAFE", round=w.k, family=family,
                   final_states=C.state_names(w.final_set()), nodes=len(parent),
                   depth=w.k, seconds=time.perf_counter() - started)


# ------------------------------------------------------------ synchronise

def _window(F, lo, hi):
    return tuple(r for r in F if lo <= r.round <= hi)


def synchronise(F_prev, F_cur, f, k, v):
    """Longest prefix of F_prev (round k-1) agreeing with prefix f of F_cur
    (round k) on the registers of rounds k-v..k-1."""
    F_prev, F_cur, f = tuple(F_prev), tuple(F_cur), tuple(f)
    if F_cur[:len(f)] != f:
        raise ValueError("f is not a prefix of F_cur")
    lo, hi = k - v, k - 1
    if _window(F_prev, lo, hi) != _window(F_cur, lo, hi):
        raise InconsistentWindows(f"sequences disagree on rounds {lo}..{hi}")
    want = _window(f, lo, hi)
    best = ()
    for i in range(len(F_prev) + 1):
        if _window(F_prev[:i], lo, hi) == want:
            best = F_prev[:i]
    return best


def synchronise_to(family, r, k, f, v):
    """match_{r,k}(f) by composing one-round synchronisations."""
    f = tuple(f)
    for cur in range(k, r, -1):
        f = synchronise(family[cur - 1], family[cur], f, cur, v)
    return f


# ------------------------------------------------------------ witnesses

def check_family(p, family):
    v, d = p.visibility, p.registers
    fam = [tuple(RegisterRef(*x) for x in F) for F in family]
    if not fam:
        raise MalformedWitness("empty family")
    for r, F in enumerate(fam):
        if len(set(F)) != len(F):
            raise MalformedWitness(f"F[{r}] repeats a register")
        for reg in F:
            if not (max(0, r - v) <= reg.round <= r) or not 0 <= reg.id < d:
                raise MalformedWitness(f"F[{r}] has out-of-window register {reg}")
        if r > 0 and _window(fam[r - 1], r - v, r - 1) != _window(F, r - v, r - 1):
            raise MalformedWitness(f"F[{r - 1}] and F[{r}] disagree on shared rounds")
    return fam


def replay_witness(p, error_state, family):
    """CONFIRMED when the fixed family runs without rejection to the error."""
    fam = check_family(p, family)
    C = Compiled(p)
    target = C.mask_of(error_state)
    v = C.v
    history = []
    for r, F in enumerate(fam):
        rel = _relative(F, r)
        older = tuple(reversed(history))[:max(v, 1)]
        S = round_body(C, r, rel, older)
        if S is None:
            return "REFUTED"
        history.append((rel, S))
    return "CONFIRMED" if history[-1][1][-1] & target else "REFUTED"


def format_witness(verdict):
    lines = [f"UNSAFE round={verdict.round}"]
    for r, F in enumerate(verdict.family):
        body = " ".join(str(x) for x in F)
        lines.append(f"F[{r}] = {body}".rstrip())
    return "\n".join(lines) + "\n"


def parse_witness(text):
    lines = [l.strip() for l in text.splitlines() if l.strip()]
    if not lines or not lines[0].startswith("UNSAFE round="):
        raise MalformedWitness("first line must be 'UNSAFE round=<k>'")
    try:
        k = int(lines[0].split("=", 1)[1])
    except ValueError:
        raise MalformedWitness("bad round number") from None
    family = []
    for r, line in enumerate(lines[1:]):
        head, _, body = line.partition("=")
        if head.strip() != f"F[{r}]":
            raise MalformedWitness(f"expected F[{r}], got {head.strip()!r}")
        regs = []
        for tok in body.split():
            try:
                kk, a = tok[1:].split(".")
                assert tok[0] == "r"
                regs.append(RegisterRef(int(kk), int(a)))
            except (ValueError, AssertionError):
                raise MalformedWitness(f"bad register {tok!r}") from None
        family.append(tuple(regs))
    if len(family) != k + 1:
        raise MalformedWitness(f"round={k} but {len(family)} sequences given")
    return k, tuple(family)
