"""Quantified boolean formulas in strictly alternating prenex 3-CNF.

Variables are x_0 .. x_{n-1}; x_0 is innermost and existential, and the
quantifiers alternate outwards (x_i is existential iff i is even).  A
literal is +(i+1) for x_i and -(i+1) for its negation, as in DIMACS.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

YES, NO, WAIT = "yes", "no", "wait"


class QbfError(ValueError):
    pass


@dataclass(frozen=True)
class QbfFormula:
    var_count: int
    clauses: tuple

    def __post_init__(self):
        if self.var_count < 1:
            raise QbfError("need at least one variable")
        for c in self.clauses:
            if len(c) != 3:
                raise QbfError(f"clause {c} does not have exactly 3 literals")
            for lit in c:
                if lit == 0 or abs(lit) > self.var_count:
                    raise QbfError(f"literal {lit} out of range")

    def satisfied(self, val):
        return all(any(val[abs(l) - 1] == (l > 0) for l in c) for c in self.clauses)

    def __str__(self):
        quants = " ".join(("E" if i % 2 == 0 else "A") + f"x{i}"
                          for i in reversed(range(self.var_count)))
        body = " & ".join("(" + " | ".join(lit_name(l) for l in c) + ")" for c in self.clauses)
        return f"{quants} . {body or 'true'}"


def lit_name(lit):
    i = abs(lit) - 1
    return f"x{i}" if lit > 0 else f"~x{i}"


class NextResult(NamedTuple):
    valuation: tuple
    flags: tuple  # b_0 .. b_n


def qbf_next(phi, val):
    """One step of the valuation counter.

    b_0 says whether val satisfies the matrix.  Going outwards, a variable
    whose flag is wait keeps its value.  Otherwise an existential x_i
    answers yes when the inner part says yes, and tries x_i = 1 before
    answering no; a universal x_i answers no on no, and tries x_i = 1
    before answering yes.
    """
    n = phi.var_count
    if len(val) != n:
        raise QbfError(f"valuation has {len(val)} bits, formula has {n} variables")
    nxt = list(val)
    flags = [YES if phi.satisfied(val) else NO]
    for i in range(n):
        b = flags[i]
        if b == WAIT:
            flags.append(WAIT)
            continue
        cur = val[i]
        if i % 2 == 0:
            if b == YES:
                nxt[i], out = 0, YES
            elif cur == 0:
                nxt[i], out = 1, WAIT
            else:
                nxt[i], out = 0, NO
        else:
            if b == NO:
                nxt[i], out = 0, NO
            elif cur == 0:
                nxt[i], out = 1, WAIT
            else:
                nxt[i], out = 0, YES
        flags.append(out)
    return NextResult(tuple(nxt), tuple(flags))


def qbf_trace(phi, rounds):
    """Valuations and flags of the first `rounds` steps from all-zero."""
    val = (0,) * phi.var_count
    out = []
    for _ in range(rounds):
        res = qbf_next(phi, val)
        out.append((val, res.flags))
        val = res.valuation
    return out


def qbf_validity_iterated(phi, limit=None):
    """Run the counter until the outermost flag settles (yes or no)."""
    val = (0,) * phi.var_count
    limit = limit or 4 ** phi.var_count + 4
    for _ in range(limit):
        res = qbf_next(phi, val)
        if res.flags[-1] != WAIT:
            return res.flags[-1] == YES
        val = res.valuation
    raise QbfError("counter did not settle")


def qbf_validity_brute(phi):
    """Evaluate the quantifier tree directly."""
    n = phi.var_count
    if n > 20:
        raise QbfError("too many variables for brute force")
    val = [0] * n

    def value(i):
        if i < 0:
            return phi.satisfied(val)
        results = []
        for b in (0, 1):
            val[i] = b
            results.append(value(i - 1))
        val[i] = 0
        return any(results) if i % 2 == 0 else all(results)

    return value(n - 1)


def parse_qdimacs(text):
    """Parse the QDIMACS subset: one variable per quantifier line.

    The last quantified variable becomes x_0, so the file lists
    quantifiers from the outermost inwards.
    """
    header = None
    quants = []
    clauses = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if len(parts) != 4 or parts[1] != "cnf":
                raise QbfError(f"line {lineno}: bad header")
            header = (int(parts[2]), int(parts[3]))
            continue
        if header is None:
            raise QbfError(f"line {lineno}: missing 'p cnf' header")
        if parts[0] in ("a", "e"):
            if clauses:
                raise QbfError(f"line {lineno}: quantifier after clauses")
            nums = [int(x) for x in parts[1:]]
            if not nums or nums[-1] != 0:
                raise QbfError(f"line {lineno}: quantifier line must end with 0")
            if len(nums) != 2:
                raise QbfError(f"line {lineno}: quantifier blocks must hold one variable")
            quants.append((parts[0], nums[0]))
            continue
        nums = [int(x) for x in parts]
        if nums[-1] != 0:
            raise QbfError(f"line {lineno}: clause must end with 0")
        if len(nums) != 4:
            raise QbfError(f"line {lineno}: clause must have exactly 3 literals")
        clauses.append(tuple(nums[:3]))
    if header is None:
        raise QbfError("missing 'p cnf' header")
    nvars, nclauses = header
    if len(clauses) != nclauses:
        raise QbfError(f"header says {nclauses} clauses, found {len(clauses)}")
    names = [v for _, v in quants]
    if sorted(names) != list(range(1, nvars + 1)):
        raise QbfError("every variable must be quantified exactly once")
    for (q1, _), (q2, _) in zip(quants, quants[1:]):
        if q1 == q2:
            raise QbfError("quantifier prefix does not alternate")
    if quants[-1][0] != "e":
        raise QbfError("innermost quantifier must be existential")
    # file variable -> index, innermost gets 0
    index = {v: nvars - 1 - pos for pos, (_, v) in enumerate(quants)}
    mapped = []
    for c in clauses:
        for lit in c:
            if abs(lit) > nvars:
                raise QbfError(f"literal {lit} out of range")
        mapped.append(tuple((index[abs(l)] + 1) * (1 if l > 0 else -1) for l in c))
    return QbfFormula(nvars, tuple(mapped))


def format_qdimacs(phi):
    n = phi.var_count
    lines = [f"p cnf {n} {len(phi.clauses)}"]
    for i in reversed(range(n)):
        lines.append(("e" if i % 2 == 0 else "a") + f" {i + 1} 0")
    for c in phi.clauses:
        lines.append(" ".join(str(l) for l in c) + " 0")
    return "\n".join(lines) + "\n"


def random_formula(rng, var_count, max_clauses):
    clauses = []
    for _ in range(rng.randint(1, max_clauses)):
        clauses.append(tuple(rng.choice((1, -1)) * rng.randint(1, var_count) for _ in range(3)))
    return QbfFormula(var_count, tuple(clauses))
