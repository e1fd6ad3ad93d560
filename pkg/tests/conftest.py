import pytest

from rbr.concrete import ConcreteExecution, Move, initial_concrete
from rbr.generators import gen_fig1

FIG1_TEXT = """\
# two processes can reach q4 and q6 at round 1, but not together
name fig1
registers 1
visibility 1
alphabet a b
init q0
error qE
q0 -> q0 : incr
q0 -> q1 : write a
q0 -> q2 : incr
q2 -> q3 : write a
q3 -> q4 : read[-1] _
q2 -> q5 : read[-1] a
q5 -> q6 : read[-0] _
q4 -> q4 : write b
q6 -> qE : read[-0] b
"""

ASPNES_TEXT = """\
name aspnes_A0
registers 2
visibility 1
alphabet top
init A0
error R1
A0 -> C0 : read[-0][0] top
A0 -> B0 : read[-0][0] _
B0 -> C0 : read[-0][1] _
B0 -> C1 : read[-0][1] top
C0 -> W0 : write[0] top
W0 -> E0 [k=0] : nop
W0 -> E0 : read[-1][1] top
W0 -> R0 [k>0] : read[-1][1] _
E0 -> A0 : incr
A1 -> C1 : read[-0][1] top
A1 -> B1 : read[-0][1] _
B1 -> C1 : read[-0][0] _
B1 -> C0 : read[-0][0] top
C1 -> W1 : write[1] top
W1 -> E1 [k=0] : nop
W1 -> E1 : read[-1][0] top
W1 -> R1 [k>0] : read[-1][0] _
E1 -> A1 : incr
"""


def fig1_move(p, src, dst, k):
    for t in p.transitions:
        if t.source == src and t.target == dst:
            return Move(t, k)
    raise KeyError((src, dst))


@pytest.fixture
def fig1():
    return gen_fig1()


@pytest.fixture
def run_q4(fig1):
    """One process: incr, write a at round 1, blank read of round 0."""
    p = fig1
    sched = (fig1_move(p, "q0", "q2", 0), fig1_move(p, "q2", "q3", 1), fig1_move(p, "q3", "q4", 1))
    return ConcreteExecution(initial_concrete(p, 1), sched)


@pytest.fixture
def run_q6(fig1):
    """Two processes: one writes a at round 0, the other reads it from round 1."""
    p = fig1
    sched = (fig1_move(p, "q0", "q1", 0), fig1_move(p, "q0", "q2", 0),
             fig1_move(p, "q2", "q5", 1), fig1_move(p, "q5", "q6", 1))
    return ConcreteExecution(initial_concrete(p, 2), sched)


# ---------------------------------------------------------- acceptance table

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {key}: {detail}")
