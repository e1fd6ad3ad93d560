import random

import pytest
from hypothesis import given, settings, strategies as st

from conftest import fig1_move
from rbr.abstract import (AbstractConfig, AbstractExecution, abstract_step, bounded_abstract_reach,
                          bounded_compatible, concretize, initial_abstract, lift,
                          random_abstract_execution, round_saturation_reach)
from rbr.concrete import ConcreteExecution, MoveNotEnabled, initial_concrete, random_execution
from rbr.generators import gen_aspnes, gen_counter, random_protocol
from rbr.protocol import Location, ProtocolError, RegisterRef, split_actions
from strategies import protocols

L = Location


def bit_states(info):
    return {s for s in info.states if s.startswith("q") and "_" in s and s != "q_tick"}


class TestStep:
    def test_incr(self, fig1):
        s = abstract_step(fig1, initial_abstract(fig1), fig1_move(fig1, "q0", "q2", 0))
        assert s == AbstractConfig(frozenset({L("q0", 0), L("q2", 1)}), frozenset())

    def test_write_marks_register(self, fig1):
        s = AbstractConfig(frozenset({L("q0", 0), L("q2", 1)}), frozenset())
        s = abstract_step(fig1, s, fig1_move(fig1, "q2", "q3", 1))
        assert s.written == {RegisterRef(1, 0)}
        assert L("q3", 1) in s.locs

    def test_read_needs_covered_writer(self, fig1):
        # reg(0,0) written, but no writer of a has both ends covered at round 0
        s = AbstractConfig(frozenset({L("q0", 0), L("q2", 1)}), frozenset({RegisterRef(0, 0)}))
        with pytest.raises(MoveNotEnabled, match="value read"):
            abstract_step(fig1, s, fig1_move(fig1, "q2", "q5", 1))

    def test_blank_read_after_write_fails(self, fig1):
        s = AbstractConfig(frozenset({L("q5", 1)}), frozenset({RegisterRef(1, 0)}))
        with pytest.raises(MoveNotEnabled, match="blank read"):
            abstract_step(fig1, s, fig1_move(fig1, "q5", "q6", 1))

    def test_processes_are_not_consumed(self, fig1):
        s = abstract_step(fig1, initial_abstract(fig1), fig1_move(fig1, "q0", "q1", 0))
        s = abstract_step(fig1, s, fig1_move(fig1, "q0", "q2", 0))
        assert s.locs == {L("q0", 0), L("q1", 0), L("q2", 1)}


class TestLift:
    def test_q4_run(self, fig1, run_q4):
        xi = lift(fig1, run_q4)
        assert xi.schedule == run_q4.schedule
        final = xi.final(fig1)
        assert final.locs == {L("q0", 0), L("q2", 1), L("q3", 1), L("q4", 1)}
        assert final.written == {RegisterRef(1, 0)}

    def test_q6_run(self, fig1, run_q6):
        final = lift(fig1, run_q6).final(fig1)
        assert final.locs == {L("q0", 0), L("q1", 0), L("q2", 1), L("q5", 1), L("q6", 1)}
        assert final.written == {RegisterRef(0, 0)}

    def test_empty(self, fig1):
        assert lift(fig1, ConcreteExecution(initial_concrete(fig1, 3))).schedule == ()


class TestConcretize:
    def test_empty(self, fig1):
        n, run = concretize(fig1, AbstractExecution())
        assert n == 1 and run.schedule == ()

    def test_q4_run(self, fig1, run_q4):
        n, run = concretize(fig1, lift(fig1, run_q4))
        assert n <= 9
        assert run.final(fig1).support == {L("q0", 0), L("q2", 1), L("q3", 1), L("q4", 1)}

    def test_q6_run(self, fig1, run_q6):
        n, run = concretize(fig1, lift(fig1, run_q6))
        final = run.final(fig1)
        assert n <= 9
        assert len(final.support) == 5
        assert final.value(RegisterRef(0, 0)) == "a"

    def test_read_after_overwrite(self):
        # the register holds b when the abstract run reads a
        from rbr.protocol import Protocol, Read, Transition, Write
        ts = (Transition("q0", "q1", (Write(0, "a"),)), Transition("q0", "q2", (Write(0, "b"),)),
              Transition("q0", "q3", (Read(0, 0, "a"),)))
        p = Protocol("x", 1, 0, ("a", "b"), "q0", ts)
        from rbr.concrete import Move
        xi = AbstractExecution((Move(ts[0], 0), Move(ts[1], 0), Move(ts[2], 0)))
        n, run = concretize(p, xi)
        assert run.final(p).support == xi.final(p).locs
        assert n <= 7


class TestBoundedReach:
    def test_two_readers_round1(self, fig1):
        locs = bounded_abstract_reach(fig1, 1)
        assert {L("q4", 1), L("q6", 1)} <= locs
        assert L("qE", 1) not in locs

    def test_trivial_target(self, fig1):
        xi = bounded_abstract_reach(fig1, 0, target=("q0", 0))
        assert xi is not None and xi.schedule == ()

    def test_counter_witness(self):
        p = gen_counter(2)
        xi = bounded_abstract_reach(p, 2, target=("qE", 2))
        q = split_actions(p)
        assert L("qE", 2) in xi.final(q).locs
        assert bounded_abstract_reach(p, 1, target="qE") is None

    def test_no_location_beyond_cap(self, fig1):
        assert max(l.round for l in bounded_abstract_reach(fig1, 3)) == 3

    def test_budget(self):
        from rbr.budget import BudgetExceeded
        with pytest.raises(BudgetExceeded):
            bounded_abstract_reach(gen_aspnes("A0"), 4, node_budget=1)


class TestCompatible:
    def test_q4_q6(self, fig1):
        assert not bounded_compatible(fig1, ("q4", 1), ("q6", 1), 3)

    def test_self(self, fig1):
        assert bounded_compatible(fig1, ("q4", 1), ("q4", 1), 1)

    def test_writer_and_incr(self, fig1):
        assert bounded_compatible(fig1, ("q2", 1), ("q1", 0), 1)


class TestRoundSaturation:
    def test_counter3_round2(self):
        info = round_saturation_reach(gen_counter(3), 2)
        assert bit_states(info[2]) == {"q1_0", "q2_1", "q3_0"}

    def test_round0_has_init(self, fig1):
        p = gen_counter(1)
        assert "q0" in round_saturation_reach(p, 0)[0].states

    def test_fragment_only(self, fig1):
        with pytest.raises(ProtocolError):
            round_saturation_reach(fig1, 2)

    def test_report_line(self):
        info = round_saturation_reach(gen_counter(1), 1)
        assert str(info[1]) == "round 1: states = {qE, q_tick}; writable = {move1, move2}"

    def test_agrees_with_bounded_reach(self):
        rng = random.Random(4)
        checked = 0
        while checked < 60:
            p = random_protocol(rng, max_registers=1, max_visibility=0)
            K = rng.randint(0, 6)
            locs = bounded_abstract_reach(p, K)
            info = round_saturation_reach(p, K)
            for k in range(K + 1):
                assert info[k].states == {l.state for l in locs if l.round == k}
            checked += 1


class TestProperties:
    @settings(max_examples=60, deadline=None)
    @given(protocols(), st.integers(0, 12), st.integers(0, 10**6))
    def test_monotone(self, p, steps, seed):
        configs = random_abstract_execution(p, steps, seed).configs(p)
        for a, b in zip(configs, configs[1:]):
            assert a.locs <= b.locs and a.written <= b.written

    @settings(max_examples=60, deadline=None)
    @given(protocols(), st.integers(1, 3), st.integers(0, 12), st.integers(0, 10**6))
    def test_lift_covers_every_location(self, p, n, steps, seed):
        run = random_execution(p, n, steps, seed)
        final = lift(p, run).final(p)
        for c in run.configs(p):
            assert c.support <= final.locs
        assert final.written == {r for r, _ in run.final(p).values}

    @settings(max_examples=60, deadline=None)
    @given(protocols(), st.integers(0, 12), st.integers(0, 10**6))
    def test_concretize_exact(self, p, steps, seed):
        xi = random_abstract_execution(p, steps, seed)
        n, run = concretize(p, xi)
        final = run.final(p)
        assert n <= 2 * len(xi) + 1
        assert final.support == xi.final(p).locs
        assert {r for r, _ in final.values} == xi.final(p).written

    @settings(max_examples=60, deadline=None)
    @given(protocols(), st.integers(0, 4))
    def test_swap_reduction_loses_nothing(self, p, K):
        assert bounded_abstract_reach(p, K) == bounded_abstract_reach(p, K, reduce=False)

    @settings(max_examples=60, deadline=None)
    @given(protocols(), st.integers(0, 3))
    def test_witnesses_replay(self, p, K):
        for loc in bounded_abstract_reach(p, K):
            xi = bounded_abstract_reach(p, K, target=loc)
            assert loc in xi.final(p).locs
