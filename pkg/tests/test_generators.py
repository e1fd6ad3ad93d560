import random

import pytest

from rbr.abstract import round_saturation_reach
from rbr.generators import (FAMILIES, gen_aspnes, gen_aspnes_agreement, gen_counter, gen_cutoff,
                            gen_drift, gen_fig1, gen_qbf, generate, random_protocol)
from rbr.protocol import ProtocolError, Read, parse_protocol, print_protocol, validate
from rbr.qbf import (NO, WAIT, YES, QbfError, QbfFormula, format_qdimacs, parse_qdimacs,
                     qbf_next, qbf_trace, qbf_validity_brute, qbf_validity_iterated,
                     random_formula)
from rbr.verifier import verify

from oracles import counter_bit_states, counter_expected, qbf_rounds_disagree

# exists x2, forall x1, exists x0: ~x2 & ~x1 & (x1 | ~x0); tuples list x0 first
SMALL = QbfFormula(3, ((-3, -3, -3), (-2, -2, -2), (2, -1, -1)))


class TestShapes:
    def test_counter2(self):
        p = gen_counter(2)
        assert {"q0", "q_tick", "q1_0", "q1_1", "q2_0", "qE"} == set(p.states)
        assert (p.registers, p.visibility) == (1, 0)

    def test_consensus(self):
        p = gen_aspnes("A0")
        assert len(p.states) == 12
        assert (p.registers, p.visibility, p.init, p.error) == (2, 1, "A0", "R1")
        guarded = {t.source for t in p.transitions if t.guard is not None}
        assert guarded == {"W0", "W1"}
        assert gen_aspnes("A1").error == "R0"

    def test_consensus_bad_init(self):
        with pytest.raises(ValueError):
            gen_aspnes("B0")

    def test_agreement(self):
        p = gen_aspnes_agreement()
        assert (p.init, p.error) == ("q0", "qF")
        loops = {t.source for t in p.transitions if t.source == t.target and str(t.action) == "incr"}
        assert {"R0", "R1"} <= loops

    def test_drift_tick_cycle(self):
        p = gen_drift(1)
        assert p.visibility == 1
        edges = {(t.source, t.target) for t in p.transitions}
        assert {("q_tick", "qB"), ("qB", "qC"), ("qC", "qD"), ("qD", "q_tick")} <= edges
        reads = [t.action for t in p.transitions if t.source in ("qB", "qC")]
        assert all(isinstance(a, Read) and a.offset == 1 for a in reads)

    @pytest.mark.parametrize("make", [gen_counter, gen_cutoff, gen_drift])
    def test_zero_rejected(self, make):
        with pytest.raises(ValueError):
            make(0)

    def test_every_family_round_trips(self):
        ps = [gen_fig1(), gen_aspnes("A0"), gen_aspnes("A1"), gen_aspnes_agreement(),
              gen_qbf(random_formula(random.Random(0), 4, 4))]
        ps += [f(m) for f in (gen_counter, gen_cutoff, gen_drift) for m in (1, 2, 3)]
        for p in ps:
            assert validate(p) == []
            assert parse_protocol(print_protocol(p)) == p

    def test_generate(self):
        assert generate("counter", "2") == gen_counter(2)
        assert generate("fig1") == gen_fig1()
        assert set(FAMILIES) >= {"fig1", "counter", "cutoff", "drift", "aspnes", "agreement"}
        with pytest.raises(ProtocolError):
            generate("nope")
        with pytest.raises(ProtocolError):
            generate("counter")
        with pytest.raises(ProtocolError):
            generate("fig1", "3")

    def test_random_protocol_valid(self):
        rng = random.Random(0)
        for _ in range(50):
            assert validate(random_protocol(rng)) == []


class TestCounter:
    @pytest.mark.parametrize("m", [1, 2, 3, 4])
    def test_first_round(self, m):
        v = verify(gen_counter(m))
        assert (v.status, v.round) == ("UNSAFE", 2 ** (m - 1))

    def test_three_bits_round_two(self):
        info = round_saturation_reach(gen_counter(3), 2)
        assert counter_bit_states(info[2], 3) == {"q1_0", "q2_1", "q3_0"}

    @pytest.mark.parametrize("m", [2, 3, 4])
    def test_remainders(self, m):
        info = round_saturation_reach(gen_counter(m), 2 ** (m - 1))
        for k, row in enumerate(info):
            assert counter_bit_states(row, m) == counter_expected(m, k)


class TestQbfNext:
    def test_known_trace(self):
        # the published trace lists x2 first; these tuples list x0 first
        r = qbf_next(SMALL, (0, 0, 0))
        assert r.valuation == (0, 1, 0)
        r = qbf_next(SMALL, (0, 1, 0))
        assert r.valuation == (1, 1, 0)
        r = qbf_next(SMALL, (1, 0, 1))
        assert r.flags[-1] == NO

    def test_flag_zero_is_decided(self):
        rng = random.Random(3)
        for _ in range(50):
            phi = random_formula(rng, 4, 4)
            for val, flags in qbf_trace(phi, 10):
                assert flags[0] in (YES, NO)
                # once a flag waits, every outer flag waits
                if WAIT in flags:
                    i = flags.index(WAIT)
                    assert set(flags[i:]) == {WAIT}

    def test_wrong_length(self):
        with pytest.raises(QbfError):
            qbf_next(SMALL, (0, 0))


class TestValidity:
    def test_small_invalid(self):
        assert not qbf_validity_brute(SMALL)
        assert not qbf_validity_iterated(SMALL)

    def test_inner_exists(self):
        assert qbf_validity_brute(QbfFormula(2, ((1, 1, 1),)))

    def test_oracles_agree(self):
        rng = random.Random(8)
        for _ in range(40):
            phi = random_formula(rng, 4, 4)
            assert qbf_validity_brute(phi) == qbf_validity_iterated(phi)

    def test_clause_shape(self):
        with pytest.raises(QbfError):
            QbfFormula(2, ((1, 2),))
        with pytest.raises(QbfError):
            QbfFormula(2, ((1, 2, 3),))


class TestQdimacs:
    def test_round_trip(self):
        rng = random.Random(1)
        for _ in range(20):
            phi = random_formula(rng, 4, 4)
            assert parse_qdimacs(format_qdimacs(phi)) == phi

    def test_outermost_first(self):
        text = "p cnf 2 1\na 1 0\ne 2 0\n2 2 -1 0\n"
        # file variable 2 is innermost, so it becomes x0
        assert parse_qdimacs(text) == QbfFormula(2, ((1, 1, -2),))

    @pytest.mark.parametrize("text", [
        "p cnf 2 1\ne 1 0\ne 2 0\n1 2 2 0\n",
        "p cnf 2 1\ne 1 0\na 2 0\n1 2 2 0\n",
        "p cnf 2 1\na 1 0\ne 2 0\n1 2 0\n",
        "p cnf 2 2\na 1 0\ne 2 0\n1 2 2 0\n",
        "a 1 0\n",
    ])
    def test_rejects(self, text):
        with pytest.raises(QbfError):
            parse_qdimacs(text)


class TestQbfProtocol:
    def test_odd_rejected(self):
        with pytest.raises(QbfError):
            gen_qbf(SMALL)

    def test_matches_brute_force(self):
        rng = random.Random(6)
        seen = set()
        for _ in range(20):
            phi = random_formula(rng, rng.choice((2, 4)), 4)
            valid = qbf_validity_brute(phi)
            seen.add(valid)
            v = verify(gen_qbf(phi))
            assert (v.status == "UNSAFE") == valid
        assert seen == {True, False}

    def test_rounds_follow_counter(self):
        rng = random.Random(7)
        for _ in range(10):
            phi = random_formula(rng, rng.choice((2, 4)), 4)
            assert qbf_rounds_disagree(phi, 6) == []

    def test_no_clauses(self):
        phi = QbfFormula(2, ())
        assert verify(gen_qbf(phi)).status == "UNSAFE"
