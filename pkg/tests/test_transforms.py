"""Reprogramming schedules, ordered variant, puncturing, truncation."""

from fractions import Fraction

import pytest

from qromlab.adversary import (
    ExpectedAlgorithm,
    QueryAlgorithm,
    build_verifier,
    expected_wrappers,
    oracle_zoo,
    ordered_zoo,
    output_distribution,
    pr_register,
    run_simulator,
)
from qromlab.oracle import ClassicalOracle, prefix_domain
from qromlab.protocol import toy_table
from qromlab.transforms import (
    MarSchedule,
    apply_schedule,
    enumerate_schedules,
    mar_check_general,
    mar_check_ordered,
    mar_general,
    mar_ordered,
    o2h_corollary_C,
    truncate,
)

ODOM = prefix_domain((0, 1), 2)


def zoo_member(name, domain=(0, 1)):
    return {a.name: a for a in oracle_zoo(domain)}[name]


def ordered_member(name):
    return {a.name: a for a in ordered_zoo((0, 1))}[name]


class TestSchedules:
    @pytest.mark.parametrize(
        "k,q,count",
        [(1, 0, 1), (1, 1, 3), (1, 2, 5), (2, 1, 5), (2, 2, 17), (2, 8, 257)],
    )
    def test_counts(self, k, q, count):
        assert len(enumerate_schedules(k, q)) == count

    @pytest.mark.parametrize("q", [1, 2, 3, 8])
    def test_two_slot_collision_formula(self, q):
        assert len(enumerate_schedules(2, q)) == (2 * q + 1) ** 2 - 4 * q

    def test_validation(self):
        with pytest.raises(ValueError):
            MarSchedule(((1, 0), (1, 1)), 2)
        with pytest.raises(ValueError):
            MarSchedule(((3, 0),), 2)
        with pytest.raises(ValueError):
            MarSchedule(((1, 2),), 2)
        MarSchedule((None, (2, 1)), 2)

    def test_timing_semantics(self):
        # timing 0 reprograms before answering, timing 1 after
        alg = zoo_member("oq-classical")
        zero = ClassicalOracle.constant((0, 1), (0, 1), 0)
        for timing, answer in ((0, 1), (1, 0)):
            branches = apply_schedule(
                alg, zero, MarSchedule(((1, timing),), 1), (1,)
            )
            dist = output_distribution(branches, ("A",))
            assert dist == {(answer,): Fraction(1)}
            assert all(("mar-slot-0", 0) in br.outcomes for br in branches)

    def test_one_value_per_slot(self):
        alg = zoo_member("oq-classical")
        zero = ClassicalOracle.constant((0, 1), (0, 1), 0)
        with pytest.raises(ValueError):
            apply_schedule(alg, zero, MarSchedule(((1, 0),), 1), (1, 1))


class TestGeneralReprogramming:
    def test_uniform_query_frozen_values(self):
        alg = zoo_member("oq-uniform")
        zero = ClassicalOracle.constant((0, 1), (0, 1), 0)
        for x_star in ((0,), (1,)):
            r = mar_check_general(alg, zero, x_star, (1,), ("Q",))
            assert abs(r.lhs - 0.5) <= 1e-12
            assert abs(r.rhs - 0.5) <= 1e-12
            assert r.factor == Fraction(1, 9)
            assert r.schedules == 3
            assert r.pr_bot == 0.0
            assert r.holds

    def test_distribution_is_normalized(self):
        alg = zoo_member("oq-phase")
        zero = ClassicalOracle.constant((0, 1), (0, 1), 0)
        dist = mar_general(alg, zero, (1,), ("Q",))
        assert abs(float(sum(dist.values())) - 1) <= 1e-12

    def test_targets_must_be_distinct(self):
        alg = zoo_member("oq-classical")
        zero = ClassicalOracle.constant((0, 1), (0, 1), 0)
        with pytest.raises(ValueError):
            mar_check_general(alg, zero, (0, 0), (1, 1), ("Q", "A"))

    def test_amortized_distribution_reused(self):
        alg = zoo_member("oq-uniform")
        zero = ClassicalOracle.constant((0, 1), (0, 1), 0)
        dist = mar_general(alg, zero, (1,), ("Q",))
        direct = mar_check_general(alg, zero, (0,), (1,), ("Q",))
        shared = mar_check_general(alg, zero, (0,), (1,), ("Q",), dist=dist)
        assert direct == shared


class TestOrderedReprogramming:
    def test_consistent_member_frozen_values(self):
        alg = ordered_member("ord-classical")
        zero = ClassicalOracle.constant(ODOM, (0, 1), 0)
        r = mar_check_ordered(alg, zero, (0, 1), (1, 1), ("O1", "O2"))
        assert abs(r.lhs - 11 / 17) <= 1e-12
        assert abs(r.pr_bot - 4 / 17) <= 1e-12
        assert r.rhs == 1.0
        assert r.schedules == 17
        assert r.holds

    def test_inconsistent_member_aborts(self):
        alg = ordered_member("ord-inconsistent")
        zero = ClassicalOracle.constant(ODOM, (0, 1), 0)
        r = mar_check_ordered(alg, zero, (0, 1), (1, 1), ("O1", "O2"))
        assert r.lhs == 0.0
        assert r.rhs == 0.0
        assert abs(r.pr_bot - 12 / 17) <= 1e-12
        assert r.holds

    @pytest.mark.parametrize(
        "name", ["ord-classical", "ord-inconsistent", "ord-superposition", "ord-none"]
    )
    def test_abort_rule_recomputable_from_points(self, name):
        alg = ordered_member(name)
        zero = ClassicalOracle.constant(ODOM, (0, 1), 0)
        dist = mar_ordered(alg, zero, (1, 1), ("O1", "O2"))
        assert abs(float(sum(dist.values())) - 1) <= 1e-12
        for out in dist:
            last = out.points[-1]
            ok = all(p == last[: len(p)] for p in out.points)
            assert out.consistent == ok
            assert out.output == (last if ok else None)

    def test_target_prefixes_must_live_in_domain(self):
        alg = ordered_member("ord-classical")
        zero = ClassicalOracle.constant(ODOM, (0, 1), 0)
        with pytest.raises(ValueError):
            mar_check_ordered(alg, zero, (0, 1, 0), (1, 1, 1), ("O1", "O2", "O2"))


class TestPuncturing:
    def test_no_query_case_halves(self):
        alg = zoo_member("oq-none", (0, 1, 2))
        r = o2h_corollary_C(alg, (0, 1, 2), (0,))
        assert r.q == 0
        assert r.p_a_fs == 1.0
        assert r.p_c == 0.5  # the coin keeps only the plain-run half
        assert r.holds
        empty = o2h_corollary_C(alg, (0, 1, 2), (1, 2))
        assert empty.p_a_fs == 0.0
        assert empty.p_c == 0.0
        assert empty.holds

    def test_marked_points_checked(self):
        alg = zoo_member("oq-none", (0, 1, 2))
        with pytest.raises(ValueError):
            o2h_corollary_C(alg, (0, 1, 2), (7,))

    @pytest.mark.parametrize("name", ["oq-phase", "oq-adaptive"])
    @pytest.mark.parametrize("marked", [(), (0,), (1, 2)])
    def test_two_query_members_hold(self, name, marked):
        alg = zoo_member(name, (0, 1, 2))
        r = o2h_corollary_C(alg, (0, 1, 2), marked)
        assert r.q == 2
        assert r.holds


class TestTruncation:
    def wrappers(self):
        machine = build_verifier(
            "random_aborting", toy_table(), 1, eps=Fraction(1, 4)
        )
        return machine, expected_wrappers(machine, (1,), 8)

    def test_frozen_accept_masses(self):
        machine, members = self.wrappers()
        want = [Fraction(1, 16), Fraction(1, 16), Fraction(15, 256)]
        for member, value in zip(members, want):
            cut = truncate(member, 8)
            assert pr_register(run_simulator(cut, machine)) == value

    def test_short_branches_pass_through(self):
        _, (honest, _, geo) = self.wrappers()
        cut = truncate(geo, 8)
        assert cut.name == "expected-geometric-trunc8"
        assert cut.branches[0][1] is geo.branches[0][1]
        tail = cut.branches[-1][1]
        assert tail.name.endswith("-cut8")
        assert tail.invocations == 8
        assert truncate(honest, 8).branches[0][1] is honest.branches[0][1]

    def test_budget_hypothesis_required(self):
        base = QueryAlgorithm("noop", (), 0, (("W1", 2),))
        mix = ExpectedAlgorithm("zero", ((Fraction(1), base),), 0)
        truncate(mix, 0)
        _, (_, _, geo) = self.wrappers()
        with pytest.raises(ValueError):
            truncate(geo, 7)  # E = 31/8 > 7/2
