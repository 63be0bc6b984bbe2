import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rwl1.exceptions import (DeltaOutOfRange, MuConditionViolated, NoAdmissibleDelta,
                             PreconditionViolated)
from rwl1.theory import (DELTA_MAX, arbitrary_signal_bounds, best_delta_bound,
                         constants_from_delta, iterations_to_threshold, l1_error_bound,
                         limit_L, mu_condition, mu_threshold, recursion_E, recursion_step,
                         rho_of, single_iteration_bound, unrecoverable_energy)

from oracles import mp_constants, mp_fixed_point, mp_recursion

deltas = st.floats(0.0, 0.41, allow_nan=False)


class TestConstants:
    def test_delta_zero(self):
        k = constants_from_delta(0.0)
        assert (k.rho, k.alpha, k.C, k.Cprime, k.Cdoubleprime) == (0.0, 2.0, 4.0, 2.0, 4.0)

    @pytest.mark.parametrize("delta", [0.0, 0.08, 0.2, 0.3, 0.414213])
    @pytest.mark.parametrize("form", ["sqrt", "linear"])
    def test_against_mpmath(self, delta, form):
        k = constants_from_delta(delta, form)
        ref = mp_constants(delta, form)
        got = (k.rho, k.alpha, k.C, k.Cprime, k.Cdoubleprime)
        for g, r in zip(got, ref):
            # C and C' lose digits near the boundary through 1 - rho
            assert g == pytest.approx(float(r), rel=1e-9, abs=1e-15)

    def test_delta_02_values(self):
        k = constants_from_delta(0.2)
        assert k.rho == pytest.approx(0.353553, abs=1e-6)
        assert k.alpha == pytest.approx(2.449490, abs=1e-6)
        assert k.C == pytest.approx(7.5783, abs=1e-3)
        assert k.Cprime == pytest.approx(4.18767, abs=1e-4)

    def test_near_boundary(self):
        k = constants_from_delta(0.414213)
        assert 1 - k.rho < 1e-4
        assert k.C > 1e4 * k.alpha
        assert k.Cdoubleprime < 3.2

    def test_out_of_range(self):
        for bad in (DELTA_MAX, DELTA_MAX + 1e-9, 0.5, -0.01):
            with pytest.raises(DeltaOutOfRange):
                constants_from_delta(bad)
        constants_from_delta(DELTA_MAX - 1e-9)

    def test_rho_crosses_one_at_boundary(self):
        assert rho_of(DELTA_MAX - 1e-9) < 1.0
        assert rho_of(DELTA_MAX + 1e-9) > 1.0

    @given(deltas)
    def test_invariants(self, delta):
        k = constants_from_delta(delta)
        assert 0 <= k.rho < 1
        assert k.Cdoubleprime <= k.C
        if delta > 1e-6:
            assert k.Cdoubleprime < k.C
        assert k.C == pytest.approx(2 * k.alpha / (1 - k.rho), rel=1e-14)


class TestL1Bound:
    def test_sparse_signal(self):
        x = np.array([3.0, 0, -1, 0])
        assert l1_error_bound(0.2, 0.5, x, 2) == pytest.approx(constants_from_delta(0.2).C * 0.5)

    def test_tail(self):
        assert l1_error_bound(0.2, 0.0, [5, 1, 0, 0], 1) == pytest.approx(4.18767, abs=1e-4)

    def test_noiseless_sparse(self):
        assert l1_error_bound(0.2, 0.0, [0, 2, 0], 1) == 0.0


class TestMuCondition:
    def test_examples(self):
        assert mu_condition(1e-9, 0.0, 0.3)
        assert mu_condition(10, 1, 0.08)
        assert mu_threshold(1, 0.08) == pytest.approx(9.883, abs=1e-3)
        assert not mu_condition(10, 1, 0.2)
        assert mu_threshold(1, 0.2) == pytest.approx(15.157, abs=1e-3)


class TestRecursion:
    def test_noiseless(self):
        tr = recursion_E(10, 0.0, 0.1, 5)
        assert tr.E == [0.0] * 5
        assert (tr.L_exact, tr.L_simple) == (0.0, 0.0)

    def test_example(self):
        tr = recursion_E(10, 1, 0.08, 20)
        assert tr.E[0] == pytest.approx(4.9416, abs=1e-4)
        assert all(a > b for a, b in zip(tr.E, tr.E[1:]))
        assert tr.L_exact == pytest.approx(3.72588, abs=1e-5)
        assert tr.L_simple == pytest.approx(3.8593, abs=1e-4)
        assert tr.E[1] <= tr.E[0]

    def test_against_mpmath(self):
        tr = recursion_E(10, 1, 0.08, 30)
        ref = mp_recursion(10, 1, 0.08, 30)
        np.testing.assert_allclose(tr.E, [float(v) for v in ref], rtol=1e-12)

    def test_closed_form_limit_matches_root_finding(self):
        for mu, eps, delta in [(10, 1, 0.08), (10, 0.3, 0.2), (50, 2, 0.15)]:
            L, _ = limit_L(mu, eps, delta)
            assert L == pytest.approx(float(mp_fixed_point(mu, eps, delta)), rel=1e-12)

    def test_limit_at_boundary_equals_simple(self):
        mu = mu_threshold(1.0, 0.1)
        L_exact, L_simple = limit_L(mu, 1.0, 0.1)
        assert L_exact == pytest.approx(L_simple, rel=1e-7)

    def test_mu_condition_enforced(self):
        with pytest.raises(MuConditionViolated):
            recursion_E(10, 1, 0.2, 3)
        with pytest.raises(MuConditionViolated):
            limit_L(10, 1, 0.2)
        with pytest.raises(MuConditionViolated):
            iterations_to_threshold(10, 1, 0.2)

    @settings(max_examples=60)
    @given(deltas, st.floats(0.0, 5.0), st.floats(1.0, 20.0))
    def test_monotone_and_bounded(self, delta, eps, factor):
        mu = mu_threshold(eps, delta) * factor + 1e-3
        tr = recursion_E(mu, eps, delta, 50)
        E = np.array(tr.E)
        assert np.all(np.diff(E) <= 1e-12 * (1 + E[:-1]))
        assert np.all(E >= tr.L_exact - 1e-12 * (1 + tr.L_exact))
        assert tr.L_exact <= tr.L_simple * (1 + 1e-12)

    @settings(max_examples=60)
    @given(deltas, st.floats(0.01, 5.0), st.floats(1.0, 20.0))
    def test_fixed_point(self, delta, eps, factor):
        mu = mu_threshold(eps, delta) * factor
        L, _ = limit_L(mu, eps, delta)
        k = constants_from_delta(delta)
        assert recursion_step(L, mu, eps, k) == pytest.approx(L, rel=1e-10)


class TestIterations:
    def test_noiseless(self):
        assert iterations_to_threshold(10, 0.0, 0.2) == 1

    def test_non_decreasing_in_delta(self):
        grid = np.arange(0.05, 0.41, 0.01)
        counts = [iterations_to_threshold(10, 0.01, d) for d in grid if mu_condition(10, 0.01, d)]
        assert len(counts) > 10
        assert all(a <= b for a, b in zip(counts, counts[1:]))

    def test_more_iterations_for_smaller_ratio(self):
        # the recomputed recursion needs more steps as mu/eps shrinks
        assert iterations_to_threshold(10, 1.0, 0.08) >= iterations_to_threshold(10, 0.01, 0.08)

    def test_definition(self):
        n = iterations_to_threshold(10, 1.0, 0.08, rel_tol=1e-3)
        tr = recursion_E(10, 1.0, 0.08, n)
        target = 1.001 * tr.L_exact
        assert tr.E[-1] <= target
        assert n == 1 or tr.E[-2] > target


class TestBestDelta:
    def test_ratio_ten(self):
        delta, coef = best_delta_bound(10)
        assert coef == pytest.approx(3.85, abs=0.05)
        assert mu_condition(10, 1, delta)
        assert not mu_condition(10, 1, delta + 2e-4)

    def test_ratio_eight(self):
        delta, coef = best_delta_bound(8)
        assert delta == pytest.approx(0.0, abs=1e-4)
        assert coef == pytest.approx(4.0, abs=1e-3)

    def test_below_eight(self):
        with pytest.raises(NoAdmissibleDelta):
            best_delta_bound(7.9)

    def test_large_ratio_limit(self):
        delta, coef = best_delta_bound(1e6)
        limit = constants_from_delta(DELTA_MAX - 1e-6).Cdoubleprime
        assert DELTA_MAX - delta < 2e-4
        assert coef == pytest.approx(limit, abs=1e-3)
        assert coef == pytest.approx(3.1076, abs=1e-3)

    def test_linear_alpha_limit(self):
        _, coef = best_delta_bound(1e6, alpha_form="linear")
        assert coef == pytest.approx(4.060, abs=2e-3)


class TestSingleIteration:
    def test_reduces_to_sparse_case(self):
        bound, c = single_iteration_bound(2, 0.001, 0, 10, 30, 0.1, 0.5, 0.0)
        k = constants_from_delta(0.1)
        C1 = 2.001 / (8.001)
        assert c.C1 == pytest.approx(C1, rel=1e-14)
        assert bound == pytest.approx((1 + C1) * k.alpha / (1 - k.rho * C1) * 0.5, rel=1e-10)

    def test_independent_evaluation(self):
        A, a, b, mu, s, delta, eps, tail = 2.0, 0.001, 0.3, 10.0, 30, 0.1, 0.5, 0.2
        bound, c = single_iteration_bound(A, a, b, mu, s, delta, eps, tail)
        rho, alpha = (float(v) for v in mp_constants(delta)[:2])
        C1 = (A + a + b) / (mu - A + a)
        C2 = 2 * (A + a + b) / math.sqrt(s)
        D1 = (1 + C1) * alpha / (1 - rho * C1)
        D2 = C2 + (1 + C1) * rho * C2 / (1 - rho * C1)
        assert (c.C1, c.C2, c.D1, c.D2) == pytest.approx((C1, C2, D1, D2), rel=1e-10)
        assert bound == pytest.approx(D1 * eps + D2 * tail / a, rel=1e-10)

    def test_small_a_limit(self):
        bound, _ = single_iteration_bound(0, 1e-12, 0, 10, 4, 0.1, 0.7, 0.0)
        assert bound == pytest.approx(constants_from_delta(0.1).alpha * 0.7, rel=1e-9)

    def test_preconditions(self):
        with pytest.raises(PreconditionViolated):
            single_iteration_bound(11, 0.1, 0, 10, 4, 0.1, 1, 0)
        with pytest.raises(PreconditionViolated):
            single_iteration_bound(9, 0.1, 0, 10, 4, 0.4, 1, 0)
        with pytest.raises(PreconditionViolated):
            single_iteration_bound(1, 0.0, 0, 10, 4, 0.1, 1, 0)

    @settings(max_examples=60)
    @given(deltas, st.floats(0.01, 3.0), st.floats(1.0, 10.0), st.integers(1, 40))
    def test_matches_recursion_step(self, delta, eps, factor, steps):
        mu = mu_threshold(eps, delta) * factor
        tr = recursion_E(mu, eps, delta, steps + 1)
        _, c = single_iteration_bound(tr.E[-2], 1e-12, 0, mu, 1, delta, eps, 0.0)
        assert c.D1 * eps == pytest.approx(tr.E[-1], rel=1e-8)


class TestArbitrarySignal:
    def test_sparse(self):
        k = constants_from_delta(0.1)
        b = arbitrary_signal_bounds(0.1, 0.3, [4, 0, -2, 0], 2)
        assert b.epsilon0 == 0.3
        assert b.bound_half_tail == pytest.approx(4.1 * k.alpha / (1 + k.rho) * (2 / math.sqrt(2) + 0.3))
        assert b.bound_s_tail == pytest.approx(2.4 * k.alpha * 0.3 / (1 + k.rho))

    def test_sparse_half_tail_vanishes(self):
        k = constants_from_delta(0.1)
        b = arbitrary_signal_bounds(0.1, 0.3, [4, 0, 0, 0], 2)
        assert b.bound_half_tail == pytest.approx(4.1 * k.alpha * 0.3 / (1 + k.rho))

    def test_example(self):
        k = constants_from_delta(0.1)
        b = arbitrary_signal_bounds(0.1, 0.0, [5, 1, 0.5, 0], 2)
        assert b.epsilon0 == pytest.approx(1.2 * (0.5 + 0.5 / math.sqrt(2)))
        assert b.bound_s_tail == pytest.approx(2.4 * k.alpha / (1 + k.rho) * (0.5 + 0.5 / math.sqrt(2)))
        assert b.bound_half_tail == pytest.approx(4.1 * k.alpha / (1 + k.rho) * 1.5 / math.sqrt(2))
        assert b.mu == 1.0

    def test_odd_s_uses_ceiling(self):
        b3 = arbitrary_signal_bounds(0.1, 0.0, [5, 4, 3, 2, 1], 3)
        k = constants_from_delta(0.1)
        assert b3.bound_half_tail == pytest.approx(4.1 * k.alpha / (1 + k.rho) * 6 / math.sqrt(3))

    @settings(max_examples=200)
    @given(st.integers(0, 2**32), st.integers(1, 10), st.floats(0, 2))
    def test_epsilon0_dominated(self, seed, half, eps):
        rng = np.random.default_rng(seed)
        d = 4 * half + int(rng.integers(0, 8))
        x = rng.standard_normal(d) * rng.choice([1.0, 1e-3, 1e3], size=d)
        s = 2 * half
        b = arbitrary_signal_bounds(0.1, eps, x, s)
        order = np.sort(np.abs(x))[::-1]
        half_tail = order[half:].sum()
        assert b.epsilon0 <= 2.04 * half_tail / math.sqrt(s) + eps + 1e-9 * (1 + half_tail)


class TestUnrecoverable:
    def test_examples(self):
        assert unrecoverable_energy([1, 0, 2], 2, 0.3) == pytest.approx(0.3)
        assert unrecoverable_energy([5, 0, 0, 1], 1, 0.1) == pytest.approx(1.1)
        assert unrecoverable_energy([2, 2, 1, 1], 2, 0.0) == pytest.approx(math.sqrt(2))


def test_pure_functions():
    a = recursion_E(12, 0.5, 0.1, 10)
    b = recursion_E(12, 0.5, 0.1, 10)
    assert a == b
    assert mpmath.mp.dps == 50
