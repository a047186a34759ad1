import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from datareq.bounds import (
    GApproxParams,
    choose_truncation,
    ea_g_lower_bound,
    ea_uniform,
    empty_bin_log_prob_bound,
    empty_bin_log_prob_exact,
    empty_bin_prob_bound,
    empty_bin_prob_exact,
    g_lower_bound,
    min_training_size,
    nonempty_ea_bound,
    old_overall_bound,
)
from datareq.core_math import Method, g_exact
from datareq.exceptions import DomainError, ParameterError, UnreachableTargetError

from oracles import ea_uniform_enumerated


class TestEmptyBins:
    def test_exact_small(self):
        assert empty_bin_prob_exact(0.5, 0) == 1.0
        assert empty_bin_prob_exact(0.5, 1) == pytest.approx(0.5, abs=1e-15)

    def test_exact_against_rational(self):
        # (0.9999)**10000 evaluated with exact rationals
        assert empty_bin_prob_exact(1e-4, 10000) == pytest.approx(0.36786104643292994, rel=1e-12)

    @pytest.mark.parametrize("b", [0.0, 1.0, -0.2])
    def test_exact_domain(self, b):
        with pytest.raises(DomainError):
            empty_bin_prob_exact(b, 3)

    def test_bound_values(self):
        assert empty_bin_prob_bound(10000, 0) == 1.0
        assert empty_bin_prob_bound(10000, 10000) == pytest.approx(math.exp(-1), abs=1e-15)

    @pytest.mark.parametrize("B", [2, 3, 10, 100, 10**4])
    @pytest.mark.parametrize("m", [1, 2, 10, 100, 10**4, 10**5])
    def test_exact_below_bound(self, B, m):
        assert empty_bin_log_prob_exact(1 / B, m) < empty_bin_log_prob_bound(B, m)
        assert empty_bin_prob_exact(1 / B, m) <= empty_bin_prob_bound(B, m)

    def test_log_forms_survive_underflow(self):
        assert empty_bin_prob_exact(0.5, 10000) == 0.0
        assert empty_bin_log_prob_exact(0.5, 10000) == pytest.approx(10000 * math.log(0.5), rel=1e-15)
        assert empty_bin_log_prob_bound(2, 10000) == -5000.0


class TestOldBounds:
    def test_nonempty(self):
        assert nonempty_ea_bound(0.9) == pytest.approx(0.8, abs=1e-15)
        assert nonempty_ea_bound(1.0) == 1.0
        assert nonempty_ea_bound(0.75) == pytest.approx(0.5, abs=1e-15)
        with pytest.raises(DomainError):
            nonempty_ea_bound(0.4)

    def test_combined_values(self):
        assert old_overall_bound(0, 10000, 0.9) == 0.5
        expected = (1 - math.exp(-1)) * 0.8 + 0.5 * math.exp(-1)
        assert old_overall_bound(10000, 10000, 0.9) == pytest.approx(expected, abs=1e-15)
        assert old_overall_bound(10000, 10000, 0.9) == pytest.approx(0.6896362, abs=1e-7)

    def test_plateau(self):
        assert old_overall_bound(10**7, 10000, 0.9) == pytest.approx(0.8, abs=1e-12)
        assert old_overall_bound(70000, 10000, 0.9) == pytest.approx(0.7997264, abs=1e-7)


class TestEaUniform:
    def test_origin(self):
        est = ea_uniform(0, 10000, 0.9)
        assert est.value == 0.5
        assert est.method is Method.EXACT

    def test_four_per_bin(self):
        v = ea_uniform(40000, 10000, 0.9).value
        assert v >= 0.85
        assert v == pytest.approx(0.868, abs=0.015)

    @pytest.mark.parametrize("m,B", [(0, 1), (5, 3), (1000, 100), (40000, 10000)])
    def test_coin_flip_majority(self, m, B):
        assert ea_uniform(m, B, 0.5).value == pytest.approx(0.5, abs=1e-15)

    @pytest.mark.parametrize("B", [2, 3])
    @pytest.mark.parametrize("m", [1, 2, 3, 4, 5])
    @pytest.mark.parametrize("p", [0.6, 0.9])
    def test_brute_force(self, B, m, p):
        assert abs(ea_uniform(m, B, p).value - ea_uniform_enumerated(B, m, p)) <= 1e-12

    @pytest.mark.parametrize("p", [0.6, 0.9])
    @pytest.mark.parametrize("B", [10, 100])
    def test_non_decreasing(self, p, B):
        v = [ea_uniform(m, B, p).value for m in range(201)]
        assert all(b >= a - 1e-15 for a, b in zip(v, v[1:]))

    @pytest.mark.parametrize("p", [0.55, 0.75, 0.9, 0.99])
    def test_below_optimal(self, p):
        for m in (0, 1, 10, 1000, 10**5):
            assert ea_uniform(m, 100, p).value < p

    @pytest.mark.parametrize("p", [0.55, 0.75, 0.9, 1.0])
    @pytest.mark.parametrize("B", [2, 10, 10000])
    def test_old_bound_is_below(self, p, B):
        for m in (1, 2, 5, 10, 100, 1000, 10000, 70000):
            assert old_overall_bound(m, B, p) <= ea_uniform(m, B, p).value + 1e-9


class TestLowerBound:
    def test_hand_expansion_without_ties(self):
        # single j = 0, n = 1 term with x_0 = r p (m - k_0) / (1 - r) = 0
        params = GApproxParams(include_ties=False)
        assert g_lower_bound(1, 0.5, 0.9, params, inner_limits=[1]) == 0.0

    def test_hand_expansion_with_ties(self):
        # adds the half-weighted empty-bin term (1 - r)**m / 2
        assert g_lower_bound(1, 0.5, 0.9, inner_limits=[1]) == pytest.approx(0.25, abs=1e-15)
        assert g_exact(1, 0.5, 0.9) == pytest.approx(0.7, abs=1e-15)

    def test_inner_limits_validated(self):
        with pytest.raises(ParameterError):
            g_lower_bound(5, 0.3, 0.9, inner_limits=[6])
        with pytest.raises(ParameterError):
            g_lower_bound(5, 0.3, 0.9, GApproxParams(outer_terms=4))

    @pytest.mark.parametrize("kw", [{"term_eps": 0.0}, {"term_eps": 0.01}, {"k_margin": 0.0}, {"outer_terms": -1}])
    def test_params_validated(self, kw):
        with pytest.raises(ParameterError):
            GApproxParams(**kw)

    @pytest.mark.parametrize("args", [(10, 0.0, 0.9), (10, 1.0, 0.9), (10, 0.1, 0.5), (10, 0.1, 1.1)])
    def test_domain(self, args):
        with pytest.raises(DomainError):
            g_lower_bound(*args)

    @pytest.mark.parametrize("k", range(1, 8))
    def test_tight_at_large_m(self, k):
        m = 10000 * k
        exact = g_exact(m, 1e-4, 0.9)
        lower = g_lower_bound(m, 1e-4, 0.9)
        assert lower <= exact + 1e-12
        assert exact - lower <= 0.005

    def test_ties_excluded_is_looser(self):
        with_ties = g_lower_bound(10000, 1e-4, 0.9)
        without = g_lower_bound(10000, 1e-4, 0.9, GApproxParams(include_ties=False))
        assert without < with_ties
        # the empty-bin coin flip alone is worth (1 - r)**m / 2
        assert with_ties - without > 0.5 * (1 - 1e-4) ** 10000

    def test_explicit_limits_match_chosen(self):
        g, ks = choose_truncation(20000, 1e-4, 0.9)
        assert g_lower_bound(20000, 1e-4, 0.9, inner_limits=ks) == g_lower_bound(20000, 1e-4, 0.9)

    @pytest.mark.parametrize("m,r,p", [(500, 0.3, 0.7), (2000, 0.01, 0.95), (50, 0.5, 1.0), (3, 0.2, 0.6)])
    def test_more_terms_never_hurt(self, m, r, p):
        g, ks = choose_truncation(m, r, p, GApproxParams(outer_terms=None))
        prev = -1.0
        for j in range(len(ks)):
            v = g_lower_bound(m, r, p, inner_limits=ks[: j + 1])
            assert v >= prev - 1e-15
            prev = v
        assert prev <= g_exact(m, r, p) + 1e-12


@settings(max_examples=150, deadline=None)
@given(
    m=st.integers(0, 2000),
    r=st.floats(1e-4, 0.95),
    p=st.floats(0.5, 1.0, exclude_min=True),
    c=st.sampled_from([1.0, 3.0, 12.0, 40.0]),
    ties=st.booleans(),
)
def test_lower_bound_never_exceeds_exact(m, r, p, c, ties):
    params = GApproxParams(k_margin=c, include_ties=ties)
    assert g_lower_bound(m, r, p, params) <= g_exact(m, r, p) + 1e-12


class TestChooseTruncation:
    def test_first_limit(self):
        g, ks = choose_truncation(10000, 1e-4, 0.9, GApproxParams(k_margin=12))
        # ceil(1 + 12 * sqrt(0.9999)) + 1
        assert ks[0] == 14
        assert ks == [14 + 2 * j for j in range(len(ks))]

    def test_unbounded_margin_degenerates_to_m(self):
        g, ks = choose_truncation(400, 0.5, 0.9, GApproxParams(k_margin=1e6))
        assert all(k == 400 for k in ks)

    @pytest.mark.parametrize("m", [10000, 40000, 70000])
    def test_few_outer_terms(self, m):
        g, ks = choose_truncation(m, 1e-4, 0.9, GApproxParams(term_eps=1e-12))
        assert 1 <= g <= 20
        assert all(k >= 2 * j + 1 for j, k in enumerate(ks))

    def test_fixed_outer_terms(self):
        g, ks = choose_truncation(1000, 0.01, 0.9, GApproxParams(outer_terms=3))
        assert g == 3 and len(ks) == 4


class TestEaLowerBound:
    def test_below_exact_on_default_grid(self):
        for m in (0, 1250, 2500, 5000, 10000, 20000, 40000, 70000):
            lb = ea_g_lower_bound(m, 10000, 0.9)
            assert lb.method is Method.G_LOWER_BOUND
            assert lb.value <= ea_uniform(m, 10000, 0.9).value + 1e-12
            assert lb.value >= old_overall_bound(m, 10000, 0.9) - 0.02

    def test_degenerate_inputs(self):
        assert ea_g_lower_bound(100, 10, 0.5).value == 0.5
        assert ea_g_lower_bound(5, 1, 0.9).value == pytest.approx(ea_uniform(5, 1, 0.9).value, abs=1e-15)


class TestMinTrainingSize:
    def test_guessing_suffices(self):
        assert min_training_size(0.5, 10000, 0.9) == 0

    def test_crossing_at_085(self):
        m = min_training_size(0.85, 10000, 0.9)
        assert 30000 <= m <= 40000
        assert ea_uniform(m, 10000, 0.9).value >= 0.85
        assert ea_uniform(m - 1, 10000, 0.9).value < 0.85

    @pytest.mark.parametrize("target", [0.9, 0.95])
    def test_unreachable(self, target):
        with pytest.raises(UnreachableTargetError) as info:
            min_training_size(target, 10000, 0.9)
        assert info.value.asymptote == 0.9

    @pytest.mark.parametrize("target,B,p", [(0.6, 10, 0.7), (0.8, 100, 0.85), (0.7, 3, 0.75)])
    def test_minimality(self, target, B, p):
        m = min_training_size(target, B, p)
        values = np.array([ea_uniform(k, B, p).value for k in range(m + 1)])
        assert values[-1] >= target
        assert np.all(values[:-1] < target)
