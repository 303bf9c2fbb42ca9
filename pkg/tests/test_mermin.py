import itertools
import math
from fractions import Fraction

import pytest

from freebell import mermin
from freebell.mermin import (
    all_positive_infeasible_from,
    all_positive_required_delta,
    brute_force_bound,
    brute_force_extrema,
    delta_merm_from_deltas,
    ghz_probabilities,
    lhv_bound,
    mermin_measured_value,
    min_delta_merm,
    per_setting_delta,
    quantum_max,
    setting_vectors,
    sign_adapted_deltas,
    sign_coefficient,
    sign_sum,
)


def naive_extrema(n, exponent_offset):
    """Pure-python enumeration: every assignment, every setting vector.

    ``exponent_offset`` is subtracted from sum(k) inside the sine.
    """
    best, worst = -math.inf, math.inf
    for xs in itertools.product((1, -1), repeat=2 * n):
        total = 0
        for k in itertools.product((1, 2), repeat=n):
            s = round(math.sin((sum(k) - exponent_offset) * math.pi / 2))
            prod = math.prod(xs[2 * j + kj - 1] for j, kj in enumerate(k))
            total += s * (prod == 1)
        best, worst = max(best, total), min(worst, total)
    return worst, best


def float_bound(n):
    return 0.5 * (2 ** (n // 2) + 2 ** (n / 2) * math.sin(n * math.pi / 4))


class TestSignCoefficient:
    def test_two_parties(self):
        # first setting on both sides: no second settings chosen
        assert sign_coefficient((1, 1)) == 0
        assert sign_coefficient((1, 2)) == 1
        assert sign_coefficient((2, 2)) == 0

    def test_four_parties_cancel(self):
        assert sum(sign_coefficient(k) for k in setting_vectors(4)) == 0

    def test_matches_trig(self):
        for n in range(2, 8):
            for k in setting_vectors(n):
                assert sign_coefficient(k) == round(math.sin((sum(k) - n) * math.pi / 2))

    @pytest.mark.parametrize("n", range(2, 16))
    def test_sign_sum_closed_form(self, n):
        direct = sum(sign_coefficient(k) for k in setting_vectors(n))
        assert direct == sign_sum(n)
        assert direct == pytest.approx(2 ** (n / 2) * math.sin(n * math.pi / 4), abs=1e-9)

    @pytest.mark.parametrize("n", range(2, 12))
    def test_half_of_terms_nonzero(self, n):
        assert sum(1 for k in setting_vectors(n) if sign_coefficient(k)) == 2 ** (n - 1)

    def test_rejects(self):
        with pytest.raises(ValueError):
            sign_coefficient((1, 3))
        with pytest.raises(ValueError):
            sign_coefficient((1,))


class TestClosedForms:
    @pytest.mark.parametrize("n, b", [(2, 2), (3, 2), (4, 2), (5, 0), (6, 0), (8, 8)])
    def test_lhv_bound(self, n, b):
        assert lhv_bound(n) == b

    @pytest.mark.parametrize("n", range(2, 40))
    def test_exact_matches_float_formula(self, n):
        assert float(lhv_bound(n)) == pytest.approx(float_bound(n), rel=1e-12, abs=1e-9)
        qm = 0.5 * (2 ** (n - 1) + 2 ** (n / 2) * math.sin(n * math.pi / 4))
        assert float(quantum_max(n)) == pytest.approx(qm, rel=1e-12, abs=1e-9)

    @pytest.mark.parametrize("n, m", [(2, 2), (3, 3), (4, 4)])
    def test_quantum_max(self, n, m):
        assert quantum_max(n) == m

    @pytest.mark.parametrize("n, d", [(2, 0), (3, 1), (4, 2)])
    def test_min_delta_merm(self, n, d):
        assert min_delta_merm(n) == d

    @pytest.mark.parametrize("n", range(2, 31))
    def test_gap_identity(self, n):
        assert quantum_max(n) - lhv_bound(n) == min_delta_merm(n)
        assert 2 ** (n - 1) * per_setting_delta(n) == min_delta_merm(n)

    def test_per_setting_delta_values(self):
        assert per_setting_delta(3) == Fraction(1, 4)
        assert per_setting_delta(4) == Fraction(1, 4)
        assert per_setting_delta(20) == Fraction(1, 2) - Fraction(1, 2**10)

    def test_per_setting_delta_saturates(self):
        seq = [per_setting_delta(n) for n in range(2, 60)]
        assert all(a <= b for a, b in zip(seq, seq[1:]))
        assert all(d < Fraction(1, 2) for d in seq)
        assert Fraction(1, 2) - seq[-1] < Fraction(1, 2**29)

    @pytest.mark.parametrize("fn", [lhv_bound, quantum_max, min_delta_merm, per_setting_delta])
    def test_rejects_small_n(self, fn):
        with pytest.raises(ValueError):
            fn(1)


class TestBruteForce:
    @pytest.mark.parametrize("n", range(2, 6))
    def test_matches_naive_enumeration(self, n):
        assert brute_force_extrema(n) == naive_extrema(n, exponent_offset=n)

    @pytest.mark.parametrize("n", range(2, 11))
    def test_equals_closed_form(self, n):
        assert brute_force_bound(n) == lhv_bound(n)

    def test_n5_bound_is_zero(self):
        assert brute_force_bound(5) == 0 == lhv_bound(5)

    def test_unshifted_exponent_breaks_closed_form(self):
        # sin(sum(k) pi/2) with k in {1,2}: wrong at n = 2 mod 4
        assert naive_extrema(2, exponent_offset=0)[1] == 0 != lhv_bound(2)
        assert naive_extrema(3, exponent_offset=0)[1] == lhv_bound(3)

    def test_workers_do_not_change_result(self):
        assert brute_force_extrema(10, workers=2) == brute_force_extrema(10)

    def test_cap(self):
        with pytest.raises(ValueError, match="capped"):
            brute_force_bound(mermin.BRUTE_FORCE_MAX_N + 1)


class TestMeasuredValue:
    def test_all_ones_gives_sign_sum(self):
        probs = {k: 1.0 for k in setting_vectors(3)}
        assert mermin_measured_value(probs) == sum(sign_coefficient(k) for k in setting_vectors(3))

    def test_uniform_half(self):
        probs = {k: 0.5 for k in setting_vectors(5)}
        assert mermin_measured_value(probs) == 0.5 * sign_sum(5)

    @pytest.mark.parametrize("n", range(2, 10))
    def test_ghz_reaches_quantum_max(self, n):
        assert mermin_measured_value(ghz_probabilities(n)) == quantum_max(n)

    def test_ghz_three(self):
        assert mermin_measured_value(ghz_probabilities(3)) == 3

    def test_missing_vector(self):
        probs = {k: 0.5 for k in setting_vectors(3)}
        del probs[(2, 2, 2)]
        with pytest.raises(ValueError, match="missing"):
            mermin_measured_value(probs)

    def test_out_of_range(self):
        probs = {k: 1.5 for k in setting_vectors(2)}
        with pytest.raises(ValueError):
            mermin_measured_value(probs)


class TestDeltaMerm:
    def test_zero(self):
        assert delta_merm_from_deltas({k: 0.0 for k in setting_vectors(3)}) == 0.0

    @pytest.mark.parametrize("n", range(2, 14))
    def test_sign_adapted(self, n):
        d = float(per_setting_delta(n))
        assert delta_merm_from_deltas(sign_adapted_deltas(n, d)) == pytest.approx(2 ** (n - 1) * d, abs=1e-9)
        assert delta_merm_from_deltas(sign_adapted_deltas(n, d)) == pytest.approx(float(min_delta_merm(n)), abs=1e-9)

    def test_sign_adapted_three(self):
        assert delta_merm_from_deltas(sign_adapted_deltas(3, 0.25)) == 1.0

    def test_all_positive_four_cancel(self):
        assert delta_merm_from_deltas({k: 0.2 for k in setting_vectors(4)}) == 0.0

    def test_adapted_bound_holds_for_ghz(self):
        for n in range(2, 10):
            d = float(per_setting_delta(n))
            bound = float(lhv_bound(n)) + delta_merm_from_deltas(sign_adapted_deltas(n, d))
            assert mermin_measured_value(ghz_probabilities(n)) <= bound + 1e-9


class TestAllPositiveChoice:
    def test_required_values(self):
        assert all_positive_required_delta(2) == 0.0
        assert all_positive_required_delta(3) == 0.5
        assert all_positive_required_delta(4) == math.inf

    def test_threshold_is_computed(self):
        n0 = all_positive_infeasible_from(40)
        assert n0 is not None
        for n in range(n0, 41):
            assert all_positive_required_delta(n) > 1.0
        assert all_positive_required_delta(n0 - 1) <= 1.0

    def test_large_n_far_outside(self):
        assert all_positive_required_delta(25) > 1.0
