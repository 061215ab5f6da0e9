import math
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from covert_timing.model import (ParameterError, PowerBudget, ScenarioParams, Scheme,
                                 TScheduleSpec, check_regime, monte_carlo_bits, power_budget,
                                 schedule_T, throughput_bits)


def params(**kw):
    base = dict(n=100, T=100)
    base.update(kw)
    return ScenarioParams(**base)


class TestScenarioParams:
    @pytest.mark.parametrize("field,value", [
        ("n", 0), ("T", 0), ("sigma_w_sq", 0.0), ("sigma_b_sq", -1.0),
        ("c_P", 0.0), ("c_P", 1.0), ("gamma", 1.5), ("n", 2.5),
    ])
    def test_rejects_out_of_range(self, field, value):
        with pytest.raises(ParameterError, match=field):
            params(**{field: value})

    def test_scheme_from_string(self):
        assert params(scheme="binary").scheme is Scheme.BINARY


class TestSchedule:
    def test_examples(self):
        assert schedule_T(TScheduleSpec.parse("fixed:10"), 5) == 10
        assert schedule_T(TScheduleSpec.parse("poly:2"), 7) == 49
        # ceil(e^2) with e^2 = 7.389...
        assert schedule_T(TScheduleSpec.parse("exp:0.1"), 20) == 8

    def test_fractional_power_uses_ceiling(self):
        assert schedule_T(TScheduleSpec("poly", 1.5), 10) == math.ceil(10 ** 1.5)

    def test_exponential_overflow(self):
        with pytest.raises(OverflowError):
            schedule_T(TScheduleSpec("exp", 1.0), 1000)

    def test_parse_round_trip(self):
        for text in ("poly:2", "exp:0.1", "fixed:100"):
            assert str(TScheduleSpec.parse(text)) == text

    @pytest.mark.parametrize("text", ["poly", "cubic:2", "fixed:0", "fixed:2.5", "poly:-1"])
    def test_parse_rejects(self, text):
        with pytest.raises(ParameterError):
            TScheduleSpec.parse(text)

    @given(kind=st.sampled_from(["poly", "exp"]), value=st.floats(0, 3),
           n=st.integers(1, 200))
    def test_at_least_one_and_nondecreasing(self, kind, value, n):
        spec = TScheduleSpec(kind, value)
        a, b = schedule_T(spec, n), schedule_T(spec, n + 1)
        assert 1 <= a <= b


class TestPowerBudget:
    def test_gaussian_example(self):
        T = math.ceil(math.exp(4))
        # ln T is slightly above 4 because of the ceiling
        expected = 0.5 * math.sqrt(math.log(T) / 100)
        assert power_budget(params(T=T)).symbol_power == pytest.approx(expected, rel=1e-15)
        assert power_budget(params(T=T)).symbol_power == pytest.approx(0.1, rel=1e-3)

    def test_binary_example(self):
        T = math.ceil(math.exp(4))
        b = power_budget(params(n=8, T=T, sigma_w_sq=2.0, scheme="binary"))
        # sqrt(ln T) / sqrt(16) > 1/2, so the cap holds: 0.5 * 2 * 0.5
        assert b.symbol_power == 0.5
        assert b.amplitude == pytest.approx(math.sqrt(0.5))

    def test_cap_when_log_T_exceeds_n(self):
        n = 10
        T = math.ceil(math.exp(n))
        assert power_budget(params(n=n, T=T, c_P=0.3)).symbol_power == pytest.approx(0.15)

    def test_T_one_gives_zero(self):
        assert power_budget(params(T=1)).symbol_power == 0.0

    @given(n=st.integers(1, 10_000), T=st.integers(1, 10 ** 9), c=st.floats(0.01, 0.99),
           s=st.floats(0.1, 10), scheme=st.sampled_from(list(Scheme)))
    def test_below_half_noise(self, n, T, c, s, scheme):
        p = power_budget(params(n=n, T=T, c_P=c, sigma_w_sq=s, scheme=scheme)).symbol_power
        assert 0 <= p < s / 2

    @given(n=st.integers(1, 5000), T=st.integers(1, 10 ** 6))
    def test_monotone(self, n, T):
        p = power_budget(params(n=n, T=T)).symbol_power
        assert power_budget(params(n=n, T=T + 1)).symbol_power >= p
        assert power_budget(params(n=n + 1, T=T)).symbol_power <= p


class TestThroughput:
    def test_zero_budget(self):
        for scheme in Scheme:
            for known in (False, True):
                p = params(scheme=scheme, slot_known_to_bob=known)
                assert throughput_bits(p, PowerBudget(scheme, 0.0)) == 0.0

    def test_binary_known_slot_example(self):
        p = params(n=200, scheme="binary", slot_known_to_bob=True)
        M = throughput_bits(p, PowerBudget(Scheme.BINARY, 0.0536))
        expected = 200 * 0.5 * (1 - math.log2(1 + math.exp(-0.0268)))
        assert M == pytest.approx(expected, rel=1e-12)
        assert M == pytest.approx(1.92, abs=0.01)

    def test_gaussian_unknown_slot_example(self):
        M = throughput_bits(params(n=100), PowerBudget(Scheme.GAUSSIAN, 0.1))
        assert M == pytest.approx(25 * math.log2(1.025), rel=1e-12)
        assert M == pytest.approx(0.89, abs=0.005)

    def test_gaussian_known_slot(self):
        M = throughput_bits(params(n=100, slot_known_to_bob=True), PowerBudget(Scheme.GAUSSIAN, 0.1))
        assert M == pytest.approx(25 * math.log2(1.05), rel=1e-12)

    def test_binary_unknown_slot_small_power(self):
        # for small a^2 the blank-slot exponent a^2 log2(e) / (8 s_b^2) is the smaller one
        a2 = 0.05
        M = throughput_bits(params(n=400, scheme="binary"), PowerBudget(Scheme.BINARY, a2))
        assert M == pytest.approx(0.5 * 400 * a2 * math.log2(math.e) / 8, rel=1e-12)

    @given(n=st.integers(1, 10 ** 5), T=st.integers(2, 10 ** 9),
           scheme=st.sampled_from(list(Scheme)), known=st.booleans())
    def test_positive_iff_budget_positive(self, n, T, scheme, known):
        p = params(n=n, T=T, scheme=scheme, slot_known_to_bob=known)
        assert throughput_bits(p, power_budget(p)) > 0

    def test_scaling_ratio_on_square_schedule(self):
        for scheme in Scheme:
            for known in (False, True):
                ratios = []
                for n in (100, 400, 1600, 6400):
                    p = params(n=n, T=n * n, scheme=scheme, slot_known_to_bob=known)
                    ratios.append(throughput_bits(p, power_budget(p)) / math.sqrt(n * math.log(n * n)))
                assert max(ratios) / min(ratios) < 1.25


def test_monte_carlo_bits():
    assert monte_carlo_bits(0.3) == (1, True)
    assert monte_carlo_bits(3.9) == (3, False)
    assert monte_carlo_bits(40.0) == (12, True)


def test_check_regime_warns():
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        notes = check_regime(params(n=5, T=1000))
    assert notes and caught
