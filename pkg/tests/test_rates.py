import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from gavc.channel import ScalarAvcSpec
from gavc.errors import DegenerateError, FeasibilityError, ParameterError, ScheduleError
from gavc.rates import (
    BroadcastSpec,
    DpcParams,
    DpcSpec,
    alpha0,
    broadcast_region,
    broadcast_sum_rate_cap,
    deterministic_capacity,
    dpc_capacity_condition,
    dpc_feasible,
    dpc_outer_bound,
    dpc_rate,
    key_size_schedule,
    randomized_capacity,
    watermark_covertext_power,
)
from oracles import cr_mp, dpc_rate_mp

pos = st.floats(0.01, 50)
nonneg = st.floats(0, 50)


class TestScalarCapacities:
    def test_unit_snr(self):
        assert randomized_capacity(ScalarAvcSpec(1, 0, 1)) == pytest.approx(0.5, rel=1e-12)

    def test_figure_parameters(self):
        got = randomized_capacity(ScalarAvcSpec(6, 1, 0.1))
        assert got == pytest.approx(cr_mp(6, 1, 0.1), rel=1e-12)
        assert got == pytest.approx(1.3452, abs=1e-4)

    def test_zero_power(self):
        assert randomized_capacity(ScalarAvcSpec(0, 5, 1)) == 0.0

    @pytest.mark.parametrize("g,l,expected", [(1, 2, 0.0), (2, 1, 0.5), (1, 1, 0.0)])
    def test_deterministic(self, g, l, expected):
        assert deterministic_capacity(ScalarAvcSpec(g, l, 1)) == pytest.approx(expected, abs=1e-15)

    @given(g=pos, l=nonneg, w=pos)
    @settings(max_examples=80)
    def test_ordering_and_monotonicity(self, g, l, w):
        s = ScalarAvcSpec(g, l, w)
        c = randomized_capacity(s)
        assert deterministic_capacity(s) <= c
        assert randomized_capacity(ScalarAvcSpec(g * 1.1, l, w)) > c
        assert randomized_capacity(ScalarAvcSpec(g, l + 0.1, w)) < c
        assert randomized_capacity(ScalarAvcSpec(g, l, w * 1.1)) < c


class TestBroadcast:
    spec = BroadcastSpec(6, 1, 0.1, 5)

    def test_alpha_one(self):
        (p,) = broadcast_region(self.spec, [1.0]).curve
        assert (p.r1, p.r2) == pytest.approx((0.0, 0.5), abs=1e-15)

    def test_empty_when_jammer_dominates(self):
        region = broadcast_region(BroadcastSpec(1, 2, 0.1, 5), [0.5])
        assert region.empty and len(region) == 0 and not region

    def test_sum_rate_cap(self):
        expected = 0.5 * math.log2(1 + 5 / 1.1) + 0.5 * math.log2(1 + 1 / 11)
        assert broadcast_sum_rate_cap(self.spec) == pytest.approx(expected, rel=1e-12)
        assert expected == pytest.approx(1.298, abs=1e-3)

    def test_alpha_outside_range(self):
        with pytest.raises(ParameterError):
            broadcast_region(self.spec, [1 / 6])
        with pytest.raises(ParameterError):
            broadcast_region(self.spec, [1.01])

    def test_strong_rate_decreasing_in_alpha(self):
        grid = np.linspace(0.2, 1, 50)
        region = broadcast_region(self.spec, grid)
        r1 = [p.r1 for p in region.curve]
        r2 = [p.r2 for p in region.curve]
        assert np.all(np.diff(r1) < 0) and np.all(np.diff(r2) > 0)

    def test_segment_endpoints(self):
        region = broadcast_region(self.spec, [0.5])
        corner, end = region.segment
        assert corner.r1 + corner.r2 == pytest.approx(region.sum_rate_cap, rel=1e-12)
        assert (end.r1, end.r2) == (pytest.approx(region.sum_rate_cap), 0.0)

    def test_classical_region_when_unjammed(self):
        spec = BroadcastSpec(6, 0, 0.1, 5)
        (p,) = broadcast_region(spec, [0.3]).curve
        assert p.r1 == pytest.approx(0.5 * math.log2(1 + 0.7 * 6 / 0.1))
        assert p.r2 == pytest.approx(0.5 * math.log2(1 + 0.3 * 6 / (0.7 * 6 + 5)))

    def test_contains(self):
        region = broadcast_region(self.spec, np.linspace(0.2, 1, 20))
        p = region.curve[5]
        assert region.contains(p.r1 * 0.99, p.r2 * 0.99)
        assert not region.contains(p.r1 + 0.2, p.r2 + 0.2)

    def test_ordering_enforced(self):
        with pytest.raises(ParameterError):
            BroadcastSpec(6, 1, 5, 0.1)


class TestDpc:
    def test_interference_as_noise(self):
        spec = DpcSpec(4, 5, 1, 2)
        r = dpc_rate(DpcSpec(4, 1, 1, 2), DpcParams.of(DpcSpec(4, 1, 1, 2), 0.0, 0.0))
        assert r == pytest.approx(0.5 * math.log2(1 + 4 / (2 + 1 + 1)), rel=1e-12)
        # with lambda = 5 the (0, 0) point sees received power 4 < 5
        with pytest.raises(FeasibilityError):
            dpc_rate(spec, DpcParams.of(spec, 0.0, 0.0))

    def test_costa_point_reaches_capacity(self):
        spec = DpcSpec(4, 5, 1, 2)
        a0 = alpha0(spec)
        assert a0 == pytest.approx(0.4)
        p = DpcParams.of(spec, a0, 0.0)
        assert p.received_power == pytest.approx(4.8**2 / 4.32, rel=1e-12)
        assert dpc_rate(spec, p) == pytest.approx(0.5 * math.log2(5 / 3), rel=1e-12)
        assert dpc_rate(spec, p) == pytest.approx(randomized_capacity(spec.scalar), rel=1e-12)

    @pytest.mark.parametrize("g,expected", [(4, True), (3.5, False)])
    def test_capacity_condition(self, g, expected):
        assert dpc_capacity_condition(DpcSpec(g, 5, 1, 2)) is expected

    def test_condition_without_interference(self):
        for g, lam in [(2, 1), (1, 2), (3, 3)]:
            assert dpc_capacity_condition(DpcSpec(g, lam, 1, 0)) == (lam < g)

    def test_feasibility_without_interference(self):
        for a, r in [(0, 0), (0.7, 0.3), (-1, -0.5)]:
            ok, margin = dpc_feasible(DpcSpec(3, 2, 1, 0), DpcParams.of(DpcSpec(3, 2, 1, 0), a, r))
            assert ok and margin == pytest.approx(1.0)

    def test_feasibility_boundary(self):
        spec = DpcSpec(5, 5, 1, 0)
        ok, margin = dpc_feasible(spec, DpcParams.of(spec, 0, 0))
        assert not ok and margin == 0.0

    def test_feasibility_agrees_with_condition(self):
        spec = DpcSpec(2, 5, 1, 2)
        ok, _ = dpc_feasible(spec, DpcParams.of(spec, alpha0(spec), 0))
        assert ok == dpc_capacity_condition(spec)

    def test_zero_aux_power(self):
        spec = DpcSpec(0, 1, 1, 2)
        with pytest.raises(DegenerateError):
            dpc_feasible(spec, DpcParams.of(spec, 0.0, 0.0))

    def test_rho_one_degenerate(self):
        spec = DpcSpec(4, 1, 1, 2)
        with pytest.raises(DegenerateError):
            dpc_rate(spec, DpcParams.of(spec, 0.5, 1.0))

    def test_rho_range(self):
        with pytest.raises(ParameterError):
            DpcParams.of(DpcSpec(4, 1, 1, 2), 0.5, 1.5)

    @pytest.mark.parametrize(
        "g,st2,lam,expected",
        [(1, 0, 2, 0.0), (4, 2, 5, 0.5 * math.log2(1 + 4 / 6)), (1, 1, 5, 0.0)],
    )
    def test_outer_bound(self, g, st2, lam, expected):
        assert dpc_outer_bound(DpcSpec(g, lam, 1, st2)) == pytest.approx(expected, abs=1e-15)

    @given(g=pos, lam=nonneg, w=pos, t=nonneg, a=st.floats(-2, 3), r=st.floats(-0.99, 0.99))
    @settings(max_examples=200)
    def test_sandwich_and_formula(self, g, lam, w, t, a, r):
        spec = DpcSpec(g, lam, w, t)
        p = DpcParams.of(spec, a, r)
        assume(p.p_u > 1e-9)
        ok, _ = dpc_feasible(spec, p)
        assume(ok)
        rate = dpc_rate(spec, p)
        assert rate <= dpc_outer_bound(spec) + 1e-12
        assert rate == pytest.approx(dpc_rate_mp(g, lam, w, t, a, r), rel=1e-9, abs=1e-12)

    def test_aux_power_exceeds_decorrelated_power(self):
        # P_U - (1 - rho^2) gamma = (rho sqrt(gamma) + alpha sigma_t)^2
        gen = np.random.default_rng(0)
        for _ in range(200):
            g, t, a, r = gen.uniform(0.1, 5), gen.uniform(0, 5), gen.uniform(-2, 3), gen.uniform(-1, 1)
            p = DpcParams.of(DpcSpec(g, 1, 1, t), a, r)
            assert p.p_u - (1 - r**2) * g == pytest.approx((r * math.sqrt(g) + a * math.sqrt(t)) ** 2, abs=1e-9)


class TestWatermark:
    def test_equal_powers(self):
        assert watermark_covertext_power(1, 1).sigma_t2 == pytest.approx(0.0, abs=1e-15)

    def test_value(self):
        got = watermark_covertext_power(1, 4)
        assert got.sigma_t2 == pytest.approx(0.5 * 4 * math.sqrt(21) - 2 - 1, rel=1e-12)
        assert got.sigma_t2 == pytest.approx(6.165, abs=1e-3)
        assert not got.clamped

    def test_growth_rate(self):
        # between beta = 4 and 400 lower-order terms still matter (ratio 1267, not 1000)
        ratio = watermark_covertext_power(1, 400).sigma_t2 / watermark_covertext_power(1, 4).sigma_t2
        assert ratio == pytest.approx((200 * math.sqrt(1605) - 201) / (2 * math.sqrt(21) - 3), rel=1e-12)
        slope = math.log10(watermark_covertext_power(1, 4000).sigma_t2 / watermark_covertext_power(1, 400).sigma_t2)
        assert slope == pytest.approx(1.5, rel=0.15)
        assert watermark_covertext_power(1, 1e8).sigma_t2 / 1e12 == pytest.approx(1.0, rel=1e-3)

    @pytest.mark.parametrize("g,lam", [(1, 4), (2, 7), (0.5, 30)])
    def test_meets_threshold_with_equality(self, g, lam):
        st2 = watermark_covertext_power(g, lam).sigma_t2
        a0 = g / (g + lam)
        assert (g + a0 * st2) ** 2 / (g + a0**2 * st2) == pytest.approx(lam, rel=1e-12)

    def test_clamped_below_threshold(self):
        got = watermark_covertext_power(1, 0.5)
        assert got == (0.0, True)


class TestKeySchedule:
    def test_nlogn(self):
        assert key_size_schedule(1024, "nlogn") == 10240

    def test_n_squared(self):
        k = key_size_schedule(1024, "n2")
        assert k == 1048576 and math.log2(k) == pytest.approx(2 * math.log2(1024))

    def test_exponential_rejected(self):
        with pytest.raises(ScheduleError):
            key_size_schedule(64, "2^n")
        with pytest.raises(ScheduleError):
            key_size_schedule(64, lambda n: 2 ** (n // 2))

    def test_unknown_rule(self):
        with pytest.raises(ParameterError):
            key_size_schedule(64, "n3")

    def test_linear_rules(self):
        assert key_size_schedule(64, "n") == 64
        assert key_size_schedule(64, "cn", c=2.5) == 160
        assert key_size_schedule(64, "1") == 1

    def test_k_over_n_grows(self):
        ratios = [key_size_schedule(n, "nlogn") / n for n in (64, 128, 256, 512)]
        assert np.all(np.diff(ratios) > 0)
