"""Closed-form link theory: impedances, efficiency, modes, optima."""

import cmath
import math
import random

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wptlink import link_model as lm
from wptlink.errors import ModelDomainError, WeakCouplingError

from conftest import IDEAL, LOOP1, LOOP2

STOCK = lm.Link(LOOP1, LOOP2, 17.5e-9)


def random_identical_link(rng, q_lo=1e1, q_hi=1e4, k_lo=1e-4, k_hi=0.5):
    q = 10 ** rng.uniform(math.log10(q_lo), math.log10(q_hi))
    k = 10 ** rng.uniform(math.log10(k_lo), math.log10(k_hi))
    l = 10 ** rng.uniform(-8, -4)
    c = 10 ** rng.uniform(-13, -9)
    w0 = 1.0 / math.sqrt(l * c)
    res = lm.Resonator(w0 * l / q, l, c)
    return lm.Link(res, res, k * l)


def mode_frequencies_oracle(link, rl):
    """Split resonances via the exact quadratic in u = w^2, 50-digit arithmetic.

    (l^2 - m^2) u^2 + ((r+rl)^2 - 2 l/c) u + 1/c^2 = 0, fully independent of
    the library's bisection path.
    """
    with mpmath.workdps(50):
        l = mpmath.mpf(link.res1.l)
        c = mpmath.mpf(link.res1.c)
        m = mpmath.mpf(link.m12)
        rsum = mpmath.mpf(link.res1.r) + mpmath.mpf(rl)
        a = l * l - m * m
        b = rsum * rsum - 2 * l / c
        cc = 1 / (c * c)
        disc = b * b - 4 * a * cc
        if disc < 0:
            return None
        root = mpmath.sqrt(disc)
        u_hi = (-b + root) / (2 * a)
        u_lo = (-b - root) / (2 * a)
        if u_lo <= 0:
            return None
        two_pi = 2 * mpmath.pi
        return float(mpmath.sqrt(u_hi) / two_pi), float(mpmath.sqrt(u_lo) / two_pi)


class TestTypes:
    def test_resonator_validation(self):
        with pytest.raises(ValueError):
            lm.Resonator(0.0, 1e-6, 1e-12)
        with pytest.raises(ValueError):
            lm.Resonator(0.1, -1e-6, 1e-12)

    def test_resonator_derived_values(self):
        w0 = IDEAL.omega0
        assert w0 == pytest.approx(1.0 / math.sqrt(0.59e-6 * 30.85e-12), rel=1e-15)
        assert IDEAL.f0 == pytest.approx(w0 / (2 * math.pi), rel=1e-15)
        assert IDEAL.reactance(w0) == pytest.approx(0.0, abs=1e-9)

    def test_link_coupling_bound(self):
        lim = math.sqrt(LOOP1.l * LOOP2.l)
        with pytest.raises(ValueError):
            lm.Link(LOOP1, LOOP2, lim)
        with pytest.raises(ValueError):
            lm.Link(LOOP1, LOOP2, -1e-12)
        assert lm.Link(LOOP1, LOOP2, 0.999 * lim).m12 < lim

    def test_termination_validation(self):
        with pytest.raises(ValueError):
            lm.Termination(-1.0 + 5j, 50.0)
        with pytest.raises(ValueError):
            lm.Termination(50.0, 0.0 + 5j)

    def test_mode_pair_ordering(self):
        with pytest.raises(ValueError):
            lm.ModePair(f_even=1e6, f_odd=2e6)


class TestImpedances:
    def test_uncoupled_input_is_lone_resonator(self):
        link = lm.Link(LOOP1, LOOP2, 0.0)
        zin = lm.input_impedance(link, 5.0, LOOP1.omega0)
        assert zin == pytest.approx(LOOP1.r + 0j, abs=1e-9)

    def test_identical_at_resonance_is_real(self):
        link = lm.Link(IDEAL, IDEAL, 3e-8)
        w0 = IDEAL.omega0
        rl = 5.0
        zin = lm.input_impedance(link, rl, w0)
        want = IDEAL.r + (w0 * link.m12) ** 2 / (IDEAL.r + rl)
        assert zin.imag == pytest.approx(0.0, abs=1e-9)
        assert zin.real == pytest.approx(want, rel=1e-12)

    def test_stock_point_against_direct_complex_oracle(self):
        w = 2 * math.pi * 37.3e6
        zl = 5.0 + 0j
        zin = lm.input_impedance(STOCK, zl, w)
        x1 = w * LOOP1.l - 1.0 / (w * LOOP1.c)
        x2 = w * LOOP2.l - 1.0 / (w * LOOP2.c)
        oracle = 0.23 + 1j * x1 + (w * 17.5e-9) ** 2 / (0.20 + zl + 1j * x2)
        assert zin == pytest.approx(oracle, rel=1e-14)

    def test_output_impedance_mirrors(self):
        w = 2 * math.pi * 37.3e6
        zout = lm.output_impedance(STOCK, 5.0 + 0j, w)
        x1 = w * LOOP1.l - 1.0 / (w * LOOP1.c)
        x2 = w * LOOP2.l - 1.0 / (w * LOOP2.c)
        oracle = 0.20 + 1j * x2 + (w * 17.5e-9) ** 2 / (0.23 + 5.0 + 1j * x1)
        assert zout == pytest.approx(oracle, rel=1e-14)

    def test_uncoupled_output(self):
        link = lm.Link(LOOP1, LOOP2, 0.0)
        w = 2 * math.pi * 40e6
        zout = lm.output_impedance(link, 50.0, w)
        assert zout == pytest.approx(LOOP2.r + 1j * LOOP2.reactance(w), rel=1e-12)

    def test_symmetric_link_has_equal_port_impedances(self):
        link = lm.Link(IDEAL, IDEAL, 2e-8)
        w = 1.03 * IDEAL.omega0
        assert lm.input_impedance(link, 7.0, w) == pytest.approx(
            lm.output_impedance(link, 7.0, w), rel=1e-14
        )


class TestReflectionAndGain:
    def test_matched_lone_resonator_has_no_reflection(self):
        link = lm.Link(IDEAL, IDEAL, 0.0)
        assert lm.reflection_mag_sq(link, IDEAL.r, 5.0, IDEAL.omega0) < 1e-24

    def test_at_resonance_reduction(self):
        rl = 5.0
        link = lm.Link(IDEAL, IDEAL, 2.4e-8)
        w0 = IDEAL.omega0
        w_m = w0 * link.m12
        r, rsum = IDEAL.r, IDEAL.r + rl
        want = ((r * r - rl * rl + w_m * w_m) / (rsum * rsum + w_m * w_m)) ** 2
        assert lm.reflection_mag_sq(link, rl, rl, w0) == pytest.approx(want, rel=1e-12)
        assert lm.reflection_mag_sq_closed_form(link, rl, w0) == pytest.approx(want, rel=1e-12)

    def test_reflection_at_solved_mode(self):
        rl = 5.0
        link = lm.Link(IDEAL, IDEAL, 3e-8)
        modes = lm.mode_frequencies(link, rl)
        want = (IDEAL.r / (IDEAL.r + rl)) ** 2
        for f in (modes.f_even, modes.f_odd):
            got = lm.reflection_mag_sq(link, rl, rl, 2 * math.pi * f)
            assert got == pytest.approx(want, abs=1e-9)

    def test_power_gain_trivial_cases(self):
        assert lm.power_gain(lm.Link(IDEAL, IDEAL, 0.0), 5.0, IDEAL.omega0) == 0.0
        lossless = lm.Resonator(1e-9, 0.59e-6, 30.85e-12)
        link = lm.Link(lossless, lossless, 3e-8)
        assert lm.power_gain(link, 5.0, lossless.omega0) > 1.0 - 1e-4

    def test_power_gain_midband_oracle(self):
        w = 1.02 * IDEAL.omega0
        rl = 7.0
        link = lm.Link(IDEAL, IDEAL, 2.5e-8)
        w_m = w * link.m12
        z2 = IDEAL.r + rl + 1j * IDEAL.reactance(w)
        zin = IDEAL.r + 1j * IDEAL.reactance(w) + w_m**2 / z2
        oracle = w_m**2 * rl / (abs(z2) ** 2 * zin.real)
        assert lm.power_gain(link, rl, w) == pytest.approx(oracle, rel=1e-13)


class TestTotalEfficiency:
    def test_uncoupled_is_zero(self):
        link = lm.Link(IDEAL, IDEAL, 0.0)
        assert lm.total_efficiency(link, 5.0, 5.0, IDEAL.omega0) == 0.0

    def test_critical_coupling_value(self):
        rl = 5.0
        w0 = IDEAL.omega0
        link = lm.Link(IDEAL, IDEAL, (IDEAL.r + rl) / w0)
        want = (rl / (IDEAL.r + rl)) ** 2
        assert lm.total_efficiency(link, rl, rl, w0) == pytest.approx(want, rel=1e-12)

    def test_strong_coupling_mode_value(self):
        rl = 5.0
        link = lm.Link(IDEAL, IDEAL, 3e-8)
        modes = lm.mode_frequencies(link, rl)
        got = lm.total_efficiency(link, rl, rl, 2 * math.pi * modes.f_odd)
        assert got == pytest.approx((5.0 / 5.2) ** 2, abs=1e-9)
        assert got == pytest.approx(0.9246, abs=1e-4)

    def test_generic_equals_closed_form(self):
        rng = random.Random(202)
        for _ in range(200):
            link = random_identical_link(rng)
            r = link.res1.r
            rl = r * 10 ** rng.uniform(-2, 3)
            w = link.res1.omega0 * rng.uniform(0.5, 2.0)
            generic = lm.total_efficiency(link, rl, rl, w)
            closed = lm.total_efficiency_closed_form(link, rl, w)
            assert generic == pytest.approx(closed, rel=1e-12, abs=1e-300)

    def test_closed_form_requires_identical_loops(self):
        with pytest.raises(ModelDomainError):
            lm.total_efficiency_closed_form(STOCK, 5.0, 2 * math.pi * 38e6)


class TestEfficiencyAtResonance:
    def test_critical_identity(self):
        rl = 5.0
        w0 = IDEAL.omega0
        link = lm.Link(IDEAL, IDEAL, (IDEAL.r + rl) / w0)
        assert lm.efficiency_at_resonance(link, rl) == pytest.approx(
            (rl / (IDEAL.r + rl)) ** 2, rel=1e-14
        )

    def test_overcoupled_limit_vanishes(self):
        rl = 5.0
        big = lm.Link(IDEAL, IDEAL, 0.9 * IDEAL.l)
        small = lm.Link(IDEAL, IDEAL, 0.3 * IDEAL.l)
        assert lm.efficiency_at_resonance(big, rl) < lm.efficiency_at_resonance(small, rl)
        assert lm.efficiency_at_resonance(big, rl) < 0.01

    def test_peak_sits_at_critical_coupling(self):
        # Brute-force grid over m12: the maximum must land where
        # w0*m12 = r + rl.
        rl = 5.0
        w0 = IDEAL.omega0
        m_crit = (IDEAL.r + rl) / w0
        grid = [m_crit * x for x in [0.2 + 0.01 * i for i in range(300)]]
        etas = [lm.efficiency_at_resonance(lm.Link(IDEAL, IDEAL, m), rl) for m in grid]
        best = grid[max(range(len(grid)), key=etas.__getitem__)]
        assert best == pytest.approx(m_crit, rel=0.011)


class TestClassification:
    def test_uncoupled_is_weak(self):
        regime = lm.classify_coupling(lm.Link(IDEAL, IDEAL, 0.0), 5.0, IDEAL.omega0)
        assert regime.tag == lm.WEAK
        assert regime.margin < 0

    def test_exact_critical(self):
        rl = 5.0
        w0 = IDEAL.omega0
        link = lm.Link(IDEAL, IDEAL, (IDEAL.r + rl) / w0)
        assert lm.classify_coupling(link, rl, w0).tag == lm.CRITICAL

    def test_stock_loops_strong_at_30nH(self):
        link = lm.Link(LOOP1, LOOP2, 30e-9)
        regime = lm.classify_coupling(link, 5.0, 2 * math.pi * 37.3e6)
        assert regime.tag == lm.STRONG

    def test_conjugate_match_is_always_weak(self):
        rng = random.Random(7)
        for _ in range(300):
            link = random_identical_link(rng, k_hi=0.3)
            r = link.res1.r
            w0 = link.res1.omega0
            w_m = w0 * link.m12
            rl = math.sqrt(r * r + w_m * w_m)  # rl^2 - r^2 = (w m)^2
            assert lm.classify_coupling(link, rl, w0).tag == lm.WEAK


class TestModes:
    def test_critical_coupling_collapses_to_w0(self):
        rl = 5.0
        w0 = IDEAL.omega0
        link = lm.Link(IDEAL, IDEAL, (IDEAL.r + rl) / w0)
        modes = lm.mode_frequencies(link, rl)
        f0 = w0 / (2 * math.pi)
        assert modes.f_even == pytest.approx(f0, rel=1e-9)
        assert modes.f_odd == pytest.approx(f0, rel=1e-9)

    def test_weak_coupling_returns_none(self):
        assert lm.mode_frequencies(lm.Link(IDEAL, IDEAL, 1e-9), 5.0) is None

    def test_split_against_high_precision_oracle(self):
        rl = 5.0
        link = lm.Link(IDEAL, IDEAL, 30e-9)
        modes = lm.mode_frequencies(link, rl)
        f_hi, f_lo = mode_frequencies_oracle(link, rl)
        assert modes.f_even == pytest.approx(f_hi, rel=1e-12)
        assert modes.f_odd == pytest.approx(f_lo, rel=1e-12)
        assert 1.2e6 < modes.f_even - modes.f_odd < 1.35e6
        assert (modes.f_even - modes.f_odd) == pytest.approx(1.27946e6, rel=1e-4)
        assert modes.f_even > modes.f_odd

    def test_random_links_against_oracle(self):
        rng = random.Random(31)
        checked = 0
        while checked < 50:
            link = random_identical_link(rng, q_lo=50, k_lo=1e-3, k_hi=0.3)
            rl = link.res1.r * 10 ** rng.uniform(0, 2)
            oracle = mode_frequencies_oracle(link, rl)
            modes = lm.mode_frequencies(link, rl)
            if modes is None or oracle is None:
                continue
            assert modes.f_even == pytest.approx(oracle[0], rel=1e-10)
            assert modes.f_odd == pytest.approx(oracle[1], rel=1e-10)
            checked += 1

    def test_requires_identical_loops(self):
        with pytest.raises(ModelDomainError):
            lm.mode_frequencies(STOCK, 5.0)

    def test_split_approx_zero_at_critical(self):
        rl = 5.0
        w0 = IDEAL.omega0
        link = lm.Link(IDEAL, IDEAL, (IDEAL.r + rl) / w0)
        assert lm.mode_split_approx(link, rl) == pytest.approx(0.0, abs=1.0)

    def test_split_approx_raises_when_weak(self):
        with pytest.raises(WeakCouplingError):
            lm.mode_split_approx(lm.Link(IDEAL, IDEAL, 1e-9), 5.0)

    def test_split_approx_within_one_percent(self):
        rl = 5.0
        link = lm.Link(IDEAL, IDEAL, 30e-9)
        modes = lm.mode_frequencies(link, rl)
        exact = 2 * math.pi * (modes.f_even - modes.f_odd)
        approx = lm.mode_split_approx(link, rl)
        assert approx == pytest.approx(exact, rel=0.01)

    def test_efficiency_is_stationary_at_modes(self):
        # The operating-point optimality behind frequency tuning: d(eta)/dw
        # vanishes at the solved split modes.  Moderate Q keeps the central
        # finite difference truncation below the assertion threshold.
        rng = random.Random(99)
        for _ in range(50):
            link = random_identical_link(rng, q_lo=20, q_hi=100, k_lo=0.02, k_hi=0.3)
            r = link.res1.r
            rl = r * 10 ** rng.uniform(0.5, 1.5)
            modes = lm.mode_frequencies(link, rl)
            if modes is None:
                continue
            for f in (modes.f_even, modes.f_odd):
                w = 2 * math.pi * f
                h = 1e-6 * w
                d_eta = (
                    lm.total_efficiency(link, rl, rl, w + h)
                    - lm.total_efficiency(link, rl, rl, w - h)
                ) / (2 * h)
                scale = lm.total_efficiency(link, rl, rl, w) / w
                assert abs(d_eta) < 1e-6 * scale


class TestCurrentRatio:
    def test_quadrature_at_resonance(self):
        rl = 5.0
        link = lm.Link(IDEAL, IDEAL, 3e-8)
        w0 = IDEAL.omega0
        ratio = lm.current_ratio(link, rl, w0)
        want = -1j * w0 * link.m12 / (IDEAL.r + rl)
        assert ratio == pytest.approx(want, rel=1e-12)
        assert cmath.phase(ratio) == pytest.approx(-math.pi / 2, abs=1e-12)

    def test_unit_magnitude_at_modes(self):
        rl = 5.0
        link = lm.Link(IDEAL, IDEAL, 3e-8)
        modes = lm.mode_frequencies(link, rl)
        for f in (modes.f_even, modes.f_odd):
            assert abs(lm.current_ratio(link, rl, 2 * math.pi * f)) == pytest.approx(
                1.0, abs=1e-12
            )

    def test_mode_phases_follow_small_angle_law(self):
        # Relative phase offsets from the in/anti-phase axes are
        # arcsin((r+rl)/(w m12)): within O(a^3) of the small-angle value.
        rl = 5.0
        link = lm.Link(IDEAL, IDEAL, 3e-8)
        modes = lm.mode_frequencies(link, rl)
        w_even = 2 * math.pi * modes.f_even
        w_odd = 2 * math.pi * modes.f_odd
        a_even = (IDEAL.r + rl) / (w_even * link.m12)
        a_odd = (IDEAL.r + rl) / (w_odd * link.m12)
        phase_even = cmath.phase(lm.current_ratio(link, rl, w_even))
        phase_odd = cmath.phase(lm.current_ratio(link, rl, w_odd))
        assert phase_even == pytest.approx(-math.pi + math.asin(a_even), abs=1e-9)
        assert phase_odd == pytest.approx(-math.asin(a_odd), abs=1e-9)
        assert abs((phase_even + math.pi) - a_even) < a_even**3
        assert abs(-phase_odd - a_odd) < a_odd**3


class TestOptima:
    def test_strong_coupling_constants(self):
        assert lm.strong_coupling_constants(1.0, 1.0) == (0.25, 0.25)
        gamma_sq, eta = lm.strong_coupling_constants(1e-12, 1.0)
        assert gamma_sq == pytest.approx(0.0, abs=1e-12)
        assert eta == pytest.approx(1.0, abs=1e-9)

    def test_plateau_matches_published_equivalent_load(self):
        # Back-solved loop-plane equivalent load for the 20 cm network.
        _, eta = lm.strong_coupling_constants(0.215, 1.7557)
        assert eta == pytest.approx(0.7937, abs=5e-5)

    def test_optimal_terminations_uncoupled(self):
        link = lm.Link(LOOP1, LOOP2, 0.0)
        w0 = LOOP1.omega0
        t = lm.optimal_terminations(link, w0)
        assert t.zs == pytest.approx(LOOP1.r + 1j * -LOOP1.reactance(w0), rel=1e-9)
        x2 = LOOP2.reactance(w0)
        assert t.zl == pytest.approx(LOOP2.r - 1j * x2, rel=1e-9)

    def test_optimal_terminations_identical_at_resonance(self):
        link = lm.Link(IDEAL, IDEAL, 17.5e-9)
        w0 = IDEAL.omega0
        t = lm.optimal_terminations(link, w0)
        r_ls = math.sqrt(IDEAL.r**2 + (w0 * link.m12) ** 2)
        assert t.zs == pytest.approx(t.zl, rel=1e-12)
        assert t.zs.imag == pytest.approx(0.0, abs=1e-9)
        assert t.zs.real == pytest.approx(r_ls, rel=1e-12)
        assert t.zs.real == pytest.approx(4.1, abs=0.02)

    def test_max_efficiency_trivial_cases(self):
        assert lm.max_efficiency(lm.Link(IDEAL, IDEAL, 0.0), IDEAL.omega0) == 0.0
        w0 = IDEAL.omega0
        link = lm.Link(IDEAL, IDEAL, IDEAL.r / w0)  # w0*m12 = r
        want = (1.0 / (1.0 + math.sqrt(2.0))) ** 2
        assert lm.max_efficiency(link, w0) == pytest.approx(want, rel=1e-12)
        assert lm.max_efficiency(link, w0) == pytest.approx(0.17157, abs=1e-5)

    def test_max_efficiency_identical_form(self):
        link = lm.Link(IDEAL, IDEAL, 3e-8)
        w0 = IDEAL.omega0
        w_m = w0 * link.m12
        r = IDEAL.r
        want = (w_m / (r + math.sqrt(r * r + w_m * w_m))) ** 2
        assert lm.max_efficiency(link, w0) == pytest.approx(want, rel=1e-14)

    def test_max_efficiency_is_available_gain(self):
        # |s21|^2 under the optimal terminations must reproduce the formula.
        from wptlink import twoport as tp

        for m12 in (5e-9, 17.5e-9, 6e-8):
            link = lm.Link(LOOP1, LOOP2, m12)
            for w in (2 * math.pi * 36e6, 2 * math.pi * 38e6, 2 * math.pi * 40e6):
                t = lm.optimal_terminations(link, w)
                zin = lm.input_impedance(link, t.zl, w)
                assert zin == pytest.approx(t.zs.conjugate(), rel=1e-9)
                zout = lm.output_impedance(link, t.zs, w)
                assert zout == pytest.approx(t.zl.conjugate(), rel=1e-9)
                gain = lm.total_efficiency(link, t.zs, t.zl, w)
                assert gain == pytest.approx(lm.max_efficiency(link, w), abs=1e-9)

    def test_max_efficiency_dominates_real_terminations(self):
        import numpy as np

        rng = random.Random(4)
        for _ in range(5):
            link = random_identical_link(rng, q_lo=100, q_hi=1000, k_lo=0.005, k_hi=0.08)
            r = link.res1.r
            w0 = link.res1.omega0
            rls = np.geomspace(0.01 * r, 1e3 * r, 60)
            ws = np.linspace(0.9 * w0, 1.1 * w0, 60)
            eta = lm.total_efficiency_closed_form(link, rls[:, None], ws[None, :])
            bound = lm.max_efficiency(link, ws[None, :])
            assert float((eta - bound).max()) <= 1e-9
