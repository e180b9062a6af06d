import cmath
import math

import numpy as np
import pytest

from lassograph.core import (
    DECOUPLED,
    LassoParams,
    decoupled_kernel,
    delta_denominator,
    expected_negative_count,
    krein_coefficients,
    negative_bound_states,
    negative_eigenvalue_residual,
    phase_shift,
    positive_bound_states,
    reflection,
    resolvent_kernel,
)
from lassograph.errors import ResolventPoleError, SingularMomentumError

PI = math.pi


def delta_params(L=1.0, Phi=0.0, alpha=0.0):
    return LassoParams(L=L, Phi=Phi, alpha=alpha)


class TestParams:
    def test_derived_quantities(self):
        p = LassoParams(L=2.0, Phi=1.0, alpha=0.5)
        assert p.A == 0.5
        assert p.R == pytest.approx(1.0 / PI)
        assert p.B == pytest.approx(2 * p.A / p.R)
        assert p.is_delta

    def test_flux_quanta_constructor(self):
        p = LassoParams.from_flux_quanta(L=1.0, phi=0.5, alpha=0.0)
        assert p.Phi == pytest.approx(PI)

    def test_validation(self):
        with pytest.raises(ValueError):
            LassoParams(L=0.0, Phi=0.0, alpha=0.0)
        with pytest.raises(ValueError):
            LassoParams(L=1.0, Phi=math.nan, alpha=0.0)
        with pytest.raises(ValueError):
            LassoParams(L=1.0, Phi=0.0, alpha=0.0, mu=math.inf)

    def test_decoupled_sentinel(self):
        p = LassoParams(L=1.0, Phi=0.0, alpha=DECOUPLED)
        assert p.is_decoupled


class TestDeltaDenominator:
    def test_direct_substitution_phi_zero(self):
        # (L=1, Phi=0, alpha=0, k=pi): -2*pi*(1 - (-1)) = -4*pi
        p = delta_params()
        assert delta_denominator(p, PI) == pytest.approx(-4 * PI)

    def test_direct_substitution_quarter_flux(self):
        # (L=1, Phi=pi/2, alpha=0, k=pi/2): (-i pi/2)*1 - pi*(0 - 0)
        p = delta_params(Phi=PI / 2)
        val = delta_denominator(p, PI / 2)
        assert val == pytest.approx(-1j * PI / 2)

    def test_zero_momentum(self):
        p = delta_params(Phi=0.7, alpha=1.3)
        assert delta_denominator(p, 0.0) == 0.0

    def test_entire_in_k(self):
        p = delta_params(Phi=0.4, alpha=-2.0)
        val = delta_denominator(p, 1.0 - 2.0j)
        assert np.isfinite(val.real) and np.isfinite(val.imag)


class TestReflection:
    def test_known_value_quarter_period(self):
        # (L=1, Phi=0, alpha=0, k=pi/2): r = (i-2)/(i+2) = (-3+4i)/5
        r = reflection(delta_params(), PI / 2)
        assert r == pytest.approx((-3 + 4j) / 5)

    def test_total_reflection_at_loop_node(self):
        # sin kL = 0 with cos Phi != cos kL: the loop decouples, r = -1.
        r = reflection(delta_params(), PI)
        assert r == pytest.approx(-1.0)

    def test_removable_singularity_limit(self):
        # sin kL = 0 with cos Phi = cos kL: limit gives -(alpha+ik)/(alpha-ik) = +1.
        r = reflection(delta_params(), 2 * PI)
        assert r == pytest.approx(1.0)

    def test_quarter_flux_value(self):
        r = reflection(delta_params(Phi=PI / 2), PI / 2)
        assert r == pytest.approx(1.0)

    def test_removable_limit_with_alpha(self):
        p = delta_params(alpha=1.5)
        r = reflection(p, 2 * PI)
        k = 2 * PI
        assert r == pytest.approx(-(p.alpha + 1j * k) / (p.alpha - 1j * k))

    def test_rejects_bad_momentum(self):
        p = delta_params()
        with pytest.raises(ValueError):
            reflection(p, 0.0)
        with pytest.raises(ValueError):
            reflection(p, -1.0)
        with pytest.raises(ValueError):
            reflection(p, 1.0 + 0.5j)

    def test_decoupled_limit(self):
        p = LassoParams(L=1.0, Phi=0.3, alpha=DECOUPLED, mu=0.4)
        k = 1.7
        assert reflection(p, k) == pytest.approx(-(1 + 1j * k * p.mu) / (1 - 1j * k * p.mu))

    def test_unitarity_randomized(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            L = rng.uniform(0.5, 2.0)
            p = LassoParams(
                L=L,
                Phi=rng.uniform(-2 * PI, 2 * PI),
                alpha=rng.uniform(-5, 5),
                mu=rng.uniform(-1, 1),
                omega=rng.uniform(0.2, 2.0),
            )
            k = rng.uniform(0.05, 15.0)
            if abs(math.sin(k * L)) < 1e-8:
                continue
            assert abs(abs(reflection(p, k)) - 1.0) < 1e-12

    def test_flux_parity_and_periodicity(self):
        rng = np.random.default_rng(11)
        for _ in range(50):
            p = LassoParams(
                L=rng.uniform(0.5, 2.0),
                Phi=rng.uniform(-6, 6),
                alpha=rng.uniform(-3, 3),
                mu=rng.uniform(-0.5, 0.5),
                omega=rng.uniform(0.3, 1.8),
            )
            k = rng.uniform(0.2, 10.0)
            r = reflection(p, k)
            p_neg = LassoParams(L=p.L, Phi=-p.Phi, alpha=p.alpha, mu=p.mu, omega=p.omega)
            p_per = LassoParams(L=p.L, Phi=p.Phi + 2 * PI, alpha=p.alpha, mu=p.mu, omega=p.omega)
            assert r == pytest.approx(reflection(p_neg, k), abs=1e-12)
            assert r == pytest.approx(reflection(p_per, k), abs=1e-12)
            # Unimodularity makes conj(r) the inverse amplitude.
            assert r.conjugate() * r == pytest.approx(1.0, abs=1e-12)

    def test_general_coupling_reduces_to_delta(self):
        pd = delta_params(Phi=0.9, alpha=1.1)
        pg = LassoParams(L=1.0, Phi=0.9, alpha=1.1, mu=0.0, omega=1.0)
        for k in (0.3, 1.7, 5.2):
            assert reflection(pd, k) == pytest.approx(reflection(pg, k))


class TestPhaseShift:
    def test_quarter_flux_node(self):
        # delta rises continuously to pi at k = pi/2 for Phi = pi/2.
        p = delta_params(Phi=PI / 2)
        grid = np.linspace(0.1, PI / 2, 200)
        d = phase_shift(p, grid)
        assert d[0] >= 0.0 and d[0] < PI
        assert d[-1] == pytest.approx(PI, abs=1e-9)

    def test_consistency_with_reflection(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            p = LassoParams(
                L=rng.uniform(0.5, 1.5),
                Phi=rng.uniform(0, 2 * PI),
                alpha=rng.uniform(-2, 2),
                mu=rng.uniform(-0.5, 0.5),
                omega=rng.uniform(0.5, 1.5),
            )
            grid = np.linspace(0.2, 9.0, 400)
            d = phase_shift(p, grid)
            for k, dk in zip(grid[::37], d[::37]):
                assert cmath.exp(2j * dk) == pytest.approx(reflection(p, float(k)), abs=1e-10)

    def test_resonance_step_width(self):
        # Narrow pole at k = 2*pi with width eta: delta gains about pi across
        # a 4*eta window centred there.
        p = delta_params(Phi=0.3)
        c = math.cos(0.3)
        eta = math.log(2 * c - math.sqrt(4 * c * c - 3))
        grid = np.linspace(2 * PI - 2 * eta, 2 * PI + 2 * eta, 400)
        d = phase_shift(p, grid)
        gain = d[-1] - d[0]
        assert 0.5 * PI < gain < 1.5 * PI

    def test_grid_validation(self):
        p = delta_params()
        with pytest.raises(ValueError):
            phase_shift(p, [2.0, 1.0])
        with pytest.raises(ValueError):
            phase_shift(p, [-1.0, 1.0])
        with pytest.raises(ValueError):
            phase_shift(p, [])


class TestPositiveBoundStates:
    def test_integer_flux_even_modes(self):
        states = positive_bound_states(delta_params(Phi=0.0), 5)
        assert [s.n for s in states] == [2, 4]
        assert [s.energy for s in states] == pytest.approx([(2 * PI) ** 2, (4 * PI) ** 2])

    def test_half_integer_flux_odd_modes(self):
        states = positive_bound_states(delta_params(Phi=PI), 5)
        assert [s.n for s in states] == [1, 3, 5]
        assert [s.energy for s in states] == pytest.approx([PI**2, 9 * PI**2, 25 * PI**2])

    def test_generic_flux_empty(self):
        assert positive_bound_states(delta_params(Phi=0.3), 10) == []

    def test_rejects_zero_omega(self):
        p = LassoParams(L=1.0, Phi=0.0, alpha=0.0, omega=0.0)
        with pytest.raises(ValueError):
            positive_bound_states(p, 3)

    def test_eigenfunctions_vanish_at_junction(self):
        # sin(n pi x / L) at x = 0 and x = L.
        for n in (1, 2, 5):
            assert math.sin(0.0) == 0.0
            assert abs(math.sin(n * PI)) < 1e-12

    def test_detached_junction_keeps_all_modes(self):
        p = LassoParams(L=1.0, Phi=0.4, alpha=DECOUPLED)
        assert [s.n for s in positive_bound_states(p, 4)] == [1, 2, 3, 4]


class TestNegativeBoundStates:
    def test_no_root_for_ideal_coupling(self):
        assert negative_bound_states(delta_params()) == []

    def test_single_root_strong_attraction(self):
        states = negative_bound_states(delta_params(alpha=-5.0))
        assert len(states) == 1
        kappa = states[0].kappa
        assert 1.98 < kappa < 1.99
        assert states[0].energy == pytest.approx(-(kappa**2))
        assert abs(negative_eigenvalue_residual(delta_params(alpha=-5.0), kappa)) < 1e-10

    def test_threshold_root_tiny_kappa(self):
        states = negative_bound_states(delta_params(alpha=-1e-9))
        assert len(states) == 1
        assert 0 < states[0].kappa < 1e-4

    def test_negative_mu_adds_root(self):
        p = LassoParams(L=1.0, Phi=0.0, alpha=1.0, mu=-0.5)
        states = negative_bound_states(p)
        assert len(states) == 1

    def test_count_classification_randomized(self):
        rng = np.random.default_rng(19)
        checked = 0
        while checked < 60:
            p = LassoParams(
                L=rng.uniform(0.5, 2.0),
                Phi=rng.uniform(0, 2 * PI),
                alpha=rng.uniform(-8, 8),
                mu=rng.uniform(-1.5, 1.5),
                omega=rng.uniform(0.3, 2.0),
            )
            threshold = (2.0 / p.L) * (math.cos(p.Phi) - 1.0)
            if abs(p.alpha - threshold) < 1e-3 or abs(p.mu) < 1e-3:
                continue
            states = negative_bound_states(p)
            assert len(states) == expected_negative_count(p)
            for s in states:
                assert abs(negative_eigenvalue_residual(p, s.kappa)) < 1e-8
            checked += 1


class TestKreinCoefficients:
    def test_delta_coupling_entries_equal(self):
        p = delta_params(Phi=0.7, alpha=0.2)
        lam, d = krein_coefficients(p, 1.3 - 0.4j)
        for entry in lam.flat:
            assert entry == pytest.approx(-1.0 / d)

    def test_denominator_matches_delta_denominator(self):
        p = delta_params(Phi=0.7, alpha=0.2)
        k = 1.3 - 0.4j
        _, d = krein_coefficients(p, k)
        s = cmath.sin(k * p.L)
        assert d * s == pytest.approx(-delta_denominator(p, k))

    def test_symmetry_of_off_diagonal(self):
        p = LassoParams(L=1.3, Phi=0.5, alpha=-0.7, mu=0.4, omega=1.7)
        lam, _ = krein_coefficients(p, 2.1 - 0.2j)
        assert lam[0, 1] == lam[1, 0]

    def test_singular_momentum_error(self):
        p = delta_params()
        with pytest.raises(SingularMomentumError):
            # Make sin(kL) exactly zero by a contrived L.
            krein_coefficients(LassoParams(L=1.0, Phi=0.3, alpha=0.0), 0.0 + 0.0j)

    def test_pole_error_at_embedded_eigenvalue(self):
        # At Phi = 0 the denominator vanishes as k -> 2*pi n; approach closely.
        p = delta_params(Phi=0.0)
        with pytest.raises((ResolventPoleError, SingularMomentumError)):
            krein_coefficients(p, 2 * PI * (1 + 1e-15))


def _loop_defect(p, k, y, x, h):
    """|H G - k^2 G| at x via central differences, loop-loop entry."""
    g = lambda t: resolvent_kernel(p, k, t, y).loop_loop
    gm, g0, gp = g(x - h), g(x), g(x + h)
    second = (gp - 2 * g0 + gm) / h**2
    first = (gp - gm) / (2 * h)
    val = -second - 2j * p.A * first + p.A**2 * g0
    return abs(val - k**2 * g0)


def _lead_defect(p, k, y, x, h):
    g = lambda t: resolvent_kernel(p, k, t, y).lead_lead
    gm, g0, gp = g(x - h), g(x), g(x + h)
    return abs(-(gp - 2 * g0 + gm) / h**2 - k**2 * g0)


class TestResolventKernel:
    def test_decoupled_lead_node(self):
        p = delta_params()
        val = decoupled_kernel(p, PI, 1.0, 1.0).lead_lead
        assert val == pytest.approx(0.0, abs=1e-12)

    def test_decoupled_loop_midpoint(self):
        # Dirichlet interval Green function at x = y = 1/2, k = pi/2:
        # sin(pi/4) sin(pi/4) / ((pi/2) sin(pi/2)) = 1/pi.
        p = delta_params(Phi=1.234)
        val = decoupled_kernel(p, PI / 2, 0.5, 0.5).loop_loop
        assert val == pytest.approx(1.0 / PI)

    def test_offdiagonal_blocks_vanish_decoupled(self):
        p = delta_params(Phi=0.4)
        v = decoupled_kernel(p, 1.7, 0.3, 0.9)
        assert v.loop_lead == 0.0 and v.lead_loop == 0.0

    def test_reciprocity_with_flux_reversal(self):
        p = LassoParams(L=1.0, Phi=0.8, alpha=0.3, mu=0.2, omega=1.4)
        p_rev = LassoParams(L=1.0, Phi=-0.8, alpha=0.3, mu=0.2, omega=1.4)
        k = 1.9 + 0.3j
        for x, y in ((0.2, 0.7), (0.55, 0.13)):
            g = resolvent_kernel(p, k, x, y).block
            g_swap = resolvent_kernel(p_rev, k, y, x).block
            assert g[0, 0] == pytest.approx(g_swap[0, 0])
            assert g[0, 1] == pytest.approx(g_swap[1, 0])
            assert g[1, 1] == pytest.approx(g_swap[1, 1])

    def test_junction_boundary_conditions(self):
        # The kernel's loop factor is periodic across the junction and the
        # coupled boundary conditions tie the blocks together; spot-check the
        # loop-row continuity u(0) = u(L) in the x variable.
        p = LassoParams(L=1.0, Phi=0.6, alpha=0.4, mu=0.1, omega=1.2)
        k = 2.3 + 0.1j
        y = 0.37
        g0 = resolvent_kernel(p, k, 0.0, y).loop_loop
        gL = resolvent_kernel(p, k, 1.0, y).loop_loop
        assert g0 == pytest.approx(gL)

    @pytest.mark.parametrize("k", [1.3, 2.7 + 0.4j])
    def test_defect_second_order_loop(self, k):
        p = LassoParams(L=1.0, Phi=0.7, alpha=0.2)
        y = 0.31
        x = 0.62
        errs = [_loop_defect(p, k, y, x, h) for h in (1e-2, 5e-3, 2.5e-3)]
        orders = [math.log(errs[i] / errs[i + 1], 2.0) for i in range(2)]
        assert min(orders) >= 1.9

    def test_defect_second_order_lead(self):
        p = LassoParams(L=1.0, Phi=0.7, alpha=0.2)
        k = 1.3
        errs = [_lead_defect(p, k, 2.0, 0.9, h) for h in (1e-2, 5e-3, 2.5e-3)]
        orders = [math.log(errs[i] / errs[i + 1], 2.0) for i in range(2)]
        assert min(orders) >= 1.9

    def test_rejects_negative_coordinates(self):
        p = delta_params(Phi=0.2)
        with pytest.raises(ValueError):
            resolvent_kernel(p, 1.0, -0.1, 0.5)
