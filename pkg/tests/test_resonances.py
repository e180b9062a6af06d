import cmath
import math

import numpy as np
import pytest

from lassograph.core import LassoParams, delta_denominator
from lassograph.errors import ConvergenceError
from lassograph.resonances import (
    Pole,
    SweepSpec,
    crossing_points,
    find_pole,
    pole_function,
    poles_alpha_zero,
    poles_ideal,
    trace_trajectory,
)

PI = math.pi
LN3 = math.log(3.0)


def ideal(Phi, L=1.0):
    return LassoParams(L=L, Phi=Phi, alpha=0.0)


class TestPoleFunction:
    def test_matches_delta_denominator(self):
        p = LassoParams(L=1.3, Phi=0.8, alpha=-0.6)
        f, _ = pole_function(p)
        for k in (0.7 - 0.2j, 3.1 - 1.0j, 2.0):
            assert f(k) == pytest.approx(-delta_denominator(p, k))

    def test_derivative_consistent(self):
        p = LassoParams(L=1.0, Phi=0.4, alpha=0.9, mu=0.2, omega=1.3)
        f, df = pole_function(p)
        k = 1.7 - 0.5j
        h = 1e-6
        numeric = (f(k + h) - f(k - h)) / (2 * h)
        assert df(k) == pytest.approx(numeric, rel=1e-7)


class TestClosedFormPoles:
    def test_zero_flux_structure(self):
        poles = poles_alpha_zero(ideal(0.0), (5.0, 7.0))
        assert len(poles) == 2
        embedded = [q for q in poles if q.kind == "embedded-eigenvalue"]
        resonances = [q for q in poles if q.kind == "resonance"]
        assert len(embedded) == 1 and len(resonances) == 1
        assert embedded[0].k == pytest.approx(2 * PI)
        assert resonances[0].k == pytest.approx(2 * PI - 1j * LN3)

    def test_small_flux_vertical_pair(self):
        c = math.cos(0.3)
        root = math.sqrt(4 * c * c - 3)
        etas = sorted(-q.k.imag for q in poles_alpha_zero(ideal(0.3), (5.0, 7.0)))
        assert etas == pytest.approx([math.log(2 * c - root), math.log(2 * c + root)])

    def test_quarter_flux_horizontal(self):
        poles = poles_alpha_zero(ideal(PI / 2), (1.0, 2.0))
        assert len(poles) == 1
        assert poles[0].k == pytest.approx(PI / 2 - 0.5j * LN3, abs=1e-12)

    def test_substitution_check_quarter_flux(self):
        # tanh(eta) = 1/2 solves -2 cos k = -i sin k at k = pi/2 - i eta.
        k = PI / 2 - 0.5j * LN3
        assert 2 * (0.0 - cmath.cos(k)) == pytest.approx(-1j * cmath.sin(k), abs=1e-12)

    def test_all_poles_lower_halfplane(self):
        for Phi in np.linspace(0, 2 * PI, 17):
            for q in poles_alpha_zero(ideal(float(Phi)), (0.0, 12.0)):
                assert q.k.imag <= 1e-12

    def test_flux_symmetry(self):
        a = poles_alpha_zero(ideal(0.7), (0.0, 10.0))
        b = poles_alpha_zero(ideal(-0.7), (0.0, 10.0))
        c = poles_alpha_zero(ideal(0.7 + 2 * PI), (0.0, 10.0))
        for x, y in zip(a, b):
            assert x.k == pytest.approx(y.k)
        for x, y in zip(a, c):
            assert x.k == pytest.approx(y.k)

    def test_general_omega_horizontal_height(self):
        for omega in (0.7, 1.0, 1.3):
            p = LassoParams(L=1.0, Phi=PI / 2, alpha=0.0, omega=omega)
            poles = poles_ideal(p, (0.5, 2.5))
            w2 = omega * omega
            eta = 0.5 * math.log((2 + w2) / (2 - w2))
            assert all(q.k.imag == pytest.approx(-eta, abs=1e-12) for q in poles)

    def test_large_omega_vertical_only(self):
        p = LassoParams(L=1.0, Phi=PI / 2, alpha=0.0, omega=1.6)
        poles = poles_ideal(p, (0.5, 7.0))
        assert poles, "strong coupling still has lattice poles"
        for q in poles:
            n = round(q.k.real / PI)
            assert q.k.real == pytest.approx(n * PI, abs=1e-12)

    def test_delta_specialization_matches_ideal(self):
        a = poles_alpha_zero(ideal(1.2), (0.0, 9.0))
        b = poles_ideal(LassoParams(L=1.0, Phi=1.2, alpha=0.0, omega=1.0), (0.0, 9.0))
        assert len(a) == len(b)
        for x, y in zip(a, b):
            assert x.k == pytest.approx(y.k, abs=1e-10)


class TestFindPole:
    def test_matches_closed_form_small_flux(self):
        p = ideal(0.3)
        c = math.cos(0.3)
        eta = math.log(2 * c - math.sqrt(4 * c * c - 3))
        found = find_pole(p, 6.2 - 0.1j)
        assert found.k == pytest.approx(2 * PI - 1j * eta, abs=1e-10)

    def test_embedded_at_half_integer_flux(self):
        found = find_pole(ideal(PI), PI - 0.05j)
        assert found.kind == "embedded-eigenvalue"
        assert found.k == pytest.approx(PI, abs=1e-10)
        assert abs(delta_denominator(ideal(PI), found.k)) < 1e-10

    def test_embedded_numerator_vanishes_too(self):
        # At an embedded pole both numerator and denominator of the on-shell
        # amplitude vanish.
        p = ideal(0.0)
        found = find_pole(p, 2 * PI - 0.03j)
        k = found.k
        num = (p.alpha + 1j * k) * cmath.sin(k * p.L) - 2 * k * (
            math.cos(p.Phi) - cmath.cos(k * p.L)
        )
        assert abs(num) < 1e-9
        assert abs(delta_denominator(p, k)) < 1e-9

    def test_real_form_residual(self):
        # Converged pole satisfies the real-form condition
        # coth(eta L) = 2 + alpha (2 eta - kappa cot(kappa L)) / (eta(eta-alpha) + kappa^2).
        p = LassoParams(L=1.0, Phi=PI / 2, alpha=0.1)
        found = find_pole(p, 1.5 - 0.5j)
        kappa, eta = found.k.real, -found.k.imag
        lhs = 1.0 / math.tanh(eta * p.L)
        rhs = 2.0 + p.alpha * (2 * eta - kappa / math.tan(kappa * p.L)) / (
            eta * (eta - p.alpha) + kappa * kappa
        )
        assert lhs == pytest.approx(rhs, abs=1e-10)

    def test_lattice_agreement_sweep(self):
        # Closed form vs finder over a lattice of seeds and a flux grid.
        for Phi in np.linspace(0.05, PI - 0.05, 12):
            p = ideal(float(Phi))
            for q in poles_alpha_zero(p, (0.5, 10.0)):
                found = find_pole(p, q.k - 0.01j if q.k.imag == 0 else q.k * (1 + 1e-4))
                assert abs(found.k - q.k) < 1e-10

    def test_general_coupling_pole(self):
        p = LassoParams(L=1.0, Phi=0.4, alpha=0.3, mu=0.1, omega=1.2)
        found = find_pole(p, 3.0 - 0.6j)
        assert found.k.imag < 0
        f, _ = pole_function(p)
        assert abs(f(found.k)) < 1e-9

    def test_rejects_unreachable_guess(self):
        with pytest.raises(ConvergenceError):
            find_pole(ideal(0.3), 1e6 + 0j, max_iter=5)


class TestTrajectories:
    def test_vertical_then_horizontal(self):
        # Ideal junction, sweep flux 0 -> pi/2 from the deep pole at 2pi - i ln 3:
        # vertical until pi/6, then along Im k = -ln(3)/2.
        p = ideal(0.0)
        seed = Pole(k=2 * PI - 1j * LN3, kind="resonance", residual=0.0)
        sweep = SweepSpec(param="flux", start=0.0, stop=PI / 2, max_step=0.12, initial_steps=150)
        traj = trace_trajectory(p, sweep, seed, branch_id=0)
        assert traj.crossings, "the pi/6 collision must be recorded"
        t_star, k_star = traj.crossings[0]
        assert t_star == pytest.approx(PI / 6, abs=1e-6)
        assert abs(k_star - (2 * PI - 0.5j * LN3)) < 1e-4
        for t, q in traj.samples:
            if t < PI / 6 - 1e-3:
                assert q.k.real == pytest.approx(2 * PI, abs=1e-8)
            elif t > PI / 6 + 1e-2:
                assert q.k.imag == pytest.approx(-0.5 * LN3, abs=1e-8)

    def test_two_branches_separate(self):
        p = ideal(0.0)
        sweep = SweepSpec(param="flux", start=0.0, stop=PI / 2, max_step=0.12, initial_steps=150)
        lo = trace_trajectory(p, sweep, Pole(2 * PI - 1j * LN3, "resonance", 0.0), branch_id=0)
        hi = trace_trajectory(p, sweep, Pole(2 * PI + 0j, "embedded-eigenvalue", 0.0), branch_id=1)
        k_lo = lo.samples[-1][1].k
        k_hi = hi.samples[-1][1].k
        # Both end on the horizontal line, on opposite sides of 2 pi.
        assert k_lo.imag == pytest.approx(-0.5 * LN3, abs=1e-8)
        assert k_hi.imag == pytest.approx(-0.5 * LN3, abs=1e-8)
        assert (k_lo.real - 2 * PI) * (k_hi.real - 2 * PI) < 0

    def test_embedded_branch_dips_and_returns(self):
        # Embedded pole at 2pi for Phi = 0 moves off axis and comes back at Phi = pi.
        p = ideal(0.0)
        sweep = SweepSpec(param="flux", start=0.0, stop=PI, max_step=0.12, initial_steps=200)
        traj = trace_trajectory(p, sweep, Pole(2 * PI + 0j, "embedded-eigenvalue", 0.0))
        mids = [q.k.imag for t, q in traj.samples if 0.5 < t < PI - 0.5]
        assert max(mids) < 0
        assert traj.samples[-1][1].k.imag == pytest.approx(0.0, abs=1e-8)

    def test_alpha_families_approach_ideal(self):
        # Smaller alpha hugs the closed-form ideal trajectory more closely,
        # swept inside the horizontal-regime window.
        sweep = SweepSpec(param="flux", start=1.0, stop=2.0, max_step=0.15, initial_steps=60)
        devs = {}
        for alpha in (0.5, 0.1, 0.05):
            p = LassoParams(L=1.0, Phi=1.0, alpha=alpha)
            start = find_pole(p, 0.9 - 0.55j)
            traj = trace_trajectory(p, sweep, start)
            dev = 0.0
            for t, q in traj.samples:
                ref = poles_ideal(LassoParams(L=1.0, Phi=float(t), alpha=0.0), (0.0, PI))
                dev = max(dev, min(abs(q.k - r.k) for r in ref))
            devs[alpha] = dev
        assert devs[0.5] > devs[0.1] > devs[0.05]

    def test_crossing_points_helper(self):
        pts = crossing_points(ideal(0.0), (0.0, 10.0))
        assert complex(2 * PI, -0.5 * LN3) in [
            complex(round(z.real, 9), round(z.imag, 9)) for z in pts
        ] or any(abs(z - (2 * PI - 0.5j * LN3)) < 1e-12 for z in pts)
