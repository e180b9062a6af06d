"""Survival amplitudes and decay laws for states prepared on the loop.

States are stored through their gauge-stripped loop profile g(x) =
exp(i A x) u(x), a flux-independent object, as combinations of three kinds of
atoms: normalized sine modes of the detached loop, winding exponentials of
the isolated ring, and sampled profiles on a uniform grid.  The survival
amplitude splits into a bound sum and an absolutely continuous integral; the
latter uses the explicit resolvent, which for loop-supported states collapses
to a one-dimensional overlap

    rho(k) = (omega^2 k / pi) |J(k)|^2 / |Dhat(k)|^2,

with J the state's overlap with the junction defect profile and Dhat the
entire rescaled resolvent denominator.  Time series are integrated panel by
panel with linear-in-energy interpolation done exactly against exp(-iEt), so
the oscillation itself costs no accuracy; the density grid's resolution does,
and is monitored by comparing against its own coarsening.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Optional, Sequence, Union

import numpy as np

from .core import (
    BoundState,
    LassoParams,
    negative_bound_states,
    positive_bound_states,
    resolvent_kernel,
)
from .errors import DecayWindowError

_SAMPLE_POINTS = 4097  # uniform closed grid for sampled atoms (power of two + 1)
_PROJECTION_CUTOFF = 1200  # sine-mode truncation where a state has slow tails


# ---------------------------------------------------------------------------
# loop states


@dataclass(frozen=True)
class _SinMode:
    m: int


@dataclass(frozen=True)
class _Winding:
    n: int


@dataclass(frozen=True)
class _Samples:
    values: tuple


_Atom = Union[_SinMode, _Winding, _Samples]


class LoopState:
    """A state supported on the loop, stored by its gauge-stripped profile.

    Atoms: ``sine_mode(L, m)`` is sqrt(2/L) sin(m pi x / L) (an eigenmode of
    the detached loop), ``winding(L, n)`` is exp(2 pi i n x / L)/sqrt(L) (the
    gauge-stripped isolated-ring mode, the physical wavefunction being
    exp(-ix(A - 2 pi n/L))/sqrt(L)), and sampled profiles live on a uniform
    closed grid over [0, L].  States combine linearly and compare by the loop
    L2 inner product.
    """

    def __init__(self, L: float, terms: Iterable[tuple[_Atom, complex]]):
        if not (L > 0 and math.isfinite(L)):
            raise ValueError("loop length must be positive")
        self.L = float(L)
        merged: dict[_Atom, complex] = {}
        for atom, coef in terms:
            merged[atom] = merged.get(atom, 0.0) + complex(coef)
        self.terms = tuple((a, c) for a, c in merged.items() if c != 0.0)

    # -- constructors

    @classmethod
    def sine_mode(cls, L: float, m: int, coef: complex = 1.0) -> "LoopState":
        if m < 1:
            raise ValueError("mode index starts at 1")
        return cls(L, [(_SinMode(int(m)), coef)])

    @classmethod
    def winding(cls, L: float, n: int, coef: complex = 1.0) -> "LoopState":
        return cls(L, [(_Winding(int(n)), coef)])

    @classmethod
    def from_gauge_profile(cls, L: float, values: Sequence[complex]) -> "LoopState":
        """State from samples of g(x) = exp(iAx) u(x) on a uniform grid over [0, L]."""
        vals = np.asarray(values, dtype=complex)
        if vals.ndim != 1 or vals.size < 9:
            raise ValueError("need a 1-d profile with at least 9 samples")
        grid = np.linspace(0.0, L, vals.size)
        std = np.linspace(0.0, L, _SAMPLE_POINTS)
        re = np.interp(std, grid, vals.real)
        im = np.interp(std, grid, vals.imag)
        return cls(L, [(_Samples(tuple(re + 1j * im)), 1.0)])

    @classmethod
    def from_loop_values(cls, p: LassoParams, values: Sequence[complex]) -> "LoopState":
        """State from samples of the physical wavefunction u(x) on [0, L]."""
        vals = np.asarray(values, dtype=complex)
        grid = np.linspace(0.0, p.L, vals.size)
        return cls.from_gauge_profile(p.L, vals * np.exp(1j * p.A * grid))

    # -- algebra

    def __add__(self, other: "LoopState") -> "LoopState":
        if abs(other.L - self.L) > 1e-12 * self.L:
            raise ValueError("cannot combine states on different loops")
        return LoopState(self.L, list(self.terms) + list(other.terms))

    def __sub__(self, other: "LoopState") -> "LoopState":
        return self + (-1.0) * other

    def __rmul__(self, scalar: complex) -> "LoopState":
        return LoopState(self.L, [(a, scalar * c) for a, c in self.terms])

    __mul__ = __rmul__

    # -- evaluation

    def gauge_profile(self, x: np.ndarray) -> np.ndarray:
        """Values of g on the given coordinates."""
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for atom, coef in self.terms:
            out += coef * _atom_values(atom, self.L, x)
        return out

    def loop_values(self, p: LassoParams, x: np.ndarray) -> np.ndarray:
        """Values of the physical wavefunction u = exp(-iAx) g."""
        x = np.asarray(x, dtype=float)
        return np.exp(-1j * p.A * x) * self.gauge_profile(x)

    # -- geometry

    def inner(self, other: "LoopState") -> complex:
        """Loop L2 inner product, conjugate-linear in self."""
        total = 0.0 + 0.0j
        for a1, c1 in self.terms:
            for a2, c2 in other.terms:
                total += np.conj(c1) * c2 * _atom_inner(a1, a2, self.L)
        return complex(total)

    def norm(self) -> float:
        return math.sqrt(max(self.inner(self).real, 0.0))

    def normalized(self) -> "LoopState":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize the zero state")
        return (1.0 / n) * self

    def reflected(self) -> "LoopState":
        """Profile reflected through the junction, g(x) -> g(L - x)."""
        out = []
        for atom, coef in self.terms:
            if isinstance(atom, _SinMode):
                sign = 1.0 if atom.m % 2 == 1 else -1.0
                out.append((atom, sign * coef))
            elif isinstance(atom, _Winding):
                out.append((_Winding(-atom.n), coef))
            else:
                out.append((_Samples(tuple(reversed(atom.values))), coef))
        return LoopState(self.L, out)

    def shifted(self, p: LassoParams, s: float) -> "LoopState":
        """State re-read from a junction moved to arc position s.

        The physical wavefunction is relabelled around the ring,
        u'(x) = u(x + s mod L), and re-stripped with the same gauge.
        """
        s = float(s) % self.L
        if s == 0.0:
            return self
        x = np.linspace(0.0, self.L, _SAMPLE_POINTS)
        u = self.loop_values(p, x)
        # Periodic relabelling of u; the closed grid duplicates the seam, so
        # interpolate on [0, L) and wrap.
        xs = (x + s) % self.L
        u_open = u[:-1]
        x_open = x[:-1]
        idx = np.searchsorted(x_open, xs, side="right") - 1
        idx = np.clip(idx, 0, x_open.size - 1)
        x0 = x_open[idx]
        nxt = (idx + 1) % x_open.size
        h = self.L / (_SAMPLE_POINTS - 1)
        w = (xs - x0) / h
        u_shift = (1.0 - w) * u_open[idx] + w * u[idx + 1]
        g_shift = np.exp(1j * p.A * x) * u_shift
        return LoopState.from_gauge_profile(self.L, g_shift)


def _atom_values(atom: _Atom, L: float, x: np.ndarray) -> np.ndarray:
    if isinstance(atom, _SinMode):
        return np.sqrt(2.0 / L) * np.sin(atom.m * np.pi * x / L) + 0.0j
    if isinstance(atom, _Winding):
        return np.exp(2j * np.pi * atom.n * x / L) / math.sqrt(L)
    vals = np.asarray(atom.values, dtype=complex)
    grid = np.linspace(0.0, L, vals.size)
    re = np.interp(x, grid, vals.real)
    im = np.interp(x, grid, vals.imag)
    return re + 1j * im


def _sample_grid(L: float) -> np.ndarray:
    return np.linspace(0.0, L, _SAMPLE_POINTS)


def _simpson_weights(n: int, h: float) -> np.ndarray:
    w = np.ones(n)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (h / 3.0)


def _sin_winding_overlap(m: int, n: int, L: float) -> complex:
    """<sine_mode m | winding n> on the loop."""
    a = m * np.pi / L
    b = 2.0 * np.pi * n / L
    if m == 2 * abs(n) and n != 0:
        s = 1j * L / 2.0 if n > 0 else -1j * L / 2.0
    else:
        s = (1.0 - (-1.0) ** m) * a / (a * a - b * b)
    return math.sqrt(2.0) / L * s


def _atom_inner(a1: _Atom, a2: _Atom, L: float) -> complex:
    if isinstance(a1, _SinMode) and isinstance(a2, _SinMode):
        return 1.0 if a1.m == a2.m else 0.0
    if isinstance(a1, _Winding) and isinstance(a2, _Winding):
        return 1.0 if a1.n == a2.n else 0.0
    if isinstance(a1, _SinMode) and isinstance(a2, _Winding):
        return _sin_winding_overlap(a1.m, a2.n, L)
    if isinstance(a1, _Winding) and isinstance(a2, _SinMode):
        return np.conj(_sin_winding_overlap(a2.m, a1.n, L))
    # at least one sampled atom: quadrature on the standard grid
    x = _sample_grid(L)
    w = _simpson_weights(x.size, x[1] - x[0])
    v1 = _atom_values(a1, L, x)
    v2 = _atom_values(a2, L, x)
    return complex(np.sum(w * np.conj(v1) * v2))


# ---------------------------------------------------------------------------
# overlap with the junction defect profile


def _stable_expm1_ratio(z: np.ndarray, L: float) -> np.ndarray:
    """(exp(izL) - 1)/z, stable for small |z|."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape, dtype=complex)
    small = np.abs(z) * L < 1e-4
    zb = np.where(small, 1.0, z)
    out = (np.exp(1j * zb * L) - 1.0) / zb
    if np.any(small):
        zs = z[small] * L
        series = 1j * L * (1.0 + 1j * zs / 2.0 - zs**2 / 6.0 - 1j * zs**3 / 24.0)
        out[small] = series
    return out


def _jhat_sin(m: int, L: float, Phi: float, k: np.ndarray) -> np.ndarray:
    """Defect overlap of a sine mode: entire in k, removable at k = m pi/L."""
    a = m * np.pi / L
    sign = -1.0 if m % 2 == 0 else 1.0  # (-1)^(m+1)
    bracket = np.exp(1j * Phi) * sign + 1.0
    delta = k - a
    # sin(kL)/(a^2 - k^2) = (-1)^(m+1) sin(delta L)/(delta (k + a))
    ratio = sign * L * np.sinc(delta * L / np.pi) / (k + a)
    return math.sqrt(2.0 / L) * a * bracket * ratio


def _jhat_winding(n: int, L: float, Phi: float, k: np.ndarray) -> np.ndarray:
    b = 2.0 * np.pi * n / L
    f = lambda z: _stable_expm1_ratio(z, L)
    t1 = -0.5 * (f(k - b) - f(-(k + b)))
    t2 = -0.5 * (f(k + b) - f(-(k - b)))
    return (np.exp(1j * Phi) * t1 + t2) / math.sqrt(L)


def _filon_exp_moments(values: np.ndarray, L: float, q: np.ndarray) -> np.ndarray:
    """integral of f(x) exp(iqx) dx for the piecewise-linear interpolant of f.

    Exact per panel, so the accuracy is set by the sampling of f alone and is
    uniform in q.
    """
    n = values.size - 1
    h = L / n
    theta = q * h
    small = np.abs(theta) < 1e-3
    th = np.where(small, 1.0, theta)
    c1 = (np.exp(1j * th) - 1.0) / (1j * th)
    c2 = np.exp(1j * th) / (1j * th) - (np.exp(1j * th) - 1.0) / (1j * th) ** 2
    if np.any(small):
        ts = theta[small]
        c1[small] = 1.0 + 1j * ts / 2.0 - ts**2 / 6.0 - 1j * ts**3 / 24.0
        c2[small] = 0.5 + 1j * ts / 3.0 - ts**2 / 8.0 - 1j * ts**3 / 30.0
    x = np.linspace(0.0, L, values.size)
    # P(q) = sum_j f_j exp(i q x_j), evaluated in chunks to bound memory.
    p_full = np.empty(q.shape, dtype=complex)
    chunk = max(1, int(2e6 // values.size))
    for lo in range(0, q.size, chunk):
        hi = min(lo + chunk, q.size)
        p_full[lo:hi] = np.exp(1j * np.outer(q[lo:hi], x)) @ values
    tail = values[-1] * np.exp(1j * q * L)
    head = values[0]
    return h * ((c1 - c2) * (p_full - tail) + c2 * np.exp(-1j * theta) * (p_full - head))


def _jhat_samples(values: np.ndarray, L: float, Phi: float, k: np.ndarray) -> np.ndarray:
    gbar = np.conj(np.asarray(values, dtype=complex))
    m_plus = _filon_exp_moments(gbar, L, k)
    m_minus = _filon_exp_moments(gbar, L, -k)
    int_sin = (m_plus - m_minus) / 2j
    int_sin_rev = (np.exp(1j * k * L) * m_minus - np.exp(-1j * k * L) * m_plus) / 2j
    return np.exp(1j * Phi) * int_sin + int_sin_rev


def defect_overlap(p: LassoParams, psi: LoopState, k: np.ndarray) -> np.ndarray:
    """J(k) = integral of conj(g) [exp(i Phi) sin kx + sin k(L-x)] over the loop.

    Conjugate-linear in the state; entire in k.  Together with the rescaled
    denominator it determines the absolutely continuous spectral density of
    the state and all transition amplitudes.
    """
    k = np.asarray(k, dtype=float)
    out = np.zeros(k.shape, dtype=complex)
    for atom, coef in psi.terms:
        if isinstance(atom, _SinMode):
            val = _jhat_sin(atom.m, p.L, p.Phi, k)
        elif isinstance(atom, _Winding):
            val = _jhat_winding(atom.n, p.L, p.Phi, k)
        else:
            val = _jhat_samples(np.asarray(atom.values), p.L, p.Phi, k)
        out += np.conj(coef) * val
    return out


def _dhat(p: LassoParams, k: np.ndarray) -> np.ndarray:
    """Entire rescaled resolvent denominator D(k) sin(kL) on a real grid."""
    kL = k * p.L
    s = np.sin(kL)
    c = np.cos(kL)
    core = 2.0 * k * (math.cos(p.Phi) - c) - p.alpha * s
    return (1.0 - 1j * p.mu * k) * core + 1j * p.omega**2 * k * s


def _lattice_safe(p: LassoParams, k: np.ndarray) -> np.ndarray:
    """Nudge momenta off float-exact multiples of pi/L.

    The density extends continuously through the sine lattice, but evaluating
    the 0/0 ratio within ~1e-12 of a lattice point divides rounding residue
    by rounding residue; a 1e-8 shift sits safely inside the smooth zone.
    """
    s = np.sin(k * p.L)
    bad = np.abs(s) < 1e-11
    if np.any(bad):
        k = k.copy()
        k[bad] += 1e-8 * math.pi / p.L
    return k


def _density_closed(p: LassoParams, psi: LoopState, k: np.ndarray) -> np.ndarray:
    """Spectral density (wrt energy) of a loop state from the overlap form."""
    k = _lattice_safe(p, np.asarray(k, dtype=float))
    j = defect_overlap(p, psi, k)
    d = _dhat(p, k)
    return (p.omega**2 / math.pi) * k * np.abs(j) ** 2 / np.abs(d) ** 2


def _cross_density_closed(p, phi: LoopState, psi: LoopState, k: np.ndarray) -> np.ndarray:
    k = _lattice_safe(p, np.asarray(k, dtype=float))
    j_phi = defect_overlap(p, phi, k)
    j_psi = defect_overlap(p, psi, k)
    d = _dhat(p, k)
    return (p.omega**2 / math.pi) * k * j_phi * np.conj(j_psi) / np.abs(d) ** 2


# ---------------------------------------------------------------------------
# spectral density through the resolvent kernel (quadrature route)


def spectral_density(p: LassoParams, psi: LoopState, k: float, *, order: int = 48) -> float:
    """(1/pi) Im <psi, G(k^2 + i0) psi> by double quadrature of the kernel.

    The loop-loop kernel block is integrated over the two triangles x < y and
    x > y with tensor Gauss-Legendre rules (the kernel kinks on the
    diagonal), calling the resolvent kernel pointwise.  This is the direct,
    slower route; the closed overlap form must agree with it and the survival
    machinery uses the latter.
    """
    k = float(k)
    if not (k > 0 and math.isfinite(k)):
        raise ValueError("spectral density needs real k > 0")
    nodes, weights = np.polynomial.legendre.leggauss(order)
    un = 0.5 * (nodes + 1.0)
    uw = 0.5 * weights
    total = 0.0 + 0.0j
    # y = x v maps the lower triangle {0 < y < x < L} to the unit square.
    xs = p.L * un
    psi_x = psi.loop_values(p, xs)
    for xi, wx, px in zip(xs, p.L * uw, psi_x):
        ys = xi * un
        psi_y = psi.loop_values(p, ys)
        g_row = np.array(
            [resolvent_kernel(p, k, xi, yj).loop_loop for yj in ys], dtype=complex
        )
        inner = np.sum(uw * xi * g_row * psi_y)
        total += wx * np.conj(px) * inner
        # upper triangle by the swap (x, y) -> (y, x)
        g_col = np.array(
            [resolvent_kernel(p, k, yj, xi).loop_loop for yj in ys], dtype=complex
        )
        inner_t = np.sum(uw * xi * np.conj(psi_y) * g_col)
        total += wx * px * inner_t
    return float(total.imag / math.pi)


# ---------------------------------------------------------------------------
# bound-state data


@dataclass(frozen=True)
class _NegativeProfile:
    """Loop and lead content of one negative eigenvalue."""

    state: BoundState
    norm_factor: float
    t_coef: complex
    lead_coef: complex
    loop_weight: float

    def gauge_values(self, kappa: float, x: np.ndarray) -> np.ndarray:
        cp = 0.5 * (self.t_coef + 1j)
        cm = 0.5 * (self.t_coef - 1j)
        return self.norm_factor * (cp * np.exp(kappa * x) + cm * np.exp(-kappa * x))


def _negative_profile(p: LassoParams, state: BoundState) -> _NegativeProfile:
    kappa = state.kappa
    kl = kappa * p.L
    t = 1j * math.sinh(kl) / (cmath.exp(1j * p.Phi) - math.cosh(kl))
    cp = 0.5 * (t + 1j)
    cm = 0.5 * (t - 1j)
    # loop integral of |T cosh + i sinh|^2 in overflow-safe exponential form
    e2 = math.expm1(2.0 * kl)
    em2 = -math.expm1(-2.0 * kl)
    loop_int = (
        abs(cp) ** 2 * e2 / (2.0 * kappa)
        + abs(cm) ** 2 * em2 / (2.0 * kappa)
        + 2.0 * (np.conj(cp) * cm).real * p.L
    )
    rho_over_n = p.omega * t / (1.0 + p.mu * kappa)
    lead_int = abs(rho_over_n) ** 2 / (2.0 * kappa)
    nf = 1.0 / math.sqrt(loop_int + lead_int)
    return _NegativeProfile(
        state=state,
        norm_factor=nf,
        t_coef=t,
        lead_coef=nf * rho_over_n,
        loop_weight=nf * nf * loop_int,
    )


def _exp_sin_integral(c: complex, m: int, L: float) -> complex:
    """integral exp(cx) sin(m pi x / L) dx over [0, L]."""
    a = m * np.pi / L
    sign = (-1.0) ** m
    return a * (1.0 - sign * cmath.exp(c * L)) / (c * c + a * a)


def _exp_winding_integral(c: complex, n: int, L: float) -> complex:
    """integral exp(cx) exp(2 pi i n x / L) dx over [0, L]."""
    z = c + 2j * np.pi * n / L
    if abs(z) * L < 1e-8:
        return L * (1.0 + z * L / 2.0)
    return (cmath.exp(z * L) - 1.0) / z


def _negative_projection(p: LassoParams, prof: _NegativeProfile, psi: LoopState) -> complex:
    """<u_b, psi> for a loop-supported state (the lead part contributes nothing)."""
    kappa = prof.state.kappa
    cp_c = np.conj(0.5 * (prof.t_coef + 1j))
    cm_c = np.conj(0.5 * (prof.t_coef - 1j))
    total = 0.0 + 0.0j
    for atom, coef in psi.terms:
        if isinstance(atom, _SinMode):
            val = math.sqrt(2.0 / p.L) * (
                cp_c * _exp_sin_integral(kappa, atom.m, p.L)
                + cm_c * _exp_sin_integral(-kappa, atom.m, p.L)
            )
        elif isinstance(atom, _Winding):
            val = (
                cp_c * _exp_winding_integral(kappa, atom.n, p.L)
                + cm_c * _exp_winding_integral(-kappa, atom.n, p.L)
            ) / math.sqrt(p.L)
        else:
            x = _sample_grid(p.L)
            w = _simpson_weights(x.size, x[1] - x[0])
            conj_c = cp_c * np.exp(kappa * x) + cm_c * np.exp(-kappa * x)
            val = complex(np.sum(w * conj_c * np.asarray(atom.values)))
        total += coef * val
    return prof.norm_factor * total


def _embedded_mode_candidates(p: LassoParams, psi: LoopState, cutoff: int) -> list[int]:
    """Sine-mode indices that can both be embedded eigenmodes and overlap psi."""
    if p.is_decoupled or p.omega == 0.0:
        allowed = lambda m: True
    else:
        from .core import _flux_class

        cls = _flux_class(p)
        if cls is None:
            return []
        allowed = (lambda m: m % 2 == 0) if cls == 0 else (lambda m: m % 2 == 1)
    modes: set[int] = set()
    truncated = False
    for atom, _ in psi.terms:
        if isinstance(atom, _SinMode):
            if allowed(atom.m):
                modes.add(atom.m)
        elif isinstance(atom, _Winding):
            two_n = 2 * abs(atom.n)
            if two_n >= 1 and allowed(two_n):
                modes.add(two_n)
            for m in range(1, cutoff + 1):
                if m % 2 == 1 and allowed(m):
                    modes.add(m)
        else:
            for m in range(1, cutoff + 1):
                if allowed(m):
                    modes.add(m)
    return sorted(modes)


def project_bound(
    p: LassoParams, psi: LoopState, *, cutoff: int = _PROJECTION_CUTOFF
) -> list[tuple[BoundState, complex]]:
    """Projections of a loop state onto every bound state of the Hamiltonian.

    Embedded loop eigenstates contribute <chi_m, psi>; negative eigenvalues
    use their normalized loop component.  States whose sine expansion does
    not terminate (windings against odd modes, sampled profiles) are
    truncated at ``cutoff`` modes.  Entries with zero projection are dropped.
    """
    out: list[tuple[BoundState, complex]] = []
    modes = _embedded_mode_candidates(p, psi, cutoff)
    if modes:
        sin_states = {s.n: s for s in positive_bound_states(p, max(modes))}
        for m in modes:
            if m not in sin_states:
                continue
            c = LoopState.sine_mode(p.L, m).inner(psi)
            if abs(c) > 1e-14:
                out.append((sin_states[m], c))
    if not (p.is_decoupled or p.omega == 0.0):
        for state in negative_bound_states(p):
            prof = _negative_profile(p, state)
            c = _negative_projection(p, prof, psi)
            if abs(c) > 1e-14:
                out.append((state, c))
    return out


# ---------------------------------------------------------------------------
# survival machinery


@dataclass(frozen=True)
class DecayClassification:
    """Long-time behaviour of the survival probability."""

    kind: Literal["decays-to-zero", "constant-limit", "periodic", "quasiperiodic"]
    limit: Optional[float] = None
    period: Optional[float] = None


@dataclass
class DecayProfile:
    """Bound projections, spectral density samples and the survival series."""

    bound_projections: list[tuple[BoundState, complex]]
    density_k: np.ndarray
    density: np.ndarray
    times: np.ndarray
    amplitudes: np.ndarray
    probabilities: np.ndarray
    classification: DecayClassification
    diagnostics: dict = field(default_factory=dict)


def _denominator_minima(p: LassoParams, k_max: float) -> list[tuple[float, float]]:
    """(position, width) of every dip of |Dhat| on the real axis up to k_max.

    Density spikes can only sit where the rescaled denominator gets small;
    a dense pilot scan finds its local minima and the analytic derivative
    turns the dip value into a resonance half-width estimate.
    """
    from .errors import ConvergenceError
    from .resonances import find_pole, pole_function

    f, df = pole_function(p)
    spacing = math.pi / (48.0 * p.L)
    pilot = np.linspace(1e-6, k_max, max(64, int(48 * k_max * p.L / math.pi)) + 1)
    vals = np.abs(_dhat(p, pilot))
    out = []
    interior = np.nonzero((vals[1:-1] <= vals[:-2]) & (vals[1:-1] <= vals[2:]))[0] + 1
    for i in interior:
        k0 = float(pilot[i])
        slope = abs(df(complex(k0)))
        width = float(vals[i] / slope) if slope > 0 else spacing
        # The dip is the shadow of a pole; let the pole finder center it.
        try:
            pole = find_pole(p, complex(k0, -min(width, 1.0)))
            if abs(pole.k.real - k0) < 4.0 * spacing and pole.k.imag > -5.0:
                k0 = pole.k.real
                width = max(-pole.k.imag, 1e-9)
        except ConvergenceError:
            pass
        out.append((k0, max(width, 1e-9)))
    # threshold structure at the spectral edge
    out.append((0.0, max(abs(2.0 * (math.cos(p.Phi) - 1.0) / p.L - p.alpha), 1e-3)))
    return out


def _density_grid(p: LassoParams, k_max: float, pts_per_period: int) -> np.ndarray:
    period = math.pi / p.L
    n_per = max(8, pts_per_period)
    body = np.linspace(period / n_per, k_max, int(k_max / period * n_per) + 2)
    # Geometric approach to the spectral edge: at a threshold coupling the
    # density diverges like 1/k there, which linear panels misintegrate.
    edge = np.geomspace(1e-9, body[0], 64, endpoint=False)
    base = np.concatenate([edge, body])
    extra = []
    u = np.linspace(-0.96, 0.96, 31)
    lorentz = np.tan(0.5 * math.pi * u)
    for pos, width in _denominator_minima(p, k_max):
        cluster = pos + width * lorentz
        extra.extend(cluster[(cluster > 0) & (cluster < k_max)])
    grid = np.unique(np.concatenate([base, np.array(extra)])) if extra else base
    grid = grid[(grid > 0) & (grid <= k_max)]
    # keep clear of the removable 0/0 points at the sine lattice
    lattice_dist = np.abs(grid * p.L / math.pi - np.round(grid * p.L / math.pi))
    grid = np.where(lattice_dist * math.pi / p.L < 1e-9, grid + 2e-9, grid)
    return np.unique(grid)


def _refine_grid(p, phi, psi, grid, passes=6, tol=3e-9):
    """Insert midpoints where the spectral measure kinks across a panel.

    The refinement criterion works on the measure 2 k rho(k), which stays
    bounded through spectral-edge singularities of rho itself.
    """

    def meas(ks):
        if phi is psi:
            return 2.0 * ks * _density_closed(p, psi, ks)
        return 2.0 * ks * np.abs(_cross_density_closed(p, phi, psi, ks))

    vals = meas(grid)
    scale = max(float(np.max(np.abs(vals))), 1e-300)
    for _ in range(passes):
        mids = 0.5 * (grid[:-1] + grid[1:])
        mid_vals = meas(mids)
        interp = 0.5 * (vals[:-1] + vals[1:])
        bad = np.abs(mid_vals - interp) > tol * scale
        if not np.any(bad):
            break
        grid = np.sort(np.concatenate([grid, mids[bad]]))
        vals = meas(grid)
    return grid


def _filon_series(k_grid: np.ndarray, weight: np.ndarray, times: np.ndarray) -> np.ndarray:
    """integral weight(k) exp(-i t k^2) dk for piecewise-linear weight.

    The quadratic phase is integrated exactly per panel through Fresnel
    integrals, so the error is the interpolation error of the weight alone,
    uniformly in t.
    """
    from scipy.special import fresnel

    k0 = k_grid[:-1]
    k1 = k_grid[1:]
    h = k1 - k0
    w0 = weight[:-1]
    dw = np.diff(weight)
    out = np.empty(times.size, dtype=complex)
    for i, t in enumerate(times):
        if t == 0.0:
            out[i] = np.sum(0.5 * (weight[:-1] + weight[1:]) * h)
            continue
        scale = math.sqrt(2.0 * t / math.pi)
        s1, c1 = fresnel(k1 * scale)
        s0, c0 = fresnel(k0 * scale)
        f_diff = math.sqrt(math.pi / (2.0 * t)) * ((c1 - c0) - 1j * (s1 - s0))
        g_diff = (np.exp(-1j * t * k0**2) - np.exp(-1j * t * k1**2)) / (2j * t)
        out[i] = np.sum(w0 * f_diff + (dw / h) * (g_diff - k0 * f_diff))
    return out


def transition_amplitude(
    p: LassoParams,
    phi: LoopState,
    psi: LoopState,
    times,
    *,
    k_max: Optional[float] = None,
    pts_per_period: int = 24,
    tol: float = 1e-5,
    cutoff: int = _PROJECTION_CUTOFF,
):
    """<phi, exp(-iHt) psi> for loop states, with quadrature-error control.

    Returns (amplitudes, info): the bound contributions phase-rotate, the
    absolutely continuous part is integrated against the cross spectral
    density with exact panel oscillation.  The density grid is validated by
    recomputing the series on its own coarsening; exceeding ``tol`` raises
    DecayWindowError naming the first failing time instead of returning a
    silently degraded value.
    """
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or times.size == 0:
        raise ValueError("need a nonempty 1-d sequence of times")
    if np.any(times < 0) or np.any(np.diff(times) < 0):
        raise ValueError("times must be nonnegative and ascending")

    proj_phi = dict_by_state(project_bound(p, phi, cutoff=cutoff))
    proj_psi = dict_by_state(project_bound(p, psi, cutoff=cutoff))
    bound_terms = []
    for key, d in proj_psi.items():
        e = proj_phi.get(key)
        if e is not None:
            bound_terms.append((key[1], np.conj(e) * d))

    amplitudes = np.zeros(times.size, dtype=complex)
    for energy, weight in bound_terms:
        amplitudes += weight * np.exp(-1j * energy * times)

    info = {"bound_overlap": sum(w for _, w in bound_terms)}
    if p.is_decoupled or p.omega == 0.0:
        # Pure point evolution: nothing reaches the lead.
        info["ac_overlap"] = 0.0 + 0.0j
        info["quadrature_error"] = 0.0
        return amplitudes, info

    if k_max is None:
        m_top = 1.0
        for state in (phi, psi):
            for atom, _ in state.terms:
                if isinstance(atom, _SinMode):
                    m_top = max(m_top, atom.m * math.pi / p.L)
                elif isinstance(atom, _Winding):
                    m_top = max(m_top, 2.0 * math.pi * abs(atom.n) / p.L)
        sampled = any(
            isinstance(atom, _Samples) for s in (phi, psi) for atom, _ in s.terms
        )
        k_max = (40.0 * math.pi / p.L) if sampled else max(600.0 / p.L, 4.0 * m_top)

    grid = _density_grid(p, k_max, pts_per_period)
    same = phi is psi or (phi.L == psi.L and phi.terms == psi.terms)
    if same:
        grid = _refine_grid(p, psi, psi, grid)
        tau = _density_closed(p, psi, grid).astype(complex)
    else:
        grid = _refine_grid(p, phi, psi, grid)
        tau = _cross_density_closed(p, phi, psi, grid)
    weight = tau * 2.0 * grid  # spectral measure in the k variable
    # Three resolution levels: the interpolation error scales with the panel
    # width squared, so each coarsening differs by about three times the
    # finer error.  Extrapolate on the two finest pairs and bound the result
    # by their disagreement.
    ac_full = _filon_series(grid, weight, times)
    ac_half = _filon_series(grid[::2], weight[::2], times)
    ac_quarter = _filon_series(grid[::4], weight[::4], times)
    r_fine = ac_full + (ac_full - ac_half) / 3.0
    r_coarse = ac_half + (ac_half - ac_quarter) / 3.0
    err = np.abs(r_fine - r_coarse)
    ac_full = r_fine
    # Tail envelope past the cutoff from a power-law fit of the last two
    # periods; mu = 0 couplings decay like k^-4, a momentum-dependent
    # junction leaves a much slower summed-resonance tail.
    per = math.pi / p.L
    last = (grid > grid[-1] - per) & (grid <= grid[-1])
    prev = (grid > grid[-1] - 2 * per) & (grid <= grid[-1] - per)
    w2 = float(np.mean(np.abs(weight[last]))) + 1e-300
    w1 = float(np.mean(np.abs(weight[prev]))) + 1e-300
    k2c, k1c = grid[-1] - 0.5 * per, grid[-1] - 1.5 * per
    q = min(max(math.log(w1 / w2) / math.log(k2c / k1c), 1.5), 12.0)
    tail = w2 * k2c / (q - 1.0) * (grid[-1] / k2c) ** (1.0 - q)
    # Richardson-corrected total weight: trapezoid plus its own h^2 defect.
    t_full = complex(np.trapezoid(weight, grid))
    t_half = complex(np.trapezoid(weight[::2], grid[::2]))
    info["ac_overlap"] = t_full + (t_full - t_half) / 3.0
    info["tail_estimate"] = tail
    info["quadrature_error"] = float(np.max(err))
    info["k_max"] = float(grid[-1])
    info["grid_size"] = int(grid.size)
    bad = err > tol
    if np.any(bad):
        t_bad = float(times[np.argmax(bad)])
        t_ok = float(times[~bad][-1]) if np.any(~bad) else 0.0
        raise DecayWindowError(
            f"oscillatory quadrature exceeds tol = {tol:g} from t = {t_bad:g} "
            f"(grid of {grid.size} nodes is valid up to t = {t_ok:g}; "
            "raise pts_per_period or lower k_max)"
        )
    amplitudes += ac_full
    return amplitudes, info


def dict_by_state(projections):
    out = {}
    for state, c in projections:
        key = (state.kind, state.energy, state.n)
        out[key] = c
    return out


def _classify(p: LassoParams, projections, weight_tol=1e-12) -> DecayClassification:
    effective = [(s, c) for s, c in projections if abs(c) ** 2 > weight_tol]
    if not effective:
        return DecayClassification(kind="decays-to-zero", limit=0.0)
    if len(effective) == 1:
        c = effective[0][1]
        return DecayClassification(kind="constant-limit", limit=abs(c) ** 4)
    if any(s.kind == "negative" for s, _ in effective):
        return DecayClassification(kind="quasiperiodic")
    ms = [s.n for s, _ in effective]
    diffs = [m * m - ms[0] * ms[0] for m in ms[1:]]
    g = 0
    for d in diffs:
        g = math.gcd(g, abs(d))
    period = 2.0 * p.L**2 / (math.pi * g) if g else None
    return DecayClassification(kind="periodic", period=period)


def survival(
    p: LassoParams,
    psi: LoopState,
    times,
    *,
    k_max: Optional[float] = None,
    pts_per_period: int = 24,
    tol: float = 1e-5,
    cutoff: int = _PROJECTION_CUTOFF,
) -> DecayProfile:
    """Survival amplitude and probability of a loop state over given times.

    The state is normalized first; P(0) then reproduces the completeness of
    the spectral decomposition (reported in the diagnostics).  Classification
    of the long-time behaviour follows the bound content: none decays to
    zero, a single projection leaves the constant |c|^4, several commensurate
    embedded energies give a periodic law, any negative eigenvalue in the mix
    makes it quasiperiodic.
    """
    psi_n = psi.normalized()
    times = np.asarray(times, dtype=float)
    projections = project_bound(p, psi_n, cutoff=cutoff)
    amplitudes, info = transition_amplitude(
        p, psi_n, psi_n, times, k_max=k_max, pts_per_period=pts_per_period, tol=tol, cutoff=cutoff
    )
    bound_weight = sum(abs(c) ** 2 for _, c in projections)
    completeness = bound_weight + float(np.real(info.get("ac_overlap", 0.0)))
    if p.is_decoupled or p.omega == 0.0:
        density_k = np.array([])
        density = np.array([])
    else:
        density_k = np.linspace(1e-6, info.get("k_max", 10.0), 512)
        density = _density_closed(p, psi_n, density_k)
    diag = dict(info)
    diag["completeness_defect"] = abs(1.0 - completeness - diag.get("tail_estimate", 0.0))
    diag["bound_weight"] = bound_weight
    return DecayProfile(
        bound_projections=projections,
        density_k=density_k,
        density=density,
        times=times,
        amplitudes=amplitudes,
        probabilities=np.abs(amplitudes) ** 2,
        classification=_classify(p, projections),
        diagnostics=diag,
    )


def a_parity_decompose(p: LassoParams, psi: LoopState) -> tuple[LoopState, LoopState]:
    """Even and odd parts of the gauge-stripped profile under x -> L - x.

    Winding profiles split into their cosine (even) and i sine (odd) parts.
    At integer flux quanta the embedded eigenmodes (even sine indices) are
    odd under this reflection, so the reflection-odd part is the surviving
    one; at half-integer flux the classes swap roles.
    """
    if abs(psi.L - p.L) > 1e-12 * p.L:
        raise ValueError("state and parameters disagree on the loop length")
    reflected = psi.reflected()
    even = 0.5 * (psi + reflected)
    odd = 0.5 * (psi - reflected)
    return even, odd


def surviving_component(p: LassoParams, psi: LoopState) -> LoopState:
    """The parity component spanned by embedded eigenmodes at the given flux.

    Integer flux quanta: reflection-odd; half-integer: reflection-even.
    Raises for fluxes with no embedded states.
    """
    from .core import _flux_class

    cls = _flux_class(p)
    if cls is None:
        raise ValueError("no embedded eigenstates away from integer/half-integer flux")
    even, odd = a_parity_decompose(p, psi)
    return odd if cls == 0 else even


def decaying_component(p: LassoParams, psi: LoopState) -> LoopState:
    """Complement of :func:`surviving_component` within the parity split."""
    from .core import _flux_class

    cls = _flux_class(p)
    if cls is None:
        raise ValueError("no embedded eigenstates away from integer/half-integer flux")
    even, odd = a_parity_decompose(p, psi)
    return even if cls == 0 else odd


@dataclass
class TwoJunctionReport:
    """Outcome of the switched-junction experiment.

    ``p_after_stage1`` is the survival probability of the initial state under
    the first junction at the switch time; ``p_after_stage2`` the probability
    of finding the system back in the (relocated) initial state after the
    second stage, computed from the bound-content survivor.  Parity weights
    are (even, odd) squared norms of the gauge-stripped profiles with respect
    to each junction.
    """

    p_after_stage1: float
    p_after_stage2: float
    surviving_bound_weight: float
    surviving_loop_norm: float
    parity_initial_j1: tuple[float, float]
    parity_initial_j2: tuple[float, float]
    parity_survivor_j1: tuple[float, float]
    parity_survivor_j2: tuple[float, float]
    stage1: DecayProfile


def _parity_weights(p: LassoParams, psi: LoopState) -> tuple[float, float]:
    even, odd = a_parity_decompose(p, psi)
    return even.norm() ** 2, odd.norm() ** 2


def two_junction_scenario(
    p1: LassoParams,
    p2: LassoParams,
    s: float,
    psi0: LoopState,
    t1: float,
    t2: float,
    *,
    tol: float = 1e-4,
) -> TwoJunctionReport:
    """Evolve under junction 1, switch instantaneously to junction 2 at arc s.

    The survivor carried across the switch is the bound content of the
    evolved state (the outgoing lead component is dropped from the
    bookkeeping; both its weight and the survivor's loop norm are reported).
    Stage two evolves the relocated survivor under the second junction and
    projects back on the relocated initial state.
    """
    if abs(p1.L - p2.L) > 1e-12 * p1.L or p1.Phi != p2.Phi:
        raise ValueError("the two junctions must share the loop and its flux")
    if not (0.0 <= s < p1.L):
        raise ValueError("junction offset must lie in [0, L)")
    if t1 < 0 or t2 < 0:
        raise ValueError("stage durations must be nonnegative")
    psi0 = psi0.normalized()
    stage1 = survival(p1, psi0, [t1], tol=tol)
    # Bound content at the switch instant, loop part only.
    survivor = LoopState(p1.L, [])
    for state, c in stage1.bound_projections:
        phase = cmath.exp(-1j * state.energy * t1)
        if state.kind == "positive-embedded":
            survivor = survivor + LoopState.sine_mode(p1.L, state.n, coef=c * phase)
        else:
            prof = _negative_profile(p1, state)
            x = _sample_grid(p1.L)
            vals = prof.gauge_values(state.kappa, x)
            survivor = survivor + (c * phase) * LoopState.from_gauge_profile(p1.L, vals)
    bound_weight = sum(abs(c) ** 2 for _, c in stage1.bound_projections)
    loop_norm = survivor.norm() ** 2

    psi0_frame2 = psi0.shifted(p1, s)
    survivor_frame2 = survivor.shifted(p1, s) if loop_norm > 0 else survivor
    if loop_norm > 0:
        amp2, _ = transition_amplitude(p2, psi0_frame2, survivor_frame2, [t2], tol=tol)
        p_after_2 = float(abs(amp2[0]) ** 2)
    else:
        p_after_2 = 0.0
    return TwoJunctionReport(
        p_after_stage1=float(stage1.probabilities[0]),
        p_after_stage2=p_after_2,
        surviving_bound_weight=bound_weight,
        surviving_loop_norm=loop_norm,
        parity_initial_j1=_parity_weights(p1, psi0),
        parity_initial_j2=_parity_weights(p2, psi0_frame2),
        parity_survivor_j1=_parity_weights(p1, survivor) if loop_norm > 0 else (0.0, 0.0),
        parity_survivor_j2=_parity_weights(p2, survivor_frame2) if loop_norm > 0 else (0.0, 0.0),
        stage1=stage1,
    )
