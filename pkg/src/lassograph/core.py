"""Closed-form quantities for a charged particle on a loop with one halfline lead.

Everything here is an explicit function of the model parameters: the on-shell
reflection amplitude and its phase shift, the embedded and negative bound
states, and the full resolvent kernel written as the detached-junction kernel
plus a rank-two correction.  Conventions: units with hbar = 2m = e = c = 1,
energy E = k**2, flux ``Phi`` in radians (one flux quantum is 2*pi), loop
coordinates in [0, L] with the junction at 0 (identified with L), lead
coordinate in [0, inf).
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from scipy.optimize import brentq

from .errors import ResolventPoleError, RootSearchError, SingularMomentumError

TWO_PI = 2.0 * math.pi

#: Junction coupling value describing a fully detached lead (Dirichlet ends).
DECOUPLED = math.inf

#: Complex wavenumber.  Physical scattering lives at real k > 0, resonances at
#: Im k < 0, negative bound states at k = i*kappa with kappa > 0.
Momentum = complex

# Window for treating a momentum as a junction-transparent point, where the
# reflection amplitude is defined by its limit (see `reflection`).
_REMOVABLE_SIN = 1e-9
_REMOVABLE_COS = 1e-9


@dataclass(frozen=True)
class LassoParams:
    """Loop perimeter, magnetic flux and junction coupling constants.

    ``alpha`` (1/length) is the point-interaction strength at the junction;
    use :data:`DECOUPLED` for a detached junction.  ``mu`` (length) and
    ``omega`` (dimensionless) complete the three-parameter junction family;
    ``mu == 0`` with ``omega == 1`` is the fully continuous delta junction.
    """

    L: float
    Phi: float
    alpha: float
    mu: float = 0.0
    omega: float = 1.0

    def __post_init__(self):
        if not (isinstance(self.L, (int, float)) and self.L > 0 and math.isfinite(self.L)):
            raise ValueError(f"loop perimeter must be positive and finite, got {self.L!r}")
        if not math.isfinite(self.Phi):
            raise ValueError("flux must be finite")
        if not (math.isfinite(self.alpha) or self.alpha == DECOUPLED):
            raise ValueError("alpha must be a finite real or DECOUPLED")
        if not (math.isfinite(self.mu) and math.isfinite(self.omega)):
            raise ValueError("mu and omega must be finite reals")

    @classmethod
    def from_flux_quanta(cls, L, phi, alpha, mu=0.0, omega=1.0):
        """Same parameters with the flux given in flux quanta, Phi = 2*pi*phi."""
        return cls(L=L, Phi=TWO_PI * phi, alpha=alpha, mu=mu, omega=omega)

    @property
    def A(self) -> float:
        """Tangential vector potential along the loop, Phi / L."""
        return self.Phi / self.L

    @property
    def R(self) -> float:
        """Loop radius, L / 2*pi."""
        return self.L / TWO_PI

    @property
    def B(self) -> float:
        """Homogeneous field strength threading the flux through the loop."""
        return 2.0 * self.A / self.R

    @property
    def flux_quanta(self) -> float:
        return self.Phi / TWO_PI

    @property
    def is_delta(self) -> bool:
        return self.mu == 0.0 and self.omega == 1.0

    @property
    def is_decoupled(self) -> bool:
        return self.alpha == DECOUPLED


@dataclass(frozen=True)
class BoundState:
    """A genuine eigenvalue of the coupled operator.

    ``positive-embedded`` states live on the loop only and exist at integer or
    half-integer flux quanta; ``n`` indexes the loop sine mode with energy
    (n*pi/L)**2.  ``negative`` states have energy -kappa**2 and leak onto the
    lead.
    """

    kind: Literal["positive-embedded", "negative"]
    energy: float
    n: Optional[int] = None
    kappa: Optional[float] = None


def delta_denominator(p: LassoParams, k: Momentum) -> complex:
    """(alpha - ik) sin kL - 2k (cos Phi - cos kL), entire in k.

    Zeros in the closed lower halfplane are the resonance poles of the
    delta-junction model; real zeros are its embedded eigenvalues.
    """
    if p.is_decoupled:
        raise ValueError("delta_denominator needs a finite alpha")
    k = complex(k)
    kL = k * p.L
    return (p.alpha - 1j * k) * cmath.sin(kL) - 2.0 * k * (math.cos(p.Phi) - cmath.cos(kL))


def _check_physical_momentum(k) -> float:
    if isinstance(k, complex):
        if k.imag != 0.0:
            raise ValueError("on-shell amplitudes need real k; continue with the resonance tools instead")
        k = k.real
    k = float(k)
    if not (k > 0.0 and math.isfinite(k)):
        raise ValueError(f"momentum must be real, positive and finite, got {k!r}")
    return k


def reflection(p: LassoParams, k) -> complex:
    """On-shell reflection amplitude of the lead at real momentum k > 0.

    Unimodular for real couplings.  At junction-transparent momenta (sin kL
    and cos Phi - cos kL vanishing together, which needs Phi = 0 mod pi) the
    closed form is 0/0 and the derivative-ratio limit is returned, keeping
    flux sweeps through multiples of pi continuous.
    """
    k = _check_physical_momentum(k)
    if p.is_decoupled or p.omega == 0.0:
        # Lead sees only its own boundary condition; the loop factorizes off.
        return -(1.0 + 1j * k * p.mu) / (1.0 - 1j * k * p.mu)
    kL = k * p.L
    s = math.sin(kL)
    c = math.cos(kL)
    cphi = math.cos(p.Phi)
    if abs(s) < _REMOVABLE_SIN and abs(cphi - c) < _REMOVABLE_COS:
        num = (1.0 + 1j * k * p.mu) * p.alpha + 1j * p.omega**2 * k
        den = (1.0 - 1j * k * p.mu) * p.alpha - 1j * p.omega**2 * k
        return -num / den
    # Multiplying numerator and denominator of the textbook form by sin kL
    # keeps everything finite through sin kL = 0 with cos Phi != cos kL.
    x = p.alpha * s - 2.0 * k * (cphi - c)
    num = (1.0 + 1j * k * p.mu) * x + 1j * p.omega**2 * k * s
    den = (1.0 - 1j * k * p.mu) * x - 1j * p.omega**2 * k * s
    return -num / den


def _raw_phase(p: LassoParams, k: float) -> float:
    """Phase-shift value before branch unwrapping, in (-pi/2, 3*pi/2]."""
    if p.is_decoupled or p.omega == 0.0:
        return 0.5 * math.pi + math.atan2(k * p.mu, 1.0)
    kL = k * p.L
    s = math.sin(kL)
    c = math.cos(kL)
    cphi = math.cos(p.Phi)
    if abs(s) < _REMOVABLE_SIN and abs(cphi - c) < _REMOVABLE_COS:
        x = p.alpha
        y = k * (p.mu * p.alpha + p.omega**2)
    else:
        x = p.alpha * s - 2.0 * k * (cphi - c)
        y = k * (p.mu * x + p.omega**2 * s)
    return 0.5 * math.pi + math.atan2(y, x)


def phase_shift(p: LassoParams, k_grid) -> np.ndarray:
    """Continuous phase shift delta(k) with exp(2i delta) = reflection(p, k).

    The grid must be strictly ascending and positive, and dense enough that
    delta moves by less than pi/2 between nodes (not checked); the branch is
    fixed by continuity with delta at the first node folded into [0, pi).
    """
    ks = np.asarray(k_grid, dtype=float)
    if ks.ndim != 1 or ks.size == 0:
        raise ValueError("momentum grid must be a nonempty 1-d sequence")
    if ks[0] <= 0.0 or np.any(np.diff(ks) <= 0.0):
        raise ValueError("momentum grid must be strictly ascending and positive")
    out = np.empty(ks.size)
    prev = 0.0
    for i, k in enumerate(ks):
        raw = _raw_phase(p, float(k))
        if i == 0:
            raw -= math.pi * math.floor(raw / math.pi)
        else:
            raw += math.pi * round((prev - raw) / math.pi)
        out[i] = prev = raw
    return out


def _flux_class(p: LassoParams, tol: float = 1e-9) -> Optional[int]:
    """0 for integer flux quanta, 1 for half-integer, None otherwise."""
    r = p.Phi % TWO_PI
    if min(r, TWO_PI - r) < tol:
        return 0
    if abs(r - math.pi) < tol:
        return 1
    return None


def positive_bound_states(p: LassoParams, n_max: int) -> list[BoundState]:
    """Loop-supported eigenstates with energy (n*pi/L)**2 up to n_max.

    For a coupled junction these exist only at integer flux quanta (even n)
    or half-integer quanta (odd n).  A detached junction keeps every sine
    mode.  Zero omega is rejected: the loop then carries no junction
    condition selecting the modes.
    """
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    if p.is_decoupled:
        ns = range(1, n_max + 1)
    else:
        if p.omega == 0.0:
            raise ValueError("omega = 0 detaches the loop; every mode would be bound")
        cls = _flux_class(p)
        if cls is None:
            ns = ()
        elif cls == 0:
            ns = range(2, n_max + 1, 2)
        else:
            ns = range(1, n_max + 1, 2)
    return [
        BoundState(kind="positive-embedded", energy=(n * math.pi / p.L) ** 2, n=n)
        for n in ns
    ]


def negative_eigenvalue_residual(p: LassoParams, kappa: float) -> float:
    """2k(cos Phi - cosh kL)/sinh kL - alpha - omega**2 k/(1 + mu k) at k = kappa.

    Zeros with kappa > 0 are the negative eigenvalues E = -kappa**2.  Written
    through 1/sinh(x) = 2 exp(-x)/(1 - exp(-2x)) and (cosh-1)/sinh = tanh(x/2)
    so that neither tiny nor huge kappa overflows or cancels.
    """
    kl = kappa * p.L
    if kl == 0.0:
        lhs = 0.0
    else:
        inv_sinh = 2.0 * math.exp(-kl) / (-math.expm1(-2.0 * kl))
        lhs = 2.0 * kappa * ((math.cos(p.Phi) - 1.0) * inv_sinh - math.tanh(0.5 * kl))
    return lhs - p.alpha - p.omega**2 * kappa / (1.0 + p.mu * kappa)


def expected_negative_count(p: LassoParams) -> int:
    """Number of negative eigenvalues from the coupling-threshold classification."""
    threshold = (2.0 / p.L) * (math.cos(p.Phi) - 1.0)
    count = 0 if p.mu >= 0.0 else 1
    if p.alpha < threshold:
        count += 1
    return count


def negative_bound_states(p: LassoParams) -> list[BoundState]:
    """All negative eigenvalues E = -kappa**2, kappa > 0, by bracketed bisection.

    The root count is checked against the coupling-threshold classification;
    a mismatch after grid refinement raises RootSearchError rather than
    silently dropping roots.
    """
    if p.is_decoupled:
        return []
    if p.omega == 0.0:
        # Detached loop, lead with a Robin-type end through mu only: the loop
        # contributes nothing and the halfline part has no L2 eigenstate.
        return []
    expected = expected_negative_count(p)

    kappa_max = max(10.0 / p.L, 3.0 * abs(p.alpha), 1.0)
    if p.mu != 0.0:
        kappa_max = max(kappa_max, 3.0 / abs(p.mu))
    if p.mu < 0.0:
        # The root beyond the RHS pole solves, asymptotically,
        # 2 x^2 - (2 + |mu alpha| + omega^2) x + |mu alpha| = 0 in x = |mu| kappa;
        # bound it with a factor-two margin.
        kappa_max = max(
            kappa_max,
            (4.0 + abs(p.mu * p.alpha) + 2.0 * p.omega**2) / abs(p.mu),
        )
    pole = -1.0 / p.mu if p.mu < 0.0 else None

    def grid_points(n):
        pts = list(np.geomspace(1e-13, kappa_max, n))
        if pole is not None and pole < kappa_max:
            # Straddle the RHS pole tightly so sign changes across it are
            # never mistaken for roots.
            for eps in np.geomspace(1e-11, 0.4 * pole, 25):
                if pole - eps > 0:
                    pts.append(pole - eps)
                pts.append(pole + eps)
        return sorted(pts)

    def collect(n):
        pts = grid_points(n)
        vals = [negative_eigenvalue_residual(p, x) for x in pts]
        roots = []
        for (x0, f0), (x1, f1) in zip(zip(pts, vals), zip(pts[1:], vals[1:])):
            if not (math.isfinite(f0) and math.isfinite(f1)):
                continue
            if pole is not None and x0 < pole < x1:
                continue
            if f0 == 0.0:
                roots.append(x0)
            elif f0 * f1 < 0.0:
                roots.append(brentq(lambda x: negative_eigenvalue_residual(p, x), x0, x1, rtol=1e-13))
        dedup: list[float] = []
        for r in sorted(roots):
            if not dedup or abs(r - dedup[-1]) > 1e-10 * max(1.0, r):
                dedup.append(r)
        return dedup

    roots = collect(400)
    if len(roots) != expected:
        roots = collect(3000)
    if len(roots) != expected:
        raise RootSearchError(
            f"found {len(roots)} negative-eigenvalue roots where the classification "
            f"predicts {expected}",
            diagnostics={
                "roots": roots,
                "expected": expected,
                "kappa_max": kappa_max,
                "threshold": (2.0 / p.L) * (math.cos(p.Phi) - 1.0),
            },
        )
    return [BoundState(kind="negative", energy=-(r * r), kappa=r) for r in roots]


def _loop_dispersion(p: LassoParams, k: complex) -> complex:
    """2k (cos Phi - cos kL) / sin kL; the loop's contribution seen by the lead."""
    kL = k * p.L
    return 2.0 * k * (math.cos(p.Phi) - cmath.cos(kL)) / cmath.sin(kL)


def krein_coefficients(p: LassoParams, k: Momentum):
    """Rank-two correction coefficients (2x2 lambda matrix) and their denominator D.

    D = (1 - i mu k)(Q - alpha) + i omega**2 k with Q the loop dispersion;
    for the delta junction every lambda entry equals -1/D and
    D sin kL = -delta_denominator.  Raises SingularMomentumError at sin kL = 0
    and ResolventPoleError at D = 0.
    """
    if p.is_decoupled:
        raise ValueError("the detached junction has no Krein correction; use the decoupled kernel")
    k = complex(k)
    kL = k * p.L
    s = cmath.sin(kL)
    sin_scale = math.exp(min(abs(kL.imag), 700.0))
    if abs(s) < 1e-12 * sin_scale:
        raise SingularMomentumError(f"sin(kL) vanishes at k = {k}; coefficients are singular there")
    q = _loop_dispersion(p, k)
    one_minus = 1.0 - 1j * p.mu * k
    d = one_minus * (q - p.alpha) + 1j * p.omega**2 * k
    d_scale = abs(one_minus) * (abs(q) + abs(p.alpha)) + p.omega**2 * abs(k) + 1e-300
    if abs(d) < 1e-12 * d_scale:
        raise ResolventPoleError(f"resolvent denominator vanishes at k = {k} (eigenvalue or resonance)")
    lam11 = -one_minus / d
    lam12 = -p.omega / d
    lam22 = (p.mu * (q - p.alpha) - p.omega**2) / d
    lam = np.array([[lam11, lam12], [lam12, lam22]], dtype=complex)
    return lam, d


@dataclass(frozen=True)
class ResolventKernelValue:
    """Value of the 2x2 matrix kernel G(x, y; k).

    Row/column index 0 reads the coordinate on the loop, index 1 on the lead;
    loop entries are NaN when the corresponding coordinate exceeds L.
    """

    block: np.ndarray

    @property
    def loop_loop(self) -> complex:
        return self.block[0, 0]

    @property
    def loop_lead(self) -> complex:
        return self.block[0, 1]

    @property
    def lead_loop(self) -> complex:
        return self.block[1, 0]

    @property
    def lead_lead(self) -> complex:
        return self.block[1, 1]


def decoupled_kernel(p: LassoParams, k: Momentum, x: float, y: float) -> ResolventKernelValue:
    """Resolvent kernel of the detached junction (Dirichlet loop + Dirichlet lead)."""
    k = complex(k)
    if k == 0:
        raise ValueError("kernel is singular at k = 0")
    kL = k * p.L
    s = cmath.sin(kL)
    lo, hi = (x, y) if x <= y else (y, x)
    g_ff = cmath.sin(k * lo) * cmath.exp(1j * k * hi) / k
    if x <= p.L and y <= p.L:
        g_ll = (
            cmath.exp(-1j * p.A * (x - y))
            * cmath.sin(k * lo) * cmath.sin(k * (p.L - hi))
            / (k * s)
        )
    else:
        g_ll = complex(math.nan, math.nan)
    block = np.array([[g_ll, 0.0], [0.0, g_ff]], dtype=complex)
    return ResolventKernelValue(block=block)


def _loop_defect_pair(p: LassoParams, k: complex, x: float):
    """w*(x) and w(y=x): the two rank-one factors of the loop correction.

    The first solves the loop equation in x, the second its flux-reversed
    transpose in y; both equal 1 at the junction.
    """
    kL = k * p.L
    s = cmath.sin(kL)
    left = cmath.exp(-1j * p.A * x) * (
        cmath.exp(1j * p.Phi) * cmath.sin(k * x) + cmath.sin(k * (p.L - x))
    ) / s
    right = cmath.exp(1j * p.A * x) * (
        cmath.exp(-1j * p.Phi) * cmath.sin(k * x) + cmath.sin(k * (p.L - x))
    ) / s
    return left, right


def resolvent_kernel(p: LassoParams, k: Momentum, x: float, y: float) -> ResolventKernelValue:
    """Full resolvent kernel: decoupled kernel plus the rank-two Krein correction.

    Loop coordinates must lie in [0, L] (entries involving a coordinate beyond
    L are NaN), lead coordinates are any nonnegative reals.  Valid for any k
    with sin kL != 0 and D != 0; real k evaluates the limit from above.
    """
    if x < 0 or y < 0:
        raise ValueError("coordinates must be nonnegative")
    k = complex(k)
    lam, _ = krein_coefficients(p, k)
    base = decoupled_kernel(p, k, x, y).block.copy()
    ex = cmath.exp(1j * k * x)
    ey = cmath.exp(1j * k * y)
    wx_left = wy_right = None
    if x <= p.L:
        wx_left, _ = _loop_defect_pair(p, k, x)
    if y <= p.L:
        _, wy_right = _loop_defect_pair(p, k, y)
    block = base
    if wx_left is not None and wy_right is not None:
        block[0, 0] = base[0, 0] + lam[0, 0] * wx_left * wy_right
    else:
        block[0, 0] = complex(math.nan, math.nan)
    block[0, 1] = lam[0, 1] * wx_left * ey if wx_left is not None else complex(math.nan, math.nan)
    block[1, 0] = lam[1, 0] * ex * wy_right if wy_right is not None else complex(math.nan, math.nan)
    block[1, 1] = base[1, 1] + lam[1, 1] * ex * ey
    return ResolventKernelValue(block=block)
