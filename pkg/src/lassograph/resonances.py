"""Resolvent poles of the loop-plus-lead model and their parameter sweeps.

Poles are zeros of the entire function D(k) sin(kL), the rescaled resolvent
denominator, which removes the spurious sin(kL) = 0 structure of D itself.
For the ideal delta junction the pole condition is explicitly solvable; for
general couplings a damped Newton iteration tracks zeros, and a
predictor-corrector sweep traces their trajectories through the non-smooth
crossing points, where two zeros collide.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable, Literal, Optional

from .core import LassoParams
from .errors import BranchLossError, ConvergenceError

_EMBEDDED_TOL = 1e-9


@dataclass(frozen=True)
class Pole:
    """One resolvent pole in the closed lower halfplane.

    ``kind`` is ``embedded-eigenvalue`` only when the pole sits on the real
    axis (within 1e-9) and the flux is a multiple of pi (within 1e-9); both
    conditions together keep narrow resonances classified as resonances.
    ``residual`` is the modulus of the rescaled denominator at convergence.
    """

    k: complex
    kind: Literal["resonance", "embedded-eigenvalue"]
    residual: float


@dataclass
class Trajectory:
    """A pole branch swept in one parameter.

    ``samples`` collects (parameter value, pole); ``crossings`` the
    (parameter value, k) points where the branch met another one (vanishing
    k-derivative of the pole condition).
    """

    param: Literal["flux", "alpha"]
    branch_id: int
    samples: list[tuple[float, Pole]] = field(default_factory=list)
    crossings: list[tuple[float, complex]] = field(default_factory=list)


@dataclass(frozen=True)
class SweepSpec:
    """Parameter sweep for trajectory tracing.

    ``max_step`` bounds the pole displacement in k between accepted samples;
    the parameter step adapts (halving down to ``min_fraction`` of the span)
    to respect it.
    """

    param: Literal["flux", "alpha"]
    start: float
    stop: float
    max_step: float = 0.1
    initial_steps: int = 100
    min_fraction: float = 1e-9


def _with_param(p: LassoParams, name: str, value: float) -> LassoParams:
    if name == "flux":
        return LassoParams(L=p.L, Phi=value, alpha=p.alpha, mu=p.mu, omega=p.omega)
    if name == "alpha":
        return LassoParams(L=p.L, Phi=p.Phi, alpha=value, mu=p.mu, omega=p.omega)
    raise ValueError(f"unknown sweep parameter {name!r}")


def pole_function(p: LassoParams) -> tuple[Callable[[complex], complex], Callable[[complex], complex]]:
    """Entire pole condition F(k) = D(k) sin(kL) and its k-derivative.

    F(k) = (1 - i mu k)(2k (cos Phi - cos kL) - alpha sin kL) + i omega^2 k sin kL;
    for the delta junction this is minus the reflection denominator.
    """
    if p.is_decoupled:
        raise ValueError("pole search needs a coupled junction")
    L, alpha, mu, w2 = p.L, p.alpha, p.mu, p.omega**2
    cphi = math.cos(p.Phi)

    def f(k: complex) -> complex:
        kl = k * L
        s, c = cmath.sin(kl), cmath.cos(kl)
        core = 2.0 * k * (cphi - c) - alpha * s
        return (1.0 - 1j * mu * k) * core + 1j * w2 * k * s

    def df(k: complex) -> complex:
        kl = k * L
        s, c = cmath.sin(kl), cmath.cos(kl)
        core = 2.0 * k * (cphi - c) - alpha * s
        dcore = 2.0 * (cphi - c) + 2.0 * k * L * s - alpha * L * c
        return -1j * mu * core + (1.0 - 1j * mu * k) * dcore + 1j * w2 * (s + k * L * c)

    return f, df


def _residual_scale(p: LassoParams, k: complex) -> float:
    kl = k * p.L
    s, c = abs(cmath.sin(kl)), abs(cmath.cos(kl))
    core = 2.0 * abs(k) * (abs(math.cos(p.Phi)) + c) + abs(p.alpha) * s
    return abs(1.0 - 1j * p.mu * k) * core + p.omega**2 * abs(k) * s + 1e-300


def _classify(p: LassoParams, k: complex) -> str:
    dist = p.Phi % math.pi
    dist = min(dist, math.pi - dist)
    if abs(k.imag) < _EMBEDDED_TOL and dist < _EMBEDDED_TOL:
        return "embedded-eigenvalue"
    return "resonance"


def find_pole(p: LassoParams, k_guess: complex, *, tol: float = 1e-12, max_iter: int = 80) -> Pole:
    """Damped Newton iteration on the rescaled pole condition.

    Converges to |F(k)| below tol times a local term-size scale.  Roots that
    land above the real axis by more than the classification tolerance are
    rejected (there are none); tiny positive imaginary parts are snapped to
    the axis.
    """
    f, df = pole_function(p)
    k = complex(k_guess)
    fk = f(k)
    for _ in range(max_iter):
        if abs(fk) <= tol * _residual_scale(p, k):
            break
        d = df(k)
        if d == 0:
            # Double zero: fall back to a square-root step off the stationary point.
            step = cmath.sqrt(2.0 * fk / _second_derivative(f, k))
        else:
            step = fk / d
        # Backtrack until the residual actually drops.
        for _ in range(25):
            trial = k - step
            ft = f(trial)
            if abs(ft) < abs(fk):
                k, fk = trial, ft
                break
            step *= 0.5
        else:
            raise ConvergenceError(
                f"pole iteration stalled at k = {k} (|F| = {abs(fk):.3e})",
                diagnostics={"k": k, "residual": abs(fk), "guess": complex(k_guess)},
            )
    else:
        raise ConvergenceError(
            f"pole iteration did not converge from {k_guess}",
            diagnostics={"k": k, "residual": abs(fk), "guess": complex(k_guess)},
        )
    if k.imag > _EMBEDDED_TOL:
        raise ConvergenceError(
            f"iteration converged into the open upper halfplane (k = {k}); "
            "the resolvent has no poles there",
            diagnostics={"k": k, "guess": complex(k_guess)},
        )
    if 0.0 < k.imag <= _EMBEDDED_TOL:
        k = complex(k.real, 0.0)
    if p.is_delta and p.alpha != 0.0 and abs(k.imag) > 1e-8:
        # Off-axis zeros cannot sit on the sin(kL) lattice for alpha != 0
        # (the imaginary axis n = 0 is exempt: virtual states live there).
        n_near = round(k.real * p.L / math.pi)
        if n_near >= 1 and abs(k.real * p.L - n_near * math.pi) < 1e-8:
            raise ConvergenceError(
                f"converged to a lattice momentum {k} with nonzero width at alpha != 0; "
                "this contradicts the pole structure",
                diagnostics={"k": k},
            )
    return Pole(k=k, kind=_classify(p, k), residual=abs(f(k)))


def _second_derivative(f, k, h=1e-6):
    return (f(k + h) - 2.0 * f(k) + f(k - h)) / (h * h)


def poles_ideal(p: LassoParams, window: tuple[float, float]) -> list[Pole]:
    """Closed-form poles for alpha = mu = 0 and any coupling omega.

    Solutions split into lattice poles at Re k = pi n / L (two per allowed
    parity for |omega| < sqrt(2) in the large-|cos Phi| regime, one per site
    for |omega| >= sqrt(2)) and, for |omega| < sqrt(2) only, a horizontal
    family at Im k = -artanh(omega^2/2)/L.  Poles with Re k inside ``window``
    are returned, sorted by real part.
    """
    if p.alpha != 0.0 or p.mu != 0.0:
        raise ValueError("closed-form poles need alpha = mu = 0")
    if p.omega == 0.0:
        raise ValueError("omega = 0 detaches the loop; no resonances exist")
    lo, hi = window
    if not (hi > lo >= 0.0):
        raise ValueError("window must satisfy 0 <= lo < hi")
    w2 = p.omega**2
    cphi = math.cos(p.Phi)
    out: list[Pole] = []

    def emit(kappa, eta):
        if lo <= kappa <= hi:
            k = complex(kappa, -eta)
            if abs(eta) < _EMBEDDED_TOL:
                k = complex(kappa, 0.0)
            f, _ = pole_function(p)
            out.append(Pole(k=k, kind=_classify(p, k), residual=abs(f(k))))

    # Lattice family: x = exp(eta L) solves
    # (1 - w2/2) x^2 - 2 s cphi x + (1 + w2/2) = 0 with s = (-1)^n.
    a_coef = 1.0 - 0.5 * w2
    c_coef = 1.0 + 0.5 * w2
    n_min = max(0, math.ceil(lo * p.L / math.pi))
    n_max = math.floor(hi * p.L / math.pi)
    for n in range(n_min, n_max + 1):
        s = -1.0 if n % 2 else 1.0
        disc = (s * cphi) ** 2 - a_coef * c_coef
        if disc < 0.0:
            continue
        sq = math.sqrt(disc)
        if a_coef != 0.0:
            candidates = [(s * cphi + sq) / a_coef, (s * cphi - sq) / a_coef]
        else:
            # Degenerate |omega| = sqrt(2): linear equation in x.
            candidates = [c_coef / (2.0 * s * cphi)] if s * cphi != 0.0 else []
        for x in candidates:
            if x >= 1.0 - 1e-12:
                emit(n * math.pi / p.L, math.log(max(x, 1.0)) / p.L)
    # Horizontal family: tanh(eta L) = w2/2, cos(kappa L) = 2 cphi / sqrt(4 - w2^2).
    if w2 < 2.0:
        arg = 2.0 * cphi / math.sqrt(4.0 - w2 * w2)
        if abs(arg) <= 1.0:
            eta = 0.5 * math.log((2.0 + w2) / (2.0 - w2)) / p.L
            base = math.acos(arg)
            for sign in (+1.0, -1.0):
                kl = sign * base
                m_min = math.ceil((lo * p.L - kl) / (2.0 * math.pi))
                m_max = math.floor((hi * p.L - kl) / (2.0 * math.pi))
                for m in range(m_min, m_max + 1):
                    emit((kl + 2.0 * math.pi * m) / p.L, eta)
    dedup: list[Pole] = []
    for pole in sorted(out, key=lambda q: (q.k.real, q.k.imag)):
        if not dedup or abs(pole.k - dedup[-1].k) > 1e-10:
            dedup.append(pole)
    return dedup


def poles_alpha_zero(p: LassoParams, window: tuple[float, float]) -> list[Pole]:
    """Closed-form poles of the ideal delta junction (alpha = 0, mu = 0, omega = 1)."""
    if not p.is_delta:
        raise ValueError("this solver is written for the delta junction; see poles_ideal")
    return poles_ideal(p, window)


def crossing_points(p: LassoParams, window: tuple[float, float]) -> list[complex]:
    """Branch collision points (pi n - i ln(3)/2)/L of the ideal delta junction."""
    lo, hi = window
    eta = 0.5 * math.log(3.0) / p.L
    n_min = max(0, math.ceil(lo * p.L / math.pi))
    n_max = math.floor(hi * p.L / math.pi)
    return [complex(n * math.pi / p.L, -eta) for n in range(n_min, n_max + 1)]


def _pole_function_extended(p: LassoParams, param: str):
    """F(k, t) with its analytic k- and parameter-derivatives for crossing search."""
    L, alpha0, mu, w2 = p.L, p.alpha, p.mu, p.omega**2
    cphi0 = math.cos(p.Phi)

    def pieces(k, t):
        cphi = cmath.cos(t) if param == "flux" else cphi0
        alpha = t if param == "alpha" else alpha0
        kl = k * L
        s, c = cmath.sin(kl), cmath.cos(kl)
        return cphi, alpha, s, c

    def f(k, t):
        cphi, alpha, s, c = pieces(k, t)
        core = 2.0 * k * (cphi - c) - alpha * s
        return (1.0 - 1j * mu * k) * core + 1j * w2 * k * s

    def fk(k, t):
        cphi, alpha, s, c = pieces(k, t)
        core = 2.0 * k * (cphi - c) - alpha * s
        dcore = 2.0 * (cphi - c) + 2.0 * k * L * s - alpha * L * c
        return -1j * mu * core + (1.0 - 1j * mu * k) * dcore + 1j * w2 * (s + k * L * c)

    def fkk(k, t):
        cphi, alpha, s, c = pieces(k, t)
        dcore = 2.0 * (cphi - c) + 2.0 * k * L * s - alpha * L * c
        ddcore = 4.0 * L * s + 2.0 * k * L * L * c + alpha * L * L * s
        return (
            -2j * mu * dcore
            + (1.0 - 1j * mu * k) * ddcore
            + 1j * w2 * L * (2.0 * c - k * L * s)
        )

    if param == "flux":

        def ft(k, t):
            kl = k * L
            return (1.0 - 1j * mu * k) * 2.0 * k * (-cmath.sin(t))

        def fkt(k, t):
            return -2.0 * cmath.sin(t) * (1.0 - 2j * mu * k)

    else:

        def ft(k, t):
            return (1.0 - 1j * mu * k) * (-cmath.sin(k * L))

        def fkt(k, t):
            kl = k * L
            return 1j * mu * cmath.sin(kl) - (1.0 - 1j * mu * k) * L * cmath.cos(kl)

    return f, fk, fkk, ft, fkt


def _locate_crossing(p: LassoParams, param: str, k0: complex, t0: float):
    """Newton on (F, dF/dk) = 0 over (k, t), t complexified; None if it strays."""
    f, fk, fkk, ft, fkt = _pole_function_extended(p, param)
    k, t = complex(k0), complex(t0)
    for _ in range(60):
        r1, r2 = f(k, t), fk(k, t)
        if abs(r1) + abs(r2) < 1e-13 * (_residual_scale(_as_real_param(p, param, t), k) + 1.0):
            break
        j11, j12 = fk(k, t), ft(k, t)
        j21, j22 = fkk(k, t), fkt(k, t)
        det = j11 * j22 - j12 * j21
        if det == 0:
            return None
        dk = (r1 * j22 - r2 * j12) / det
        dt = (j11 * r2 - j21 * r1) / det
        k, t = k - dk, t - dt
        if abs(k - k0) > 1.0 or abs(t - t0) > 1.0:
            return None
    else:
        return None
    if abs(t.imag) > 1e-8:
        return None
    return k, t.real


def _as_real_param(p: LassoParams, param: str, t: complex) -> LassoParams:
    return _with_param(p, param, float(t.real))


def _fan_candidates(p: LassoParams, center: complex, *, radius: float, tol: float = 1e-12):
    """Distinct converged poles seeded on a circle around a collision point.

    The clustering width follows the fan radius: close to a double zero the
    iteration only resolves roots to about sqrt(tol), so plain machine-level
    deduplication would mistake convergence noise for separate branches.
    """
    found: list[Pole] = []
    cluster = max(1e-5, 0.05 * radius)
    for j in range(8):
        seed = center + radius * cmath.exp(2j * math.pi * j / 8.0)
        try:
            pole = find_pole(p, seed, tol=tol)
        except ConvergenceError:
            continue
        if all(abs(pole.k - q.k) > cluster for q in found):
            found.append(pole)
    return sorted(found, key=lambda q: (q.k.real, q.k.imag))


def trace_trajectory(
    p: LassoParams,
    sweep: SweepSpec,
    seed: Pole,
    *,
    branch_id: int = 0,
    tol: float = 1e-12,
) -> Trajectory:
    """Predictor-corrector continuation of one pole branch over a parameter sweep.

    Secant prediction with a Newton corrector; the parameter step halves
    whenever the corrected pole moves more than ``sweep.max_step`` in k.
    Branch collisions (vanishing k-derivative of the pole condition) are
    located exactly by a two-variable Newton iteration and recorded as
    crossing events; past a collision the continuation re-seeds from a
    circular fan of guesses and ``branch_id`` picks deterministically among
    the emerging branches.  A corrector failure at the minimum step raises
    BranchLossError carrying the partial trajectory.
    """
    span = sweep.stop - sweep.start
    if span == 0.0:
        raise ValueError("sweep has zero extent")
    sgn = math.copysign(1.0, span)
    traj = Trajectory(param=sweep.param, branch_id=branch_id)
    t = sweep.start
    pole = find_pole(_with_param(p, sweep.param, t), seed.k, tol=tol)
    traj.samples.append((t, pole))
    base_step = span / sweep.initial_steps
    step = base_step
    min_step = abs(span) * sweep.min_fraction
    prev: Optional[tuple[float, complex]] = None
    pending_cross: Optional[tuple[float, complex]] = None

    def correct(t_next, k_pred):
        try:
            return find_pole(_with_param(p, sweep.param, t_next), k_pred, tol=tol)
        except ConvergenceError:
            return None

    while (sweep.stop - t) * sgn > 1e-14 * abs(span):
        step = math.copysign(min(abs(step), abs(sweep.stop - t)), span)
        t_next = t + step
        if prev is not None and abs(t - prev[0]) > 0:
            k_pred = pole.k + (pole.k - prev[1]) * (t_next - t) / (t - prev[0])
        else:
            k_pred = pole.k
        cand = correct(t_next, k_pred)

        def reseed(t_star, k_star):
            radius = max(1e-3, 1.5 * math.sqrt(abs(t_next - t_star)))
            fan = _fan_candidates(
                _with_param(p, sweep.param, t_next), k_star, radius=radius, tol=tol
            )
            return fan[branch_id % len(fan)] if fan else None

        reseeded = False
        if pending_cross is not None and (t_next - pending_cross[0]) * sgn > 0:
            # Just passed a collision: re-seed among the emerging branches.
            # The pending marker survives rejected steps and fans that cannot
            # resolve the emerging branches yet, so the selection re-fires
            # until it actually chooses.
            t_star, k_star = pending_cross
            radius = max(1e-3, 1.5 * math.sqrt(abs(t_next - t_star)))
            fan = _fan_candidates(
                _with_param(p, sweep.param, t_next), k_star, radius=radius, tol=tol
            )
            if len(fan) >= 2 or (len(fan) == 1 and abs(t_next - t_star) > 1e-8 * abs(span)):
                cand = fan[branch_id % len(fan)]
                reseeded = True
        if cand is None or abs(cand.k - pole.k) > sweep.max_step:
            if abs(step) * 0.5 >= min_step:
                step *= 0.5
                continue
            raise BranchLossError(
                f"corrector lost the branch near {sweep.param} = {t_next}",
                trajectory=traj,
                diagnostics={"param": t_next, "last_pole": pole.k},
            )
        if reseeded:
            pending_cross = None
        # Collision watch: distance of the current root to a double zero is
        # roughly |F'| / |F''|.
        _, fk, fkk, _, _ = _pole_function_extended(p, sweep.param)
        denom = abs(fkk(cand.k, t_next)) + 1e-300
        closeness = abs(fk(cand.k, t_next)) / denom
        if closeness < 0.3:
            located = _locate_crossing(p, sweep.param, cand.k, t_next)
            if located is not None:
                k_star, t_star = located
                fresh = all(
                    abs(k_star - kc) > 1e-6 or abs(t_star - tc) > 1e-9
                    for tc, kc in traj.crossings
                )
                near = abs(k_star - cand.k) < 5 * max(sweep.max_step, 0.1) and abs(
                    t_star - t_next
                ) < 0.25 * abs(span)
                inside = (t_star - sweep.start) * sgn > -1e-12 * abs(span) and (
                    sweep.stop - t_star
                ) * sgn > -1e-12 * abs(span)
                if fresh and near and inside:
                    traj.crossings.append((t_star, k_star))
                    behind = (t_next - t_star) * sgn
                    if behind <= 0.25 * abs(step):
                        # Collision ahead of or essentially at this sample:
                        # re-seed once the next step passes it.
                        pending_cross = (t_star, k_star)
                    else:
                        # Detected only after passing: re-seed right here.
                        picked = reseed(t_star, k_star)
                        if picked is not None:
                            cand = picked
                            reseeded = True
        prev = None if reseeded else (t, pole.k)
        t, pole = t_next, cand
        traj.samples.append((t, pole))
        if abs(step) < abs(base_step):
            step *= 2.0
    return traj
