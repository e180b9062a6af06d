"""On-shell S-matrix of a finite metric graph with attached halfline leads.

The scattering problem is reduced to a small linear system in the vertex
values and one outgoing amplitude per lead bundle: per-link Dirichlet
solutions eliminate the link derivatives through their Wronskians, the vertex
couplings supply the equations.  Supported couplings per vertex: a plain
delta condition over all incident links and leads, a two-bundle coupling with
separate internal/external strengths and a cross constant, and Robin-type
ends at degree-one boundary vertices.  Magnetic phases are carried per link;
only their cycle totals affect the physics.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import LassoParams, Momentum
from .errors import DirichletSpectrumError, GraphSemanticError, InternalConsistencyError

_W_TOL = 1e-12


@dataclass(frozen=True)
class VertexSpec:
    """One graph vertex: internal coupling, attached leads, or a boundary angle.

    ``alpha`` is the delta strength over the incident internal links.  With
    ``leads > 0`` and no bundle constants the delta condition extends over the
    leads as well; giving both ``alpha_ext`` and ``gamma`` switches to the
    two-bundle coupling (``gamma = 0`` leaves the bundles decoupled, each with
    its own delta constant).  ``boundary_omega`` marks a degree-one boundary
    vertex with value*cos(omega) + derivative*sin(omega) = 0; integer and
    half-integer multiples of pi give Dirichlet and Neumann ends.
    """

    id: str
    alpha: float = 0.0
    leads: int = 0
    alpha_ext: Optional[float] = None
    gamma: Optional[float] = None
    boundary_omega: Optional[float] = None

    def validate(self):
        if self.leads < 0:
            raise GraphSemanticError(f"vertex {self.id}: negative lead count")
        if self.boundary_omega is not None:
            if self.leads or self.alpha_ext is not None or self.gamma is not None:
                raise GraphSemanticError(
                    f"vertex {self.id}: boundary vertices carry only the boundary angle"
                )
            if self.alpha != 0.0:
                raise GraphSemanticError(
                    f"vertex {self.id}: boundary vertices take omega, not an alpha coupling"
                )
        if (self.alpha_ext is None) != (self.gamma is None):
            raise GraphSemanticError(
                f"vertex {self.id}: bundle coupling needs both alpha_ext and gamma"
            )
        if self.gamma is not None:
            if self.leads == 0:
                raise GraphSemanticError(
                    f"vertex {self.id}: bundle coupling is meaningless without leads"
                )
            if self.gamma != 0.0:
                if self.alpha == 0.0 or self.alpha_ext == 0.0:
                    raise GraphSemanticError(
                        f"vertex {self.id}: cross-coupled bundles need nonzero alpha and alpha_ext"
                    )

    @property
    def is_boundary(self) -> bool:
        return self.boundary_omega is not None

    @property
    def is_bundled(self) -> bool:
        return self.gamma is not None


@dataclass(frozen=True)
class LinkSpec:
    """Internal link between two vertices.

    ``potential`` is a piecewise-constant profile ((value, width), ...) read
    from the first endpoint; widths must add up to the length (empty means a
    free link).  ``phase`` is the line integral of the vector potential along
    the link, oriented from ``ends[0]`` to ``ends[1]``.
    """

    ends: tuple[str, str]
    length: float
    potential: tuple[tuple[float, float], ...] = ()
    phase: float = 0.0

    def validate(self):
        if not (self.length > 0 and math.isfinite(self.length)):
            raise GraphSemanticError(f"link {self.ends}: length must be positive")
        if self.potential:
            widths = [w for _, w in self.potential]
            if any(w <= 0 for w in widths):
                raise GraphSemanticError(f"link {self.ends}: potential widths must be positive")
            if abs(sum(widths) - self.length) > 1e-9 * max(1.0, self.length):
                raise GraphSemanticError(
                    f"link {self.ends}: potential widths sum to {sum(widths)}, not the length"
                )
            if any(not math.isfinite(v) for v, _ in self.potential):
                raise GraphSemanticError(f"link {self.ends}: potential values must be finite")

    def segments(self) -> tuple[tuple[float, float], ...]:
        return self.potential if self.potential else ((0.0, self.length),)

    def reversed(self) -> "LinkSpec":
        return LinkSpec(
            ends=(self.ends[1], self.ends[0]),
            length=self.length,
            potential=tuple(reversed(self.segments())) if self.potential else (),
            phase=-self.phase,
        )

    def is_self_loop(self) -> bool:
        return self.ends[0] == self.ends[1]


@dataclass(frozen=True)
class GraphSpec:
    """A finite connected metric graph with lead bundles."""

    vertices: tuple[VertexSpec, ...]
    links: tuple[LinkSpec, ...]

    def __init__(self, vertices: Sequence[VertexSpec], links: Sequence[LinkSpec]):
        object.__setattr__(self, "vertices", tuple(vertices))
        object.__setattr__(self, "links", tuple(links))

    def vertex(self, vid: str) -> VertexSpec:
        for v in self.vertices:
            if v.id == vid:
                return v
        raise KeyError(vid)

    def degree(self, vid: str) -> int:
        return sum((l.ends[0] == vid) + (l.ends[1] == vid) for l in self.links)

    def validate(self):
        if not self.vertices:
            raise GraphSemanticError("graph has no vertices")
        ids = [v.id for v in self.vertices]
        if len(set(ids)) != len(ids):
            raise GraphSemanticError("duplicate vertex ids")
        known = set(ids)
        for l in self.links:
            l.validate()
            for e in l.ends:
                if e not in known:
                    raise GraphSemanticError(f"link references undefined vertex {e!r}")
        for v in self.vertices:
            v.validate()
            if v.is_boundary and self.degree(v.id) != 1:
                raise GraphSemanticError(
                    f"vertex {v.id}: boundary vertices must have exactly one incident link"
                )
        if len(self.vertices) > 1:
            adj: dict[str, set[str]] = {v.id: set() for v in self.vertices}
            for l in self.links:
                adj[l.ends[0]].add(l.ends[1])
                adj[l.ends[1]].add(l.ends[0])
            seen = {ids[0]}
            stack = [ids[0]]
            while stack:
                for nb in adj[stack.pop()]:
                    if nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
            if seen != known:
                raise GraphSemanticError(
                    f"graph is not connected; unreachable vertices: {sorted(known - seen)}"
                )

    def lead_count(self) -> int:
        return sum(v.leads for v in self.vertices)


def _fresh_id(base: str, used: set[str]) -> str:
    i = 0
    while f"{base}{i}" in used:
        i += 1
    used.add(f"{base}{i}")
    return f"{base}{i}"


def _split_profile(link: LinkSpec, cuts: Sequence[float]):
    """Split the piecewise potential of ``link`` at interior positions ``cuts``."""
    bounds = [0.0, *cuts, link.length]
    out = []
    for a, b in zip(bounds, bounds[1:]):
        pieces = []
        pos = 0.0
        for val, width in link.segments():
            lo, hi = pos, pos + width
            ov_lo, ov_hi = max(lo, a), min(hi, b)
            if ov_hi - ov_lo > 1e-12 * link.length:
                pieces.append((val, ov_hi - ov_lo))
            pos = hi
        total = sum(w for _, w in pieces)
        if pieces and total != b - a:
            val, w = pieces[-1]
            pieces[-1] = (val, w + (b - a) - total)
        out.append(tuple(pieces) if link.potential else ())
    return out


def normalize(g: GraphSpec) -> GraphSpec:
    """Insert ideal (alpha = 0) vertices so no self-loops or parallel links remain.

    A self-loop becomes three links through two inserted vertices; the second
    and later members of a parallel bundle become two links through one
    inserted vertex.  Phases and potentials are split proportionally, a gauge
    choice without effect on the S-matrix.
    """
    g.validate()
    used = {v.id for v in g.vertices}
    vertices = list(g.vertices)
    links: list[LinkSpec] = []
    seen_pairs: set[frozenset] = set()

    def add_plain(link):
        pair = frozenset(link.ends)
        if pair in seen_pairs:
            split_two(link)
        else:
            seen_pairs.add(pair)
            links.append(link)

    def split_two(link):
        mid = _fresh_id("__s", used)
        vertices.append(VertexSpec(id=mid))
        half = 0.5 * link.length
        prof = _split_profile(link, [half])
        add_plain(LinkSpec((link.ends[0], mid), half, prof[0], 0.5 * link.phase))
        add_plain(LinkSpec((mid, link.ends[1]), half, prof[1], 0.5 * link.phase))

    for link in g.links:
        if link.is_self_loop():
            a = _fresh_id("__s", used)
            b = _fresh_id("__s", used)
            vertices.append(VertexSpec(id=a))
            vertices.append(VertexSpec(id=b))
            third = link.length / 3.0
            prof = _split_profile(link, [third, 2 * third])
            add_plain(LinkSpec((link.ends[0], a), third, prof[0], link.phase / 3.0))
            add_plain(LinkSpec((a, b), third, prof[1], link.phase / 3.0))
            add_plain(LinkSpec((b, link.ends[1]), link.length - 2 * third, prof[2], link.phase / 3.0))
        else:
            add_plain(link)

    out = GraphSpec(vertices, links)
    out.validate()
    return out


@dataclass(frozen=True)
class DirichletData:
    """Boundary data of the two normalized Dirichlet solutions of one link.

    ``u`` vanishes at the far end (x = length) with unit derivative there,
    ``v`` at x = 0 with unit derivative (or carries the boundary-angle data
    when the 0-end is a boundary vertex).  The Wronskian ``w`` equals
    -v(length), and also u(0) for interior links.
    """

    u0: complex
    du0: complex
    v_len: complex
    dv_len: complex
    w: complex
    boundary: bool = False


def _segment_matrix(k2: complex, val: float, width: float) -> np.ndarray:
    """Fundamental solution matrix over one constant-potential segment."""
    q2 = k2 - val
    q = cmath.sqrt(q2)
    z = q * width
    if abs(z) < 1e-6:
        # sin(z)/q and q sin(z) by series; keeps the q -> 0 segment exact.
        z2 = z * z
        s_over = width * (1.0 - z2 / 6.0 + z2 * z2 / 120.0)
        c = 1.0 - z2 / 2.0 + z2 * z2 / 24.0
        return np.array([[c, s_over], [-q2 * s_over, c]], dtype=complex)
    c = cmath.cos(z)
    s = cmath.sin(z)
    return np.array([[c, s / q], [-q * s, c]], dtype=complex)


def dirichlet_data(link: LinkSpec, k: Momentum, *, boundary_omega: Optional[float] = None) -> DirichletData:
    """Dirichlet-solution boundary data of one link at momentum k != 0.

    With ``boundary_omega`` the 0-end solution ``v`` starts from
    (sin omega, -cos omega) instead of (0, 1), so it satisfies the boundary
    condition there.  A vanishing Wronskian is a valid output; callers decide
    whether it is an error.
    """
    k = complex(k)
    if k == 0:
        raise ValueError("dirichlet_data needs k != 0")
    k2 = k * k
    m = np.eye(2, dtype=complex)
    for val, width in link.segments():
        m = _segment_matrix(k2, val, width) @ m
    if boundary_omega is None:
        init = np.array([0.0, 1.0], dtype=complex)
    else:
        init = np.array([math.sin(boundary_omega), -math.cos(boundary_omega)], dtype=complex)
    v_end = m @ init
    return DirichletData(
        u0=-m[0, 1],
        du0=m[0, 0],
        v_len=v_end[0],
        dv_len=v_end[1],
        w=-v_end[0],
        boundary=boundary_omega is not None,
    )


@dataclass
class SMatrixResult:
    """On-shell scattering matrix with diagnostics.

    ``channels`` orders rows/columns as (vertex id, lead index) with vertex
    ids sorted.  Unitarity and reciprocity residuals are max-abs entries of
    S*S - 1 and S - S^t; they are reported, not enforced.  The condition
    estimate of the underlying linear system is attached when above 1e12.
    """

    channels: list[tuple[str, int]]
    s: np.ndarray
    unitarity_residual: float
    reciprocity_residual: float
    vertex_values: dict[str, np.ndarray]
    condition_estimate: Optional[float] = None


class _Assembly:
    """Index maps and per-link Dirichlet data for one (graph, momentum) pair."""

    def __init__(self, g: GraphSpec, k: complex):
        g.validate()
        self.graph = g
        self.k = k
        self.vmap = {v.id: v for v in g.vertices}
        self.boundary = {v.id for v in g.vertices if v.is_boundary}
        self.unknown_vertices = sorted(v.id for v in g.vertices if not v.is_boundary)
        self.lead_vertices = [vid for vid in self.unknown_vertices if self.vmap[vid].leads > 0]
        self.psi_index = {vid: i for i, vid in enumerate(self.unknown_vertices)}
        n = len(self.unknown_vertices)
        self.b_index = {vid: n + i for i, vid in enumerate(self.lead_vertices)}
        self.size = n + len(self.lead_vertices)
        self.channels = [
            (vid, m) for vid in sorted(self.lead_vertices) for m in range(self.vmap[vid].leads)
        ]
        self.link_data = []
        for link in g.links:
            if link.is_self_loop():
                raise GraphSemanticError(
                    "assembly needs a normalized graph (self-loop found); call normalize first"
                )
            oriented = link
            if link.ends[1] in self.boundary:
                if link.ends[0] in self.boundary:
                    raise GraphSemanticError(
                        f"link {link.ends} joins two boundary vertices; nothing couples it"
                    )
                oriented = link.reversed()
            omega = None
            if oriented.ends[0] in self.boundary:
                omega = self.vmap[oriented.ends[0]].boundary_omega
            data = dirichlet_data(oriented, k, boundary_omega=omega)
            w_scale = max(oriented.length, 1.0 / abs(k))
            if abs(data.w) < _W_TOL * w_scale:
                raise DirichletSpectrumError(
                    f"momentum {k} lies in the Dirichlet spectrum of link {link.ends} "
                    f"(|W| = {abs(data.w):.3e})"
                )
            self.link_data.append((oriented, data))

    def flow_coefficients(self, vid: str) -> dict[str, complex]:
        """Coefficients, by unknown vertex, of the outward internal-derivative sum."""
        coeffs: dict[str, complex] = {}

        def add(key, val):
            coeffs[key] = coeffs.get(key, 0.0) + val

        for oriented, data in self.link_data:
            a, b = oriented.ends
            if vid == a and a not in self.boundary:
                add(a, data.du0 / data.w)
                if b not in self.boundary:
                    add(b, -cmath.exp(1j * oriented.phase) / data.w)
            if vid == b:
                add(b, data.dv_len / data.w)
                if a not in self.boundary:
                    add(a, -cmath.exp(-1j * oriented.phase) / data.w)
        return coeffs


def _build_matrix(asm: _Assembly) -> np.ndarray:
    mat = np.zeros((asm.size, asm.size), dtype=complex)
    ik = 1j * asm.k
    row = 0
    for vid in asm.unknown_vertices:
        v = asm.vmap[vid]
        flow = asm.flow_coefficients(vid)
        if v.leads == 0:
            for key, val in flow.items():
                mat[row, asm.psi_index[key]] += val
            mat[row, asm.psi_index[vid]] -= v.alpha
            row += 1
            continue
        bcol = asm.b_index[vid]
        if not v.is_bundled:
            mat[row, asm.psi_index[vid]] = 1.0
            mat[row, bcol] = -1.0
            row += 1
            for key, val in flow.items():
                mat[row, asm.psi_index[key]] += val
            mat[row, asm.psi_index[vid]] -= v.alpha
            mat[row, bcol] += ik * v.leads
            row += 1
        elif v.gamma == 0.0:
            for key, val in flow.items():
                mat[row, asm.psi_index[key]] += val
            mat[row, asm.psi_index[vid]] -= v.alpha
            row += 1
            mat[row, bcol] = ik * v.leads - v.alpha_ext
            row += 1
        else:
            mat[row, asm.psi_index[vid]] += 1.0
            for key, val in flow.items():
                mat[row, asm.psi_index[key]] -= val / v.alpha
            mat[row, bcol] -= v.gamma * ik * v.leads
            row += 1
            mat[row, bcol] += 1.0 - ik * v.leads / v.alpha_ext
            for key, val in flow.items():
                mat[row, asm.psi_index[key]] -= v.gamma * val
            row += 1
    if row != asm.size:
        raise InternalConsistencyError("assembled row count does not match unknown count")
    return mat


def _build_rhs(asm: _Assembly, incoming: np.ndarray) -> np.ndarray:
    rhs = np.zeros(asm.size, dtype=complex)
    ik = 1j * asm.k
    a_by_vertex: dict[str, np.ndarray] = {}
    for (vid, m), val in zip(asm.channels, incoming):
        a_by_vertex.setdefault(vid, np.zeros(asm.vmap[vid].leads, dtype=complex))[m] = val
    row = 0
    for vid in asm.unknown_vertices:
        v = asm.vmap[vid]
        if v.leads == 0:
            row += 1
            continue
        a = a_by_vertex.get(vid, np.zeros(v.leads, dtype=complex))
        a1 = a[0]
        a_sum = a.sum()
        if not v.is_bundled:
            rhs[row] = a1
            rhs[row + 1] = 2.0 * ik * a_sum - ik * v.leads * a1
        elif v.gamma == 0.0:
            rhs[row + 1] = (v.alpha_ext - ik * v.leads) * a1 + 2.0 * ik * a_sum
        else:
            rhs[row] = v.gamma * (ik * v.leads * a1 - 2.0 * ik * a_sum)
            rhs[row + 1] = -a1 + (ik * v.leads * a1 - 2.0 * ik * a_sum) / v.alpha_ext
        row += 2
    return rhs


def assemble_system(g: GraphSpec, k: Momentum, incoming=None):
    """Linear system (matrix, rhs) at momentum k for a normalized graph.

    The unknown vector stacks psi_j over non-boundary vertices (ids sorted)
    followed by b_{j,1} over lead-bearing vertices; ``incoming`` gives one
    amplitude per channel in (vertex id, lead index) order, defaulting to
    zeros.  Complex k is accepted as the analytic continuation of the real-k
    system.  Momenta in the links' Dirichlet spectrum raise
    DirichletSpectrumError.
    """
    asm = _Assembly(g, complex(k))
    if incoming is None:
        incoming = np.zeros(len(asm.channels), dtype=complex)
    incoming = np.asarray(incoming, dtype=complex)
    if incoming.shape != (len(asm.channels),):
        raise ValueError(f"incoming vector must have {len(asm.channels)} entries")
    return _build_matrix(asm), _build_rhs(asm, incoming)


def _recover_outgoing(asm: _Assembly, solution: np.ndarray, incoming: np.ndarray) -> np.ndarray:
    out = np.zeros(len(asm.channels), dtype=complex)
    a_first = {vid: val for (vid, m), val in zip(asm.channels, incoming) if m == 0}
    for i, (vid, m) in enumerate(asm.channels):
        b1 = solution[asm.b_index[vid]]
        out[i] = b1 if m == 0 else b1 + a_first[vid] - incoming[i]
    return out


def smatrix(g: GraphSpec, k) -> SMatrixResult:
    """Solve the assembled system for every incoming channel at real k > 0."""
    k = float(k)
    if not (k > 0 and math.isfinite(k)):
        raise ValueError("smatrix needs real k > 0; use assemble_system for continuation")
    g = normalize(g)
    if g.lead_count() == 0:
        raise GraphSemanticError("graph has no leads; there are no scattering channels")
    asm = _Assembly(g, complex(k))
    mat = _build_matrix(asm)
    nch = len(asm.channels)
    eye = np.eye(nch, dtype=complex)
    rhs = np.column_stack([_build_rhs(asm, eye[:, col]) for col in range(nch)])
    try:
        sol = np.linalg.solve(mat, rhs)
    except np.linalg.LinAlgError as exc:
        raise InternalConsistencyError(f"singular scattering system at k = {k}: {exc}") from exc
    s = np.column_stack(
        [_recover_outgoing(asm, sol[:, col], eye[:, col]) for col in range(nch)]
    )
    unit = float(np.max(np.abs(s.conj().T @ s - np.eye(nch))))
    recip = float(np.max(np.abs(s - s.T)))
    cond = float(np.linalg.cond(mat))
    values = {vid: sol[asm.psi_index[vid], :].copy() for vid in asm.unknown_vertices}
    return SMatrixResult(
        channels=asm.channels,
        s=s,
        unitarity_residual=unit,
        reciprocity_residual=recip,
        vertex_values=values,
        condition_estimate=cond if cond > 1e12 else None,
    )


def graph_part_matrix(g: GraphSpec, k: Momentum) -> tuple[list[str], np.ndarray]:
    """The vertices-only operator h(k): coupling terms of the vertex equations.

    Off-diagonal entries are exp(i*phase)/W over the connecting link, diagonal
    entries collect -v'(l)/W from each incident link end (self-loops
    contribute both of their ends and their cycle phase).  Hermitian at real k
    for real potentials.  Works on the raw graph, self-loops included.
    """
    g.validate()
    k = complex(k)
    order = sorted(v.id for v in g.vertices)
    idx = {vid: i for i, vid in enumerate(order)}
    h = np.zeros((len(order), len(order)), dtype=complex)
    for link in g.links:
        data = dirichlet_data(link, k)
        w_scale = max(link.length, 1.0 / abs(k))
        if abs(data.w) < _W_TOL * w_scale:
            raise DirichletSpectrumError(
                f"momentum {k} lies in the Dirichlet spectrum of link {link.ends}"
            )
        a, b = link.ends
        if link.is_self_loop():
            i = idx[a]
            h[i, i] -= (
                data.du0 + data.dv_len - cmath.exp(1j * link.phase) - cmath.exp(-1j * link.phase)
            ) / data.w
            continue
        ia, ib = idx[a], idx[b]
        h[ia, ia] -= data.du0 / data.w
        h[ib, ib] -= data.dv_len / data.w
        h[ia, ib] += cmath.exp(1j * link.phase) / data.w
        h[ib, ia] += cmath.exp(-1j * link.phase) / data.w
    return order, h


def ideal_smatrix_via_h(g: GraphSpec, k) -> SMatrixResult:
    """S = -(h + ik)/(h - ik) for graphs with one ideal-delta lead per vertex.

    Requires every vertex to carry exactly one lead with a plain delta
    coupling of strength zero and no boundary vertices; self-loops are
    handled without splitting.  Must agree with :func:`smatrix`.
    """
    k = float(k)
    if not (k > 0 and math.isfinite(k)):
        raise ValueError("ideal_smatrix_via_h needs real k > 0")
    for v in g.vertices:
        if v.leads != 1 or v.alpha != 0.0 or v.is_bundled or v.is_boundary:
            raise ValueError(
                f"vertex {v.id}: the graph-part route needs exactly one ideal-delta lead per vertex"
            )
    order, h = graph_part_matrix(g, k)
    n = len(order)
    ik = 1j * k
    lhs = h - ik * np.eye(n)
    try:
        s = -np.linalg.solve(lhs, h + ik * np.eye(n))
        psi = np.linalg.solve(lhs, -2.0 * ik * np.eye(n))
    except np.linalg.LinAlgError as exc:
        raise InternalConsistencyError(f"singular graph-part system at k = {k}: {exc}") from exc
    unit = float(np.max(np.abs(s.conj().T @ s - np.eye(n))))
    recip = float(np.max(np.abs(s - s.T)))
    return SMatrixResult(
        channels=[(vid, 0) for vid in order],
        s=s,
        unitarity_residual=unit,
        reciprocity_residual=recip,
        vertex_values={vid: psi[i, :].copy() for i, vid in enumerate(order)},
        condition_estimate=None,
    )


def lasso_as_graph(p: LassoParams, *, bundled: bool = False) -> GraphSpec:
    """The loop-plus-lead model as a two-vertex graph (loop split in halves).

    With ``bundled`` the junction uses the two-bundle coupling equivalent to
    the (alpha, mu, omega) junction: alpha_int = alpha, gamma = omega/alpha,
    alpha_ext = alpha/(mu*alpha + omega**2); this needs alpha != 0 and
    mu*alpha + omega**2 != 0.  Without it the junction is the plain delta of
    strength alpha (mu = 0, omega = 1 only).
    """
    if p.is_decoupled:
        raise ValueError("a detached junction has no scattering graph")
    if bundled:
        denom = p.mu * p.alpha + p.omega**2
        if p.alpha == 0.0 or denom == 0.0:
            raise ValueError("bundled junction translation needs alpha != 0 and mu*alpha + omega^2 != 0")
        junction = VertexSpec(
            id="jn",
            alpha=p.alpha,
            leads=1,
            alpha_ext=p.alpha / denom,
            gamma=p.omega / p.alpha,
        )
    else:
        if not p.is_delta:
            raise ValueError("plain-delta translation needs mu = 0 and omega = 1; use bundled=True")
        junction = VertexSpec(id="jn", alpha=p.alpha, leads=1)
    aux = VertexSpec(id="mid")
    half = 0.5 * p.L
    return GraphSpec(
        vertices=[junction, aux],
        links=[
            LinkSpec(("jn", "mid"), half, (), 0.5 * p.Phi),
            LinkSpec(("mid", "jn"), half, (), 0.5 * p.Phi),
        ],
    )


def lasso_as_self_loop(p: LassoParams) -> GraphSpec:
    """Single-vertex form of the loop-plus-lead model, loop kept as a self-loop."""
    if p.is_decoupled:
        raise ValueError("a detached junction has no scattering graph")
    if not p.is_delta:
        raise ValueError("the self-loop form is written for the plain delta junction")
    return GraphSpec(
        vertices=[VertexSpec(id="jn", alpha=p.alpha, leads=1)],
        links=[LinkSpec(("jn", "jn"), p.L, (), p.Phi)],
    )
