"""Radial grids, piecewise-linear profiles and the dense operator table.

The operator is assembled row by row by collocation at the grid nodes:

    (A u)_i ≈ c_{N,s} p.v. ∫_0^1 (u(r_i) - u(ρ)) ρ^(N-1) J(r_i, ρ) dρ.

Away from r_i the profile is the piecewise-linear interpolant and the integral is
written in difference form, so every row annihilates constants by
construction.  On the symmetric window |ρ - r_i| < η, η = min(h_-, h_+), the
profile is replaced by its three-point quadratic, whose odd part cancels in the
principal value; only the moments

    Q_i = ∫_{-η}^{η} δ² K dδ,    D_i = ∫_0^η δ (K(r_i+δ) - K(r_i-δ)) dδ

are needed, computed with mirrored node pairs on geometrically shrinking
levels.  The window is what keeps s = 1/2 finite: a piecewise-linear profile
with a kink at the collocation node has a logarithmically divergent s = 1/2
integral.

Finally the table is symmetrized with respect to the nodal ball measures m_i
(m_i A_ij = m_j A_ji), which makes Σ_i m_i (A u)_i = 0 exactly, the discrete
counterpart of testing the equation against the constant 1.
"""

import hashlib
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, PreconditionError
from .kernel import FracOrder, KernelEvaluator, dyda_constant
from .special import sphere_area

MAX_NODES = 4096
DYDA_BAND = 0.9


def graded_nodes(m, beta):
    """r_i = 1 - ((m - i)/m)^beta, i = 0..m (no size check)."""
    i = np.arange(m + 1, dtype=float)
    r = 1.0 - ((m - i) / m) ** beta
    r[0], r[-1] = 0.0, 1.0
    return r


@dataclass(frozen=True, eq=False)
class RadialGrid:
    dim: int
    nodes: np.ndarray
    beta: float = 1.0

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise ConfigurationError("a grid needs at least two nodes")
        if nodes[0] != 0.0 or nodes[-1] != 1.0:
            raise ConfigurationError("grid must start at 0 and end at 1")
        if np.any(np.diff(nodes) <= 0.0):
            raise ConfigurationError("grid nodes must be strictly increasing (no duplicates)")
        if int(self.dim) != self.dim or self.dim < 2:
            raise ConfigurationError(f"dim must be an integer >= 2, got {self.dim}")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "dim", int(self.dim))

    @property
    def node_count(self):
        return self.nodes.size

    @property
    def m(self):
        """Index of the last node, M."""
        return self.nodes.size - 1

    @property
    def mass_weights(self):
        """m_j = ∫_{B1} φ_j dx for the hat functions φ_j (exact)."""
        cached = self.__dict__.get("_mass")
        if cached is None:
            cached = _hat_masses(self.nodes, self.dim)
            cached.setflags(write=False)
            object.__setattr__(self, "_mass", cached)
        return cached

    def dual_cell_measures(self):
        """Ball measure of the shell [mid(r_{i-1}, r_i), mid(r_i, r_{i+1})] per node."""
        r = self.nodes
        edges = np.concatenate(([0.0], 0.5 * (r[1:] + r[:-1]), [1.0]))
        return sphere_area(self.dim - 1) / self.dim * np.diff(edges ** self.dim)

    def key(self):
        return hashlib.sha256(self.nodes.tobytes()).hexdigest()[:16]

    def __eq__(self, other):
        return (isinstance(other, RadialGrid) and self.dim == other.dim
                and np.array_equal(self.nodes, other.nodes))

    def __hash__(self):
        return hash((self.dim, self.key()))


def build_grid(m, beta, dim):
    """Graded grid with m+1 nodes clustered toward r = 1."""
    if int(m) != m or m < 8:
        raise ConfigurationError(f"M must be an integer >= 8, got {m}")
    if m > MAX_NODES:
        raise ConfigurationError(f"M must not exceed {MAX_NODES}")
    if beta < 1.0:
        raise ConfigurationError(f"grading exponent must be >= 1, got {beta}")
    return RadialGrid(dim=dim, nodes=graded_nodes(int(m), float(beta)), beta=float(beta))


def _hat_masses(r, dim):
    x, w = np.polynomial.legendre.leggauss(dim // 2 + 2)
    a, b = r[:-1], r[1:]
    h = b - a
    t = 0.5 * h[:, None] * (x[None, :] + 1.0) + a[:, None]
    wt = 0.5 * h[:, None] * w[None, :] * t ** (dim - 1) * sphere_area(dim - 1)
    right = (t - a[:, None]) / h[:, None]
    out = np.zeros(r.size)
    out[:-1] += (wt * (1.0 - right)).sum(axis=1)
    out[1:] += (wt * right).sum(axis=1)
    return out


@dataclass(frozen=True, eq=False)
class RadialProfile:
    grid: RadialGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float)
        if vals.shape != (self.grid.node_count,):
            raise ConfigurationError(
                f"profile needs {self.grid.node_count} values, got {vals.shape}")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_function(cls, grid, fn):
        return cls(grid, np.asarray(fn(grid.nodes), dtype=float) * np.ones(grid.node_count))

    def __call__(self, r):
        return np.interp(r, self.grid.nodes, self.values)

    def ball_integral(self):
        """∫_{B1} u dx of the piecewise-linear interpolant."""
        return float(np.dot(self.grid.mass_weights, self.values))

    def with_values(self, values):
        return RadialProfile(self.grid, values)


@dataclass(frozen=True)
class AssemblyQuadrature:
    """Quadrature controls for one operator row.

    ``nodes`` Gauss points per ρ-panel, ``levels`` geometric halvings of the
    near window (ratio 1/2), plus the angular quadrature of the kernel.
    """

    nodes: int = 8
    levels: int = 20
    angular_nodes: int = 8
    angular_panel_length: float = 1.0

    def __post_init__(self):
        if self.nodes < 4 or self.angular_nodes < 4:
            raise ConfigurationError("quadrature needs at least 4 nodes per panel")
        if self.levels < 1:
            raise ConfigurationError("near window needs at least one level")

    def digest(self):
        text = f"{self.nodes}:{self.levels}:{self.angular_nodes}:{self.angular_panel_length!r}"
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    grid: RadialGrid
    order: FracOrder
    entries: np.ndarray
    quadrature_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.grid.node_count
        ent = np.array(self.entries, dtype=float)
        if ent.shape != (n, n):
            raise ConfigurationError(f"operator table must be {n}x{n}")
        ent.setflags(write=False)
        object.__setattr__(self, "entries", ent)

    def row_sum_defect(self):
        """max_i |Σ_j A_ij| relative to max_i A_ii."""
        return float(np.abs(self.entries.sum(axis=1)).max() / np.diag(self.entries).max())

    def max_offdiagonal(self):
        off = self.entries - np.diag(np.diag(self.entries))
        return float(off.max())


_MEMO = {}


def assemble_operator(grid, order, quad=None, symmetrize=True, cache_dir=None):
    """Dense table approximating (-Δ)^s_{B1} on nodal values of ``grid``.

    Results are memoized in-process; ``cache_dir`` adds the on-disk cache.
    """
    if grid.dim != order.dim:
        raise ConfigurationError(f"grid dim {grid.dim} != order dim {order.dim}")
    if grid.node_count > MAX_NODES + 1:
        raise ConfigurationError(f"at most {MAX_NODES + 1} nodes supported")
    quad = quad or AssemblyQuadrature()
    key = (order.dim, order.s, grid.key(), quad.digest(), bool(symmetrize))
    hit = _MEMO.get(key)
    if hit is not None:
        return hit
    op = None
    if cache_dir is not None:
        from . import cache
        op = cache.lookup(cache_dir, grid, order, quad, symmetrize)
    if op is None:
        ke = KernelEvaluator(order, nodes=quad.angular_nodes,
                             panel_length=quad.angular_panel_length)
        w = _collocation_weights(grid.nodes, ke, quad)
        if symmetrize:
            mw = grid.mass_weights
            s_tab = mw[:, None] * w
            w = 0.5 * (s_tab + s_tab.T) / mw[:, None]
        c = ke.c_ns
        table = -c * w
        np.fill_diagonal(table, c * w.sum(axis=1))
        meta = {"nodes": quad.nodes, "levels": quad.levels,
                "angular_nodes": quad.angular_nodes,
                "angular_panel_length": quad.angular_panel_length,
                "symmetrized": bool(symmetrize), "digest": quad.digest()}
        op = OperatorMatrix(grid, order, table, meta)
        if cache_dir is not None:
            from . import cache
            cache.store(cache_dir, op, quad)
    _MEMO[key] = op
    return op


def _collocation_weights(r, ke, quad):
    """Nonnegative weights W with (A u)_i = c Σ_j W_ij (u_i - u_j)."""
    m = r.size - 1
    s, n = ke.order.s, ke.order.dim
    gx, gw = np.polynomial.legendre.leggauss(quad.nodes)
    c_near = ke.near_diag_coefficient
    levels = quad.levels
    w = np.zeros((m + 1, m + 1))

    def window(eta):
        lv = eta * 0.5 ** np.arange(levels + 1)
        a, b = lv[1:], lv[:-1]
        pts = (0.5 * (b - a)[:, None] * (gx[None, :] + 1.0) + a[:, None]).ravel()
        wts = (0.5 * (b - a)[:, None] * gw[None, :]).ravel()
        return pts, wts, lv[-1]

    for i in range(m + 1):
        ri = r[i]
        if i == 0:
            # even quadratic u0 + (u1 - u0)(ρ/r1)² on [0, r1]; K(0, ρ) = |S^{N-1}| ρ^{-1-2s}
            w[0, 1] += sphere_area(n - 1) * r[1] ** (-2 * s) / (2 - 2 * s)
            cut_lo, cut_hi = -1.0, r[1]
        elif i == m:
            # one-sided linear profile on [r_{M-1}, 1]; s = 1/2 is cut at the last level
            h = r[m] - r[m - 1]
            dd, ww, tiny = window(h)
            val = float(np.dot(ww, dd / h * ke.radial_kernel(1.0, 1.0 - dd)))
            if s < 0.5:
                val += c_near * tiny ** (1 - 2 * s) / ((1 - 2 * s) * h)
            w[m, m - 1] += val
            cut_lo, cut_hi = r[m - 1], 2.0
        else:
            hm, hp = ri - r[i - 1], r[i + 1] - ri
            eta = min(hm, hp)
            dd, ww, tiny = window(eta)
            kp = ke.radial_kernel(ri, ri + dd)
            km = ke.radial_kernel(ri, ri - dd)
            q2 = float(np.dot(ww, dd * dd * (kp + km))) + 2 * c_near * tiny ** (2 - 2 * s) / (2 - 2 * s)
            d1 = float(np.dot(ww, dd * (kp - km)))
            wp = q2 / ((hp + hm) * hp)
            wm = q2 / ((hp + hm) * hm)
            # first-derivative term: central difference when it keeps the
            # Z-sign pattern, otherwise the upwind one-sided difference
            cp = d1 * hm / (hp * (hp + hm))
            cm = -d1 * hp / (hm * (hp + hm))
            if wp + cp >= 0.0 and wm + cm >= 0.0:
                wp, wm = wp + cp, wm + cm
            elif d1 >= 0.0:
                wp += d1 / hp
            else:
                wm -= d1 / hm
            w[i, i + 1] += wp
            w[i, i - 1] += wm
            cut_lo, cut_hi = ri - eta, ri + eta
        pts, wts, left, frac = _far_field_points(r, ri, cut_lo, cut_hi, gx, gw)
        kv = wts * ke.radial_kernel(ri, pts)
        np.add.at(w[i], left, kv * (1.0 - frac))
        np.add.at(w[i], left + 1, kv * frac)
        w[i, i] = 0.0
    return w


def _far_field_points(r, ri, cut_lo, cut_hi, gx, gw):
    """Gauss points on [0, cut_lo] ∪ [cut_hi, 1], graded toward ri."""
    a, b = r[:-1], r[1:]
    k = np.arange(a.size)
    pieces = []
    # whole panels well separated from ri: one Gauss rule each
    far_left = b <= cut_lo
    far_right = a >= cut_hi
    for sel in (far_left, far_right):
        lo, hi, kk = a[sel], b[sel], k[sel]
        dist = np.where(hi <= ri, ri - hi, lo - ri)
        ok = dist >= (hi - lo)
        pieces.append((lo[ok], hi[ok], kk[ok]))
        for lo_j, hi_j, k_j in zip(lo[~ok], hi[~ok], kk[~ok]):
            pieces.append(_graded_split(lo_j, hi_j, ri, k_j))
    # panels cut by the near window
    cut = ~(far_left | far_right)
    for lo_j, hi_j, k_j in zip(a[cut], b[cut], k[cut]):
        if lo_j < cut_lo:
            pieces.append(_graded_split(lo_j, cut_lo, ri, k_j))
        if hi_j > cut_hi:
            pieces.append(_graded_split(cut_hi, hi_j, ri, k_j))
    lo = np.concatenate([p[0] for p in pieces])
    hi = np.concatenate([p[1] for p in pieces])
    kk = np.concatenate([p[2] for p in pieces]).astype(int)
    half = 0.5 * (hi - lo)
    pts = (half[:, None] * (gx[None, :] + 1.0) + lo[:, None]).ravel()
    wts = (half[:, None] * gw[None, :]).ravel()
    left = np.repeat(kk, gx.size)
    frac = (pts - a[left]) / (b[left] - a[left])
    return pts, wts, left, frac


def _graded_split(lo, hi, c, k):
    """Split [lo, hi] (not containing c) into pieces no longer than their distance to c."""
    los, his = [], []
    if lo >= c:
        x = lo
        while x < hi:
            nxt = hi if x - c <= 0 else min(hi, x + (x - c))
            los.append(x)
            his.append(nxt)
            x = nxt
    else:
        x = hi
        while x > lo:
            nxt = lo if c - x <= 0 else max(lo, x - (c - x))
            los.append(nxt)
            his.append(x)
            x = nxt
    return np.array(los), np.array(his), np.full(len(los), k)


def apply_operator(op, u):
    if u.grid != op.grid:
        raise ConfigurationError("profile and operator live on different grids")
    return RadialProfile(op.grid, op.entries @ u.values)


def dyda_profile(grid, s):
    """(1 - r²)^s on the nodes: vanishes at r = 1."""
    return RadialProfile(grid, (1.0 - grid.nodes ** 2) ** s)


def extension_identity_residual(op, ke, u, full_space="dyda", band=DYDA_BAND):
    """max_{r_i <= band} |(A u)_i + c φ(r_i) u_i - L_i|.

    ``full_space`` is the independent evaluation L of (-Δ)^s of the zero
    extension at the nodes: an array, a scalar, or "dyda" for the closed-form
    constant 2^{2s}Γ(N/2+s)Γ(1+s)/Γ(N/2) valid for the profile (1-r²)^s.
    """
    if u.grid != op.grid:
        raise ConfigurationError("profile and operator live on different grids")
    if u.values[-1] != 0.0:
        raise PreconditionError("zero extension needs u(r_M) = 0")
    r = op.grid.nodes
    sel = np.flatnonzero((r <= band) & (r < 1.0))
    if isinstance(full_space, str):
        if full_space != "dyda":
            raise ConfigurationError(f"unknown full-space oracle {full_space!r}")
        target = np.full(sel.size, dyda_constant(op.order))
    else:
        target = np.broadcast_to(np.asarray(full_space, dtype=float), r.shape)[sel]
    au = op.entries[sel] @ u.values
    regional = au + ke.killing_potential(r[sel]) * u.values[sel]
    return float(np.abs(regional - target).max())


def clear_memo():
    _MEMO.clear()


def relative_band_change(coarse, fine, band=0.99):
    """Max relative change of nested-grid values at common interior nodes r <= band."""
    step = (fine.grid.node_count - 1) // (coarse.grid.node_count - 1)
    r = coarse.grid.nodes
    sel = (r > 0.0) & (r <= band)
    a = coarse.values[sel]
    b = fine.values[::step][sel]
    return float(np.max(np.abs(b - a) / np.maximum(np.abs(a), math.ulp(1.0))))
