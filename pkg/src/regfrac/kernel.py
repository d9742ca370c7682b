"""Scalar kernels of the regional fractional Laplacian on the unit ball.

For radial functions the operator reduces to a one-dimensional integral

    (-Δ)^s_{B1} u(r) = c_{N,s} p.v. ∫_0^1 (u(r) - u(ρ)) ρ^(N-1) J(r, ρ) dρ,

with the angular kernel

    J(r, ρ) = |S^(N-2)| ∫_0^π sin^(N-2)θ (r² + ρ² - 2rρ cos θ)^(-(N+2s)/2) dθ.

Writing Δ = |r - ρ| and ε = Δ / (r + ρ), the substitutions u = tan(θ/2),
u = ε tan φ turn the θ-integral into

    J = |S^(N-2)| 2^(N-1) ε^(N-1) Δ^(-N-2s) G(ε),
    G(ε) = ∫_0^(π/2) (sin ψ cos ψ)^(N-2) (sin²ψ + ε² cos²ψ)^(s+1-N/2) dψ,

which is bounded as ε -> 0.  G has a boundary layer of width ε at ψ = 0, so it
is integrated in the variable τ with ψ = ε sinh τ, on panels of length at most
``panel_length`` carrying ``nodes`` Gauss-Legendre points each.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SingularityError
from .special import beta, gamma, sphere_area

_CHUNK = 16384


@dataclass(frozen=True)
class FracOrder:
    """Fractional order ``s`` and space dimension ``dim``."""

    s: float
    dim: int

    def __post_init__(self):
        if not (0.0 < self.s < 1.0):
            raise DomainError(f"s must lie in (0, 1), got {self.s}")
        if int(self.dim) != self.dim or self.dim < 2:
            raise DomainError(f"dim must be an integer >= 2, got {self.dim}")
        object.__setattr__(self, "s", float(self.s))
        object.__setattr__(self, "dim", int(self.dim))

    def require_low_order(self, allow_large_s=False):
        """Solvers work in the regime s <= 1/2 unless explicitly overridden."""
        if self.s > 0.5 and not allow_large_s:
            raise DomainError(
                f"s = {self.s} > 1/2; pass allow_large_s to override")


def normalization_constant(order):
    """c_{N,s} = 2^{2s} s Γ((N+2s)/2) / (π^{N/2} Γ(1-s))."""
    s, n = order.s, order.dim
    if not (0.0 < s < 1.0):
        raise DomainError(f"normalization constant needs s in (0, 1), got {s}")
    return 4.0 ** s * s * gamma((n + 2 * s) / 2.0) / (
        math.pi ** (n / 2.0) * gamma(1.0 - s))


def dyda_constant(order):
    """(-Δ)^s (1-|x|²)_+^s inside B1, i.e. 2^{2s} Γ(N/2+s) Γ(1+s) / Γ(N/2)."""
    s, n = order.s, order.dim
    return 4.0 ** s * gamma(n / 2.0 + s) * gamma(1.0 + s) / gamma(n / 2.0)


def phi_boundary_constant(order):
    """c1 = lim φ(r)(1-r)^{2s} as r -> 1.

    Equals (1/2s) |S^{N-2}| ∫_0^∞ τ^{N-2} (1+τ²)^{-(N+2s)/2} dτ; the τ-integral
    is B((N-1)/2, s+1/2)/2.
    """
    s, n = order.s, order.dim
    return sphere_area(n - 2) * 0.5 * beta((n - 1) / 2.0, s + 0.5) / (2.0 * s)


@dataclass(frozen=True)
class KernelEvaluator:
    order: FracOrder
    nodes: int = 8
    panel_length: float = 1.0
    tail_cutoff: float = 1.0e3
    near_diag_delta: float = 1.0e-6
    _gauss: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.nodes < 2:
            raise DomainError("angular quadrature needs at least 2 nodes")
        if self.tail_cutoff <= 1.0:
            raise DomainError("tail_cutoff must exceed 1")
        if self.near_diag_delta <= 0.0:
            raise DomainError("near_diag_delta must be positive")
        x, w = np.polynomial.legendre.leggauss(self.nodes)
        object.__setattr__(self, "_gauss", (x, w))

    @property
    def c_ns(self):
        return normalization_constant(self.order)

    @property
    def near_diag_coefficient(self):
        """I_{N,s} |S^{N-2}|: J ~ this * (rρ)^{-(N-1)/2} |r-ρ|^{-1-2s}."""
        s, n = self.order.s, self.order.dim
        return sphere_area(n - 2) * 0.5 * beta((n - 1) / 2.0, s + 0.5)

    def _g_integral(self, eps):
        s, n = self.order.s, self.order.dim
        alpha = s + 1.0 - n / 2.0
        x, w = self._gauss
        tmax = np.arcsinh(0.5 * math.pi / eps)
        panels = max(1, int(math.ceil(float(tmax.max()) / self.panel_length)))
        # local nodes on [0, 1] spread across all panels
        loc = ((np.arange(panels)[:, None] + 0.5 * (x[None, :] + 1.0)) / panels).ravel()
        wts = np.tile(0.5 * w / panels, panels)
        tau = tmax[:, None] * loc[None, :]
        psi = eps[:, None] * np.sinh(tau)
        sp, cp = np.sin(psi), np.cos(psi)
        f = (sp * sp + (eps * eps)[:, None] * cp * cp) ** alpha
        if n > 2:
            f = f * (sp * cp) ** (n - 2)
        f = f * eps[:, None] * np.cosh(tau)
        return tmax * (f @ wts)

    def angular_kernel(self, r, rho):
        """J(r, ρ) for radii r, ρ >= 0 (broadcast); symmetric in its arguments."""
        r = np.asarray(r, dtype=float)
        rho = np.asarray(rho, dtype=float)
        r, rho = np.broadcast_arrays(r, rho)
        if np.any(r < 0) or np.any(rho < 0):
            raise DomainError("radii must be nonnegative")
        delta = np.abs(r - rho)
        if np.any(delta == 0.0):
            raise SingularityError("J(r, ρ) is singular on the diagonal r = ρ")
        s, n = self.order.s, self.order.dim
        out = np.empty(r.shape)
        flat_r, flat_rho, flat_d = r.ravel(), rho.ravel(), delta.ravel()
        flat_out = out.reshape(-1)
        near = flat_d < self.near_diag_delta
        if np.any(near):
            rr = flat_r[near] * flat_rho[near]
            flat_out[near] = (self.near_diag_coefficient * rr ** (-(n - 1) / 2.0)
                              * flat_d[near] ** (-1.0 - 2 * s))
        far = np.flatnonzero(~near)
        pref = sphere_area(n - 2) * 2.0 ** (n - 1)
        for lo in range(0, far.size, _CHUNK):
            idx = far[lo:lo + _CHUNK]
            d = flat_d[idx]
            eps = d / (flat_r[idx] + flat_rho[idx])
            flat_out[idx] = pref * eps ** (n - 1) * d ** (-n - 2 * s) * self._g_integral(eps)
        return out if out.ndim else float(out)

    def radial_kernel(self, r, rho):
        """ρ^(N-1) J(r, ρ): the weight against u(ρ) dρ in the radial integral."""
        rho = np.asarray(rho, dtype=float)
        return rho ** (self.order.dim - 1) * self.angular_kernel(r, rho)

    def phi_raw(self, r):
        """φ(r) = ∫_{|y|>1} |x-y|^{-N-2s} dy at |x| = r (no c_{N,s} factor)."""
        r_arr = np.atleast_1d(np.asarray(r, dtype=float))
        if np.any(r_arr < 0) or np.any(r_arr >= 1.0):
            raise DomainError("φ is defined for 0 <= r < 1")
        vals = np.array([self._phi_one(float(x)) for x in r_arr])
        return vals if np.ndim(r) else float(vals[0])

    def killing_potential(self, r):
        """c_{N,s} φ(r): the potential in (-Δ)^s ũ = (-Δ)^s_{B1} u + c φ u."""
        return self.c_ns * self.phi_raw(r)

    def boundary_constant(self):
        return phi_boundary_constant(self.order)

    def _phi_one(self, r):
        s, n = self.order.s, self.order.dim
        big = self.tail_cutoff
        x, w = np.polynomial.legendre.leggauss(12)
        d = 1.0 - r
        edges = [1.0]
        k = 0
        while edges[-1] < big:
            edges.append(min(1.0 + d * (2.0 ** (k + 1) - 1.0), big))
            k += 1
        a = np.array(edges[:-1])
        b = np.array(edges[1:])
        pts = (0.5 * (b - a)[:, None] * (x[None, :] + 1.0) + a[:, None]).ravel()
        wts = (0.5 * (b - a)[:, None] * w[None, :]).ravel()
        body = float(np.dot(wts, self.radial_kernel(r, pts)))
        tail = sphere_area(n - 1) * big ** (-2 * s) / (2 * s)
        return body + tail
