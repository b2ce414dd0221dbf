"""Two-sided numerical checks of the integral identities behind potential
uniqueness: full boundary data, partial (patch) data, and the one-point
(boundary measure) variant with its Poisson-kernel machinery.

Each verifier computes the volume side and the boundary side of its
identity independently and reports both together with absolute and
relative residuals.  The relative residual is measured against the larger
side, floored at 1e-30 so the all-zero case stays well defined.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .domain import BoundaryFunction, DiscreteDomain, GridFunction
from .dnmap import BoundaryMeasure, BoundaryPatch, SupportError
from .elliptic import SolverConfig, solve_poisson
from .linearize import _sorted_product, direct_mth_oracle

__all__ = [
    "IdentityReport",
    "verify_full_identity",
    "verify_partial_identity",
    "poisson_kernel",
    "psi_from_measure",
    "verify_onepoint_identity",
]

# radius (in units of h) of the locally refined quadrature around a
# boundary atom, and the per-axis subdivision factor
_REFINE_RADIUS = 2.0
_REFINE_SUB = 4


@dataclass
class IdentityReport:
    lhs: complex
    rhs: complex
    abs_residual: float
    rel_residual: float
    resolution: int
    tolerance: float | None = None
    warnings: list = field(default_factory=list)
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.tolerance is None or self.rel_residual <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "lhs": [self.lhs.real, self.lhs.imag],
            "rhs": [self.rhs.real, self.rhs.imag],
            "abs_residual": self.abs_residual,
            "rel_residual": self.rel_residual,
            "resolution": self.resolution,
            "tolerance": self.tolerance,
            "warnings": list(self.warnings),
            "extra": dict(self.extra),
        }


def _report(lhs: complex, rhs: complex, resolution: int, tolerance=None, **extra) -> IdentityReport:
    lhs, rhs = complex(lhs), complex(rhs)
    ab = abs(lhs - rhs)
    rel = ab / max(abs(lhs), abs(rhs), 1e-30)
    return IdentityReport(lhs, rhs, ab, rel, resolution, tolerance, extra=extra)


def _harmonic_family(q1: GridFunction, fs):
    """Laplace solutions v_k shared by both potentials, and their sorted
    interior product."""
    domain = q1.domain
    vs = [solve_poisson(domain, None, f) for f in fs]
    prod_int = _sorted_product(np.vstack([v.interior_values() for v in vs]))
    return vs, prod_int


def verify_full_identity(
    q1: GridFunction, q2: GridFunction, m: int, fs, cfg: SolverConfig | None = None,
    tolerance: float | None = None,
) -> IdentityReport:
    """Volume integral of m!(q1-q2) prod v_k  against the boundary flux
    difference of the m-th linearizations (which are -each- one Poisson
    solve with the product load)."""
    if len(fs) != m:
        raise ValueError(f"need m = {m} boundary data, got {len(fs)}")
    domain = q1.domain
    _, prod_int = _harmonic_family(q1, fs)
    dq = q1.interior_values() - q2.interior_values()
    lhs = np.sum(domain.cell_weights * math.factorial(m) * dq * prod_int)

    t1 = direct_mth_oracle(q1, m, fs, cfg)
    t2 = direct_mth_oracle(q2, m, fs, cfg)
    rhs = -np.sum(domain.boundary_weights * (t1.values - t2.values))
    return _report(lhs, rhs, domain.resolution, tolerance)


def verify_partial_identity(
    q1: GridFunction, q2: GridFunction, m: int, patch: BoundaryPatch,
    g: BoundaryFunction, fs, cfg: SolverConfig | None = None,
    tolerance: float | None = None,
) -> IdentityReport:
    """Patch variant: both sides weighted by the positive harmonic function
    grown from patch data g >= 0.

    The boundary side keeps only  v0 * flux difference;  the companion term
    (w1-w2) d_nu v0 vanishes identically because the linearizations carry
    exact zero boundary values.
    """
    if len(fs) != m:
        raise ValueError(f"need m = {m} boundary data, got {len(fs)}")
    domain = q1.domain
    mask = patch.mask()
    gv = g.values
    if np.any(np.abs(gv.imag) > 0) or np.any(gv.real < 0):
        raise ValueError("patch data g must be real and nonnegative")
    if not np.any(gv.real > 0):
        raise ValueError("patch data g must be positive somewhere")
    if np.any(gv[~mask] != 0):
        raise SupportError("patch data g must vanish outside the patch")
    for f in fs:
        if np.any(f.values[~mask] != 0):
            raise SupportError("boundary data f_k must vanish outside the patch")

    v0 = solve_poisson(domain, None, g)
    warnings = []
    min_v0 = float(np.min(v0.interior_values().real))
    if min_v0 <= -1e-10:
        warnings.append(
            f"interior positivity of v0 violated beyond discretization: min = {min_v0:.3e}"
        )

    _, prod_int = _harmonic_family(q1, fs)
    dq = q1.interior_values() - q2.interior_values()
    lhs = -np.sum(
        domain.cell_weights * math.factorial(m) * dq * v0.interior_values() * prod_int
    )

    t1 = direct_mth_oracle(q1, m, fs, cfg)
    t2 = direct_mth_oracle(q2, m, fs, cfg)
    rhs = np.sum(domain.boundary_weights * gv * (t1.values - t2.values))
    rep = _report(lhs, rhs, domain.resolution, tolerance, min_v0=min_v0)
    rep.warnings.extend(warnings)
    return rep


def poisson_kernel(domain: DiscreteDomain, x, y) -> float:
    """Poisson kernel of the unit disk, P(x, y) = (1-|x|^2) / (2 pi |x-y|^2).

    Closed form exists only for the disk; other shapes are unsupported.
    """
    if domain.shape != "disk":
        raise ValueError("Poisson kernel is only available on the disk domain")
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float((1.0 - x @ x) / (2.0 * np.pi * np.sum((x - y) ** 2)))


def _kernel_at(points: np.ndarray, y: np.ndarray) -> np.ndarray:
    r2 = np.einsum("ij,ij->i", points, points)
    d2 = np.einsum("ij,ij->i", points - y, points - y)
    return (1.0 - r2) / (2.0 * np.pi * d2)


def _harmonic_measure(domain: DiscreteDomain, points: np.ndarray) -> np.ndarray:
    """Harmonic measure omega(x, arc_k) of each boundary node's weight arc.

    Uses the closed-form antiderivative of the disk kernel in the boundary
    angle,  int P dtheta = (1/pi) arctan( (1+r)/(1-r) tan((theta-phi)/2) ),
    continued across branch points; rows sum to 1 exactly, which keeps the
    density quadrature uniformly accurate up to the boundary.
    """
    theta = domain.boundary_param
    dth = np.diff(theta, append=theta[0] + 2.0 * np.pi)
    edges_hi = theta + 0.5 * dth                 # arc_k = [edges_hi[k-1], edges_hi[k]]

    r = np.sqrt(np.einsum("ij,ij->i", points, points))
    phi = np.arctan2(points[:, 1], points[:, 0])
    kappa = (1.0 + r) / (1.0 - r)

    def antideriv(u):
        # continuous antiderivative of P in u = theta - phi, per point row
        j = np.floor((u + np.pi) / (2.0 * np.pi))
        frac = np.arctan(kappa[:, None] * np.tan(0.5 * (u - 2.0 * np.pi * j))) / np.pi
        return j + frac

    u_hi = edges_hi[None, :] - phi[:, None]
    u_lo = np.roll(edges_hi, 1)[None, :] - phi[:, None]
    u_lo = np.where(u_lo > u_hi, u_lo - 2.0 * np.pi, u_lo)   # unwrap the seam arc
    return antideriv(u_hi) - antideriv(u_lo)


def psi_from_measure(domain: DiscreteDomain, mu: BoundaryMeasure) -> GridFunction:
    """Harmonic extension of the measure: Psi(x) = int P(x, y) dmu(y).

    Atom contributions are exact kernel evaluations.  The density part is
    integrated as piecewise-constant against exact harmonic-measure arcs,
    so a uniform density gives Psi = 1 to machine precision.  Boundary node
    values are left at zero (the kernel is singular there); every
    quadrature in this module only reads Psi at interior nodes.
    """
    if domain.shape != "disk":
        raise ValueError("Poisson kernel is only available on the disk domain")
    pts = domain.nodes[domain.interior]
    psi = np.zeros(pts.shape[0], dtype=complex)
    for i, w in mu.atoms:
        psi += w * _kernel_at(pts, domain.nodes[domain.boundary[i]])
    if mu.density is not None:
        psi += _harmonic_measure(domain, pts) @ mu.density.values
    vals = np.zeros(domain.n_nodes, dtype=complex)
    vals[domain.interior] = psi
    out = GridFunction(domain, vals)
    out.meta["boundary_values"] = "unset (kernel singular on the boundary)"
    return out


def _refined_kernel_weights(domain: DiscreteDomain, y: np.ndarray) -> np.ndarray:
    """Per-interior-node weights approximating  int_cell P(., y) dx.

    Plain  cell_weight * P(node, y)  away from the atom; cells within
    _REFINE_RADIUS * h of y are subdivided _REFINE_SUB x _REFINE_SUB and
    the kernel is averaged over subcell centers inside the disk, rescaled
    to preserve the exact cell mass.
    """
    pts = domain.nodes[domain.interior]
    out = domain.cell_weights * _kernel_at(pts, y)
    near = np.flatnonzero(
        np.einsum("ij,ij->i", pts - y, pts - y) < (_REFINE_RADIUS * domain.h) ** 2
    )
    sub = _REFINE_SUB
    offs = (np.arange(sub) + 0.5) / sub - 0.5
    ox, oy = np.meshgrid(offs, offs, indexing="ij")
    offsets = np.column_stack([ox.ravel(), oy.ravel()]) * domain.h
    for k in near:
        centers = pts[k] + offsets
        keep = np.einsum("ij,ij->i", centers, centers) < 1.0
        if not np.any(keep):
            continue
        vals = _kernel_at(centers[keep], y)
        out[k] = domain.cell_weights[k] * float(np.mean(vals))
    return out


def verify_onepoint_identity(
    q1: GridFunction, q2: GridFunction, m: int, mu: BoundaryMeasure, fs,
    cfg: SolverConfig | None = None, tolerance: float | None = None,
) -> IdentityReport:
    """Measure-paired variant on the disk.

    lhs: the flux difference of the m-th linearizations integrated against
    mu.  rhs: volume integral of -m!(q1-q2) prod v_k Psi with the harmonic
    extension Psi of mu; quadrature cells near each atom are locally
    refined because the kernel is nearly singular there.
    """
    if len(fs) != m:
        raise ValueError(f"need m = {m} boundary data, got {len(fs)}")
    domain = q1.domain
    if domain.shape != "disk":
        raise ValueError("one-point machinery requires the disk domain")
    for f in fs[2:]:
        v = f.values
        if np.any(np.abs(v.imag) > 0) or np.any(v.real < 0) or not np.any(v.real > 0):
            raise ValueError("data f_3..f_m must be real, nonnegative and not identically zero")

    t1 = direct_mth_oracle(q1, m, fs, cfg)
    t2 = direct_mth_oracle(q2, m, fs, cfg)
    lhs = mu.pair(BoundaryFunction(domain, t1.values - t2.values))

    _, prod_int = _harmonic_family(q1, fs)
    dq = q1.interior_values() - q2.interior_values()
    integrand = math.factorial(m) * dq * prod_int

    rhs = 0.0 + 0.0j
    for i, w in mu.atoms:
        kw = _refined_kernel_weights(domain, domain.nodes[domain.boundary[i]])
        rhs += w * np.sum(kw * integrand)
    if mu.density is not None:
        psi_d = psi_from_measure(
            domain, BoundaryMeasure(domain, atoms=[], density=mu.density)
        )
        rhs += np.sum(domain.cell_weights * integrand * psi_d.interior_values())
    rhs = -rhs
    return _report(lhs, rhs, domain.resolution, tolerance)
