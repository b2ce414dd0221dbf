"""Dirichlet-to-Neumann data: full trace, boundary-patch restriction, and
pairing against boundary measures.

The DN map sends Dirichlet data f to the outward normal derivative of the
small semilinear solution.  Partial data restricts both the input support
and the observed trace to a boundary patch; measure pairing integrates the
trace against a finite boundary measure (Dirac atoms and/or a density),
which models observing a single boundary functional.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import BoundaryFunction, DiscreteDomain, normal_derivative
from .elliptic import SemilinearProblem, SolverConfig, solve_semilinear

__all__ = [
    "BoundaryPatch",
    "BoundaryMeasure",
    "SupportError",
    "patch_from_param",
    "snap_to_boundary",
    "dirac_measure",
    "measure_from_json",
    "dn_apply",
    "dn_partial",
    "dn_measure_pair",
]


class SupportError(ValueError):
    """Boundary data is nonzero outside the declared patch."""


@dataclass
class BoundaryPatch:
    """Contiguous set of boundary nodes, stored as indices into the CCW
    boundary ordering."""

    domain: DiscreteDomain
    members: np.ndarray

    def __post_init__(self):
        self.members = np.unique(np.asarray(self.members, dtype=np.int64))
        if self.members.size == 0:
            raise ValueError("patch must contain at least one boundary node")
        if self.members.min() < 0 or self.members.max() >= self.domain.n_boundary:
            raise ValueError("patch indices out of range")

    def mask(self) -> np.ndarray:
        m = np.zeros(self.domain.n_boundary, dtype=bool)
        m[self.members] = True
        return m


def patch_from_param(domain: DiscreteDomain, lo: float, hi: float) -> BoundaryPatch:
    """Patch of boundary nodes with CCW parameter in [lo, hi].

    The parameter is arc length in [0,4) on the square and the angle in
    [0,2*pi) on the disk; lo > hi wraps around the start point.
    """
    p = domain.boundary_param
    if lo <= hi:
        sel = (p >= lo) & (p <= hi)
    else:
        sel = (p >= lo) | (p <= hi)
    return BoundaryPatch(domain, np.flatnonzero(sel))


@dataclass
class BoundaryMeasure:
    """Finite measure on the boundary: point atoms plus an optional density
    integrated against the surface quadrature weights."""

    domain: DiscreteDomain
    atoms: list = field(default_factory=list)       # (boundary index, weight)
    density: BoundaryFunction | None = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.atoms = [(int(i), complex(w)) for i, w in self.atoms]
        for i, _ in self.atoms:
            if not 0 <= i < self.domain.n_boundary:
                raise ValueError(f"atom index {i} out of range")
        tv = sum(abs(w) for _, w in self.atoms)
        if self.density is not None:
            tv += float(np.sum(self.domain.boundary_weights * np.abs(self.density.values)))
        if not tv > 0:
            raise ValueError("measure must have positive total variation")
        self.meta.setdefault("total_variation", tv)

    def pair(self, trace: BoundaryFunction) -> complex:
        """Integrate a boundary trace against the measure."""
        out = sum(w * trace.values[i] for i, w in self.atoms)
        if self.density is not None:
            out += np.sum(self.density.values * self.domain.boundary_weights * trace.values)
        return complex(out)


def snap_to_boundary(domain: DiscreteDomain, position: float) -> tuple[int, float]:
    """Nearest boundary node to a CCW parameter value; returns (index, distance)."""
    period = 4.0 if domain.shape == "square" else 2.0 * np.pi
    d = np.abs(domain.boundary_param - position % period)
    d = np.minimum(d, period - d)
    k = int(np.argmin(d))
    return k, float(d[k])


def dirac_measure(domain: DiscreteDomain, position: float, weight: complex = 1.0) -> BoundaryMeasure:
    """Dirac mass at the boundary point with CCW parameter ``position``.

    The atom snaps to the nearest boundary node; the snap distance is kept
    in the measure metadata.
    """
    k, dist = snap_to_boundary(domain, position)
    mu = BoundaryMeasure(domain, atoms=[(k, weight)])
    mu.meta["snap_distance"] = dist
    return mu


def measure_from_json(domain: DiscreteDomain, obj: dict) -> BoundaryMeasure:
    """Build a measure from its JSON form.

    Schema: {"atoms": [{"position": s_or_theta, "weight": w}, ...],
             "density": number | [per-boundary-node values]}.
    """
    atoms = []
    snap = []
    for a in obj.get("atoms", []):
        k, dist = snap_to_boundary(domain, float(a["position"]))
        atoms.append((k, complex(a["weight"])))
        snap.append(dist)
    density = None
    if "density" in obj and obj["density"] is not None:
        dv = obj["density"]
        if np.isscalar(dv):
            vals = np.full(domain.n_boundary, complex(dv))
        else:
            vals = np.asarray(dv, dtype=complex)
        density = BoundaryFunction(domain, vals)
    mu = BoundaryMeasure(domain, atoms=atoms, density=density)
    mu.meta["snap_distances"] = snap
    return mu


def dn_apply(
    q, m: int, f: BoundaryFunction, cfg: SolverConfig | None = None
) -> BoundaryFunction:
    """DN trace: outward normal derivative of the small solution for data f."""
    cfg = cfg or SolverConfig()
    u = solve_semilinear(SemilinearProblem(q, m, f), cfg)
    trace = normal_derivative(u)
    trace.meta.update(u.meta)
    return trace


def dn_partial(
    q, m: int, f: BoundaryFunction, patch: BoundaryPatch, cfg: SolverConfig | None = None
) -> BoundaryFunction:
    """DN trace observed on a patch, for data supported in the patch.

    Returns a full-length boundary function that is zero off the patch;
    on-patch values agree with dn_apply exactly.
    """
    mask = patch.mask()
    if np.any(f.values[~mask] != 0):
        raise SupportError("Dirichlet data must vanish outside the patch")
    trace = dn_apply(q, m, f, cfg)
    vals = np.where(mask, trace.values, 0.0)
    out = BoundaryFunction(f.domain, vals, meta=dict(trace.meta))
    out.meta["patch_members"] = patch.members.tolist()
    return out


def dn_measure_pair(
    q, m: int, f: BoundaryFunction, mu: BoundaryMeasure, cfg: SolverConfig | None = None
) -> complex:
    """One-functional observation: the DN trace integrated against mu."""
    return mu.pair(dn_apply(q, m, f, cfg))
