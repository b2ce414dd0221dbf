"""Discretized 2-D domains: unit square and unit disk.

The square is the uniform lattice on [0,1]^2.  The disk (radius 1, centered
at the origin) is embedded in the lattice on [-1,1]^2; lattice arms that
leave the disk are shortened to their circle intersection, Shortley-Weller
style, and those intersection points are the boundary nodes.

A domain bundles everything downstream solvers need:

  * node coordinates, split into interior and boundary index sets,
  * unit outward normals and trapezoidal surface weights on the boundary,
  * volume quadrature weights on the interior (exact cell areas, so the
    weights sum to |Omega| to machine precision),
  * the sparse Dirichlet Laplacian (interior block A and boundary
    coupling B with  Delta u ~ A u_int + B u_bnd),
  * a sparse one-sided second-order stencil for the outward normal
    derivative on the boundary.

Domains are immutable after construction and safe to share across threads;
the LU factorization of A is cached lazily on first solve.

Everything here is two-dimensional.  The data model (node arrays, index
sets, weight vectors, sparse operators) carries no 2-D-only assumptions,
so a three-dimensional builder would slot in behind the same interface;
only the builders and the closed-form disk machinery would need work.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

__all__ = [
    "DiscreteDomain",
    "GridFunction",
    "BoundaryFunction",
    "build_domain",
    "normal_derivative",
    "lp_norm",
    "grid_function",
    "boundary_function",
]

# distance (in units of h) of the two inward sample points used by the
# disk's normal-derivative stencil
_ND_STEP = 1.4


@dataclass
class DiscreteDomain:
    """Geometric substrate shared by all grid and boundary fields."""

    shape: str                      # "square" | "disk"
    resolution: int                 # lattice nodes per side
    h: float                        # lattice spacing
    nodes: np.ndarray               # (N, 2) coordinates, interior then boundary
    interior: np.ndarray            # indices of interior nodes
    boundary: np.ndarray            # indices of boundary nodes, ordered CCW
    normals: np.ndarray             # (M, 2) unit outward normal per boundary node
    boundary_weights: np.ndarray    # (M,) trapezoidal surface weights
    boundary_param: np.ndarray      # (M,) CCW parameter: arc length s on the
                                    # square (s in [0,4)), angle theta on the disk
    cell_weights: np.ndarray        # (K,) volume weights aligned with `interior`
    lap_interior: sp.csr_matrix     # A: Delta on interior unknowns
    lap_boundary: sp.csr_matrix     # B: coupling of Delta to boundary values
    nd_matrix: sp.csr_matrix        # (M, N) normal-derivative stencil
    _lu: object = field(default=None, repr=False, compare=False)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_interior(self) -> int:
        return self.interior.size

    @property
    def n_boundary(self) -> int:
        return self.boundary.size

    def boundary_positions(self) -> np.ndarray:
        return self.nodes[self.boundary]

    def splu(self):
        """Cached sparse LU factorization of the interior Laplacian."""
        if self._lu is None:
            import scipy.sparse.linalg as spla

            self._lu = spla.splu(sp.csc_matrix(self.lap_interior))
        return self._lu


@dataclass
class GridFunction:
    """Complex scalar field on all nodes of a domain."""

    domain: DiscreteDomain
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.domain.n_nodes,):
            raise ValueError(
                f"grid function needs {self.domain.n_nodes} values, "
                f"got shape {self.values.shape}"
            )

    def interior_values(self) -> np.ndarray:
        return self.values[self.domain.interior]

    def boundary_values(self) -> np.ndarray:
        return self.values[self.domain.boundary]


@dataclass
class BoundaryFunction:
    """Complex scalar field on the ordered boundary nodes of a domain."""

    domain: DiscreteDomain
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.domain.n_boundary,):
            raise ValueError(
                f"boundary function needs {self.domain.n_boundary} values, "
                f"got shape {self.values.shape}"
            )

    def sup(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0


def grid_function(domain: DiscreteDomain, fn) -> GridFunction:
    """Sample ``fn(x, y)`` (vectorized) at every node."""
    vals = fn(domain.nodes[:, 0], domain.nodes[:, 1])
    return GridFunction(domain, np.broadcast_to(vals, (domain.n_nodes,)).astype(complex))


def boundary_function(domain: DiscreteDomain, fn) -> BoundaryFunction:
    """Sample ``fn(x, y)`` (vectorized) at every boundary node."""
    pos = domain.boundary_positions()
    vals = fn(pos[:, 0], pos[:, 1])
    return BoundaryFunction(domain, np.broadcast_to(vals, (domain.n_boundary,)).astype(complex))


def build_domain(shape: str, resolution: int) -> DiscreteDomain:
    """Construct a discretized unit square or unit disk.

    ``resolution`` is the lattice node count per side; it must be at least 8
    so the one-sided boundary stencils have room.
    """
    if resolution < 8:
        raise ValueError(f"resolution must be >= 8, got {resolution}")
    if shape == "square":
        return _build_square(resolution)
    if shape == "disk":
        return _build_disk(resolution)
    raise ValueError(f"unknown shape {shape!r} (expected 'square' or 'disk')")


def normal_derivative(u: GridFunction) -> BoundaryFunction:
    """Outward normal derivative on the boundary.

    Second-order one-sided difference along the outward normal,
    (3 u(b) - 4 u(b - s nu) + u(b - 2 s nu)) / (2 s); off-lattice sample
    points on the disk are filled by cubic least-squares interpolation
    baked into the domain's stencil matrix.
    """
    dom = u.domain
    return BoundaryFunction(dom, dom.nd_matrix @ u.values)


def lp_norm(u: GridFunction, p: float) -> float:
    """Discrete L^p(Omega) norm: (sum cell_weights |u|^p)^(1/p).

    For p = inf, the max of |u| over interior nodes.
    """
    if p < 1:
        raise ValueError(f"p must satisfy 1 <= p <= inf, got {p}")
    vals = np.abs(u.interior_values())
    if math.isinf(p):
        return float(vals.max()) if vals.size else 0.0
    w = u.domain.cell_weights
    return float(np.sum(w * vals**p) ** (1.0 / p))


# ----------------------------------------------------------------------
# square
# ----------------------------------------------------------------------

def _build_square(n: int) -> DiscreteDomain:
    """Unit-square lattice.

    The four corner lattice points are not nodes: no interior stencil ever
    references them, the outward normal is ambiguous there, and dropping
    them lets every boundary node carry an axis-aligned unit normal.  The
    edge-end quadrature weights stretch to the corners (3h/2) so the
    surface weights still sum to exactly 4.
    """
    h = 1.0 / (n - 1)
    xs = np.linspace(0.0, 1.0, n)

    def corner(ix, iy):
        return ix in (0, n - 1) and iy in (0, n - 1)

    lattice_id = -np.ones((n, n), dtype=np.int64)
    pts = []
    for ix in range(n):
        for iy in range(n):
            if corner(ix, iy):
                continue
            lattice_id[ix, iy] = len(pts)
            pts.append((xs[ix], xs[iy]))
    nodes = np.array(pts)

    def nid(ix, iy):
        return int(lattice_id[ix, iy])

    interior = np.array(
        [nid(ix, iy) for ix in range(1, n - 1) for iy in range(1, n - 1)],
        dtype=np.int64,
    )

    # counterclockwise from just after (0,0): bottom, right, top, left
    bnd, param, nrm = [], [], []
    for ix in range(1, n - 1):
        bnd.append(nid(ix, 0)); param.append(xs[ix]); nrm.append((0.0, -1.0))
    for iy in range(1, n - 1):
        bnd.append(nid(n - 1, iy)); param.append(1.0 + xs[iy]); nrm.append((1.0, 0.0))
    for ix in range(n - 2, 0, -1):
        bnd.append(nid(ix, n - 1)); param.append(2.0 + (1.0 - xs[ix])); nrm.append((0.0, 1.0))
    for iy in range(n - 2, 0, -1):
        bnd.append(nid(0, iy)); param.append(3.0 + (1.0 - xs[iy])); nrm.append((-1.0, 0.0))
    boundary = np.array(bnd, dtype=np.int64)
    boundary_param = np.array(param)
    normals = np.array(nrm)

    # per-edge weights: h inside, 3h/2 at the edge ends; each edge sums to 1
    w1 = np.full(n - 2, h)
    w1[0] = w1[-1] = 1.5 * h
    boundary_weights = np.concatenate([w1, w1, w1, w1])

    # volume weights: interior Voronoi cells, edge cells stretched to the wall
    cw1 = np.full(n - 2, h)
    cw1[0] += 0.5 * h
    cw1[-1] += 0.5 * h
    cell_weights = np.array(
        [cw1[ix - 1] * cw1[iy - 1] for ix in range(1, n - 1) for iy in range(1, n - 1)]
    )

    # 5-point Laplacian
    pos_of = {int(g): k for k, g in enumerate(interior)}
    bpos_of = {int(g): k for k, g in enumerate(boundary)}
    rows_a, cols_a, vals_a = [], [], []
    rows_b, cols_b, vals_b = [], [], []
    inv_h2 = 1.0 / h**2
    for k, g in enumerate(interior):
        ix = 1 + (k // (n - 2))
        iy = 1 + (k % (n - 2))
        rows_a.append(k); cols_a.append(k); vals_a.append(-4.0 * inv_h2)
        for jx, jy in ((ix + 1, iy), (ix - 1, iy), (ix, iy + 1), (ix, iy - 1)):
            ng = nid(jx, jy)
            if ng in pos_of:
                rows_a.append(k); cols_a.append(pos_of[ng]); vals_a.append(inv_h2)
            else:
                rows_b.append(k); cols_b.append(bpos_of[ng]); vals_b.append(inv_h2)
    K, M = interior.size, boundary.size
    A = sp.csr_matrix((vals_a, (rows_a, cols_a)), shape=(K, K))
    B = sp.csr_matrix((vals_b, (rows_b, cols_b)), shape=(K, M))

    # normal-derivative stencil: two interior lattice nodes straight in
    rows, cols, vals = [], [], []
    for k, b in enumerate(boundary):
        dx, dy = int(normals[k, 0]), int(normals[k, 1])
        x, y = nodes[b]
        ix, iy = int(round(x / h)), int(round(y / h))
        for c, (jx, jy) in (
            (3.0, (ix, iy)),
            (-4.0, (ix - dx, iy - dy)),
            (1.0, (ix - 2 * dx, iy - 2 * dy)),
        ):
            rows.append(k); cols.append(nid(jx, jy)); vals.append(c / (2.0 * h))
    D = sp.csr_matrix((vals, (rows, cols)), shape=(M, nodes.shape[0]))

    return DiscreteDomain(
        shape="square", resolution=n, h=h, nodes=nodes,
        interior=interior, boundary=boundary, normals=normals,
        boundary_weights=boundary_weights, boundary_param=boundary_param,
        cell_weights=cell_weights, lap_interior=A, lap_boundary=B, nd_matrix=D,
    )


# ----------------------------------------------------------------------
# disk
# ----------------------------------------------------------------------

def _circle_hit(p: np.ndarray, d: np.ndarray) -> float:
    """Distance along unit direction d from interior point p to the circle."""
    pd = float(p @ d)
    return -pd + math.sqrt(pd * pd + 1.0 - float(p @ p))


def _arc_antideriv(u):
    """Antiderivative of sqrt(1 - u^2) on [-1, 1]."""
    u = np.clip(u, -1.0, 1.0)
    return 0.5 * (u * np.sqrt(1.0 - u * u) + np.arcsin(u))


def _clip_integral(y: float, a: float, b: float) -> float:
    """Integral over [a,b] of clip(y, -sqrt(1-u^2), +sqrt(1-u^2)) du."""
    if b <= a:
        return 0.0
    if y >= 1.0:
        return float(_arc_antideriv(b) - _arc_antideriv(a))
    if y <= -1.0:
        return float(-(_arc_antideriv(b) - _arc_antideriv(a)))
    s = math.sqrt(1.0 - y * y)
    lo, hi = max(a, -s), min(b, s)
    mid = y * max(0.0, hi - lo)
    sgn = 1.0 if y >= 0.0 else -1.0
    out = 0.0
    if a < -s:
        out += sgn * float(_arc_antideriv(min(b, -s)) - _arc_antideriv(a))
    if b > s:
        out += sgn * float(_arc_antideriv(b) - _arc_antideriv(max(a, s)))
    return out + mid


def _disk_cell_area(x0: float, x1: float, y0: float, y1: float) -> float:
    """Exact area of [x0,x1] x [y0,y1] intersected with the unit disk."""
    a, b = max(x0, -1.0), min(x1, 1.0)
    if b <= a:
        return 0.0
    return max(0.0, _clip_integral(y1, a, b) - _clip_integral(y0, a, b))


def _cubic_interp_weights(point: np.ndarray, neighbors: np.ndarray, h: float) -> np.ndarray:
    """Weights reproducing a cubic fit's value at ``point``.

    Least-squares fit of a full degree-3 polynomial in local coordinates
    scaled by h; exact on cubics, O(h^4) on smooth fields.  The high order
    matters: these samples feed a difference quotient, and a lower-order
    fit leaves an O(h^2) one-sided bias in the normal derivative that
    spoils boundary-integral convergence.
    """
    loc = (neighbors - point) / h
    x, y = loc[:, 0], loc[:, 1]
    A = np.column_stack([
        np.ones_like(x), x, y,
        x * x, x * y, y * y,
        x**3, x * x * y, x * y * y, y**3,
    ])
    return np.linalg.pinv(A)[0]


def _build_disk(n: int) -> DiscreteDomain:
    h = 2.0 / (n - 1)
    xs = np.linspace(-1.0, 1.0, n)
    coords = np.array([(xs[ix], xs[iy]) for ix in range(n) for iy in range(n)])
    r2 = np.einsum("ij,ij->i", coords, coords)
    inside = r2 < 1.0 - 1e-12

    def nid(ix, iy):
        return ix * n + iy

    interior_lattice = np.flatnonzero(inside)
    int_pos = {int(g): k for k, g in enumerate(interior_lattice)}
    K = interior_lattice.size

    # trace Shortley-Weller arms; collect circle intersection points
    bpoints: list[np.ndarray] = []
    bkey: dict[tuple, int] = {}

    def bnode(pt: np.ndarray) -> int:
        pt = pt / np.linalg.norm(pt)
        key = (round(pt[0], 12), round(pt[1], 12))
        if key not in bkey:
            bkey[key] = len(bpoints)
            bpoints.append(pt)
        return bkey[key]

    dirs = np.array([(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)])
    steps = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    # arms[k] = per direction: (is_boundary, index, length)
    arms = []
    for g in interior_lattice:
        ix, iy = divmod(int(g), n)
        p = coords[g]
        entry = []
        for d, (sx, sy) in zip(dirs, steps):
            jx, jy = ix + sx, iy + sy
            ng = nid(jx, jy) if 0 <= jx < n and 0 <= jy < n else -1
            if ng >= 0 and inside[ng]:
                entry.append((False, int_pos[ng], h))
            else:
                a = _circle_hit(p, d)
                entry.append((True, bnode(p + a * d), a))
        arms.append(entry)

    bpos = np.array(bpoints)
    theta = np.mod(np.arctan2(bpos[:, 1], bpos[:, 0]), 2.0 * np.pi)
    order = np.argsort(theta, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    bpos = bpos[order]
    theta = theta[order]
    M = bpos.shape[0]

    nodes = np.vstack([coords[interior_lattice], bpos])
    interior = np.arange(K, dtype=np.int64)
    boundary = np.arange(K, K + M, dtype=np.int64)
    normals = bpos.copy()

    dth = np.diff(theta, append=theta[0] + 2.0 * np.pi)
    boundary_weights = 0.5 * (dth + np.roll(dth, 1))   # sums to 2*pi

    # Shortley-Weller Laplacian
    rows_a, cols_a, vals_a = [], [], []
    rows_b, cols_b, vals_b = [], [], []
    for k in range(K):
        (eb, ei, ae), (wb, wi, aw), (nb, ni, an), (sb, si, as_) = arms[k]
        for is_b, idx, a, opp in (
            (eb, ei, ae, aw), (wb, wi, aw, ae), (nb, ni, an, as_), (sb, si, as_, an),
        ):
            c = 2.0 / (a * (a + opp))
            if is_b:
                rows_b.append(k); cols_b.append(rank[idx]); vals_b.append(c)
            else:
                rows_a.append(k); cols_a.append(idx); vals_a.append(c)
        rows_a.append(k); cols_a.append(k)
        vals_a.append(-2.0 / (ae * aw) - 2.0 / (an * as_))
    A = sp.csr_matrix((vals_a, (rows_a, cols_a)), shape=(K, K))
    B = sp.csr_matrix((vals_b, (rows_b, cols_b)), shape=(K, M))

    # volume weights: exact clipped cell areas; slivers of non-interior
    # lattice cells go to the nearest interior node
    tree = cKDTree(coords[interior_lattice])
    cell_weights = np.zeros(K)
    half = 0.5 * h
    cand = np.flatnonzero(r2 < (1.0 + 1.5 * h) ** 2)
    for g in cand:
        x, y = coords[g]
        area = _disk_cell_area(x - half, x + half, y - half, y + half)
        if area <= 0.0:
            continue
        if inside[g]:
            cell_weights[int_pos[int(g)]] += area
        else:
            _, near = tree.query(coords[g])
            cell_weights[near] += area

    # normal derivative: one-sided stencil along -nu with off-lattice
    # samples interpolated from nearby interior nodes
    s = _ND_STEP * h
    rows, cols, vals = [], [], []
    for k in range(M):
        b = bpos[k]
        rows.append(k); cols.append(K + k); vals.append(3.0 / (2.0 * s))
        for c, depth in ((-4.0, 1.0), (1.0, 2.0)):
            ptn = b * (1.0 - depth * s)
            rad = 3.1 * h
            idx = tree.query_ball_point(ptn, rad)
            while len(idx) < 14:
                rad *= 1.3
                idx = tree.query_ball_point(ptn, rad)
            idx = np.sort(np.asarray(idx, dtype=np.int64))
            w = _cubic_interp_weights(ptn, coords[interior_lattice[idx]], h)
            for j, wj in zip(idx, w):
                rows.append(k); cols.append(int(j)); vals.append(c * wj / (2.0 * s))
    D = sp.csr_matrix((vals, (rows, cols)), shape=(M, K + M))

    return DiscreteDomain(
        shape="disk", resolution=n, h=h, nodes=nodes,
        interior=interior, boundary=boundary, normals=normals,
        boundary_weights=boundary_weights, boundary_param=theta,
        cell_weights=cell_weights, lap_interior=A, lap_boundary=B, nd_matrix=D,
    )
