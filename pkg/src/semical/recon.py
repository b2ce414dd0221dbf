"""Fourier-side recovery of the potential from boundary data.

One frequency sample: differentiate the DN map m times at zero in the
directions of a Calderon pair of harmonic exponentials (all-ones data for
the remaining directions), integrate the resulting trace over the boundary
and scale by -1/m!.  That equals the Fourier transform of q at -2*xi with
the convention  qhat(zeta) = int_Omega q e^{-i zeta.x} dx,  for which the
pointwise product of the pair is exactly e^{2i xi.x}.

The sweep walks a rectangular xi lattice (DC from all-ones data, since the
pair needs xi != 0) and the inverse transform is a direct truncated Fourier
sum over that lattice.  Everything here touches q only through the DN map;
``potential_fourier`` is the quadrature diagnostic used to cross-check
samples against a known potential, never by the reconstruction itself.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .domain import BoundaryFunction, DiscreteDomain, GridFunction
from .dnmap import dn_apply
from .elliptic import SolverConfig
from .linearize import fd_mixed_derivative

__all__ = [
    "CalderonData",
    "FrequencySample",
    "calderon_pair",
    "reconstruct_qhat",
    "reconstruct_qhat_from_dn",
    "frequency_sweep",
    "inverse_transform",
    "xi_lattice",
    "potential_fourier",
]

# default differencing step for reconstruction, in units of delta
_RECON_STEP = 2e-2


@dataclass
class CalderonData:
    """Boundary traces of the exponential pair e^{(+-eta + i xi) . x}."""

    xi: np.ndarray
    eta: np.ndarray
    f1: BoundaryFunction
    f2: BoundaryFunction
    fill: BoundaryFunction          # all-ones data for the remaining slots

    def __post_init__(self):
        nxi = float(np.linalg.norm(self.xi))
        if abs(float(self.eta @ self.xi)) > 1e-12 * nxi**2:
            raise ValueError("eta must be orthogonal to xi")
        if abs(float(np.linalg.norm(self.eta)) - nxi) > 1e-12 * nxi:
            raise ValueError("|eta| must equal |xi|")


@dataclass
class FrequencySample:
    xi: np.ndarray
    qhat: complex
    diagnostics: dict = field(default_factory=dict)


def calderon_pair(domain: DiscreteDomain, xi) -> CalderonData:
    """Harmonic exponential pair for frequency xi (rotating xi by 90 degrees
    gives the companion eta)."""
    xi = np.asarray(xi, dtype=float)
    if np.linalg.norm(xi) == 0.0:
        raise ValueError("xi must be nonzero; zero frequency uses all-ones data")
    eta = np.array([-xi[1], xi[0]])
    pos = domain.boundary_positions()
    phase = 1j * (pos @ xi)
    grow = pos @ eta
    f1 = BoundaryFunction(domain, np.exp(grow + phase))
    f2 = BoundaryFunction(domain, np.exp(-grow + phase))
    fill = BoundaryFunction(domain, np.ones(domain.n_boundary, dtype=complex))
    return CalderonData(xi=xi, eta=eta, f1=f1, f2=f2, fill=fill)


def _recon_data(domain: DiscreteDomain, xi, m: int):
    xi = np.asarray(xi, dtype=float)
    ones = np.ones(domain.n_boundary, dtype=complex)
    if np.linalg.norm(xi) == 0.0:
        return [ones.copy() for _ in range(m)]
    cd = calderon_pair(domain, xi)
    return [cd.f1.values, cd.f2.values] + [ones.copy() for _ in range(m - 2)]


def reconstruct_qhat_from_dn(
    dn,
    domain: DiscreteDomain,
    m: int,
    xi,
    cfg: SolverConfig | None = None,
    step: float | None = None,
) -> FrequencySample:
    """Frequency sample from a DN oracle alone.

    ``dn`` maps a boundary-data array to the DN trace array; this is the
    entire interface to the unknown potential.
    """
    cfg = cfg or SolverConfig()
    xi = np.asarray(xi, dtype=float)
    raw = _recon_data(domain, xi, m)
    norms = [float(np.max(np.abs(f))) for f in raw]
    fnorm = [f / n for f, n in zip(raw, norms)]
    if step is None:
        step = _RECON_STEP * cfg.delta
    while m * step >= cfg.delta:
        step *= 0.5

    deriv = fd_mixed_derivative(dn, domain, fnorm, step) * math.prod(norms)
    qhat = -np.sum(domain.boundary_weights * deriv) / math.factorial(m)
    return FrequencySample(
        xi=xi, qhat=complex(qhat),
        diagnostics={"fd_step": step, "solves": 2**m, "rescale": math.prod(norms)},
    )


def reconstruct_qhat(
    q: GridFunction,
    m: int,
    xi,
    cfg: SolverConfig | None = None,
    step: float | None = None,
) -> FrequencySample:
    """Estimate qhat(-2 xi) from boundary data of the potential q.

    q enters only through dn_apply; its grid values are never read here.
    """
    cfg = cfg or SolverConfig()
    domain = q.domain

    def dn(data):
        return dn_apply(q, m, BoundaryFunction(domain, data), cfg).values

    return reconstruct_qhat_from_dn(dn, domain, m, xi, cfg, step)


def xi_lattice(xi_max: float, spacing: float = 1.0, include_dc: bool = True) -> list:
    """Rectangular frequency lattice {-xi_max..xi_max}^2, row-major order."""
    ks = np.arange(-xi_max, xi_max + 0.5 * spacing, spacing)
    out = []
    for k1 in ks:
        for k2 in ks:
            if not include_dc and k1 == 0.0 and k2 == 0.0:
                continue
            out.append(np.array([k1, k2]))
    return out


def frequency_sweep(
    q: GridFunction,
    m: int,
    xi_grid,
    cfg: SolverConfig | None = None,
    step: float | None = None,
    threads: int = 1,
) -> list:
    """One FrequencySample per lattice point, in input order.

    Per-sample solver failures are recorded in the sample diagnostics
    instead of aborting the sweep.
    """
    cfg = cfg or SolverConfig()

    def one(xi):
        try:
            return reconstruct_qhat(q, m, xi, cfg, step)
        except Exception as exc:  # noqa: BLE001 - collected per sample
            return FrequencySample(
                xi=np.asarray(xi, dtype=float), qhat=complex("nan"),
                diagnostics={"error": f"{type(exc).__name__}: {exc}"},
            )

    xi_grid = list(xi_grid)
    if threads > 1:
        q.domain.splu()   # factor once up front; workers share it read-only
        with ThreadPoolExecutor(max_workers=threads) as ex:
            return list(ex.map(one, xi_grid))
    return [one(xi) for xi in xi_grid]


def inverse_transform(samples, domain: DiscreteDomain) -> GridFunction:
    """Potential estimate from frequency samples on a rectangular xi lattice.

    Direct truncated Fourier sum
        q_rec(x) = (2 pi)^-2 sum qhat(-2 xi) e^{-2 i xi.x} (2 dxi1)(2 dxi2);
    the real part is returned and the imaginary residue recorded in meta.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("no samples to invert")
    xis = np.array([s.xi for s in samples])
    ax1 = np.unique(xis[:, 0])
    ax2 = np.unique(xis[:, 1])
    if len(samples) != ax1.size * ax2.size:
        raise ValueError("samples do not fill a rectangular lattice")
    seen = {(float(a), float(b)) for a, b in xis}
    if len(seen) != len(samples):
        raise ValueError("duplicate lattice points")

    def spacing(ax):
        if ax.size < 2:
            return 1.0
        d = np.diff(ax)
        if np.max(np.abs(d - d[0])) > 1e-9 * max(1.0, abs(d[0])):
            raise ValueError("lattice spacing is not uniform")
        return float(d[0])

    d1, d2 = spacing(ax1), spacing(ax2)
    weight = (2.0 * d1) * (2.0 * d2) / (2.0 * np.pi) ** 2

    x = domain.nodes
    acc = np.zeros(domain.n_nodes, dtype=complex)
    for s in samples:
        if not np.isfinite(s.qhat):
            raise ValueError(f"sample at xi={s.xi} is not finite")
        acc += s.qhat * np.exp(-2j * (x @ s.xi))
    acc *= weight
    out = GridFunction(domain, acc.real.astype(complex))
    out.meta["imag_residue"] = float(np.max(np.abs(acc.imag)))
    return out


def potential_fourier(q: GridFunction, xi) -> complex:
    """Quadrature of  int_Omega q e^{2 i xi.x} dx  from grid values of q.

    Diagnostic oracle for validating frequency samples; the reconstruction
    path never calls it.
    """
    xi = np.asarray(xi, dtype=float)
    dom = q.domain
    pos = dom.nodes[dom.interior]
    return complex(np.sum(dom.cell_weights * q.interior_values() * np.exp(2j * (pos @ xi))))
