"""Mixed derivatives of the DN map in the boundary-data directions.

The map under study is lambda -> DN(sum_k lambda_k f_k) at lambda = 0.
Mixed first-order-in-each derivatives are formed with a full central tensor
stencil over sign patterns in {-1,+1}^K, which cancels every term of the
expansion except the K-linear one up to O(step^2).  Inputs are normalized
to unit sup-norm before differencing and the multilinear rescale factor is
applied afterwards, so exponentially large data stays inside the smallness
region of the solver.

``direct_mth_oracle`` computes the exact m-th linearization from its own
boundary value problem (one linear solve per datum plus one for the product
load) and is the ground truth the stencil is validated against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product

import numpy as np

from .domain import BoundaryFunction, GridFunction, normal_derivative
from .dnmap import dn_apply
from .elliptic import SolverConfig, solve_poisson

__all__ = [
    "LinearizationRequest",
    "first_linearization",
    "mth_fd_derivative",
    "direct_mth_oracle",
    "fd_mixed_derivative",
]


@dataclass
class LinearizationRequest:
    q: GridFunction
    m: int
    fs: list                       # boundary data f_1..f_K
    indices: tuple = None          # which lambda's to differentiate (default: all)
    step: float | None = None      # None -> 1e-2 * delta / m

    def __post_init__(self):
        if len(self.fs) < 1:
            raise ValueError("need at least one boundary datum")
        if self.indices is None:
            self.indices = tuple(range(len(self.fs)))
        self.indices = tuple(int(i) for i in self.indices)
        if len(set(self.indices)) != len(self.indices):
            raise ValueError("derivative indices must be distinct")
        if any(i < 0 or i >= len(self.fs) for i in self.indices):
            raise ValueError("derivative index out of range")
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")


def fd_mixed_derivative(dn, domain, fs, step: float) -> np.ndarray:
    """Central tensor stencil for the mixed derivative along every f in fs.

    ``dn`` maps a boundary-data array to a trace array; ``fs`` are already
    normalized.  2^K evaluations, reduced in a fixed sign order so the
    result is bit-stable.
    """
    K = len(fs)
    acc = np.zeros(domain.n_boundary, dtype=complex)
    for signs in product((-1.0, 1.0), repeat=K):
        data = np.zeros(domain.n_boundary, dtype=complex)
        for s, f in zip(signs, fs):
            data = data + s * step * f
        acc += math.prod(signs) * dn(data)
    return acc / (2.0 * step) ** K


def mth_fd_derivative(req: LinearizationRequest, cfg: SolverConfig | None = None) -> BoundaryFunction:
    """Finite-difference mixed derivative of the DN map at zero data.

    The step halves automatically until every stencil point is inside the
    smallness region.  Output scale is restored by the product of the
    input sup-norms over the differenced directions (multilinearity).
    """
    cfg = cfg or SolverConfig()
    domain = req.q.domain
    fsel = [req.fs[i] for i in req.indices]
    norms = [f.sup() for f in fsel]
    if any(n == 0.0 for n in norms):
        return BoundaryFunction(domain, np.zeros(domain.n_boundary, dtype=complex),
                                meta={"step": 0.0, "solves": 0})
    fnorm = [f.values / n for f, n in zip(fsel, norms)]
    step = req.step if req.step is not None else 1e-2 * cfg.delta / req.m

    # worst stencil amplitude is bounded by K * step for unit-sup inputs,
    # but measure it exactly so complex cancellations are honored
    def worst(stp):
        return max(
            float(np.max(np.abs(sum(s * stp * f for s, f in zip(signs, fnorm)))))
            for signs in product((-1.0, 1.0), repeat=len(fnorm))
        )

    halved = 0
    while worst(step) >= cfg.delta:
        step *= 0.5
        halved += 1
        if halved > 60:
            raise ValueError("cannot satisfy smallness with any positive step")

    def dn(data):
        return dn_apply(req.q, req.m, BoundaryFunction(domain, data), cfg).values

    deriv = fd_mixed_derivative(dn, domain, fnorm, step)
    deriv *= math.prod(norms)
    return BoundaryFunction(
        domain, deriv,
        meta={"step": step, "solves": 2 ** len(fnorm), "halved": halved,
              "rescale": math.prod(norms)},
    )


def first_linearization(q, m: int, f: BoundaryFunction, cfg: SolverConfig | None = None) -> BoundaryFunction:
    """Exact first derivative of the DN map: the harmonic (Laplace) DN trace.

    Independent of q and m by construction; both stay in the signature to
    mirror the nonlinear map being linearized.
    """
    v = solve_poisson(f.domain, None, f)
    return normal_derivative(v)


def _sorted_product(columns: np.ndarray) -> np.ndarray:
    # multiply per-node factors in value-sorted order so the result is
    # exactly invariant under permutations of the inputs
    return np.prod(np.sort(columns, axis=0), axis=0)


def direct_mth_oracle(q, m: int, fs, cfg: SolverConfig | None = None) -> BoundaryFunction:
    """Exact m-th linearization of the DN map for data (f_1, ..., f_m).

    Solves the Laplace problem for each datum, then one Poisson solve with
    load  -m! q prod_k v_k  and zero boundary values; the trace of that
    solution is the m-th derivative.
    """
    if len(fs) != m:
        raise ValueError(f"need m = {m} boundary data, got {len(fs)}")
    domain = q.domain
    vs = [solve_poisson(domain, None, f) for f in fs]
    prod_int = _sorted_product(np.vstack([v.interior_values() for v in vs]))
    rhs = np.zeros(domain.n_nodes, dtype=complex)
    rhs[domain.interior] = -math.factorial(m) * q.interior_values() * prod_int
    w = solve_poisson(domain, GridFunction(domain, rhs), None)
    trace = normal_derivative(w)
    trace.meta["interior_solution"] = w
    return trace
