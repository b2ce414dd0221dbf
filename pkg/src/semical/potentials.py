"""Potential fields used in experiments: constants, Gaussian bumps, capped
point singularities, and sums of these.

The singular family realizes integrable-but-unbounded potentials on a fixed
grid: q = |x - c|^(-alpha) with nodes closer than h/2 to the center capped
at h^(-alpha), which keeps every quadrature finite while the field still
behaves like an L^p (not sup-norm) object under refinement.  alpha must
stay below 2 so that alpha * p < 2 has room for some p > 1.

Gaussian convention: amplitude * exp(-|x-c|^2 / (4 width^2)), i.e. ``width``
is the diffusion length of a heat kernel at time width^2 (standard
deviation width * sqrt(2)).
"""

from __future__ import annotations

import numpy as np

from .domain import DiscreteDomain, GridFunction

__all__ = ["constant", "gaussian", "singular", "potential_from_spec"]


def constant(domain: DiscreteDomain, value: float) -> GridFunction:
    return GridFunction(domain, np.full(domain.n_nodes, float(value), dtype=complex))


def gaussian(domain, center, width: float, amplitude: float = 1.0) -> GridFunction:
    cx, cy = center
    x, y = domain.nodes[:, 0], domain.nodes[:, 1]
    vals = amplitude * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (4.0 * width**2))
    return GridFunction(domain, vals.astype(complex))


def singular(domain, center, alpha: float, cap: float | None = None,
             amplitude: float = 1.0) -> GridFunction:
    if not 0 < alpha < 2:
        raise ValueError(f"alpha must be in (0, 2) so the field stays integrable, got {alpha}")
    cx, cy = center
    x, y = domain.nodes[:, 0], domain.nodes[:, 1]
    r = np.hypot(x - cx, y - cy)
    capval = domain.h ** (-alpha) if cap is None else float(cap)
    vals = np.where(r < 0.5 * domain.h, capval, np.maximum(r, 1e-300) ** (-alpha))
    return GridFunction(domain, (amplitude * vals).astype(complex))


def potential_from_spec(domain: DiscreteDomain, spec: dict) -> GridFunction:
    """Build a potential from its config form.

    spec: {"kind": "constant", "value": c}
        | {"kind": "gaussian", "center": (x,y), "width": w, "amplitude": a}
        | {"kind": "singular", "center": (x,y), "alpha": a, "cap": c?, "amplitude": a?}
        | {"kind": "sum", "of": [spec, ...]}
    """
    kind = spec.get("kind")
    if kind == "constant":
        return constant(domain, spec["value"])
    if kind == "gaussian":
        return gaussian(domain, spec["center"], spec["width"], spec.get("amplitude", 1.0))
    if kind == "singular":
        return singular(domain, spec["center"], spec["alpha"], spec.get("cap"),
                        spec.get("amplitude", 1.0))
    if kind == "sum":
        parts = spec.get("of", [])
        if not parts:
            raise ValueError("sum potential needs at least one component")
        total = np.zeros(domain.n_nodes, dtype=complex)
        for sub in parts:
            total = total + potential_from_spec(domain, sub).values
        return GridFunction(domain, total)
    raise ValueError(f"unknown potential kind {kind!r}")
