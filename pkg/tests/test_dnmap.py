import numpy as np
import pytest

from semical import (
    BoundaryFunction,
    SolverConfig,
    boundary_function,
    grid_function,
    normal_derivative,
    solve_poisson,
)
from semical.dnmap import (
    BoundaryMeasure,
    SupportError,
    dirac_measure,
    dn_apply,
    dn_measure_pair,
    dn_partial,
    measure_from_json,
    patch_from_param,
)


def _zero_q(d):
    return grid_function(d, lambda x, y: 0.0 * x)


def test_dn_apply_harmonic_coordinate(square64):
    d = square64
    f = boundary_function(d, lambda x, y: x)
    t = dn_apply(_zero_q(d), 2, f, SolverConfig(delta=2.0))
    p = d.boundary_param
    right = (p > 1) & (p < 2)
    left = p > 3
    horiz = (p < 1) | ((p > 2) & (p < 3))
    assert np.max(np.abs(t.values[right].real - 1.0)) < 1e-10
    assert np.max(np.abs(t.values[left].real + 1.0)) < 1e-10
    assert np.max(np.abs(t.values[horiz].real)) < 1e-10


def test_dn_apply_zero_data(square64):
    d = square64
    f = boundary_function(d, lambda x, y: 0.0 * x)
    t = dn_apply(_zero_q(d), 2, f)
    assert np.max(np.abs(t.values)) == 0.0


def test_dn_apply_perturbation_oracle(disk64):
    # two-term expansion: u ~ u0 + w with u0 the constant extension and
    # Delta w = -q u0^2, w = 0 on the boundary
    d = disk64
    q = grid_function(d, lambda x, y: 1.0 + 0.0 * x)
    amp = 1e-3
    f = boundary_function(d, lambda x, y: amp + 0.0 * x)
    t = dn_apply(q, 2, f)

    rhs = grid_function(d, lambda x, y: -(amp**2) + 0.0 * x)
    w = solve_poisson(d, rhs, None)
    expect = normal_derivative(w)   # d_nu u0 = 0 for the constant extension
    assert np.max(np.abs(t.values - expect.values)) <= 1e-7


def test_dn_linear_at_zero_potential(square64):
    d = square64
    q = _zero_q(d)
    f = boundary_function(d, lambda x, y: 1e-3 * np.sin(2 * np.pi * x) * (1 - y))
    g = boundary_function(d, lambda x, y: 1e-3 * np.cos(np.pi * y))
    fg = BoundaryFunction(d, f.values + g.values)
    lhs = dn_apply(q, 2, fg).values
    rhs = dn_apply(q, 2, f).values + dn_apply(q, 2, g).values
    assert np.max(np.abs(lhs - rhs)) <= 1e-8


def test_dn_partial_restriction(disk64):
    d = disk64
    patch = patch_from_param(d, 0.0, np.pi / 2)
    mask = patch.mask()
    vals = np.where(mask, 1e-3 * np.sin(4 * d.boundary_param), 0.0)
    f = BoundaryFunction(d, vals)
    q = grid_function(d, lambda x, y: 1.0 + 0.0 * x)
    full = dn_apply(q, 2, f)
    part = dn_partial(q, 2, f, patch)
    assert np.array_equal(part.values[mask], full.values[mask])
    assert np.all(part.values[~mask] == 0)


def test_dn_partial_support_violation(disk64):
    d = disk64
    patch = patch_from_param(d, 0.0, np.pi / 2)
    f = boundary_function(d, lambda x, y: 1e-3 + 0.0 * x)   # nonzero everywhere
    with pytest.raises(SupportError):
        dn_partial(_zero_q(d), 2, f, patch)


def test_dn_partial_full_boundary_matches_dn_apply(disk64):
    d = disk64
    patch = patch_from_param(d, 0.0, 2 * np.pi)
    f = boundary_function(d, lambda x, y: 1e-3 * np.cos(np.arctan2(y, x)))
    q = grid_function(d, lambda x, y: 0.5 + 0.0 * x)
    assert np.array_equal(dn_partial(q, 2, f, patch).values, dn_apply(q, 2, f).values)


def test_dn_measure_pair_dirac_mid_edge(square64):
    d = square64
    mu = dirac_measure(d, 1.5)    # middle of the right edge
    assert mu.meta["snap_distance"] < d.h
    f = boundary_function(d, lambda x, y: 1e-2 * x)
    val = dn_measure_pair(_zero_q(d), 2, f, mu)
    assert abs(val - 1e-2) < 1e-2 * 1e-6


def test_dn_measure_pair_zero_data(square64):
    d = square64
    mu = dirac_measure(d, 0.25)
    f = boundary_function(d, lambda x, y: 0.0 * x)
    assert dn_measure_pair(_zero_q(d), 2, f, mu) == 0.0


def test_dn_measure_pair_uniform_density_flux_balance(square64):
    d = square64
    mu = BoundaryMeasure(d, density=boundary_function(d, lambda x, y: 1.0 + 0.0 * x))
    f = boundary_function(d, lambda x, y: 1e-3 * np.exp(x) * np.cos(y))
    val = dn_measure_pair(_zero_q(d), 2, f, mu)
    assert abs(val) <= 1e-8


def test_measure_pair_linear_in_mu(disk64):
    d = disk64
    t = boundary_function(d, lambda x, y: np.sin(3 * np.arctan2(y, x)))
    mu1 = dirac_measure(d, 0.3, weight=2.0)
    mu2 = BoundaryMeasure(d, atoms=list(mu1.atoms),
                          density=boundary_function(d, lambda x, y: 1.0 + 0.0 * x))
    assert mu2.pair(t) == mu1.pair(t) + BoundaryMeasure(
        d, density=boundary_function(d, lambda x, y: 1.0 + 0.0 * x)
    ).pair(t)


def test_measure_from_json(disk64):
    d = disk64
    mu = measure_from_json(d, {"atoms": [{"position": 1.0, "weight": 2.0}], "density": 0.5})
    assert len(mu.atoms) == 1
    assert mu.atoms[0][1] == 2.0
    assert mu.density is not None
    assert max(mu.meta["snap_distances"]) < d.h
    with pytest.raises(ValueError):
        measure_from_json(d, {"atoms": []})   # zero total variation


def test_measure_from_json_square_edge_position(square64):
    # on the square the atom position is arc length along the perimeter
    d = square64
    mu = measure_from_json(d, {"atoms": [{"position": 1.5, "weight": 1.0}]})
    node = d.nodes[d.boundary[mu.atoms[0][0]]]
    assert abs(node[0] - 1.0) < 1e-12 and abs(node[1] - 0.5) < d.h


def test_patch_wraparound(disk64):
    d = disk64
    p = patch_from_param(d, 5.5, 0.5)
    th = d.boundary_param[p.members]
    assert np.all((th >= 5.5) | (th <= 0.5))
    assert p.members.size > 0
