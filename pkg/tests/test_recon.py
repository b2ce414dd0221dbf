import numpy as np
import pytest

from semical import SolverConfig, grid_function
from semical.dnmap import dn_apply
from semical.elliptic import apply_laplacian
from semical.recon import (
    FrequencySample,
    calderon_pair,
    frequency_sweep,
    inverse_transform,
    potential_fourier,
    reconstruct_qhat,
    reconstruct_qhat_from_dn,
    xi_lattice,
)


def _gauss(d):
    return grid_function(
        d, lambda x, y: 0.5 * np.exp(-((x - 0.5) ** 2 + (y - 0.5) ** 2) / (4 * 0.15**2))
    )


def test_calderon_pair_geometry(square64):
    d = square64
    cd = calderon_pair(d, (1.0, 0.0))
    assert np.allclose(cd.eta, (0.0, 1.0))
    cd2 = calderon_pair(d, (0.0, 2.0))
    assert np.allclose(cd2.eta, (-2.0, 0.0))
    # pointwise product of the pair is the pure frequency (exact algebra)
    pos = d.boundary_positions()
    prod = cd.f1.values * cd.f2.values
    expect = np.exp(2j * (pos @ np.array([1.0, 0.0])))
    assert np.max(np.abs(prod - expect)) < 1e-12
    with pytest.raises(ValueError):
        calderon_pair(d, (0.0, 0.0))


def test_calderon_exponentials_discretely_harmonic(domains):
    residuals = []
    for res in (64, 128):
        d = domains[("square", res)]
        xi = np.array([3.0, 4.0])
        eta = np.array([-4.0, 3.0])
        v = grid_function(d, lambda x, y: np.exp((eta[0] + 1j * xi[0]) * x + (eta[1] + 1j * xi[1]) * y))
        residuals.append(np.max(np.abs(apply_laplacian(v))) / np.max(np.abs(v.values)))
    assert residuals[0] / residuals[1] > 3.0


def test_reconstruct_zero_potential(square64):
    d = square64
    q0 = grid_function(d, lambda x, y: 0.0 * x)
    s = reconstruct_qhat(q0, 2, (1.0, 0.0))
    assert abs(s.qhat) <= 1e-6


def test_reconstruct_constant_closed_form(square128):
    # oracle: int_[0,1]^2 c e^{2 i xi.x} dx = c prod (e^{2 i xi_j} - 1)/(2 i xi_j)
    d = square128
    c = 0.02
    q = grid_function(d, lambda x, y: c + 0.0 * x)
    xi = np.array([2.0, 1.0])
    closed = c * np.prod([(np.exp(2j * z) - 1.0) / (2j * z) for z in xi])
    s = reconstruct_qhat(q, 2, xi)
    assert abs(s.qhat - closed) <= 0.05 * abs(closed)


def test_reconstruct_gaussian_matches_quadrature_oracle(square128):
    d = square128
    q = _gauss(d)
    for xi in ((1.0, 0.0), (2.0, 2.0), (0.0, 4.0)):
        s = reconstruct_qhat(q, 2, xi)
        oracle = potential_fourier(q, xi)
        assert abs(s.qhat - oracle) <= 0.05 * abs(oracle)


def test_reconstruct_uses_only_boundary_data(square64):
    # the frequency sample is computable from a DN oracle alone
    d = square64
    q = _gauss(d)
    cfg = SolverConfig()
    calls = []

    def dn(data):
        calls.append(len(data))
        from semical.domain import BoundaryFunction

        return dn_apply(q, 2, BoundaryFunction(d, data), cfg).values

    s_dn = reconstruct_qhat_from_dn(dn, d, 2, (1.0, 0.0), cfg)
    s_q = reconstruct_qhat(q, 2, (1.0, 0.0), cfg)
    assert s_dn.qhat == s_q.qhat
    assert len(calls) == s_dn.diagnostics["solves"]
    assert all(n == d.n_boundary for n in calls)


def test_frequency_sweep_basics(square64):
    d = square64
    q = _gauss(d)
    assert frequency_sweep(q, 2, []) == []
    single = frequency_sweep(q, 2, [np.array([1.0, 0.0])])
    direct = reconstruct_qhat(q, 2, (1.0, 0.0))
    assert single[0].qhat == direct.qhat


def test_frequency_sweep_conjugate_symmetry(square64):
    d = square64
    q = _gauss(d)
    lat = [np.array(v) for v in ((1.0, 0.0), (-1.0, 0.0), (1.0, 2.0), (-1.0, -2.0))]
    out = {tuple(s.xi): s.qhat for s in frequency_sweep(q, 2, lat)}
    for xi in ((1.0, 0.0), (1.0, 2.0)):
        a = out[xi]
        b = out[(-xi[0], -xi[1])]
        assert abs(b - np.conj(a)) <= 1e-3 * abs(a)


def test_frequency_sweep_collects_errors(square32):
    # a diverging solve at one lattice point must not abort the sweep
    d = square32
    q_bad = grid_function(d, lambda x, y: 5e4 + 0.0 * x)
    out = frequency_sweep(q_bad, 2, [np.array([1.0, 0.0]), np.array([2.0, 0.0])])
    assert len(out) == 2
    assert all("error" in s.diagnostics for s in out)
    assert all(not np.isfinite(s.qhat) for s in out)


def test_inverse_transform_basics(square64):
    d = square64
    lat = xi_lattice(1.0)
    zeros = [FrequencySample(xi=xi, qhat=0.0) for xi in lat]
    q0 = inverse_transform(zeros, d)
    assert np.max(np.abs(q0.values)) == 0.0

    one = [FrequencySample(xi=np.array([1.0, 2.0]), qhat=2.0 + 1.0j)]
    field = inverse_transform(one, d)
    expect = (2.0 + 1.0j) * np.exp(-2j * (d.nodes @ np.array([1.0, 2.0]))) * 4.0 / (2 * np.pi) ** 2
    assert np.max(np.abs(field.values - expect.real)) < 1e-12


def test_inverse_transform_rejects_non_lattice(square64):
    d = square64
    samples = [
        FrequencySample(xi=np.array([0.0, 0.0]), qhat=1.0),
        FrequencySample(xi=np.array([1.0, 1.0]), qhat=1.0),
    ]
    with pytest.raises(ValueError):
        inverse_transform(samples, d)


def test_inverse_transform_truncation_bound(square128):
    # oracle-computed samples isolate the lattice-truncation error from the
    # DN pipeline; the measured bound feeds the end-to-end budget
    d = square128
    q = _gauss(d)
    samples = [
        FrequencySample(xi=xi, qhat=potential_fourier(q, xi)) for xi in xi_lattice(4.0)
    ]
    q_rec = inverse_transform(samples, d)
    mask = np.abs(q.interior_values().real) > 0.005
    w = d.cell_weights[mask]
    diff = (q.interior_values().real - q_rec.interior_values().real)[mask]
    rel = np.sqrt(np.sum(w * diff**2) / np.sum(w * q.interior_values().real[mask] ** 2))
    assert rel <= 0.08


def test_monotone_improvement_with_lattice_growth(square64):
    d = square64
    q = _gauss(d)

    def err(xmax):
        samples = [
            FrequencySample(xi=xi, qhat=potential_fourier(q, xi)) for xi in xi_lattice(xmax)
        ]
        q_rec = inverse_transform(samples, d)
        mask = np.abs(q.interior_values().real) > 0.005
        w = d.cell_weights[mask]
        diff = (q.interior_values().real - q_rec.interior_values().real)[mask]
        return np.sqrt(np.sum(w * diff**2) / np.sum(w * q.interior_values().real[mask] ** 2))

    assert err(4.0) <= err(2.0)
