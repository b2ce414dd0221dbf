"""Batch pipelines: forward solve, reconstruction, identity verification and
multi-resolution convergence sweeps.

Each pipeline writes delimited output (CSV/JSON) plus a manifest echoing the
configuration, library versions, wall time and every tolerance in effect;
figures are rendered next to the data unless disabled.
"""

from __future__ import annotations

import dataclasses
import math
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ConfigError, ExperimentConfig
from .domain import BoundaryFunction, GridFunction, build_domain, normal_derivative
from .dnmap import BoundaryMeasure, dirac_measure, patch_from_param, snap_to_boundary
from .elliptic import SemilinearProblem, SolverConfig, solve_semilinear
from .identities import (
    verify_full_identity,
    verify_onepoint_identity,
    verify_partial_identity,
)
from .io import field_to_csv, field_to_json, samples_to_csv, write_json
from .potentials import potential_from_spec
from .recon import calderon_pair, frequency_sweep, inverse_transform, xi_lattice

__all__ = ["run_pipeline", "PipelineResult"]


@dataclasses.dataclass
class PipelineResult:
    manifest: dict
    gate_ok: bool = True            # False -> identity residual above tolerance
    metric: float | None = None     # per-resolution error used by sweeps


def _angle(domain) -> np.ndarray:
    period = 4.0 if domain.shape == "square" else 2.0 * np.pi
    return 2.0 * np.pi * domain.boundary_param / period


def _bump(param: np.ndarray, lo: float, hi: float) -> np.ndarray:
    # smooth compactly supported bump on (lo, hi), peak value 1
    u = (2.0 * param - lo - hi) / (hi - lo)
    inside = np.abs(u) < 1.0
    out = np.zeros_like(param)
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
    return out


def _boundary_field(domain, spec: dict, seed: int, amplitude: float) -> BoundaryFunction:
    kind = spec.get("kind", "sine")
    amp = float(spec.get("amplitude", amplitude))
    t = _angle(domain)
    pos = domain.boundary_positions()
    if kind == "sine":
        vals = amp * np.sin(int(spec.get("mode", 1)) * t)
    elif kind == "cosine":
        vals = amp * np.cos(int(spec.get("mode", 1)) * t)
    elif kind == "constant":
        vals = np.full(t.size, amp)
    elif kind == "coordinate":
        vals = amp * pos[:, 0]
    elif kind == "harmonic":
        vals = amp * (pos[:, 0] ** 2 - pos[:, 1] ** 2)
    elif kind == "bump":
        lo = float(spec.get("lo", 0.0))
        hi = float(spec.get("hi", 0.25 * (4.0 if domain.shape == "square" else 2 * np.pi)))
        vals = amp * _bump(domain.boundary_param, lo, hi)
    elif kind == "random":
        rng = np.random.default_rng(seed)
        vals = np.zeros(t.size)
        for k in range(1, 5):
            a, b = rng.normal(), rng.normal()
            vals += a * np.cos(k * t) + b * np.sin(k * t)
        vals *= amp / max(np.max(np.abs(vals)), 1e-30)
    else:
        raise ConfigError(f"unknown boundary data kind {kind!r}")
    return BoundaryFunction(domain, vals.astype(complex))


def _data_family(domain, spec: dict, m: int, patch_range=None) -> list:
    """m boundary data for identity verification, optionally patch-supported."""
    kind = spec.get("kind", "calderon")
    t = _angle(domain)
    if patch_range is not None:
        lo, hi = patch_range
        w = hi - lo
        fs = []
        for k in range(1, m + 1):
            a = lo + w * 0.04 * k
            b = hi - w * 0.04 * (m + 1 - k)
            fs.append(BoundaryFunction(domain, _bump(domain.boundary_param, a, b).astype(complex)))
        return fs
    if kind == "calderon":
        xi = np.asarray(spec.get("xi", (1.0, 0.0)), dtype=float)
        cd = calderon_pair(domain, xi)
        return [cd.f1, cd.f2] + [cd.fill] * (m - 2)
    if kind == "constant":
        ones = BoundaryFunction(domain, np.ones(t.size, dtype=complex))
        return [ones] * m
    if kind == "trig":
        return [
            BoundaryFunction(domain, (1.2 + np.sin(k * t + 0.7 * k)).astype(complex))
            for k in range(1, m + 1)
        ]
    raise ConfigError(f"unknown identity data kind {kind!r}")


def _support_mask(q: GridFunction) -> np.ndarray:
    vals = np.abs(q.interior_values().real)
    peak = vals.max()
    if peak == 0.0:
        return np.ones(vals.size, dtype=bool)
    return vals > 0.01 * peak


def _rel_l2(q_true: GridFunction, q_rec: GridFunction, mask: np.ndarray) -> float:
    w = q_true.domain.cell_weights[mask]
    diff = (q_true.interior_values().real - q_rec.interior_values().real)[mask]
    ref = q_true.interior_values().real[mask]
    denom = float(np.sum(w * ref**2))
    if denom == 0.0:
        return float(math.sqrt(np.sum(w * diff**2)))
    return float(math.sqrt(np.sum(w * diff**2) / denom))


def _solver_config(cfg: ExperimentConfig) -> SolverConfig:
    return SolverConfig()


def _tolerances(cfg: ExperimentConfig, sc: SolverConfig, tol_scale: float) -> dict:
    return {
        "picard_tol": sc.picard_tol,
        "max_iter": sc.max_iter,
        "smallness_delta": sc.delta,
        "blowup_factor": sc.blowup_factor,
        "linear_residual_target": 1e-12,
        "fd_step": cfg.fd_step,
        "residual_gate": cfg.tolerance * tol_scale,
        "tolerance_scale": tol_scale,
        "boundary_amplitude": cfg.amplitude,
    }


def run_pipeline(
    cfg: ExperimentConfig,
    outdir: str | Path | None = None,
    tol_scale: float = 1.0,
    threads: int | None = None,
    write: bool = True,
    figures: bool | None = None,
) -> PipelineResult:
    t0 = time.perf_counter()
    out = Path(outdir if outdir is not None else cfg.output_dir)
    if write:
        out.mkdir(parents=True, exist_ok=True)
    threads = threads if threads is not None else cfg.threads
    figures = cfg.figures if figures is None else figures

    name = cfg.pipeline
    if name == "sweep-convergence":
        return _run_sweep(cfg, out, tol_scale, threads, write, figures, t0)
    runner = {
        "forward": _run_forward,
        "reconstruct": _run_reconstruct,
        "verify-full": _run_verify_full,
        "verify-partial": _run_verify_partial,
        "verify-onepoint": _run_verify_onepoint,
    }.get(name)
    if runner is None:
        raise ConfigError(f"unknown pipeline {name!r}")
    return runner(cfg, out, tol_scale, threads, write, figures, t0)


def _manifest(cfg, tol_scale, t0, outputs, results) -> dict:
    import scipy

    sc = SolverConfig()
    return {
        "pipeline": cfg.pipeline,
        "config": cfg.raw,
        "resolved": {
            "shape": cfg.shape,
            "resolution": cfg.resolution,
            "m": cfg.m,
            "seed": cfg.seed,
            "xi_max": cfg.xi_max,
            "xi_spacing": cfg.xi_spacing,
        },
        "versions": {
            "semical": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "tolerances": _tolerances(cfg, sc, tol_scale),
        "wall_time_s": time.perf_counter() - t0,
        "outputs": outputs,
        "results": results,
    }


def _finish(cfg, out, tol_scale, t0, outputs, results, write, gate_ok=True, metric=None):
    man = _manifest(cfg, tol_scale, t0, outputs, results)
    if write:
        write_json(man, out / "manifest.json")
    return PipelineResult(manifest=man, gate_ok=gate_ok, metric=metric)


def _run_forward(cfg, out, tol_scale, threads, write, figures, t0):
    domain = build_domain(cfg.shape, cfg.resolution)
    q = potential_from_spec(domain, cfg.potential)
    f = _boundary_field(domain, cfg.boundary, cfg.seed, cfg.amplitude)
    sc = _solver_config(cfg)
    u = solve_semilinear(SemilinearProblem(q, cfg.m, f), sc)
    trace = normal_derivative(u)

    outputs = []
    if write:
        field_to_csv(u, out / "u.csv"); outputs.append("u.csv")
        field_to_json(u, out / "u.json"); outputs.append("u.json")
        field_to_csv(trace, out / "dn.csv"); outputs.append("dn.csv")
        if figures:
            from . import figures as figs

            figs.render_field(u, out / "fig_solution.png", "forward solution (Re)")
            figs.render_trace(trace, out / "fig_dn_trace.png", "DN trace")
            outputs += ["fig_solution.png", "fig_dn_trace.png"]

    metric = None
    if cfg.boundary.get("kind") == "harmonic":
        amp = float(cfg.boundary.get("amplitude", cfg.amplitude))
        exact = amp * (domain.nodes[:, 0] ** 2 - domain.nodes[:, 1] ** 2)
        metric = float(np.max(np.abs(u.values - exact)))
    results = {
        "iterations": u.meta.get("iterations"),
        "pde_residual": u.meta.get("pde_residual"),
        "sup_u": float(np.max(np.abs(u.values))),
        "sup_f": f.sup(),
        "exact_error": metric,
    }
    return _finish(cfg, out, tol_scale, t0, outputs, results, write, metric=metric)


def _run_reconstruct(cfg, out, tol_scale, threads, write, figures, t0):
    domain = build_domain(cfg.shape, cfg.resolution)
    q = potential_from_spec(domain, cfg.potential)
    sc = _solver_config(cfg)
    lattice = xi_lattice(cfg.xi_max, cfg.xi_spacing)
    samples = frequency_sweep(q, cfg.m, lattice, sc, step=cfg.fd_step, threads=threads)
    failed = [s.diagnostics["error"] for s in samples if "error" in s.diagnostics]
    q_rec = inverse_transform(samples, domain) if not failed else None

    outputs, results = [], {"n_samples": len(samples), "failed_samples": failed}
    if q_rec is not None:
        mask = _support_mask(q)
        results["rel_l2_support"] = _rel_l2(q, q_rec, mask)
        results["rel_l2_domain"] = _rel_l2(q, q_rec, np.ones(mask.size, dtype=bool))
        results["imag_residue"] = q_rec.meta["imag_residue"]
    if write:
        samples_to_csv(samples, out / "qhat.csv"); outputs.append("qhat.csv")
        if q_rec is not None:
            field_to_csv(q_rec, out / "q_rec.csv"); outputs.append("q_rec.csv")
            field_to_json(q_rec, out / "q_rec.json"); outputs.append("q_rec.json")
            if figures:
                from . import figures as figs

                figs.render_samples(samples, out / "fig_qhat.png")
                figs.render_reconstruction(q, q_rec, out / "fig_reconstruction.png")
                outputs += ["fig_qhat.png", "fig_reconstruction.png"]
    metric = results.get("rel_l2_support")
    return _finish(cfg, out, tol_scale, t0, outputs, results, write, metric=metric)


def _verify_common(cfg, out, tol_scale, write, figures, t0, report, extra_results=None):
    outputs, results = [], {"report": report.to_dict()}
    if extra_results:
        results.update(extra_results)
    if write:
        write_json(report.to_dict(), out / "report.json")
        outputs.append("report.json")
        if figures:
            from . import figures as figs

            figs.render_identity(report, out / "fig_identity.png")
            outputs.append("fig_identity.png")
    return _finish(cfg, out, tol_scale, t0, outputs, results, write,
                   gate_ok=report.ok, metric=report.rel_residual)


def _two_potentials(cfg, domain):
    q1 = potential_from_spec(domain, cfg.potential)
    spec2 = cfg.potential2 if cfg.potential2 is not None else {"kind": "constant", "value": 0.0}
    return q1, potential_from_spec(domain, spec2)


def _identity_spec(cfg, fallback: str) -> dict:
    spec = dict(cfg.boundary)
    if spec.get("kind") not in ("calderon", "constant", "trig"):
        spec["kind"] = fallback
    return spec


def _run_verify_full(cfg, out, tol_scale, threads, write, figures, t0):
    domain = build_domain(cfg.shape, cfg.resolution)
    q1, q2 = _two_potentials(cfg, domain)
    fs = _data_family(domain, _identity_spec(cfg, "calderon"), cfg.m)
    rep = verify_full_identity(q1, q2, cfg.m, fs, _solver_config(cfg),
                               tolerance=cfg.tolerance * tol_scale)
    return _verify_common(cfg, out, tol_scale, write, figures, t0, rep)


def _patch_range(cfg, domain):
    period = 4.0 if domain.shape == "square" else 2.0 * np.pi
    lo = float(cfg.patch.get("lo", 0.0))
    hi = float(cfg.patch.get("hi", 0.25 * period))
    return lo, hi


def _run_verify_partial(cfg, out, tol_scale, threads, write, figures, t0):
    domain = build_domain(cfg.shape, cfg.resolution)
    q1, q2 = _two_potentials(cfg, domain)
    lo, hi = _patch_range(cfg, domain)
    patch = patch_from_param(domain, lo, hi)
    g = BoundaryFunction(domain, _bump(domain.boundary_param, lo, hi).astype(complex))
    fs = _data_family(domain, cfg.boundary, cfg.m, patch_range=(lo, hi))
    rep = verify_partial_identity(q1, q2, cfg.m, patch, g, fs, _solver_config(cfg),
                                  tolerance=cfg.tolerance * tol_scale)
    return _verify_common(cfg, out, tol_scale, write, figures, t0, rep,
                          extra_results={"patch": [lo, hi]})


def _measure_from_cfg(cfg, domain) -> BoundaryMeasure:
    spec = cfg.measure
    if not spec:
        return dirac_measure(domain, 0.8)
    atoms = spec.get("atoms", ())
    if np.isscalar(atoms):
        atoms = (atoms,)
    weights = spec.get("weights", ())
    if np.isscalar(weights):
        weights = (weights,)
    if atoms and not weights:
        weights = (1.0,) * len(atoms)
    if len(atoms) != len(weights):
        raise ConfigError("measure.atoms and measure.weights must have equal length")
    pairs = []
    for pos, wgt in zip(atoms, weights):
        k, _ = snap_to_boundary(domain, float(pos))
        pairs.append((k, complex(wgt)))
    density = None
    if "density" in spec:
        density = BoundaryFunction(
            domain, np.full(domain.n_boundary, complex(spec["density"]))
        )
    return BoundaryMeasure(domain, atoms=pairs, density=density)


def _run_verify_onepoint(cfg, out, tol_scale, threads, write, figures, t0):
    if cfg.shape != "disk":
        raise ConfigError("verify-onepoint requires shape = disk (closed-form kernel)")
    domain = build_domain(cfg.shape, cfg.resolution)
    q1, q2 = _two_potentials(cfg, domain)
    mu = _measure_from_cfg(cfg, domain)
    spec = _identity_spec(cfg, "trig")
    if spec["kind"] == "calderon":
        spec["kind"] = "trig"    # one-point data must include nonnegative tails
    fs = _data_family(domain, spec, cfg.m)
    if cfg.m > 2:
        t = _angle(domain)
        fs = fs[:2] + [
            BoundaryFunction(domain, (1.0 + 0.5 * np.sin(t + k)).astype(complex))
            for k in range(cfg.m - 2)
        ]
    rep = verify_onepoint_identity(q1, q2, cfg.m, mu, fs, _solver_config(cfg),
                                   tolerance=cfg.tolerance * tol_scale)
    return _verify_common(cfg, out, tol_scale, write, figures, t0, rep)


_SWEEPABLE = ("forward", "reconstruct", "verify-full", "verify-partial", "verify-onepoint")


def _run_sweep(cfg, out, tol_scale, threads, write, figures, t0):
    sub = cfg.sweep.get("of") if cfg.sweep else None
    if sub is None:
        raise ConfigError("pipeline sweep-convergence needs key 'sweep.of'")
    if sub not in _SWEEPABLE:
        raise ConfigError(f"cannot sweep pipeline {sub!r}")
    if sub == "forward" and (cfg.boundary.get("kind") != "harmonic"
                             or cfg.potential.get("kind") != "constant"
                             or float(cfg.potential.get("value", 1)) != 0.0):
        raise ConfigError(
            "forward sweeps need the exact harmonic case: boundary.kind = harmonic "
            "and potential.kind = constant with value 0"
        )

    errors = []
    last = None
    for res in cfg.resolutions:
        sub_cfg = dataclasses.replace(cfg, pipeline=sub, resolution=int(res))
        last = run_pipeline(sub_cfg, out, tol_scale, threads, write=False, figures=False)
        if last.metric is None:
            raise ConfigError(f"pipeline {sub!r} produced no sweep metric")
        errors.append(last.metric)

    exact = max(errors) < 1e-12
    orders = []
    for a, b in zip(errors, errors[1:]):
        if exact:
            orders.append("exact")
        elif a > 0 and b > 0:
            orders.append(f"{math.log2(a / b):.17g}")
        else:
            orders.append("")
    lines = ["resolution,error,order"]
    for i, (res, err) in enumerate(zip(cfg.resolutions, errors)):
        order = "" if i == 0 else orders[i - 1]
        lines.append(f"{res},{err:.17g},{order}")
    outputs = []
    if write:
        (out / "sweep.csv").write_text("\n".join(lines) + "\n")
        outputs.append("sweep.csv")
        if figures:
            from . import figures as figs

            figs.render_convergence(cfg.resolutions, errors, out / "fig_convergence.png",
                                    title=f"{sub} sweep")
            outputs.append("fig_convergence.png")

    gate_ok = True
    if sub.startswith("verify"):
        gate_ok = errors[-1] <= cfg.tolerance * tol_scale
    results = {
        "swept_pipeline": sub,
        "resolutions": list(cfg.resolutions),
        "errors": errors,
        "orders": orders,
        "exact": exact,
    }
    return _finish(cfg, out, tol_scale, t0, outputs, results, write,
                   gate_ok=gate_ok, metric=errors[-1])
