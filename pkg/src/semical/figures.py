"""Figure rendering for pipeline reports.

Every pipeline that writes delimited output can also drop PNG figures next
to it (config key ``figures``, on by default).  Rendering is headless.
"""

from __future__ import annotations

import numpy as np
import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .domain import BoundaryFunction, GridFunction  # noqa: E402

__all__ = [
    "render_field",
    "render_trace",
    "render_samples",
    "render_reconstruction",
    "render_convergence",
    "render_identity",
]

_DPI = 140


def _scatter_field(ax, f: GridFunction, title: str):
    dom = f.domain
    vals = f.values.real
    sc = ax.scatter(dom.nodes[:, 0], dom.nodes[:, 1], c=vals, s=max(1.0, 9000 / dom.n_nodes),
                    cmap="viridis", marker="s")
    ax.set_aspect("equal")
    ax.set_title(title)
    return sc


def render_field(f: GridFunction, path, title: str = "field") -> None:
    fig, ax = plt.subplots(figsize=(5, 4))
    sc = _scatter_field(ax, f, title)
    fig.colorbar(sc, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_trace(t: BoundaryFunction, path, title: str = "boundary trace") -> None:
    dom = t.domain
    fig, ax = plt.subplots(figsize=(6, 3.5))
    ax.plot(dom.boundary_param, t.values.real, lw=1.2, label="Re")
    if np.max(np.abs(t.values.imag)) > 0:
        ax.plot(dom.boundary_param, t.values.imag, lw=1.2, label="Im")
    ax.set_xlabel("boundary parameter")
    ax.set_title(title)
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_samples(samples, path) -> None:
    xi = np.array([s.xi for s in samples])
    mag = np.array([abs(s.qhat) for s in samples])
    fig, ax = plt.subplots(figsize=(5, 4))
    sc = ax.scatter(xi[:, 0], xi[:, 1], c=mag, s=60, cmap="magma")
    ax.set_xlabel(r"$\xi_1$")
    ax.set_ylabel(r"$\xi_2$")
    ax.set_title(r"$|\hat q(-2\xi)|$ over the frequency lattice")
    ax.set_aspect("equal")
    fig.colorbar(sc, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_reconstruction(q_true: GridFunction, q_rec: GridFunction, path) -> None:
    fig, axes = plt.subplots(1, 3, figsize=(12, 3.6))
    sc0 = _scatter_field(axes[0], q_true, "true potential")
    sc1 = _scatter_field(axes[1], q_rec, "reconstruction")
    diff = GridFunction(q_true.domain, q_true.values - q_rec.values)
    sc2 = _scatter_field(axes[2], diff, "difference")
    for ax, sc in zip(axes, (sc0, sc1, sc2)):
        fig.colorbar(sc, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_convergence(resolutions, errors, path, title: str = "convergence") -> None:
    res = np.asarray(resolutions, dtype=float)
    err = np.asarray(errors, dtype=float)
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(res, np.maximum(err, 1e-17), "o-", lw=1.2)
    if np.all(err > 1e-14):
        slope = np.polyfit(np.log(res), np.log(err), 1)[0]
        ax.set_title(f"{title} (slope {slope:.2f})")
    else:
        ax.set_title(f"{title} (machine precision)")
    ax.set_xlabel("resolution")
    ax.set_ylabel("error / residual")
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)


def render_identity(report, path) -> None:
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    labels = ["|lhs|", "|rhs|", "|lhs-rhs|"]
    vals = [abs(report.lhs), abs(report.rhs), report.abs_residual]
    ax.bar(labels, vals, color=["C0", "C1", "C3"])
    ax.set_yscale("log")
    ax.set_title(f"identity residual (rel {report.rel_residual:.2e})")
    fig.tight_layout()
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
