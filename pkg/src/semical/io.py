"""CSV and JSON serialization for fields, frequency samples and reports.

CSV layouts:
  grid/boundary fields : node_index, x1, x2, re, im
  frequency samples    : xi1, xi2, re_qhat, im_qhat, fd_step

Floats are written with repr-level precision through a fixed format, so a
repeated run with identical inputs produces byte-identical files.
"""

from __future__ import annotations

import json

import numpy as np

from .domain import BoundaryFunction, DiscreteDomain, GridFunction

__all__ = [
    "field_to_csv",
    "field_to_json",
    "field_from_json",
    "samples_to_csv",
    "write_json",
]

_FMT = "%.17g"


def _fmt(v: float) -> str:
    return _FMT % v


def field_to_csv(f: GridFunction | BoundaryFunction, path) -> None:
    dom = f.domain
    if isinstance(f, BoundaryFunction):
        ids = dom.boundary
    else:
        ids = np.arange(dom.n_nodes)
    lines = ["node_index,x1,x2,re,im"]
    for k, i in enumerate(ids):
        x, y = dom.nodes[i]
        v = f.values[k]
        lines.append(f"{i},{_fmt(x)},{_fmt(y)},{_fmt(v.real)},{_fmt(v.imag)}")
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _envelope(dom: DiscreteDomain) -> dict:
    return {"shape": dom.shape, "resolution": dom.resolution, "h": dom.h}


def field_to_json(f: GridFunction | BoundaryFunction, path) -> None:
    kind = "boundary" if isinstance(f, BoundaryFunction) else "grid"
    meta = {k: v for k, v in f.meta.items() if isinstance(v, (int, float, str, bool, list))}
    obj = {
        "kind": kind,
        "domain": _envelope(f.domain),
        "values": [[v.real, v.imag] for v in f.values],
        "metadata": meta,
    }
    write_json(obj, path)


def field_from_json(path, domain: DiscreteDomain):
    with open(path) as fh:
        obj = json.load(fh)
    env = obj["domain"]
    if env["shape"] != domain.shape or env["resolution"] != domain.resolution:
        raise ValueError("stored field does not match the given domain")
    vals = np.array([complex(re, im) for re, im in obj["values"]])
    cls = BoundaryFunction if obj["kind"] == "boundary" else GridFunction
    out = cls(domain, vals)
    out.meta.update(obj.get("metadata", {}))
    return out


def samples_to_csv(samples, path) -> None:
    lines = ["xi1,xi2,re_qhat,im_qhat,fd_step"]
    for s in samples:
        step = s.diagnostics.get("fd_step", float("nan"))
        lines.append(
            f"{_fmt(s.xi[0])},{_fmt(s.xi[1])},{_fmt(s.qhat.real)},"
            f"{_fmt(s.qhat.imag)},{_fmt(step)}"
        )
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def write_json(obj: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
