"""Experiment configuration: a flat ``key = value`` text format with dotted
keys providing one nesting level for grouped settings.

Example::

    pipeline = reconstruct
    shape = square
    resolution = 128
    m = 2
    seed = 7
    output_dir = out
    figures = true

    potential.kind = gaussian
    potential.center = 0.5, 0.5
    potential.width = 0.15
    potential.amplitude = 0.5

    xi_max = 4

Sum potentials reference named groups:  ``potential.kind = sum`` plus
``potential.of = bump, base`` with ``bump.*`` and ``base.*`` groups.
The full schema is documented in docs/config.md.
"""

from __future__ import annotations

from dataclasses import dataclass, field

__all__ = ["ConfigError", "ExperimentConfig", "parse_config", "parse_config_text"]

PIPELINES = (
    "forward",
    "reconstruct",
    "verify-full",
    "verify-partial",
    "verify-onepoint",
    "sweep-convergence",
)

_KNOWN_SCALARS = {
    "pipeline": str,
    "shape": str,
    "resolution": int,
    "m": int,
    "seed": int,
    "output_dir": str,
    "figures": bool,
    "threads": int,
    "xi_max": float,
    "xi_spacing": float,
    "fd_step": float,
    "tolerance": float,
    "resolutions": "int_list",
    "amplitude": float,
}

class ConfigError(ValueError):
    """Unparseable or inconsistent experiment configuration."""


@dataclass
class ExperimentConfig:
    pipeline: str
    shape: str = "square"
    resolution: int = 64
    m: int = 2
    seed: int = 0
    output_dir: str = "out"
    figures: bool = True
    threads: int = 1
    xi_max: float = 4.0
    xi_spacing: float = 1.0
    fd_step: float | None = None
    tolerance: float = 1e-2
    amplitude: float = 1e-3          # boundary data amplitude
    resolutions: list = field(default_factory=lambda: [32, 64, 128])
    potential: dict = field(default_factory=lambda: {"kind": "constant", "value": 1.0})
    potential2: dict | None = None
    boundary: dict = field(default_factory=lambda: {"kind": "sine", "mode": 1})
    patch: dict = field(default_factory=dict)
    measure: dict = field(default_factory=dict)
    sweep: dict = field(default_factory=dict)
    raw: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.pipeline not in PIPELINES:
            raise ConfigError(
                f"unknown pipeline {self.pipeline!r}; expected one of {', '.join(PIPELINES)}"
            )
        if self.shape not in ("square", "disk"):
            raise ConfigError(f"unknown shape {self.shape!r}")
        if self.m < 2:
            raise ConfigError(f"m must be >= 2, got {self.m}")
        _check_potential(self.potential)
        if self.potential2 is not None:
            _check_potential(self.potential2)


def _check_potential(spec: dict) -> None:
    kind = spec.get("kind")
    if kind not in ("constant", "gaussian", "singular", "sum"):
        raise ConfigError(f"unknown potential kind {kind!r}")
    if kind == "singular":
        alpha = float(spec.get("alpha", 0))
        if not 0 < alpha < 2:
            raise ConfigError(
                f"singular potential needs 0 < alpha < 2 (alpha * p < 2 for some p > 1), got {alpha}"
            )
    if kind == "sum":
        for sub in spec.get("of", []):
            _check_potential(sub)


def _parse_value(key: str, text: str):
    text = text.strip()
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    if "," in text:
        return tuple(_parse_value(key, part) for part in text.split(","))
    try:
        iv = int(text)
        return iv
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_config_text(text: str, name: str = "<config>") -> ExperimentConfig:
    flat: dict = {}
    groups: dict[str, dict] = {}
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{name}:{lineno}: expected 'key = value', got {rawline!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not key or not val:
            raise ConfigError(f"{name}:{lineno}: empty key or value")
        if key.count(".") > 1:
            raise ConfigError(f"{name}:{lineno}: at most one nesting level is allowed")
        if "." in key:
            group, _, sub = key.partition(".")
            groups.setdefault(group, {})[sub] = _parse_value(key, val)
        else:
            if key not in _KNOWN_SCALARS:
                raise ConfigError(f"{name}:{lineno}: unknown key {key!r}")
            flat[key] = _parse_value(key, val)

    if "pipeline" not in flat:
        raise ConfigError(f"{name}: missing required key 'pipeline'")

    # resolve sum potentials: 'of' names other top-level groups
    def resolve(group: dict, seen=()) -> dict:
        spec = dict(group)
        if spec.get("kind") == "sum":
            names = spec.get("of", ())
            if isinstance(names, str):
                names = (names,)
            parts = []
            for nm in names:
                nm = str(nm).strip()
                if nm in seen:
                    raise ConfigError(f"{name}: cyclic sum potential through {nm!r}")
                if nm not in groups:
                    raise ConfigError(f"{name}: sum potential references unknown group {nm!r}")
                parts.append(resolve(groups[nm], seen + (nm,)))
            spec["of"] = parts
        return spec

    kwargs: dict = {}
    for key, val in flat.items():
        want = _KNOWN_SCALARS[key]
        if want == "int_list":
            val = [int(v) for v in (val if isinstance(val, tuple) else (val,))]
        elif want in (int, float) and isinstance(val, (int, float)):
            val = want(val)
        elif want is str:
            val = str(val)
        elif want is bool and not isinstance(val, bool):
            raise ConfigError(f"{name}: key {key!r} expects true/false")
        kwargs[key] = val
    for g in ("potential", "potential2", "boundary", "patch", "measure", "sweep"):
        if g in groups:
            kwargs[g] = resolve(groups[g])
    kwargs["raw"] = {**flat, **{k: dict(v) for k, v in groups.items()}}

    try:
        return ExperimentConfig(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{name}: {exc}") from exc


def parse_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, name=str(path))
