"""Flat ``key = value`` configuration with dotted section prefixes.

Example::

    # analysis run
    analysis.inputs = samples/
    analysis.output = out
    pso.swarm_size = 30
    pso.bounds = 50, 200
    canny.sigma = 1.4
    render.colormap = 0:20,20,120; 0.35:0,180,200; 0.7:150,220,80; 1:255,235,40
    phantom.voids = 64,50,6,4; 128,50,4,4

Blank lines and lines starting with ``#`` are ignored. Unknown keys are an
error. Later lines override earlier ones; command-line flags override both.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .attention import AttentionParams
from .edges import CannyParams
from .phantom import PhantomSpec, Void
from .pso import FitnessParams, PsoConfig
from .render import DEFAULT_COLORMAP, Colormap

__all__ = ["ConfigError", "AnalysisConfig", "EMIT_KINDS", "parse_config_text", "load_config",
           "parse_phantom_text", "build_config", "build_phantom_spec", "parse_emit"]

EMIT_KINDS = ("mask", "overlay", "composite", "saliency")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class AnalysisConfig:
    inputs: tuple[str, ...] = ()
    output_dir: str = "out"
    pso: PsoConfig = field(default_factory=PsoConfig)
    canny: CannyParams = field(default_factory=CannyParams)
    penalty_low: float = 0.05
    penalty_high: float = 0.95
    penalty_value: float | None = None
    attention: AttentionParams = field(default_factory=AttentionParams)
    band_width: float = 10.0
    min_hole_area: int = 9
    overlay_alpha: float = 0.5
    colormap: Colormap = DEFAULT_COLORMAP
    emit: tuple[str, ...] = EMIT_KINDS
    phantom: PhantomSpec | None = None
    phantom_count: int = 0
    jobs: int = 1

    @property
    def fitness(self) -> FitnessParams:
        return FitnessParams(canny=self.canny, penalty_low=self.penalty_low,
                             penalty_high=self.penalty_high, penalty_value=self.penalty_value)

    def canonical_lines(self) -> list[str]:
        """Effective settings as sorted ``key = value`` lines.

        Output location and worker count do not influence results and are
        left out, so the digest only changes when results can.
        """
        p = self.pso
        items = {
            "analysis.inputs": ",".join(self.inputs),
            "analysis.emit": ",".join(self.emit),
            "analysis.band_width": repr(float(self.band_width)),
            "analysis.min_hole_area": str(self.min_hole_area),
            "analysis.overlay_alpha": repr(float(self.overlay_alpha)),
            "analysis.phantoms": str(self.phantom_count),
            "pso.swarm_size": str(p.swarm_size),
            "pso.max_iterations": str(p.max_iterations),
            "pso.bounds": f"{float(p.bounds[0])!r},{float(p.bounds[1])!r}",
            "pso.inertia": repr(p.inertia),
            "pso.c1": repr(p.c1),
            "pso.c2": repr(p.c2),
            "pso.velocity_clamp_fraction": repr(p.velocity_clamp_fraction),
            "pso.init_velocity_fraction": repr(p.init_velocity_fraction),
            "pso.seed": str(p.seed),
            "canny.sigma": repr(float(self.canny.sigma)),
            "canny.low": repr(float(self.canny.low)),
            "canny.high": repr(float(self.canny.high)),
            "fitness.penalty_low": repr(self.penalty_low),
            "fitness.penalty_high": repr(self.penalty_high),
            "fitness.penalty_value": "auto" if self.penalty_value is None else repr(float(self.penalty_value)),
            "attention.floor": repr(float(self.attention.floor)),
            "attention.decay": repr(float(self.attention.decay)),
            "attention.patch_size": str(self.attention.patch_size),
            "attention.scale": "auto" if self.attention.scale is None else repr(float(self.attention.scale)),
            "render.colormap": self.colormap.format(),
        }
        if self.phantom is not None:
            for f in fields(PhantomSpec):
                value = getattr(self.phantom, f.name)
                if f.name == "voids":
                    value = "; ".join(f"{v.cx!r},{v.cy!r},{v.rx!r},{v.ry!r}" for v in value)
                items[f"phantom.{f.name}"] = str(value)
        return [f"{k} = {items[k]}" for k in sorted(items)]

    def digest(self) -> str:
        text = "\n".join(self.canonical_lines()) + "\n"
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        values[key] = value.strip()
    return values


def load_config(path) -> dict[str, str]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config_text(text, str(path))


parse_phantom_text = parse_config_text


def _split_list(value: str) -> list[str]:
    return [v.strip() for v in value.split(",") if v.strip()]


def parse_emit(value: str) -> tuple[str, ...]:
    kinds = _split_list(value)
    if kinds == ["all"]:
        return EMIT_KINDS
    if kinds == ["none"]:
        return ()
    bad = [k for k in kinds if k not in EMIT_KINDS]
    if bad:
        raise ConfigError(f"unknown emit kind(s) {bad}; choose from all, none, {', '.join(EMIT_KINDS)}")
    return tuple(k for k in EMIT_KINDS if k in kinds)


def _parse_voids(value: str) -> tuple[Void, ...]:
    voids = []
    for item in value.split(";"):
        item = item.strip()
        if not item:
            continue
        parts = [float(p) for p in item.split(",")]
        if len(parts) != 4:
            raise ConfigError(f"void needs cx,cy,rx,ry, got {item!r}")
        voids.append(Void(*parts))
    return tuple(voids)


_PHANTOM_TYPES = {
    "width": int, "height": int, "seed": int,
    "background_mean": float, "background_std": float,
    "deposit_mean": float, "deposit_std": float,
    "interface_row": float, "u_depth": float, "u_width": float,
    "voids": _parse_voids,
}


def build_phantom_spec(values: dict[str, str], base: PhantomSpec | None = None) -> PhantomSpec:
    """Build a phantom spec from ``phantom.*`` keys (other keys are ignored)."""
    kwargs = {}
    for key, raw in values.items():
        if not key.startswith("phantom."):
            continue
        name = key[len("phantom."):]
        if name not in _PHANTOM_TYPES:
            raise ConfigError(f"unknown phantom key {key!r}")
        try:
            kwargs[name] = _PHANTOM_TYPES[name](raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None
    try:
        return replace(base or PhantomSpec(), **kwargs)
    except ValueError as exc:
        raise ConfigError(f"invalid phantom spec: {exc}") from None


def _optional_float(raw: str) -> float | None:
    return None if raw.lower() in ("", "auto", "none") else float(raw)


def _bounds(raw: str) -> tuple[float, float]:
    parts = [float(p) for p in _split_list(raw)]
    if len(parts) != 2:
        raise ValueError("expected LO,HI")
    return parts[0], parts[1]


# key -> (section, field, parser)
_KEYS = {
    "analysis.inputs": ("top", "inputs", lambda v: tuple(_split_list(v))),
    "analysis.output": ("top", "output_dir", str),
    "analysis.emit": ("top", "emit", parse_emit),
    "analysis.band_width": ("top", "band_width", float),
    "analysis.min_hole_area": ("top", "min_hole_area", int),
    "analysis.overlay_alpha": ("top", "overlay_alpha", float),
    "analysis.phantoms": ("top", "phantom_count", int),
    "analysis.jobs": ("top", "jobs", int),
    "pso.swarm_size": ("pso", "swarm_size", int),
    "pso.max_iterations": ("pso", "max_iterations", int),
    "pso.bounds": ("pso", "bounds", _bounds),
    "pso.inertia": ("pso", "inertia", float),
    "pso.c1": ("pso", "c1", float),
    "pso.c2": ("pso", "c2", float),
    "pso.velocity_clamp_fraction": ("pso", "velocity_clamp_fraction", float),
    "pso.init_velocity_fraction": ("pso", "init_velocity_fraction", float),
    "pso.seed": ("pso", "seed", int),
    "canny.sigma": ("canny", "sigma", float),
    "canny.low": ("canny", "low", float),
    "canny.high": ("canny", "high", float),
    "fitness.penalty_low": ("top", "penalty_low", float),
    "fitness.penalty_high": ("top", "penalty_high", float),
    "fitness.penalty_value": ("top", "penalty_value", _optional_float),
    "attention.floor": ("attention", "floor", float),
    "attention.decay": ("attention", "decay", float),
    "attention.patch_size": ("attention", "patch_size", int),
    "attention.scale": ("attention", "scale", _optional_float),
    "render.colormap": ("top", "colormap", Colormap.parse),
}


def build_config(values: dict[str, str], base: AnalysisConfig | None = None) -> AnalysisConfig:
    """Apply parsed ``key = value`` pairs on top of ``base`` (defaults)."""
    base = base or AnalysisConfig()
    sections: dict[str, dict] = {"top": {}, "pso": {}, "canny": {}, "attention": {}}
    for key, raw in values.items():
        if key.startswith("phantom."):
            continue
        if key not in _KEYS:
            raise ConfigError(f"unknown config key {key!r}")
        section, name, parse = _KEYS[key]
        try:
            sections[section][name] = parse(raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None
    try:
        top = dict(sections["top"])
        top["pso"] = replace(base.pso, **sections["pso"])
        top["canny"] = replace(base.canny, **sections["canny"])
        top["attention"] = replace(base.attention, **sections["attention"])
        if any(k.startswith("phantom.") for k in values):
            top["phantom"] = build_phantom_spec(values, base.phantom)
        cfg = replace(base, **top)
        cfg.fitness  # validates the penalty settings
    except ValueError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from None
    if cfg.band_width <= 0:
        raise ConfigError("analysis.band_width must be positive")
    if cfg.min_hole_area < 1:
        raise ConfigError("analysis.min_hole_area must be >= 1")
    if not 0 <= cfg.overlay_alpha <= 1:
        raise ConfigError("analysis.overlay_alpha must lie in [0, 1]")
    if cfg.phantom_count < 0 or cfg.jobs < 1:
        raise ConfigError("analysis.phantoms must be >= 0 and analysis.jobs >= 1")
    if cfg.phantom_count and cfg.phantom is None:
        cfg = replace(cfg, phantom=PhantomSpec())
    return cfg
