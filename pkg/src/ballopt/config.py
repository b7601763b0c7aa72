"""Run configuration: structured-text parsing with strict validation.

Grammar (documented in the README):
  - line-oriented; ``#`` starts a comment; blank lines ignored
  - ``[section]`` headers group keys; known sections are
    domain, grid, weights, sweep, optimizer, output
  - ``key = value`` entries; values are numbers, booleans (true/false),
    comma-separated number lists, or bare strings
  - unknown sections or keys are rejected, with the offending line number

Command-line flags override config keys after parsing.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields

from .geometry import SHAPE_BUILDERS, Shape
from .limit import ball_radius


class ConfigError(ValueError):
    """Malformed or invalid configuration (CLI exit code 2)."""


_KNOWN_KEYS = {
    "domain": {"shape", "radius", "center", "lo", "hi", "semi_axes", "size",
               "notch", "origin", "vertices", "r_big", "r_small", "gap",
               "neck_halfwidth"},
    "grid": {"h"},
    "weights": {"m_bar", "m_under"},
    "sweep": {"eps_list", "h_blow", "certify", "compute_blowup"},
    "optimizer": {"eps", "stride", "k_best", "guard"},
    "output": {"dir", "workers", "timestamps"},
}

_LIST_KEYS = {"center", "lo", "hi", "semi_axes", "origin", "eps_list", "vertices"}
_STR_KEYS = {"shape", "dir"}
_BOOL_KEYS = {"certify", "compute_blowup", "timestamps"}
_INT_KEYS = {"k_best", "workers"}


@dataclass
class RunConfig:
    """Validated configuration with defaults filled."""

    shape_tag: str
    shape_params: dict
    m_bar: float
    m_under: float
    h: float | None = None
    eps_list: tuple[float, ...] = (0.1, 0.07, 0.05, 0.03, 0.02, 0.01)
    eps: float | None = None
    stride: float | None = None
    k_best: int = 3
    guard: float = 1e-8
    h_blow: float | None = None
    certify: bool = True
    compute_blowup: bool = True
    outdir: str = "out"
    workers: int = 1
    timestamps: bool = False
    source_text: str = field(default="", repr=False)

    def build_shape(self) -> Shape:
        try:
            return SHAPE_BUILDERS[self.shape_tag](self.shape_params)
        except KeyError as exc:
            raise ConfigError(f"domain.shape: unknown shape {self.shape_tag!r} "
                              f"(known: {sorted(SHAPE_BUILDERS)})") from exc

    def resolved_h(self) -> float:
        if self.h is not None:
            return self.h
        dim = 1 if self.shape_tag == "interval" else 2
        return ball_radius(min(self.eps_list), dim) / 8.0

    def config_hash(self) -> str:
        return hashlib.sha256(self.source_text.encode()).hexdigest()[:16]


def _parse_value(key: str, raw: str, lineno: int):
    raw = raw.strip()
    if key in _STR_KEYS:
        return raw
    if key in _BOOL_KEYS:
        low = raw.lower()
        if low in ("true", "yes", "1"):
            return True
        if low in ("false", "no", "0"):
            return False
        raise ConfigError(f"line {lineno}: {key} must be true or false, got {raw!r}")
    if key == "vertices":
        try:
            nums = [float(v) for v in raw.replace(";", ",").split(",") if v.strip()]
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad number in {key}") from exc
        if len(nums) % 2 or len(nums) < 6:
            raise ConfigError(f"line {lineno}: vertices needs >= 3 x,y pairs")
        return tuple((nums[i], nums[i + 1]) for i in range(0, len(nums), 2))
    if key in _LIST_KEYS:
        try:
            return tuple(float(v) for v in raw.split(",") if v.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad number in {key}") from exc
    try:
        if key in _INT_KEYS:
            return int(raw)
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"line {lineno}: {key} expects a number, got {raw!r}") from exc


def parse_config(text: str) -> RunConfig:
    """Parse and validate; raises ConfigError with a line number on bad input."""
    sections: dict[str, dict] = {name: {} for name in _KNOWN_KEYS}
    current: str | None = None
    for lineno, rawline in enumerate(text.splitlines(), start=1):
        line = rawline.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("[") and line.endswith("]"):
            current = line[1:-1].strip()
            if current not in _KNOWN_KEYS:
                raise ConfigError(f"line {lineno}: unknown section [{current}]")
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key = value, got {rawline.strip()!r}")
        if current is None:
            raise ConfigError(f"line {lineno}: key outside any [section]")
        key, _, raw = line.partition("=")
        key = key.strip()
        if key not in _KNOWN_KEYS[current]:
            raise ConfigError(f"line {lineno}: unknown key {key!r} in [{current}]")
        sections[current][key] = _parse_value(key, raw, lineno)

    dom = sections["domain"]
    if "shape" not in dom:
        raise ConfigError("missing domain section: domain.shape is required")
    weights = sections["weights"]
    for k in ("m_bar", "m_under"):
        if k not in weights:
            raise ConfigError(f"weights.{k} is required")
        if weights[k] <= 0:
            raise ConfigError(f"weights.{k} must be positive")

    cfg = RunConfig(
        shape_tag=dom["shape"],
        shape_params={k: v for k, v in dom.items() if k != "shape"},
        m_bar=weights["m_bar"],
        m_under=weights["m_under"],
        h=sections["grid"].get("h"),
        source_text=text,
    )
    sw = sections["sweep"]
    if "eps_list" in sw:
        cfg.eps_list = sw["eps_list"]
    cfg.h_blow = sw.get("h_blow")
    cfg.certify = sw.get("certify", cfg.certify)
    cfg.compute_blowup = sw.get("compute_blowup", cfg.compute_blowup)
    opt = sections["optimizer"]
    cfg.eps = opt.get("eps")
    cfg.stride = opt.get("stride")
    cfg.k_best = opt.get("k_best", cfg.k_best)
    cfg.guard = opt.get("guard", cfg.guard)
    out = sections["output"]
    cfg.outdir = out.get("dir", cfg.outdir)
    cfg.workers = out.get("workers", cfg.workers)
    cfg.timestamps = out.get("timestamps", cfg.timestamps)

    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig):
    eps = cfg.eps_list
    if not eps or any(e <= 0 for e in eps):
        raise ConfigError("eps_list: measures must be positive")
    if any(eps[i + 1] >= eps[i] for i in range(len(eps) - 1)):
        raise ConfigError("eps_list must be strictly decreasing")
    for name in ("h", "eps", "stride", "h_blow"):
        v = getattr(cfg, name)
        if v is not None and v <= 0:
            raise ConfigError(f"{name} must be positive")
    if cfg.k_best < 1:
        raise ConfigError("k_best must be at least 1")
    if cfg.guard < 0:
        raise ConfigError("guard must be nonnegative")
    if cfg.workers < 1:
        raise ConfigError("workers must be at least 1")
    cfg.build_shape()  # shape params validated by construction
