"""Run configuration: flat ``key = value`` text with dotted section prefixes.

Example::

    model.family = kobol
    model.sigma = 1
    model.mu = -2
    q = 1
    n_roots = 1000
    grid.x_min = 0.005
    grid.x_max = 10
    grid.n_points = 2000

Blank lines and ``#`` comments are ignored.  Lattice masses are given as
``model.mass.<j> = <value>``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

from .errors import BoundedJumpsError, ModelError
from .models import LatticeCompoundPoissonModel, SpectrallyNegativeModel, TruncatedKobolModel
from .oracles import McConfig

__all__ = ["ConfigError", "GridSpec", "RunConfig", "parse_config", "load_config", "build_model"]


class ConfigError(BoundedJumpsError, ValueError):
    """Malformed or inconsistent configuration."""


_FAMILY_KEYS = {
    "kobol": {"sigma", "mu", "c_pos", "c_neg", "alpha_pos", "alpha_neg", "beta_pos", "beta_neg", "k"},
    "spectrally_negative": {"sigma", "mu", "c", "alpha", "beta", "k"},
    "lattice": {"h", "drift", "sigma"},
    "poisson": {"k", "rate"},
}
_FAMILY_ALIASES = {"sn": "spectrally_negative", "tempered_stable": "kobol"}

_TOP_KEYS = {"q": float, "n_roots": int, "output_dir": str}
_GRID_KEYS = {"x_min": float, "x_max": float, "n_points": int}
_MC_KEYS = {"n_paths": int, "eps": float, "seed": int, "antithetic": "bool"}
_BROMWICH_KEYS = {"im_cutoff": float, "n_nodes": int}


@dataclass(frozen=True)
class GridSpec:
    x_min: float
    x_max: float
    n_points: int

    def points(self):
        import numpy as np

        return np.linspace(self.x_min, self.x_max, self.n_points)


@dataclass
class RunConfig:
    family: str
    params: dict
    q: float = 1.0
    n_roots: int = 1000
    grid: GridSpec | None = None
    output_dir: str | None = None
    mc: McConfig | None = None
    bromwich: dict = field(default_factory=dict)
    text_hash: str = ""

    def model(self):
        return build_model(self.family, self.params)


def _convert(raw, kind, lineno, key):
    try:
        if kind == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is int:
            val = float(raw)
            if not val.is_integer():
                raise ValueError(raw)
            return int(val)
        return kind(raw)
    except ValueError:
        name = kind if isinstance(kind, str) else kind.__name__
        raise ConfigError(f"line {lineno}: {key}: cannot read {raw!r} as {name}") from None


def parse_config(text: str) -> RunConfig:
    """Parse configuration text; raises ConfigError with line/field diagnostics."""
    entries = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"line {lineno}: expected key = value, got {body!r}")
        key, raw = (s.strip() for s in body.split("=", 1))
        if not key or not raw:
            raise ConfigError(f"line {lineno}: empty key or value")
        if key in entries:
            raise ConfigError(f"line {lineno}: duplicate key {key}")
        entries[key] = (raw, lineno)
    if not entries:
        raise ConfigError("configuration is empty")
    if "model.family" not in entries:
        raise ConfigError("missing model.family")

    family_raw, fam_line = entries.pop("model.family")
    family = _FAMILY_ALIASES.get(family_raw.lower(), family_raw.lower())
    if family not in _FAMILY_KEYS:
        raise ConfigError(f"line {fam_line}: model.family: unknown family {family_raw!r}")

    params = {}
    masses = {}
    top = {}
    grid = {}
    mc = {}
    brom = {}
    for key, (raw, lineno) in entries.items():
        parts = key.split(".")
        if parts[0] == "model":
            if len(parts) == 3 and parts[1] == "mass" and family == "lattice":
                try:
                    j = int(parts[2])
                except ValueError:
                    raise ConfigError(f"line {lineno}: {key}: lattice index must be an integer") from None
                masses[j] = _convert(raw, float, lineno, key)
            elif len(parts) == 2 and parts[1] in _FAMILY_KEYS[family]:
                params[parts[1]] = _convert(raw, float, lineno, key)
            else:
                raise ConfigError(f"line {lineno}: {key}: not a parameter of family {family}")
        elif len(parts) == 1 and key in _TOP_KEYS:
            top[key] = _convert(raw, _TOP_KEYS[key], lineno, key)
        elif len(parts) == 2 and parts[0] == "grid" and parts[1] in _GRID_KEYS:
            grid[parts[1]] = (_convert(raw, _GRID_KEYS[parts[1]], lineno, key), lineno)
        elif len(parts) == 3 and parts[:2] == ["oracle", "mc"] and parts[2] in _MC_KEYS:
            mc[parts[2]] = _convert(raw, _MC_KEYS[parts[2]], lineno, key)
        elif len(parts) == 3 and parts[:2] == ["oracle", "bromwich"] and parts[2] in _BROMWICH_KEYS:
            brom[parts[2]] = _convert(raw, _BROMWICH_KEYS[parts[2]], lineno, key)
        else:
            raise ConfigError(f"line {lineno}: unknown key {key}")
    if family == "lattice":
        if not masses:
            raise ConfigError("lattice family needs at least one model.mass.<j> entry")
        params["masses"] = masses

    cfg = RunConfig(family=family, params=params)
    if "q" in top:
        cfg.q = top["q"]
    if not cfg.q > 0:
        raise ConfigError(f"q: must be > 0, got {cfg.q}")
    if "n_roots" in top:
        cfg.n_roots = top["n_roots"]
    if cfg.n_roots < 1:
        raise ConfigError("n_roots: must be >= 1")
    cfg.output_dir = top.get("output_dir")
    if grid:
        missing = set(_GRID_KEYS) - set(grid)
        if missing:
            raise ConfigError(f"grid: missing {', '.join(sorted('grid.' + m for m in missing))}")
        g = GridSpec(grid["x_min"][0], grid["x_max"][0], grid["n_points"][0])
        if g.n_points < 2:
            raise ConfigError(f"line {grid['n_points'][1]}: grid.n_points: must be >= 2")
        if not g.x_min < g.x_max:
            raise ConfigError(f"line {grid['x_min'][1]}: grid.x_min: must be < grid.x_max")
        cfg.grid = g
    if mc:
        try:
            cfg.mc = McConfig(n_paths=mc.get("n_paths", 100_000), jump_cutoff_eps=mc.get("eps", 1e-2),
                              seed=mc.get("seed", 12345), antithetic=mc.get("antithetic", False))
        except ValueError as exc:
            raise ConfigError(f"oracle.mc: {exc}") from None
    cfg.bromwich = brom
    try:
        model = cfg.model()
    except (ModelError, TypeError) as exc:
        raise ConfigError(f"model: {exc}") from None
    if cfg.mc is not None and cfg.mc.jump_cutoff_eps >= getattr(model, "k", float("inf")):
        raise ConfigError("oracle.mc.eps: must be below the jump bound k")
    cfg.text_hash = hashlib.sha256(text.encode("utf-8")).hexdigest()
    return cfg


def load_config(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def build_model(family: str, params: dict):
    if family == "kobol":
        return TruncatedKobolModel(**params)
    if family == "spectrally_negative":
        return SpectrallyNegativeModel(**params)
    if family == "lattice":
        return LatticeCompoundPoissonModel(**params)
    if family == "poisson":
        k = params.get("k", 1.0)
        return LatticeCompoundPoissonModel(h=k, masses={1: params.get("rate", 1.0)})
    raise ConfigError(f"unknown family {family}")
