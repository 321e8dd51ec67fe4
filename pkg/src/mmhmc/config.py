"""Flat ``key = value`` experiment configuration with strict validation.

Keys are dotted (``model.name``, ``sampler.h``, ``run.seed``). Blank
lines and ``#`` comments are ignored. Unknown keys are errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .errors import ConfigError
from .integrators import CATALOG, FAMILIES, SplittingScheme
from .shadow import SIXTH_ORDER_FAMILIES

MODELS = ("gaussian", "banana", "blr", "sv")
SAMPLERS = ("rwmh", "mala", "hmc", "ghmc", "mmhmc")


@dataclass
class ModelSpec:
    name: str = "gaussian"
    dim: int = 10
    wishart: bool = False
    data: str = ""
    label_column: str = ""
    alpha: float = 100.0
    n_obs: int = 100
    data_seed: int = 0
    # stochastic volatility: simulated series when ``data`` is empty
    beta: float = 0.65
    sigma: float = 0.15
    phi: float = 0.98


@dataclass
class SamplerSpec:
    kind: str = "mmhmc"
    integrator: str = "verlet"
    family: str = ""
    params: Tuple[float, ...] = ()
    shadow_order: int = 4
    shadow_mode: str = "analytic"
    h: float = 0.1
    h_policy: str = "fixed"
    L: int = 10
    L_policy: str = "fixed"
    phi: float = 0.5
    phi_policy: str = "fixed"
    flip: str = "automatic"
    pmmc: str = "implicit"
    rw_scale: float = 1.0
    # parameter block of the stochastic volatility Gibbs sampler
    theta_h: float = 0.03
    theta_L: int = 10


@dataclass
class RunSpec:
    n_samples: int = 1000
    burn_in: int = 100
    thin: int = 1
    n_chains: int = 1
    seed: int = 0


@dataclass
class ExperimentConfig:
    model: ModelSpec = field(default_factory=ModelSpec)
    sampler: SamplerSpec = field(default_factory=SamplerSpec)
    run: RunSpec = field(default_factory=RunSpec)
    out: str = "results"

    def scheme(self) -> SplittingScheme:
        s = self.sampler
        if s.family:
            return SplittingScheme(s.family, s.params, s.family)
        return CATALOG[s.integrator]


_SECTIONS = {"model": ModelSpec, "sampler": SamplerSpec, "run": RunSpec}


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _coerce(text: str, kind: Any):
    if kind is bool or kind == "bool":
        return _parse_bool(text)
    if kind is int or kind == "int":
        return int(text)
    if kind is float or kind == "float":
        return float(text)
    if kind in (Tuple[float, ...], "Tuple[float, ...]"):
        text = text.strip()
        return tuple(float(v) for v in text.replace(",", " ").split()) if text else ()
    return text.strip()


def _field_types(cls) -> Dict[str, Any]:
    return {f.name: f.type for f in fields(cls)}


def set_value(cfg: ExperimentConfig, key: str, text: str, line: Optional[int] = None) -> None:
    """Assign the textual ``text`` to dotted ``key`` with type conversion."""
    if key == "out":
        cfg.out = text.strip()
        return
    section, _, name = key.partition(".")
    cls = _SECTIONS.get(section)
    types = _field_types(cls) if cls else {}
    if name not in types:
        raise ConfigError(f"unknown configuration key {key!r}", key=key, line=line)
    try:
        value = _coerce(text, types[name])
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {exc}", key=key, line=line) from None
    setattr(getattr(cfg, section), name, value)


def parse_config(text: str) -> ExperimentConfig:
    """Parse configuration text and validate it.

    Raises:
        ConfigError: with ``line`` set for syntax errors and ``key`` set for
            unknown keys or invalid values.
    """
    cfg = ExperimentConfig()
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'", line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: missing key", line=lineno)
        if key in seen:
            raise ConfigError(f"line {lineno}: duplicate key {key!r} (first on line {seen[key]})",
                              key=key, line=lineno)
        seen[key] = lineno
        set_value(cfg, key, value, lineno)
    validate(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    """Read and validate a configuration file. Relative data paths are
    resolved against the file's directory."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    cfg = parse_config(text)
    if cfg.model.data and not Path(cfg.model.data).is_absolute():
        cfg.model.data = str((path.parent / cfg.model.data).resolve())
    if cfg.model.data and not Path(cfg.model.data).exists():
        raise ConfigError(f"data file {cfg.model.data} does not exist", key="model.data")
    return cfg


def _check(cond: bool, key: str, message: str) -> None:
    if not cond:
        raise ConfigError(f"{key}: {message}", key=key)


def validate(cfg: ExperimentConfig) -> None:
    """Range and consistency checks; raises :class:`ConfigError` naming the key."""
    m, s, r = cfg.model, cfg.sampler, cfg.run
    _check(m.name in MODELS, "model.name", f"must be one of {MODELS}")
    _check(m.dim >= 1, "model.dim", "must be >= 1")
    _check(m.alpha > 0, "model.alpha", "must be positive")
    _check(m.n_obs >= 1, "model.n_obs", "must be >= 1")
    _check(m.name != "blr" or bool(m.data), "model.data", "the blr model needs a data file")
    _check(m.beta > 0 and m.sigma > 0 and abs(m.phi) < 1, "model.phi", "need beta > 0, sigma > 0, |phi| < 1")
    _check(s.kind in SAMPLERS, "sampler.kind", f"must be one of {SAMPLERS}")
    if s.family:
        _check(s.family in FAMILIES, "sampler.family", f"must be one of {FAMILIES}")
        try:
            SplittingScheme(s.family, s.params)
        except ValueError as exc:
            raise ConfigError(f"sampler.params: {exc}", key="sampler.params") from None
    else:
        _check(s.integrator in CATALOG, "sampler.integrator", f"must be one of {tuple(CATALOG)}")
    _check(s.shadow_order in (4, 6), "sampler.shadow_order", "must be 4 or 6")
    _check(s.shadow_order == 4 or cfg.scheme().family in SIXTH_ORDER_FAMILIES, "sampler.shadow_order",
           "order 6 is available for Verlet and two-stage schemes only")
    _check(s.shadow_mode in ("analytic", "numeric"), "sampler.shadow_mode", "must be analytic or numeric")
    _check(s.h > 0, "sampler.h", "must be positive")
    _check(s.L >= 1, "sampler.L", "must be >= 1")
    _check(0 < s.phi <= 1, "sampler.phi", "must lie in (0, 1]")
    _check(s.h_policy in ("fixed", "uniform"), "sampler.h_policy", "must be fixed or uniform")
    _check(s.L_policy in ("fixed", "uniform"), "sampler.L_policy", "must be fixed or uniform")
    _check(s.phi_policy in ("fixed", "uniform", "around"), "sampler.phi_policy", "must be fixed, uniform or around")
    _check(s.flip in ("automatic", "reduced"), "sampler.flip", "must be automatic or reduced")
    _check(s.pmmc in ("implicit", "explicit"), "sampler.pmmc", "must be implicit or explicit")
    _check(s.rw_scale > 0, "sampler.rw_scale", "must be positive")
    _check(s.theta_h > 0, "sampler.theta_h", "must be positive")
    _check(s.theta_L >= 1, "sampler.theta_L", "must be >= 1")
    _check(m.name != "sv" or s.kind in ("mmhmc", "hmc"), "sampler.kind", "the sv model supports mmhmc and hmc")
    _check(r.n_samples >= 1, "run.n_samples", "must be >= 1")
    _check(0 <= r.burn_in, "run.burn_in", "must be >= 0")
    _check(r.thin >= 1, "run.thin", "must be >= 1")
    _check(r.n_chains >= 1, "run.n_chains", "must be >= 1")
    _check(bool(cfg.out), "out", "must not be empty")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return " ".join(repr(float(v)) for v in value)
    return str(value)


def emit_config(cfg: ExperimentConfig) -> str:
    """Serialise every key; ``parse_config(emit_config(c)) == c``."""
    lines = []
    for section, cls in _SECTIONS.items():
        obj = getattr(cfg, section)
        for f in fields(cls):
            lines.append(f"{section}.{f.name} = {_fmt(getattr(obj, f.name))}")
        lines.append("")
    lines.append(f"out = {cfg.out}")
    return "\n".join(lines) + "\n"
