"""Experiment configuration: defaults, JSON loading, flag overrides.

One JSON document configures every command; command-line flags override file
values key by key. Validation is strict: unknown keys, wrong types, and
out-of-range values are rejected with messages naming the offending keys, so
a typo cannot silently fall back to a default.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace

import numpy as np

from .flow import BUNDLES, FlowConfig
from .space_form import BergerParams, SpaceFormModel


class ConfigError(ValueError):
    """Malformed or out-of-range configuration input."""


@dataclass(frozen=True)
class ToleranceSet:
    """Acceptance thresholds for every verified claim, overridable per run."""

    koszul: float = 1e-10
    torsion: float = 1e-10
    compatibility: float = 1e-10
    sasaki_limit: float = 1e-12
    conservation: float = 1e-8
    rate_unit: float = 1e-6
    rate_full_rel: float = 1e-5
    chain_agreement: float = 1e-4
    norm_constancy: float = 1e-7
    speed_identity: float = 1e-10
    constancy: float = 1e-6
    vanishing: float = 1e-7
    tail_ratio: float = 1e-12
    span: float = 1e-10
    divergence_min: float = 1e-2

    def __post_init__(self) -> None:
        for f in fields(self):
            value = getattr(self, f.name)
            if not (isinstance(value, (int, float)) and np.isfinite(value) and value > 0):
                raise ConfigError(f"tolerance {f.name!r} must be a positive real")

    def as_dict(self) -> dict[str, float]:
        return {f.name: float(getattr(self, f.name)) for f in fields(self)}


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated settings shared by all commands.

    xi, xi_dot, and u_dir select explicit initial data when present;
    otherwise initial states are drawn from the seeded generator. samples
    controls sweep sizes and defaults to each command's own count when None.
    """

    bundle: str = "T1M"
    n: int = 4
    m: float = 4.0
    delta: float = 0.5
    step: float = 1e-3
    sigma_max: float = 20.0
    sample_stride: int = 10
    pmax: int = 8
    seed: int = 0
    samples: int | None = None
    out: str | None = None
    xi: tuple[float, ...] | None = None
    xi_dot: tuple[float, ...] | None = None
    u_dir: tuple[float, ...] | None = None
    speed: float = 1.0
    renormalize: bool = False
    rank_tol: float = 1e-10
    tolerances: ToleranceSet = field(default_factory=ToleranceSet)

    @property
    def dim(self) -> int:
        return 2 * self.n

    def model(self) -> SpaceFormModel:
        return SpaceFormModel(self.n, self.m)

    def params(self) -> BergerParams:
        return BergerParams(self.delta)

    def flow_config(self) -> FlowConfig:
        return FlowConfig(
            bundle=self.bundle,
            step=self.step,
            sigma_max=self.sigma_max,
            sample_stride=self.sample_stride,
            renormalize=self.renormalize,
        )

    def rng(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    @property
    def explicit_initial(self) -> bool:
        return self.xi is not None

    def echo(self) -> dict:
        """Deterministic dictionary form for report embedding."""
        out = {
            "bundle": self.bundle,
            "n": self.n,
            "m": self.m,
            "delta": self.delta,
            "step": self.step,
            "sigma_max": self.sigma_max,
            "sample_stride": self.sample_stride,
            "pmax": self.pmax,
            "seed": self.seed,
            "samples": self.samples,
            "speed": self.speed,
            "renormalize": self.renormalize,
            "rank_tol": self.rank_tol,
            "xi": list(self.xi) if self.xi is not None else None,
            "xi_dot": list(self.xi_dot) if self.xi_dot is not None else None,
            "u_dir": list(self.u_dir) if self.u_dir is not None else None,
            "tolerances": self.tolerances.as_dict(),
            "float_precision": "float64",
        }
        return out


_INT_KEYS = ("n", "sample_stride", "pmax", "seed", "samples")
_FLOAT_KEYS = ("m", "delta", "step", "sigma_max", "speed", "rank_tol")
_VECTOR_KEYS = ("xi", "xi_dot", "u_dir")
_KNOWN_KEYS = frozenset(
    ("bundle", "out", "renormalize", "tolerances") + _INT_KEYS + _FLOAT_KEYS + _VECTOR_KEYS
)


def _check_int(key: str, value, errors: list[str]) -> int | None:
    if isinstance(value, bool) or not isinstance(value, int):
        errors.append(f"{key}: expected an integer, got {value!r}")
        return None
    return value


def _check_float(key: str, value, errors: list[str]) -> float | None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        errors.append(f"{key}: expected a real number, got {value!r}")
        return None
    if not np.isfinite(value):
        errors.append(f"{key}: must be finite, got {value!r}")
        return None
    return float(value)


def _check_vector(key: str, value, errors: list[str]) -> tuple[float, ...] | None:
    if not isinstance(value, (list, tuple)) or not all(
        isinstance(x, (int, float)) and not isinstance(x, bool) for x in value
    ):
        errors.append(f"{key}: expected a sequence of reals, got {value!r}")
        return None
    vec = tuple(float(x) for x in value)
    if not all(np.isfinite(x) for x in vec):
        errors.append(f"{key}: entries must be finite")
        return None
    return vec


def _merge(raw: dict, errors: list[str]) -> dict:
    clean: dict = {}
    unknown = sorted(set(raw) - _KNOWN_KEYS)
    if unknown:
        errors.append("unknown keys: " + ", ".join(unknown))
    for key in _INT_KEYS:
        if raw.get(key) is not None:
            value = _check_int(key, raw[key], errors)
            if value is not None:
                clean[key] = value
    for key in _FLOAT_KEYS:
        if raw.get(key) is not None:
            value = _check_float(key, raw[key], errors)
            if value is not None:
                clean[key] = value
    for key in _VECTOR_KEYS:
        if raw.get(key) is not None:
            value = _check_vector(key, raw[key], errors)
            if value is not None:
                clean[key] = value
    if raw.get("bundle") is not None:
        if raw["bundle"] not in BUNDLES:
            errors.append(f"bundle: must be one of {list(BUNDLES)}, got {raw['bundle']!r}")
        else:
            clean["bundle"] = raw["bundle"]
    if raw.get("out") is not None:
        if not isinstance(raw["out"], str):
            errors.append(f"out: expected a path string, got {raw['out']!r}")
        else:
            clean["out"] = raw["out"]
    if raw.get("renormalize") is not None:
        if not isinstance(raw["renormalize"], bool):
            errors.append(f"renormalize: expected a boolean, got {raw['renormalize']!r}")
        else:
            clean["renormalize"] = raw["renormalize"]
    if raw.get("tolerances") is not None:
        tols = raw["tolerances"]
        if not isinstance(tols, dict):
            errors.append(f"tolerances: expected an object, got {tols!r}")
        else:
            known = {f.name for f in fields(ToleranceSet)}
            bad = sorted(set(tols) - known)
            if bad:
                errors.append("tolerances: unknown names: " + ", ".join(bad))
            else:
                try:
                    clean["tolerances"] = ToleranceSet(**tols)
                except (ConfigError, TypeError) as exc:
                    errors.append(f"tolerances: {exc}")
    return clean


def _validate(cfg: ExperimentConfig) -> list[str]:
    errors: list[str] = []
    if cfg.n < 1:
        errors.append("n: must be at least 1")
    if cfg.delta < 0:
        errors.append("delta: must be nonnegative")
    if cfg.step <= 0:
        errors.append("step: must be positive")
    if cfg.sigma_max <= 0:
        errors.append("sigma_max: must be positive")
    if cfg.step > cfg.sigma_max:
        errors.append("step: must not exceed sigma_max")
    if cfg.sample_stride < 1:
        errors.append("sample_stride: must be at least 1")
    if cfg.pmax < 2:
        errors.append("pmax: must be at least 2")
    if cfg.samples is not None and cfg.samples < 1:
        errors.append("samples: must be at least 1")
    if cfg.speed <= 0:
        errors.append("speed: must be positive")
    if cfg.rank_tol <= 0:
        errors.append("rank_tol: must be positive")
    for key in _VECTOR_KEYS:
        vec = getattr(cfg, key)
        if vec is not None and len(vec) != cfg.dim:
            errors.append(f"{key}: expected length {cfg.dim} for n={cfg.n}, got {len(vec)}")
    if cfg.xi is None and cfg.xi_dot is not None:
        errors.append("xi_dot: requires xi to be given as well")
    return errors


def load_config(path: str | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Build a validated config from an optional JSON file plus overrides.

    Override values of None mean "not given" and leave the file or default
    value in place. Raises ConfigError on unreadable files, unknown keys,
    type mismatches, and out-of-range values, listing every offence found.
    """
    errors: list[str] = []
    file_raw: dict = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                loaded = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path!r}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file {path!r} is not valid JSON: {exc}") from exc
        if not isinstance(loaded, dict):
            raise ConfigError(f"config file {path!r} must hold a JSON object")
        file_raw = loaded
    merged = _merge(file_raw, errors)
    if overrides:
        stripped = {k: v for k, v in overrides.items() if v is not None}
        merged.update(_merge(stripped, errors))
    if errors:
        raise ConfigError("; ".join(errors))
    cfg = replace(ExperimentConfig(), **merged)
    problems = _validate(cfg)
    if problems:
        raise ConfigError("; ".join(problems))
    return cfg
