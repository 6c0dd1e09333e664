"""Run configuration: a flat, sectioned key-value file parsed strictly.

Unknown sections or keys are errors; every run requires an explicit master
seed (no implicit entropy anywhere). See the README for the key tables.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .diagnostics import default_gamma
from .integrators import SCHEMES, StepperConfig
from .noise import NoiseModel, build_coefficients
from .nonlinearity import PowerNonlinearity
from .spectral import Field, Grid, gaussian_bump, multimode_field, plane_wave
from .truncation import TruncationLevel


class ConfigError(ValueError):
    """Invalid or malformed run configuration."""


_KNOWN_KEYS = {
    "grid": {"dimension", "points", "length"},
    "initial": {"type", "amplitude", "width", "center", "mode", "max_mode", "decay", "carrier"},
    "nonlinearity": {"enabled", "alpha", "kappa"},
    "noise": {"modes", "family", "amplitude", "decay", "width"},
    "truncation": {"level", "sweep"},
    "stepper": {"scheme", "dt", "horizon", "dealias", "cayley_tol", "cayley_max_iter"},
    "ensemble": {"paths", "seed"},
    "output": {"sample_every", "snapshot_times", "retain_fields", "gamma"},
    "aldous": {"enabled", "deltas", "gamma", "eta"},
    "convergence": {"dt_exponents", "noise_amplitude"},
}

_REQUIRED = {
    "grid": {"dimension", "points", "length"},
    "stepper": {"scheme", "dt", "horizon"},
    "ensemble": {"paths", "seed"},
}


@dataclass(frozen=True)
class AldousConfig:
    enabled: bool = False
    deltas: tuple[float, ...] = ()
    gamma: float = 0.0
    eta: float = 0.1


@dataclass(frozen=True)
class RunConfig:
    grid: Grid
    initial: dict
    nonlinearity: PowerNonlinearity | None
    noise_family: str
    noise_modes: int
    noise_amplitude: float
    noise_decay: float
    noise_width: float
    stepper: StepperConfig
    sweep: tuple[int, ...]
    paths: int
    seed: int
    sample_every: int
    snapshot_times: tuple[float, ...]
    retain_fields: bool
    gamma: float
    aldous: AldousConfig
    dt_exponents: tuple[int, ...]
    raw: dict = field(repr=False, default_factory=dict)

    def build_noise(self, grid: Grid | None = None) -> NoiseModel:
        return build_coefficients(
            grid or self.grid,
            self.noise_family,
            self.noise_modes,
            self.noise_amplitude,
            self.noise_decay,
            self.noise_width,
        )

    def build_initial(self, grid: Grid | None = None) -> Field:
        g = grid or self.grid
        spec = dict(self.initial)
        kind = spec.pop("type")
        if kind == "gaussian":
            return gaussian_bump(
                g,
                width=spec.get("width", 0.5),
                center=spec.get("center"),
                amplitude=spec.get("amplitude", 1.0),
                carrier=spec.get("carrier"),
            )
        if kind == "plane_wave":
            return plane_wave(g, spec.get("mode", [1] * g.dimension), spec.get("amplitude", 1.0))
        if kind == "multimode":
            return multimode_field(
                g,
                amplitude=spec.get("amplitude", 1.0),
                max_mode=int(spec.get("max_mode", 2)),
                decay=spec.get("decay", 1.0),
            )
        raise ConfigError(f"[initial] type: unknown initial data type {kind!r}")


def _parse_bool(section: str, key: str, raw: str) -> bool:
    low = raw.strip().lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ConfigError(f"[{section}] {key}: expected a boolean, got {raw!r}")


def _parse_float(section: str, key: str, raw: str) -> float:
    try:
        return float(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: expected a number, got {raw!r}") from exc


def _parse_int(section: str, key: str, raw: str) -> int:
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: expected an integer, got {raw!r}") from exc


def _parse_list(section: str, key: str, raw: str, conv) -> tuple:
    try:
        return tuple(conv(tok) for tok in raw.split())
    except ValueError as exc:
        raise ConfigError(f"[{section}] {key}: malformed list {raw!r}") from exc


def load_config(path) -> RunConfig:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = parser.read(path)
    if not read:
        raise ConfigError(f"config file not found or unreadable: {path}")
    return parse_config(parser)


def parse_config(parser: configparser.ConfigParser) -> RunConfig:
    for section in parser.sections():
        if section not in _KNOWN_KEYS:
            raise ConfigError(f"unknown config section [{section}]")
        for key in parser[section]:
            if key not in _KNOWN_KEYS[section]:
                raise ConfigError(f"unknown key [{section}] {key}")
    for section, keys in _REQUIRED.items():
        if section not in parser:
            raise ConfigError(f"missing required config section [{section}]")
        for key in keys:
            if key not in parser[section]:
                raise ConfigError(f"missing required key [{section}] {key}")

    g = parser["grid"]
    try:
        grid = Grid(
            dimension=_parse_int("grid", "dimension", g["dimension"]),
            points=_parse_int("grid", "points", g["points"]),
            length=_parse_float("grid", "length", g["length"]),
        )
    except ValueError as exc:
        raise ConfigError(f"[grid]: {exc}") from exc

    initial: dict = {"type": "gaussian"}
    if "initial" in parser:
        sec = parser["initial"]
        initial["type"] = sec.get("type", "gaussian").strip()
        for key in ("amplitude", "width", "decay"):
            if key in sec:
                initial[key] = _parse_float("initial", key, sec[key])
        if "center" in sec:
            initial["center"] = _parse_list("initial", "center", sec["center"], float)
        if "mode" in sec:
            initial["mode"] = _parse_list("initial", "mode", sec["mode"], int)
        if "carrier" in sec:
            initial["carrier"] = _parse_list("initial", "carrier", sec["carrier"], int)
        if "max_mode" in sec:
            initial["max_mode"] = _parse_int("initial", "max_mode", sec["max_mode"])

    nl = None
    if "nonlinearity" in parser:
        sec = parser["nonlinearity"]
        enabled = _parse_bool("nonlinearity", "enabled", sec.get("enabled", "true"))
        if enabled:
            if "alpha" not in sec or "kappa" not in sec:
                raise ConfigError("missing required key [nonlinearity] alpha/kappa")
            try:
                nl = PowerNonlinearity(
                    alpha=_parse_float("nonlinearity", "alpha", sec["alpha"]),
                    kappa=_parse_int("nonlinearity", "kappa", sec["kappa"]),
                    dimension=grid.dimension,
                )
            except ValueError as exc:
                raise ConfigError(f"[nonlinearity]: {exc}") from exc

    noise_modes, noise_family = 0, "constant"
    noise_amplitude, noise_decay, noise_width = 0.0, 0.0, 0.25
    if "noise" in parser:
        sec = parser["noise"]
        noise_modes = _parse_int("noise", "modes", sec.get("modes", "0"))
        noise_family = sec.get("family", "constant").strip()
        if noise_family not in ("constant", "fourier", "bump", "indicator"):
            raise ConfigError(f"[noise] family: unknown family {noise_family!r}")
        noise_amplitude = _parse_float("noise", "amplitude", sec.get("amplitude", "0.0"))
        noise_decay = _parse_float("noise", "decay", sec.get("decay", "0.0"))
        noise_width = _parse_float("noise", "width", sec.get("width", "0.25"))

    level, sweep = 0, ()
    if "truncation" in parser:
        sec = parser["truncation"]
        if "level" in sec:
            level = _parse_int("truncation", "level", sec["level"])
        if "sweep" in sec:
            sweep = _parse_list("truncation", "sweep", sec["sweep"], int)
            if not sweep:
                raise ConfigError("[truncation] sweep: empty sweep list")
            if "level" not in sec:
                level = sweep[0]
    try:
        trunc = TruncationLevel(level)
    except ValueError as exc:
        raise ConfigError(f"[truncation]: {exc}") from exc

    sec = parser["stepper"]
    scheme = sec["scheme"].strip()
    if scheme not in SCHEMES:
        raise ConfigError(f"[stepper] scheme: unknown scheme {scheme!r}")
    try:
        stepper = StepperConfig(
            scheme=scheme,
            dt=_parse_float("stepper", "dt", sec["dt"]),
            horizon=_parse_float("stepper", "horizon", sec["horizon"]),
            level=trunc,
            dealias=_parse_bool("stepper", "dealias", sec.get("dealias", "false")),
            cayley_tol=_parse_float("stepper", "cayley_tol", sec.get("cayley_tol", "1e-12")),
            cayley_max_iter=_parse_int("stepper", "cayley_max_iter", sec.get("cayley_max_iter", "50")),
        )
    except ValueError as exc:
        raise ConfigError(f"[stepper]: {exc}") from exc

    sec = parser["ensemble"]
    paths = _parse_int("ensemble", "paths", sec["paths"])
    if paths < 1:
        raise ConfigError("[ensemble] paths: must be >= 1")
    seed = _parse_int("ensemble", "seed", sec["seed"])

    sample_every, snapshot_times, retain_fields = 1, (), False
    gamma_raw = "auto"
    if "output" in parser:
        sec = parser["output"]
        sample_every = _parse_int("output", "sample_every", sec.get("sample_every", "1"))
        if sample_every < 1:
            raise ConfigError("[output] sample_every: must be >= 1")
        if "snapshot_times" in sec:
            snapshot_times = _parse_list("output", "snapshot_times", sec["snapshot_times"], float)
        retain_fields = _parse_bool("output", "retain_fields", sec.get("retain_fields", "false"))
        gamma_raw = sec.get("gamma", "auto").strip()
    if gamma_raw == "auto":
        gamma = default_gamma(grid.dimension, nl.alpha) if nl is not None else 0.0
    else:
        gamma = _parse_float("output", "gamma", gamma_raw)
        if not 0.0 <= gamma < 0.5:
            raise ConfigError("[output] gamma: must lie in [0, 1/2)")

    aldous = AldousConfig()
    if "aldous" in parser:
        sec = parser["aldous"]
        enabled = _parse_bool("aldous", "enabled", sec.get("enabled", "false"))
        deltas = _parse_list("aldous", "deltas", sec.get("deltas", ""), float)
        a_gamma = _parse_float("aldous", "gamma", sec.get("gamma", str(gamma)))
        eta = _parse_float("aldous", "eta", sec.get("eta", "0.1"))
        if enabled and not deltas:
            raise ConfigError("missing required key [aldous] deltas")
        aldous = AldousConfig(enabled=enabled, deltas=deltas, gamma=a_gamma, eta=eta)

    dt_exponents = (6, 7, 8, 9, 10)
    if "convergence" in parser:
        sec = parser["convergence"]
        if "dt_exponents" in sec:
            dt_exponents = _parse_list("convergence", "dt_exponents", sec["dt_exponents"], int)

    raw = {s: dict(parser[s]) for s in parser.sections()}
    return RunConfig(
        grid=grid,
        initial=initial,
        nonlinearity=nl,
        noise_family=noise_family,
        noise_modes=noise_modes,
        noise_amplitude=noise_amplitude,
        noise_decay=noise_decay,
        noise_width=noise_width,
        stepper=stepper,
        sweep=sweep,
        paths=paths,
        seed=seed,
        sample_every=sample_every,
        snapshot_times=snapshot_times,
        retain_fields=retain_fields,
        gamma=gamma,
        aldous=aldous,
        dt_exponents=dt_exponents,
        raw=raw,
    )
