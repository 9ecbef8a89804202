"""Flat ``key = value`` run configuration files.

Blank lines and lines starting with ``#`` are ignored.  Units are part of
the key name.  Exactly one of ``gamma_bar_db`` / ``gamma_bar_linear`` is
required; unknown keys are errors.  Example::

    schemes = three_slot, resolvable_bpsk, resolvable_qpsk
    eb1 = 4
    eb2 = 2
    er = 1
    gamma_bar_db = 20
    snr_db_start = 0
    snr_db_stop = 35
    snr_db_step = 5
    min_errors = 200
    max_trials = 100000000
    seed = 20240601
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .analysis import DEFAULT_ORDER, TABLE_MODES
from .core import PncError, SchemeConfig, validate_config
from .sim import SCHEMES, Stopping


class ConfigError(PncError, ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    schemes: tuple = ("three_slot",)
    scheme: SchemeConfig = field(default_factory=SchemeConfig)
    snr_grid: tuple = ()
    stopping: Stopping = field(default_factory=Stopping)
    seed: int = 1
    quadrature_order: int = DEFAULT_ORDER
    term_tables: str = "printed"
    sigma_n2_report: str = "nominal"
    baseline_energy: str = "amplitude"
    block_frames: int = 1 << 14
    output: str | None = None

    def snapshot(self) -> dict:
        d = asdict(self)
        d["schemes"] = list(self.schemes)
        d["snr_grid"] = list(self.snr_grid)
        return d


def _float(v):
    return float(v)


def _int(v):
    f = float(v)
    if not f.is_integer():
        raise ValueError(f"expected an integer, got {v!r}")
    return int(f)


def _choice(options):
    def parse(v):
        if v not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {v!r}")
        return v
    return parse


def _schemes(v):
    names = tuple(s.strip() for s in v.split(",") if s.strip())
    if not names:
        raise ValueError("at least one scheme is required")
    for s in names:
        _choice(SCHEMES)(s)
    if len(set(names)) != len(names):
        raise ValueError("duplicate scheme")
    return names


PARSERS = {
    "schemes": _schemes,
    "eb1": _float,
    "eb2": _float,
    "er": _float,
    "gamma_bar_db": _float,
    "gamma_bar_linear": _float,
    "snr_db_start": _float,
    "snr_db_stop": _float,
    "snr_db_step": _float,
    "min_errors": _int,
    "max_trials": _int,
    "seed": _int,
    "quadrature_order": _int,
    "term_tables": _choice(TABLE_MODES),
    "sigma_n2_report": _choice(("nominal", "exact")),
    "baseline_energy": _choice(("amplitude", "per_bit")),
    "block_frames": _int,
    "output": str,
}

REQUIRED = ("snr_db_start", "snr_db_stop", "snr_db_step", "seed")


def snr_grid(start: float, stop: float, step: float) -> tuple:
    if step <= 0:
        raise ConfigError("snr_db_step: must be > 0")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(round(start + i * step, 10) for i in range(max(n, 0)))


def parse_config(text: str, source: str = "<config>") -> RunConfig:
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in PARSERS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        try:
            values[key] = PARSERS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: {key}: {exc}") from None
        lines[key] = lineno

    for key in REQUIRED:
        if key not in values:
            raise ConfigError(f"{source}: missing required key {key!r}")
    has_db, has_lin = "gamma_bar_db" in values, "gamma_bar_linear" in values
    if has_db == has_lin:
        raise ConfigError(f"{source}: exactly one of gamma_bar_db, gamma_bar_linear is required")
    gamma_bar = 10 ** (values["gamma_bar_db"] / 10) if has_db else values["gamma_bar_linear"]

    defaults = SchemeConfig()
    scheme = SchemeConfig(values.get("eb1", defaults.eb1), values.get("eb2", defaults.eb2),
                          values.get("er", defaults.er), defaults.sigma2, gamma_bar)
    try:
        validate_config(scheme)
    except PncError as exc:
        raise ConfigError(f"{source}: {exc}") from None

    grid = snr_grid(values["snr_db_start"], values["snr_db_stop"], values["snr_db_step"])
    if not grid:
        raise ConfigError(f"{source}:{lines['snr_db_stop']}: SNR grid is empty")
    try:
        stopping = Stopping(values.get("min_errors", 200), values.get("max_trials", 10**8))
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None
    order = values.get("quadrature_order", DEFAULT_ORDER)
    if order < 2:
        raise ConfigError(f"{source}:{lines['quadrature_order']}: quadrature_order must be >= 2")
    block = values.get("block_frames", 1 << 14)
    if block < 1:
        raise ConfigError(f"{source}:{lines['block_frames']}: block_frames must be >= 1")

    return RunConfig(
        schemes=values.get("schemes", ("three_slot",)),
        scheme=scheme,
        snr_grid=grid,
        stopping=stopping,
        seed=values["seed"],
        quadrature_order=order,
        term_tables=values.get("term_tables", "printed"),
        sigma_n2_report=values.get("sigma_n2_report", "nominal"),
        baseline_energy=values.get("baseline_energy", "amplitude"),
        block_frames=block,
        output=values.get("output"),
    )


def load_config(path) -> RunConfig:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from None
    return parse_config(text, str(path))
