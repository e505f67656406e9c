"""Flat ``key = value`` run configuration.

Blank lines and ``#`` comments are ignored.  Unknown keys are rejected.
``--set key=value`` overrides from the command line win over file values.
Only ``n_sites`` is required; every other key has a documented default
(see ``SCHEMA`` and the README).
"""
from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError
from .model import ChainSpec

OUT_ENV = "TQET_LAB_OUT"
FORMATS = ("csv", "json", "both")


def _bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, default, description); default None means derived or required
SCHEMA = {
    "n_sites": (int, None, "number of spins N (required, 4..12)"),
    "j": (float, 1.0, "Ising coupling J"),
    "h": (float, 0.0, "longitudinal field h"),
    "g": (float, -1.05, "transverse field g"),
    "site_a": (int, 2, "Alice's site (1-based)"),
    "site_b": (int, None, "Bob's site (default n_sites - 1)"),
    "sigma_a": (str, "Z", "Alice's measured Pauli"),
    "sigma_b": (str, "Y", "generator of Bob's rotation"),
    "t_max": (float, 10.0, "end of time grid (1/J)"),
    "dt": (float, 0.02, "time step (1/J)"),
    "g_min": (float, -2.0, "gh sweep: lowest g"),
    "g_max": (float, 2.0, "gh sweep: highest g"),
    "g_num": (int, 41, "gh sweep: number of g points"),
    "h_min": (float, -2.0, "gh sweep: lowest h"),
    "h_max": (float, 2.0, "gh sweep: highest h"),
    "h_num": (int, 41, "gh sweep: number of h points"),
    "n_min": (int, 4, "N sweeps: smallest N"),
    "n_max": (int, 10, "N sweeps: largest N"),
    "allow_large": (_bool, False, "N sweeps: permit N = 11, 12"),
    "distance": (int, 2, "fixed sweep: |site_a - site_b|"),
    "scalarization": (str, "abs", "timelike sync: abs | real | imag of dTr T^2"),
    "out": (str, None, f"output directory (default ${OUT_ENV} or .)"),
    "format": (str, "csv", "csv | json | both"),
    "workers": (int, 1, "process-pool size for sweeps"),
    "plot": (_bool, False, "also render PNG figures next to the data files"),
}


@dataclass(frozen=True)
class RunConfig:
    n_sites: int
    j: float
    h: float
    g: float
    site_a: int
    site_b: int
    sigma_a: str
    sigma_b: str
    t_max: float
    dt: float
    g_min: float
    g_max: float
    g_num: int
    h_min: float
    h_max: float
    h_num: int
    n_min: int
    n_max: int
    allow_large: bool
    distance: int
    scalarization: str
    out: str
    format: str
    workers: int
    plot: bool

    def chain_spec(self) -> ChainSpec:
        return ChainSpec(
            n_sites=self.n_sites, j=self.j, h=self.h, g=self.g,
            site_a=self.site_a, site_b=self.site_b,
            sigma_a=self.sigma_a, sigma_b=self.sigma_b,
            t_max=self.t_max, dt=self.dt,
        )

    def canonical(self) -> str:
        """Stable text form of the physics/sweep keys (output location and format excluded)."""
        skip = {"out", "format", "workers", "plot"}
        lines = []
        for f in fields(self):
            if f.name in skip:
                continue
            val = getattr(self, f.name)
            lines.append(f"{f.name}={val!r}")
        return "\n".join(lines)

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical().encode()).hexdigest()[:16]

    def n_values(self) -> list[int]:
        return list(range(self.n_min, self.n_max + 1))


def _parse_value(key: str, raw: str, where: str):
    parser = SCHEMA[key][0]
    try:
        return parser(raw.strip())
    except ValueError as exc:
        raise ConfigError(f"{where}{key}: cannot parse {raw.strip()!r} ({exc})") from None


def _split(line: str, where: str) -> tuple[str, str]:
    if "=" not in line:
        raise ConfigError(f"{where}expected 'key = value', got {line.strip()!r}")
    key, raw = line.split("=", 1)
    key = key.strip()
    if key not in SCHEMA:
        raise ConfigError(f"{where}unknown key {key!r}")
    return key, raw


def read_pairs(text: str, source: str = "<config>") -> dict:
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        where = f"{source}:{lineno}: "
        key, raw = _split(body, where)
        if key in values:
            raise ConfigError(f"{where}duplicate key {key!r}")
        values[key] = _parse_value(key, raw, where)
    return values


def build_config(values: dict) -> RunConfig:
    if "n_sites" not in values:
        raise ConfigError("n_sites missing")
    merged = {k: spec[1] for k, spec in SCHEMA.items()}
    merged.update(values)
    if merged["site_b"] is None:
        merged["site_b"] = merged["n_sites"] - 1
    if merged["out"] is None:
        merged["out"] = os.environ.get(OUT_ENV, ".")
    if merged["format"] not in FORMATS:
        raise ConfigError(f"format: must be one of {FORMATS}, got {merged['format']!r}")
    if merged["scalarization"] not in ("abs", "real", "imag"):
        raise ConfigError(f"scalarization: must be abs, real or imag, got {merged['scalarization']!r}")
    if merged["workers"] < 1:
        raise ConfigError(f"workers: must be >= 1, got {merged['workers']}")
    for axis in ("g", "h"):
        if merged[f"{axis}_num"] < 1:
            raise ConfigError(f"{axis}_num: must be >= 1")
    if merged["n_min"] > merged["n_max"]:
        raise ConfigError("n_min/n_max: n_min must not exceed n_max")
    limit = 12 if merged["allow_large"] else 10
    if merged["n_max"] > limit:
        raise ConfigError(f"n_max: {merged['n_max']} > {limit} (set allow_large = true for N up to 12)")
    if merged["distance"] < 2:
        raise ConfigError("distance: must be >= 2")
    cfg = RunConfig(**merged)
    cfg.chain_spec()  # enforce ChainSpec invariants now, naming the field
    return cfg


def parse_config(path=None, overrides=()) -> RunConfig:
    """Load and validate a configuration file, then apply ``key=value`` overrides."""
    values = {}
    if path is not None:
        p = Path(path)
        try:
            text = p.read_text()
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {p}") from None
        values = read_pairs(text, str(p))
    for item in overrides:
        key, raw = _split(item, "--set: ")
        values[key] = _parse_value(key, raw, "--set: ")
    return build_config(values)
