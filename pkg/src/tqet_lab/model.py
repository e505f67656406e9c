"""Mixed-field Ising chain, agent operators and ground state.

    H   = -J sum_n Z_n Z_{n+1} - h sum_n Z_n - g sum_n X_n      (open chain)
    H_B = -J Z_B (Z_{B-1} + Z_{B+1}) - h Z_B - g X_B
    H_A = -g X_A

Energies are in units of J and times in 1/J (hbar = 1).
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import reduce
from typing import Mapping

import numpy as np

from . import kernel
from .errors import ConfigError

PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

DEFAULT_J = 1.0
DEFAULT_H = 0.0
DEFAULT_G = -1.05
CHAOTIC_H = 0.5
DEFAULT_SITE_A = 2
DEFAULT_T_MAX = 10.0
DEFAULT_DT = 0.02
MIN_SITES = 4


@dataclass(frozen=True)
class ChainSpec:
    """Full experiment configuration. Sites are 1-based.

    ``site_b`` defaults to ``n_sites - 1``.  Construction validates all
    invariants and raises :class:`ConfigError` naming the offending field.
    """

    n_sites: int
    j: float = DEFAULT_J
    h: float = DEFAULT_H
    g: float = DEFAULT_G
    site_a: int = DEFAULT_SITE_A
    site_b: int | None = None
    sigma_a: str = "Z"
    sigma_b: str = "Y"
    t_max: float = DEFAULT_T_MAX
    dt: float = DEFAULT_DT

    def __post_init__(self):
        if self.site_b is None:
            object.__setattr__(self, "site_b", self.n_sites - 1)
        self.validate()

    def validate(self) -> None:
        n = self.n_sites
        if not isinstance(n, (int, np.integer)) or n < MIN_SITES:
            raise ConfigError(f"n_sites: must be an integer >= {MIN_SITES}, got {n!r}")
        if n > kernel.MAX_SITES:
            raise kernel.CapacityError(
                f"n_sites: {n} exceeds dense-kernel capacity of {kernel.MAX_SITES} sites"
            )
        if not 1 <= self.site_a <= n:
            raise ConfigError(f"site_a: must lie in [1, {n}], got {self.site_a}")
        if not 2 <= self.site_b <= n - 1:
            raise ConfigError(
                f"site_b: must lie in [2, {n - 1}] so both neighbours exist, got {self.site_b}"
            )
        if abs(self.site_a - self.site_b) < 2:
            raise ConfigError(
                f"site_a/site_b: |site_a - site_b| must be >= 2 so that [P_A, H_B] = 0, "
                f"got site_a={self.site_a}, site_b={self.site_b}"
            )
        for name in ("sigma_a", "sigma_b"):
            label = getattr(self, name)
            if label not in ("X", "Y", "Z"):
                raise ConfigError(f"{name}: must be one of X, Y, Z, got {label!r}")
        for name in ("j", "h", "g", "t_max", "dt"):
            if not np.isfinite(getattr(self, name)):
                raise ConfigError(f"{name}: must be finite")
        if self.t_max < 0:
            raise ConfigError(f"t_max: must be >= 0, got {self.t_max}")
        if self.dt <= 0:
            raise ConfigError(f"dt: must be > 0, got {self.dt}")

    @property
    def dim(self) -> int:
        return 2**self.n_sites

    def times(self) -> np.ndarray:
        """Grid ``k * dt`` for ``k = 0 .. round(t_max / dt)``."""
        steps = int(round(self.t_max / self.dt))
        return np.arange(steps + 1) * self.dt

    def with_(self, **changes) -> "ChainSpec":
        if "n_sites" in changes and "site_b" not in changes and self.site_b == self.n_sites - 1:
            changes["site_b"] = None
        return replace(self, **changes)


@dataclass(frozen=True, eq=False)
class GroundState:
    energy: float
    vector: np.ndarray
    degeneracy_gap: float
    degenerate: bool = field(default=False)


def pauli_string(n_sites: int, assignment: Mapping[int, str]) -> np.ndarray:
    """Tensor product of single-site Paulis, identity on unassigned sites."""
    for site, label in assignment.items():
        if not 1 <= site <= n_sites:
            raise ConfigError(f"site {site} out of range [1, {n_sites}]")
        if label not in PAULI:
            raise ConfigError(f"unknown Pauli label {label!r}")
    kernel.check_dim(2**n_sites)
    factors = [PAULI[assignment.get(n, "I")] for n in range(1, n_sites + 1)]
    return reduce(kernel.kron, factors, np.ones((1, 1), dtype=complex))


def ising_hamiltonian(n_sites: int, j: float, h: float, g: float) -> np.ndarray:
    """Open-chain mixed-field Ising Hamiltonian for any ``n_sites >= 1``."""
    if n_sites < 1:
        raise ConfigError("n_sites must be >= 1")
    kernel.check_dim(2**n_sites)
    dim = 2**n_sites
    # Z-basis diagonal assembled from bit patterns; X terms flip one bit
    idx = np.arange(dim)
    z = np.array([1 - 2 * ((idx >> (n_sites - n)) & 1) for n in range(1, n_sites + 1)], dtype=float)
    diag = -h * z.sum(axis=0)
    if n_sites > 1:
        diag -= j * (z[:-1] * z[1:]).sum(axis=0)
    out = np.diag(diag).astype(complex)
    for n in range(1, n_sites + 1):
        out[idx ^ (1 << (n_sites - n)), idx] += -g
    return out


def build_h(spec: ChainSpec) -> np.ndarray:
    return ising_hamiltonian(spec.n_sites, spec.j, spec.h, spec.g)


def build_hb(spec: ChainSpec) -> np.ndarray:
    n, b = spec.n_sites, spec.site_b
    if not 2 <= b <= n - 1:
        raise ConfigError(f"site_b: Bob at the chain edge ({b}) is not supported")
    return (
        -spec.j * (pauli_string(n, {b: "Z", b - 1: "Z"}) + pauli_string(n, {b: "Z", b + 1: "Z"}))
        - spec.h * pauli_string(n, {b: "Z"})
        - spec.g * pauli_string(n, {b: "X"})
    )


def build_ha(spec: ChainSpec) -> np.ndarray:
    return -spec.g * pauli_string(spec.n_sites, {spec.site_a: "X"})


def sigma_a(spec: ChainSpec) -> np.ndarray:
    return pauli_string(spec.n_sites, {spec.site_a: spec.sigma_a})


def sigma_b(spec: ChainSpec) -> np.ndarray:
    return pauli_string(spec.n_sites, {spec.site_b: spec.sigma_b})


def projector_a(spec: ChainSpec, b: int) -> np.ndarray:
    """Alice's outcome projector ``(1 + (-1)^b sigma_A) / 2``."""
    if b not in (0, 1):
        raise ValueError(f"measurement outcome must be 0 or 1, got {b!r}")
    sign = 1.0 if b == 0 else -1.0
    return 0.5 * (np.eye(spec.dim, dtype=complex) + sign * sigma_a(spec))


def bob_unitary(spec: ChainSpec, b: int, theta: float) -> np.ndarray:
    """``exp(-i (-1)^b theta sigma_B)`` in closed form (sigma_B squares to 1)."""
    sign = 1.0 if b == 0 else -1.0
    return np.cos(theta) * np.eye(spec.dim, dtype=complex) - 1j * sign * np.sin(theta) * sigma_b(spec)


def ground_state(h: np.ndarray, spectrum: kernel.Spectrum | None = None) -> GroundState:
    """Lowest eigenvector under the kernel's deterministic tie-breaking."""
    s = spectrum if spectrum is not None else kernel.eigh(h)
    w = s.eigenvalues
    gap = float(w[1] - w[0]) if len(w) > 1 else float("inf")
    return GroundState(
        energy=float(w[0]),
        vector=s.eigenvectors[:, 0].copy(),
        degeneracy_gap=gap,
        degenerate=gap < kernel.DEGENERACY_WIDTH,
    )


@dataclass(frozen=True, eq=False)
class Chain:
    """Everything built from a ChainSpec: operators, spectrum and ground state."""

    spec: ChainSpec
    h: np.ndarray
    h_a: np.ndarray
    h_b: np.ndarray
    sigma_a: np.ndarray
    sigma_b: np.ndarray
    spectrum: kernel.Spectrum
    ground: GroundState

    @classmethod
    def build(cls, spec: ChainSpec) -> "Chain":
        h = build_h(spec)
        s = kernel.eigh(h)
        return cls(
            spec=spec,
            h=h,
            h_a=build_ha(spec),
            h_b=build_hb(spec),
            sigma_a=sigma_a(spec),
            sigma_b=sigma_b(spec),
            spectrum=s,
            ground=ground_state(h, s),
        )
