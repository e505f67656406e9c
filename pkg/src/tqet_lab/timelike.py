"""Time-separated correlator diagnostics between Alice's and Bob's sites.

For orthonormal single-site operator bases ``{O_A,a}`` and ``{O_B,b}`` the
correlator matrix is ``C_ab(t; rho) = Tr[rho O_A,a(t) O_B,b(0)]``.  The
second moment of the spacetime density matrix and its Hilbert-Schmidt norm
follow from C without building the (non-Hermitian) matrix itself:

    Tr T^2   = sum_ab C_ab^2        (complex)
    Tr T T^+ = sum_ab |C_ab|^2      (real, >= |Tr T^2|)
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernel
from .errors import ConfigError
from .model import PAULI, Chain, ChainSpec, GroundState
from .protocol import BranchEnsemble, ProtocolTrace, prepare_branches

PLATEAU_TOL = 1e-12
SCALARIZATIONS = ("abs", "real", "imag")


@dataclass(frozen=True, eq=False)
class OperatorBasis:
    """Four Hermitian operators on one site, orthonormal under the 2x2 trace."""

    n_sites: int
    region: int
    local: np.ndarray  # (4, 2, 2)

    def __len__(self) -> int:
        return len(self.local)

    def embedded(self, k: int) -> np.ndarray:
        """Full-chain matrix of element ``k`` (identity on the other sites)."""
        left = np.eye(2 ** (self.region - 1), dtype=complex)
        right = np.eye(2 ** (self.n_sites - self.region), dtype=complex)
        return kernel.kron(kernel.kron(left, self.local[k]), right)

    def apply(self, k: int, states: np.ndarray) -> np.ndarray:
        """Apply element ``k`` to each row of ``states`` (shape ``(..., dim)``)."""
        lead = states.shape[:-1]
        left = 2 ** (self.region - 1)
        right = 2 ** (self.n_sites - self.region)
        psi = states.reshape(*lead, left, 2, right)
        out = np.einsum("ij,...ajb->...aib", self.local[k], psi)
        return out.reshape(states.shape)

    def rotated(self, r: np.ndarray) -> "OperatorBasis":
        """Real-orthogonal recombination ``o'_k = sum_l r_kl o_l``."""
        return OperatorBasis(self.n_sites, self.region, np.einsum("kl,lij->kij", r, self.local))


def site_basis(n_sites: int, site: int) -> OperatorBasis:
    """``{I, X, Y, Z} / sqrt(2)`` on ``site``."""
    if not 1 <= site <= n_sites:
        raise ConfigError(f"site {site} out of range [1, {n_sites}]")
    local = np.stack([PAULI[p] for p in "IXYZ"]) / np.sqrt(2.0)
    return OperatorBasis(n_sites=n_sites, region=site, local=local)


def expansion_coefficients(basis: OperatorBasis, op_local: np.ndarray) -> np.ndarray:
    """Coefficients ``Tr(o_k op)`` of a single-site operator in ``basis``."""
    return np.einsum("kij,ji->k", basis.local, op_local)


def _source_vectors(rho_source) -> np.ndarray:
    if isinstance(rho_source, GroundState):
        return rho_source.vector[None, :]
    if isinstance(rho_source, BranchEnsemble):
        return rho_source.vectors
    raise TypeError(f"expected GroundState or BranchEnsemble, got {type(rho_source).__name__}")


def correlator_matrix(rho_source, s: kernel.Spectrum, basis_a: OperatorBasis, basis_b: OperatorBasis, t):
    """``C_ab(t)``; shape (4, 4) for scalar t and (T, 4, 4) for an array of times.

    Mixed states given as a branch ensemble are summed branch by branch.
    """
    times = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.zeros((len(times), len(basis_a), len(basis_b)), dtype=complex)
    for v in _source_vectors(rho_source):
        left = kernel.evolve_many(s, v, times)
        a_left = np.stack([basis_a.apply(a, left) for a in range(len(basis_a))])  # (4, T, dim)
        for b in range(len(basis_b)):
            right = kernel.evolve_many(s, basis_b.apply(b, v), times)
            # O_A,a Hermitian: <U v| O_a |U O_b v> = conj(O_a U v) . (U O_b v)
            out[:, :, b] += np.einsum("atj,tj->ta", a_left.conj(), right)
    return out[0] if np.ndim(t) == 0 else out


def tr_t2(c: np.ndarray):
    """``sum C_ab^2`` (no conjugation) over the last two axes."""
    return np.sum(np.asarray(c) ** 2, axis=(-2, -1))


def tr_ttdag(c: np.ndarray):
    return np.sum(np.abs(np.asarray(c)) ** 2, axis=(-2, -1))


@dataclass(frozen=True, eq=False)
class CorrelatorSeries:
    times: np.ndarray
    c_rho_a: np.ndarray
    c_rho_0: np.ndarray
    tr_t2_rho_a: np.ndarray
    tr_t2_rho_0: np.ndarray
    tr_ttdag_rho_a: np.ndarray
    tr_ttdag_rho_0: np.ndarray
    delta_tr_t2: np.ndarray

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self.times) > 1 else 0.0

    def scalar(self, scalarization: str = "abs") -> np.ndarray:
        """Real series extracted from ``delta_tr_t2`` for extremum finding."""
        if scalarization == "abs":
            return np.abs(self.delta_tr_t2)
        if scalarization == "real":
            return self.delta_tr_t2.real
        if scalarization == "imag":
            return self.delta_tr_t2.imag
        raise ValueError(f"scalarization must be one of {SCALARIZATIONS}, got {scalarization!r}")


def run_series(spec: ChainSpec, chain: Chain | None = None, ensemble: BranchEnsemble | None = None) -> CorrelatorSeries:
    chain = chain if chain is not None else Chain.build(spec)
    ensemble = ensemble if ensemble is not None else prepare_branches(chain.ground, spec)
    times = spec.times()
    ba = site_basis(spec.n_sites, spec.site_a)
    bb = site_basis(spec.n_sites, spec.site_b)
    c_a = correlator_matrix(ensemble, chain.spectrum, ba, bb, times)
    c_0 = correlator_matrix(chain.ground, chain.spectrum, ba, bb, times)
    t2_a, t2_0 = tr_t2(c_a), tr_t2(c_0)
    return CorrelatorSeries(
        times=times,
        c_rho_a=c_a,
        c_rho_0=c_0,
        tr_t2_rho_a=t2_a,
        tr_t2_rho_0=t2_0,
        tr_ttdag_rho_a=tr_ttdag(c_a),
        tr_ttdag_rho_0=tr_ttdag(c_0),
        delta_tr_t2=t2_a - t2_0,
    )


def _extremum_indices(series: np.ndarray, kind: str) -> list[float]:
    """Fractional grid indices of interior extrema; plateaus map to their midpoint."""
    x = np.asarray(series, dtype=float)
    if len(x) < 3:
        raise ValueError("need at least 3 samples to locate interior extrema")
    # collapse runs of equal values
    runs = []
    start = 0
    for k in range(1, len(x) + 1):
        if k == len(x) or abs(x[k] - x[k - 1]) > PLATEAU_TOL:
            runs.append((start, k - 1))
            start = k
    found = []
    for i0, i1 in runs:
        if i0 == 0 or i1 == len(x) - 1:
            continue
        left, right, val = x[i0 - 1], x[i1 + 1], x[i0]
        is_min = left > val and right > val
        is_max = left < val and right < val
        if (is_min and kind in ("min", "both")) or (is_max and kind in ("max", "both")):
            found.append(0.5 * (i0 + i1))
    return found


def critical_points(series, dt: float, kind: str = "both", t0: float = 0.0) -> np.ndarray:
    """Times of interior local extrema (``kind`` in min/max/both); endpoints excluded."""
    return t0 + np.asarray(_extremum_indices(series, kind), dtype=float) * dt


@dataclass
class SyncReport:
    pairs: list[tuple[float, float, float]] = field(default_factory=list)
    scalarization: str = "abs"
    empty: bool = True

    @property
    def gaps(self) -> np.ndarray:
        return np.array([p[2] for p in self.pairs], dtype=float)

    @property
    def median_gap(self) -> float:
        return float(np.median(self.gaps)) if self.pairs else float("nan")

    @property
    def max_gap(self) -> float:
        return float(np.max(self.gaps)) if self.pairs else float("nan")


def sync_pairs(target, diagnostic, dt: float, t0: float = 0.0) -> list[tuple[float, float, float]]:
    """Pair each local minimum of ``target`` with the nearest critical point of ``diagnostic``."""
    minima = critical_points(target, dt, kind="min", t0=t0)
    crit = critical_points(diagnostic, dt, kind="both", t0=t0)
    if len(minima) == 0 or len(crit) == 0:
        return []
    pairs = []
    for tm in minima:
        k = int(np.argmin(np.abs(crit - tm)))
        pairs.append((float(tm), float(crit[k]), float(abs(crit[k] - tm))))
    return pairs


def sync_analysis(trace: ProtocolTrace, series: CorrelatorSeries, scalarization: str = "abs") -> SyncReport:
    """Match local minima of dE_min(t) against critical points of the scalarized dTr T^2."""
    if len(trace.t) != len(series.times) or not np.allclose(trace.t, series.times, atol=1e-12):
        raise ValueError("trace and correlator series must share the same time grid")
    dt = series.dt
    pairs = sync_pairs(trace.de_min, series.scalar(scalarization), dt, t0=float(series.times[0]))
    return SyncReport(pairs=pairs, scalarization=scalarization, empty=not pairs)
