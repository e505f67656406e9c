"""Timelike energy-teleportation protocol on pure states.

Alice measures ``sigma_A`` on the ground state at t=0, the two unnormalized
branches ``P_A(b)|g>`` evolve under H, and at time t Bob applies
``U_B(b) = exp(-i (-1)^b theta sigma_B)``.  The feedback gain over natural
evolution has the closed form

    dE(t, theta) = (cos 2theta - 1) M(t) / 2 + sin 2theta N(t) / 2

with ``M = Tr(rho_A(t) [s_B,[s_B,H_B]]) / 2`` and
``N = (i/2) Tr(U {s_A, rho_0} U^dagger [s_B, H_B])``; its minimum over theta
is ``(-M - sqrt(M^2 + N^2)) / 2``.

Density matrices are never formed: every trace is a sum of branch
expectation values, which keeps each time step at O(dim^2).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import kernel
from .errors import NumericalConsistencyError, UndefinedEfficiencyError
from .model import Chain, ChainSpec, GroundState, projector_a

IMAG_TOL = 1e-10
WEIGHT_FLOOR = 1e-14
ZERO_MN = 1e-24
INPUT_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class BranchEnsemble:
    """Unnormalized post-measurement branches ``v_b = P_A(b)|g>``; rows of ``vectors``."""

    vectors: np.ndarray
    weights: np.ndarray
    degenerate: bool = False


@dataclass(frozen=True)
class ProtocolPoint:
    t: float
    m: float
    n_corr: float
    theta_star: float
    de_min: float
    e_nte: float
    e_tqet_opt: float


@dataclass(frozen=True, eq=False)
class ProtocolTrace:
    """Per-time columns of the optimized protocol plus the QET and input scalars."""

    spec: ChainSpec
    t: np.ndarray
    m: np.ndarray
    n_corr: np.ndarray
    theta_star: np.ndarray
    de_min: np.ndarray
    e_nte: np.ndarray
    e_tqet_opt: np.ndarray
    e_qet: float
    e_input: float
    imag_residue: float = 0.0

    def __len__(self) -> int:
        return len(self.t)

    @property
    def points(self) -> list[ProtocolPoint]:
        return list(self)

    def __iter__(self) -> Iterator[ProtocolPoint]:
        for k in range(len(self.t)):
            yield ProtocolPoint(
                t=float(self.t[k]),
                m=float(self.m[k]),
                n_corr=float(self.n_corr[k]),
                theta_star=float(self.theta_star[k]),
                de_min=float(self.de_min[k]),
                e_nte=float(self.e_nte[k]),
                e_tqet_opt=float(self.e_tqet_opt[k]),
            )


def prepare_branches(gs: GroundState, spec: ChainSpec) -> BranchEnsemble:
    vectors = np.stack([projector_a(spec, b) @ gs.vector for b in (0, 1)])
    weights = np.real(np.einsum("bi,bi->b", vectors.conj(), vectors))
    return BranchEnsemble(vectors=vectors, weights=weights, degenerate=bool(weights.min() < WEIGHT_FLOOR))


def _expect_rows(states: np.ndarray, op: np.ndarray) -> np.ndarray:
    """``<psi_k|op|psi_k>`` for every row ``psi_k`` of ``states``."""
    return np.einsum("ki,ki->k", states.conj(), states @ op.T)


def _braket_rows(left: np.ndarray, op: np.ndarray, right: np.ndarray) -> np.ndarray:
    return np.einsum("ki,ki->k", left.conj(), right @ op.T)


def _branch_traj(ensemble: BranchEnsemble, s: kernel.Spectrum, t) -> list[np.ndarray]:
    return [kernel.evolve_many(s, v, t) for v in ensemble.vectors]


def _shape_like(values: np.ndarray, t):
    return float(values[0]) if np.ndim(t) == 0 else values


def _real(values: np.ndarray, what: str) -> tuple[np.ndarray, float]:
    residue = float(np.max(np.abs(values.imag))) if values.size else 0.0
    if residue > IMAG_TOL:
        raise NumericalConsistencyError(f"{what} has imaginary residue {residue:.3e} > {IMAG_TOL:g}")
    return values.real, residue


def e_input(ensemble: BranchEnsemble, h_a: np.ndarray, gs: GroundState) -> float:
    """Energy Alice injects: ``Tr[(rho_A - rho_0) H_A]``."""
    after = sum(kernel.expectation(v, h_a) for v in ensemble.vectors)
    return float(np.real(after - kernel.expectation(gs.vector, h_a)))


def e_nte(ensemble: BranchEnsemble, s: kernel.Spectrum, h_b: np.ndarray, gs: GroundState, t):
    """Bob's energy change under natural evolution; scalar or array in ``t``."""
    base = kernel.expectation(gs.vector, h_b).real
    total = sum(_expect_rows(traj, h_b) for traj in _branch_traj(ensemble, s, t))
    values, _ = _real(total, "E_NTE")
    return _shape_like(values - base, t)


def _mn_complex(ensemble: BranchEnsemble, chain: Chain, t) -> tuple[np.ndarray, np.ndarray]:
    s, sb, hb = chain.spectrum, chain.sigma_b, chain.h_b
    comm = kernel.commutator(sb, hb)
    double = kernel.commutator(sb, comm)
    m = 0.5 * sum(_expect_rows(traj, double) for traj in _branch_traj(ensemble, s, t))
    # N = (i/2) (<U g|C|U s_A g> + <U s_A g|C|U g>), C = [s_B, H_B]
    g_t = kernel.evolve_many(s, chain.ground.vector, t)
    sg_t = kernel.evolve_many(s, chain.sigma_a @ chain.ground.vector, t)
    n = 0.5j * (_braket_rows(g_t, comm, sg_t) + _braket_rows(sg_t, comm, g_t))
    return m, n


def compute_mn(ensemble: BranchEnsemble, chain: Chain, t):
    """Return ``(M(t), N(t))``; raises NumericalConsistencyError on complex residue."""
    m, n = _mn_complex(ensemble, chain, t)
    m, _ = _real(m, "M(t)")
    n, _ = _real(n, "N(t)")
    return _shape_like(m, t), _shape_like(n, t)


def optimal_theta(m, n_corr):
    """Closed-form minimizer of :func:`delta_e_analytic`.

    ``theta* = atan2(-N, -M) / 2`` folded into (-pi/2, pi/2]; the minimum is
    ``(-M - sqrt(M^2 + N^2)) / 2``.  ``(M, N) = (0, 0)`` gives ``(0, 0)``.
    """
    m_arr = np.asarray(m, dtype=float)
    n_arr = np.asarray(n_corr, dtype=float)
    norm2 = m_arr**2 + n_arr**2
    # +0.0 turns -0.0 into +0.0 so atan2 lands on +pi rather than -pi
    theta = 0.5 * np.arctan2(-n_arr + 0.0, -m_arr + 0.0)
    theta = np.where(theta <= -np.pi / 2, theta + np.pi, theta)
    de = 0.5 * (-m_arr - np.sqrt(norm2))
    null = norm2 < ZERO_MN
    theta = np.where(null, 0.0, theta)
    de = np.where(null, 0.0, de)
    if theta.ndim == 0:
        return float(theta), float(de)
    return theta, de


def delta_e_analytic(m, n_corr, theta):
    return 0.5 * (np.cos(2 * theta) - 1.0) * m + 0.5 * np.sin(2 * theta) * n_corr


def _bob_energy_after(ensemble: BranchEnsemble, chain: Chain, t, theta) -> np.ndarray:
    """``sum_b <v_b(t)| U_B(b)^dagger H_B U_B(b) |v_b(t)>`` with explicit conjugation."""
    sb, hb = chain.sigma_b, chain.h_b
    total = 0.0
    for b, traj in enumerate(_branch_traj(ensemble, chain.spectrum, t)):
        sign = 1.0 if b == 0 else -1.0
        rotated = np.cos(theta) * traj - 1j * sign * np.sin(theta) * (traj @ sb.T)
        total = total + _expect_rows(rotated, hb)
    return total


def delta_e_direct(ensemble: BranchEnsemble, chain: Chain, t, theta: float):
    """Feedback gain by brute force: ``sum_b Tr[rho_b(t)(U_B^dag H_B U_B - H_B)]``."""
    after = _bob_energy_after(ensemble, chain, t, theta)
    before = sum(_expect_rows(traj, chain.h_b) for traj in _branch_traj(ensemble, chain.spectrum, t))
    values, _ = _real(after - before, "delta E")
    return _shape_like(values, t)


def e_tqet(ensemble: BranchEnsemble, chain: Chain, t, theta: float):
    """Bob's energy change ``Tr[(rho_TQET(t) - rho_0) H_B]`` after feedback at time t."""
    base = kernel.expectation(chain.ground.vector, chain.h_b).real
    values, _ = _real(_bob_energy_after(ensemble, chain, t, theta), "E_TQET")
    return _shape_like(values - base, t)


def run_trace(spec: ChainSpec, chain: Chain | None = None) -> ProtocolTrace:
    """Optimized protocol on the ChainSpec time grid, theta chosen pointwise in closed form."""
    chain = chain if chain is not None else Chain.build(spec)
    ens = prepare_branches(chain.ground, spec)
    times = spec.times()
    m_c, n_c = _mn_complex(ens, chain, times)
    m, res_m = _real(m_c, "M(t)")
    n, res_n = _real(n_c, "N(t)")
    theta, de = optimal_theta(m, n)
    nte = e_nte(ens, chain.spectrum, chain.h_b, chain.ground, times)
    nte = np.atleast_1d(nte)
    return ProtocolTrace(
        spec=spec,
        t=times,
        m=m,
        n_corr=n,
        theta_star=theta,
        de_min=de,
        e_nte=nte,
        e_tqet_opt=nte + de,
        e_qet=float(de[0]),
        e_input=e_input(ens, chain.h_a, chain.ground),
        imag_residue=max(res_m, res_n),
    )


def ece(trace: ProtocolTrace) -> tuple[float, float]:
    """Operational efficiencies ``(eta_tqet, eta_qet)`` = extracted net gain / E_input."""
    if trace.e_input <= INPUT_FLOOR:
        raise UndefinedEfficiencyError(
            f"efficiency undefined: E_input = {trace.e_input:.3e} <= {INPUT_FLOOR:g}"
        )
    eta_tqet = float(np.max(-trace.de_min)) / trace.e_input
    eta_qet = -trace.e_qet / trace.e_input
    return eta_tqet, eta_qet
