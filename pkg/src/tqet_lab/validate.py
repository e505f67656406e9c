"""Self-validation: invariant checks over the whole stack at small N.

Each check yields a measured residual and a tolerance; it passes when
``residual <= tol``.  ``corrupt`` names checks whose tolerance is replaced
by -inf, which is how the harness's failure path is exercised.
"""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from . import kernel
from .model import Chain, ChainSpec, projector_a
from .protocol import (
    compute_mn,
    delta_e_analytic,
    delta_e_direct,
    e_nte,
    e_tqet,
    prepare_branches,
    run_trace,
)
from .timelike import correlator_matrix, run_series, site_basis, tr_t2, tr_ttdag

DEFAULT_N = (4, 6)


@dataclass(frozen=True)
class CheckResult:
    name: str
    n_sites: int
    residual: float
    tol: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual)) and self.residual <= self.tol

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} N={self.n_sites} {self.name:<28} residual={self.residual:.3e} tol={self.tol:.1e}"


def geometry(n_sites: int) -> tuple[int, int]:
    """Alice/Bob sites used for validation: default placement when admissible."""
    if n_sites >= 5:
        return 2, n_sites - 1
    return 1, 3


def _mx(a) -> float:
    a = np.asarray(a)
    return float(np.max(np.abs(a))) if a.size else 0.0


def _checks(spec: ChainSpec) -> Iterable[tuple[str, Callable[[], float], float]]:
    chain = Chain.build(spec)
    ens = prepare_branches(chain.ground, spec)
    eye = np.eye(spec.dim)
    s = chain.spectrum
    grid = np.arange(0, 41) * 0.25
    thetas = np.linspace(-np.pi / 2, np.pi / 2, 33)[1:]
    trace_cache = {}

    def trace():
        if "t" not in trace_cache:
            trace_cache["t"] = run_trace(spec, chain)
        return trace_cache["t"]

    def projector_algebra():
        p0, p1 = projector_a(spec, 0), projector_a(spec, 1)
        return max(_mx(p0 @ p0 - p0), _mx(p1 @ p1 - p1), _mx(p0 + p1 - eye))

    def projector_commutes_hb():
        return max(_mx(kernel.commutator(projector_a(spec, b), chain.h_b)) for b in (0, 1))

    def hermiticity():
        return kernel.max_asymmetry(chain.h)

    def eigh_reconstruction():
        v, w = s.eigenvectors, s.eigenvalues
        return max(_mx(v.conj().T @ v - eye), _mx((v * w) @ v.conj().T - chain.h) / max(kernel.opnorm(chain.h), 1.0))

    def unitarity():
        return max(_mx(s.unitary(t) @ s.unitary(t).conj().T - eye) for t in (0.1, 1.0, 5.0))

    def group_law():
        v = chain.ground.vector + 0.3 * ens.vectors[1]
        v = v / np.linalg.norm(v)
        worst = 0.0
        for t1, t2 in ((0.3, 1.1), (2.0, 3.5)):
            a = kernel.evolve_state(s, kernel.evolve_state(s, v, t1), t2)
            worst = max(worst, _mx(a - kernel.evolve_state(s, v, t1 + t2)))
        return worst

    def branch_weights():
        return max(abs(ens.weights.sum() - 1.0), abs(np.vdot(ens.vectors[0], ens.vectors[1])))

    def mn_reality():
        return trace().imag_residue

    def nte_zero():
        return abs(e_nte(ens, s, chain.h_b, chain.ground, 0.0))

    def energy_conservation():
        vals = sum(
            np.real(np.einsum("ti,ti->t", traj.conj(), traj @ chain.h.T))
            for traj in (kernel.evolve_many(s, v, grid) for v in ens.vectors)
        )
        return float(np.max(vals) - np.min(vals))

    def sign_law():
        # margin: <= 0 iff dE_min <= 1e-12 everywhere and < -1e-10 where |N| > 1e-6
        tr = trace()
        margin = float(np.max(tr.de_min)) - 1e-12
        strict = np.abs(tr.n_corr) > 1e-6
        if np.any(strict):
            margin = max(margin, float(np.max(tr.de_min[strict])) + 1e-10)
        return margin

    def qet_reduction():
        tr = trace()
        return max(abs(tr.e_nte[0]), abs(tr.de_min[0] - tr.e_qet), max(tr.e_qet, 0.0))

    def analytic_vs_direct():
        m, n = compute_mn(ens, chain, grid)
        return max(_mx(delta_e_analytic(m, n, th) - delta_e_direct(ens, chain, grid, th)) for th in thetas)

    def do_nothing():
        return _mx(delta_e_direct(ens, chain, grid, 0.0))

    def decomposition():
        nte = e_nte(ens, s, chain.h_b, chain.ground, grid)
        return max(
            _mx(e_tqet(ens, chain, grid, th) - nte - delta_e_direct(ens, chain, grid, th)) for th in thetas[::4]
        )

    def double_commutator():
        sb = chain.sigma_b
        if spec.sigma_b != "Y":
            return 0.0
        return _mx(0.5 * kernel.commutator(sb, kernel.commutator(sb, chain.h_b)) - 2 * chain.h_b)

    def classical_nullity():
        classical = spec.with_(g=0.0, h=0.0, t_max=5.0, dt=0.05)
        tr = run_trace(classical)
        return max(_mx(tr.e_nte), _mx(tr.n_corr), _mx(tr.de_min), _mx(tr.e_tqet_opt), abs(tr.e_input))

    def series_checks():
        ser = run_series(spec.with_(t_max=2.0, dt=0.1), chain, ens)
        recompute = max(
            _mx(tr_t2(ser.c_rho_a) - ser.tr_t2_rho_a),
            _mx(tr_ttdag(ser.c_rho_a) - ser.tr_ttdag_rho_a),
            _mx(tr_t2(ser.c_rho_0) - ser.tr_t2_rho_0),
        )
        bound = max(
            float(np.max(np.abs(ser.tr_t2_rho_a) - ser.tr_ttdag_rho_a)),
            float(np.max(np.abs(ser.tr_t2_rho_0) - ser.tr_ttdag_rho_0)),
            0.0,
        )
        return recompute, bound

    def basis_invariance():
        ba = site_basis(spec.n_sites, spec.site_a)
        bb = site_basis(spec.n_sites, spec.site_b)
        r = np.eye(4)
        c, sn = np.cos(0.7), np.sin(0.7)
        r[1:3, 1:3] = [[c, -sn], [sn, c]]
        times = np.array([0.0, 0.5, 1.5])
        plain = tr_ttdag(correlator_matrix(ens, s, ba, bb, times))
        rotated = tr_ttdag(correlator_matrix(ens, s, ba, bb.rotated(r), times))
        return _mx(plain - rotated)

    series_cache = {}

    def series(idx):
        def run():
            if "v" not in series_cache:
                series_cache["v"] = series_checks()
            return series_cache["v"][idx]
        return run

    yield "projector_algebra", projector_algebra, 1e-13
    yield "projector_commutes_HB", projector_commutes_hb, 1e-13
    yield "hamiltonian_hermitian", hermiticity, 1e-12
    yield "eigh_reconstruction", eigh_reconstruction, 1e-9
    yield "unitarity", unitarity, 1e-10
    yield "group_law", group_law, 1e-10
    yield "branch_weights", branch_weights, 1e-12
    yield "mn_reality", mn_reality, 1e-10
    yield "nte_zero_at_t0", nte_zero, 1e-12
    yield "energy_conservation_rhoA", energy_conservation, 1e-10
    yield "sign_law", sign_law, 0.0
    yield "qet_reduction", qet_reduction, 1e-10
    yield "analytic_vs_direct", analytic_vs_direct, 1e-9
    yield "do_nothing", do_nothing, 1e-12
    yield "decomposition", decomposition, 1e-10
    yield "double_commutator", double_commutator, 1e-12
    yield "classical_nullity", classical_nullity, 1e-10
    yield "basis_invariance_TTdag", basis_invariance, 1e-10
    yield "TTdag_bounds_TrT2", series(1), 1e-12
    yield "moment_recomputation", series(0), 1e-12


CHECK_NAMES = (
    "projector_algebra", "projector_commutes_HB", "hamiltonian_hermitian", "eigh_reconstruction",
    "unitarity", "group_law", "branch_weights", "mn_reality", "nte_zero_at_t0",
    "energy_conservation_rhoA", "sign_law", "qet_reduction", "analytic_vs_direct", "do_nothing",
    "decomposition", "double_commutator", "classical_nullity", "basis_invariance_TTdag",
    "TTdag_bounds_TrT2", "moment_recomputation",
)


def run_validation(n_values=DEFAULT_N, base: ChainSpec | None = None, corrupt=(), echo=None) -> list[CheckResult]:
    """Run every check at each N; ``echo`` receives one line per check as it completes."""
    corrupt = set(corrupt)
    unknown = corrupt - set(CHECK_NAMES)
    if unknown:
        raise ValueError(f"unknown check name(s): {sorted(unknown)}")
    results = []
    for n in n_values:
        a, b = geometry(n)
        if base is None:
            spec = ChainSpec(n_sites=n, site_a=a, site_b=b)
        else:
            spec = base.with_(n_sites=n, site_a=a, site_b=b)
        for name, fn, tol in _checks(spec):
            res = CheckResult(name, n, float(fn()), -np.inf if name in corrupt else tol)
            results.append(res)
            if echo is not None:
                echo(res.line())
    return results


def timed_validation(**kwargs) -> tuple[list[CheckResult], float]:
    start = time.perf_counter()
    results = run_validation(**kwargs)
    return results, time.perf_counter() - start
