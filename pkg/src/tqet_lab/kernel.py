"""Dense complex linear algebra for qubit chains of up to 12 sites.

Qubit ordering: site 1 is the most significant tensor factor, i.e. the left
factor of :func:`kron` addresses the lower-numbered site.  Basis index ``k``
has site ``n`` in state ``(k >> (N - n)) & 1``.

All time evolution goes through a cached :class:`Spectrum`, so a trace over
hundreds of times costs one O(dim^3) diagonalization plus O(dim^2) per step.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, NotHermitianError

MAX_SITES = 12
MAX_DIM = 2**MAX_SITES

HERMITIAN_TOL = 1e-12
DEGENERACY_WIDTH = 1e-10
SIGNIFICANT = 1e-8


def check_dim(dim: int) -> None:
    if dim > MAX_DIM:
        raise CapacityError(
            f"dimension {dim} exceeds dense capacity {MAX_DIM} (N > {MAX_SITES} sites)"
        )


def kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Tensor product with ``a`` on the lower-numbered (more significant) sites."""
    out = np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))
    check_dim(out.shape[0])
    return out


def max_asymmetry(a: np.ndarray) -> float:
    return float(np.max(np.abs(a - a.conj().T))) if a.size else 0.0


def dagger(a: np.ndarray) -> np.ndarray:
    return a.conj().T


def commutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def anticommutator(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b + b @ a


def expectation(v: np.ndarray, op: np.ndarray) -> complex:
    return complex(np.vdot(v, op @ v))


def opnorm(a: np.ndarray) -> float:
    """Spectral (largest singular value) norm."""
    return float(np.linalg.norm(a, 2)) if a.size else 0.0


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Eigendecomposition ``A = V diag(eigenvalues) V^dagger``.

    Eigenvalues ascend; columns of ``eigenvectors`` are orthonormal.
    Treat both arrays as read-only; instances are shared across workers.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.shape[0]

    def phases(self, t) -> np.ndarray:
        """``exp(-i lambda t)``; shape ``(dim,)`` for scalar t, ``(T, dim)`` for arrays."""
        t = np.asarray(t, dtype=float)
        return np.exp(-1j * np.multiply.outer(t, self.eigenvalues))

    def unitary(self, t: float) -> np.ndarray:
        v = self.eigenvectors
        return (v * self.phases(t)) @ v.conj().T

    def to_eigenbasis(self, v: np.ndarray) -> np.ndarray:
        return self.eigenvectors.conj().T @ v


def _canonical_subspace_basis(q: np.ndarray) -> np.ndarray:
    """Representation-independent orthonormal basis of span(q).

    Gram-Schmidt over the columns of the subspace projector, visited in
    computational-basis order, so the result only depends on the subspace.
    """
    k = q.shape[1]
    proj = q @ q.conj().T
    basis: list[np.ndarray] = []
    for col in range(proj.shape[0]):
        w = proj[:, col].copy()
        for b in basis:
            w -= b * np.vdot(b, w)
        nrm = np.linalg.norm(w)
        if nrm > 1e-6:
            w /= nrm
            # one more pass keeps orthogonality at machine precision
            for b in basis:
                w -= b * np.vdot(b, w)
            basis.append(w / np.linalg.norm(w))
            if len(basis) == k:
                break
    return np.stack(basis, axis=1)


def _fix_phases(vecs: np.ndarray) -> np.ndarray:
    """Make the first component with magnitude > SIGNIFICANT real and positive."""
    out = vecs.copy()
    for j in range(out.shape[1]):
        col = out[:, j]
        idx = int(np.argmax(np.abs(col) > SIGNIFICANT))
        ph = col[idx] / abs(col[idx])
        out[:, j] = col / ph
    return out


def _lead_index(col: np.ndarray) -> int:
    return int(np.argmax(np.abs(col) > SIGNIFICANT))


def eigh(a: np.ndarray) -> Spectrum:
    """Hermitian eigendecomposition with deterministic degenerate-cluster handling.

    Raises NotHermitianError when ``max|a - a^dagger| >= 1e-12``.
    """
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {a.shape}")
    check_dim(a.shape[0])
    asym = max_asymmetry(a)
    if asym >= HERMITIAN_TOL:
        raise NotHermitianError(f"matrix is not Hermitian: max|A - A^dagger| = {asym:.3e}")
    herm = 0.5 * (a + a.conj().T)
    w, v = np.linalg.eigh(herm)

    # degenerate clusters: consecutive gaps below DEGENERACY_WIDTH
    start = 0
    n = len(w)
    while start < n:
        stop = start + 1
        while stop < n and w[stop] - w[stop - 1] < DEGENERACY_WIDTH:
            stop += 1
        if stop - start > 1:
            block = _canonical_subspace_basis(v[:, start:stop])
            order = sorted(range(block.shape[1]), key=lambda j: _lead_index(block[:, j]))
            v[:, start:stop] = block[:, order]
        start = stop
    return Spectrum(eigenvalues=w, eigenvectors=_fix_phases(v))


def evolve_state(s: Spectrum, v: np.ndarray, t: float) -> np.ndarray:
    """``V exp(-i lambda t) V^dagger v``."""
    if v.shape[0] != s.dim:
        raise ValueError(f"state dimension {v.shape[0]} != spectrum dimension {s.dim}")
    return s.eigenvectors @ (s.phases(t) * s.to_eigenbasis(v))


def evolve_many(s: Spectrum, v: np.ndarray, times) -> np.ndarray:
    """Evolved copies of ``v`` at every time; returns shape ``(len(times), dim)``."""
    if v.shape[0] != s.dim:
        raise ValueError(f"state dimension {v.shape[0]} != spectrum dimension {s.dim}")
    coeffs = s.phases(np.atleast_1d(times)) * s.to_eigenbasis(v)
    return coeffs @ s.eigenvectors.T


def heisenberg(s: Spectrum, o: np.ndarray, t: float) -> np.ndarray:
    """``U^dagger(t) O U(t)`` with ``U(t) = exp(-i t H)``."""
    if o.shape != (s.dim, s.dim):
        raise ValueError(f"operator shape {o.shape} does not match spectrum dimension {s.dim}")
    u = s.unitary(t)
    return u.conj().T @ o @ u
