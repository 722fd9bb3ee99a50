"""Dense linear algebra on the small variational subspace.

The subspace equation is ``i hbar S dC/dt = H C`` with a constant, Hermitian
positive definite overlap ``S`` and Hermitian ``H``.  It is solved exactly:
with ``S = L L^dagger`` the congruent generator ``A = L^-1 H L^-dagger`` is
Hermitian, and ``C(t) = L^-dagger exp(-i A t) L^dagger C(0)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .state import HBAR

DEFAULT_THRESHOLD = 1e-10


class SubspaceError(RuntimeError):
    """Raised when the subspace problem cannot be solved."""


class NotPositiveSemidefinite(SubspaceError):
    pass


class SingularOverlap(SubspaceError):
    pass


def hermitian_part(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A + A.conj().T)


@dataclass
class CholeskyResult:
    L: np.ndarray
    dependent_indices: list[int]
    kept_indices: list[int]
    threshold: float
    pivots: np.ndarray = field(repr=False)


def _rounding_floor(L: np.ndarray, n: int) -> float:
    # Pivots computed against kept columns with overlap block L L^dagger are
    # only determined to about n * eps / lambda_min(L L^dagger).
    if L.size == 0:
        return n * np.finfo(float).eps
    smin = np.linalg.svd(L, compute_uv=False)[-1]
    return n * np.finfo(float).eps / max(smin**2, np.finfo(float).tiny)


def thresholded_cholesky(S, threshold: float = DEFAULT_THRESHOLD) -> CholeskyResult:
    """Column-ordered Cholesky of an overlap matrix that skips dependent columns.

    Columns are processed left to right.  A column whose residual pivot (the
    squared distance of its state from the span of the kept states before
    it, relative to its diagonal) falls below ``threshold`` is flagged and
    left out; later columns are factored against the kept ones only.

    Parameters
    ----------
    S : (n, n) array
        Hermitian positive semidefinite matrix, normally with unit diagonal.
    threshold : float
        Relative pivot tolerance.

    Returns
    -------
    CholeskyResult
        ``L`` is lower triangular over ``kept_indices`` with
        ``L @ L.conj().T == S[kept][:, kept]``.
    """
    S = np.asarray(S, dtype=np.complex128)
    n = S.shape[0]
    if S.shape != (n, n):
        raise ValueError(f"overlap matrix must be square, got {S.shape}")
    if threshold < 0:
        raise ValueError("threshold must be non-negative")

    Lfull = np.zeros((n, n), dtype=np.complex128)
    kept: list[int] = []
    flagged: list[int] = []
    pivots = np.zeros(n)
    for j in range(n):
        row = np.zeros(len(kept), dtype=np.complex128)
        for a, k in enumerate(kept):
            row[a] = (S[j, k] - np.dot(row[:a], Lfull[a, :a].conj())) / Lfull[a, a].real
        scale = S[j, j].real
        d = scale - float(np.vdot(row, row).real)
        pivots[j] = d / scale if scale > 0 else d
        if scale <= 0 or pivots[j] < threshold or pivots[j] <= 0:
            if pivots[j] < -10 * threshold and _rounding_floor(Lfull[: len(kept), : len(kept)], n) < -pivots[j] / 10:
                raise NotPositiveSemidefinite(
                    f"residual pivot {pivots[j]:.3e} at column {j}: overlap matrix is not positive semidefinite"
                )
            flagged.append(j)
            continue
        a = len(kept)
        Lfull[a, :a] = row
        Lfull[a, a] = np.sqrt(d)
        kept.append(j)
    r = len(kept)
    return CholeskyResult(Lfull[:r, :r].copy(), flagged, kept, threshold, pivots)


def hermitian_eig(A) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and unitary eigenvectors of a Hermitian matrix."""
    A = np.asarray(A, dtype=np.complex128)
    scale = max(np.abs(A).max(), np.finfo(float).tiny)
    if np.abs(A - A.conj().T).max() > 1e-10 * scale:
        raise ValueError("matrix is not Hermitian")
    try:
        return np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise SubspaceError("Hermitian eigensolver did not converge") from exc


@dataclass
class SubspaceSystem:
    """Overlap ``S`` and Hamiltonian ``Hm`` of a (non-orthogonal) subspace."""

    S: np.ndarray
    Hm: np.ndarray
    L: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.S = np.asarray(self.S, dtype=np.complex128)
        self.Hm = np.asarray(self.Hm, dtype=np.complex128)
        if self.S.shape != self.Hm.shape or self.S.shape[0] != self.S.shape[1]:
            raise ValueError("S and Hm must be square matrices of equal size")
        self._factors = None

    @property
    def n(self) -> int:
        return self.S.shape[0]

    def _factor(self):
        if self._factors is None:
            L = self.L
            if L is None:
                try:
                    L = np.linalg.cholesky(self.S)
                except np.linalg.LinAlgError as exc:
                    raise SingularOverlap("overlap matrix is singular; resolve dependent states first") from exc
            X = solve_triangular(L, self.Hm, lower=True)
            A = solve_triangular(L, X.conj().T, lower=True).conj().T
            w, Q = hermitian_eig(hermitian_part(A))
            self._factors = (L, w, Q)
        return self._factors

    def evolve(self, C0, dt: float) -> np.ndarray:
        L, w, Q = self._factor()
        C0 = np.asarray(C0, dtype=np.complex128)
        if C0.shape != (self.n,):
            raise ValueError(f"coefficient vector must have length {self.n}")
        y = Q.conj().T @ (L.conj().T @ C0)
        y *= np.exp(-1j * w * dt / HBAR)
        return solve_triangular(L.conj().T, Q @ y, lower=False)


def evolve_subspace(sys: SubspaceSystem, C0, dt: float) -> np.ndarray:
    return sys.evolve(C0, dt)
