"""Original short-iterative Lanczos stepper."""
from __future__ import annotations

import numpy as np

from ..state import HBAR, HermitianOperator, as_state, norm

BREAKDOWN_TOL = 1e-13


def _tridiagonal_exp_first_column(alpha, beta, dt: float) -> np.ndarray:
    k = len(alpha)
    T = np.diag(np.asarray(alpha, dtype=float))
    if k > 1:
        off = np.asarray(beta[: k - 1], dtype=float)
        T += np.diag(off, 1) + np.diag(off, -1)
    w, Q = np.linalg.eigh(T)
    return Q @ (np.exp(-1j * w * dt / HBAR) * Q[0].conj())


def lanczos_step(H: HermitianOperator, psi, mu: int, dt: float, *, reorthogonalize: bool = True) -> np.ndarray:
    """Advance ``psi`` by ``dt`` in the ``mu``-dimensional Krylov space.

    Uses exactly ``mu`` applications of ``H`` (the last one supplies the final
    diagonal element).  If the recursion breaks down early the Krylov space
    is invariant and the result is exact.
    """
    psi = as_state(psi)
    if mu < 1:
        raise ValueError("Lanczos budget mu must be >= 1")
    scale = norm(psi)
    if scale == 0.0:
        raise ValueError("cannot propagate the zero state")

    V = [psi / scale]
    alpha: list[float] = []
    beta: list[float] = []
    for j in range(mu):
        w = H.apply(V[j])
        w_norm = norm(w)
        a = float(np.vdot(V[j], w).real)
        alpha.append(a)
        w = w - a * V[j]
        if j > 0:
            w -= beta[j - 1] * V[j - 1]
        if reorthogonalize:
            Vm = np.array(V)
            w -= Vm.T @ (Vm.conj() @ w)
        if j == mu - 1:
            break
        b = norm(w)
        if b < BREAKDOWN_TOL * max(1.0, w_norm):
            break
        beta.append(b)
        V.append(w / b)

    c = _tridiagonal_exp_first_column(alpha, beta, dt)
    return scale * (c @ np.array(V[: len(alpha)]))


class LanczosPropagator:
    """Stateless stepper object for the harness: ``step(psi, dt)``."""

    name = "original"

    def __init__(self, H: HermitianOperator, mu: int):
        self.H = H
        self.mu = mu
        self.replacements = 0

    def step(self, psi, dt: float) -> np.ndarray:
        return lanczos_step(self.H, psi, self.mu, dt)

    def expected_matvecs(self, steps: int) -> int:
        return steps * self.mu
