"""Vector-space primitives for wave functions and the Hamiltonian contract.

A wave state is a one-dimensional ``complex128`` numpy array.  Grid states
are stored flattened (C order).  The inner product is conjugate-linear in
the first slot and carries no grid measure weight.
"""
from __future__ import annotations

import threading
from typing import Sequence

import numpy as np

HBAR = 1.0


def as_state(v) -> np.ndarray:
    """Return ``v`` as a 1-D complex128 array (no copy if already one)."""
    arr = np.asarray(v, dtype=np.complex128)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError(f"a wave state must be a non-empty 1-D vector, got shape {arr.shape}")
    return arr


def _check_dims(u: np.ndarray, v: np.ndarray) -> None:
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape[0]} vs {v.shape[0]}")


def inner(u, v) -> complex:
    """<u|v> = sum(conj(u_j) * v_j)."""
    u = as_state(u)
    v = as_state(v)
    _check_dims(u, v)
    return complex(np.vdot(u, v))


def norm(v) -> float:
    v = as_state(v)
    return float(np.sqrt(np.vdot(v, v).real))


def normalize(v) -> np.ndarray:
    v = as_state(v)
    nv = norm(v)
    if nv == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / nv


def linear_combination(coeffs, states: Sequence) -> np.ndarray:
    """Return sum_j coeffs[j] * states[j] as a new state."""
    coeffs = np.asarray(coeffs, dtype=np.complex128).ravel()
    if len(states) == 0 or coeffs.size != len(states):
        raise ValueError(
            f"need equal, non-zero numbers of coefficients and states "
            f"(got {coeffs.size} and {len(states)})"
        )
    dim = as_state(states[0]).shape[0]
    out = np.zeros(dim, dtype=np.complex128)
    for c, s in zip(coeffs, states):
        s = as_state(s)
        if s.shape[0] != dim:
            raise ValueError(f"dimension mismatch: {s.shape[0]} vs {dim}")
        out += c * s
    return out


class HermitianOperator:
    """Base class for anything that applies a Hermitian H to a state.

    Subclasses implement :meth:`_apply`.  Every call to :meth:`apply` counts
    as one matrix-vector product; the counter is the audit trail for all
    matvec budgets reported by the propagators and the harness.
    """

    def __init__(self, dim: int):
        if dim < 1:
            raise ValueError("operator dimension must be positive")
        self.dim = int(dim)
        self._matvecs = 0
        self._lock = threading.Lock()

    @property
    def matvecs(self) -> int:
        return self._matvecs

    def reset_counter(self) -> None:
        with self._lock:
            self._matvecs = 0

    def apply(self, psi) -> np.ndarray:
        psi = as_state(psi)
        if psi.shape[0] != self.dim:
            raise ValueError(f"dimension mismatch: state has {psi.shape[0]}, operator {self.dim}")
        out = self._apply(psi)
        with self._lock:
            self._matvecs += 1
        return out

    __call__ = apply

    def _apply(self, psi: np.ndarray) -> np.ndarray:  # pragma: no cover - abstract
        raise NotImplementedError
