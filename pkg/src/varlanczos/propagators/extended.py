"""Variational Lanczos stepper with recycled Krylov states.

Each step spans the variational subspace with the normalized current-step
powers ``H^i psi(t)``, ``i = 0..m``, plus normalized powers kept from earlier
steps.  Matrix elements between two recycled states are reused from the
step in which they were computed, so a step costs ``m + 1`` applications of
H: ``H psi .. H^(m+1) psi``.  The top power only feeds matrix elements,
through ``<a|H|Phi_i> = <a|H^(i+1) psi> / |H^i psi|``.

Recycled states are taken newest step first and, within a step, highest
power first.  A recycled state found linearly dependent by the thresholded
Cholesky factorization of the overlap matrix is swapped for the next power
``H^(m+1+r) psi(t)`` of the current state, at one extra matvec each.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..state import HermitianOperator, as_state, norm
from ..subspace import (
    DEFAULT_THRESHOLD,
    CholeskyResult,
    SubspaceError,
    SubspaceSystem,
    hermitian_part,
    thresholded_cholesky,
)

DEFAULT_EXTRA_POWERS = 4


class DependentStateError(SubspaceError):
    """Linearly dependent states remained after the replacement budget ran out."""


@dataclass
class BasisEntry:
    state: np.ndarray
    power: int
    age: int
    raw_norm: float

    @property
    def fresh(self) -> bool:
        return self.age == 0


@dataclass
class BasisWindow:
    """Single-trajectory workspace: retained basis states and their cached matrix blocks.

    ``entries`` are kept in subspace order; ``cached_S`` and ``cached_H`` hold
    the overlap and Hamiltonian elements between them, exactly as computed
    when the later entry of each pair was fresh.
    """

    m: int
    n: int
    K: int = 1
    threshold: float = DEFAULT_THRESHOLD
    max_extra_powers: int = DEFAULT_EXTRA_POWERS
    auto_shrink: bool = False
    symmetrize: Callable[[np.ndarray], np.ndarray] = hermitian_part
    entries: list[BasisEntry] = field(default_factory=list)
    cached_S: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), complex))
    cached_H: np.ndarray = field(default_factory=lambda: np.zeros((0, 0), complex))
    scratch_top: np.ndarray | None = None
    # bookkeeping from the most recent step
    last_system: SubspaceSystem | None = None
    last_dim: int = 0
    last_flags: list[int] = field(default_factory=list)
    last_replacements: int = 0
    replacements_total: int = 0
    flag_events: int = 0
    steps: int = 0

    def validate(self) -> None:
        if self.m < 1:
            raise ValueError(f"m must be >= 1, got {self.m}")
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.n < self.m + 1:
            raise ValueError(f"n must be >= m+1 (n={self.n}, m={self.m})")
        if self.n > (self.K + 1) * (self.m + 1):
            raise ValueError(
                f"n={self.n} exceeds (K+1)(m+1)={(self.K + 1) * (self.m + 1)}: "
                "not enough earlier states to fill the window"
            )

    @property
    def primed(self) -> bool:
        return self.steps > 0


class _Assembly:
    """Basis states with their overlap and Hamiltonian matrices, grown in place."""

    def __init__(self):
        self.states: list[np.ndarray] = []
        self.meta: list[BasisEntry] = []
        self.S = np.zeros((0, 0), complex)
        self.H = np.zeros((0, 0), complex)

    def __len__(self):
        return len(self.states)

    def drop(self, idx) -> None:
        keep = [i for i in range(len(self)) if i not in set(idx)]
        self.states = [self.states[i] for i in keep]
        self.meta = [self.meta[i] for i in keep]
        self.S = self.S[np.ix_(keep, keep)]
        self.H = self.H[np.ix_(keep, keep)]

    def append(self, entry: BasisEntry, h_state: np.ndarray) -> None:
        """Add a normalized state given H applied to it."""
        k = len(self)
        B = np.array(self.states).reshape(k, -1)
        s_col = B.conj() @ entry.state
        h_col = B.conj() @ h_state
        S = np.zeros((k + 1, k + 1), complex)
        H = np.zeros((k + 1, k + 1), complex)
        S[:k, :k], H[:k, :k] = self.S, self.H
        S[:k, k], S[k, :k] = s_col, s_col.conj()
        H[:k, k], H[k, :k] = h_col, h_col.conj()
        S[k, k] = np.vdot(entry.state, entry.state).real
        H[k, k] = np.vdot(entry.state, h_state).real
        self.S, self.H = S, H
        self.states.append(entry.state)
        self.meta.append(entry)


def _krylov_powers(H: HermitianOperator, psi: np.ndarray, top: int) -> list[np.ndarray]:
    """[psi, H psi, ..., H^top psi]; costs ``top`` matvecs."""
    phis = [psi]
    for _ in range(top):
        phis.append(H.apply(phis[-1]))
    return phis


def _fresh_block(phis: list[np.ndarray], n_fresh: int):
    """Normalized powers 0..n_fresh-1 and their S, H block.

    ``phis`` must hold powers 0..n_fresh.  Powers that vanish identically end
    the block early (the Krylov space is invariant).
    """
    norms = [norm(p) for p in phis]
    count = n_fresh
    for i in range(1, n_fresh):
        if norms[i] <= 1e-300:
            count = i
            break
    F = np.array([phis[i] / norms[i] for i in range(count)])
    HF = np.array([phis[i + 1] / norms[i] for i in range(count)])
    S = F.conj() @ F.T
    Hm = F.conj() @ HF.T
    entries = [BasisEntry(F[i], i, 0, norms[i]) for i in range(count)]
    return entries, F, HF, S, Hm, norms


def _solve_and_combine(win: BasisWindow, asm: _Assembly, chol: CholeskyResult, psi_norm: float, dt: float):
    kept = chol.kept_indices
    S = asm.S[np.ix_(kept, kept)]
    Hm = win.symmetrize(asm.H[np.ix_(kept, kept)])
    system = SubspaceSystem(hermitian_part(S), Hm, L=chol.L)
    C0 = np.zeros(len(kept), complex)
    C0[0] = psi_norm
    C = system.evolve(C0, dt)
    B = np.array([asm.states[i] for i in kept])
    win.last_system = system
    win.last_dim = len(kept)
    return C @ B


def _slide(win: BasisWindow, asm: _Assembly, kept: list[int]) -> None:
    """Age the kept entries by one step and drop those older than K."""
    survivors = [i for i in kept if asm.meta[i].age + 1 <= win.K]
    win.entries = [
        BasisEntry(asm.meta[i].state, asm.meta[i].power, asm.meta[i].age + 1, asm.meta[i].raw_norm)
        for i in survivors
    ]
    idx = np.ix_(survivors, survivors)
    win.cached_S = asm.S[idx].copy()
    win.cached_H = asm.H[idx].copy()
    win.steps += 1


def first_step_basis(
    H: HermitianOperator,
    psi0,
    n: int,
    dt: float,
    *,
    m: int | None = None,
    K: int = 1,
    threshold: float = DEFAULT_THRESHOLD,
    window: BasisWindow | None = None,
):
    """First step: the subspace is spanned by ``H^i psi0``, ``i = 0..n-1``.

    Costs ``n`` matvecs.  Returns ``(psi(dt), window)``; the window keeps the
    entries for recycling by :func:`extended_step`.
    """
    psi0 = as_state(psi0)
    psi_norm = norm(psi0)
    if psi_norm == 0.0:
        raise ValueError("cannot propagate the zero state")
    if window is None:
        window = BasisWindow(m=n - 1 if m is None else m, n=n, K=K, threshold=threshold)
    phis = _krylov_powers(H, psi0, n)
    entries, F, HF, S, Hm, _ = _fresh_block(phis, n)
    asm = _Assembly()
    asm.states = list(F)
    asm.meta = entries
    asm.S, asm.H = S, window.symmetrize(Hm)
    window.scratch_top = phis[n]

    chol = thresholded_cholesky(hermitian_part(asm.S), window.threshold)
    window.last_flags = list(chol.dependent_indices)
    window.last_replacements = 0
    if chol.dependent_indices:
        window.flag_events += 1
    psi = _solve_and_combine(window, asm, chol, psi_norm, dt)
    _slide(window, asm, chol.kept_indices)
    return psi, window


def _recycled(win: BasisWindow, n_recycled: int):
    """Up to ``n_recycled`` window entries, newest step first, highest power first."""
    order = sorted(range(len(win.entries)), key=lambda i: (win.entries[i].age, -win.entries[i].power))
    return order[:n_recycled]


def replace_dependent(
    win: BasisWindow,
    asm: _Assembly,
    H: HermitianOperator,
    chol: CholeskyResult,
    tops: list[np.ndarray],
) -> CholeskyResult:
    """Swap flagged recycled entries for further powers of the current state.

    ``tops`` holds the current-step powers beyond m computed so far
    (``tops[0]`` is H^(m+1) psi); it is extended in place.  Each new basis
    state H^p psi needs H^(p+1) psi for its matrix elements, one matvec.
    Returns the final factorization.
    """
    m = win.m
    added = 0
    flagged = chol.dependent_indices
    while flagged:
        if any(asm.meta[i].fresh and asm.meta[i].power <= m for i in flagged):
            # a current-step Krylov power is dependent: the Krylov space is
            # (numerically) invariant, nothing to gain from higher powers
            break
        if win.auto_shrink:
            win.n = max(win.m + 1, win.n - len(flagged))
            break
        asm.drop(flagged)
        for _ in flagged:
            p = m + 1 + added
            if p > m + win.max_extra_powers:
                raise DependentStateError(
                    f"dependent basis states remain after {added} replacements "
                    f"(power cap m+{win.max_extra_powers}); use a larger m or a smaller n"
                )
            phi = tops[p - m - 1]
            tops.append(H.apply(phi))
            r = norm(phi)
            asm.append(BasisEntry(phi / r, p, 0, r), tops[p - m] / r)
            added += 1
        chol = thresholded_cholesky(hermitian_part(asm.S), win.threshold)
        flagged = chol.dependent_indices
    win.last_replacements = added
    win.replacements_total += added
    return chol


def extended_step(win: BasisWindow, H: HermitianOperator, psi, dt: float):
    """One step of the recycled-basis variational propagator.

    Returns ``(psi(t + dt), win)``; ``win`` is updated in place.
    """
    win.validate()
    if not win.primed:
        return first_step_basis(H, psi, win.n, dt, window=win)
    psi = as_state(psi)
    psi_norm = norm(psi)
    if psi_norm == 0.0:
        raise ValueError("cannot propagate the zero state")
    m = win.m

    phis = _krylov_powers(H, psi, m + 1)
    entries, F, HF, S_ff, H_ff, _ = _fresh_block(phis, m + 1)
    win.scratch_top = phis[m + 1]
    n_fresh = len(entries)

    rec = _recycled(win, win.n - (m + 1))
    asm = _Assembly()
    asm.states = list(F) + [win.entries[i].state for i in rec]
    asm.meta = entries + [win.entries[i] for i in rec]
    n_tot = len(asm.states)
    S = np.zeros((n_tot, n_tot), complex)
    Hm = np.zeros((n_tot, n_tot), complex)
    S[:n_fresh, :n_fresh] = S_ff
    Hm[:n_fresh, :n_fresh] = H_ff
    if rec:
        R = np.array([win.entries[i].state for i in rec])
        S_rf = R.conj() @ F.T
        H_rf = R.conj() @ HF.T
        S[n_fresh:, :n_fresh] = S_rf
        S[:n_fresh, n_fresh:] = S_rf.conj().T
        Hm[n_fresh:, :n_fresh] = H_rf
        Hm[:n_fresh, n_fresh:] = H_rf.conj().T
        cached = np.ix_(rec, rec)
        S[n_fresh:, n_fresh:] = win.cached_S[cached]
        Hm[n_fresh:, n_fresh:] = win.cached_H[cached]
    asm.S = S
    asm.H = win.symmetrize(Hm)

    chol = thresholded_cholesky(hermitian_part(asm.S), win.threshold)
    win.last_flags = list(chol.dependent_indices)
    win.last_replacements = 0
    if chol.dependent_indices:
        win.flag_events += 1
        chol = replace_dependent(win, asm, H, chol, [phis[m + 1]])
    new_psi = _solve_and_combine(win, asm, chol, psi_norm, dt)
    _slide(win, asm, chol.kept_indices)
    return new_psi, win


class ExtendedLanczosPropagator:
    """Harness stepper wrapping a :class:`BasisWindow`."""

    name = "extended"

    def __init__(self, H: HermitianOperator, m: int, n: int, K: int = 1, **window_kw):
        self.H = H
        self.window = BasisWindow(m=m, n=n, K=K, **window_kw)
        self.window.validate()

    @property
    def replacements(self) -> int:
        return self.window.replacements_total

    def step(self, psi, dt: float) -> np.ndarray:
        psi, _ = extended_step(self.window, self.H, psi, dt)
        return psi

    def expected_matvecs(self, steps: int) -> int:
        if steps == 0:
            return 0
        w = self.window
        return w.n + (steps - 1) * (w.m + 1) + w.replacements_total
