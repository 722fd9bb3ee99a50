"""Chebyshev expansion of the evolution operator (global reference propagator)."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from ..state import HBAR, HermitianOperator, as_state, norm

log = logging.getLogger(__name__)

TAIL_TOL = 1e-16
NORM_DRIFT_TOL = 1e-8


class SpectralBoundsError(RuntimeError):
    """The expansion drifted in norm, i.e. the spectrum left [E_min, E_max]."""


def bessel_j_sequence(n: int, x: float) -> np.ndarray:
    """J_0(x) ... J_{n-1}(x) for real x >= 0 by Miller's downward recurrence.

    The recurrence J_{k-1} = (2k/x) J_k - J_{k+1} is started well above
    max(n, x) from an arbitrary tiny seed and normalized with
    J_0 + 2 * sum_k J_{2k} = 1.
    """
    if n < 1:
        return np.zeros(0)
    if x < 0:
        raise ValueError("bessel_j_sequence needs x >= 0")
    out = np.zeros(n)
    if x == 0.0:
        out[0] = 1.0
        return out
    top = max(n, int(x)) + 30 + int(math.sqrt(40.0 * max(n, x)))
    top += top % 2
    vals = np.zeros(top + 2)
    vals[top] = 1e-300
    even_sum = 0.0
    for k in range(top, 0, -1):
        vals[k - 1] = (2.0 * k / x) * vals[k] - vals[k + 1]
        if abs(vals[k - 1]) > 1e250:
            vals[k - 1 :] *= 1e-250
            even_sum *= 1e-250
        if (k - 1) % 2 == 0 and k - 1 > 0:
            even_sum += vals[k - 1]
    total = vals[0] + 2.0 * even_sum
    return vals[:n] / total


def bessel_j(order: int, x: float) -> float:
    """Bessel function of the first kind J_order(x), order >= 0, x >= 0."""
    if order < 0:
        raise ValueError("order must be non-negative")
    return float(bessel_j_sequence(order + 1, x)[order])


def chebyshev_coefficients(n_terms: int, x: float) -> np.ndarray:
    """(2 - delta_k0) (-i)^k J_k(x) for k < n_terms."""
    J = bessel_j_sequence(n_terms, x)
    k = np.arange(n_terms)
    c = 2.0 * ((-1j) ** (k % 4)) * J
    if n_terms:
        c[0] = J[0]
    return c


@dataclass(frozen=True)
class ChebyshevPlan:
    n_terms: int
    e_min: float
    e_max: float
    dT: float
    coefficients: np.ndarray

    @property
    def center(self) -> float:
        return 0.5 * (self.e_max + self.e_min)

    @property
    def half_width(self) -> float:
        return 0.5 * (self.e_max - self.e_min)

    @property
    def tail_ratio(self) -> float:
        a = np.abs(self.coefficients)
        return float(a[-1] / a.max())

    @classmethod
    def build(cls, e_min: float, e_max: float, dT: float, n_terms: int | None = None) -> "ChebyshevPlan":
        """Plan for exp(-i H dT); ``n_terms=None`` picks the shortest expansion
        whose last coefficient is below ``TAIL_TOL`` relative to the largest."""
        if not e_max > e_min:
            raise ValueError("need e_max > e_min")
        x = 0.5 * (e_max - e_min) * abs(dT) / HBAR
        if n_terms is None:
            trial = int(x) + 40
            while True:
                a = np.abs(chebyshev_coefficients(trial, x))
                below = a <= TAIL_TOL * a.max()
                # first index after which every coefficient is negligible
                idx = np.flatnonzero(~below)
                last_big = idx[-1] if idx.size else 0
                if last_big + 1 < trial:
                    n_terms = max(2, last_big + 2)
                    break
                trial *= 2
        coeffs = chebyshev_coefficients(n_terms, x)
        if dT < 0:
            coeffs = coeffs.conj()
        plan = cls(n_terms, float(e_min), float(e_max), float(dT), coeffs)
        if plan.tail_ratio > TAIL_TOL:
            log.warning(
                "Chebyshev plan with %d terms is truncated early: |a_last|/max|a| = %.2e",
                n_terms,
                plan.tail_ratio,
            )
        return plan


def chebyshev_propagate(H: HermitianOperator, psi, plan: ChebyshevPlan, *, check_norm: bool = True) -> np.ndarray:
    """exp(-i H dT) psi with ``plan.n_terms - 1`` applications of ``H``.

    With ``check_norm`` a norm change above ``NORM_DRIFT_TOL`` raises
    :class:`SpectralBoundsError`.
    """
    psi = as_state(psi)
    b, a = plan.center, plan.half_width
    c = plan.coefficients

    def h_norm(v):
        return (H.apply(v) - b * v) / a

    prev = psi
    result = c[0] * prev
    if plan.n_terms > 1:
        cur = h_norm(psi)
        result = result + c[1] * cur
        for k in range(2, plan.n_terms):
            nxt = 2.0 * h_norm(cur) - prev
            result += c[k] * nxt
            prev, cur = cur, nxt
    result *= np.exp(-1j * b * plan.dT / HBAR)

    n0 = norm(psi)
    drift = abs(norm(result) - n0)
    if check_norm and drift > NORM_DRIFT_TOL * max(n0, 1e-300):
        raise SpectralBoundsError(
            f"Chebyshev norm drift {drift:.2e}: either [{plan.e_min:.6g}, {plan.e_max:.6g}] misses part of "
            f"the spectrum or {plan.n_terms} terms are too few for a*dT = {plan.half_width * abs(plan.dT):.4g}"
        )
    return result


class ChebyshevPropagator:
    """Harness stepper; plans are cached per step length."""

    name = "chebyshev"

    def __init__(self, H: HermitianOperator, e_min: float, e_max: float, n_terms: int | None = None):
        self.H = H
        self.e_min = e_min
        self.e_max = e_max
        self.n_terms = n_terms
        self.replacements = 0
        self._plans: dict[float, ChebyshevPlan] = {}

    def plan(self, dT: float) -> ChebyshevPlan:
        if dT not in self._plans:
            self._plans[dT] = ChebyshevPlan.build(self.e_min, self.e_max, dT, self.n_terms)
        return self._plans[dT]

    def step(self, psi, dt: float) -> np.ndarray:
        return chebyshev_propagate(self.H, psi, self.plan(dt))

    def expected_matvecs(self, steps: int, dt: float) -> int:
        return steps * (self.plan(dt).n_terms - 1)
