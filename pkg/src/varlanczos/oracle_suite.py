"""Brute-force checks of every propagator against dense eigendecomposition."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np

from .grid import DenseHermitianOracle, exact_evolve_dense
from .observables import loglog_slope
from .propagators import (
    ChebyshevPlan,
    ExtendedLanczosPropagator,
    LanczosPropagator,
    chebyshev_propagate,
    lanczos_step,
)
from .state import norm, normalize


@dataclass
class OracleResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""


def _random_state(rng, dim):
    return normalize(rng.standard_normal(dim) + 1j * rng.standard_normal(dim))


def _corrupted_symmetrize(A):
    # mirrors the upper triangle without conjugation: Hermitian only for real A
    return np.triu(A) + np.triu(A, 1).T


def _check(name, residual, tol, detail="") -> OracleResult:
    ok = bool(np.isfinite(residual) and residual <= tol)
    return OracleResult(name, ok, float(residual), float(tol), detail)


def hermiticity(rng, corrupt=False, steps=20) -> OracleResult:
    M = DenseHermitianOracle.random(32, rng)
    kw = {"symmetrize": _corrupted_symmetrize} if corrupt else {}
    prop = ExtendedLanczosPropagator(M, 3, 6, **kw)
    psi = _random_state(rng, M.dim)
    worst = 0.0
    for _ in range(steps):
        psi = prop.step(psi, 0.02)
        Hm = prop.window.last_system.Hm
        worst = max(worst, np.abs(Hm - Hm.conj().T).max() / np.abs(Hm).max())
    return _check("subspace_hamiltonian_hermitian", worst, 1e-13, "max |Hm - Hm^dagger| / max |Hm|")


def norm_conservation(rng, steps=200, dt=0.02) -> list[OracleResult]:
    M = DenseHermitianOracle.random(32, rng)
    psi0 = _random_state(rng, M.dim)
    lo, hi = M.gershgorin_bounds()
    plan = ChebyshevPlan.build(lo, hi, dt, None)
    steppers = {
        "original": LanczosPropagator(M, 6).step,
        "extended": ExtendedLanczosPropagator(M, 3, 6).step,
        "chebyshev": lambda v, h: chebyshev_propagate(M, v, plan),
    }
    out = []
    for name, step in steppers.items():
        psi, drift = psi0, 0.0
        for _ in range(steps):
            nxt = step(psi, dt)
            drift = max(drift, abs(norm(nxt) - norm(psi)))
            psi = nxt
        out.append(_check(f"norm_conservation_{name}", drift, 1e-10, "max per-step norm change"))
    return out


def degeneracy(rng, systems=5, m=3, steps=100, dt=0.02) -> OracleResult:
    worst = 0.0
    for _ in range(systems):
        M = DenseHermitianOracle.random(32, rng)
        a = b = _random_state(rng, M.dim)
        ext = ExtendedLanczosPropagator(M, m, m + 1)
        for _ in range(steps):
            a = ext.step(a, dt)
            b = lanczos_step(M, b, m + 1, dt)
        worst = max(worst, norm(a - b))
    return _check("degeneracy_n_eq_m_plus_1", worst, 1e-12, f"extended(n=m+1) vs Lanczos(mu=m+1), m={m}")


def convergence_order(rng, mus=(2, 3, 4)) -> list[OracleResult]:
    """One-step error of a mu-term Krylov step scales as dt**mu."""
    M = DenseHermitianOracle.random(16, rng)
    psi = _random_state(rng, M.dim)
    dts = np.logspace(-3, -1, 9)
    exact = [exact_evolve_dense(M, psi, h) for h in dts]
    out = []
    for mu in mus:
        errs = [norm(lanczos_step(M, psi, mu, h) - e) for h, e in zip(dts, exact)]
        slope = loglog_slope(dts, errs)
        out.append(_check(f"convergence_order_mu{mu}", abs(slope - mu), 0.5, f"fitted slope {slope:.3f}, expected {mu}"))
    return out


def chebyshev_vs_exact(rng) -> OracleResult:
    M = DenseHermitianOracle.random(32, rng)
    psi = _random_state(rng, M.dim)
    plan = ChebyshevPlan.build(*M.gershgorin_bounds(), 4.0, 128)
    d = norm(chebyshev_propagate(M, psi, plan) - exact_evolve_dense(M, psi, 4.0))
    return _check("chebyshev_vs_exact", d, 1e-12, "128 terms, dT=4")


def krylov_vs_exact(rng, steps=100, dt=0.02) -> list[OracleResult]:
    M = DenseHermitianOracle.random(32, rng)
    psi0 = _random_state(rng, M.dim)
    exact = exact_evolve_dense(M, psi0, steps * dt)
    out = []
    for name, prop in (("original_mu6", LanczosPropagator(M, 6)), ("extended_m3_n6", ExtendedLanczosPropagator(M, 3, 6))):
        psi = psi0
        for _ in range(steps):
            psi = prop.step(psi, dt)
        out.append(_check(f"{name}_vs_exact", norm(psi - exact), 1e-8, f"{steps} steps of dt={dt}"))
    return out


def run_oracle_suite(seed: int = 0, corrupt_symmetrization: bool = False) -> dict:
    """Run all dense-oracle batteries; failures are entries, never exceptions."""
    rng = np.random.default_rng(seed)
    batteries = [
        ("hermiticity", lambda: hermiticity(rng, corrupt_symmetrization)),
        ("norm_conservation", lambda: norm_conservation(rng)),
        ("degeneracy", lambda: degeneracy(rng)),
        ("convergence_order", lambda: convergence_order(rng)),
        ("chebyshev_vs_exact", lambda: chebyshev_vs_exact(rng)),
        ("krylov_vs_exact", lambda: krylov_vs_exact(rng)),
    ]
    results: list[OracleResult] = []
    for name, battery in batteries:
        try:
            out = battery()
        except Exception as exc:
            out = OracleResult(name, False, float("nan"), float("nan"), f"{type(exc).__name__}: {exc}")
        results += out if isinstance(out, list) else [out]
    return {
        "seed": seed,
        "corrupt_symmetrization": corrupt_symmetrization,
        "passed": all(r.passed for r in results),
        "results": [asdict(r) for r in results],
    }


def write_report(report: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
