"""Experiment runner: configuration, propagation loops, reference checkpoints, outputs."""
from __future__ import annotations

import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .grid import (
    DenseHermitianOracle,
    Grid2D,
    GridHamiltonian,
    HenonHeilesParams,
    gaussian_packet,
    load_dense_matrix,
)
from .observables import (
    TimeSeries,
    autocorrelation,
    error_components,
    loglog_slope,
    write_real_series,
)
from .presets import COUNTING_NOTE
from .propagators import (
    ChebyshevPlan,
    ChebyshevPropagator,
    ExtendedLanczosPropagator,
    LanczosPropagator,
    chebyshev_propagate,
)
from .state import HermitianOperator, norm, normalize

log = logging.getLogger(__name__)

METHODS = ("original", "extended", "chebyshev")
# fields that must agree between the two runs of a comparison
PHYSICAL_FIELDS = (
    "nx", "ny", "x_min", "x_max", "y_min", "y_max",
    "omega_x", "omega_y", "lam", "eta", "mass",
    "x0", "y0", "px", "py", "sigma_x", "sigma_y",
    "dt", "t_final", "cheb_dT", "cheb_terms", "matrix", "seed",
)


class ConfigError(ValueError):
    pass


class MatvecLedgerError(RuntimeError):
    """The operator's matvec counter disagrees with the expected budget."""


class RunError(RuntimeError):
    """Propagation aborted; ``record`` holds the partial results."""

    def __init__(self, message, record):
        super().__init__(message)
        self.record = record


@dataclass
class RunConfig:
    method: str = "extended"
    # grid
    nx: int = 64
    ny: int = 64
    x_min: float = -10.0
    x_max: float = 10.0
    y_min: float = -10.0
    y_max: float = 10.0
    # potential
    omega_x: float = 1.3
    omega_y: float = 0.7
    lam: float = -0.1
    eta: float = 0.1
    mass: float = 1.0
    # initial packet
    x0: float = 2.0
    y0: float = 2.0
    px: float = 0.0
    py: float = 0.0
    sigma_x: float = 1.0
    sigma_y: float = 1.0
    # time stepping
    dt: float = 0.02
    t_final: float = 200.0
    # extended method
    m: int = 5
    n: int = 10
    K: int = 1
    threshold: float = 1e-10
    max_extra_powers: int = 4
    auto_shrink: bool = False
    # original method
    mu: int = 6
    # Chebyshev reference
    reference: bool = True
    cheb_terms: int = 1024
    cheb_dT: float = 4.0
    # dense oracle instead of the grid (path to a matrix file)
    matrix: str | None = None
    seed: int = 0
    output_dir: str | None = None

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> "RunConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def replace(self, **kw) -> "RunConfig":
        return dataclasses.replace(self, **kw)

    @property
    def steps(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def checkpoint_stride(self) -> int:
        return int(round(self.cheb_dT / self.dt))

    def validate(self) -> None:
        if self.method not in METHODS:
            raise ConfigError(f"method must be one of {METHODS}, got {self.method!r}")
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if self.t_final < self.dt * (1 - 1e-12):
            raise ConfigError("t_final must be at least dt")
        if abs(self.steps * self.dt - self.t_final) > 1e-9 * self.t_final:
            raise ConfigError("t_final must be a whole number of steps dt")
        if self.method == "extended":
            if self.m < 1:
                raise ConfigError("extended method needs m >= 1")
            if self.K < 1:
                raise ConfigError("extended method needs K >= 1")
            if not self.m + 1 <= self.n <= (self.K + 1) * (self.m + 1):
                raise ConfigError(f"need m+1 <= n <= (K+1)(m+1); got m={self.m}, n={self.n}, K={self.K}")
            if not 0 <= self.threshold < 1:
                raise ConfigError("threshold must lie in [0, 1)")
        if self.method == "original" and self.mu < 1:
            raise ConfigError("original method needs mu >= 1")
        if self.reference:
            if not self.cheb_dT > 0 or self.cheb_terms < 2:
                raise ConfigError("reference needs cheb_dT > 0 and cheb_terms >= 2")
            if abs(self.checkpoint_stride * self.dt - self.cheb_dT) > 1e-9 * self.cheb_dT:
                raise ConfigError("cheb_dT must be a whole number of steps dt")
        if self.matrix is None and (self.sigma_x <= 0 or self.sigma_y <= 0):
            raise ConfigError("packet widths must be positive")


@dataclass
class RunRecord:
    config: RunConfig
    autocorrelation: TimeSeries
    norms: np.ndarray
    error_times: np.ndarray
    errors: dict[str, np.ndarray]
    matvecs_total: int
    matvecs_expected: int
    reference_matvecs: int
    replacements: int
    dependency_events: int
    steps_completed: int
    wall_time: float
    final_state: np.ndarray = field(repr=False)
    matvecs_per_step: int | None = None
    status: str = "ok"
    message: str | None = None

    @property
    def final_error(self) -> float | None:
        e = self.errors.get("err")
        return float(e[-1]) if e is not None and len(e) else None

    def summary(self) -> dict:
        cfg = self.config
        per_step = self.matvecs_per_step
        final = None
        if len(self.error_times):
            final = {"t": float(self.error_times[-1]), **{k: float(v[-1]) for k, v in self.errors.items()}}
        max_drift = float(np.abs(np.diff(self.norms)).max()) if self.norms.size > 1 else 0.0
        return {
            "config": cfg.to_dict(),
            "status": self.status,
            "error_message": self.message,
            "steps": cfg.steps,
            "steps_completed": self.steps_completed,
            "matvecs_total": self.matvecs_total,
            "matvecs_expected": self.matvecs_expected,
            "matvecs_per_step": per_step,
            "first_step_matvecs": cfg.n if cfg.method == "extended" else per_step,
            "replacements": self.replacements,
            "dependency_events": self.dependency_events,
            "reference_matvecs": self.reference_matvecs,
            "final_error": final,
            "final_norm": norm(self.final_state),
            "max_norm_drift_per_step": max_drift,
            "counting_note": COUNTING_NOTE,
        }

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.autocorrelation.to_csv(out / "autocorr.csv")
        write_real_series(out / "norms.csv", self.autocorrelation.times, {"norm": self.norms})
        write_real_series(
            out / "errors.csv",
            self.error_times,
            {k: self.errors[k] for k in ("err", "err_re", "err_im")},
        )
        (out / "summary.json").write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        # wall time varies run to run; kept apart so the files above are reproducible
        (out / "timing.json").write_text(json.dumps({"wall_time": self.wall_time}) + "\n")


def build_problem(cfg: RunConfig) -> tuple[HermitianOperator, np.ndarray, tuple[float, float]]:
    """Hamiltonian, initial state and enclosing spectral bounds for a config."""
    if cfg.matrix is not None:
        H = load_dense_matrix(cfg.matrix)
        rng = np.random.default_rng(cfg.seed)
        psi0 = normalize(rng.standard_normal(H.dim) + 1j * rng.standard_normal(H.dim))
        lo, hi = H.gershgorin_bounds()
        pad = 0.01 * (hi - lo) + 1e-12
        return H, psi0, (lo - pad, hi + pad)
    grid = Grid2D(cfg.nx, cfg.ny, cfg.x_min, cfg.x_max, cfg.y_min, cfg.y_max)
    params = HenonHeilesParams(cfg.omega_x, cfg.omega_y, cfg.lam, cfg.eta, cfg.mass)
    H = GridHamiltonian(grid, params)
    psi0 = gaussian_packet(grid, (cfg.x0, cfg.y0), (cfg.px, cfg.py), (cfg.sigma_x, cfg.sigma_y))
    return H, psi0, H.spectral_bounds()


def make_stepper(cfg: RunConfig, H: HermitianOperator, bounds):
    if cfg.method == "original":
        return LanczosPropagator(H, cfg.mu)
    if cfg.method == "extended":
        return ExtendedLanczosPropagator(
            H, cfg.m, cfg.n, cfg.K,
            threshold=cfg.threshold, max_extra_powers=cfg.max_extra_powers, auto_shrink=cfg.auto_shrink,
        )
    # stepping with the expansion itself: length picked from the coefficient tail
    return ChebyshevPropagator(H, *bounds)


def reference_checkpoints(cfg: RunConfig) -> tuple[list[np.ndarray], int]:
    """Chebyshev reference states at t = j * cheb_dT, j = 1 .. t_final // cheb_dT.

    Returns the states and the matvecs they cost.
    """
    H, psi0, (lo, hi) = build_problem(cfg)
    plan = ChebyshevPlan.build(lo, hi, cfg.cheb_dT, cfg.cheb_terms)
    count = cfg.steps // cfg.checkpoint_stride
    states = []
    psi = psi0
    for _ in range(count):
        psi = chebyshev_propagate(H, psi, plan)
        states.append(psi)
    return states, H.matvecs


def _per_step(cfg: RunConfig, stepper) -> int:
    if cfg.method == "chebyshev":
        return stepper.plan(cfg.dt).n_terms - 1
    return cfg.m + 1 if cfg.method == "extended" else cfg.mu


def _expected_matvecs(cfg: RunConfig, stepper, steps: int) -> int:
    if cfg.method == "chebyshev":
        return stepper.expected_matvecs(steps, cfg.dt)
    return stepper.expected_matvecs(steps)


def run_propagation(cfg: RunConfig, *, references=None, write: bool = True) -> RunRecord:
    """Propagate one trajectory and collect its observables.

    The autocorrelation and norm are sampled at t = k*dt before each step,
    k = 0 .. steps-1.  With ``cfg.reference`` the state is compared with the
    Chebyshev reference at every multiple of ``cfg.cheb_dT``.
    """
    cfg.validate()
    H, psi0, bounds = build_problem(cfg)
    stepper = make_stepper(cfg, H, bounds)
    ref_matvecs = 0
    if cfg.reference and references is None:
        references, ref_matvecs = reference_checkpoints(cfg)
    stride = cfg.checkpoint_stride if cfg.reference else 0

    steps = cfg.steps
    times = cfg.dt * np.arange(steps)
    ac = np.zeros(steps, complex)
    norms = np.zeros(steps)
    err_t: list[float] = []
    errs: dict[str, list[float]] = {"err": [], "err_re": [], "err_im": [], "err_abs": []}
    psi = psi0
    status, message = "ok", None
    done = 0
    t0 = time.perf_counter()
    try:
        for k in range(steps):
            ac[k] = autocorrelation(psi0, psi)
            norms[k] = norm(psi)
            psi = stepper.step(psi, cfg.dt)
            done = k + 1
            if stride and done % stride == 0:
                comp = error_components(references[done // stride - 1], psi)
                err_t.append(done * cfg.dt)
                for key in errs:
                    errs[key].append(comp[key])
                log.info(
                    "t=%g  |1-ov|=%.3e  Re(1-ov)=%.3e  Im(1-ov)=%.3e  1-|ov|=%.3e",
                    done * cfg.dt, comp["err"], comp["err_re"], comp["err_im"], comp["err_abs"],
                )
    except Exception as exc:  # flushed below, then re-raised as RunError
        status, message = "error", f"{type(exc).__name__}: {exc}"
        failure = exc
    wall = time.perf_counter() - t0

    replacements = stepper.replacements
    events = stepper.window.flag_events if cfg.method == "extended" else 0
    record = RunRecord(
        config=cfg,
        autocorrelation=TimeSeries(times[:done] if status == "error" else times, ac[:done] if status == "error" else ac),
        norms=norms[:done] if status == "error" else norms,
        error_times=np.array(err_t),
        errors={k: np.array(v) for k, v in errs.items()},
        matvecs_total=H.matvecs,
        matvecs_expected=_expected_matvecs(cfg, stepper, done),
        reference_matvecs=ref_matvecs,
        replacements=replacements,
        dependency_events=events,
        steps_completed=done,
        wall_time=wall,
        final_state=psi,
        matvecs_per_step=_per_step(cfg, stepper),
        status=status,
        message=message,
    )
    out_dir = cfg.output_dir if write else None
    if status == "ok" and record.matvecs_total != record.matvecs_expected:
        record.status = "error"
        record.message = (
            f"matvec ledger mismatch: counter {record.matvecs_total}, expected {record.matvecs_expected}"
        )
    if out_dir:
        record.write(out_dir)
    if status == "error":
        raise RunError(message, record) from failure
    if record.status == "error":
        raise MatvecLedgerError(record.message)
    return record


@dataclass
class ComparisonReport:
    a: RunRecord
    b: RunRecord
    times: np.ndarray
    ratio: np.ndarray
    slope_a: float
    slope_b: float

    def to_dict(self) -> dict:
        return {
            "method_a": self.a.config.method,
            "method_b": self.b.config.method,
            "matvecs_a": self.a.matvecs_total,
            "matvecs_b": self.b.matvecs_total,
            "final_error_a": self.a.final_error,
            "final_error_b": self.b.final_error,
            "final_ratio": float(self.ratio[-1]) if self.ratio.size else None,
            "loglog_slope_a": self.slope_a,
            "loglog_slope_b": self.slope_b,
        }

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        self.a.write(out / "a")
        self.b.write(out / "b")
        write_real_series(
            out / "comparison.csv",
            self.times,
            {"err_a": self.a.errors["err"], "err_b": self.b.errors["err"], "ratio": self.ratio},
        )
        (out / "comparison.json").write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def run_comparison(cfg_a: RunConfig, cfg_b: RunConfig, output_dir=None) -> ComparisonReport:
    """Run two methods on the same physical setup and compare their error curves."""
    mismatched = [f for f in PHYSICAL_FIELDS if getattr(cfg_a, f) != getattr(cfg_b, f)]
    if mismatched:
        raise ConfigError(f"comparison runs differ in physical setup: {', '.join(mismatched)}")
    cfg_a = cfg_a.replace(reference=True, output_dir=None)
    cfg_b = cfg_b.replace(reference=True, output_dir=None)
    cfg_a.validate()
    cfg_b.validate()
    refs, ref_mv = reference_checkpoints(cfg_a)
    a = run_propagation(cfg_a, references=refs, write=False)
    b = run_propagation(cfg_b, references=refs, write=False)
    a.reference_matvecs = b.reference_matvecs = ref_mv
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = a.errors["err"] / b.errors["err"]
    report = ComparisonReport(
        a, b, a.error_times, ratio,
        loglog_slope(a.error_times, a.errors["err"]),
        loglog_slope(b.error_times, b.errors["err"]),
    )
    if output_dir:
        report.write(output_dir)
    return report
