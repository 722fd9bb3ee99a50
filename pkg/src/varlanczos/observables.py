"""Autocorrelation, the overlap error measure, and spectra."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .state import HBAR, as_state, inner


@dataclass(frozen=True)
class TimeSeries:
    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=np.complex128)
        if t.shape != v.shape or t.ndim != 1:
            raise ValueError("times and values must be 1-D arrays of equal length")
        if t.size > 1:
            steps = np.diff(t)
            if np.any(steps <= 0):
                raise ValueError("times must be strictly increasing")
            if np.abs(steps - steps[0]).max() > 1e-12 * max(abs(steps[0]), np.abs(t).max()):
                raise ValueError("times must be uniformly spaced")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.times.size

    @property
    def spacing(self) -> float:
        return float(self.times[1] - self.times[0]) if len(self) > 1 else 0.0

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", "re", "im"])
            for t, z in zip(self.times, self.values):
                w.writerow([f"{t:.17g}", f"{z.real:.17g}", f"{z.imag:.17g}"])

    @classmethod
    def from_csv(cls, path) -> "TimeSeries":
        with open(path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        t = np.array([float(r["t"]) for r in rows])
        v = np.array([complex(float(r["re"]), float(r["im"])) for r in rows])
        return cls(t, v)


def autocorrelation(psi0, psit) -> complex:
    """<psi(t)|psi(0)>."""
    return inner(psit, psi0)


def error_components(exact, numeric) -> dict[str, float]:
    """All three readings of the overlap deficit d = 1 - <exact|numeric>.

    ``err`` is |d|; ``err_re`` and ``err_im`` are its real and imaginary
    parts; ``err_abs`` is 1 - |<exact|numeric>|.
    """
    exact = as_state(exact)
    ov = inner(exact, numeric)
    d = 1.0 - ov
    return {"err": abs(d), "err_re": d.real, "err_im": d.imag, "err_abs": 1.0 - abs(ov)}


def error_metric(exact, numeric) -> float:
    """|1 - <exact|numeric>|; ``exact`` is expected to be normalized."""
    return abs(1.0 - inner(exact, numeric))


def spectrum(ac: TimeSeries, window: str = "none") -> TimeSeries:
    """Power spectrum of a sampled correlation function.

    A component ``exp(-i E t)`` of ``ac`` shows up at frequency ``+E``
    (energy units, hbar = 1).  The frequency grid is the DFT grid
    ``2*pi*j/(N*dt)``, returned in ascending order; values are
    ``|sum_k w_k ac_k exp(i E t_k)|^2 / N^2`` (real, stored as complex).
    """
    n = len(ac)
    if n < 16:
        raise ValueError(f"spectrum needs at least 16 samples, got {n}")
    if window not in ("none", "cosine"):
        raise ValueError(f"unknown window {window!r}")
    f = ac.values.copy()
    if window == "cosine":
        span = ac.times[-1] - ac.times[0] + ac.spacing
        f *= np.cos(0.5 * np.pi * (ac.times - ac.times[0]) / span)
    amp = np.fft.ifft(f)  # (1/N) sum_k f_k exp(+2 pi i jk/N)
    freq = 2.0 * np.pi * HBAR * np.fft.fftfreq(n, d=ac.spacing)
    order = np.argsort(freq, kind="stable")
    return TimeSeries(freq[order], (np.abs(amp) ** 2)[order])


def energy_spectrum(ac: TimeSeries, window: str = "cosine") -> TimeSeries:
    """Spectrum of an autocorrelation <psi(t)|psi(0)>, peaked at the eigenenergies."""
    # <psi(t)|psi(0)> carries exp(+i E t); conjugate so peaks land at +E
    return spectrum(TimeSeries(ac.times, ac.values.conj()), window)


def write_real_series(path, times, columns: dict[str, np.ndarray]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", *columns])
        for i, t in enumerate(times):
            w.writerow([f"{t:.17g}", *(f"{float(c[i]):.17g}" for c in columns.values())])


def loglog_slope(times, values) -> float:
    """Least-squares slope of log(values) against log(times); non-positive values are skipped."""
    t = np.asarray(times, float)
    v = np.asarray(values, float)
    ok = (t > 0) & (v > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(t[ok]), np.log(v[ok]), 1)[0])
