"""Concrete Hamiltonians.

* :class:`GridHamiltonian` -- a particle in the 2-D Henon-Heiles potential on
  a periodic Fourier grid.  The kinetic term is applied with one forward and
  one inverse FFT.
* :class:`DenseHermitianOracle` -- an explicit Hermitian matrix, used as an
  exact reference in tests.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .state import HBAR, HermitianOperator, as_state, normalize


@dataclass(frozen=True)
class Grid2D:
    """Uniform periodic grid; the right endpoint of each axis is excluded."""

    nx: int = 64
    ny: int = 64
    x_min: float = -10.0
    x_max: float = 10.0
    y_min: float = -10.0
    y_max: float = 10.0

    def __post_init__(self):
        if self.nx < 2 or self.ny < 2:
            raise ValueError("a grid needs at least 2 points per axis")
        if not (self.x_max > self.x_min and self.y_max > self.y_min):
            raise ValueError("grid bounds must satisfy max > min")

    @property
    def dx(self) -> float:
        return (self.x_max - self.x_min) / self.nx

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / self.ny

    @property
    def shape(self) -> tuple[int, int]:
        return (self.nx, self.ny)

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        x = self.x_min + self.dx * np.arange(self.nx)
        y = self.y_min + self.dy * np.arange(self.ny)
        return x, y

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """Coordinate arrays of shape (nx, ny); x varies along axis 0."""
        x, y = self.axes()
        return np.meshgrid(x, y, indexing="ij")

    def wavenumbers(self) -> tuple[np.ndarray, np.ndarray]:
        # fftfreq layout: 0, 1, ..., N/2-1, -N/2, ..., -1 (times 2*pi/(N*d)).
        # The Nyquist bin is the negative one; k**2 makes the sign irrelevant
        # for the kinetic energy but it matters for <p>.
        kx = 2.0 * np.pi * np.fft.fftfreq(self.nx, d=self.dx)
        ky = 2.0 * np.pi * np.fft.fftfreq(self.ny, d=self.dy)
        return kx, ky


@dataclass(frozen=True)
class HenonHeilesParams:
    omega_x: float = 1.3
    omega_y: float = 0.7
    lam: float = -0.1
    eta: float = 0.1
    mass: float = 1.0


def henon_heiles_potential(x, y, p: HenonHeilesParams = HenonHeilesParams()):
    """v(x, y) = (wx^2 x^2 + wy^2 y^2)/2 + lam * y * (x^2 + eta * y^2)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    v = 0.5 * (p.omega_x**2 * x**2 + p.omega_y**2 * y**2) + p.lam * y * (x**2 + p.eta * y**2)
    return v if v.ndim else float(v)


def gaussian_packet(
    g: Grid2D,
    center: tuple[float, float] = (2.0, 2.0),
    momentum: tuple[float, float] = (0.0, 0.0),
    width: tuple[float, float] = (1.0, 1.0),
) -> np.ndarray:
    """Normalized Gaussian wave packet, flattened to a state of length nx*ny."""
    sx, sy = width
    if sx <= 0 or sy <= 0:
        raise ValueError(f"packet widths must be positive, got {width}")
    x0, y0 = center
    if not (g.x_min <= x0 < g.x_max and g.y_min <= y0 < g.y_max):
        raise ValueError(f"packet center {center} lies outside the grid")
    X, Y = g.mesh()
    px, py = momentum
    phase = -((X - x0) ** 2) / (2 * sx**2) - (Y - y0) ** 2 / (2 * sy**2) + 1j * (px * X + py * Y)
    return normalize(np.exp(phase).ravel())


def position_expectation(g: Grid2D, psi) -> tuple[float, float]:
    rho = np.abs(as_state(psi).reshape(g.shape)) ** 2
    rho /= rho.sum()
    X, Y = g.mesh()
    return float((rho * X).sum()), float((rho * Y).sum())


def momentum_expectation(g: Grid2D, psi) -> tuple[float, float]:
    phi = np.fft.fft2(as_state(psi).reshape(g.shape))
    w = np.abs(phi) ** 2
    w /= w.sum()
    kx, ky = g.wavenumbers()
    KX, KY = np.meshgrid(kx, ky, indexing="ij")
    return float((w * KX).sum()), float((w * KY).sum())


class GridHamiltonian(HermitianOperator):
    """H = -nabla^2/(2m) + v(x, y) on a periodic grid."""

    def __init__(self, grid: Grid2D = Grid2D(), params: HenonHeilesParams = HenonHeilesParams()):
        super().__init__(grid.size)
        self.grid = grid
        self.params = params
        X, Y = grid.mesh()
        self.potential = henon_heiles_potential(X, Y, params)
        kx, ky = grid.wavenumbers()
        KX, KY = np.meshgrid(kx, ky, indexing="ij")
        self.kinetic = (HBAR**2) * (KX**2 + KY**2) / (2.0 * params.mass)

    def _apply(self, psi: np.ndarray) -> np.ndarray:
        # fft2/ifft2 allocate fresh outputs, so concurrent calls share no scratch.
        f = psi.reshape(self.grid.shape)
        out = np.fft.ifft2(self.kinetic * np.fft.fft2(f)) + self.potential * f
        return out.ravel()

    def spectral_bounds(self, margin: float = 0.05) -> tuple[float, float]:
        return spectral_bounds(self.grid, self.params, margin)


def spectral_bounds(g: Grid2D, p: HenonHeilesParams, margin: float = 0.05) -> tuple[float, float]:
    """An interval guaranteed to contain every eigenvalue of the grid Hamiltonian.

    Lower end: minimum of the potential on the grid (the kinetic term is
    non-negative).  Upper end: potential maximum plus the largest kinetic
    eigenvalue.  Both ends are then pushed out by ``margin`` times the range.
    """
    X, Y = g.mesh()
    v = henon_heiles_potential(X, Y, p)
    e_min = float(v.min())
    e_max = float(v.max()) + (HBAR * np.pi / g.dx) ** 2 / (2 * p.mass) + (HBAR * np.pi / g.dy) ** 2 / (2 * p.mass)
    pad = margin * (e_max - e_min)
    return e_min - pad, e_max + pad


class DenseHermitianOracle(HermitianOperator):
    """Explicit Hermitian matrix.  The input is symmetrized on construction."""

    def __init__(self, matrix):
        M = np.array(matrix, dtype=np.complex128)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise ValueError(f"oracle matrix must be square, got shape {M.shape}")
        super().__init__(M.shape[0])
        self.matrix = 0.5 * (M + M.conj().T)
        self._eig = None

    def _apply(self, psi: np.ndarray) -> np.ndarray:
        return self.matrix @ psi

    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        if self._eig is None:
            self._eig = np.linalg.eigh(self.matrix)
        return self._eig

    def gershgorin_bounds(self) -> tuple[float, float]:
        M = self.matrix
        d = M.diagonal().real
        r = np.abs(M).sum(axis=1) - np.abs(M.diagonal())
        return float((d - r).min()), float((d + r).max())

    @classmethod
    def random(cls, n: int, rng: np.random.Generator, radius: float | None = 1.0):
        """Random complex Hermitian matrix, rescaled to the given spectral radius."""
        A = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        M = 0.5 * (A + A.conj().T)
        if radius is not None:
            M *= radius / np.abs(np.linalg.eigvalsh(M)).max()
        return cls(M)


def exact_evolve_dense(M: DenseHermitianOracle, psi, t: float) -> np.ndarray:
    """exp(-i M t / hbar) psi by full eigendecomposition.  Does not count as a matvec."""
    psi = as_state(psi)
    if psi.shape[0] != M.dim:
        raise ValueError(f"dimension mismatch: state has {psi.shape[0]}, matrix {M.dim}")
    try:
        w, Q = M.eigh()
    except np.linalg.LinAlgError as exc:
        raise RuntimeError("eigendecomposition of the oracle matrix failed") from exc
    return Q @ (np.exp(-1j * w * t / HBAR) * (Q.conj().T @ psi))


def load_dense_matrix(path) -> DenseHermitianOracle:
    """Read ``n`` then n*n "re im" pairs in row-major order."""
    tokens = Path(path).read_text().split()
    if not tokens:
        raise ValueError(f"{path}: empty matrix file")
    n = int(tokens[0])
    vals = np.array(tokens[1:], dtype=float)
    if vals.size != 2 * n * n:
        raise ValueError(f"{path}: expected {2 * n * n} numbers after n={n}, found {vals.size}")
    M = (vals[0::2] + 1j * vals[1::2]).reshape(n, n)
    return DenseHermitianOracle(M)


def save_dense_matrix(path, matrix) -> None:
    M = np.asarray(matrix, dtype=np.complex128)
    n = M.shape[0]
    lines = [str(n)]
    for row in M:
        lines.append(" ".join(f"{z.real:.17g} {z.imag:.17g}" for z in row))
    Path(path).write_text("\n".join(lines) + "\n")
