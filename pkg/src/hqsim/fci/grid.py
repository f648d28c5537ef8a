"""Potential energy on a rectangular 2D grid.

``values[i, j]`` is the potential energy (meV) felt by an electron at
``(x_i, y_j)``; axes are centred on zero. The Dirichlet walls sit one
spacing beyond the outermost points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..units import GAAS_KAPPA, GAAS_M_STAR, HBAR2_OVER_2ME

CSV_HEADER = "# nx,ny,hx_nm,hy_nm"


@dataclass(frozen=True)
class Material:
    m_star: float = GAAS_M_STAR
    kappa: float = GAAS_KAPPA

    def __post_init__(self):
        if not (self.m_star > 0 and self.kappa > 0):
            raise ValueError("m_star and kappa must be positive")

    @property
    def kinetic(self) -> float:
        """hbar^2 / 2m* in meV nm^2."""
        return HBAR2_OVER_2ME / self.m_star


GAAS = Material()


@dataclass(frozen=True)
class PotentialGrid:
    nx: int
    ny: int
    hx: float
    hy: float
    values: np.ndarray
    material: Material = GAAS

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if self.nx < 8 or self.ny < 8:
            raise ValueError("grid needs at least 8 points per axis")
        if not (self.hx > 0 and self.hy > 0):
            raise ValueError("grid spacings must be positive")
        if v.shape != (self.nx, self.ny):
            raise ValueError(f"values must have shape ({self.nx}, {self.ny}), got {v.shape}")
        if not np.all(np.isfinite(v)):
            raise ValueError("potential values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def x(self) -> np.ndarray:
        return (np.arange(self.nx) - (self.nx - 1) / 2) * self.hx

    @property
    def y(self) -> np.ndarray:
        return (np.arange(self.ny) - (self.ny - 1) / 2) * self.hy

    @property
    def size(self) -> int:
        return self.nx * self.ny

    @property
    def cell_area(self) -> float:
        return self.hx * self.hy

    def coords(self) -> np.ndarray:
        """(G, 2) point coordinates in flat (row-major) order."""
        xx, yy = np.meshgrid(self.x, self.y, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(CSV_HEADER + "\n")
            fh.write(f"{self.nx},{self.ny},{self.hx:.17g},{self.hy:.17g}\n")
            for row in self.values:
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")

    @classmethod
    def from_csv(cls, path, material: Material = GAAS) -> "PotentialGrid":
        """Read the ``# nx,ny,hx_nm,hy_nm`` format: a header comment, one line
        with those four numbers, then nx*ny values in row-major order."""
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
        if not lines or not lines[0].startswith("#"):
            raise ValueError("potential CSV must start with the '# nx,ny,hx_nm,hy_nm' header")
        head = [p.strip() for p in lines[1].split(",")]
        if len(head) != 4:
            raise ValueError("second line must hold nx,ny,hx_nm,hy_nm")
        nx, ny = int(head[0]), int(head[1])
        hx, hy = float(head[2]), float(head[3])
        vals = np.array([float(v) for ln in lines[2:] for v in ln.replace(",", " ").split()])
        if vals.size != nx * ny:
            raise ValueError(f"expected {nx * ny} values, found {vals.size}")
        return cls(nx, ny, hx, hy, vals.reshape(nx, ny), material)


def axes_for_box(n: int, half_width: float) -> float:
    """Spacing that puts the Dirichlet walls of an n-point axis at +-half_width."""
    return 2.0 * half_width / (n + 1)


def _mesh(nx, ny, hx, hy):
    x = (np.arange(nx) - (nx - 1) / 2) * hx
    y = (np.arange(ny) - (ny - 1) / 2) * hy
    return np.meshgrid(x, y, indexing="ij")


def harmonic_well(nx: int, ny: int, hx: float, hy: float, hw_x: float, hw_y: float | None = None,
                  material: Material = GAAS) -> PotentialGrid:
    """Parabolic potential with level spacings hw_x, hw_y (meV)."""
    hw_y = hw_x if hw_y is None else hw_y
    xx, yy = _mesh(nx, ny, hx, hy)
    k = material.kinetic
    v = (hw_x**2 * xx**2 + hw_y**2 * yy**2) / (4 * k)
    return PotentialGrid(nx, ny, hx, hy, v, material)


def gaussian_well(nx: int, ny: int, hx: float, hy: float, depth: float, sigma_x: float,
                  sigma_y: float, material: Material = GAAS) -> PotentialGrid:
    """-depth * exp(-x^2/2sx^2 - y^2/2sy^2), depth in meV."""
    xx, yy = _mesh(nx, ny, hx, hy)
    v = -depth * np.exp(-(xx**2) / (2 * sigma_x**2) - yy**2 / (2 * sigma_y**2))
    return PotentialGrid(nx, ny, hx, hy, v, material)


def gaussian_well_for(hw_x: float, hw_y: float, depth: float, nx: int, ny: int, hx: float,
                      hy: float, material: Material = GAAS) -> PotentialGrid:
    """Gaussian well whose bottom curvature matches level spacings hw_x, hw_y."""
    k = material.kinetic
    sx = math.sqrt(2 * k * depth) / hw_x
    sy = math.sqrt(2 * k * depth) / hw_y
    return gaussian_well(nx, ny, hx, hy, depth, sx, sy, material)


def polynomial_well(nx: int, ny: int, hx: float, hy: float, coeffs: dict,
                    material: Material = GAAS) -> PotentialGrid:
    """sum of c * x^a * y^b over ``coeffs = {(a, b): c}`` (meV, nm)."""
    xx, yy = _mesh(nx, ny, hx, hy)
    v = np.zeros_like(xx)
    for (a, b), c in coeffs.items():
        v = v + c * xx**a * yy**b
    return PotentialGrid(nx, ny, hx, hy, v, material)


def from_electrostatic(nx: int, ny: int, hx: float, hy: float, phi_mv,
                       material: Material = GAAS) -> PotentialGrid:
    """Grid from an electrostatic potential in mV: energy is -e*phi."""
    return PotentialGrid(nx, ny, hx, hy, -np.asarray(phi_mv, dtype=float), material)
