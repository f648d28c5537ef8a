"""End-to-end two-electron problem, interaction sweeps and the Wigner parameter."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .._io import write_json
from ..units import COULOMB_MEV_NM, GHZ_PER_MEV
from .basis import SingleParticleBasis, solve_basis
from .grid import GAAS, Material, PotentialGrid
from .integrals import IntegralTables, integral_tables, symmetry_defect
from .solver import (DeterminantBasis, FciResult, assemble_fci, build_determinant_basis,
                     diagonalize_fci)

SPLITTING_HEADER = "lambda,E0_hghz,E1_hghz,splitting_hghz"
STRONG_CORRELATION = 2.0


class FitError(ValueError):
    pass


@dataclass(frozen=True)
class FciProblem:
    grid: PotentialGrid
    basis: SingleParticleBasis
    tables: IntegralTables
    dets: DeterminantBasis

    @classmethod
    def build(cls, grid: PotentialGrid, n_spatial: int = 20, a: float | None = None,
              **kw) -> "FciProblem":
        basis = solve_basis(grid, n_spatial)
        return cls(grid, basis, integral_tables(basis, a, **kw), build_determinant_basis(n_spatial))

    @property
    def n_spatial(self) -> int:
        return self.basis.n_spatial

    def solve(self, lam: float = 1.0, k_lowest: int | None = None) -> FciResult:
        return diagonalize_fci(assemble_fci(self.tables, self.dets, lam), k_lowest)

    def diagnostics(self) -> dict:
        b = self.basis
        eye = np.eye(b.n_spatial)
        one = self.tables.one_electron[::2, ::2]
        return {
            "orthonormality_error": float(np.abs(b.overlap() - eye).max()),
            "basis_residual": b.residual,
            "one_electron_offdiag": float(np.abs(one - np.diag(np.diag(one))).max()),
            "one_electron_diag_error": float(np.abs(np.diag(one) - b.energies).max()),
            "two_electron_symmetry": symmetry_defect(self.tables.two_electron),
            "regularization_nm": self.tables.regularization,
        }


@dataclass(frozen=True)
class SplittingRow:
    lam: float
    e0: float
    e1: float

    @property
    def splitting(self) -> float:
        return self.e1 - self.e0


@dataclass(frozen=True)
class SplittingTable:
    rows: tuple

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([r.lam for r in self.rows])

    @property
    def splittings(self) -> np.ndarray:
        return np.array([r.splitting for r in self.rows])

    def quench_factor(self) -> float:
        """Splitting at the first lambda over splitting at the last."""
        s = self.splittings
        return float(s[0] / s[-1])

    def is_monotone(self, eps: float = 1e-9) -> bool:
        s = self.splittings
        return bool(np.all(np.diff(s) <= eps * max(1.0, np.abs(s).max())))

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(SPLITTING_HEADER + "\n")
            for r in self.rows:
                fh.write(f"{r.lam:.12g},{r.e0:.12g},{r.e1:.12g},{r.splitting:.12g}\n")


def splitting_vs_lambda(problem: FciProblem, lambda_grid) -> SplittingTable:
    rows = []
    for lam in lambda_grid:
        # the lowest singlet and triplet sit among the first eight states
        res = problem.solve(float(lam), k_lowest=8)
        rows.append(SplittingRow(float(lam), res.e0, res.e1))
    return SplittingTable(tuple(rows))


def _parabola_at_minimum(grid: PotentialGrid) -> tuple[float, float]:
    """Curvatures (meV/nm^2) of U = cx x^2 + cy y^2 around the grid minimum."""
    v = grid.values
    i, j = np.unravel_index(np.argmin(v), v.shape)
    if i in (0, grid.nx - 1) or j in (0, grid.ny - 1):
        raise FitError("potential minimum lies on the grid edge")
    cx = (v[i + 1, j] - 2 * v[i, j] + v[i - 1, j]) / (2 * grid.hx**2)
    cy = (v[i, j + 1] - 2 * v[i, j] + v[i, j - 1]) / (2 * grid.hy**2)
    if not (cx > 0 and cy > 0):
        raise FitError("minimum is not parabolic (non-positive curvature)")
    return cx, cy


def confinement_energy(grid: PotentialGrid) -> tuple[float, float]:
    """Level spacings (meV) of the harmonic approximation along x and y."""
    cx, cy = _parabola_at_minimum(grid)
    k = grid.material.kinetic
    return 2 * math.sqrt(k * cx), 2 * math.sqrt(k * cy)


def wigner_parameter(grid: PotentialGrid | None = None, *, omega0: float | None = None,
                     l0: float | None = None, material: Material = GAAS) -> float:
    """Coulomb energy at the oscillator length over the confinement energy.

    ``omega0`` is hbar*omega0 in h*GHz and ``l0`` a length in nm. With a grid
    the two are fitted from the curvature at the potential minimum, using
    the geometric mean of the x and y spacings.
    """
    if grid is not None:
        material = grid.material
        wx, wy = confinement_energy(grid)
        hw = math.sqrt(wx * wy)
    else:
        if omega0 is None or not omega0 > 0:
            raise ValueError("omega0 must be positive")
        hw = omega0 / GHZ_PER_MEV
    if l0 is None:
        l0 = math.sqrt(2 * material.kinetic / hw)
    elif not l0 > 0:
        raise ValueError("l0 must be positive")
    return COULOMB_MEV_NM / (material.kappa * l0) / hw


def is_strongly_correlated(r_w: float) -> bool:
    return r_w > STRONG_CORRELATION


def summary(problem: FciProblem, table: SplittingTable) -> dict:
    r_w = wigner_parameter(problem.grid)
    g, s, d = problem.dets.counts()
    return {
        "grid": {"nx": problem.grid.nx, "ny": problem.grid.ny,
                 "hx_nm": problem.grid.hx, "hy_nm": problem.grid.hy},
        "n_spatial": problem.n_spatial,
        "determinants": {"ground": g, "single": s, "double": d},
        "single_particle_hghz": problem.basis.energies[:4].tolist(),
        "wigner_parameter": r_w,
        "strongly_correlated": is_strongly_correlated(r_w),
        "splitting_lambda0_hghz": float(table.splittings[0]),
        "splitting_lambda1_hghz": float(table.splittings[-1]),
        "quench_factor": table.quench_factor(),
        "monotone": table.is_monotone(),
        "diagnostics": problem.diagnostics(),
    }


def write_summary(path, data: dict) -> None:
    write_json(path, data)
