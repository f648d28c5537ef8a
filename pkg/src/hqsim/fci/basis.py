"""Finite-difference single-particle problem and its eigenbasis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import ArpackNoConvergence, eigsh

from ..units import GHZ_PER_MEV
from .grid import PotentialGrid

#: Grids up to this many points are diagonalised densely.
DENSE_LIMIT = 1600
GUARD_STATES = 4


class SolverError(RuntimeError):
    pass


def _second_difference(n: int, h: float) -> sp.csr_matrix:
    return sp.diags([np.ones(n - 1), -2 * np.ones(n), np.ones(n - 1)], [-1, 0, 1]) / h**2


def discretize_h1(grid: PotentialGrid) -> sp.csr_matrix:
    """Five-point kinetic operator plus the potential, in meV.

    Flat index ``i * ny + j``; zero Dirichlet boundary beyond the grid.
    """
    lap = (sp.kron(_second_difference(grid.nx, grid.hx), sp.identity(grid.ny))
           + sp.kron(sp.identity(grid.nx), _second_difference(grid.ny, grid.hy)))
    h = -grid.material.kinetic * lap + sp.diags(grid.values.ravel())
    return sp.csr_matrix(h)


@dataclass(frozen=True)
class SingleParticleBasis:
    grid: PotentialGrid
    energies: np.ndarray  # h*GHz, ascending
    wavefunctions: np.ndarray  # (n, nx*ny), sum |psi|^2 hx hy = 1
    residual: float

    @property
    def n_spatial(self) -> int:
        return int(self.energies.size)

    @property
    def energies_mev(self) -> np.ndarray:
        return self.energies / GHZ_PER_MEV

    def overlap(self) -> np.ndarray:
        w = self.wavefunctions
        return (w @ w.T) * self.grid.cell_area


def _fix_signs(vecs):
    # deterministic gauge: the largest-magnitude entry of each vector is positive
    idx = np.argmax(np.abs(vecs), axis=0)
    s = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    s[s == 0] = 1
    return vecs * s


def solve_basis(grid: PotentialGrid, n_spatial: int, *, tol: float = 1e-12,
                maxiter: int | None = None) -> SingleParticleBasis:
    """Lowest ``n_spatial`` eigenpairs of the discretised single-particle problem.

    Large grids use shift-invert Lanczos (requires n_spatial < G/4); small
    grids, or a complete basis, fall back to a dense solver.
    """
    g = grid.size
    if not 1 <= n_spatial <= g:
        raise ValueError(f"n_spatial must lie in [1, {g}]")
    h = discretize_h1(grid)
    if g <= DENSE_LIMIT or n_spatial >= g // 4:
        if g > 8 * DENSE_LIMIT:
            raise ValueError(f"n_spatial must be < {g // 4} for a grid of {g} points")
        w, v = np.linalg.eigh(h.toarray())
        w, v = w[:n_spatial], v[:, :n_spatial]
    else:
        sigma = float(grid.values.min()) - 1.0
        # a symmetric start vector would hide whole symmetry sectors from
        # Lanczos; the guard states keep a degenerate multiplet from being
        # cut at the top
        v0 = np.random.default_rng(0).standard_normal(g)
        k = min(n_spatial + GUARD_STATES, g // 4)
        try:
            w, v = eigsh(h, k=k, sigma=sigma, which="LM", tol=tol, v0=v0, maxiter=maxiter)
        except ArpackNoConvergence as exc:
            raise SolverError(f"eigsh did not converge: {len(exc.eigenvalues)} of "
                              f"{n_spatial} eigenpairs found") from exc
        order = np.argsort(w)[:n_spatial]
        w, v = w[order], v[:, order]
    v = _fix_signs(v)
    res = np.linalg.norm(h @ v - v * w, axis=0).max()
    norm_h = float(abs(h).sum(axis=1).max())
    if res > 1e-6 * norm_h:
        raise SolverError(f"eigenpair residual {res:.3g} exceeds 1e-6 * ||H1|| = {1e-6 * norm_h:.3g}")
    psi = (v / np.sqrt(grid.cell_area)).T.copy()
    return SingleParticleBasis(grid, w * GHZ_PER_MEV, psi, float(res / norm_h))
