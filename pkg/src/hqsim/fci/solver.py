"""Two-electron determinants, Hamiltonian assembly and diagonalisation."""

from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.linalg as sla

from .._parallel import ordered_map
from .integrals import IntegralTables

GROUND, SINGLE, DOUBLE = 0, 1, 2
CLASS_NAMES = ("ground", "single", "double")
#: Relative tolerance for grouping eigenvalues into degenerate levels.
DEGENERACY_RTOL = 1e-6
RESIDUAL_RTOL = 1e-8
ROW_BLOCK = 256


class FciSolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class DeterminantBasis:
    n_spatial: int
    pairs: np.ndarray  # (N, 2) spin-orbital indices, p < q
    excitation: np.ndarray  # (N,) GROUND / SINGLE / DOUBLE

    def __post_init__(self):
        for a in (self.pairs, self.excitation):
            a.setflags(write=False)

    def __len__(self) -> int:
        return len(self.pairs)

    def counts(self) -> tuple[int, int, int]:
        return tuple(int(np.count_nonzero(self.excitation == c)) for c in (GROUND, SINGLE, DOUBLE))

    @property
    def sz(self) -> np.ndarray:
        """Twice the S_z of each determinant (+2, 0, -2)."""
        s = self.pairs & 1
        return 2 - 2 * s.sum(axis=1)


def expected_counts(n_spatial: int) -> tuple[int, int, int]:
    return 1, 2 * (2 * n_spatial - 2), comb(2 * n_spatial - 2, 2)


def build_determinant_basis(n_spatial: int) -> DeterminantBasis:
    if n_spatial < 2:
        raise ValueError("need at least two spatial orbitals")
    p, q = np.triu_indices(2 * n_spatial, k=1)
    pairs = np.column_stack([p, q])
    # spin orbitals 0 and 1 are the two spins of the lowest spatial orbital
    excitation = (p > 1).astype(np.int8) + (q > 1)
    return DeterminantBasis(n_spatial, pairs, excitation)


@dataclass(frozen=True)
class FciMatrix:
    """Block-diagonal Hamiltonian; one dense block per S_z sector."""

    dets: DeterminantBasis
    lam: float
    sectors: tuple  # ((2*S_z, indices, block), ...)

    @property
    def shape(self) -> tuple[int, int]:
        n = len(self.dets)
        return n, n

    def toarray(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for _, idx, blk in self.sectors:
            out[np.ix_(idx, idx)] = blk
        return out


def _block(tab: IntegralTables, lam: float, pr, qr, pc, qc) -> np.ndarray:
    # full two-electron Slater-Condon rule: for |pq> and |rs> the terms
    # below reproduce the rank-0, rank-1 and rank-2 cases at once
    h = tab.one_electron
    p, q = pr[:, None], qr[:, None]
    r, s = pc[None, :], qc[None, :]
    one = (h[p, r] * (q == s) - h[p, s] * (q == r)
           + h[q, s] * (p == r) - h[q, r] * (p == s))
    if lam == 0.0:
        return one
    two = tab.spin_orbital(p, q, r, s) - tab.spin_orbital(p, q, s, r)
    return one + lam * two


def assemble_fci(tab: IntegralTables, dets: DeterminantBasis, lam: float) -> FciMatrix:
    if not 0.0 <= lam <= 1.0:
        raise ValueError("lambda must lie in [0, 1]")
    if tab.n_spatial != dets.n_spatial:
        raise ValueError("integral tables and determinant basis disagree on n_spatial")
    sectors = []
    sz = dets.sz
    for m in (2, 0, -2):
        idx = np.flatnonzero(sz == m)
        p, q = dets.pairs[idx, 0], dets.pairs[idx, 1]
        rows = [slice(s, min(s + ROW_BLOCK, idx.size)) for s in range(0, idx.size, ROW_BLOCK)]
        parts = ordered_map(lambda sl: _block(tab, lam, p[sl], q[sl], p, q), rows)
        blk = np.vstack(parts) if parts else np.zeros((0, 0))
        blk = 0.5 * (blk + blk.T)
        sectors.append((m, idx, blk))
    return FciMatrix(dets, float(lam), tuple(sectors))


def group_levels(values: np.ndarray, rtol: float = DEGENERACY_RTOL):
    """Collapse sorted eigenvalues into (level, multiplicity) pairs."""
    scale = max(float(np.abs(values).max()), 1.0) if values.size else 1.0
    levels, mult = [], []
    for v in values:
        if levels and abs(v - levels[-1]) <= rtol * scale:
            mult[-1] += 1
        else:
            levels.append(float(v))
            mult.append(1)
    return np.array(levels), np.array(mult, dtype=int)


@dataclass(frozen=True)
class FciResult:
    eigenvalues: np.ndarray  # h*GHz ascending
    sz2: np.ndarray  # 2*S_z sector of each eigenvalue
    lam: float
    residual: float
    levels: np.ndarray = field(repr=False)
    degeneracies: np.ndarray = field(repr=False)

    @property
    def e0(self) -> float:
        return float(self.levels[0])

    @property
    def e1(self) -> float:
        """Lowest level above the ground manifold."""
        return float(self.levels[1]) if self.levels.size > 1 else float("nan")

    @property
    def splitting_01(self) -> float:
        return self.e1 - self.e0


def diagonalize_fci(mat: FciMatrix, k_lowest: int | None = None) -> FciResult:
    vals, sz, worst = [], [], 0.0
    for m, _, blk in mat.sectors:
        if blk.size == 0:
            continue
        keep = len(blk) if k_lowest is None else min(k_lowest, len(blk))
        subset = None if keep == len(blk) else [0, keep - 1]
        try:
            w, v = sla.eigh(blk, subset_by_index=subset)
        except np.linalg.LinAlgError as exc:
            raise FciSolverError(f"eigensolver failed in S_z sector {m / 2:+g}: {exc}") from exc
        norm = max(float(np.abs(blk).sum(axis=1).max()), 1e-300)
        res = float(np.linalg.norm(blk @ v - v * w, axis=0).max()) / norm
        if res > RESIDUAL_RTOL:
            raise FciSolverError(f"eigenpair residual {res:.3g} exceeds {RESIDUAL_RTOL:g}")
        worst = max(worst, res)
        vals.append(w)
        sz.append(np.full(w.size, m))
    vals, sz = np.concatenate(vals), np.concatenate(sz)
    order = np.argsort(vals, kind="stable")
    vals, sz = vals[order], sz[order]
    if k_lowest is not None:
        vals, sz = vals[:k_lowest], sz[:k_lowest]
    levels, deg = group_levels(vals)
    return FciResult(vals, sz, mat.lam, worst, levels, deg)
