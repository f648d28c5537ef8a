"""One- and two-electron integrals over a single-particle eigenbasis.

Spin orbitals are indexed ``so = 2 * i + s`` with spatial index ``i`` and
spin ``s`` (0 up, 1 down). Two-electron values use the physicist layout

    V[i, j, k, l] = <ij|kl> = sum_{r1, r2} psi_i(r1) psi_j(r2) W(r1, r2) psi_k(r1) psi_l(r2) dA^2

and are obtained from pair densities ``rho_ik = psi_i psi_k`` so the G x G
kernel is applied once per block of grid columns rather than once per
integral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .._parallel import ordered_map
from ..units import COULOMB_MEV_NM, GHZ_PER_MEV
from .basis import SingleParticleBasis, discretize_h1

#: Default cap on the spatial tensor (bytes).
DEFAULT_MEMORY_CAP = 2 * 1024**3
#: Kernel columns materialised at once.
COLUMN_BLOCK = 512


class CapacityError(MemoryError):
    pass


@dataclass(frozen=True)
class IntegralTables:
    one_electron: np.ndarray  # (2n, 2n), h*GHz
    two_electron: np.ndarray  # (n, n, n, n) spatial, h*GHz
    regularization: float  # nm

    def __post_init__(self):
        for a in (self.one_electron, self.two_electron):
            a.setflags(write=False)

    @property
    def n_spatial(self) -> int:
        return self.two_electron.shape[0]

    @property
    def n_spin(self) -> int:
        return 2 * self.n_spatial

    def spin_orbital(self, p, q, r, s):
        """<pq|rs> over spin orbitals (array-valued indices allowed)."""
        p, q, r, s = (np.asarray(x) for x in (p, q, r, s))
        same = ((p & 1) == (r & 1)) & ((q & 1) == (s & 1))
        return np.where(same, self.two_electron[p >> 1, q >> 1, r >> 1, s >> 1], 0.0)


def default_regularization(basis: SingleParticleBasis) -> float:
    g = basis.grid
    return 0.5 * min(g.hx, g.hy)


def one_electron_integrals(basis: SingleParticleBasis) -> np.ndarray:
    """<i|h|j> by quadrature, expanded over spin (h*GHz)."""
    h1 = discretize_h1(basis.grid)
    psi = basis.wavefunctions
    spatial = (psi @ (h1 @ psi.T)) * basis.grid.cell_area * GHZ_PER_MEV
    spatial = 0.5 * (spatial + spatial.T)
    return np.kron(spatial, np.eye(2))


def coulomb_kernel(coords: np.ndarray, cols: slice, a: float, kappa: float) -> np.ndarray:
    d = coords[:, None, :] - coords[None, cols, :]
    return (COULOMB_MEV_NM / kappa) / np.sqrt(np.einsum("ijk,ijk->ij", d, d) + a * a)


def two_electron_integrals(basis: SingleParticleBasis, a: float | None = None, *,
                           memory_cap: int = DEFAULT_MEMORY_CAP,
                           block: int = COLUMN_BLOCK) -> np.ndarray:
    """Spatial <ij|kl> tensor (h*GHz) with kernel e^2 / (4 pi eps0 kappa sqrt(r^2 + a^2))."""
    n = basis.n_spatial
    need = 8 * n**4
    if need > memory_cap:
        raise CapacityError(f"two-electron tensor needs {need} bytes for n_spatial={n}, "
                            f"over the cap of {memory_cap}; use fewer spatial orbitals")
    a = default_regularization(basis) if a is None else float(a)
    if not a > 0:
        raise ValueError("regularization a must be positive")
    grid = basis.grid
    psi = basis.wavefunctions
    iu, ku = np.triu_indices(n)
    rho = psi[iu] * psi[ku] * grid.cell_area  # (npairs, G)
    coords = grid.coords()
    kappa = grid.material.kappa
    g = grid.size
    blocks = [slice(s, min(s + block, g)) for s in range(0, g, block)]

    def partial(cols):
        w = coulomb_kernel(coords, cols, a, kappa)
        return (rho @ w) @ rho[:, cols].T

    m = np.zeros((iu.size, iu.size))
    for part in ordered_map(partial, blocks):
        m += part
    m = 0.5 * (m + m.T) * GHZ_PER_MEV
    pair = np.empty((n, n), dtype=np.intp)
    pair[iu, ku] = np.arange(iu.size)
    pair[ku, iu] = pair[iu, ku]
    # <ij|kl> = (ik|jl) in pair-density language
    return m[pair[:, None, :, None], pair[None, :, None, :]]


def integral_tables(basis: SingleParticleBasis, a: float | None = None, **kw) -> IntegralTables:
    a = default_regularization(basis) if a is None else float(a)
    return IntegralTables(one_electron_integrals(basis), two_electron_integrals(basis, a, **kw), a)


def symmetry_defect(v: np.ndarray) -> float:
    """Largest relative violation of the 8-fold permutation group."""
    scale = np.abs(v).max() or 1.0
    perms = [v.transpose(1, 0, 3, 2), v.transpose(2, 1, 0, 3), v.transpose(0, 3, 2, 1),
             v.transpose(2, 3, 0, 1)]
    return max(float(np.abs(v - p).max()) for p in perms) / scale
