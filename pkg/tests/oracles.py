"""Independent reference computations used by the tests.

Nothing here imports from hqsim; each routine is a deliberately plain
re-derivation so the package is checked against separate code.
"""

import math

import numpy as np

GHZ_PER_UEV = 0.241798924  # 1 ueV / h in GHz (CODATA 2018)


def jacobi_eigenvalues(a, tol=1e-14, max_sweeps=100):
    """Cyclic Jacobi rotations for a real symmetric matrix."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    for _ in range(max_sweeps):
        off = math.sqrt(sum(a[i, j] ** 2 for i in range(n) for j in range(n) if i != j))
        if off < tol * max(1.0, np.abs(a).max()):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                if abs(a[p, q]) < 1e-300:
                    continue
                theta = (a[q, q] - a[p, p]) / (2 * a[p, q])
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1))
                c = 1 / math.sqrt(t * t + 1)
                s = t * c
                j = np.eye(n)
                j[p, p] = j[q, q] = c
                j[p, q], j[q, p] = s, -s
                a = j.T @ a @ j
    return np.sort(np.diag(a))


def toy_hamiltonian(eps, dl, dr, t1, t2, t3, t4):
    return np.array([
        [eps / 2, 0, t1, -t2],
        [0, eps / 2 + dl, -t3, t4],
        [t1, -t3, -eps / 2, 0],
        [-t2, t4, 0, -eps / 2 + dr],
    ], dtype=float)


def rabi_two_level(f_rabi, detuning, t):
    """Rabi formula: excited population of a driven two-level system (RWA)."""
    w = math.hypot(f_rabi, detuning)
    return (f_rabi / w) ** 2 * math.sin(math.pi * w * t) ** 2


def discrete_laplacian_levels(n, h, kinetic):
    """Eigenvalues of -kinetic * d2/dx2 on n interior points with Dirichlet walls."""
    k = np.arange(1, n + 1)
    return kinetic * (2 / h**2) * (1 - np.cos(k * np.pi / (n + 1)))


def product_space_two_electron(h1, w, n_levels=None):
    """Two-electron spectrum of ``h1 (x) 1 + 1 (x) h1 + diag(w)`` split by exchange symmetry.

    Returns the singlet (spatially symmetric) and triplet (antisymmetric)
    eigenvalues; a triplet level counts three times in the full spectrum.
    """
    g = h1.shape[0]
    eye = np.eye(g)
    h = np.kron(h1, eye) + np.kron(eye, h1) + np.diag(np.ravel(w))
    iu, ju = np.triu_indices(g, 1)
    anti = np.zeros((g * g, iu.size))
    anti[iu * g + ju, np.arange(iu.size)] = 1 / math.sqrt(2)
    anti[ju * g + iu, np.arange(iu.size)] = -1 / math.sqrt(2)
    ii, jj = np.triu_indices(g)
    sym = np.zeros((g * g, ii.size))
    sym[ii * g + jj, np.arange(ii.size)] += 1
    sym[jj * g + ii, np.arange(ii.size)] += 1
    sym /= np.linalg.norm(sym, axis=0)
    singlet = np.linalg.eigvalsh(sym.T @ h @ sym)
    triplet = np.linalg.eigvalsh(anti.T @ h @ anti)
    return singlet, triplet


def full_two_electron_spectrum(singlet, triplet):
    return np.sort(np.concatenate([singlet, np.repeat(triplet, 3)]))


# CODATA 2018, written out so the FCI checks do not share constants with the package
GHZ_PER_MEV = 241.798924
HBAR2_OVER_2ME = 38.0998211  # meV nm^2
COULOMB_MEV_NM = 1439.964547  # e^2 / (4 pi eps0)


def grid_hamiltonian(values, hx, hy, m_star):
    """Five-point kinetic stencil plus potential, Dirichlet walls, in h*GHz."""
    nx, ny = values.shape
    k = HBAR2_OVER_2ME / m_star
    g = nx * ny
    h = np.zeros((g, g))
    for i in range(nx):
        for j in range(ny):
            a = i * ny + j
            h[a, a] = values[i, j] + 2 * k / hx**2 + 2 * k / hy**2
            for di, dj, step in ((1, 0, hx), (-1, 0, hx), (0, 1, hy), (0, -1, hy)):
                ii, jj = i + di, j + dj
                if 0 <= ii < nx and 0 <= jj < ny:
                    h[a, ii * ny + jj] = -k / step**2
    return h * GHZ_PER_MEV


def grid_coulomb(nx, ny, hx, hy, kappa, a):
    x = (np.arange(nx) - (nx - 1) / 2) * hx
    y = (np.arange(ny) - (ny - 1) / 2) * hy
    xx, yy = np.meshgrid(x, y, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    r2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
    return COULOMB_MEV_NM / kappa / np.sqrt(r2 + a * a) * GHZ_PER_MEV


def antisymmetrized_two_electron(h_grid, w, phi, lam=1.0):
    """Two electrons in the spin orbitals built from orbitals ``phi`` (n, G).

    ``phi`` are orthonormal grid vectors (unit 2-norm). Every product of two
    spin orbitals is formed explicitly, the Hamiltonian is evaluated in that
    product space and then restricted to its antisymmetric part.
    """
    n = phi.shape[0]
    m = 2 * n
    h1 = phi @ h_grid @ phi.T
    # <ij|kl> = sum_ab phi_i(a) phi_j(b) w(a,b) phi_k(a) phi_l(b)
    v = np.einsum("ia,ka,ab,jb,lb->ijkl", phi, phi, w, phi, phi, optimize=True)
    hs = np.zeros((m * m, m * m))
    for p in range(m):
        for q in range(m):
            for r in range(m):
                for s in range(m):
                    val = 0.0
                    if q == s and p % 2 == r % 2:
                        val += h1[p // 2, r // 2]
                    if p == r and q % 2 == s % 2:
                        val += h1[q // 2, s // 2]
                    if p % 2 == r % 2 and q % 2 == s % 2:
                        val += lam * v[p // 2, q // 2, r // 2, s // 2]
                    hs[p * m + q, r * m + s] = val
    iu, ju = np.triu_indices(m, 1)
    anti = np.zeros((m * m, iu.size))
    anti[iu * m + ju, np.arange(iu.size)] = 1 / math.sqrt(2)
    anti[ju * m + iu, np.arange(iu.size)] = -1 / math.sqrt(2)
    return np.linalg.eigvalsh(anti.T @ hs @ anti)
