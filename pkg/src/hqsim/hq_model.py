"""Four-level hybrid-qubit toy Hamiltonian.

Basis ordering is ``{(2,1)g, (2,1)e, (1,2)g, (1,2)e}``; all energies are in
h*GHz. Positive detuning lowers the (1,2) configuration.
"""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .units import GHZ_PER_UEV

BASIS_LABELS = ("(2,1)g", "(2,1)e", "(1,2)g", "(1,2)e")
DISPERSION_HEADER = ("eps_hghz", "E0", "E1", "E2", "E3", "f_qubit_ghz")


class BracketError(ValueError):
    """Raised when a root bracket does not straddle the target."""


@dataclass(frozen=True)
class ModelParams:
    delta_L: float = 3.0
    delta_R: float = 95.8
    t1: float = 1.8
    t2: float = 7.1
    t3: float = 11.5
    t4: float = 6.3
    lever_arm: float = 0.028

    def __post_init__(self):
        vals = (self.delta_L, self.delta_R, self.t1, self.t2, self.t3, self.t4, self.lever_arm)
        if not all(np.isfinite(vals)):
            raise ValueError("model parameters must be finite")
        if self.delta_L <= 0 or self.delta_R <= 0:
            raise ValueError("delta_L and delta_R must be positive")
        if min(self.t1, self.t2, self.t3, self.t4) < 0:
            raise ValueError("tunnel couplings must be non-negative")
        if self.delta_R <= self.delta_L:
            warnings.warn(
                "delta_R <= delta_L: outside the asymmetric-splitting regime",
                stacklevel=3,
            )

    @property
    def tunnelings(self) -> tuple[float, float, float, float]:
        return (self.t1, self.t2, self.t3, self.t4)

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        t = d.get("t_ghz", [1.8, 7.1, 11.5, 6.3])
        if len(t) != 4:
            raise ValueError("t_ghz must hold exactly four couplings")
        return cls(
            delta_L=float(d.get("delta_L_ghz", 3.0)),
            delta_R=float(d.get("delta_R_ghz", 95.8)),
            t1=float(t[0]), t2=float(t[1]), t3=float(t[2]), t4=float(t[3]),
            lever_arm=float(d.get("lever_arm", 0.028)),
        )

    def to_dict(self) -> dict:
        return {
            "delta_L_ghz": self.delta_L,
            "delta_R_ghz": self.delta_R,
            "t_ghz": list(self.tunnelings),
            "lever_arm": self.lever_arm,
        }


#: Parameter set fitted to the measured dispersion (delta_R fixed by measurement).
DEFAULT_PARAMS = ModelParams()


def build_hamiltonian(eps: float, params: ModelParams) -> np.ndarray:
    """Return the 4x4 real symmetric Hamiltonian at detuning ``eps``."""
    p = params
    h = eps / 2
    return np.array(
        [
            [h, 0.0, p.t1, -p.t2],
            [0.0, h + p.delta_L, -p.t3, p.t4],
            [p.t1, -p.t3, -h, 0.0],
            [-p.t2, p.t4, 0.0, -h + p.delta_R],
        ]
    )


def detuning_operator() -> np.ndarray:
    """dH/d(eps); the operator the ac drive couples to."""
    return np.diag([0.5, 0.5, -0.5, -0.5])


def _hamiltonian_stack(eps: np.ndarray, params: ModelParams) -> np.ndarray:
    eps = np.asarray(eps, dtype=float)
    base = build_hamiltonian(0.0, params)
    out = np.broadcast_to(base, eps.shape + (4, 4)).copy()
    d = detuning_operator().diagonal()
    idx = np.arange(4)
    out[..., idx, idx] += eps[..., None] * d
    return out


@dataclass(frozen=True)
class LevelSet:
    detuning: float
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray = field(repr=False)  # columns are eigenvectors

    @property
    def splitting(self) -> float:
        return float(self.eigenvalues[1] - self.eigenvalues[0])


def _eigh(eps: np.ndarray, params: ModelParams):
    return np.linalg.eigh(_hamiltonian_stack(eps, params))


def levels(eps: float, params: ModelParams) -> LevelSet:
    w, v = _eigh(np.array([eps], dtype=float), params)
    return LevelSet(float(eps), w[0], v[0])


def qubit_splitting(eps, params: ModelParams):
    """E1 - E0 in GHz. Accepts a scalar or an array of detunings."""
    w, _ = _eigh(np.atleast_1d(np.asarray(eps, dtype=float)), params)
    f = w[:, 1] - w[:, 0]
    return float(f[0]) if np.ndim(eps) == 0 else f


@dataclass(frozen=True)
class Dispersion:
    eps: np.ndarray
    energies: np.ndarray  # (n, 4)
    f_qubit: np.ndarray

    def rows(self):
        for e, E, f in zip(self.eps, self.energies, self.f_qubit):
            yield (float(e), *map(float, E), float(f))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(DISPERSION_HEADER)
            for row in self.rows():
                w.writerow([f"{x:.12g}" for x in row])


def dispersion_scan(eps_grid, params: ModelParams) -> Dispersion:
    eps = np.asarray(eps_grid, dtype=float).ravel()
    if eps.size == 0:
        raise ValueError("eps_grid must be non-empty")
    if not np.all(np.isfinite(eps)):
        raise ValueError("eps_grid must be finite")
    w = np.stack([levels(e, params).eigenvalues for e in eps])
    return Dispersion(eps, w, w[:, 1] - w[:, 0])


def find_detuning_for_frequency(target_ghz: float, bracket: tuple[float, float],
                                params: ModelParams, xtol: float = 1e-10) -> float:
    """Bisection for ``qubit_splitting(eps) == target_ghz`` inside ``bracket``."""
    a, b = map(float, bracket)
    fa = qubit_splitting(a, params) - target_ghz
    fb = qubit_splitting(b, params) - target_ghz
    if fa == 0:
        return a
    if fb == 0:
        return b
    if np.sign(fa) == np.sign(fb):
        raise BracketError(
            f"bracket [{a}, {b}] does not straddle {target_ghz} GHz "
            f"(splitting {fa + target_ghz:.6g} .. {fb + target_ghz:.6g} GHz)"
        )
    return brentq(lambda e: qubit_splitting(e, params) - target_ghz, a, b, xtol=xtol)


def sweet_spot(params: ModelParams, bracket: tuple[float, float] = (-200.0, 0.0)) -> float:
    """Detuning of the splitting minimum (first-order charge-noise sweet spot)."""
    r = minimize_scalar(lambda e: qubit_splitting(e, params), bounds=bracket,
                        method="bounded", options={"xatol": 1e-9})
    return float(r.x)


def gate_to_detuning(delta_v: float, params: ModelParams) -> float:
    """Gate swing in volts -> detuning in h*GHz via the lever arm."""
    return params.lever_arm * delta_v * 1e6 * GHZ_PER_UEV


def detuning_to_gate(eps: float, params: ModelParams) -> float:
    return eps / GHZ_PER_UEV / 1e6 / params.lever_arm
