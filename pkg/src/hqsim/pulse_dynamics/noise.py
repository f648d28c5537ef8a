"""Quasistatic detuning noise and the detuning-dependent T1 profile."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class T1RangeError(ValueError):
    """Detuning outside the T1 table with extrapolation disabled."""


# Synthetic profile: a 20 ns hot spot between the operating point and the
# measurement point (eps = 250), where T1 reaches the 102 us used by the
# readout defaults.
DEFAULT_T1_TABLE = (
    (-400.0, 1.0e7),
    (-60.0, 1.0e7),
    (-34.0, 1.0e3),
    (-25.0, 20.0),
    (-16.0, 1.0e3),
    (60.0, 1.0e5),
    (250.0, 1.02e5),
    (400.0, 1.02e5),
)


@dataclass(frozen=True)
class T1Profile:
    """Log-linear interpolation of a (detuning, T1) table."""

    eps: np.ndarray
    t1: np.ndarray
    extrapolate: bool = False

    def __post_init__(self):
        eps = np.asarray(self.eps, dtype=float)
        t1 = np.asarray(self.t1, dtype=float)
        if eps.ndim != 1 or eps.shape != t1.shape or eps.size < 1:
            raise ValueError("t1 table must be a non-empty list of (eps, T1) pairs")
        if np.any(np.diff(eps) <= 0):
            raise ValueError("t1 table detunings must be strictly increasing")
        if np.any(~(t1 > 0)):
            bad = int(np.flatnonzero(~(t1 > 0))[0])
            raise ValueError(f"t1 table entry {bad} has non-positive T1")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "t1", t1)

    @classmethod
    def from_pairs(cls, pairs, extrapolate: bool = False) -> "T1Profile":
        arr = np.asarray(pairs, dtype=float).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1], extrapolate)

    def check_range(self, lo: float, hi: float) -> None:
        if self.extrapolate:
            return
        if lo < self.eps[0] or hi > self.eps[-1]:
            raise T1RangeError(
                f"detuning range [{lo:.6g}, {hi:.6g}] leaves the T1 table hull "
                f"[{self.eps[0]:.6g}, {self.eps[-1]:.6g}]"
            )

    def __call__(self, eps):
        e = np.asarray(eps, dtype=float)
        self.check_range(float(np.min(e)), float(np.max(e)))
        # outside the hull (extrapolate=True) the edge value is held
        return np.exp(np.interp(e, self.eps, np.log(self.t1)))

    def rate(self, eps):
        return 1.0 / self(eps)


def t1_profile_eval(eps, table, extrapolate: bool = False):
    """T1 in ns at ``eps`` from a table of (eps, T1) pairs."""
    prof = table if isinstance(table, T1Profile) else T1Profile.from_pairs(table, extrapolate)
    return prof(eps)


@dataclass(frozen=True)
class NoiseModel:
    """Quasistatic detuning noise plus optional relaxation.

    ``t1_table=None`` switches relaxation off. Each realization ``r`` draws its
    detuning offset from an RNG seeded with ``(seed, r)``.
    """

    sigma_eps_quasistatic: float = 0.0
    t1_table: tuple | None = None
    n_realizations: int = 1
    seed: int = 0
    t1_extrapolate: bool = False
    _profile: T1Profile | None = field(default=None, init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.sigma_eps_quasistatic < 0:
            raise ValueError("sigma_eps_quasistatic must be >= 0")
        if self.n_realizations < 1:
            raise ValueError("n_realizations must be >= 1")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must fit in 64 bits")
        if self.t1_table is not None:
            tbl = tuple(tuple(map(float, p)) for p in self.t1_table)
            object.__setattr__(self, "t1_table", tbl)
            object.__setattr__(self, "_profile", T1Profile.from_pairs(tbl, self.t1_extrapolate))

    @property
    def t1_profile(self) -> T1Profile | None:
        return self._profile

    @property
    def effective_realizations(self) -> int:
        return self.n_realizations if self.sigma_eps_quasistatic > 0 else 1

    def offsets(self) -> np.ndarray:
        n = self.effective_realizations
        if self.sigma_eps_quasistatic == 0:
            return np.zeros(1)
        z = np.array([np.random.default_rng([int(self.seed), r]).standard_normal() for r in range(n)])
        return self.sigma_eps_quasistatic * z

    def replace(self, **kw) -> "NoiseModel":
        d = dict(sigma_eps_quasistatic=self.sigma_eps_quasistatic, t1_table=self.t1_table,
                 n_realizations=self.n_realizations, seed=self.seed,
                 t1_extrapolate=self.t1_extrapolate)
        d.update(kw)
        return NoiseModel(**d)


NOISE_OFF = NoiseModel()
