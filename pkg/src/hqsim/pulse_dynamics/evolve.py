"""Density-matrix propagation through a pulse program.

Segments are turned into maps: a 4x4 unitary when relaxation is off (or
negligible over the segment) and a 16x16 row-major superoperator otherwise,
so that ``vec(U rho U^+) = kron(U, conj(U)) @ vec(rho)``. Dwells are
propagated exactly; ramps and bursts use the RK4 kernels.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .._parallel import ordered_map
from ..hq_model import ModelParams, build_hamiltonian, detuning_operator
from . import _kernels as K
from .noise import NOISE_OFF, NoiseModel, T1Profile
from .pulses import Burst, Dwell, Ramp, edge_length

#: Steps per period of the fastest frequency in a segment.
STEPS_PER_PERIOD = 40
#: Maximum change of any rho entry tolerated under step halving.
CONVERGENCE_TOL = 1e-4
#: Segments whose integrated relaxation stays below this are run coherently.
NEGLIGIBLE_RELAXATION = 1e-9

_NO_T1 = (np.array([0.0]), np.array([np.inf]))


class IntegrationError(RuntimeError):
    """Step halving moved the result by more than CONVERGENCE_TOL."""


@dataclass(frozen=True)
class QubitState:
    rho: np.ndarray

    def __post_init__(self):
        rho = np.array(self.rho, dtype=complex)
        if rho.shape != (4, 4):
            raise ValueError("rho must be 4x4")
        if np.max(np.abs(rho - rho.conj().T)) > 1e-12:
            raise ValueError("rho is not Hermitian")
        if abs(np.trace(rho).real - 1) > 1e-9:
            raise ValueError("rho must have unit trace")
        if np.linalg.eigvalsh(rho)[0] < -1e-9:
            raise ValueError("rho has a negative eigenvalue")
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @classmethod
    def pure(cls, vec) -> "QubitState":
        v = np.asarray(vec, dtype=complex)
        v = v / np.linalg.norm(v)
        return cls(np.outer(v, v.conj()))

    @classmethod
    def eigenstate(cls, k: int, eps: float, params: ModelParams) -> "QubitState":
        _, vecs = np.linalg.eigh(build_hamiltonian(eps, params))
        return cls.pure(vecs[:, k])

    @classmethod
    def mixed_qubit(cls, eps: float, params: ModelParams) -> "QubitState":
        """Equal mixture of the two lowest eigenstates."""
        _, v = np.linalg.eigh(build_hamiltonian(eps, params))
        return cls(0.5 * (np.outer(v[:, 0], v[:, 0]) + np.outer(v[:, 1], v[:, 1])))

    def populations(self, eps: float, params: ModelParams) -> np.ndarray:
        """Occupations of the instantaneous eigenstates at ``eps``."""
        _, v = np.linalg.eigh(build_hamiltonian(eps, params))
        return np.einsum("ik,ij,jk->k", v, self.rho, v).real

    def purity(self) -> float:
        return float(np.trace(self.rho @ self.rho).real)


# -- segment maps -------------------------------------------------------------

class Propagator:
    """Linear map on density matrices: a unitary or a superoperator."""

    __slots__ = ("unitary", "superop")

    def __init__(self, unitary=None, superop=None):
        self.unitary = unitary
        self.superop = superop

    @classmethod
    def identity(cls):
        return cls(unitary=np.eye(4, dtype=complex))

    def as_superop(self) -> np.ndarray:
        if self.superop is not None:
            return self.superop
        u = self.unitary
        return np.kron(u, u.conj())

    def then(self, later: "Propagator") -> "Propagator":
        """Map that applies ``self`` first and ``later`` second."""
        if self.unitary is not None and later.unitary is not None:
            return Propagator(unitary=later.unitary @ self.unitary)
        return Propagator(superop=later.as_superop() @ self.as_superop())

    def apply(self, rho: np.ndarray) -> np.ndarray:
        if self.unitary is not None:
            u = self.unitary
            return u @ rho @ u.conj().T
        return (self.superop @ rho.reshape(16)).reshape(4, 4)


def compose(maps) -> Propagator:
    out = Propagator.identity()
    for m in maps:
        out = out.then(m)
    return out


def _static_range(seg):
    if isinstance(seg, Ramp):
        return seg.eps_range
    if isinstance(seg, Dwell):
        return (seg.eps, seg.eps)
    return (seg.eps_center, seg.eps_center)


def _spread(params, eps_values):
    w = np.linalg.eigvalsh(np.stack([build_hamiltonian(e, params) for e in eps_values]))
    return w


def segment_dt(seg, params: ModelParams, offset: float = 0.0,
               steps_per_period: float = STEPS_PER_PERIOD):
    """Time step and energy shift used for one segment.

    The shift (mean of the two lowest levels at the segment midpoint) only
    changes a global phase but keeps the qubit pair near zero energy, which
    is where RK4 phase errors matter most.
    """
    lo, hi = seg.eps_range
    samples = np.array([lo, 0.5 * (lo + hi), hi]) + offset
    w = _spread(params, samples)
    mid = 0.5 * sum(_static_range(seg)) + offset
    wm = np.linalg.eigvalsh(build_hamiltonian(mid, params))
    shift = 0.5 * (wm[0] + wm[1])
    f_drive = seg.drive_frequency if isinstance(seg, Burst) else 0.0
    f_max = max(params.delta_R, f_drive, float(np.max(w[:, -1] - w[:, 0])),
                float(np.max(np.abs(w - shift))))
    return 1.0 / (steps_per_period * f_max), shift


def _h0(params, shift):
    return build_hamiltonian(0.0, params) - shift * np.eye(4)


def _t1_arrays(profile: T1Profile | None):
    if profile is None:
        return _NO_T1
    return profile.eps, np.log(profile.t1)


def is_coherent(seg, profile: T1Profile | None, offset: float = 0.0) -> bool:
    if profile is None:
        return True
    t1e, t1l = _t1_arrays(profile)
    n = 2 if isinstance(seg, (Dwell, Burst)) else 400
    return K.relaxation_integral(np.array(seg.encode()), offset, n, t1e, t1l) < NEGLIGIBLE_RELAXATION


def lindbladian(eps: float, params: ModelParams, gamma: float) -> np.ndarray:
    """16x16 row-major generator of the static master equation."""
    h = build_hamiltonian(eps, params)
    eye = np.eye(4)
    gen = -2j * np.pi * (np.kron(h, eye) - np.kron(eye, h.T))
    if gamma > 0:
        _, v = np.linalg.eigh(h)
        op = np.outer(v[:, 0], v[:, 1])
        ld = op.T @ op
        gen = gen + gamma * (np.kron(op, op) - 0.5 * np.kron(ld, eye) - 0.5 * np.kron(eye, ld.T))
    return gen


def _dwell_map(seg: Dwell, params, offset, profile, durations=None):
    ts = np.atleast_1d(seg.duration if durations is None else durations).astype(float)
    eps = seg.eps + offset
    gamma = float(profile.rate(eps)) if profile is not None else 0.0
    if gamma * float(np.max(ts)) < NEGLIGIBLE_RELAXATION:
        w, v = np.linalg.eigh(build_hamiltonian(eps, params))
        w = w - w[0]
        us = np.einsum("ik,tk,jk->tij", v, np.exp(-2j * np.pi * np.outer(ts, w)), v)
        return [Propagator(unitary=u) for u in us]
    gen = lindbladian(eps, params, gamma)
    return [Propagator(superop=expm(gen * t)) for t in ts]


_ELEMENTARY = np.eye(16, dtype=complex).reshape(16, 4, 4)


def segment_maps(seg, params: ModelParams, offset: float = 0.0,
                 profile: T1Profile | None = None, checkpoints=None, t_from: float = 0.0,
                 steps_per_period: float = STEPS_PER_PERIOD):
    """Maps from ``t_from`` to each checkpoint inside one segment.

    Default: a single map for the whole segment.
    """
    if checkpoints is None:
        checkpoints = np.array([seg.duration])
    checkpoints = np.asarray(checkpoints, dtype=float)
    if isinstance(seg, Dwell):
        return _dwell_map(seg, params, offset, profile, checkpoints - t_from)
    dt, shift = segment_dt(seg, params, offset, steps_per_period)
    code = np.array(seg.encode(), dtype=float)
    t_edge = edge_length(seg.edge_sigma) if isinstance(seg, Burst) else 0.0
    h0 = _h0(params, shift)
    if is_coherent(seg, profile, offset):
        us = K.propagate_unitary(h0, code, t_edge, offset, t_from, checkpoints, dt)
        return [Propagator(unitary=u) for u in us]
    t1e, t1l = _t1_arrays(profile)
    snaps = K.propagate_lindblad(_ELEMENTARY, h0, code, t_edge, offset, t_from,
                                 checkpoints, dt, t1e, t1l)
    # column a*4+b of the superoperator is vec(image of E_ab)
    return [Propagator(superop=s.reshape(16, 16).T.copy()) for s in snaps]


def program_map(program, params: ModelParams, offset: float = 0.0,
                profile: T1Profile | None = None,
                steps_per_period: float = STEPS_PER_PERIOD) -> Propagator:
    return compose(segment_maps(s, params, offset, profile, steps_per_period=steps_per_period)[0]
                   for s in program)


def check_t1_range(program, noise: NoiseModel, offsets) -> None:
    prof = noise.t1_profile
    if prof is None:
        return
    lo = min(_static_range(s)[0] for s in program) + float(np.min(offsets))
    hi = max(_static_range(s)[1] for s in program) + float(np.max(offsets))
    prof.check_range(lo, hi)


def _evolve_one(rho, program, params, offset, profile, spp, check):
    out = program_map(program, params, offset, profile, spp).apply(rho)
    if check:
        fine = program_map(program, params, offset, profile, 2 * spp).apply(rho)
        err = float(np.max(np.abs(fine - out)))
        if err > CONVERGENCE_TOL:
            raise IntegrationError(
                f"step halving changed rho by {err:.3g} (> {CONVERGENCE_TOL}); "
                "increase steps_per_period"
            )
        out = fine
    return out


def _clean(rho):
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def evolve(state: QubitState, program, params: ModelParams, noise: NoiseModel = NOISE_OFF,
           *, steps_per_period: float = STEPS_PER_PERIOD,
           check_convergence: bool = True) -> QubitState:
    """Propagate ``state`` through ``program`` and average over noise offsets.

    With ``check_convergence`` every realization is integrated a second time
    at half the step and the finer result is returned.
    """
    program = list(program)
    if not program:
        raise ValueError("program must contain at least one segment")
    offsets = noise.offsets()
    check_t1_range(program, noise, offsets)
    prof = noise.t1_profile
    rhos = ordered_map(
        lambda o: _evolve_one(state.rho, program, params, float(o), prof,
                              steps_per_period, check_convergence),
        offsets,
    )
    acc = np.zeros((4, 4), dtype=complex)
    for r in rhos:
        acc += r
    return QubitState(_clean(acc / len(rhos)))


def drive_matrix_element(eps: float, params: ModelParams) -> float:
    """|<0|dH/deps|1>| at ``eps``; the Rabi frequency is about A times this."""
    _, v = np.linalg.eigh(build_hamiltonian(eps, params))
    return float(abs(v[:, 0] @ detuning_operator() @ v[:, 1]))


__all__ = [
    "IntegrationError", "QubitState", "Propagator", "compose", "segment_dt", "segment_maps",
    "program_map", "evolve", "lindbladian", "is_coherent", "drive_matrix_element",
    "STEPS_PER_PERIOD", "CONVERGENCE_TOL",
]
