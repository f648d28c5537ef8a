"""Detuning pulse segments and their JSON form.

A program is an ordered list of segments. Each burst carries its own phase
reference: the drive is ``A*env(t)*cos(2*pi*f*t + phi)`` with ``t`` measured
from the start of the burst, the way an AWG plays back independent bursts.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Union

import numpy as np

#: Gaussian edge width giving a 10-90 % rise time of 1 ns.
DEFAULT_EDGE_SIGMA = 1.0 / (math.sqrt(2 * math.log(10.0)) - math.sqrt(2 * math.log(10.0 / 9.0)))
#: Envelope level at the burst boundaries, relative to the flat top.
EDGE_FLOOR = 0.01

KIND_RAMP, KIND_DWELL, KIND_BURST = 0, 1, 2


def edge_length(sigma: float) -> float:
    """Time for a Gaussian edge to climb from EDGE_FLOOR to the flat top."""
    return sigma * math.sqrt(-2 * math.log(EDGE_FLOOR)) if sigma > 0 else 0.0


@dataclass(frozen=True)
class Ramp:
    duration: float
    eps_start: float
    eps_end: float
    kind = "ramp"

    def __post_init__(self):
        _check_duration(self.duration)

    def static_eps(self, t):
        return self.eps_start + (self.eps_end - self.eps_start) * np.asarray(t) / self.duration

    @property
    def eps_range(self):
        return (min(self.eps_start, self.eps_end), max(self.eps_start, self.eps_end))

    def encode(self):
        return (KIND_RAMP, self.duration, self.eps_start, self.eps_end, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Dwell:
    duration: float
    eps: float
    kind = "dwell"

    def __post_init__(self):
        _check_duration(self.duration)

    def static_eps(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.eps)

    @property
    def eps_range(self):
        return (self.eps, self.eps)

    def encode(self):
        return (KIND_DWELL, self.duration, self.eps, self.eps, 0.0, 0.0, 0.0, 0.0)


@dataclass(frozen=True)
class Burst:
    duration: float
    eps_center: float
    drive_amplitude: float
    drive_frequency: float
    drive_phase: float = 0.0
    edge_sigma: float = DEFAULT_EDGE_SIGMA
    kind = "burst"

    def __post_init__(self):
        _check_duration(self.duration)
        if self.edge_sigma < 0:
            raise ValueError("edge_sigma must be >= 0")

    def static_eps(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.eps_center)

    def envelope(self, t):
        return envelope(np.asarray(t, dtype=float), self.duration, self.edge_sigma)

    @property
    def eps_range(self):
        a = abs(self.drive_amplitude)
        return (self.eps_center - a, self.eps_center + a)

    def encode(self):
        return (KIND_BURST, self.duration, self.eps_center, self.eps_center,
                self.drive_amplitude, self.drive_frequency, self.drive_phase, self.edge_sigma)


PulseSegment = Union[Ramp, Dwell, Burst]


def _check_duration(d):
    if not (d > 0 and math.isfinite(d)):
        raise ValueError(f"segment duration must be positive and finite, got {d!r}")


def envelope(t, duration: float, sigma: float):
    """Flat-top envelope with Gaussian edges that start and end at EDGE_FLOOR.

    Bursts shorter than two edge lengths never reach the flat top, which is
    what suppresses rotations for very short bursts.
    """
    t = np.asarray(t, dtype=float)
    if sigma <= 0:
        return np.where((t >= 0) & (t <= duration), 1.0, 0.0)
    te = edge_length(sigma)
    rise = np.where(t < te, np.exp(-((t - te) ** 2) / (2 * sigma**2)), 1.0)
    fall = np.where(t > duration - te, np.exp(-((t - (duration - te)) ** 2) / (2 * sigma**2)), 1.0)
    env = np.minimum(rise, fall)
    return np.where((t >= 0) & (t <= duration), env, 0.0)


def program_duration(program) -> float:
    return float(sum(s.duration for s in program))


_KEYS = {
    "ramp": (Ramp, ("eps_start", "eps_end")),
    "dwell": (Dwell, ("eps",)),
    "burst": (Burst, ("eps_center", "drive_amplitude", "drive_frequency",
                      "drive_phase", "edge_sigma")),
}


def segment_to_dict(seg: PulseSegment) -> dict:
    d = asdict(seg)
    out = {"kind": seg.kind, "duration_ns": d.pop("duration")}
    out.update(d)
    return out


def segment_from_dict(d: dict) -> PulseSegment:
    d = dict(d)
    kind = d.pop("kind", None)
    if kind not in _KEYS:
        raise ValueError(f"unknown segment kind {kind!r}")
    cls, keys = _KEYS[kind]
    if "duration_ns" not in d:
        raise ValueError("segment needs 'duration_ns'")
    kw = {"duration": float(d.pop("duration_ns"))}
    for k in keys:
        if k in d:
            kw[k] = float(d.pop(k))
    if d:
        raise ValueError(f"unknown keys for {kind} segment: {sorted(d)}")
    return cls(**kw)


def program_to_json(program) -> str:
    return json.dumps([segment_to_dict(s) for s in program], indent=2)


def program_from_json(text: str) -> list:
    data = json.loads(text)
    if not isinstance(data, list):
        raise ValueError("a pulse program is a JSON array of segments")
    return [segment_from_dict(d) for d in data]
