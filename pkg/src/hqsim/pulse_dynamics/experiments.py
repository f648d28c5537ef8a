"""Rabi, Ramsey and tomography scans and the ramp error budget.

All scans start in the ground state at the operating point and report the
occupation of the first excited eigenstate there. Only the parts of a
sequence that change along a scan axis are re-integrated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq, curve_fit

from .._parallel import ordered_map
from ..hq_model import DEFAULT_PARAMS, ModelParams, build_hamiltonian, qubit_splitting, sweet_spot
from .evolve import (
    STEPS_PER_PERIOD,
    Propagator,
    QubitState,
    _dwell_map,
    check_t1_range,
    compose,
    drive_matrix_element,
    evolve,
    segment_maps,
)
from .noise import NOISE_OFF, NoiseModel
from .pulses import DEFAULT_EDGE_SIGMA, Burst, Dwell, Ramp, edge_length

#: Measurement point for the ramp budget; T1 there is 102 us in the default table.
MEASURE_EPS = 250.0
#: Drive strength used when none is given: about 100 MHz Rabi frequency.
DEFAULT_RABI_GHZ = 0.1
MIN_FIT_AMPLITUDE = 0.05


# -- results -------------------------------------------------------------------

@dataclass(frozen=True)
class ScanResult:
    """P1 on a 1D or 2D grid. ``p1`` has shape ``tuple(len(v) for _, v in axes)``."""

    axes: tuple
    p1: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        p = np.asarray(self.p1, dtype=float)
        if np.any(p < -1e-6) or np.any(p > 1 + 1e-6):
            raise ValueError(f"P1 outside [0, 1]: [{p.min():.3g}, {p.max():.3g}]")
        object.__setattr__(self, "p1", np.clip(p, 0.0, 1.0))
        object.__setattr__(self, "axes", tuple((n, np.asarray(v, float)) for n, v in self.axes))

    def rows(self):
        if len(self.axes) == 1:
            for x, p in zip(self.axes[0][1], self.p1):
                yield (x, p)
        else:
            xs, ys = self.axes[0][1], self.axes[1][1]
            for i, x in enumerate(xs):
                for j, y in enumerate(ys):
                    yield (x, y, self.p1[i, j])

    def to_csv(self, path) -> None:
        header = "axis,p1" if len(self.axes) == 1 else "x,y,p1"
        with open(path, "w") as fh:
            fh.write(header + "\n")
            for row in self.rows():
                fh.write(",".join(f"{float(v):.12g}" for v in row) + "\n")


@dataclass(frozen=True)
class LinearFit:
    slope: float
    intercept: float
    r2: float
    n_points: int


@dataclass(frozen=True)
class RabiResult:
    scan: ScanResult
    f_rabi: np.ndarray  # per amplitude, NaN where flagged
    amplitude: np.ndarray
    flagged: np.ndarray
    linearity: LinearFit | None


@dataclass(frozen=True)
class RamseyResult:
    scan: ScanResult
    fft_peak: np.ndarray  # dominant frequency per eps_p, GHz
    bin_width: float
    f_expected: np.ndarray


@dataclass(frozen=True)
class SinusoidFit:
    amplitude: float
    phase: float
    offset: float


@dataclass(frozen=True)
class TomographyResult:
    scans: dict
    fits: dict
    phase_difference: float  # wrapped to (-pi, pi]


@dataclass(frozen=True)
class RampBudget:
    leakage_in: float
    relaxation_out: float
    lz_probability: float


# -- helpers ---------------------------------------------------------------

def operating_point(params: ModelParams = DEFAULT_PARAMS, eps: float | None = None,
                    f_mw: float | None = None) -> tuple[float, float]:
    """Default operating point is the sweet spot, driven on resonance."""
    e = sweet_spot(params) if eps is None else float(eps)
    f = qubit_splitting(e, params) if f_mw is None else float(f_mw)
    return e, f


def amplitude_for_rabi(f_rabi: float, eps: float, params: ModelParams = DEFAULT_PARAMS) -> float:
    return f_rabi / drive_matrix_element(eps, params)


def _projector(k, eps, params):
    _, v = np.linalg.eigh(build_hamiltonian(eps, params))
    return np.outer(v[:, k], v[:, k])


def _p1(rho, proj):
    return float(np.real(np.sum(proj * rho)))


def burst_maps(template: Burst, taus, params: ModelParams, offset: float = 0.0,
               profile=None, steps_per_period: float = STEPS_PER_PERIOD):
    """Propagators for bursts of every duration in ``taus``.

    The rising edge and flat top are integrated once, up to the longest
    burst, with snapshots where each shorter burst starts to fall; only the
    falling edge is integrated per duration.
    """
    taus = np.asarray(taus, dtype=float)
    te = edge_length(template.edge_sigma)
    out = [None] * len(taus)
    long_idx = []
    for i, t in enumerate(taus):
        if t <= 0:
            out[i] = Propagator.identity()
        elif t <= 2 * te + 1e-12:
            seg = replace(template, duration=float(t))
            out[i] = segment_maps(seg, params, offset, profile, steps_per_period=steps_per_period)[0]
        else:
            long_idx.append(i)
    if long_idx:
        flat_end = taus[long_idx] - te
        ck = np.unique(np.concatenate([[te], flat_end]))
        long = replace(template, duration=float(taus[long_idx].max()))
        heads = segment_maps(long, params, offset, profile, checkpoints=ck,
                             steps_per_period=steps_per_period)
        for i, fe in zip(long_idx, flat_end):
            seg = replace(template, duration=float(taus[i]))
            fall = segment_maps(seg, params, offset, profile, checkpoints=[seg.duration],
                                t_from=float(fe), steps_per_period=steps_per_period)[0]
            out[i] = heads[int(np.searchsorted(ck, fe))].then(fall)
    return out


def dwell_maps(eps: float, durations, params: ModelParams, offset: float = 0.0, profile=None):
    """Exact propagators for dwells of each duration (zero allowed)."""
    return _dwell_map(Dwell(1.0, eps), params, offset, profile,
                      np.asarray(durations, dtype=float))


def _mean_over(values):
    acc = np.zeros_like(values[0])
    for v in values:
        acc = acc + v
    return acc / len(values)


def _sinusoid_guess(t, y, f_lo, f_hi, n=600):
    """Frequency of the best single-tone least-squares fit on a grid."""
    best, best_f = np.inf, f_lo
    for f in np.linspace(f_lo, f_hi, n):
        a = np.column_stack([np.cos(2 * np.pi * f * t), np.sin(2 * np.pi * f * t), np.ones_like(t)])
        coef = np.linalg.lstsq(a, y, rcond=None)[0]
        r = float(np.sum((a @ coef - y) ** 2))
        if r < best:
            best, best_f = r, f
    return best_f


def fit_rabi(tau, p1, f_guess=None) -> tuple[float, float]:
    """(f_rabi, amplitude) of ``c + a*exp(-g*t)*cos(2*pi*f*t + phi)``.

    Returns ``(nan, amplitude)`` when the oscillation is below
    MIN_FIT_AMPLITUDE or the fit fails.
    """
    tau, p1 = np.asarray(tau, float), np.asarray(p1, float)
    amp0 = 0.5 * float(np.ptp(p1))
    if amp0 < MIN_FIT_AMPLITUDE:
        return math.nan, amp0
    span = float(tau.max() - tau.min())
    f_nyq = 0.5 / float(np.min(np.diff(np.sort(tau))))
    f0 = f_guess if f_guess is not None else _sinusoid_guess(tau, p1, 0.25 / span, f_nyq)
    a = np.column_stack([np.cos(2 * np.pi * f0 * tau), np.sin(2 * np.pi * f0 * tau)])
    cc, ss = np.linalg.lstsq(np.column_stack([a, np.ones_like(tau)]), p1, rcond=None)[0][:2]

    def model(t, c, amp, f, phi, g):
        return c + amp * np.exp(-g * t) * np.cos(2 * np.pi * f * t + phi)

    p0 = (float(p1.mean()), math.hypot(cc, ss), f0, math.atan2(-ss, cc), 0.0)
    try:
        popt, _ = curve_fit(model, tau, p1, p0=p0,
                            bounds=([-1, 0, 0, -10, 0], [2, 2, 2 * f_nyq, 10, 10]), maxfev=20000)
    except (RuntimeError, ValueError):
        return math.nan, amp0
    return float(popt[2]), float(popt[1])


def linear_fit(x, y) -> LinearFit:
    x, y = np.asarray(x, float), np.asarray(y, float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss_tot if ss_tot > 0 else 1.0
    return LinearFit(float(slope), float(intercept), r2, int(x.size))


def rabi_linearity(amps, f_rabi, f_mw: float) -> LinearFit | None:
    """Linear fit of f_rabi against amplitude over rows with f_rabi < f_mw/5."""
    amps, f_rabi = np.asarray(amps, float), np.asarray(f_rabi, float)
    m = np.isfinite(f_rabi) & (f_rabi < f_mw / 5)
    if m.sum() < 2:
        return None
    return linear_fit(amps[m], f_rabi[m])


# -- Rabi ---------------------------------------------------------------------

def rabi_scan(tau_grid, amp_grid, f_mw: float | None = None, *, params: ModelParams = DEFAULT_PARAMS,
              eps: float | None = None, noise: NoiseModel = NOISE_OFF,
              edge_sigma: float = DEFAULT_EDGE_SIGMA, drive_phase: float = 0.0,
              steps_per_period: float = STEPS_PER_PERIOD) -> RabiResult:
    eps, f_mw = operating_point(params, eps, f_mw)
    taus = np.asarray(tau_grid, float)
    amps = np.asarray(amp_grid, float)
    rho0 = QubitState.eigenstate(0, eps, params).rho
    proj = _projector(1, eps, params)
    offsets = noise.offsets()
    check_t1_range([Dwell(1.0, eps)], noise, offsets)

    def one(offset):
        grid = np.empty((taus.size, amps.size))
        for j, a in enumerate(amps):
            tpl = Burst(1.0, eps, float(a), f_mw, drive_phase, edge_sigma)
            maps = burst_maps(tpl, taus, params, float(offset), noise.t1_profile, steps_per_period)
            grid[:, j] = [_p1(m.apply(rho0), proj) for m in maps]
        return grid

    p1 = _mean_over(ordered_map(one, offsets))
    meta = dict(experiment="rabi", eps=eps, f_mw=f_mw, edge_sigma=edge_sigma,
                steps_per_period=steps_per_period, params=params.to_dict(),
                sigma_eps=noise.sigma_eps_quasistatic, n_realizations=len(offsets), seed=noise.seed)
    scan = ScanResult((("tau_ns", taus), ("amp_hghz", amps)), p1, meta)
    d01 = drive_matrix_element(eps, params)
    f_r, amp_fit = [], []
    for j, a in enumerate(amps):
        guess = a * d01 if a * d01 * (taus.max() - taus.min()) > 0.5 else None
        f, am = fit_rabi(taus, scan.p1[:, j], guess)
        f_r.append(f)
        amp_fit.append(am)
    f_r = np.array(f_r)
    return RabiResult(scan, f_r, np.array(amp_fit), ~np.isfinite(f_r),
                      rabi_linearity(amps, f_r, f_mw))


def calibrate_pulse(amp: float, *, target_p1: float = 0.5, params: ModelParams = DEFAULT_PARAMS,
                    eps: float | None = None, f_mw: float | None = None,
                    edge_sigma: float = DEFAULT_EDGE_SIGMA, drive_phase: float = 0.0,
                    steps_per_period: float = STEPS_PER_PERIOD) -> float:
    """Shortest burst duration reaching ``target_p1`` (0.5 gives a pi/2 pulse)."""
    eps, f_mw = operating_point(params, eps, f_mw)
    rho0 = QubitState.eigenstate(0, eps, params).rho
    proj = _projector(1, eps, params)
    tpl = Burst(1.0, eps, amp, f_mw, drive_phase, edge_sigma)
    f_est = amp * drive_matrix_element(eps, params)
    t_hi = 2 * edge_length(edge_sigma) + 1.0 / f_est
    taus = np.linspace(0, t_hi, 161)
    vals = np.array([_p1(m.apply(rho0), proj)
                     for m in burst_maps(tpl, taus, params, steps_per_period=steps_per_period)])
    above = np.flatnonzero(vals >= target_p1)
    if above.size == 0:
        raise ValueError(f"burst never reaches P1 = {target_p1} (max {vals.max():.3f})")
    k = int(above[0])

    def g(t):
        m = burst_maps(tpl, [t], params, steps_per_period=steps_per_period)[0]
        return _p1(m.apply(rho0), proj) - target_p1

    return float(brentq(g, taus[k - 1], taus[k], xtol=1e-6))


# -- Ramsey -------------------------------------------------------------------

def dominant_frequency(t, y) -> tuple[float, float]:
    """FFT peak (DC excluded) and bin width for a uniform grid."""
    t, y = np.asarray(t, float), np.asarray(y, float)
    dt = np.diff(t)
    if t.size < 4 or np.ptp(dt) > 1e-9 * max(1.0, abs(dt[0])):
        raise ValueError("FFT analysis needs a uniform grid of at least four points")
    spec = np.abs(np.fft.rfft(y - y.mean()))
    freqs = np.fft.rfftfreq(t.size, dt[0])
    k = 1 + int(np.argmax(spec[1:]))
    return float(freqs[k]), float(freqs[1])


def _ramsey_parts(eps, f_mw, amp, t_half, eps_p, ramp_time, params, offset, profile, spp,
                  edge_sigma, phase2=0.0):
    burst = Burst(t_half, eps, amp, f_mw, 0.0, edge_sigma)
    pre = segment_maps(burst, params, offset, profile, steps_per_period=spp)
    post_burst = pre if phase2 == 0.0 else segment_maps(
        replace(burst, drive_phase=phase2), params, offset, profile, steps_per_period=spp)
    before, after = [pre[0]], []
    if ramp_time > 0:
        before.append(segment_maps(Ramp(ramp_time, eps, eps_p), params, offset, profile,
                                   steps_per_period=spp)[0])
        after.append(segment_maps(Ramp(ramp_time, eps_p, eps), params, offset, profile,
                                  steps_per_period=spp)[0])
    after.append(post_burst[0])
    return compose(before), compose(after)


def _fringe(rho0, proj, before: Propagator, dwells, after: Propagator):
    """P1 after before -> dwell(t) -> after for every dwell map."""
    rho1 = before.apply(rho0)
    if all(d.unitary is not None for d in dwells) and after.unitary is not None:
        us = np.stack([d.unitary for d in dwells])
        rho2 = np.einsum("tij,jk,tlk->til", us, rho1, us.conj())
        heis = after.unitary.conj().T @ proj @ after.unitary
        return np.real(np.einsum("ji,tij->t", heis, rho2))
    left = proj.T.reshape(16) @ after.as_superop()
    right = rho1.reshape(16)
    return np.real(np.array([left @ d.as_superop() @ right for d in dwells]))


def ramsey_scan(eps_p_grid, te_grid, *, params: ModelParams = DEFAULT_PARAMS,
                eps: float | None = None, f_mw: float | None = None, amp: float | None = None,
                t_half: float | None = None, ramp_time: float = 1.0,
                noise: NoiseModel = NOISE_OFF, edge_sigma: float = DEFAULT_EDGE_SIGMA,
                steps_per_period: float = STEPS_PER_PERIOD) -> RamseyResult:
    """pi/2 - detuning pulse to eps_p for t_e - pi/2, both bursts at phase 0.

    ``ramp_time`` is the linear ramp between the operating point and eps_p on
    each side; zero makes the detuning pulse sudden.
    """
    eps, f_mw = operating_point(params, eps, f_mw)
    if amp is None:
        amp = amplitude_for_rabi(DEFAULT_RABI_GHZ, eps, params)
    if t_half is None:
        t_half = calibrate_pulse(amp, params=params, eps=eps, f_mw=f_mw, edge_sigma=edge_sigma,
                                 steps_per_period=steps_per_period)
    eps_ps = np.atleast_1d(np.asarray(eps_p_grid, float))
    tes = np.asarray(te_grid, float)
    rho0 = QubitState.eigenstate(0, eps, params).rho
    proj = _projector(1, eps, params)
    offsets = noise.offsets()
    check_t1_range([Dwell(1.0, eps), Dwell(1.0, float(eps_ps.min())),
                    Dwell(1.0, float(eps_ps.max()))], noise, offsets)
    prof = noise.t1_profile

    def one(offset):
        out = np.empty((eps_ps.size, tes.size))
        for i, ep in enumerate(eps_ps):
            before, after = _ramsey_parts(eps, f_mw, amp, t_half, float(ep), ramp_time, params,
                                          float(offset), prof, steps_per_period, edge_sigma)
            dw = dwell_maps(float(ep), tes, params, float(offset), prof)
            out[i] = _fringe(rho0, proj, before, dw, after)
        return out

    p1 = _mean_over(ordered_map(one, offsets))
    meta = dict(experiment="ramsey", eps=eps, f_mw=f_mw, amp=amp, t_half=t_half,
                ramp_time=ramp_time, steps_per_period=steps_per_period, params=params.to_dict(),
                sigma_eps=noise.sigma_eps_quasistatic, n_realizations=len(offsets), seed=noise.seed)
    scan = ScanResult((("eps_p_hghz", eps_ps), ("te_ns", tes)), p1, meta)
    peaks, width = [], math.nan
    if tes.size >= 4:
        for row in scan.p1:
            f, width = dominant_frequency(tes, row)
            peaks.append(f)
    return RamseyResult(scan, np.array(peaks), width, qubit_splitting(eps_ps, params))


def _local_envelope(te, p1, f):
    """Oscillation amplitude fitted over consecutive windows of one period."""
    n = max(4, int(round(1.0 / (f * (te[1] - te[0])))))
    t_mid, amp = [], []
    for i in range(0, te.size - n + 1, n):
        t, y = te[i:i + n], p1[i:i + n]
        a = np.column_stack([np.cos(2 * np.pi * f * t), np.sin(2 * np.pi * f * t), np.ones_like(t)])
        c, s_, _ = np.linalg.lstsq(a, y, rcond=None)[0]
        t_mid.append(t.mean())
        amp.append(math.hypot(c, s_))
    return np.array(t_mid), np.array(amp)


def fit_ramsey_envelope(te, p1, f_guess: float) -> float:
    """1/e time T of the Gaussian envelope in ``c + a*exp(-(t/T)^2)*cos(...)``."""
    te, p1 = np.asarray(te, float), np.asarray(p1, float)
    t_mid, env = _local_envelope(te, p1, f_guess)
    below = np.flatnonzero(env < env[0] / math.e)
    t0 = float(t_mid[below[0]]) if below.size else float(te.max())
    a0 = float(env[0]) * math.exp((t_mid[0] / max(t0, 1e-3)) ** 2)
    basis = np.column_stack([np.cos(2 * np.pi * f_guess * te), np.sin(2 * np.pi * f_guess * te)])
    w = np.exp(-((te / t0) ** 2))
    cc, ss = np.linalg.lstsq(basis * w[:, None], p1 - p1.mean(), rcond=None)[0]

    def model(t, c, amp, f, phi, tt):
        return c + amp * np.exp(-((t / tt) ** 2)) * np.cos(2 * np.pi * f * t + phi)

    p0 = (float(p1[te > t0].mean()) if np.any(te > t0) else float(p1.mean()),
          min(a0, 1.0), f_guess, math.atan2(-ss, cc), t0)
    popt, _ = curve_fit(model, te, p1, p0=p0, maxfev=20000,
                        bounds=([-1, 0, 0.8 * f_guess, -10, 1e-3],
                                [2, 2, 1.2 * f_guess, 10, 1e4]))
    return float(popt[4])


@dataclass(frozen=True)
class SigmaCalibration:
    sigma_eps: float
    t2_star: float
    eps_p: float
    history: tuple  # (sigma, T2*) pairs in evaluation order


def ramsey_t2_star(sigma_eps: float, eps_p: float, te_grid, *, params: ModelParams = DEFAULT_PARAMS,
                   n_realizations: int = 200, seed: int = 0, **kw) -> float:
    noise = NoiseModel(sigma_eps, None, n_realizations, seed)
    res = ramsey_scan([eps_p], te_grid, params=params, noise=noise, **kw)
    return fit_ramsey_envelope(te_grid, res.scan.p1[0], float(res.f_expected[0]))


def calibrate_sigma_eps(target_t2: float = 7.0, eps_p: float = -100.0, *,
                        params: ModelParams = DEFAULT_PARAMS, n_realizations: int = 200,
                        seed: int = 0, te_grid=None, rtol: float = 1e-3, **kw) -> SigmaCalibration:
    """Bisect sigma_eps until the simulated Ramsey envelope decays in ``target_t2``.

    Every trial reuses the same standard-normal draws (scaled by sigma), so
    the simulated T2* is a smooth monotone function of sigma.
    """
    if te_grid is None:
        te_grid = np.arange(0, 4 * target_t2, 0.1)
    te_grid = np.asarray(te_grid, float)
    eps, f_mw = operating_point(params, kw.pop("eps", None), kw.pop("f_mw", None))
    amp = kw.pop("amp", None) or amplitude_for_rabi(DEFAULT_RABI_GHZ, eps, params)
    t_half = kw.pop("t_half", None) or calibrate_pulse(amp, params=params, eps=eps, f_mw=f_mw)
    kw.update(eps=eps, f_mw=f_mw, amp=amp, t_half=t_half)
    h = 1e-4
    slope = (qubit_splitting(eps_p + h, params) - qubit_splitting(eps_p - h, params)) / (2 * h)
    guess = 1.0 / (math.sqrt(2) * math.pi * target_t2 * abs(slope))
    history = []
    memo = {}

    def err(log_sigma):
        if log_sigma in memo:
            return memo[log_sigma]
        s = math.exp(log_sigma)
        t2 = ramsey_t2_star(s, eps_p, te_grid, params=params, n_realizations=n_realizations,
                            seed=seed, **kw)
        history.append((s, t2))
        memo[log_sigma] = t2 - target_t2
        return memo[log_sigma]

    # T2* falls monotonically with sigma; walk out from the first-order
    # estimate until the target is bracketed
    step = math.log(1.4)
    lo = hi = math.log(guess)
    f_lo = f_hi = err(lo)
    for _ in range(12):
        if f_lo > 0 and f_hi < 0:
            break
        if f_hi >= 0:
            lo, f_lo = hi, f_hi
            hi += step
            f_hi = err(hi)
        else:
            hi, f_hi = lo, f_lo
            lo -= step
            f_lo = err(lo)
    else:
        raise ValueError("could not bracket the target T2*")
    x = brentq(err, lo, hi, xtol=rtol)
    sigma = math.exp(x)
    seen = dict(history)
    t2 = seen[sigma] if sigma in seen else err(x) + target_t2
    return SigmaCalibration(sigma, t2, eps_p, tuple(history))


# -- tomography -------------------------------------------------------------

#: Phase of the preparation burst for each axis, in the drive frame of the
#: first pulse (the sign of the eigenvector gauge fixes which one is +Y).
PREP_PHASES = {"+Y": math.pi, "-Y": 0.0}


def fit_sinusoid(phi, y) -> SinusoidFit:
    """Least-squares ``A*sin(phi + phi0) + B`` with A >= 0."""
    phi, y = np.asarray(phi, float), np.asarray(y, float)
    m = np.column_stack([np.sin(phi), np.cos(phi), np.ones_like(phi)])
    s, c, b = np.linalg.lstsq(m, y, rcond=None)[0]
    return SinusoidFit(float(math.hypot(s, c)), float(math.atan2(c, s)), float(b))


def wrap_phase(x: float) -> float:
    return float(-((-x + math.pi) % (2 * math.pi) - math.pi))


def tomography_scan(phi_grid, preparations=("+Y", "-Y"), *, params: ModelParams = DEFAULT_PARAMS,
                    eps: float | None = None, f_mw: float | None = None, amp: float | None = None,
                    t_half: float | None = None, gap: float = 0.0, noise: NoiseModel = NOISE_OFF,
                    edge_sigma: float = DEFAULT_EDGE_SIGMA,
                    steps_per_period: float = STEPS_PER_PERIOD) -> TomographyResult:
    """Prepare +-Y with a pi/2 burst, then a second pi/2 burst of phase phi."""
    eps, f_mw = operating_point(params, eps, f_mw)
    if amp is None:
        amp = amplitude_for_rabi(DEFAULT_RABI_GHZ, eps, params)
    if t_half is None:
        t_half = calibrate_pulse(amp, params=params, eps=eps, f_mw=f_mw, edge_sigma=edge_sigma,
                                 steps_per_period=steps_per_period)
    phis = np.asarray(phi_grid, float)
    for p in preparations:
        if p not in PREP_PHASES:
            raise ValueError(f"unknown preparation {p!r}; use one of {sorted(PREP_PHASES)}")
    rho0 = QubitState.eigenstate(0, eps, params).rho
    proj = _projector(1, eps, params)
    offsets = noise.offsets()
    check_t1_range([Dwell(1.0, eps)], noise, offsets)
    prof = noise.t1_profile

    def one(offset):
        def burst(phase):
            b = Burst(t_half, eps, amp, f_mw, phase, edge_sigma)
            return segment_maps(b, params, float(offset), prof, steps_per_period=steps_per_period)[0]

        seconds = [burst(float(p)) for p in phis]
        gap_map = dwell_maps(eps, [gap], params, float(offset), prof)[0]
        out = np.empty((len(preparations), phis.size))
        for i, prep in enumerate(preparations):
            rho1 = burst(PREP_PHASES[prep]).then(gap_map).apply(rho0)
            out[i] = [_p1(m.apply(rho1), proj) for m in seconds]
        return out

    p1 = _mean_over(ordered_map(one, offsets))
    scans, fits = {}, {}
    for i, prep in enumerate(preparations):
        meta = dict(experiment="tomography", preparation=prep, eps=eps, f_mw=f_mw, amp=amp,
                    t_half=t_half, gap=gap, params=params.to_dict(),
                    sigma_eps=noise.sigma_eps_quasistatic, n_realizations=len(offsets))
        scans[prep] = ScanResult((("phi_rad", phis),), p1[i], meta)
        fits[prep] = fit_sinusoid(phis, scans[prep].p1)
    diff = math.nan
    if "+Y" in fits and "-Y" in fits:
        diff = wrap_phase(fits["+Y"].phase - fits["-Y"].phase)
    return TomographyResult(scans, fits, diff)


# -- ramp error budget ----------------------------------------------------

def adiabatic_time(eps_a: float, eps_b: float, params: ModelParams = DEFAULT_PARAMS,
                   n: int = 2001) -> float:
    """Ramp duration at which the worst adiabaticity ratio along the path is 1.

    The ratio is ``|deps/dt| * |<m|dH/deps|0>| / (2*pi*(E_m - E_0)^2)``,
    maximised over the path and over m != 0.
    """
    e = np.linspace(eps_a, eps_b, n)
    w, v = np.linalg.eigh(np.stack([build_hamiltonian(x, params) for x in e]))
    dvec = np.array([0.5, 0.5, -0.5, -0.5])
    d = np.einsum("nim,i,nik->nmk", v, dvec, v)[:, 1:, 0]
    gap = w[:, 1:] - w[:, :1]
    return float(abs(eps_b - eps_a) * np.max(np.abs(d) / (2 * np.pi * gap**2)))


def standard_ramps(params: ModelParams = DEFAULT_PARAMS, measure_eps: float = MEASURE_EPS,
                   eps_mid: float = 40.0, stage1: float = 4.0, stage2: float = 2.0,
                   ramp_in: float = 20.0):
    """Slow ramp-in and a two-stage ramp-out between the measurement point
    and the sweet spot. Stage 1 crosses the T1 hot spot quickly; stage 2 is
    the fast 2 ns rise to the measurement point."""
    op = sweet_spot(params)
    return (Ramp(ramp_in, measure_eps, op),
            (Ramp(stage1, op, eps_mid), Ramp(stage2, eps_mid, measure_eps)))


def ramp_error_budget(ramp_in: Ramp, ramp_out, params: ModelParams = DEFAULT_PARAMS,
                      noise: NoiseModel = NOISE_OFF, *,
                      steps_per_period: float = STEPS_PER_PERIOD) -> RampBudget:
    """Errors of a load/unload cycle.

    leakage_in: population outside the two lowest eigenstates after the
    coherent ramp-in from the ground state. relaxation_out: loss of P1 during
    the full ramp-out started in state 1, with relaxation on versus off.
    lz_probability: 1 - P0 after the last ramp-out stage started in the
    ground state, coherently.
    """
    stages = list(ramp_out)
    if not stages:
        raise ValueError("ramp_out needs at least one stage")
    kw = dict(steps_per_period=steps_per_period)
    coherent = noise.replace(t1_table=None)
    s0 = QubitState.eigenstate(0, ramp_in.eps_start, params)
    p = evolve(s0, [ramp_in], params, NOISE_OFF, **kw).populations(ramp_in.eps_end, params)
    leakage = float(max(0.0, 1.0 - p[0] - p[1]))

    start, end = stages[0].eps_start, stages[-1].eps_end
    s1 = QubitState.eigenstate(1, start, params)
    p_coh = evolve(s1, stages, params, coherent, **kw).populations(end, params)[1]
    relax = 0.0
    if noise.t1_table is not None:
        p_diss = evolve(s1, stages, params, noise, **kw).populations(end, params)[1]
        relax = float(p_coh - p_diss)
    last = stages[-1]
    g = QubitState.eigenstate(0, last.eps_start, params)
    lz = 1.0 - evolve(g, [last], params, coherent, **kw).populations(last.eps_end, params)[0]
    return RampBudget(leakage, relax, float(max(lz, 0.0)))
