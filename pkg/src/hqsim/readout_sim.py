"""Monte Carlo single-shot readout traces and threshold detection.

A trace is a rectangular telegraph signal (downward blips while the dot is
empty) sampled at the internal rate, plus white Gaussian noise, passed
through a trailing boxcar of width ``t_integration`` and decimated to the
detector rate. Detector sample ``j`` sits at ``t = j / detector_rate`` and
averages the preceding ``t_integration``.

Every trace draws from its own generator seeded with ``(seed, 1, index)``;
labels come from ``(seed, 0)``. Batches are therefore identical regardless
of how trace generation is split across workers.
"""

from __future__ import annotations

import math
import struct
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import brentq

from ._io import write_json
from ._parallel import ordered_map

HQTR_MAGIC = b"HQTR"
HQTR_VERSION = 1
FIDELITY_HEADER = "threshold,F0,F1,visibility"


class StatisticsError(ValueError):
    """Too few events for a tunnelling-time fit."""


class AnalysisError(ValueError):
    """Batch cannot support the requested analysis."""


@dataclass(frozen=True)
class TraceConfig:
    t_meas: float = 140.0
    internal_rate: float = 10.0
    detector_rate: float = 1.0
    tau_out: float = 2.04
    tau_in: float = 32.0
    T1_meas: float = 102.0
    p_thermal_window: float = 0.04
    level_base: float = 0.0
    level_blip: float = -1.0
    t_integration: float = 1.0
    snr_sigma_ratio: float = 5.0
    seed: int = 0

    def __post_init__(self):
        problems = self.diagnostics()
        if problems:
            raise ValueError("; ".join(problems))

    def diagnostics(self) -> list[str]:
        out = []
        for name in ("t_meas", "internal_rate", "detector_rate", "tau_out", "tau_in",
                     "T1_meas", "t_integration"):
            v = getattr(self, name)
            if not (v > 0 and math.isfinite(v)):
                out.append(f"{name} must be positive and finite")
        if not self.t_meas > self.tau_in:
            out.append("t_meas must exceed tau_in")
        if not self.internal_rate >= self.detector_rate:
            out.append("internal_rate must be >= detector_rate")
        if not 0 <= self.p_thermal_window < 1:
            out.append("p_thermal_window must lie in [0, 1)")
        if not self.snr_sigma_ratio > 0:
            out.append("snr_sigma_ratio must be positive")
        if self.level_blip == self.level_base:
            out.append("level_blip must differ from level_base")
        if not 0 <= int(self.seed) < 2**64:
            out.append("seed must fit in 64 bits")
        if not out:
            f = self.internal_rate / self.detector_rate
            if abs(f - round(f)) > 1e-9:
                out.append("internal_rate must be an integer multiple of detector_rate")
            w = self.t_integration * self.internal_rate
            if abs(w - round(w)) > 1e-9:
                out.append("t_integration must span a whole number of internal samples")
        return out

    @property
    def decimation(self) -> int:
        return int(round(self.internal_rate / self.detector_rate))

    @property
    def boxcar(self) -> int:
        return int(round(self.t_integration * self.internal_rate))

    @property
    def n_samples(self) -> int:
        """Detector samples per trace."""
        return int(math.floor(self.t_meas * self.detector_rate + 1e-9))

    @property
    def dt(self) -> float:
        return 1.0 / self.detector_rate

    @property
    def sigma_eff(self) -> float:
        """Noise std of a filtered detector sample."""
        return abs(self.level_blip - self.level_base) / self.snr_sigma_ratio

    @property
    def sigma_sample(self) -> float:
        return self.sigma_eff * math.sqrt(self.boxcar)

    @property
    def thermal_rate(self) -> float:
        return -math.log1p(-self.p_thermal_window) / self.t_meas

    def replace(self, **kw) -> "TraceConfig":
        d = asdict(self)
        d.update(kw)
        return TraceConfig(**d)


@dataclass(frozen=True)
class EventRecord:
    blips: tuple  # ((start, end), ...) in us, end clipped to t_meas
    tunnel_out: float  # first blip start, NaN if none
    tunnel_in: float  # first blip end if before t_meas, else NaN

    @property
    def had_blip(self) -> bool:
        return bool(self.blips)


@dataclass(frozen=True)
class Trace:
    label: int
    samples: np.ndarray
    events: tuple  # ((tunnel_out, tunnel_in), ...), NaN where absent
    had_blip: bool
    dt: float = 1.0

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) * self.dt

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("t_us,value\n")
            for t, v in zip(self.times, self.samples):
                fh.write(f"{t:.12g},{float(v):.12g}\n")


@dataclass(frozen=True)
class Detection:
    bit: int
    first_cross_time: float  # NaN when bit == 0
    recross_time: float  # NaN when absent


# -- generation ----------------------------------------------------------------

def generate_events(label: int, config: TraceConfig, rng: np.random.Generator) -> EventRecord:
    """Tunnelling events for one shot.

    State 1: the electron tunnels out after Exp(tau_out) unless it relaxes
    first (Exp(T1_meas)); it returns after Exp(tau_in). State 0: thermal
    blips arrive as a Poisson process whose window probability is
    ``p_thermal_window``.
    """
    c = config
    blips = []
    if label == 1:
        t_tun = rng.exponential(c.tau_out)
        t_relax = rng.exponential(c.T1_meas)
        d = rng.exponential(c.tau_in)
        if t_tun < min(t_relax, c.t_meas):
            blips.append((t_tun, t_tun + d))
    elif label == 0:
        rate = c.thermal_rate
        t = 0.0
        while rate > 0:
            t += rng.exponential(1.0 / rate)
            if t >= c.t_meas:
                break
            d = rng.exponential(c.tau_in)
            blips.append((t, t + d))
            t += d
    else:
        raise ValueError("label must be 0 or 1")
    clipped = tuple((s, min(e, c.t_meas)) for s, e in blips)
    if not clipped:
        return EventRecord((), math.nan, math.nan)
    s, e = blips[0]
    return EventRecord(clipped, s, e if e < c.t_meas else math.nan)


def _ideal_signal(events: EventRecord, config: TraceConfig, t: np.ndarray) -> np.ndarray:
    x = np.full(t.shape, config.level_base, dtype=float)
    for s, e in events.blips:
        x[(t >= s) & (t < e)] = config.level_blip
    return x


def synthesize_trace(events: EventRecord, config: TraceConfig, rng: np.random.Generator,
                     label: int = -1) -> Trace:
    c = config
    n_int = c.n_samples * c.decimation
    w = c.boxcar
    # internal samples, including w-1 samples before t=0 so every output
    # sample sees a full window
    t = (np.arange(n_int + w - 1) - (w - 1)) / c.internal_rate
    x = _ideal_signal(events, c, t)
    if c.sigma_sample > 0:
        x = x + c.sigma_sample * rng.standard_normal(x.size)
    cs = np.concatenate([[0.0], np.cumsum(x)])
    filt = (cs[w:] - cs[:-w]) / w  # filt[k] averages x ending at internal index k
    samples = filt[:: c.decimation][: c.n_samples]
    ev = tuple((s, e if e < c.t_meas else math.nan) for s, e in events.blips)
    if ev:
        ev = ((events.tunnel_out, events.tunnel_in),) + ev[1:]
    return Trace(label, samples, ev, events.had_blip, c.dt)


def detect(trace: Trace, threshold: float, recross_threshold: float | None = None) -> Detection:
    """FPGA-style threshold detection.

    ``recross_threshold`` (default: ``threshold``) sets the level the signal
    must climb back over to register the tunnel-in edge; placing it nearer
    the base level adds hysteresis against noise-induced recrossings.
    """
    if not math.isfinite(threshold):
        raise ValueError("threshold must be finite")
    y = np.asarray(trace.samples)
    below = np.flatnonzero(y < threshold)
    if below.size == 0:
        return Detection(0, math.nan, math.nan)
    k = int(below[0])
    up = threshold if recross_threshold is None else recross_threshold
    later = np.flatnonzero(y[k + 1:] >= up)
    rec = (k + 1 + int(later[0])) * trace.dt if later.size else math.nan
    return Detection(1, k * trace.dt, rec)


# -- batches -------------------------------------------------------------------

@dataclass(frozen=True)
class TraceBatch:
    config: TraceConfig
    labels: np.ndarray  # uint8
    samples: np.ndarray  # (n_traces, n_samples)
    had_blip: np.ndarray  # bool
    tunnel_out: np.ndarray  # first-blip times, NaN where absent
    tunnel_in: np.ndarray
    p1_true: float = math.nan

    def __len__(self) -> int:
        return int(self.labels.size)

    @property
    def dt(self) -> float:
        return float(self.config.dt)

    def trace(self, i: int) -> Trace:
        ev = ((float(self.tunnel_out[i]), float(self.tunnel_in[i])),) if self.had_blip[i] else ()
        return Trace(int(self.labels[i]), self.samples[i], ev, bool(self.had_blip[i]), self.dt)

    def minima(self) -> np.ndarray:
        return self.samples.min(axis=1)

    def detections(self, threshold: float, recross_threshold: float | None = None):
        """Vectorised ``detect`` over the batch: (bits, first_cross, recross)."""
        y = self.samples
        below = y < threshold
        bits = below.any(axis=1)
        k = np.where(bits, below.argmax(axis=1), -1)
        up = threshold if recross_threshold is None else recross_threshold
        idx = np.arange(y.shape[1])
        above_after = (y >= up) & (idx[None, :] > k[:, None]) & bits[:, None]
        has_rec = above_after.any(axis=1)
        rec = np.where(has_rec, above_after.argmax(axis=1), -1)
        first = np.where(bits, k * self.dt, np.nan)
        recross = np.where(has_rec, rec * self.dt, np.nan)
        return bits.astype(np.uint8), first, recross

    # -- binary frame ---------------------------------------------------------
    def to_bytes(self) -> bytes:
        n, m = self.samples.shape
        head = HQTR_MAGIC + struct.pack("<IIId", HQTR_VERSION, n, m, self.dt)
        rec = np.dtype([("label", "u1"), ("blip", "u1"), ("t_out", "<f8"), ("t_in", "<f8"),
                        ("samples", "<f4", (m,))])
        arr = np.empty(n, dtype=rec)
        arr["label"] = self.labels
        arr["blip"] = self.had_blip
        arr["t_out"] = self.tunnel_out
        arr["t_in"] = self.tunnel_in
        arr["samples"] = self.samples
        return head + arr.tobytes()

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())


def read_frame(data: bytes) -> dict:
    """Parse an HQTR frame into arrays (samples come back as float32)."""
    if data[:4] != HQTR_MAGIC:
        raise ValueError("not an HQTR frame")
    version, n, m, dt = struct.unpack_from("<IIId", data, 4)
    if version != HQTR_VERSION:
        raise ValueError(f"unsupported HQTR version {version}")
    rec = np.dtype([("label", "u1"), ("blip", "u1"), ("t_out", "<f8"), ("t_in", "<f8"),
                    ("samples", "<f4", (m,))])
    arr = np.frombuffer(data, dtype=rec, count=n, offset=4 + struct.calcsize("<IIId"))
    return dict(dt=dt, labels=arr["label"].copy(), had_blip=arr["blip"].astype(bool),
                tunnel_out=arr["t_out"].copy(), tunnel_in=arr["t_in"].copy(),
                samples=arr["samples"].copy())


def _trace_rng(seed: int, i: int) -> np.random.Generator:
    return np.random.default_rng([int(seed), 1, i])


def batch(config: TraceConfig, n_traces: int, p1_true: float, *, chunk: int = 500) -> TraceBatch:
    if n_traces < 1:
        raise ValueError("n_traces must be >= 1")
    if not 0 <= p1_true <= 1:
        raise ValueError("p1_true must lie in [0, 1]")
    labels = (np.random.default_rng([int(config.seed), 0]).random(n_traces) < p1_true).astype(np.uint8)

    def work(lo):
        hi = min(lo + chunk, n_traces)
        out = []
        for i in range(lo, hi):
            rng = _trace_rng(config.seed, i)
            ev = generate_events(int(labels[i]), config, rng)
            tr = synthesize_trace(ev, config, rng, int(labels[i]))
            out.append((tr.samples, ev.had_blip, ev.tunnel_out, ev.tunnel_in))
        return out

    parts = ordered_map(work, range(0, n_traces, chunk))
    rows = [r for part in parts for r in part]
    return TraceBatch(
        config, labels,
        np.stack([r[0] for r in rows]),
        np.array([r[1] for r in rows], dtype=bool),
        np.array([r[2] for r in rows], dtype=float),
        np.array([r[3] for r in rows], dtype=float),
        float(p1_true),
    )


# -- tunnelling-time fits ------------------------------------------------------

@dataclass(frozen=True)
class ExpFit:
    tau: float
    stderr: float
    n_events: int
    n_censored: int
    counts: np.ndarray
    edges: np.ndarray


@dataclass(frozen=True)
class TunnelTimes:
    tau_out: ExpFit
    tau_in: ExpFit


def geometric_tail_fit(k, dt: float, k_min: int, k_max: int | None = None,
                       censored=()) -> tuple[float, int, int]:
    """MLE of tau for integer sample counts with an exponential tail.

    Counts below ``k_min`` are discarded (memorylessness makes the tail
    independent of the filter response). ``k_max`` truncates the support for
    uncensored data; ``censored`` holds counts known only to exceed their
    value. Returns (tau, n_used, n_censored).
    """
    k = np.asarray(k, dtype=float)
    k = k[k >= k_min] - k_min
    cens = np.asarray(censored, dtype=float)
    cens = cens[cens + 1 >= k_min] + 1 - k_min
    n = k.size
    if n == 0:
        raise StatisticsError("no events in the fit window")
    s = float(k.sum() + cens.sum())
    if k_max is None or cens.size:
        q = s / (s + n)
    else:
        m = k_max - k_min
        mean = s / n

        def score(q):
            # derivative of the truncated geometric log-likelihood
            qm = q ** (m + 1)
            return mean / q - (1 / (1 - q) - (m + 1) * q**m / (1 - qm))

        q0 = mean / (mean + 1)
        try:
            q = brentq(score, 1e-12, 1 - 1e-12) if m > 0 else q0
        except ValueError:
            q = q0
    if q <= 0:
        return 0.0, n, int(cens.size)
    return float(-dt / math.log(q)), n, int(cens.size)


def tunnel_time_histograms(b: TraceBatch, threshold: float | None = None,
                           recross_threshold: float | None = None, *, k_min_out: int = 3,
                           k_min_in: int = 3, out_labels=(1,)) -> TunnelTimes:
    """Exponential fits to tunnel-out and tunnel-in times.

    Tunnel-out uses first-crossing times of traces with a label in
    ``out_labels``, fitted in two passes (the second truncated at
    ``k_min_out + 15 tau``); tunnel-in uses recross minus first-crossing over every
    detected blip, treating blips still open at the window end as censored.
    Thresholds default to 75 % and 25 % of the way from base to blip level.
    Standard errors are tau / sqrt(N).
    """
    c = b.config
    span = c.level_blip - c.level_base
    if threshold is None:
        threshold = c.level_base + 0.75 * span
    if recross_threshold is None:
        recross_threshold = c.level_base + 0.25 * span
    bits, first, rec = b.detections(threshold, recross_threshold)
    dt = b.dt
    k_last = c.n_samples - 1

    sel = bits.astype(bool) & np.isin(b.labels, out_labels)
    k_out = np.rint(first[sel] / dt)
    if np.count_nonzero(k_out >= k_min_out) < 100:
        raise StatisticsError(f"only {np.count_nonzero(k_out >= k_min_out)} tunnel-out events "
                              "in the fit window (need 100)")
    tau_o, _, _ = geometric_tail_fit(k_out, dt, k_min_out, k_last)
    # refit inside k_min + 15 tau so late false crossings (noise, thermal
    # blips) cannot drag the tail
    k_hi = min(k_last, k_min_out + int(math.ceil(15 * tau_o / dt)))
    tau_o, n_o, _ = geometric_tail_fit(k_out[k_out <= k_hi], dt, k_min_out, k_hi)

    det = bits.astype(bool)
    closed = det & np.isfinite(rec)
    k_in = np.rint((rec[closed] - first[closed]) / dt)
    k_open = np.rint(k_last - first[det & ~np.isfinite(rec)] / dt)
    if np.count_nonzero(k_in >= k_min_in) < 100:
        raise StatisticsError(f"only {np.count_nonzero(k_in >= k_min_in)} tunnel-in events "
                              "in the fit window (need 100)")
    tau_i, n_i, n_c = geometric_tail_fit(k_in, dt, k_min_in, censored=k_open)

    edges = np.arange(0, c.t_meas + dt, dt)
    h_out = np.histogram(first[sel], bins=edges)[0]
    h_in = np.histogram(rec[closed] - first[closed], bins=edges)[0]
    return TunnelTimes(
        ExpFit(tau_o, tau_o / math.sqrt(n_o), n_o, 0, h_out, edges),
        ExpFit(tau_i, tau_i / math.sqrt(n_i), n_i, n_c, h_in, edges),
    )


# -- fidelity ------------------------------------------------------------------

@dataclass(frozen=True)
class FidelityReport:
    bin_edges: np.ndarray
    histogram_0: np.ndarray
    histogram_1: np.ndarray
    thresholds: np.ndarray
    F0: np.ndarray
    F1: np.ndarray
    visibility: np.ndarray
    V_opt: float
    F0_opt: float
    F1_opt: float
    visibility_opt: float
    n0: int
    n1: int
    extra: dict = field(default_factory=dict)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(FIDELITY_HEADER + "\n")
            for row in zip(self.thresholds, self.F0, self.F1, self.visibility):
                fh.write(",".join(f"{float(v):.12g}" for v in row) + "\n")

    def summary(self) -> dict:
        d = dict(V_opt=self.V_opt, F0_opt=self.F0_opt, F1_opt=self.F1_opt,
                 visibility_opt=self.visibility_opt, n0=self.n0, n1=self.n1)
        d.update(self.extra)
        return d

    def to_json(self, path) -> None:
        write_json(path, self.summary())



def default_threshold_grid(config: TraceConfig, minima=None) -> np.ndarray:
    step = config.sigma_eff / 20
    lo = min(config.level_blip, config.level_base) - 6 * config.sigma_eff
    hi = max(config.level_blip, config.level_base) + 2 * config.sigma_eff
    if minima is not None and minima.size:
        lo = min(lo, float(minima.min()) - step)
        hi = max(hi, float(minima.max()) + step)
    n = int(math.ceil((hi - lo) / step)) + 1
    return lo + step * np.arange(n)


def fidelity_report(b: TraceBatch, threshold_grid=None) -> FidelityReport:
    """F0, F1 and visibility of the min-value statistic versus threshold.

    A trace reads 1 when its minimum lies strictly below the threshold, so
    F0(V) = P(min >= V | 0) and F1(V) = P(min < V | 1).
    """
    m = b.minima()
    m0 = np.sort(m[b.labels == 0])
    m1 = np.sort(m[b.labels == 1])
    if m0.size == 0 or m1.size == 0:
        raise AnalysisError("fidelity analysis needs traces of both labels")
    c = b.config
    grid = default_threshold_grid(c, m) if threshold_grid is None else np.asarray(threshold_grid, float)
    f0 = 1.0 - np.searchsorted(m0, grid, side="left") / m0.size
    f1 = np.searchsorted(m1, grid, side="left") / m1.size
    vis = f0 + f1 - 1.0
    k = int(np.argmax(vis))  # first maximum = smallest threshold on ties
    bw = c.sigma_eff / 5
    edges = np.arange(math.floor(m.min() / bw) * bw, m.max() + 2 * bw, bw)
    return FidelityReport(
        edges, np.histogram(m0, edges)[0], np.histogram(m1, edges)[0],
        grid, f0, f1, vis, float(grid[k]), float(f0[k]), float(f1[k]), float(vis[k]),
        int(m0.size), int(m1.size),
    )


@dataclass(frozen=True)
class P1Estimate:
    raw: float
    corrected: float | None
    n: int


def estimate_p1(data, V_opt: float | None = None, F0: float | None = None,
                F1: float | None = None) -> P1Estimate:
    """Fraction of 1 outcomes, optionally corrected for readout errors.

    ``data`` is a TraceBatch (thresholded at ``V_opt``) or an array of bits.
    """
    if isinstance(data, TraceBatch):
        if V_opt is None:
            raise ValueError("V_opt is required to threshold a batch")
        bits = data.minima() < V_opt
    else:
        bits = np.asarray(data).astype(bool).ravel()
    if bits.size == 0:
        raise ValueError("no outcomes to estimate from")
    raw = float(bits.mean())
    corr = None
    if F0 is not None and F1 is not None:
        vis = F0 + F1 - 1
        if vis <= 0:
            raise ValueError("fidelity correction needs F0 + F1 > 1")
        corr = float(np.clip((raw - (1 - F0)) / vis, 0.0, 1.0))
    return P1Estimate(raw, corr, int(bits.size))
