"""Strict JSON run configuration.

A config is one JSON object with a top-level ``seed`` and one section per
workflow. Every key has a default, so ``{}`` is a valid config; unknown
keys are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

from .pulse_dynamics.pulses import DEFAULT_EDGE_SIGMA

# kinds: float, int, bool, str, floats (list of numbers), pairs (list of [a, b])


@dataclass(frozen=True)
class Key:
    kind: str
    default: Any
    unit: str
    help: str
    nullable: bool = False
    length: int | None = None


def _lin(a, b, n):
    return [a + (b - a) * i / (n - 1) for i in range(n)]


SCHEMA: dict[str, dict[str, Key]] = {
    "model": {
        "delta_L_ghz": Key("float", 3.0, "h*GHz", "left-dot singlet-triplet offset"),
        "delta_R_ghz": Key("float", 95.8, "h*GHz", "right-dot singlet-triplet offset"),
        "t_ghz": Key("floats", [1.8, 7.1, 11.5, 6.3], "h*GHz", "tunnel couplings t1..t4",
                     length=4),
        "lever_arm": Key("float", 0.028, "eV/V", "gate lever arm"),
    },
    "noise": {
        "sigma_eps_hghz": Key("float", 0.0, "h*GHz", "quasistatic detuning noise std (0 = off)"),
        "n_realizations": Key("int", 1, "-", "noise realisations averaged when sigma > 0"),
        "t1_table": Key("pairs", None, "[h*GHz, ns]", "T1 versus detuning; null = no relaxation",
                        nullable=True),
        "t1_extrapolate": Key("bool", False, "-", "hold T1 outside the table instead of failing"),
    },
    "spectrum": {
        "eps_min_hghz": Key("float", -300.0, "h*GHz", "start of the detuning sweep"),
        "eps_max_hghz": Key("float", 300.0, "h*GHz", "end of the detuning sweep"),
        "n_points": Key("int", 601, "-", "sweep points"),
        "target_frequency_ghz": Key("float", None, "GHz",
                                    "also solve for the detuning with this qubit frequency",
                                    nullable=True),
    },
    "rabi": {
        "eps_hghz": Key("float", None, "h*GHz", "operating detuning (null = sweet spot)",
                        nullable=True),
        "f_mw_ghz": Key("float", None, "GHz", "drive frequency (null = resonant)", nullable=True),
        "f_rabi_ghz": Key("floats", [0.02, 0.04, 0.06, 0.08, 0.1], "GHz",
                          "target Rabi frequencies; converted to drive amplitudes"),
        "tau_max_ns": Key("float", 40.0, "ns", "longest burst"),
        "n_tau": Key("int", 161, "-", "burst durations from 0 to tau_max_ns"),
        "edge_sigma_ns": Key("float", DEFAULT_EDGE_SIGMA, "ns", "Gaussian edge width"),
        "steps_per_period": Key("float", 40.0, "-", "integrator steps per fastest period"),
    },
    "ramsey": {
        "eps_p_min_hghz": Key("float", -150.0, "h*GHz", "lowest detuning-pulse amplitude"),
        "eps_p_max_hghz": Key("float", -60.0, "h*GHz", "highest detuning-pulse amplitude"),
        "n_eps_p": Key("int", 10, "-", "detuning-pulse values"),
        "te_max_ns": Key("float", 20.0, "ns", "longest evolution time"),
        "n_te": Key("int", 201, "-", "evolution times from 0 to te_max_ns"),
        "ramp_time_ns": Key("float", 1.0, "ns", "ramp between operating point and eps_p"),
        "f_rabi_ghz": Key("float", 0.1, "GHz", "Rabi frequency of the pi/2 bursts"),
        "edge_sigma_ns": Key("float", DEFAULT_EDGE_SIGMA, "ns", "Gaussian edge width"),
        "steps_per_period": Key("float", 40.0, "-", "integrator steps per fastest period"),
    },
    "tomo": {
        "n_phi": Key("int", 73, "-", "phases of the second burst over [0, 2pi]"),
        "f_rabi_ghz": Key("float", 0.1, "GHz", "Rabi frequency of both bursts"),
        "gap_ns": Key("float", 0.0, "ns", "idle time between the bursts"),
        "edge_sigma_ns": Key("float", DEFAULT_EDGE_SIGMA, "ns", "Gaussian edge width"),
        "steps_per_period": Key("float", 40.0, "-", "integrator steps per fastest period"),
    },
    "readout": {
        "t_meas_us": Key("float", 140.0, "us", "measurement window"),
        "internal_rate_mhz": Key("float", 10.0, "MHz", "internal simulation rate"),
        "detector_rate_mhz": Key("float", 1.0, "MHz", "detector sample rate"),
        "tau_out_us": Key("float", 2.04, "us", "mean tunnel-out time of the excited state"),
        "tau_in_us": Key("float", 32.0, "us", "mean tunnel-in time"),
        "T1_meas_us": Key("float", 102.0, "us", "relaxation time at the measurement point"),
        "p_thermal_window": Key("float", 0.04, "-", "probability of a thermal blip per window"),
        "level_base": Key("float", 0.0, "a.u.", "sensor level with the dot loaded"),
        "level_blip": Key("float", -1.0, "a.u.", "sensor level during a blip"),
        "t_integration_us": Key("float", 1.0, "us", "boxcar integration time"),
        "snr_sigma_ratio": Key("float", 5.0, "-", "level separation over filtered noise std"),
        "n_traces": Key("int", 8000, "-", "traces per batch"),
        "p1_true": Key("float", 0.5, "-", "probability that a trace is prepared in state 1"),
        "n_dump_traces": Key("int", 5, "-", "traces written individually as CSV"),
    },
    "fci": {
        "potential": Key("str", "gaussian", "-", "gaussian | harmonic | csv"),
        "potential_csv": Key("str", None, "path", "grid file for potential = csv", nullable=True),
        "hw_x_mev": Key("float", 0.2, "meV", "confinement energy along x"),
        "hw_y_mev": Key("float", 1.0, "meV", "confinement energy along y"),
        "depth_mev": Key("float", 10.0, "meV", "Gaussian well depth"),
        "half_width_x_nm": Key("float", 250.0, "nm", "box half-width along x"),
        "half_width_y_nm": Key("float", 100.0, "nm", "box half-width along y"),
        "nx": Key("int", 64, "-", "grid points along x"),
        "ny": Key("int", 64, "-", "grid points along y"),
        "n_spatial": Key("int", 20, "-", "single-particle orbitals"),
        "regularization_nm": Key("float", None, "nm", "Coulomb softening (null = min spacing/2)",
                                 nullable=True),
        "lambda_grid": Key("floats", _lin(0.0, 1.0, 11), "-", "interaction scales in [0, 1]"),
        "m_star": Key("float", 0.067, "m_e", "effective mass"),
        "kappa": Key("float", 12.9, "-", "relative permittivity"),
        "memory_cap_bytes": Key("int", 2 * 1024**3, "bytes", "limit for the two-electron tensor"),
    },
}
TOP_LEVEL = {"seed": Key("int", 0, "-", "64-bit seed for every random draw")}


class ConfigError(ValueError):
    def __init__(self, problems: list[str]):
        super().__init__("; ".join(problems))
        self.problems = problems


def _check(path: str, key: Key, v) -> tuple[Any, list[str]]:
    if v is None:
        return (None, []) if key.nullable else (None, [f"{path}: must not be null"])
    k = key.kind
    num = isinstance(v, (int, float)) and not isinstance(v, bool)
    if k == "float":
        if not num or not math.isfinite(v):
            return None, [f"{path}: expected a finite number"]
        return float(v), []
    if k == "int":
        if not isinstance(v, int) or isinstance(v, bool):
            return None, [f"{path}: expected an integer"]
        return v, []
    if k == "bool":
        return (v, []) if isinstance(v, bool) else (None, [f"{path}: expected true or false"])
    if k == "str":
        return (v, []) if isinstance(v, str) else (None, [f"{path}: expected a string"])
    if k == "floats":
        if not isinstance(v, list) or not all(
                isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)
                for x in v):
            return None, [f"{path}: expected a list of finite numbers"]
        if key.length is not None and len(v) != key.length:
            return None, [f"{path}: expected exactly {key.length} values"]
        if not v:
            return None, [f"{path}: must not be empty"]
        return [float(x) for x in v], []
    if k == "pairs":
        out, errs = [], []
        if not isinstance(v, list) or not v:
            return None, [f"{path}: expected a non-empty list of [eps, T1] pairs"]
        for i, p in enumerate(v):
            if (not isinstance(p, list) or len(p) != 2
                    or not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in p)):
                errs.append(f"{path}[{i}]: expected [eps_hghz, T1_ns]")
                continue
            out.append([float(p[0]), float(p[1])])
        return out, errs
    raise AssertionError(k)


def resolve(raw: dict) -> tuple[dict, list[str]]:
    """Fill defaults and type-check; returns (config, schema problems)."""
    problems = []
    if not isinstance(raw, dict):
        return {}, ["config must be a JSON object"]
    cfg = {}
    for name in raw:
        if name not in SCHEMA and name not in TOP_LEVEL:
            problems.append(f"unknown key '{name}'")
    for name, key in TOP_LEVEL.items():
        val, errs = _check(name, key, raw.get(name, key.default))
        cfg[name] = val
        problems += errs
    for section, keys in SCHEMA.items():
        given = raw.get(section, {})
        if not isinstance(given, dict):
            problems.append(f"{section}: expected an object")
            given = {}
        for name in given:
            if name not in keys:
                problems.append(f"unknown key '{section}.{name}'")
        out = {}
        for name, key in keys.items():
            val, errs = _check(f"{section}.{name}", key, given.get(name, key.default))
            out[name] = val
            problems += errs
        cfg[section] = out
    return cfg, problems


def physical_diagnostics(cfg: dict) -> list[str]:
    """Range checks that need a well-typed config."""
    from .fci.grid import Material
    from .hq_model import ModelParams

    out = []
    seed = cfg["seed"]
    if not 0 <= seed < 2**64:
        out.append("seed: must lie in [0, 2^64)")
    m = cfg["model"]
    try:
        ModelParams.from_dict(m)
    except ValueError as exc:
        out.append(f"model: {exc}")
    n = cfg["noise"]
    if n["sigma_eps_hghz"] < 0:
        out.append("noise.sigma_eps_hghz: must be >= 0")
    if n["n_realizations"] < 1:
        out.append("noise.n_realizations: must be >= 1")
    if n["t1_table"] is not None:
        eps = [p[0] for p in n["t1_table"]]
        for i, (_, t1) in enumerate(n["t1_table"]):
            if not (t1 > 0 and math.isfinite(t1)):
                out.append(f"noise.t1_table[{i}]: T1 must be positive and finite")
        if any(b <= a for a, b in zip(eps, eps[1:])):
            out.append("noise.t1_table: detunings must be strictly increasing")
    s = cfg["spectrum"]
    if not s["eps_max_hghz"] > s["eps_min_hghz"]:
        out.append("spectrum: eps_max_hghz must exceed eps_min_hghz")
    if s["n_points"] < 2:
        out.append("spectrum.n_points: must be >= 2")
    for sec in ("rabi", "ramsey", "tomo"):
        c = cfg[sec]
        if c["edge_sigma_ns"] <= 0:
            out.append(f"{sec}.edge_sigma_ns: must be positive")
        if c["steps_per_period"] < 4:
            out.append(f"{sec}.steps_per_period: must be >= 4")
    r = cfg["rabi"]
    if any(f <= 0 for f in r["f_rabi_ghz"]):
        out.append("rabi.f_rabi_ghz: values must be positive")
    if r["tau_max_ns"] <= 0 or r["n_tau"] < 4:
        out.append("rabi: need tau_max_ns > 0 and n_tau >= 4")
    rm = cfg["ramsey"]
    if rm["n_eps_p"] < 1 or rm["n_te"] < 4 or rm["te_max_ns"] <= 0:
        out.append("ramsey: need n_eps_p >= 1, n_te >= 4 and te_max_ns > 0")
    if rm["eps_p_max_hghz"] < rm["eps_p_min_hghz"]:
        out.append("ramsey: eps_p_max_hghz must be >= eps_p_min_hghz")
    if rm["ramp_time_ns"] < 0 or rm["f_rabi_ghz"] <= 0:
        out.append("ramsey: ramp_time_ns must be >= 0 and f_rabi_ghz > 0")
    t = cfg["tomo"]
    if t["n_phi"] < 4 or t["f_rabi_ghz"] <= 0 or t["gap_ns"] < 0:
        out.append("tomo: need n_phi >= 4, f_rabi_ghz > 0 and gap_ns >= 0")
    ro = cfg["readout"]
    try:
        trace_config(cfg, seed=0)
    except ValueError as exc:
        out += [f"readout: {d}" for d in str(exc).split("; ")]
    if ro["n_traces"] < 1:
        out.append("readout.n_traces: must be >= 1")
    if not 0 <= ro["p1_true"] <= 1:
        out.append("readout.p1_true: must lie in [0, 1]")
    if ro["n_dump_traces"] < 0:
        out.append("readout.n_dump_traces: must be >= 0")
    f = cfg["fci"]
    if f["potential"] not in ("gaussian", "harmonic", "csv"):
        out.append("fci.potential: must be gaussian, harmonic or csv")
    if f["potential"] == "csv" and not f["potential_csv"]:
        out.append("fci.potential_csv: required when potential = csv")
    for k in ("hw_x_mev", "hw_y_mev", "depth_mev", "half_width_x_nm", "half_width_y_nm"):
        if f[k] <= 0:
            out.append(f"fci.{k}: must be positive")
    if f["nx"] < 8 or f["ny"] < 8:
        out.append("fci: nx and ny must be >= 8")
    if not 2 <= f["n_spatial"] <= f["nx"] * f["ny"]:
        out.append("fci.n_spatial: must lie in [2, nx*ny]")
    if f["regularization_nm"] is not None and f["regularization_nm"] <= 0:
        out.append("fci.regularization_nm: must be positive")
    if any(not 0 <= x <= 1 for x in f["lambda_grid"]):
        out.append("fci.lambda_grid: values must lie in [0, 1]")
    try:
        Material(f["m_star"], f["kappa"])
    except ValueError as exc:
        out.append(f"fci: {exc}")
    return out


def trace_config(cfg: dict, seed: int | None = None):
    from .readout_sim import TraceConfig

    ro = cfg["readout"]
    return TraceConfig(
        t_meas=ro["t_meas_us"], internal_rate=ro["internal_rate_mhz"],
        detector_rate=ro["detector_rate_mhz"], tau_out=ro["tau_out_us"], tau_in=ro["tau_in_us"],
        T1_meas=ro["T1_meas_us"], p_thermal_window=ro["p_thermal_window"],
        level_base=ro["level_base"], level_blip=ro["level_blip"],
        t_integration=ro["t_integration_us"], snr_sigma_ratio=ro["snr_sigma_ratio"],
        seed=cfg["seed"] if seed is None else seed)


def read_json(path) -> Any:
    """Parse a config file; OSError propagates, bad JSON becomes ConfigError."""
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise ConfigError([f"invalid JSON: {exc}"]) from None


def validate(path) -> list[str]:
    cfg, problems = resolve(read_json(path))
    if problems:
        return problems
    return physical_diagnostics(cfg)


def load(path) -> dict:
    problems = validate(path)
    if problems:
        raise ConfigError(problems)
    return resolve(read_json(path))[0]


def describe() -> str:
    """Every config key with unit and default, for --help."""
    lines = ["config keys (section.key [unit] default: meaning):"]
    for name, k in TOP_LEVEL.items():
        lines.append(f"  {name} [{k.unit}] {json.dumps(k.default)}: {k.help}")
    for section, keys in SCHEMA.items():
        for name, k in keys.items():
            d = k.default
            if isinstance(d, float):
                d = float(f"{d:.6g}")
            elif isinstance(d, list) and len(d) > 6:
                d = f"[{len(d)} values]"
            lines.append(f"  {section}.{name} [{k.unit}] {json.dumps(d)}: {k.help}")
    return "\n".join(lines)
