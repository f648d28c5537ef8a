"""Command-line front end for the hqsim workflows.

Each workflow command reads one JSON config (see ``hqsim --help`` for every
key), writes CSV and JSON artifacts into ``--out`` and, with ``--svg``, a
quick-look plot. CSV/JSON outputs depend only on the config bytes and the
seed. Failures print ``{"error_code", "message", "context"}`` to stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import config as cfgmod
from . import svg
from ._io import round_floats, write_json
from ._parallel import n_workers

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("spectrum", "rabi", "ramsey", "tomo", "traces", "fidelity", "fci")


class CliError(Exception):
    def __init__(self, status: int, code: str, message: str, context: dict | None = None):
        super().__init__(message)
        self.status, self.code, self.context = status, code, context or {}


# -- shared builders -----------------------------------------------------------

def _params(cfg):
    from .hq_model import ModelParams
    return ModelParams.from_dict(cfg["model"])


def _noise(cfg):
    from .pulse_dynamics import NoiseModel
    n = cfg["noise"]
    table = None if n["t1_table"] is None else tuple(map(tuple, n["t1_table"]))
    return NoiseModel(n["sigma_eps_hghz"], table, n["n_realizations"], cfg["seed"],
                      n["t1_extrapolate"])


def _csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(f"{float(v):.12g}" for v in row) + "\n")


# -- commands -----------------------------------------------------------------

def cmd_spectrum(cfg, out: Path, emit_svg: bool) -> list[str]:
    from .hq_model import dispersion_scan, find_detuning_for_frequency, sweet_spot
    p = _params(cfg)
    s = cfg["spectrum"]
    eps = np.linspace(s["eps_min_hghz"], s["eps_max_hghz"], s["n_points"])
    d = dispersion_scan(eps, p)
    d.to_csv(out / "dispersion.csv")
    ss = sweet_spot(p)
    summary = {"sweet_spot_hghz": ss, "f_sweet_spot_ghz": float(d.f_qubit[np.argmin(abs(eps - ss))]),
               "f_min_ghz": float(d.f_qubit.min()), "f_max_ghz": float(d.f_qubit.max()),
               "params": p.to_dict()}
    target = s["target_frequency_ghz"]
    if target is not None:
        summary["target_frequency_ghz"] = target
        summary["target_eps_hghz"] = find_detuning_for_frequency(
            target, (s["eps_min_hghz"], s["eps_max_hghz"]), p)
    write_json(out / "spectrum.json", summary)
    files = ["dispersion.csv", "spectrum.json"]
    if emit_svg:
        svg.line_plot(out / "spectrum.svg",
                      [(f"E{k}", eps, d.energies[:, k]) for k in range(4)],
                      title="energy levels", xlabel="detuning (h*GHz)", ylabel="energy (h*GHz)")
        files.append("spectrum.svg")
    return files


def cmd_rabi(cfg, out, emit_svg):
    from .pulse_dynamics import amplitude_for_rabi, operating_point, rabi_scan
    p, r = _params(cfg), cfg["rabi"]
    eps, f_mw = operating_point(p, r["eps_hghz"], r["f_mw_ghz"])
    amps = [amplitude_for_rabi(f, eps, p) for f in r["f_rabi_ghz"]]
    taus = np.linspace(0.0, r["tau_max_ns"], r["n_tau"])
    res = rabi_scan(taus, amps, f_mw, params=p, eps=eps, noise=_noise(cfg),
                    edge_sigma=r["edge_sigma_ns"], steps_per_period=r["steps_per_period"])
    res.scan.to_csv(out / "rabi.csv")
    _csv(out / "rabi_fits.csv", "amp_hghz,f_rabi_ghz,fit_amplitude,flagged",
         zip(amps, res.f_rabi, res.amplitude, res.flagged))
    lin = res.linearity
    write_json(out / "rabi.json", {
        "eps_hghz": eps, "f_mw_ghz": f_mw, "amp_hghz": amps, "f_rabi_ghz": res.f_rabi,
        "linearity": None if lin is None else
        {"slope": lin.slope, "intercept": lin.intercept, "r2": lin.r2, "n_points": lin.n_points},
        "metadata": res.scan.metadata})
    files = ["rabi.csv", "rabi_fits.csv", "rabi.json"]
    if emit_svg:
        svg.heatmap(out / "rabi.svg", taus, amps, res.scan.p1, title="Rabi P1",
                    xlabel="burst duration (ns)", ylabel="amplitude (h*GHz)")
        files.append("rabi.svg")
    return files


def cmd_ramsey(cfg, out, emit_svg):
    from .pulse_dynamics import amplitude_for_rabi, fit_ramsey_envelope, operating_point, ramsey_scan
    p, r = _params(cfg), cfg["ramsey"]
    noise = _noise(cfg)
    eps, f_mw = operating_point(p)
    amp = amplitude_for_rabi(r["f_rabi_ghz"], eps, p)
    eps_p = np.linspace(r["eps_p_min_hghz"], r["eps_p_max_hghz"], r["n_eps_p"])
    te = np.linspace(0.0, r["te_max_ns"], r["n_te"])
    res = ramsey_scan(eps_p, te, params=p, amp=amp, ramp_time=r["ramp_time_ns"], noise=noise,
                      edge_sigma=r["edge_sigma_ns"], steps_per_period=r["steps_per_period"])
    res.scan.to_csv(out / "ramsey.csv")
    _csv(out / "ramsey_fft.csv", "eps_p_hghz,fft_peak_ghz,f_qubit_ghz,bin_width_ghz",
         ((e, f, q, res.bin_width) for e, f, q in zip(eps_p, res.fft_peak, res.f_expected)))
    t2 = None
    if noise.sigma_eps_quasistatic > 0:
        t2 = []
        for row, f in zip(res.scan.p1, res.f_expected):
            try:
                t2.append(fit_ramsey_envelope(te, row, float(f)))
            except (RuntimeError, ValueError):
                t2.append(None)
    within = np.abs(res.fft_peak - res.f_expected) <= res.bin_width
    write_json(out / "ramsey.json", {
        "eps_p_hghz": eps_p, "fft_peak_ghz": res.fft_peak, "f_qubit_ghz": res.f_expected,
        "bin_width_ghz": res.bin_width, "within_one_bin": within.tolist(), "t2_star_ns": t2,
        "metadata": res.scan.metadata})
    files = ["ramsey.csv", "ramsey_fft.csv", "ramsey.json"]
    if emit_svg:
        svg.heatmap(out / "ramsey.svg", eps_p, te, res.scan.p1, title="Ramsey P1",
                    xlabel="eps_p (h*GHz)", ylabel="t_e (ns)")
        files.append("ramsey.svg")
    return files


def cmd_tomo(cfg, out, emit_svg):
    from .pulse_dynamics import amplitude_for_rabi, operating_point, tomography_scan
    p, t = _params(cfg), cfg["tomo"]
    eps, _ = operating_point(p)
    amp = amplitude_for_rabi(t["f_rabi_ghz"], eps, p)
    phis = np.linspace(0.0, 2 * np.pi, t["n_phi"])
    res = tomography_scan(phis, params=p, amp=amp, gap=t["gap_ns"], noise=_noise(cfg),
                          edge_sigma=t["edge_sigma_ns"], steps_per_period=t["steps_per_period"])
    plus, minus = res.scans["+Y"].p1, res.scans["-Y"].p1
    _csv(out / "tomo.csv", "phi_rad,p1_plus_y,p1_minus_y", zip(phis, plus, minus))
    write_json(out / "tomo.json", {
        "fits": {k: {"amplitude": f.amplitude, "phase_rad": f.phase, "offset": f.offset}
                 for k, f in res.fits.items()},
        "phase_difference_rad": res.phase_difference,
        "metadata": res.scans["+Y"].metadata})
    files = ["tomo.csv", "tomo.json"]
    if emit_svg:
        svg.line_plot(out / "tomo.svg", [("+Y", phis, plus), ("-Y", phis, minus)],
                      title="phase tomography", xlabel="phase (rad)", ylabel="P1")
        files.append("tomo.svg")
    return files


def _batch(cfg):
    from .readout_sim import batch
    ro = cfg["readout"]
    return batch(cfgmod.trace_config(cfg), ro["n_traces"], ro["p1_true"])


def _fit_dict(f):
    return {"tau_us": f.tau, "stderr_us": f.stderr, "n_events": f.n_events,
            "n_censored": f.n_censored}


def cmd_traces(cfg, out, emit_svg):
    from .readout_sim import tunnel_time_histograms
    b = _batch(cfg)
    b.save(out / "traces.hqtr")
    files = ["traces.hqtr"]
    n_dump = min(cfg["readout"]["n_dump_traces"], len(b))
    for i in range(n_dump):
        name = f"trace_{i:04d}.csv"
        b.trace(i).to_csv(out / name)
        files.append(name)
    tt = tunnel_time_histograms(b)
    for key, fit in (("tunnel_out", tt.tau_out), ("tunnel_in", tt.tau_in)):
        _csv(out / f"{key}.csv", "bin_start_us,bin_end_us,count",
             zip(fit.edges[:-1], fit.edges[1:], fit.counts))
        files.append(f"{key}.csv")
    write_json(out / "traces.json", {
        "n_traces": len(b), "n_label1": int(b.labels.sum()), "n_blips": int(b.had_blip.sum()),
        "tau_out": _fit_dict(tt.tau_out), "tau_in": _fit_dict(tt.tau_in),
        "config": cfg["readout"], "seed": cfg["seed"]})
    files.append("traces.json")
    if emit_svg and n_dump:
        series = [(f"trace {i} (label {b.labels[i]})", b.trace(i).times, b.samples[i])
                  for i in range(n_dump)]
        svg.line_plot(out / "traces.svg", series, title="detector traces",
                      xlabel="time (us)", ylabel="signal (a.u.)")
        files.append("traces.svg")
    return files


def cmd_fidelity(cfg, out, emit_svg):
    from .readout_sim import estimate_p1, fidelity_report, tunnel_time_histograms
    b = _batch(cfg)
    rep = fidelity_report(b)
    tt = tunnel_time_histograms(b)
    est = estimate_p1(b, rep.V_opt, rep.F0_opt, rep.F1_opt)
    rep.to_csv(out / "fidelity.csv")
    e = rep.bin_edges
    _csv(out / "histogram.csv", "bin_start,bin_end,count_0,count_1",
         zip(e[:-1], e[1:], rep.histogram_0, rep.histogram_1))
    summary = rep.summary()
    summary.update(tau_out=_fit_dict(tt.tau_out), tau_in=_fit_dict(tt.tau_in),
                   p1_raw=est.raw, p1_corrected=est.corrected, p1_true=cfg["readout"]["p1_true"],
                   seed=cfg["seed"])
    write_json(out / "fidelity.json", summary)
    files = ["fidelity.csv", "histogram.csv", "fidelity.json"]
    if emit_svg:
        svg.line_plot(out / "fidelity.svg", [("F0", rep.thresholds, rep.F0),
                                             ("F1", rep.thresholds, rep.F1),
                                             ("visibility", rep.thresholds, rep.visibility)],
                      title="readout fidelity", xlabel="threshold (a.u.)", ylabel="fraction")
        files.append("fidelity.svg")
    return files


def fci_grid(cfg, base: Path = Path(".")):
    from .fci import Material, PotentialGrid, axes_for_box, gaussian_well_for, harmonic_well
    f = cfg["fci"]
    mat = Material(f["m_star"], f["kappa"])
    if f["potential"] == "csv":
        path = Path(f["potential_csv"])
        return PotentialGrid.from_csv(path if path.is_absolute() else base / path, mat)
    hx = axes_for_box(f["nx"], f["half_width_x_nm"])
    hy = axes_for_box(f["ny"], f["half_width_y_nm"])
    if f["potential"] == "harmonic":
        return harmonic_well(f["nx"], f["ny"], hx, hy, f["hw_x_mev"], f["hw_y_mev"], mat)
    return gaussian_well_for(f["hw_x_mev"], f["hw_y_mev"], f["depth_mev"], f["nx"], f["ny"],
                             hx, hy, mat)


def cmd_fci(cfg, out, emit_svg, base=Path(".")):
    from .fci import FciProblem, splitting_vs_lambda, summary
    f = cfg["fci"]
    grid = fci_grid(cfg, base)
    prob = FciProblem.build(grid, f["n_spatial"], f["regularization_nm"],
                            memory_cap=f["memory_cap_bytes"])
    table = splitting_vs_lambda(prob, f["lambda_grid"])
    table.to_csv(out / "splitting.csv")
    write_json(out / "fci.json", summary(prob, table))
    files = ["splitting.csv", "fci.json"]
    if emit_svg:
        svg.line_plot(out / "fci.svg", [("E1 - E0", table.lambdas, table.splittings)],
                      title="splitting vs interaction scale", xlabel="lambda",
                      ylabel="splitting (h*GHz)")
        files.append("fci.svg")
    return files


RUNNERS = {"spectrum": cmd_spectrum, "rabi": cmd_rabi, "ramsey": cmd_ramsey, "tomo": cmd_tomo,
           "traces": cmd_traces, "fidelity": cmd_fidelity, "fci": cmd_fci}


# -- entry points --------------------------------------------------------------

def _load(path):
    try:
        raw = {} if path is None else cfgmod.read_json(path)
    except OSError as exc:
        raise CliError(EXIT_IO, "io_error", f"cannot read config: {exc}",
                       {"config": str(path)}) from None
    except cfgmod.ConfigError as exc:
        raise CliError(EXIT_CONFIG, "config_invalid", str(exc), {"problems": exc.problems}) from None
    cfg, problems = cfgmod.resolve(raw)
    if not problems:
        problems = cfgmod.physical_diagnostics(cfg)
    if problems:
        raise CliError(EXIT_CONFIG, "config_invalid", problems[0],
                       {"config": str(path), "problems": problems})
    return cfg


def run(command: str, config_path=None, output_dir="out", seed=None, emit_svg=False) -> list[str]:
    """Run one workflow; returns the artifact names written into ``output_dir``."""
    cfg = _load(config_path)
    if seed is not None:
        if not 0 <= seed < 2**64:
            raise CliError(EXIT_CONFIG, "config_invalid", "seed must lie in [0, 2^64)",
                           {"seed": seed})
        cfg["seed"] = seed
    try:
        n_workers()
    except ValueError as exc:
        raise CliError(EXIT_CONFIG, "config_invalid", str(exc), {"env": "HQSIM_THREADS"}) from None
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(EXIT_IO, "io_error", f"cannot create output directory: {exc}",
                       {"output_dir": str(out)}) from None
    base = Path(config_path).parent if config_path else Path(".")
    try:
        if command == "fci":
            return cmd_fci(cfg, out, emit_svg, base)
        return RUNNERS[command](cfg, out, emit_svg)
    except OSError as exc:
        raise CliError(EXIT_IO, "io_error", str(exc), {"command": command}) from None
    except (ArithmeticError, ValueError, RuntimeError, MemoryError, np.linalg.LinAlgError) as exc:
        raise CliError(EXIT_NUMERIC, "numerical_failure", str(exc),
                       {"command": command, "exception": type(exc).__name__}) from None


def _parser() -> argparse.ArgumentParser:
    epilog = cfgmod.describe() + "\n\nenvironment: HQSIM_THREADS caps worker threads (0 = auto)."
    fmt = argparse.RawDescriptionHelpFormatter
    ap = argparse.ArgumentParser(prog="hqsim", description=__doc__.splitlines()[0],
                                 epilog=epilog, formatter_class=fmt)
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, help=f"run the {name} workflow", epilog=epilog,
                            formatter_class=fmt)
        sp.add_argument("--config", help="JSON config file (defaults apply to missing keys)")
        sp.add_argument("--seed", type=int, help="override the config seed")
        sp.add_argument("--out", default="out", help="output directory (default: out)")
        sp.add_argument("--svg", action="store_true", help="also write an SVG plot")
    vp = sub.add_parser("validate", help="check a config without running", epilog=epilog,
                        formatter_class=fmt)
    vp.add_argument("--config", required=True)
    return ap


def _fail(err: CliError) -> int:
    print(json.dumps(round_floats({"error_code": err.code, "message": str(err),
                                   "context": err.context}), sort_keys=True), file=sys.stderr)
    return err.status


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        if args.command == "validate":
            try:
                problems = cfgmod.validate(args.config)
            except OSError as exc:
                raise CliError(EXIT_IO, "io_error", f"cannot read config: {exc}",
                               {"config": args.config}) from None
            except cfgmod.ConfigError as exc:
                problems = exc.problems
            print(json.dumps({"config": args.config, "diagnostics": problems}, indent=2))
            return EXIT_OK if not problems else EXIT_CONFIG
        files = run(args.command, args.config, args.out, args.seed, args.svg)
    except CliError as err:
        return _fail(err)
    print(json.dumps({"command": args.command, "output_dir": os.fspath(args.out),
                      "artifacts": files}, indent=2))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
