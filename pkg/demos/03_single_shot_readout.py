"""Single-shot readout by spin-to-charge conversion: traces, thresholds, fidelities.

Run from the repository root:  python3 demos/03_single_shot_readout.py [outdir]
"""

import sys
from pathlib import Path

from hqsim import svg
from hqsim.hq_model import DEFAULT_PARAMS
from hqsim.pulse_dynamics import DEFAULT_T1_TABLE, NoiseModel, standard_ramps, ramp_error_budget
from hqsim.readout_sim import TraceConfig, batch, estimate_p1, fidelity_report, tunnel_time_histograms

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)

# An excited electron tunnels out within a couple of microseconds and a
# ground-state electron returns about 30 us later, which shows up as a dip
# in the sensor signal. Ground-state shots only blip thermally.
cfg = TraceConfig()
b = batch(cfg, 8000, 0.5)
print(f"{len(b)} traces, {int(b.labels.sum())} prepared in |1>, {int(b.had_blip.sum())} with a blip")
shown = [i for i in range(40) if b.had_blip[i]][:2] + [i for i in range(40) if b.labels[i] == 0][:1]
svg.line_plot(out / "traces.svg",
              [(f"trace {i} (label {b.labels[i]})", b.trace(i).times, b.samples[i]) for i in shown],
              title="detector traces", xlabel="time (us)", ylabel="signal (a.u.)")

tt = tunnel_time_histograms(b)
print(f"tau_out = {tt.tau_out.tau:.3f} +- {tt.tau_out.stderr:.3f} us (input {cfg.tau_out})")
print(f"tau_in  = {tt.tau_in.tau:.2f} +- {tt.tau_in.stderr:.2f} us (input {cfg.tau_in}, "
      f"{tt.tau_in.n_censored} blips still open at the window end)")

# A shot reads 1 when its minimum falls below the threshold V. Sweeping V
# trades errors on |0> against errors on |1>.
rep = fidelity_report(b)
print(f"V_opt = {rep.V_opt:.3f}: F0 = {rep.F0_opt:.4f}, F1 = {rep.F1_opt:.4f}, "
      f"visibility = {rep.visibility_opt:.4f}")
est = estimate_p1(b, rep.V_opt, rep.F0_opt, rep.F1_opt)
print(f"P1 raw {est.raw:.4f}, corrected {est.corrected:.4f} (true 0.5)")
svg.line_plot(out / "fidelity.svg", [("F0", rep.thresholds, rep.F0), ("F1", rep.thresholds, rep.F1),
                                     ("visibility", rep.thresholds, rep.visibility)],
              title="readout fidelity", xlabel="threshold (a.u.)", ylabel="fraction")

# Errors picked up between the operating point and the readout point.
ramp_in, ramp_out = standard_ramps(DEFAULT_PARAMS)
bud = ramp_error_budget(ramp_in, ramp_out, DEFAULT_PARAMS, NoiseModel(t1_table=DEFAULT_T1_TABLE))
print(f"ramp-in leakage {bud.leakage_in:.1e}, relaxation on ramp-out {100 * bud.relaxation_out:.2f} %, "
      f"LZ on the fast stage {bud.lz_probability:.1e}")
print(f"plots in {out}/")
