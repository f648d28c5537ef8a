"""Energy levels of the four-level model and resonant Rabi driving at the sweet spot.

Run from the repository root:  python3 demos/01_dispersion_and_rabi.py [outdir]
"""

import sys
from pathlib import Path

import numpy as np

from hqsim import svg
from hqsim.hq_model import DEFAULT_PARAMS, dispersion_scan, qubit_splitting, sweet_spot
from hqsim.pulse_dynamics import amplitude_for_rabi, rabi_scan

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)
p = DEFAULT_PARAMS

# The qubit frequency is the gap between the two lowest levels. Far to the
# left it approaches delta_L, far to the right delta_R, and in between the
# tunnel couplings open an avoided crossing with a minimum.
eps = np.linspace(-300, 300, 1201)
d = dispersion_scan(eps, p)
ss = sweet_spot(p)
print(f"sweet spot at eps = {ss:.3f} h*GHz, f_q = {qubit_splitting(ss, p):.4f} GHz")
print(f"f_q(-300) = {d.f_qubit[0]:.3f} GHz, f_q(+300) = {d.f_qubit[-1]:.3f} GHz")
svg.line_plot(out / "levels.svg", [(f"E{k}", eps, d.energies[:, k]) for k in range(4)],
              title="four-level spectrum", xlabel="detuning (h*GHz)", ylabel="energy (h*GHz)")

# Drive on resonance at the sweet spot. Amplitudes are chosen for target
# Rabi frequencies through the dipole matrix element there.
targets = [0.02, 0.04, 0.06, 0.08, 0.1]
amps = [amplitude_for_rabi(f, ss, p) for f in targets]
taus = np.linspace(0, 40, 161)
res = rabi_scan(taus, amps, params=p)
for f_t, a, f in zip(targets, amps, res.f_rabi):
    print(f"A = {a:6.3f} h*GHz  target {1e3 * f_t:5.1f} MHz  fitted {1e3 * f:6.2f} MHz")
lin = res.linearity
print(f"f_Rabi vs A: slope {lin.slope:.4f}, R^2 = {lin.r2:.6f}")
print(f"largest P1 for bursts under 2 ns: {res.scan.p1[taus < 2].max():.4f}")
svg.heatmap(out / "rabi.svg", taus, amps, res.scan.p1, title="Rabi P1",
            xlabel="burst (ns)", ylabel="amplitude (h*GHz)")
print(f"plots in {out}/")
