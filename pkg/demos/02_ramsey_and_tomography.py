"""Ramsey fringes under quasistatic detuning noise, and two-axis phase control.

Run from the repository root:  python3 demos/02_ramsey_and_tomography.py [outdir]
Takes about a minute (the noise calibration dominates).
"""

import sys
from pathlib import Path

import numpy as np

from hqsim import svg
from hqsim.hq_model import DEFAULT_PARAMS
from hqsim.pulse_dynamics import (NoiseModel, calibrate_sigma_eps, fit_ramsey_envelope,
                                  ramsey_scan, tomography_scan)

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo_out")
out.mkdir(exist_ok=True)
p = DEFAULT_PARAMS

# pi/2, detuning pulse to eps_p for t_e, pi/2. During t_e the state precesses
# at the local qubit frequency, so the fringe frequency maps the dispersion.
eps_p = np.linspace(-150, -60, 10)
te = np.linspace(0, 20, 201)
res = ramsey_scan(eps_p, te, params=p)
for e, f, q in zip(eps_p, res.fft_peak, res.f_expected):
    print(f"eps_p = {e:7.1f}  FFT peak {f:.3f} GHz  f_q {q:.3f} GHz")
print(f"FFT bin width {res.bin_width:.4f} GHz")
svg.heatmap(out / "ramsey.svg", eps_p, te, res.scan.p1, title="Ramsey P1",
            xlabel="eps_p (h*GHz)", ylabel="t_e (ns)")

# Slow charge noise: choose sigma_eps so the fringe at eps_p = -100 decays
# with a 7 ns Gaussian envelope.
cal = calibrate_sigma_eps(7.0, -100.0, params=p)
print(f"sigma_eps = {cal.sigma_eps:.3f} h*GHz gives T2* = {cal.t2_star:.2f} ns "
      f"({len(cal.history)} trial values)")
te2 = np.arange(0, 28, 0.1)
noisy = ramsey_scan([-100.0], te2, params=p, noise=NoiseModel(cal.sigma_eps, None, 200, seed=0))
t2 = fit_ramsey_envelope(te2, noisy.scan.p1[0], float(noisy.f_expected[0]))
svg.line_plot(out / "ramsey_noise.svg", [(f"T2* = {t2:.1f} ns", te2, noisy.scan.p1[0])],
              title="Ramsey fringe with detuning noise", xlabel="t_e (ns)", ylabel="P1")

# Tomography: prepare +Y or -Y, then a second pi/2 burst with phase phi.
# The two curves are sinusoids in phi shifted by pi.
phi = np.linspace(0, 2 * np.pi, 73)
tomo = tomography_scan(phi, params=p)
for k, fit in tomo.fits.items():
    print(f"{k}: amplitude {fit.amplitude:.5f}, phase {fit.phase:+.4f} rad")
print(f"phase difference {tomo.phase_difference:+.4f} rad")
svg.line_plot(out / "tomo.svg", [(k, phi, s.p1) for k, s in tomo.scans.items()],
              title="phase tomography", xlabel="phi (rad)", ylabel="P1")
print(f"plots in {out}/")
