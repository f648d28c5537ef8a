import math

import numpy as np
import pytest

from hqsim.hq_model import DEFAULT_PARAMS, qubit_splitting, sweet_spot
from hqsim.pulse_dynamics import (
    DEFAULT_T1_TABLE,
    NOISE_OFF,
    PREP_PHASES,
    Burst,
    Dwell,
    IntegrationError,
    NoiseModel,
    QubitState,
    Ramp,
    T1Profile,
    T1RangeError,
    adiabatic_time,
    amplitude_for_rabi,
    dominant_frequency,
    drive_matrix_element,
    envelope,
    evolve,
    fit_sinusoid,
    standard_ramps,
    program_from_json,
    program_to_json,
    rabi_scan,
    ramp_error_budget,
    ramsey_scan,
    t1_profile_eval,
    tomography_scan,
    wrap_phase,
)
from hqsim.pulse_dynamics.evolve import lindbladian, program_map
from hqsim.pulse_dynamics.pulses import DEFAULT_EDGE_SIGMA, EDGE_FLOOR, edge_length

from oracles import rabi_two_level

P = DEFAULT_PARAMS
EPS0 = sweet_spot(P)
F0 = qubit_splitting(EPS0, P)


def _pi_burst(f_rabi=0.05, sigma=0.0):
    amp = amplitude_for_rabi(f_rabi, EPS0, P)
    return Burst(0.5 / f_rabi, EPS0, amp, F0, 0.0, sigma)


# -- pulses --------------------------------------------------------------

def test_envelope_edges():
    t = np.linspace(0, 20, 2001)
    env = envelope(t, 20.0, DEFAULT_EDGE_SIGMA)
    assert env[0] == pytest.approx(EDGE_FLOOR)
    assert env[-1] == pytest.approx(EDGE_FLOOR)
    assert env.max() == pytest.approx(1.0)
    # 10-90 % rise of 1 ns
    t10 = t[np.argmax(env >= 0.1)]
    t90 = t[np.argmax(env >= 0.9)]
    assert t90 - t10 == pytest.approx(1.0, abs=0.02)


def test_short_burst_never_reaches_flat_top():
    te = edge_length(DEFAULT_EDGE_SIGMA)
    t = np.linspace(0, te, 101)
    assert envelope(t, te, DEFAULT_EDGE_SIGMA).max() < 1.0


def test_segment_validation():
    with pytest.raises(ValueError):
        Dwell(0.0, 1.0)
    with pytest.raises(ValueError):
        Ramp(math.inf, 0.0, 1.0)
    with pytest.raises(ValueError):
        Burst(1.0, 0.0, 1.0, 1.0, edge_sigma=-1)


def test_program_json_roundtrip():
    prog = [Ramp(2.0, 250.0, EPS0), Dwell(3.0, EPS0), Burst(4.0, EPS0, 1.5, F0, 0.3)]
    assert program_from_json(program_to_json(prog)) == prog
    with pytest.raises(ValueError):
        program_from_json('[{"kind": "dwell", "duration_ns": 1, "eps": 0, "bogus": 1}]')
    with pytest.raises(ValueError):
        program_from_json('[{"kind": "zap", "duration_ns": 1}]')


# -- noise ------------------------------------------------------------------

def test_t1_profile_hits_knots():
    eps = np.array([e for e, _ in DEFAULT_T1_TABLE])
    t1 = np.array([t for _, t in DEFAULT_T1_TABLE])
    assert np.allclose(t1_profile_eval(eps, DEFAULT_T1_TABLE), t1, rtol=1e-12)
    assert t1_profile_eval(-25.0, DEFAULT_T1_TABLE) == pytest.approx(20.0)


def test_t1_profile_log_interpolation():
    table = ((0.0, 10.0), (2.0, 1e5))
    assert t1_profile_eval(1.0, table) == pytest.approx(1000.0, rel=1e-12)


def test_t1_profile_range():
    table = ((0.0, 10.0), (2.0, 1e5))
    with pytest.raises(T1RangeError):
        t1_profile_eval(3.0, table)
    assert t1_profile_eval(3.0, table, extrapolate=True) == pytest.approx(1e5)


def test_t1_profile_rejects_bad_tables():
    with pytest.raises(ValueError):
        T1Profile.from_pairs([(0, 1), (0, 2)])
    with pytest.raises(ValueError):
        T1Profile.from_pairs([(0, 1), (1, 0)])


def test_noise_offsets_are_seeded():
    a = NoiseModel(2.0, None, 50, seed=7).offsets()
    b = NoiseModel(2.0, None, 50, seed=7).offsets()
    c = NoiseModel(2.0, None, 50, seed=8).offsets()
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    # realization r does not depend on how many are drawn
    assert np.array_equal(NoiseModel(2.0, None, 10, seed=7).offsets(), a[:10])
    assert NoiseModel(0.0, None, 50).offsets().tolist() == [0.0]


def test_noise_validation():
    with pytest.raises(ValueError):
        NoiseModel(-1.0)
    with pytest.raises(ValueError):
        NoiseModel(n_realizations=0)


# -- states and propagation --------------------------------------------

def test_state_validation():
    with pytest.raises(ValueError):
        QubitState(np.eye(4))
    with pytest.raises(ValueError):
        QubitState(np.diag([1.5, -0.5, 0, 0]))
    s = QubitState.pure([1, 1, 0, 0])
    assert s.purity() == pytest.approx(1.0)


def test_dwell_keeps_eigenstate():
    s = QubitState.eigenstate(1, EPS0, P)
    out = evolve(s, [Dwell(37.0, EPS0)], P)
    assert np.allclose(out.populations(EPS0, P), [0, 1, 0, 0], atol=1e-12)


def test_pi_pulse_without_edges():
    s = QubitState.eigenstate(0, EPS0, P)
    out = evolve(s, [_pi_burst()], P)
    assert out.populations(EPS0, P)[1] >= 0.98


def test_burst_matches_rabi_formula():
    f_r = 0.02
    amp = amplitude_for_rabi(f_r, EPS0, P)
    s = QubitState.eigenstate(0, EPS0, P)
    for t, det in [(10.0, 0.0), (17.0, 0.01)]:
        b = Burst(t, EPS0, amp, F0 + det, 0.0, 0.0)
        p1 = evolve(s, [b], P).populations(EPS0, P)[1]
        assert p1 == pytest.approx(rabi_two_level(f_r, det, t), abs=0.02)


def test_coherent_evolution_is_unitary():
    s = QubitState.eigenstate(0, 250.0, P)
    out = evolve(s, [Ramp(5.0, 250.0, EPS0), _pi_burst(0.1, DEFAULT_EDGE_SIGMA)], P)
    assert out.purity() == pytest.approx(1.0, abs=1e-9)
    assert np.trace(out.rho).real == pytest.approx(1.0)


def test_relaxation_keeps_trace_and_positivity():
    noise = NoiseModel(t1_table=DEFAULT_T1_TABLE)
    s = QubitState.eigenstate(1, EPS0, P)
    out = evolve(s, [Ramp(6.0, EPS0, -25.0), Dwell(40.0, -25.0)], P, noise)
    assert np.trace(out.rho).real == pytest.approx(1.0, abs=1e-12)
    assert np.linalg.eigvalsh(out.rho)[0] > -1e-9
    assert out.purity() < 0.99
    # 40 ns in the 20 ns hot spot relaxes most of the excited population
    assert out.populations(-25.0, P)[1] < 0.3


def test_lindblad_dwell_decay_rate():
    eps = -25.0
    gamma = 1 / 20.0
    gen = lindbladian(eps, P, gamma)
    s = QubitState.eigenstate(1, eps, P)
    noise = NoiseModel(t1_table=DEFAULT_T1_TABLE)
    out = evolve(s, [Dwell(15.0, eps)], P, noise)
    assert out.populations(eps, P)[1] == pytest.approx(math.exp(-15 * gamma), rel=1e-9)
    # trace preservation of the generator: rows of vec(identity) annihilate it
    assert np.allclose(np.eye(4).reshape(-1) @ gen, 0, atol=1e-12)


def test_step_halving_converges():
    s = QubitState.eigenstate(0, EPS0, P)
    prog = [_pi_burst(0.1, DEFAULT_EDGE_SIGMA)]
    a = program_map(prog, P, steps_per_period=40).apply(s.rho)
    b = program_map(prog, P, steps_per_period=80).apply(s.rho)
    c = program_map(prog, P, steps_per_period=160).apply(s.rho)
    e1, e2 = np.abs(a - b).max(), np.abs(b - c).max()
    assert e2 < 1e-4
    # fourth-order scheme: halving cuts the error by roughly 16
    assert e1 / e2 > 8


def test_too_coarse_steps_raise():
    s = QubitState.eigenstate(0, 250.0, P)
    with pytest.raises(IntegrationError):
        evolve(s, [Ramp(1.0, 250.0, EPS0)], P, steps_per_period=3)


def test_empty_program_rejected():
    with pytest.raises(ValueError):
        evolve(QubitState.eigenstate(0, EPS0, P), [], P)


def test_t1_range_enforced():
    noise = NoiseModel(t1_table=((-100.0, 1e3), (0.0, 1e3)))
    s = QubitState.eigenstate(0, EPS0, P)
    with pytest.raises(T1RangeError):
        evolve(s, [Ramp(1.0, EPS0, 100.0)], P, noise)


def test_drive_matrix_element_positive():
    d = drive_matrix_element(EPS0, P)
    assert 0 < d < 1
    assert amplitude_for_rabi(0.1, EPS0, P) == pytest.approx(0.1 / d)


# -- experiments --------------------------------------------------------

@pytest.fixture(scope="module")
def rabi():
    taus = np.linspace(0, 40, 161)
    amps = [0.0] + [amplitude_for_rabi(f, EPS0, P) for f in (0.03, 0.06)]
    return rabi_scan(taus, amps, params=P)


def test_rabi_zero_amplitude_stays_dark(rabi):
    assert rabi.scan.p1[:, 0].max() < 1e-9
    assert rabi.flagged[0]


def test_rabi_edges_suppress_short_bursts(rabi):
    tau = rabi.scan.axes[0][1]
    assert rabi.scan.p1[tau < 2.0, 1:].max() < 0.05


def test_rabi_frequency_scales_with_amplitude(rabi):
    f1, f2 = rabi.f_rabi[1:]
    assert f2 / f1 == pytest.approx(2.0, rel=0.02)
    assert f1 == pytest.approx(0.03, rel=0.05)
    assert rabi.linearity.r2 > 0.99


def test_rabi_resonance_symmetry():
    taus = np.array([0.0, 12.0, 20.0])
    amp = amplitude_for_rabi(0.05, EPS0, P)
    up = rabi_scan(taus, [amp], F0 + 0.02, params=P).scan.p1
    down = rabi_scan(taus, [amp], F0 - 0.02, params=P).scan.p1
    assert np.allclose(up, down, atol=0.02)


def test_weak_drive_stays_in_qubit_subspace():
    amp = amplitude_for_rabi(0.01, EPS0, P)
    s = QubitState.eigenstate(0, EPS0, P)
    out = evolve(s, [Burst(50.0, EPS0, amp, F0)], P)
    p = out.populations(EPS0, P)
    assert p[2] + p[3] < 1e-3


def test_ramsey_fft_matches_dispersion():
    eps_p = np.array([-150.0, -100.0, -60.0])
    te = np.linspace(0, 20, 201)
    res = ramsey_scan(eps_p, te, params=P)
    assert res.bin_width == pytest.approx(1 / (te[1] - te[0]) / te.size)
    assert np.all(np.abs(res.fft_peak - res.f_expected) <= res.bin_width)


def test_dominant_frequency():
    t = np.arange(200) * 0.1
    f, w = dominant_frequency(t, np.cos(2 * np.pi * 2.0 * t))
    assert f == pytest.approx(2.0, abs=w)
    with pytest.raises(ValueError):
        dominant_frequency([0, 1, 3, 4], [0, 1, 0, 1])


def test_tomography_phases():
    phi = np.linspace(0, 2 * np.pi, 37)
    res = tomography_scan(phi, params=P)
    assert abs(abs(res.phase_difference) - math.pi) < 0.05
    for fit in res.fits.values():
        assert 0.45 < fit.amplitude < 0.51
    with pytest.raises(ValueError):
        tomography_scan(phi, ("+X",), params=P)
    assert set(PREP_PHASES) == {"+Y", "-Y"}


def test_fit_sinusoid_and_wrap():
    phi = np.linspace(0, 2 * np.pi, 50)
    fit = fit_sinusoid(phi, 0.3 * np.sin(phi + 1.0) + 0.5)
    assert (fit.amplitude, fit.phase, fit.offset) == pytest.approx((0.3, 1.0, 0.5))
    assert wrap_phase(3 * math.pi) == pytest.approx(math.pi)
    assert wrap_phase(-math.pi) == pytest.approx(math.pi)


def test_adiabatic_time_ordering():
    assert adiabatic_time(40.0, 250.0, P) < adiabatic_time(250.0, EPS0, P)
    assert adiabatic_time(250.0, EPS0, P) > 0


def test_ramp_budget_without_relaxation():
    ri, ro = standard_ramps(P)
    b = ramp_error_budget(ri, ro, P, NOISE_OFF)
    assert b.relaxation_out == 0.0
    assert b.leakage_in < 1e-3
    assert b.lz_probability < 0.015


def test_ramp_budget_sudden_ramp_leaks():
    b = ramp_error_budget(Ramp(0.05, 250.0, EPS0), [Ramp(0.05, EPS0, 250.0)], P)
    assert b.leakage_in > 0.01

