"""Pulsed dynamics of the four-level qubit with relaxation and dephasing."""

from .evolve import IntegrationError, Propagator, QubitState, drive_matrix_element, evolve, program_map
from .experiments import (
    MEASURE_EPS,
    PREP_PHASES,
    RabiResult,
    RampBudget,
    RamseyResult,
    ScanResult,
    SigmaCalibration,
    TomographyResult,
    adiabatic_time,
    amplitude_for_rabi,
    calibrate_pulse,
    calibrate_sigma_eps,
    dominant_frequency,
    fit_ramsey_envelope,
    fit_sinusoid,
    operating_point,
    standard_ramps,
    rabi_scan,
    ramp_error_budget,
    ramsey_scan,
    ramsey_t2_star,
    tomography_scan,
    wrap_phase,
)
from .noise import DEFAULT_T1_TABLE, NOISE_OFF, NoiseModel, T1Profile, T1RangeError, t1_profile_eval
from .pulses import Burst, Dwell, Ramp, envelope, program_from_json, program_to_json
