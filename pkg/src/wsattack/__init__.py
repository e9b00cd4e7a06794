"""Wavelength-switching attack toolkit for twin-field-class QKD systems.

Models the frequency- and voltage-dependent insertion loss of the
acousto-optic modulator inside an optical phase-locked loop, the
mean-photon-number gain an attacker induces by toggling the reference-light
wavelength, the resulting estimated-versus-true secure key rates for the
phase-sliced and sending-or-not-sending twin-field protocols, and the
loss-minimizing calibration that closes the loophole.
"""

__version__ = "0.1.0"

from .aom import (
    AomModel,
    AomPhysics,
    CalibrationTable,
    DrivePattern,
    RangeClampWarning,
    attenuation_vs_frequency,
    attenuation_vs_voltage,
    calibrate,
    combined_attenuation_delta,
    diffraction_efficiency,
    ultrasonic_power,
)
from .attack import (
    LOCK_LIMIT_MHZ,
    AttackConfig,
    GainTable,
    attenuation_delta_to_gain,
    gain_from_physics,
    per_station_gain,
    system_gain_factor,
)
from .config import AppConfig, Diagnostic, load_config, validate_config
from .keyrate_sns import (
    SnsCountingRates,
    SnsKeyQuantities,
    phase_flip_bound,
    simulate_counting_rates,
    sns_distance_sweep,
    sns_key_rate,
    untagged_rate_bound,
)
from .keyrate_tf import (
    BoundInfeasibleError,
    KeyRatePoint,
    KeyRateReport,
    TfDecoyQuantities,
    decoy_bounds,
    detection_gain,
    observed_qber,
    phase_slice_error,
    plob_bound,
    tf_distance_sweep,
    tf_key_rate,
)
from .opll import OpllConfig, OpllTrace, heterodyne_spectrum, interference_stability, run_opll
from .params import (
    ChannelParams,
    IntensitySettings,
    ProtocolParams,
    SystemParams,
    binary_entropy,
    single_arm_transmittance,
)
