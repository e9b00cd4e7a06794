"""Configuration loading and validation.

One YAML file with nested sections configures every parameter group; any
subset may be given and merges over the built-in defaults.  The shipped
``data/default_config.yaml`` documents the full schema and mirrors the code
defaults exactly.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass

import yaml

from .aom import AomModel, AomPhysics, CalibrationTable, DrivePattern
from .attack import LOCK_LIMIT_MHZ, AttackConfig, GainTable
from .opll import OpllConfig
from .params import ChannelParams, IntensitySettings, ProtocolParams, SystemParams

_CHANNEL_KEYS = ("alpha", "length_km", "eta_det", "p_dark", "e_opt")
_PROTOCOL_KEYS = (
    "duty_cycle_d", "phase_slices_m", "f_ec", "n_total", "gamma",
    "t_delta", "send_prob", "enable_aopp",
)
_PHYSICS_KEYS = (
    "wavelength_nm", "figure_of_merit", "transducer_length_m",
    "transducer_thickness_m", "resonance_mhz", "rel_acoustic_impedance",
    "excess_loss_db", "input_power_mw",
)
_DRIVE_KEYS = ("base_v", "high_v_knots", "low_delta_v_per_mhz", "recovery_us")
_ATTACK_KEYS = ("f_aom1_mhz", "f_aom2_mhz", "switch_rate_khz", "gain_table")
_OPLL_KEYS = (
    "het_center_mhz", "lock_bandwidth_mhz", "lock_time_us",
    "flc_response_min_us", "flc_response_max_us", "pzt_handoff_mhz_per_ms",
    "aom_center_mhz", "beat_power_dbm", "min_beat_power_dbm", "timestep_us",
    "fast_delivery_prob",
)


@dataclass(frozen=True)
class Diagnostic:
    """One config problem: where it is and what is wrong."""

    section: str
    message: str

    def __str__(self) -> str:
        return f"{self.section}: {self.message}"


@dataclass(frozen=True)
class AppConfig:
    """Fully resolved configuration for every module."""

    tf: SystemParams
    sns: SystemParams
    aom: AomModel
    attack: AttackConfig
    gain_table: GainTable
    opll: OpllConfig


def _default_tree() -> dict:
    """Nested dict of all defaults; the YAML schema mirrors this shape."""
    return {
        "intensities": {"mu0": 0.4, "mu1": 1e-2, "mu2": 1e-4},
        "tf": {
            "channel": {"alpha": 0.2, "length_km": 400.0, "eta_det": 0.3,
                        "p_dark": 1e-8, "e_opt": 0.03},
            "protocol": {"duty_cycle_d": 0.5, "phase_slices_m": 16, "f_ec": 1.16},
        },
        "sns": {
            "channel": {"alpha": 0.157, "length_km": 400.0, "eta_det": 0.6,
                        "p_dark": 1.4e-11, "e_opt": 0.03},
            "protocol": {"f_ec": 1.16, "n_total": 5.4e14, "gamma": 0.0,
                         "t_delta": None, "send_prob": 0.12, "enable_aopp": False},
        },
        "aom": {
            "physics": {
                "wavelength_nm": 1550.0,
                "figure_of_merit": 34.7e-15,
                "transducer_length_m": 6.9236e-4,
                "transducer_thickness_m": 2.0e-5,
                "resonance_mhz": 195.0,
                "rel_acoustic_impedance": 1.0,
                "excess_loss_db": 3.57,
                "input_power_mw": 6.22,
            },
            "voltage_table": [[1.0, 26.0], [8.68, 5.14], [8.95, 5.0],
                              [10.56, 3.98], [15.0, 3.59]],
            "frequency_table": [[170.0, 4.31], [180.0, 4.28],
                                [195.0, 3.57], [200.0, 3.59]],
            "drive": {
                "base_v": 8.95,
                "high_v_knots": [[0.0, 8.95], [1.0, 9.0591], [3.0, 9.1466],
                                 [9.0, 9.4841], [20.0, 10.6769], [30.0, 11.0681]],
                "low_delta_v_per_mhz": -0.0135,
                "recovery_us": 1.0,
            },
        },
        "attack": {
            "f_aom1_mhz": 200.0,
            "f_aom2_mhz": 170.0,
            "switch_rate_khz": 100.0,
            "gain_table": [[0.0, 0.0], [1.0, 0.0086], [3.0, 0.0163],
                           [9.0, 0.0319], [20.0, 0.0404], [30.0, 0.0435]],
        },
        "opll": {
            "het_center_mhz": 112.0,
            "lock_bandwidth_mhz": 30.0,
            "lock_time_us": 0.2,
            "flc_response_min_us": 3.0,
            "flc_response_max_us": 10.0,
            "pzt_handoff_mhz_per_ms": 10.0,
            "aom_center_mhz": 200.0,
            "beat_power_dbm": -9.14,
            "min_beat_power_dbm": -30.0,
            "timestep_us": 0.05,
            "fast_delivery_prob": 0.5,
        },
    }


def _merge(base: dict, override: dict, path: str, issues: list[Diagnostic]) -> dict:
    out = dict(base)
    for key, value in override.items():
        where = f"{path}.{key}" if path else str(key)
        if key not in base:
            issues.append(Diagnostic(where, "unknown key"))
            continue
        if isinstance(base[key], dict) and isinstance(value, dict):
            out[key] = _merge(base[key], value, where, issues)
        else:
            out[key] = value
    return out


def _pairs(raw, section: str) -> tuple[tuple[float, float], ...]:
    try:
        return tuple((float(a), float(b)) for a, b in raw)
    except (TypeError, ValueError) as exc:
        raise ValueError(f"{section} must be a list of [x, y] pairs: {exc}") from exc


def _build(tree: dict, issues: list[Diagnostic]) -> AppConfig | None:
    """Construct every parameter object, collecting invariant violations."""

    def attempt(section: str, fn):
        try:
            return fn()
        except (ValueError, TypeError) as exc:
            issues.append(Diagnostic(section, str(exc)))
            return None

    intensities = attempt("intensities", lambda: IntensitySettings(**tree["intensities"]))
    tf_channel = attempt("tf.channel", lambda: ChannelParams(**tree["tf"]["channel"]))
    tf_protocol = attempt("tf.protocol", lambda: ProtocolParams(**tree["tf"]["protocol"]))
    sns_channel = attempt("sns.channel", lambda: ChannelParams(**tree["sns"]["channel"]))
    sns_protocol = attempt("sns.protocol", lambda: ProtocolParams(**tree["sns"]["protocol"]))

    physics = attempt("aom.physics", lambda: AomPhysics(**tree["aom"]["physics"]))
    voltage_table = attempt(
        "aom.voltage_table",
        lambda: CalibrationTable(
            *zip(*_pairs(tree["aom"]["voltage_table"], "aom.voltage_table"))
        ),
    )
    raw_freq = tree["aom"]["frequency_table"]
    frequency_table = (
        None
        if raw_freq is None
        else attempt(
            "aom.frequency_table",
            lambda: CalibrationTable(
                *zip(*_pairs(raw_freq, "aom.frequency_table"))
            ),
        )
    )
    drive = attempt(
        "aom.drive",
        lambda: DrivePattern(
            base_v=tree["aom"]["drive"]["base_v"],
            high_v_knots=_pairs(tree["aom"]["drive"]["high_v_knots"], "aom.drive.high_v_knots"),
            low_delta_v_per_mhz=tree["aom"]["drive"]["low_delta_v_per_mhz"],
            recovery_us=tree["aom"]["drive"]["recovery_us"],
        ),
    )

    attack_tree = dict(tree["attack"])
    raw_gain = attack_tree.pop("gain_table")
    attack = attempt("attack", lambda: AttackConfig(**attack_tree))
    gain_table = attempt(
        "attack.gain_table",
        lambda: GainTable(*zip(*_pairs(raw_gain, "attack.gain_table"))),
    )
    opll = attempt("opll", lambda: OpllConfig(**tree["opll"]))

    if attack is not None and attack.exceeds_lock_limit:
        issues.append(Diagnostic(
            "attack",
            f"f_delta {attack.f_delta_mhz} MHz exceeds the {LOCK_LIMIT_MHZ} MHz "
            "lock limit; the loop will not stay locked",
        ))

    parts = (intensities, tf_channel, tf_protocol, sns_channel, sns_protocol,
             physics, voltage_table, drive, attack, gain_table, opll)
    if any(p is None for p in parts):
        return None
    return AppConfig(
        tf=SystemParams(intensities=intensities, channel=tf_channel, protocol=tf_protocol),
        sns=SystemParams(intensities=intensities, channel=sns_channel, protocol=sns_protocol),
        aom=AomModel(physics=physics, voltage_table=voltage_table,
                     frequency_table=frequency_table, drive=drive),
        attack=attack,
        gain_table=gain_table,
        opll=opll,
    )


def _read_tree(path) -> tuple[dict | None, list[Diagnostic]]:
    issues: list[Diagnostic] = []
    try:
        with open(path) as fh:
            raw = yaml.safe_load(fh)
    except OSError as exc:
        return None, [Diagnostic("file", str(exc))]
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        where = f"line {mark.line + 1}, column {mark.column + 1}" if mark else "unknown position"
        return None, [Diagnostic("yaml", f"parse error at {where}: {exc}")]
    if raw is None:
        raw = {}
    if not isinstance(raw, dict):
        return None, [Diagnostic("yaml", "top level must be a mapping")]
    tree = _merge(_default_tree(), raw, "", issues)
    return tree, issues


def load_config(path=None) -> AppConfig:
    """Resolve a configuration: built-in defaults overlaid by an optional file."""
    if path is None:
        issues: list[Diagnostic] = []
        config = _build(_default_tree(), issues)
        if issues or config is None:  # pragma: no cover - defaults are valid
            raise ValueError("; ".join(map(str, issues)))
        return config
    tree, issues = _read_tree(path)
    if tree is None:
        raise ValueError("; ".join(map(str, issues)))
    config = _build(tree, issues)
    if issues or config is None:
        raise ValueError("; ".join(map(str, issues)))
    return config


def validate_config(path) -> list[Diagnostic]:
    """Check a config file against every type invariant; empty means valid."""
    tree, issues = _read_tree(path)
    if tree is None:
        return issues
    _build(tree, issues)
    return issues


def resolved_tree(config: AppConfig) -> dict:
    """Nested plain-data snapshot of a resolved configuration (manifests)."""
    tf, sns = config.tf, config.sns
    aom = config.aom
    return {
        "intensities": {"mu0": tf.intensities.mu0, "mu1": tf.intensities.mu1,
                        "mu2": tf.intensities.mu2},
        "tf": {
            "channel": {k: getattr(tf.channel, k) for k in _CHANNEL_KEYS},
            "protocol": {k: getattr(tf.protocol, k) for k in _PROTOCOL_KEYS},
        },
        "sns": {
            "channel": {k: getattr(sns.channel, k) for k in _CHANNEL_KEYS},
            "protocol": {k: getattr(sns.protocol, k) for k in _PROTOCOL_KEYS},
        },
        "aom": {
            "physics": {k: getattr(aom.physics, k) for k in _PHYSICS_KEYS},
            "voltage_table": [list(p) for p in zip(aom.voltage_table.x,
                                                   aom.voltage_table.attenuation_db)],
            "frequency_table": None if aom.frequency_table is None else
                [list(p) for p in zip(aom.frequency_table.x,
                                      aom.frequency_table.attenuation_db)],
            "drive": {
                "base_v": aom.drive.base_v,
                "high_v_knots": [list(p) for p in aom.drive.high_v_knots],
                "low_delta_v_per_mhz": aom.drive.low_delta_v_per_mhz,
                "recovery_us": aom.drive.recovery_us,
            },
        },
        "attack": {
            "f_aom1_mhz": config.attack.f_aom1_mhz,
            "f_aom2_mhz": config.attack.f_aom2_mhz,
            "switch_rate_khz": config.attack.switch_rate_khz,
            "gain_table": [list(p) for p in zip(config.gain_table.f_delta_mhz,
                                                config.gain_table.gain)],
        },
        "opll": {k: getattr(config.opll, k) for k in _OPLL_KEYS},
    }


def default_config_path():
    """Path of the packaged default configuration file."""
    return importlib.resources.files("wsattack").joinpath("data/default_config.yaml")
