"""Acousto-optic modulator insertion-loss model.

The modulator's insertion loss depends on two drive quantities and the model
keeps one description for each:

* **Modulation frequency** — an analytic diffraction-efficiency curve.  The
  transducer converts the RF drive into ultrasound whose power grows with the
  square of the relative drive frequency; the diffraction efficiency of the
  acousto-optic medium is ``sin^2`` of an amplitude proportional to the square
  root of that power, so the loss falls from a deep minimum-efficiency regime
  at low drive frequencies to a single optimum and rises again beyond it.
  Insertion loss is the efficiency converted to dB plus a fixed excess-loss
  term covering coupling and other broadband losses.
* **Drive voltage** — an empirical calibration table, monotone-interpolated.
  Insufficient transducer excitation at low voltage raises the loss; no
  analytic excitation model is attempted.

Because the closed-form frequency curve is intentionally coarse (its shape
has a single free scale), a measured frequency-calibration table can be
attached alongside it.  When present, the measured table is preferred for
operating-point arithmetic (`combined_attenuation_delta`, calibration scans)
while `attenuation_vs_frequency` always evaluates the analytic curve.

Transducer constants that are not device datasheet values are *fits*: they
are chosen so the analytic optimum lands at the measured 195 MHz minimum.
They are marked as such in the default configuration file.

All objects are immutable and all functions pure.
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
from scipy.interpolate import PchipInterpolator

# Reported in place of an infinite dB value when the diffraction efficiency
# vanishes; keeps frequency sweeps plottable.  The measured extreme is
# "over 50 dB", so the cap sits safely above it.
SATURATION_CAP_DB = 60.0


class RangeClampWarning(UserWarning):
    """A table lookup fell outside the calibrated range and was clamped."""


@dataclass(frozen=True)
class AomPhysics:
    """Physical constants of the modulator's frequency response.

    ``transducer_length_m``, ``transducer_thickness_m``, ``resonance_mhz``
    (half-wave resonance of the piezoelectric layer) and
    ``rel_acoustic_impedance`` are fitted so that the analytic attenuation
    minimum equals ``excess_loss_db`` at 195 MHz; they are not measured
    device values.  ``figure_of_merit`` is the acousto-optic figure of merit
    of the TeO2-class medium in s^3/kg.
    """

    wavelength_nm: float = 1550.0
    figure_of_merit: float = 34.7e-15
    transducer_length_m: float = 6.9236e-4
    transducer_thickness_m: float = 2.0e-5
    resonance_mhz: float = 195.0
    rel_acoustic_impedance: float = 1.0
    excess_loss_db: float = 3.57
    input_power_mw: float = 6.22

    def __post_init__(self) -> None:
        positives = (
            "wavelength_nm", "figure_of_merit", "transducer_length_m",
            "transducer_thickness_m", "resonance_mhz",
            "rel_acoustic_impedance", "input_power_mw",
        )
        for name in positives:
            if not getattr(self, name) > 0.0:
                raise ValueError(f"{name} must be > 0, got {getattr(self, name)}")
        if self.excess_loss_db < 0.0:
            raise ValueError(f"excess_loss_db must be >= 0, got {self.excess_loss_db}")


def ultrasonic_power(f_aom_mhz: float, physics: AomPhysics) -> float:
    """Relative ultrasonic power delivered at a drive frequency.

    Square of the drive frequency relative to the transducer resonance,
    divided by the relative acoustic impedance of the medium.
    """
    if f_aom_mhz < 0.0:
        raise ValueError(f"modulation frequency must be >= 0, got {f_aom_mhz}")
    rel = f_aom_mhz / physics.resonance_mhz
    return rel * rel / physics.rel_acoustic_impedance


def diffraction_efficiency(f_aom_mhz: float, physics: AomPhysics) -> float:
    """Fraction of input light diffracted into the shifted order, in [0, 1]."""
    p_a = ultrasonic_power(f_aom_mhz, physics)
    wavelength_m = physics.wavelength_nm * 1e-9
    amplitude = math.sqrt(
        physics.figure_of_merit * physics.transducer_length_m * p_a
        / (2.0 * physics.transducer_thickness_m)
    )
    return math.sin(math.pi / wavelength_m * amplitude) ** 2


def attenuation_vs_frequency(f_aom_mhz: float, physics: AomPhysics) -> float:
    """Analytic insertion loss in dB at a modulation frequency.

    ``-10 log10(efficiency) + excess_loss_db``, saturating at
    ``SATURATION_CAP_DB`` when the efficiency underflows to zero.
    """
    eff = diffraction_efficiency(f_aom_mhz, physics)
    if eff <= 0.0:
        return SATURATION_CAP_DB
    return min(SATURATION_CAP_DB, -10.0 * math.log10(eff) + physics.excess_loss_db)


@dataclass(frozen=True)
class CalibrationTable:
    """Measured (x, attenuation dB) knots with monotone pchip interpolation.

    Shape-preserving piecewise-cubic interpolation reproduces every knot
    exactly and cannot overshoot between monotone knots.  Queries outside the
    calibrated range clamp to the nearest endpoint and raise a
    `RangeClampWarning`.
    """

    x: tuple[float, ...]
    attenuation_db: tuple[float, ...]

    def __post_init__(self) -> None:
        if len(self.x) != len(self.attenuation_db):
            raise ValueError("x and attenuation_db must have equal length")
        if len(self.x) < 2:
            raise ValueError("calibration table needs at least 2 entries")
        if any(b <= a for a, b in zip(self.x, self.x[1:])):
            raise ValueError("table x values must be strictly increasing")
        if any(a < 0.0 for a in self.attenuation_db):
            raise ValueError("attenuations must be non-negative")

    @cached_property
    def _interp(self) -> PchipInterpolator:
        return PchipInterpolator(np.asarray(self.x), np.asarray(self.attenuation_db))

    def attenuation(self, x, warn: bool = True):
        """Interpolated attenuation in dB; clamps (with a warning) off-range."""
        arr = np.asarray(x, dtype=float)
        if warn and bool(np.any((arr < self.x[0]) | (arr > self.x[-1]))):
            warnings.warn(
                f"query clamped to calibrated range [{self.x[0]}, {self.x[-1]}]",
                RangeClampWarning,
                stacklevel=2,
            )
        out = self._interp(np.clip(arr, self.x[0], self.x[-1]))
        return float(out) if np.isscalar(x) else out

    @classmethod
    def from_csv(cls, path, x_column: str) -> "CalibrationTable":
        """Load knots from a CSV with columns ``<x_column>, attenuation_db``."""
        xs: list[float] = []
        atts: list[float] = []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                xs.append(float(row[x_column]))
                atts.append(float(row["attenuation_db"]))
        order = sorted(range(len(xs)), key=xs.__getitem__)
        return cls(tuple(xs[i] for i in order), tuple(atts[i] for i in order))


# Voltage knots: the four measured operating points, plus an approximate
# low-voltage anchor consistent with the observed >25 dB extreme.  The 5.00 dB
# level of the 8.95 V rest point is a fit; only the steps between the knots
# and the 15 V minimum are measured.
DEFAULT_VOLTAGE_TABLE = CalibrationTable(
    x=(1.0, 8.68, 8.95, 10.56, 15.0),
    attenuation_db=(26.0, 5.14, 5.0, 3.98, 3.59),
)

# Measured frequency anchors around the operating band: the 195 MHz minimum,
# the reference point at 200 MHz, the measured step down to 180 MHz, and a
# fitted 170 MHz anchor extrapolating the same branch.
DEFAULT_FREQUENCY_TABLE = CalibrationTable(
    x=(170.0, 180.0, 195.0, 200.0),
    attenuation_db=(4.31, 4.28, 3.57, 3.59),
)


@dataclass(frozen=True)
class DrivePattern:
    """Three-level drive-voltage pattern of one wavelength-switching cycle.

    While the modulator holds a shifted frequency the energy-storing medium
    runs at elevated drive voltage (``high_voltage``); right after the shift
    is released the voltage undershoots (``low_voltage``) for
    ``recovery_us``; otherwise it rests at ``base_v``.  The high-voltage
    knots are fits chosen so that the simulated cycle-averaged output gain
    reproduces the measured per-station gains; the 20 MHz knot sits within
    0.12 V of the measured 10.56 V step.
    """

    base_v: float = 8.95
    high_v_knots: tuple[tuple[float, float], ...] = (
        (0.0, 8.95),
        (1.0, 9.0591),
        (3.0, 9.1466),
        (9.0, 9.4841),
        (20.0, 10.6769),
        (30.0, 11.0681),
    )
    low_delta_v_per_mhz: float = -0.0135
    recovery_us: float = 1.0

    def __post_init__(self) -> None:
        fs = [f for f, _ in self.high_v_knots]
        if any(b <= a for a, b in zip(fs, fs[1:])):
            raise ValueError("high_v_knots must be strictly increasing in frequency")
        if self.recovery_us < 0.0:
            raise ValueError(f"recovery_us must be >= 0, got {self.recovery_us}")

    def high_excursion_v(self, f_delta_mhz: float) -> float:
        """Voltage rise above base while holding a shift of ``f_delta_mhz``."""
        fs = [f for f, _ in self.high_v_knots]
        vs = [v for _, v in self.high_v_knots]
        return float(np.interp(f_delta_mhz, fs, vs)) - self.high_v_knots[0][1]

    def low_excursion_v(self, f_delta_mhz: float) -> float:
        """Voltage undershoot below base right after a shift is released."""
        return self.low_delta_v_per_mhz * f_delta_mhz

    def phases(self, f_delta_mhz: float, base_v: float | None = None):
        """(base, high, low) drive voltages for a given shift magnitude."""
        base = self.base_v if base_v is None else base_v
        return (
            base,
            base + self.high_excursion_v(f_delta_mhz),
            base + self.low_excursion_v(f_delta_mhz),
        )


@dataclass(frozen=True)
class AomModel:
    """Physics constants plus calibration tables of one modulator.

    Maps (frequency, voltage) to attenuation.  The measured frequency table,
    when present, is used for operating-point deltas and calibration scans;
    the analytic curve remains available for full-range sweeps.
    """

    physics: AomPhysics = field(default_factory=AomPhysics)
    voltage_table: CalibrationTable = DEFAULT_VOLTAGE_TABLE
    frequency_table: CalibrationTable | None = DEFAULT_FREQUENCY_TABLE
    drive: DrivePattern = DrivePattern()

    def frequency_attenuation(self, f_mhz, warn: bool = False):
        """Operating attenuation at a modulation frequency, in dB.

        Prefers the measured table; falls back to the analytic curve when no
        table is attached.  Accepts scalars or arrays.
        """
        if self.frequency_table is not None:
            return self.frequency_table.attenuation(f_mhz, warn=warn)
        if np.isscalar(f_mhz):
            return attenuation_vs_frequency(float(f_mhz), self.physics)
        return np.array([attenuation_vs_frequency(float(f), self.physics) for f in np.asarray(f_mhz)])

    def voltage_attenuation(self, v, warn: bool = True):
        return self.voltage_table.attenuation(v, warn=warn)


def attenuation_vs_voltage(v: float, table: CalibrationTable, warn: bool = True) -> float:
    """Insertion loss in dB at a drive voltage, from the calibration table."""
    return float(table.attenuation(v, warn=warn))


def combined_attenuation_delta(
    f_delta_mhz: float,
    v_before: float,
    v_after: float,
    model: AomModel,
    f_center_mhz: float = 200.0,
) -> float:
    """Attenuation change (dB) when the operating point shifts down by
    ``f_delta_mhz`` while the drive voltage moves ``v_before -> v_after``.

    Negative values mean less loss, i.e. brighter output.  The frequency and
    voltage responses are treated as separable: the frequency term is the
    operating-map difference between ``f_center - f_delta`` and ``f_center``;
    the voltage term is the table difference between the two voltages.
    """
    freq_part = float(
        model.frequency_attenuation(f_center_mhz - f_delta_mhz)
        - model.frequency_attenuation(f_center_mhz)
    )
    volt_part = float(
        model.voltage_table.attenuation(v_after, warn=False)
        - model.voltage_table.attenuation(v_before, warn=False)
    )
    return freq_part + volt_part


def calibrate(model: AomModel, v_grid, f_grid) -> tuple[float, float]:
    """Loss-minimizing calibration: optimal drive voltage, then frequency.

    Step 1 scans the drive voltage at the table's reference frequency and
    picks the voltage of minimum insertion loss; step 2 scans the modulation
    frequency at that voltage and picks the frequency of minimum loss.  Ties
    break toward the lower voltage/frequency.  Operating at the returned
    point means any frequency excursion or voltage disturbance can only add
    loss.
    """
    v_grid = list(v_grid)
    f_grid = list(f_grid)
    if not v_grid or not f_grid:
        raise ValueError("calibration grids must be non-empty")
    # The voltage and frequency responses are separable in this model, so the
    # scan at fixed frequency reduces to a scan of the voltage table (and
    # vice versa); min() tie-breaks toward the lower knob value.
    _, v_opt = min(
        (float(model.voltage_table.attenuation(v, warn=False)), float(v)) for v in v_grid
    )
    _, f_opt = min(
        (float(model.frequency_attenuation(f)), float(f)) for f in f_grid
    )
    return v_opt, f_opt
