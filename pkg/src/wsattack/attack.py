"""Attacker parameters and the mean-photon-number gain they induce.

The eavesdropper toggles the reference light between two frequencies
separated by ``f_delta`` at a switching rate ``r_s``.  Each victim station's
modulator then alternates operating points and its cycle-averaged output
brightens.  The measured per-station gains are carried as an interpolation
table; an independent physics-based estimate derived from the modulator's
attenuation model is reported alongside for cross-checking, never reconciled
with the table (intervening path losses between the modulator output and the
station output are not quantified).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .aom import AomModel

# The loop stays locked only up to this shift; gain lookups beyond it are
# meaningless because the feedback no longer tracks the reference.
LOCK_LIMIT_MHZ = 30.0


@dataclass(frozen=True)
class AttackConfig:
    """Attacker knobs: the two injected frequencies and the switching rate.

    ``f_delta_mhz`` is derived as ``|f_aom1 - f_aom2|``.  Values beyond the
    lock limit may be constructed (the loop simulator uses them to show loss
    of lock) but are rejected by gain lookups and flagged by config
    validation.
    """

    f_aom1_mhz: float = 200.0
    f_aom2_mhz: float = 170.0
    switch_rate_khz: float = 100.0

    def __post_init__(self) -> None:
        if self.f_aom1_mhz < 0.0 or self.f_aom2_mhz < 0.0:
            raise ValueError("modulation frequencies must be >= 0")
        if not self.switch_rate_khz > 0.0:
            raise ValueError(f"switch_rate_khz must be > 0, got {self.switch_rate_khz}")

    @property
    def f_delta_mhz(self) -> float:
        return abs(self.f_aom1_mhz - self.f_aom2_mhz)

    @property
    def exceeds_lock_limit(self) -> bool:
        return self.f_delta_mhz > LOCK_LIMIT_MHZ

    @property
    def dwell_us(self) -> float:
        """Time between switch events in microseconds."""
        return 1000.0 / self.switch_rate_khz


@dataclass(frozen=True)
class GainTable:
    """Measured per-station gain versus shift separation, from the origin up.

    Interpolation between knots is piecewise linear, matching the measured
    fast-then-slow growth without inventing curvature; knots reproduce
    exactly.
    """

    f_delta_mhz: tuple[float, ...] = (0.0, 1.0, 3.0, 9.0, 20.0, 30.0)
    gain: tuple[float, ...] = (0.0, 0.0086, 0.0163, 0.0319, 0.0404, 0.0435)

    def __post_init__(self) -> None:
        if len(self.f_delta_mhz) != len(self.gain):
            raise ValueError("f_delta_mhz and gain must have equal length")
        if len(self.f_delta_mhz) < 2:
            raise ValueError("gain table needs at least 2 points")
        if self.f_delta_mhz[0] != 0.0 or self.gain[0] != 0.0:
            raise ValueError("gain table must start at the origin (0, 0)")
        if any(b <= a for a, b in zip(self.f_delta_mhz, self.f_delta_mhz[1:])):
            raise ValueError("f_delta knots must be strictly increasing")
        if any(g < 0.0 for g in self.gain):
            raise ValueError("gains must be non-negative")
        if any(b < a for a, b in zip(self.gain, self.gain[1:])):
            raise ValueError("gains must be non-decreasing")

    @property
    def max_f_delta(self) -> float:
        return self.f_delta_mhz[-1]

    @classmethod
    def from_csv(cls, path) -> "GainTable":
        """Load knots from CSV columns ``f_delta_mhz, gain_fraction``.

        The origin knot is inserted when the file does not carry it.
        """
        fs: list[float] = []
        gs: list[float] = []
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                fs.append(float(row["f_delta_mhz"]))
                gs.append(float(row["gain_fraction"]))
        order = sorted(range(len(fs)), key=fs.__getitem__)
        fs = [fs[i] for i in order]
        gs = [gs[i] for i in order]
        if not fs or fs[0] != 0.0:
            fs.insert(0, 0.0)
            gs.insert(0, 0.0)
        return cls(tuple(fs), tuple(gs))


DEFAULT_GAIN_TABLE = GainTable()


def per_station_gain(f_delta_mhz: float, table: GainTable = DEFAULT_GAIN_TABLE) -> float:
    """Fractional mean-photon-number gain of one station at a given shift."""
    if f_delta_mhz < 0.0:
        raise ValueError(f"f_delta must be >= 0, got {f_delta_mhz}")
    if f_delta_mhz > table.max_f_delta:
        raise ValueError(
            f"f_delta {f_delta_mhz} MHz exceeds the lock range "
            f"(loop unlocks beyond {table.max_f_delta} MHz)"
        )
    return float(np.interp(f_delta_mhz, table.f_delta_mhz, table.gain))


def system_gain_factor(
    f_delta_alice_mhz: float,
    f_delta_bob_mhz: float,
    table: GainTable = DEFAULT_GAIN_TABLE,
) -> float:
    """Multiplicative intensity factor g for the whole two-station system.

    Per-station gains compose additively into the system factor,
    ``g = 1 + G_alice + G_bob``, so the symmetric maximum-shift attack yields
    g = 1.087 from 4.35% per station.
    """
    return 1.0 + (
        per_station_gain(f_delta_alice_mhz, table)
        + per_station_gain(f_delta_bob_mhz, table)
    )


def attenuation_delta_to_gain(delta_db: float) -> float:
    """Linear power gain fraction equivalent to an attenuation change in dB."""
    return 10.0 ** (-delta_db / 10.0) - 1.0


def gain_from_physics(
    f_delta_mhz: float,
    model: AomModel,
    v_before: float | None = None,
    v_after: float | None = None,
) -> float:
    """Physics-predicted output gain of the modulator during a held shift.

    Converts the combined frequency- and voltage-induced attenuation change
    into a linear power gain.  Defaults to the drive pattern's base and
    high-phase voltages.  This is the modulator-output figure used to
    cross-check the measured end-to-end station gains; the two are reported
    side by side and differ by unquantified downstream losses.
    """
    from .aom import combined_attenuation_delta

    if v_before is None:
        v_before = model.drive.base_v
    if v_after is None:
        v_after = model.drive.base_v + model.drive.high_excursion_v(f_delta_mhz)
    delta = combined_attenuation_delta(f_delta_mhz, v_before, v_after, model)
    return attenuation_delta_to_gain(delta)
