#!/usr/bin/env python3
"""Re-derive the high-phase drive-voltage knots shipped in the default config.

During one switching cycle the modulator holds the shifted operating point
for half the cycle in expectation (controller apply and release delays are
i.i.d.), so a measured cycle-averaged station gain G at shift f_delta pins
the held-phase attenuation change at roughly -10*log10(1 + 2*G), after a
small correction for the post-release voltage undershoot.  Subtracting the
measured frequency step leaves the voltage-induced part, which the voltage
calibration table inverts into a drive voltage.

Run with no arguments; prints the knot list to paste into
``aom.drive.high_v_knots``.
"""

import math

import numpy as np

from wsattack.aom import AomModel, DrivePattern
from wsattack.attack import DEFAULT_GAIN_TABLE

RECOVERY_US = 1.0
CYCLE_US = 20.0  # two 10 us dwells at the 100 kHz reference rate


def main() -> None:
    model = AomModel()
    drive = DrivePattern()
    table = model.voltage_table
    base_att = float(table.attenuation(drive.base_v, warn=False))

    # dense inverse of the (decreasing) voltage table
    vs = np.arange(drive.base_v, table.x[-1] + 1e-9, 1e-4)
    atts = table.attenuation(vs, warn=False)

    print("f_delta_mhz  gain     hold_delta_db  freq_db   volt_db   v_high")
    knots = [(0.0, drive.base_v)]
    for f_delta, gain in zip(DEFAULT_GAIN_TABLE.f_delta_mhz[1:], DEFAULT_GAIN_TABLE.gain[1:]):
        # extra loss during the undershoot phase costs cycle-averaged power;
        # the held phase must make it up on top of the measured gain
        low_db = undershoot_loss_db(model, drive, f_delta)
        undershoot = (RECOVERY_US / CYCLE_US) * (1.0 - 10.0 ** (-low_db / 10.0))
        hold_factor = 1.0 + 2.0 * (gain + undershoot)
        hold_delta = -10.0 * math.log10(hold_factor)
        freq_part = float(
            model.frequency_attenuation(200.0 - f_delta)
            - model.frequency_attenuation(200.0)
        )
        volt_part = hold_delta - freq_part
        v_high = float(np.interp(-(base_att + volt_part), -atts, vs))
        knots.append((f_delta, round(v_high, 4)))
        print(f"{f_delta:10.1f}  {gain:.4f}  {hold_delta:+12.4f}  "
              f"{freq_part:+8.4f}  {volt_part:+8.4f}  {v_high:8.4f}")

    print("\nhigh_v_knots:")
    for f_delta, v in knots:
        print(f"  - [{f_delta}, {v}]")


def undershoot_loss_db(model: AomModel, drive: DrivePattern, f_delta: float) -> float:
    """Attenuation added while the drive voltage undershoots after a release."""
    v_low = drive.base_v + drive.low_excursion_v(f_delta)
    return float(
        model.voltage_table.attenuation(v_low, warn=False)
        - model.voltage_table.attenuation(drive.base_v, warn=False)
    )


if __name__ == "__main__":
    main()
