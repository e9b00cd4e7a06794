"""Discrete-time simulation of the frequency-locking loop under a
wavelength-switching attack.

Model
-----
The reference light toggles between its nominal frequency and a shifted one
(separation ``f_delta``) with one switch event every ``1 / r_s``; a full
attack cycle spans two events.  The loop state advances on a fixed time step:

* After each reference switch the frequency-locking controller reacts with a
  delay drawn uniformly from its response range (seeded, one draw per
  event).  When the correction lands, the local modulator command jumps to
  re-track the *current* reference state; a newer switch supersedes a pending
  correction.  If the dwell is shorter than the controller's minimum response
  time the loop can no longer track individual switches: each switch's
  command is then delivered with a configurable probability and latches the
  state it captured, which sustains offsets across many cycles.
* The slow actuator continuously drains whatever offset the modulator
  carries toward the modulator's center frequency at ``pzt_handoff`` rate,
  absorbing it into the laser itself; the net lock offset is unchanged by
  the hand-off.  The drain rate is deliberately slow compared to one attack
  cycle so the modulator genuinely holds the shifted operating point during
  a dwell, which is what the measured output-power steps show.
* Output power follows the modulator model's attenuation at the current
  command frequency plus the drive-voltage phase of the switching cycle
  (base while idle, high while holding a shift, a short undershoot right
  after release).

Beat-note bookkeeping: the recorded heterodyne reading is the lock offset
plus the *positive* part of the tracking error.  While the loop lags a new
reference excursion the beat rides above the lock point by ``f_delta``;
after a release the loop re-centers through the fast lock path and the brief
negative-error transient is not resolved as a separate tone, matching the
two-peak spectra observed on the real system.  Loss of lock (required shift
beyond the lock bandwidth) is a trace state, not an error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .aom import AomModel
from .attack import AttackConfig


@dataclass(frozen=True)
class OpllConfig:
    """Loop timing, locking and heterodyne parameters."""

    het_center_mhz: float = 112.0
    lock_bandwidth_mhz: float = 30.0
    lock_time_us: float = 0.2
    flc_response_min_us: float = 3.0
    flc_response_max_us: float = 10.0
    pzt_handoff_mhz_per_ms: float = 10.0
    aom_center_mhz: float = 200.0
    beat_power_dbm: float = -9.14
    min_beat_power_dbm: float = -30.0
    timestep_us: float = 0.05
    fast_delivery_prob: float = 0.5

    def __post_init__(self) -> None:
        if not self.lock_bandwidth_mhz > 0.0:
            raise ValueError("lock_bandwidth_mhz must be > 0")
        if not 0.0 < self.flc_response_min_us <= self.flc_response_max_us:
            raise ValueError("need 0 < flc_response_min_us <= flc_response_max_us")
        if not 0.0 < self.timestep_us <= self.flc_response_min_us / 2.0:
            raise ValueError("timestep_us must be in (0, flc_response_min_us / 2]")
        if not self.lock_time_us > 0.0:
            raise ValueError("lock_time_us must be > 0")
        if self.pzt_handoff_mhz_per_ms < 0.0:
            raise ValueError("pzt_handoff_mhz_per_ms must be >= 0")
        if not self.aom_center_mhz > 0.0:
            raise ValueError("aom_center_mhz must be > 0")
        if not 0.0 <= self.fast_delivery_prob <= 1.0:
            raise ValueError("fast_delivery_prob must be in [0, 1]")


@dataclass
class OpllTrace:
    """Time series of the loop state under one simulation run."""

    t_us: np.ndarray
    locked: np.ndarray
    aom_cmd_mhz: np.ndarray
    pzt_offset_mhz: np.ndarray
    power_mw: np.ndarray
    beat_mhz: np.ndarray
    config: OpllConfig
    attack: AttackConfig
    seed: int

    def __len__(self) -> int:
        return len(self.t_us)


def run_opll(
    config: OpllConfig,
    attack: AttackConfig,
    model: AomModel,
    duration_us: float,
    seed: int = 0,
) -> OpllTrace:
    """Simulate the locked loop for ``duration_us`` under an attack pattern.

    Deterministic for identical inputs and seed: the controller delays (and,
    in the fast-switching regime, the command-delivery coin flips) are the
    only random elements and are drawn from one seeded generator in event
    order.
    """
    if duration_us <= 0.0:
        raise ValueError("duration_us must be > 0")
    dt = config.timestep_us
    n = int(round(duration_us / dt))
    t = np.arange(n) * dt

    f_delta = attack.f_delta_mhz
    dwell = attack.dwell_us
    rng = np.random.default_rng(seed)

    # Reference shift per step: the first dwell is idle, odd dwells shifted.
    dwell_index = np.floor(t / dwell + 1e-12).astype(int)
    shift = np.where(dwell_index % 2 == 1, f_delta, 0.0) if f_delta > 0.0 else np.zeros(n)

    # Controller corrections, one candidate per switch event.
    trackable = dwell >= config.flc_response_min_us
    corrections: list[tuple[float, float]] = []  # (fire time, captured target)
    if f_delta > 0.0:
        k = 1
        while k * dwell < duration_us:
            t_switch = k * dwell
            target = f_delta if k % 2 == 1 else 0.0
            delay = rng.uniform(config.flc_response_min_us, config.flc_response_max_us)
            if trackable:
                # A newer switch supersedes a pending correction.
                if t_switch + delay < (k + 1) * dwell:
                    corrections.append((t_switch + delay, target))
            else:
                if rng.random() < config.fast_delivery_prob:
                    corrections.append((t_switch + delay, target))
            k += 1
        corrections.sort(key=lambda item: item[0])

    beat_detectable = config.beat_power_dbm >= config.min_beat_power_dbm
    drain_per_step = config.pzt_handoff_mhz_per_ms / 1000.0 * dt

    comp = 0.0          # total compensation magnitude currently applied
    aom_part = 0.0      # share of the compensation still on the modulator
    low_until = -math.inf
    next_corr = 0

    locked = np.empty(n, dtype=bool)
    aom_cmd = np.empty(n)
    pzt_off = np.empty(n)
    beat = np.empty(n)
    volt_phase = np.empty(n, dtype=np.int8)  # 0 base, 1 high, 2 low

    for i in range(n):
        now = t[i]
        while next_corr < len(corrections) and corrections[next_corr][0] <= now:
            _, target = corrections[next_corr]
            next_corr += 1
            if not trackable:
                new_comp = target
            else:
                # Re-lock against the current reference state.
                new_comp = shift[i]
            if abs(shift[i] - new_comp) > config.lock_bandwidth_mhz:
                continue  # no valid error signal; command dropped
            if new_comp != comp:
                aom_part += new_comp - comp
                if new_comp == 0.0:
                    low_until = now + model.drive.recovery_us
                comp = new_comp

        # Slow-actuator hand-off: the modulator share decays toward zero.
        if aom_part > 0.0:
            aom_part = max(0.0, aom_part - drain_per_step)
        elif aom_part < 0.0:
            aom_part = min(0.0, aom_part + drain_per_step)

        error = shift[i] - comp
        locked[i] = beat_detectable and abs(error) <= config.lock_bandwidth_mhz
        beat[i] = config.het_center_mhz + max(0.0, error)
        aom_cmd[i] = config.aom_center_mhz - aom_part
        pzt_off[i] = -(comp - aom_part)
        if comp != 0.0:
            volt_phase[i] = 1
        elif now < low_until:
            volt_phase[i] = 2
        else:
            volt_phase[i] = 0

    base_v, high_v, low_v = model.drive.phases(f_delta)
    volts = np.choose(volt_phase, [base_v, high_v, low_v])
    attenuation = (
        np.asarray(model.frequency_attenuation(aom_cmd))
        + np.asarray(model.voltage_table.attenuation(volts, warn=False))
        - float(model.voltage_table.attenuation(base_v, warn=False))
    )
    power = model.physics.input_power_mw * 10.0 ** (-attenuation / 10.0)

    return OpllTrace(
        t_us=t,
        locked=locked,
        aom_cmd_mhz=aom_cmd,
        pzt_offset_mhz=pzt_off,
        power_mw=power,
        beat_mhz=beat,
        config=config,
        attack=attack,
        seed=seed,
    )


def heterodyne_spectrum(trace: OpllTrace, window: tuple[float, float] | None = None):
    """Occupied beat frequencies over a window, with occupancy-split powers.

    Each locked sample contributes its beat frequency; the configured total
    beat power divides between the occupied frequencies in proportion to
    occupancy (a 50/50 split puts each peak 3 dB below the total).  Returns
    ``[(freq_mhz, power_dbm), ...]`` sorted by frequency; unlocked samples
    carry no resolvable tone and are excluded.
    """
    if window is None:
        mask = np.ones(len(trace), dtype=bool)
    else:
        t0, t1 = window
        mask = (trace.t_us >= t0) & (trace.t_us < t1)
        if not mask.any():
            raise ValueError(f"window [{t0}, {t1}) contains no trace samples")
    beats = trace.beat_mhz[mask & trace.locked]
    if beats.size == 0:
        return []
    freqs, counts = np.unique(beats, return_counts=True)
    total = counts.sum()
    total_dbm = trace.config.beat_power_dbm
    return [
        (float(f), total_dbm + 10.0 * math.log10(c / total))
        for f, c in zip(freqs, counts)
    ]


def interference_stability(
    trace_a: OpllTrace, trace_b: OpllTrace, tolerance_mhz: float = 1.0
) -> float:
    """Fraction of time both loops hold lock with matching slow-actuator
    offsets; the proxy for how well the midpoint interference holds up."""
    if len(trace_a) != len(trace_b):
        raise ValueError("traces must have equal length")
    matched = (
        trace_a.locked
        & trace_b.locked
        & (np.abs(trace_a.pzt_offset_mhz - trace_b.pzt_offset_mhz) < tolerance_mhz)
    )
    return float(matched.mean())
