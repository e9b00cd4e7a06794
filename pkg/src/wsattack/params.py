"""Shared physical and protocol parameters.

Unit conventions are fixed package-wide: distances in km, fiber attenuation
in dB/km, frequencies in MHz, optical power in mW, device insertion loss in
dB.  Mean photon numbers, probabilities and rates are dimensionless.

All containers are frozen dataclasses that validate their invariants on
construction; every function here is pure, so parameter sweeps can be
evaluated concurrently without shared state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class IntensitySettings:
    """Per-pulse mean photon numbers: signal ``mu0``, decoys ``mu1 > mu2``."""

    mu0: float = 0.4
    mu1: float = 1e-2
    mu2: float = 1e-4

    def __post_init__(self) -> None:
        for name in ("mu0", "mu1", "mu2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if not (self.mu0 > self.mu1 > self.mu2 > 0.0):
            raise ValueError(
                "intensities must satisfy mu0 > mu1 > mu2 > 0, got "
                f"({self.mu0}, {self.mu1}, {self.mu2})"
            )

    def scaled(self, g: float) -> "IntensitySettings":
        """Intensities under a multiplicative brightness factor ``g``."""
        return IntensitySettings(g * self.mu0, g * self.mu1, g * self.mu2)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.mu0, self.mu1, self.mu2)


@dataclass(frozen=True)
class ChannelParams:
    """Fiber and detector parameters for one symmetric link pair.

    ``alpha`` is the fiber attenuation in dB/km, ``length_km`` the total
    sender-to-sender distance (each arm spans half of it), ``eta_det`` the
    detector efficiency, ``p_dark`` the dark-count probability per gate and
    ``e_opt`` the channel optical error rate.
    """

    alpha: float = 0.2
    length_km: float = 400.0
    eta_det: float = 0.3
    p_dark: float = 1e-8
    e_opt: float = 0.03

    def __post_init__(self) -> None:
        if not self.alpha > 0.0:
            raise ValueError(f"alpha must be > 0 dB/km, got {self.alpha}")
        if self.length_km < 0.0:
            raise ValueError(f"length_km must be >= 0, got {self.length_km}")
        if not 0.0 < self.eta_det <= 1.0:
            raise ValueError(f"eta_det must be in (0, 1], got {self.eta_det}")
        if not 0.0 <= self.p_dark < 1.0:
            raise ValueError(f"p_dark must be in [0, 1), got {self.p_dark}")
        if not 0.0 <= self.e_opt < 0.5:
            raise ValueError(f"e_opt must be in [0, 0.5), got {self.e_opt}")

    def at_distance(self, length_km: float) -> "ChannelParams":
        return replace(self, length_km=length_km)


@dataclass(frozen=True)
class ProtocolParams:
    """Protocol-level knobs shared by the two key-rate evaluations.

    ``duty_cycle_d`` and ``phase_slices_m`` only enter the phase-sliced
    twin-field bound; ``n_total``, ``gamma``, ``t_delta``, ``send_prob`` and
    ``enable_aopp`` only enter the sending-or-not-sending bound.  ``t_delta``
    is the effective detector rate of the phase-flip bound; leaving it
    ``None`` selects the built-in model documented in ``keyrate_sns``.
    ``gamma`` is the finite-size deduction, an input rather than a derived
    quantity, with 0 giving an asymptotic-style evaluation.
    """

    duty_cycle_d: float = 0.5
    phase_slices_m: int = 16
    f_ec: float = 1.16
    n_total: float = 5.4e14
    gamma: float = 0.0
    t_delta: float | None = None
    send_prob: float = 0.12
    enable_aopp: bool = False

    def __post_init__(self) -> None:
        if not 0.0 < self.duty_cycle_d <= 1.0:
            raise ValueError(f"duty_cycle_d must be in (0, 1], got {self.duty_cycle_d}")
        if not (isinstance(self.phase_slices_m, int) and self.phase_slices_m >= 2):
            raise ValueError(f"phase_slices_m must be an integer >= 2, got {self.phase_slices_m}")
        if self.f_ec < 1.0:
            raise ValueError(f"f_ec must be >= 1, got {self.f_ec}")
        if not self.n_total > 0.0:
            raise ValueError(f"n_total must be > 0, got {self.n_total}")
        if self.gamma < 0.0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.t_delta is not None and self.t_delta < 0.0:
            raise ValueError(f"t_delta must be >= 0, got {self.t_delta}")
        if not 0.0 < self.send_prob < 1.0:
            raise ValueError(f"send_prob must be in (0, 1), got {self.send_prob}")


@dataclass(frozen=True)
class SystemParams:
    """Channel, detector, protocol and intensity settings for one scenario."""

    intensities: IntensitySettings = IntensitySettings()
    channel: ChannelParams = ChannelParams()
    protocol: ProtocolParams = ProtocolParams()

    def at_distance(self, length_km: float) -> "SystemParams":
        return replace(self, channel=self.channel.at_distance(length_km))


def binary_entropy(x: float) -> float:
    """Binary Shannon entropy in bits, 0 at both endpoints by continuity."""
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"binary_entropy expects x in [0, 1], got {x!r}")
    if x == 0.0 or x == 1.0:
        return 0.0
    return -x * math.log2(x) - (1.0 - x) * math.log2(1.0 - x)


def single_arm_transmittance(channel: ChannelParams) -> float:
    """Total detection efficiency of one arm.

    Each party's pulses travel half the total distance, so the fiber term
    uses ``length_km / 2``:  ``eta_det * 10**(-(alpha * L/2) / 10)``.
    """
    exponent = -(channel.alpha * channel.length_km / 2.0) / 10.0
    return channel.eta_det * 10.0 ** exponent
