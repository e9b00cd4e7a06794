"""Sending-or-not-sending twin-field key-rate bound under the same dual
estimated/true evaluation as the phase-sliced variant.

Channel model
-------------
The counting rate of source pair ``jk`` (Alice sends intensity j, Bob sends
k; index 0 is vacuum) follows a symmetric Poissonian beam-splitter model with
independent dark counts::

    S_jk = 1 - (1 - p_dark)^2 * exp(-eta * (mu_j + mu_k))

with ``eta`` the single-arm transmittance.  The decoy pair used by the
untagged-photon bound must be ordered weak-before-strong, so the configured
intensities (``mu1 > mu2``) map to ``(weak, strong) = (mu2, mu1)`` here.

Signal-window model (explicit model choices, not measured quantities): each
party sends the signal intensity with probability ``send_prob``; survived
bits collect clicks from one-sender, both-sender and no-sender windows;
both-sender and no-sender clicks count as half errors and one-sender clicks
err with the channel misalignment fraction.  The effective detector rate of
the phase-flip bound defaults to ``e_opt * S(weak decoy pair)`` and can be
overridden through ``ProtocolParams.t_delta``.

Active odd-parity pairing post-processing is intentionally not implemented;
the ``enable_aopp`` flag only reserves the hook.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .keyrate_tf import KeyRatePoint, KeyRateReport
from .params import (
    IntensitySettings,
    SystemParams,
    binary_entropy,
    single_arm_transmittance,
)


@dataclass(frozen=True)
class SnsCountingRates:
    """Observed counting rates of the decoy source pairs plus the effective
    detector rate used by the phase-flip bound."""

    s00: float
    s01: float
    s10: float
    s02: float
    s20: float
    t_delta: float


@dataclass(frozen=True)
class SnsKeyQuantities:
    """Derived quantities of one analysis of the observed rates."""

    s1_l: float
    e1_u: float
    n1: float
    n_t: float
    e_z: float


def _click_probability(mu_total: float, eta: float, p_dark: float) -> float:
    return 1.0 - (1.0 - p_dark) ** 2 * math.exp(-eta * mu_total)


def _weak_strong(intensities: IntensitySettings) -> tuple[float, float]:
    # The configured decoys satisfy mu1 > mu2; the untagged bound wants them
    # ascending.
    return intensities.mu2, intensities.mu1


def default_effective_detector_rate(
    weak_mu: float, eta: float, p_dark: float, e_opt: float
) -> float:
    """Built-in model for the effective detector rate: the error-affected
    fraction of the click rate when both parties send the weak decoy."""
    return e_opt * (1.0 - (1.0 - p_dark) ** 2 * math.exp(-2.0 * weak_mu * eta * 0.5))


def simulate_counting_rates(params: SystemParams, g: float = 1.0) -> SnsCountingRates:
    """Observed counting rates under a brightness factor g.

    All rates are generated from the attacked intensities ``g * mu``; the
    dual analyses later differ only in which intensities they assume.
    """
    if g < 1.0:
        raise ValueError(f"gain factor g must be >= 1, got {g}")
    channel = params.channel
    eta = single_arm_transmittance(channel)
    weak, strong = _weak_strong(params.intensities.scaled(g))

    s00 = _click_probability(0.0, eta, channel.p_dark)
    s01 = _click_probability(weak, eta, channel.p_dark)
    s02 = _click_probability(strong, eta, channel.p_dark)
    t_delta = (
        params.protocol.t_delta
        if params.protocol.t_delta is not None
        else default_effective_detector_rate(weak, eta, channel.p_dark, channel.e_opt)
    )
    # Symmetric arms: source 10/20 mirror 01/02 exactly.
    return SnsCountingRates(s00=s00, s01=s01, s10=s01, s02=s02, s20=s02, t_delta=t_delta)


def untagged_rate_bound(rates: SnsCountingRates, intensities: IntensitySettings) -> float:
    """Lower bound on the counting rate of untagged (single-photon) events.

    ``intensities`` supplies the decoy values the analysis assumes; the
    weak/strong pair is taken from its two decoy settings.  The result is
    floored at zero.
    """
    weak, strong = _weak_strong(intensities)
    if weak == strong:
        raise ValueError("decoy intensities must differ")
    numerator = (
        strong**2 * math.exp(weak) * (rates.s01 + rates.s10)
        - weak**2 * math.exp(strong) * (rates.s02 + rates.s20)
        - 2.0 * (strong**2 - weak**2) * rates.s00
    )
    s1 = numerator / (2.0 * weak * strong * (strong - weak))
    return max(s1, 0.0)


def phase_flip_bound(rates: SnsCountingRates, weak_mu: float, s1_l: float) -> float:
    """Upper bound on the phase-flip error rate of untagged bits.

    ``(T_delta - 0.5 * exp(-2 mu) * S00) / (2 mu * exp(-2 mu) * S1_L)``,
    clamped to [0, 0.5].
    """
    if s1_l <= 0.0:
        raise ValueError("phase-flip bound undefined for s1_l <= 0")
    numerator = rates.t_delta - 0.5 * math.exp(-2.0 * weak_mu) * rates.s00
    denominator = 2.0 * weak_mu * math.exp(-2.0 * weak_mu) * s1_l
    return min(max(numerator / denominator, 0.0), 0.5)


def sns_key_rate(params: SystemParams, g: float = 1.0) -> KeyRatePoint:
    """Estimated and true sending-or-not-sending key rates per pulse."""
    proto = params.protocol
    if proto.enable_aopp:
        raise NotImplementedError(
            "active odd-parity pairing post-processing is a reserved hook"
        )
    channel = params.channel
    eta = single_arm_transmittance(channel)
    attacked = params.intensities.scaled(g)
    rates = simulate_counting_rates(params, g)

    # Observed signal-window quantities; identical in both analyses.
    eps = proto.send_prob
    s_one = _click_probability(attacked.mu0, eta, channel.p_dark)
    s_both = _click_probability(2.0 * attacked.mu0, eta, channel.p_dark)
    nt_rate = (
        2.0 * eps * (1.0 - eps) * s_one
        + eps**2 * s_both
        + (1.0 - eps) ** 2 * rates.s00
    )
    wrong_rate = (
        0.5 * (1.0 - eps) ** 2 * rates.s00
        + 0.5 * eps**2 * s_both
        + 2.0 * eps * (1.0 - eps) * s_one * channel.e_opt
    )
    e_z = wrong_rate / nt_rate if nt_rate > 0.0 else 0.0

    results: list[tuple[float, SnsKeyQuantities | None, bool]] = []
    for assumed in (params.intensities, attacked):
        weak, _ = _weak_strong(assumed)
        s1_l = untagged_rate_bound(rates, assumed)
        if s1_l <= 0.0:
            results.append((0.0, None, True))
            continue
        e1_u = phase_flip_bound(rates, weak, s1_l)
        single_photon_prob = assumed.mu0 * math.exp(-assumed.mu0)
        n1_rate = 2.0 * eps * (1.0 - eps) * single_photon_prob * s1_l
        rate = (
            n1_rate * (1.0 - binary_entropy(e1_u))
            - proto.f_ec * nt_rate * binary_entropy(e_z)
            - proto.gamma
        )
        quantities = SnsKeyQuantities(
            s1_l=s1_l,
            e1_u=e1_u,
            n1=n1_rate * proto.n_total,
            n_t=nt_rate * proto.n_total,
            e_z=e_z,
        )
        results.append((max(rate, 0.0), quantities, False))

    (r_est, est_q, est_bad), (r_true, true_q, true_bad) = results
    return KeyRatePoint(
        sweep_value=channel.length_km,
        r_estimated=r_est,
        r_true=r_true,
        estimated=est_q,
        true=true_q,
        infeasible=est_bad or true_bad,
    )


def sns_distance_sweep(params: SystemParams, g: float, distances_km) -> KeyRateReport:
    """Evaluate `sns_key_rate` over a list of distances, ordered as given."""
    points = tuple(
        sns_key_rate(params.at_distance(length), g) for length in distances_km
    )
    return KeyRateReport(sweep_variable="distance_km", points=points)
