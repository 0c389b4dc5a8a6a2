"""Quantum noise of the readout: shot noise and squeezed vacuum states.

Variances are normalized so the vacuum (shot-noise) level is 1. Loss mixes
in vacuum, pump phase rotates the measured quadrature, and residual phase
jitter averages the variance over a Gaussian distribution of quadrature
angles.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

PLANCK_CONSTANT = 6.62607015e-34  # [J s], exact
SPEED_OF_LIGHT = 2.99792458e8  # [m/s], exact


class InfeasiblePairError(ValueError):
    """Raised when a variance pair violates the uncertainty bound V_s * V_a >= 1."""


def shot_noise_asd(wavelength: float, input_power: float) -> float:
    """Shot-noise-limited displacement sensitivity [m/sqrt(Hz)].

    sqrt(h c lambda / (2 pi^2 P)) for an interferometer held at mid fringe
    with input power P. One-sided amplitude spectral density.
    """
    if wavelength <= 0.0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    if input_power <= 0.0:
        raise ValueError(f"input_power must be positive, got {input_power}")
    return math.sqrt(
        PLANCK_CONSTANT * SPEED_OF_LIGHT * wavelength / (2.0 * math.pi**2 * input_power)
    )


@dataclass(frozen=True)
class SqueezerConfig:
    """Squeezed-vacuum source and everything that degrades it.

    source_squeeze_parameter is the squeeze factor r of the state leaving
    the source; total_efficiency lumps propagation, mode matching and
    detection into one vacuum admixture; pump_phase detunes the pump by
    delta-theta, rotating the measured quadrature by delta-theta/2;
    rms_phase_noise is the Gaussian width of residual quadrature jitter.
    """

    source_squeeze_parameter: float = 1.868
    total_efficiency: float = 0.922
    pump_phase: float = 0.0
    rms_phase_noise: float = 0.0

    def __post_init__(self) -> None:
        if self.source_squeeze_parameter < 0.0:
            raise ValueError(
                f"source_squeeze_parameter must be non-negative, got {self.source_squeeze_parameter}"
            )
        if not 0.0 < self.total_efficiency <= 1.0:
            raise ValueError(f"total_efficiency must lie in (0, 1], got {self.total_efficiency}")
        if self.rms_phase_noise < 0.0:
            raise ValueError(f"rms_phase_noise must be non-negative, got {self.rms_phase_noise}")


class QuadraturePair(NamedTuple):
    squeezed: float
    anti_squeezed: float


def variance_at(config: SqueezerConfig, quadrature_angle: float) -> float:
    """Normalized variance measured at a given quadrature angle psi.

    Gaussian jitter of width sigma averages cos(2 psi) by exp(-2 sigma^2):
    V(psi) = (1 - eta) + eta * (cosh 2r - sinh 2r * cos 2 psi * exp(-2 sigma^2))
    """
    eta = config.total_efficiency
    r = config.source_squeeze_parameter
    jitter = math.exp(-2.0 * config.rms_phase_noise**2)
    return (1.0 - eta) + eta * (
        math.cosh(2.0 * r) - math.sinh(2.0 * r) * math.cos(2.0 * quadrature_angle) * jitter
    )


def quadrature_variance(config: SqueezerConfig) -> QuadraturePair:
    """(squeezed, anti-squeezed) variances in the measurement basis.

    The measured quadrature sits at psi = pump_phase / 2, so a pump phase of
    pi swaps the two slots: the nominally squeezed quadrature then carries
    the anti-squeezed variance.
    """
    psi = config.pump_phase / 2.0
    return QuadraturePair(
        squeezed=variance_at(config, psi),
        anti_squeezed=variance_at(config, psi + math.pi / 2.0),
    )


# Feasibility slack for measured pairs sitting numerically on the pure-state
# boundary V_s * V_a = 1.
_BOUNDARY_SLACK = 1e-6


class LossSqueezeEstimate(NamedTuple):
    total_efficiency: float
    source_squeeze_parameter: float


def infer_loss_and_squeeze(v_squeezed: float, v_antisqueezed: float) -> LossSqueezeEstimate:
    """Invert a jitter-free measured variance pair to (eta, r).

    From V_s = (1-eta) + eta e^(-2r) and V_a = (1-eta) + eta e^(+2r):
    eta = (1 - V_s)(1 - V_a) / (2 - V_s - V_a), then r follows from either
    equation. Pairs with V_s * V_a < 1 are unphysical; within a small
    relative slack of the boundary they are projected onto the pure-state
    solution (eta = 1) so near-vacuum measurements return a finite answer.
    """
    if not v_squeezed < 1.0 < v_antisqueezed:
        raise ValueError(
            f"expected v_squeezed < 1 < v_antisqueezed, got ({v_squeezed}, {v_antisqueezed})"
        )
    product = v_squeezed * v_antisqueezed
    if product < 1.0 - _BOUNDARY_SLACK:
        raise InfeasiblePairError(
            f"variance pair ({v_squeezed}, {v_antisqueezed}) has product {product} < 1"
        )
    if product < 1.0:
        # Numerically on the uncertainty boundary: pure state, tiny loss.
        r = 0.25 * math.log(v_antisqueezed / v_squeezed)
        return LossSqueezeEstimate(total_efficiency=1.0, source_squeeze_parameter=r)
    eta = (1.0 - v_squeezed) * (1.0 - v_antisqueezed) / (2.0 - v_squeezed - v_antisqueezed)
    r = 0.5 * math.log((v_antisqueezed - 1.0 + eta) / eta)
    return LossSqueezeEstimate(total_efficiency=eta, source_squeeze_parameter=r)


def variance_db(variance: float) -> float:
    """Normalized variance expressed in dB relative to shot noise."""
    if variance <= 0.0:
        raise ValueError(f"variance must be positive, got {variance}")
    return 10.0 * math.log10(variance)


def equivalent_shot_noise_power(input_power: float, v_squeezed: float) -> float:
    """Carrier power [W] that would reach the same noise floor without squeezing.

    A squeezed floor at variance V with power P matches the shot-noise floor
    of power P / V.
    """
    if input_power <= 0.0:
        raise ValueError(f"input_power must be positive, got {input_power}")
    if v_squeezed <= 0.0:
        raise ValueError(f"v_squeezed must be positive, got {v_squeezed}")
    return input_power / v_squeezed
