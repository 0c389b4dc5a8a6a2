"""Acousto-optic coupling of an ultrasound field to a Gaussian laser beam.

The ultrasound writes a travelling refractive-index grating across the beam.
Where the beam is wider than about the acoustic wavelength the positive and
negative half-periods of the grating cancel inside the mode, so only a
finite stretch of the beam near the waist contributes to the optical path
length signal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .air import AirState, absorption_coefficient, attenuated_pressure, piezooptic_coefficient


@dataclass(frozen=True)
class GaussianBeam:
    """Fundamental-mode beam parameters.

    Parameters
    ----------
    wavelength : float
        Optical wavelength [m].
    waist_radius : float
        1/e^2 intensity radius at the focus [m].
    waist_position : float
        Position of the waist along the propagation axis [m].
    power : float
        Optical power carried by the beam [W]. Not used by the geometry
        helpers; kept because the sensing arm power is part of the scene.
    """

    wavelength: float = 1.55e-6
    waist_radius: float = 31e-6
    waist_position: float = 0.0
    power: float = 0.006

    def __post_init__(self) -> None:
        if self.wavelength <= 0.0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if self.waist_radius <= 0.0:
            raise ValueError(f"waist_radius must be positive, got {self.waist_radius}")
        if self.power < 0.0:
            raise ValueError(f"power must be non-negative, got {self.power}")

    @property
    def rayleigh_range(self) -> float:
        """pi * w0^2 / lambda [m]."""
        return math.pi * self.waist_radius**2 / self.wavelength


def beam_radius(beam: GaussianBeam, z: float) -> float:
    """1/e^2 intensity radius [m] at axial position z [m].

    w(z) = w0 * sqrt(1 + ((z - z_waist) / z_R)^2)
    """
    u = (z - beam.waist_position) / beam.rayleigh_range
    return beam.waist_radius * math.sqrt(1.0 + u * u)


def washout_factor(beam_radius_w: float, acoustic_wavelength: float) -> float:
    """Transverse averaging factor of the index grating over the beam.

    Intensity-weighted average of cos(2 pi x / Lambda) over a Gaussian of
    1/e^2 radius w, which evaluates to exp(-pi^2 w^2 / (2 Lambda^2)).
    Equals 1 only in the plane-wave limit, and drops steeply once w grows
    past ~Lambda/2.
    """
    if beam_radius_w <= 0.0:
        raise ValueError(f"beam_radius_w must be positive, got {beam_radius_w}")
    if acoustic_wavelength <= 0.0:
        raise ValueError(f"acoustic_wavelength must be positive, got {acoustic_wavelength}")
    return math.exp(-math.pi**2 * beam_radius_w**2 / (2.0 * acoustic_wavelength**2))


# Integration span for the interaction length, in Rayleigh ranges on each
# side of the waist. With washout still significant at the span edge the
# integral has not converged and the result is flagged.
SPAN_RAYLEIGH_RANGES = 10.0
EDGE_WASHOUT_LIMIT = 1e-3


@dataclass(frozen=True)
class EffectiveLength:
    value: float  # [m]
    diverged: bool


def effective_interaction_length(beam: GaussianBeam, acoustic_wavelength: float) -> EffectiveLength:
    """Axial integral of the washout factor along the focused beam [m].

    With a = pi^2 w0^2 / (2 Lambda^2) the integrand is
    exp(-a (1 + (z/z_R)^2)), and over +-10 z_R the integral has the closed
    form exp(-a) * z_R * sqrt(pi/a) * erf(10 sqrt(a)). The erf factor keeps
    the value finite for arbitrarily long acoustic wavelengths, where the
    result approaches the span itself and is flagged as diverged.
    """
    if acoustic_wavelength <= 0.0:
        raise ValueError(f"acoustic_wavelength must be positive, got {acoustic_wavelength}")
    z_r = beam.rayleigh_range
    a = math.pi**2 * beam.waist_radius**2 / (2.0 * acoustic_wavelength**2)
    span = SPAN_RAYLEIGH_RANGES
    if a == 0.0:
        value = 2.0 * span * z_r
    else:
        value = math.exp(-a) * z_r * math.sqrt(math.pi / a) * math.erf(span * math.sqrt(a))
    edge_washout = math.exp(-a * (1.0 + span * span))
    return EffectiveLength(value=value, diverged=edge_washout > EDGE_WASHOUT_LIMIT)


def delta_n(air: AirState, pressure_amplitude: float) -> float:
    """Refractive-index modulation amplitude for a pressure amplitude [Pa]."""
    if pressure_amplitude < 0.0:
        raise ValueError(f"pressure_amplitude must be non-negative, got {pressure_amplitude}")
    return piezooptic_coefficient(air).value * pressure_amplitude


def path_length_amplitude(index_modulation: float, effective_length: float) -> float:
    """Optical path-length modulation amplitude [m] = delta_n * z_M."""
    if index_modulation < 0.0:
        raise ValueError(f"index_modulation must be non-negative, got {index_modulation}")
    if effective_length < 0.0:
        raise ValueError(f"effective_length must be non-negative, got {effective_length}")
    return index_modulation * effective_length


@dataclass(frozen=True)
class AcousticScene:
    """Ultrasound source and its geometric relation to the beam."""

    frequency: float  # [Hz]
    source_pressure_amplitude: float  # [Pa] at the source face
    source_position_mm: float = 0.0  # [mm] source-to-beam standoff
    acoustic_wavelength: float | None = None  # [m]; from air when omitted
    phase_offset: float = 0.0  # [rad]

    def __post_init__(self) -> None:
        if self.frequency <= 0.0:
            raise ValueError(f"frequency must be positive, got {self.frequency}")
        if self.source_pressure_amplitude < 0.0:
            raise ValueError(
                f"source_pressure_amplitude must be non-negative, got {self.source_pressure_amplitude}"
            )
        if self.source_position_mm < 0.0:
            raise ValueError(f"source_position_mm must be non-negative, got {self.source_position_mm}")
        if self.acoustic_wavelength is not None and self.acoustic_wavelength <= 0.0:
            raise ValueError(f"acoustic_wavelength must be positive, got {self.acoustic_wavelength}")

    def wavelength_in(self, air: AirState) -> float:
        """Acoustic wavelength [m], explicit value winning over the air model."""
        if self.acoustic_wavelength is not None:
            return self.acoustic_wavelength
        return air.acoustic_wavelength(self.frequency)


def acoustic_pressure_at(scene: AcousticScene, air: AirState, distance_mm: float) -> tuple[float, float]:
    """(amplitude [Pa], phase [rad]) of the sound field at a propagation distance.

    Amplitude follows the absorption law for the air state; phase advances
    by 2 pi per acoustic wavelength of travel on top of the scene's offset.
    """
    alpha = absorption_coefficient(air.temperature, scene.frequency).value
    amplitude = attenuated_pressure(scene.source_pressure_amplitude, alpha, distance_mm)
    wavelength_mm = scene.wavelength_in(air) * 1e3
    phase = scene.phase_offset + 2.0 * math.pi * distance_mm / wavelength_mm
    return amplitude, phase


@dataclass(frozen=True)
class InteractionResult:
    delta_n: float  # dimensionless index modulation amplitude
    effective_length: float  # [m]
    path_amplitude: float  # [m], product of the two
    pressure_amplitude: float  # [Pa] at the beam
    phase: float  # [rad] acoustic phase at the beam
    diverged: bool


def interaction_at(air: AirState, beam: GaussianBeam, scene: AcousticScene, distance_mm: float) -> InteractionResult:
    """Full acousto-optic conversion at one standoff distance."""
    amplitude, phase = acoustic_pressure_at(scene, air, distance_mm)
    dn = delta_n(air, amplitude)
    eff = effective_interaction_length(beam, scene.wavelength_in(air))
    return InteractionResult(
        delta_n=dn,
        effective_length=eff.value,
        path_amplitude=path_length_amplitude(dn, eff.value),
        pressure_amplitude=amplitude,
        phase=phase,
        diverged=eff.diverged,
    )
