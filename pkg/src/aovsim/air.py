"""Acoustic and optical material properties of laboratory air.

Two bulk properties of the medium drive everything downstream: how much a
pressure change shifts the refractive index, and how fast ultrasound is
absorbed on its way from the transducer to the laser beam.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Piezooptic coefficient of air at 1550 nm [1/Pa]. Valid near the reference
# state below; treated as constant inside the reference window.
PIEZOOPTIC_COEFFICIENT = 2.072e-9

REFERENCE_TEMPERATURE = 293.15  # [K]
REFERENCE_PRESSURE = 101325.0  # [Pa]
REFERENCE_HUMIDITY = 0.40  # fractional relative humidity
REFERENCE_CO2_FRACTION = 0.00045

# Window around the reference state inside which the coefficient is used
# without complaint.
TEMPERATURE_WINDOW = 5.0  # [K]
PRESSURE_WINDOW_FRACTION = 0.05

# Prefactor of the quadratic-in-frequency ultrasonic absorption model
# [dB/mm/Hz^2], defined at the reference temperature.
ABSORPTION_PREFACTOR = 15.895e-14

SOUND_SPEED_REFERENCE = 343.0  # [m/s] at the reference temperature


@dataclass(frozen=True)
class AirState:
    """Thermodynamic state of the air in the interaction region.

    sound_speed may be omitted; it then defaults to the ideal-gas scaling
    SOUND_SPEED_REFERENCE * sqrt(T / 293.15 K).
    """

    temperature: float = REFERENCE_TEMPERATURE  # [K]
    static_pressure: float = REFERENCE_PRESSURE  # [Pa]
    relative_humidity: float = REFERENCE_HUMIDITY  # 0..1
    co2_fraction: float = REFERENCE_CO2_FRACTION  # 0..0.01
    sound_speed: float | None = None  # [m/s]

    def __post_init__(self) -> None:
        if self.temperature <= 0.0:
            raise ValueError(f"temperature must be positive, got {self.temperature}")
        if self.static_pressure <= 0.0:
            raise ValueError(f"static_pressure must be positive, got {self.static_pressure}")
        if not 0.0 <= self.relative_humidity <= 1.0:
            raise ValueError(f"relative_humidity must lie in [0, 1], got {self.relative_humidity}")
        if not 0.0 <= self.co2_fraction < 0.01:
            raise ValueError(f"co2_fraction must lie in [0, 0.01), got {self.co2_fraction}")
        if self.sound_speed is None:
            derived = SOUND_SPEED_REFERENCE * math.sqrt(self.temperature / REFERENCE_TEMPERATURE)
            object.__setattr__(self, "sound_speed", derived)
        elif self.sound_speed <= 0.0:
            raise ValueError(f"sound_speed must be positive, got {self.sound_speed}")

    def with_temperature(self, temperature: float) -> "AirState":
        """Same air at a different temperature, sound speed rescaled as sqrt(T)."""
        scaled = self.sound_speed * math.sqrt(temperature / self.temperature)
        return AirState(
            temperature=temperature,
            static_pressure=self.static_pressure,
            relative_humidity=self.relative_humidity,
            co2_fraction=self.co2_fraction,
            sound_speed=scaled,
        )

    def acoustic_wavelength(self, frequency: float) -> float:
        """Wavelength [m] of a sound wave of the given frequency [Hz]."""
        if frequency <= 0.0:
            raise ValueError(f"frequency must be positive, got {frequency}")
        return self.sound_speed / frequency


@dataclass(frozen=True)
class PiezoopticCoefficient:
    value: float  # [1/Pa]
    in_reference: bool


@dataclass(frozen=True)
class AbsorptionCoefficient:
    value: float  # [dB/mm], amplitude convention (filed pressure decays 10^(-value*d/20))
    temperature: float  # [K]
    frequency: float  # [Hz]


def piezooptic_coefficient(air: AirState) -> PiezoopticCoefficient:
    """Pressure derivative of the refractive index for the given air state.

    The constant itself is only tabulated at the reference state, so the
    returned record carries an in_reference flag instead of silently
    extrapolating. The flag is advisory; the value is always the constant.
    """
    in_window = (
        abs(air.temperature - REFERENCE_TEMPERATURE) <= TEMPERATURE_WINDOW
        and abs(air.static_pressure - REFERENCE_PRESSURE)
        <= PRESSURE_WINDOW_FRACTION * REFERENCE_PRESSURE
    )
    return PiezoopticCoefficient(value=PIEZOOPTIC_COEFFICIENT, in_reference=in_window)


def absorption_coefficient(temperature: float, frequency: float) -> AbsorptionCoefficient:
    """Ultrasonic amplitude absorption coefficient [dB/mm].

    Linear in absolute temperature and quadratic in frequency:
    alpha = ABSORPTION_PREFACTOR * (T / 293.15 K) * f^2.
    """
    if temperature <= 0.0:
        raise ValueError(f"temperature must be positive, got {temperature}")
    if frequency < 0.0:
        raise ValueError(f"frequency must be non-negative, got {frequency}")
    value = ABSORPTION_PREFACTOR * (temperature / REFERENCE_TEMPERATURE) * frequency**2
    return AbsorptionCoefficient(value=value, temperature=temperature, frequency=frequency)


def attenuated_pressure(source_pressure: float, alpha_db_per_mm: float, distance_mm: float) -> float:
    """Pressure amplitude [Pa] after propagating distance_mm through air.

    alpha_db_per_mm is the amplitude absorption coefficient, so the field
    decays as 10^(-alpha * d / 20); the corresponding power decay
    10^(-alpha * d / 10) is derived, never stored separately.
    """
    if source_pressure < 0.0:
        raise ValueError(f"source_pressure must be non-negative, got {source_pressure}")
    if alpha_db_per_mm < 0.0:
        raise ValueError(f"alpha_db_per_mm must be non-negative, got {alpha_db_per_mm}")
    if distance_mm < 0.0:
        raise ValueError(f"distance_mm must be non-negative, got {distance_mm}")
    return source_pressure * 10.0 ** (-alpha_db_per_mm * distance_mm / 20.0)
