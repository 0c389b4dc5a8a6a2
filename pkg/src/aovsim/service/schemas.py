"""Pydantic request/response models for the simulation service.

The wire schema mirrors the core dataclasses but stays JSON-friendly:
optional fields resolve to derived defaults, nan/inf never cross the wire,
and every response echoes the fully resolved configuration so runs can be
reproduced from their metadata alone.
"""

from __future__ import annotations

import math
from typing import Literal, Sequence

from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..acousto import AcousticScene, GaussianBeam
from ..air import AirState
from ..experiments import DemoTrace, MeasurementSetup, SqueezingDemo, SweepRow
from ..interferometer import InterferometerConfig
from ..quantum import SqueezerConfig, shot_noise_asd
from ..spectral import PeakMeasurement, SpectrumTrace, SpectrumUnit

SCHEMA_VERSION = 1


class AirSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    temperature_k: float = Field(default=293.15, gt=0.0)
    static_pressure_pa: float = Field(default=101325.0, gt=0.0)
    relative_humidity: float = Field(default=0.40, ge=0.0, le=1.0)
    co2_fraction: float = Field(default=0.00045, ge=0.0, lt=0.01)
    sound_speed_m_per_s: float | None = Field(default=None, gt=0.0)

    def to_core(self) -> AirState:
        return AirState(
            temperature=self.temperature_k,
            static_pressure=self.static_pressure_pa,
            relative_humidity=self.relative_humidity,
            co2_fraction=self.co2_fraction,
            sound_speed=self.sound_speed_m_per_s,
        )


class BeamSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    wavelength_m: float = Field(default=1.55e-6, gt=0.0)
    waist_radius_m: float = Field(default=31e-6, gt=0.0)
    waist_position_m: float = 0.0
    power_w: float = Field(default=0.006, ge=0.0)

    def to_core(self) -> GaussianBeam:
        return GaussianBeam(
            wavelength=self.wavelength_m,
            waist_radius=self.waist_radius_m,
            waist_position=self.waist_position_m,
            power=self.power_w,
        )


class SceneSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    frequency_hz: float = Field(default=5.204e6, gt=0.0)
    source_pressure_pa: float = Field(default=0.4, ge=0.0)
    source_position_mm: float = Field(default=0.0, ge=0.0)
    phase_offset_rad: float = 0.0
    acoustic_wavelength_m: float | None = Field(default=None, gt=0.0)

    def to_core(self) -> AcousticScene:
        return AcousticScene(
            frequency=self.frequency_hz,
            source_pressure_amplitude=self.source_pressure_pa,
            source_position_mm=self.source_position_mm,
            acoustic_wavelength=self.acoustic_wavelength_m,
            phase_offset=self.phase_offset_rad,
        )


class SqueezerSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    squeeze_parameter: float = Field(default=1.868, ge=0.0)
    total_efficiency: float = Field(default=0.922, gt=0.0, le=1.0)
    pump_phase_rad: float = 0.0
    rms_phase_noise_rad: float = Field(default=0.0, ge=0.0)

    def to_core(self) -> SqueezerConfig:
        return SqueezerConfig(
            source_squeeze_parameter=self.squeeze_parameter,
            total_efficiency=self.total_efficiency,
            pump_phase=self.pump_phase_rad,
            rms_phase_noise=self.rms_phase_noise_rad,
        )


class InterferometerSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    input_power_w: float = Field(default=0.012, gt=0.0)
    contrast: float = Field(default=0.99, gt=0.0, le=1.0)
    detector_efficiency: float = Field(default=0.99, gt=0.0, le=1.0)
    carrier_path_loss: float = Field(default=0.02, ge=0.0, lt=1.0)
    dark_noise_asd_m: float | None = Field(default=None, ge=0.0)

    def to_core(self, wavelength_m: float) -> InterferometerConfig:
        dark = self.dark_noise_asd_m
        if dark is None:
            dark = shot_noise_asd(wavelength_m, self.input_power_w) / math.sqrt(10.0)
        return InterferometerConfig(
            input_power=self.input_power_w,
            wavelength=wavelength_m,
            contrast=self.contrast,
            detector_efficiency=self.detector_efficiency,
            carrier_path_loss=self.carrier_path_loss,
            dark_noise_asd=dark,
        )


class AnalysisSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rbw_hz: float = Field(default=1000.0, gt=0.0)
    vbw_hz: float = Field(default=10.0, gt=0.0)
    n_avg: int = Field(default=30, ge=1)
    center_hz: float = Field(default=5.204e6, gt=0.0)
    span_hz: float = Field(default=2e5, gt=0.0)
    sample_rate_hz: float | None = Field(default=None, gt=0.0)
    guard_bins: int = Field(default=8, ge=1)
    subtraction: Literal["power", "amplitude"] = "power"
    visibility_threshold_db: float = 3.0

    @model_validator(mode="after")
    def _check_bandwidths(self) -> "AnalysisSection":
        if self.vbw_hz > self.rbw_hz:
            raise ValueError("vbw_hz must not exceed rbw_hz")
        return self

    def resolved_sample_rate(self) -> float:
        if self.sample_rate_hz is not None:
            return self.sample_rate_hz
        return 4.0 * (self.center_hz + self.span_hz / 2.0)


class RunConfig(BaseModel):
    """Complete, versioned description of one simulated measurement."""

    model_config = ConfigDict(extra="forbid")

    schema_version: int = SCHEMA_VERSION
    seed: int = 20260817
    air: AirSection = Field(default_factory=AirSection)
    beam: BeamSection = Field(default_factory=BeamSection)
    scene: SceneSection = Field(default_factory=SceneSection)
    squeezer: SqueezerSection = Field(default_factory=SqueezerSection)
    interferometer: InterferometerSection = Field(default_factory=InterferometerSection)
    analysis: AnalysisSection = Field(default_factory=AnalysisSection)

    @model_validator(mode="after")
    def _cross_checks(self) -> "RunConfig":
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {self.schema_version}, expected {SCHEMA_VERSION}")
        fs = self.analysis.resolved_sample_rate()
        needed = 4.0 * (self.analysis.center_hz + self.analysis.span_hz / 2.0)
        if fs < needed - 1e-9:
            raise ValueError(
                f"sample_rate_hz {fs} too low for the analysis window; need at least {needed}"
            )
        if fs <= 2.5 * self.scene.frequency_hz:
            raise ValueError(
                f"sample_rate_hz {fs} too low for the {self.scene.frequency_hz} Hz tone"
            )
        return self

    def resolve(self) -> "RunConfig":
        """Copy with every derived default made explicit (for metadata echo)."""
        resolved = self.model_copy(deep=True)
        resolved.air.sound_speed_m_per_s = resolved.air.to_core().sound_speed
        resolved.interferometer.dark_noise_asd_m = resolved.interferometer.to_core(
            resolved.beam.wavelength_m
        ).dark_noise_asd
        resolved.analysis.sample_rate_hz = resolved.analysis.resolved_sample_rate()
        return resolved

    def to_setup(self, noise_variance: float = 1.0) -> MeasurementSetup:
        return MeasurementSetup(
            air=self.air.to_core(),
            beam=self.beam.to_core(),
            interferometer=self.interferometer.to_core(self.beam.wavelength_m),
            rbw=self.analysis.rbw_hz,
            vbw=self.analysis.vbw_hz,
            n_avg=self.analysis.n_avg,
            noise_variance=noise_variance,
            visibility_threshold_db=self.analysis.visibility_threshold_db,
            subtraction=self.analysis.subtraction,
            guard_bins=self.analysis.guard_bins,
        )


def _finite_or_none(x: float) -> float | None:
    return float(x) if math.isfinite(x) else None


class TracePayload(BaseModel):
    frequencies_hz: list[float]
    values: list[float]
    unit: str
    rbw_hz: float
    vbw_hz: float
    n_avg: int

    @classmethod
    def from_core(cls, trace: SpectrumTrace) -> "TracePayload":
        return cls(
            frequencies_hz=[float(f) for f in trace.frequencies],
            values=[float(v) for v in trace.values],
            unit=trace.unit.value,
            rbw_hz=trace.rbw,
            vbw_hz=trace.vbw,
            n_avg=trace.n_avg,
        )

    def to_core(self) -> SpectrumTrace:
        import numpy as np

        return SpectrumTrace(
            frequencies=np.asarray(self.frequencies_hz, dtype=float),
            values=np.asarray(self.values, dtype=float),
            unit=SpectrumUnit(self.unit),
            rbw=self.rbw_hz,
            vbw=self.vbw_hz,
            n_avg=self.n_avg,
        )


class PeakPayload(BaseModel):
    frequency_hz: float
    total_asd_m: float
    noise_floor_asd_m: float
    signal_asd_m: float
    visibility_db: float | None  # None when the floor is exactly zero

    @classmethod
    def from_core(cls, peak: PeakMeasurement) -> "PeakPayload":
        return cls(
            frequency_hz=peak.frequency,
            total_asd_m=peak.total_asd,
            noise_floor_asd_m=peak.noise_floor_asd,
            signal_asd_m=peak.signal_asd,
            visibility_db=_finite_or_none(peak.visibility_db),
        )


class HealthResponse(BaseModel):
    status: str
    version: str
    schema_version: int


class CalibrateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: RunConfig = Field(default_factory=RunConfig)
    z_m_mm: float = Field(default=1.0, gt=0.0)  # headline-calibration interaction length


class CalibrationResponse(BaseModel):
    shot_noise_asd_m: float
    shot_noise_asd_m_detected: float
    dark_noise_asd_m: float
    pressure_floor_pa: float
    pressure_floor_pa_detected: float
    z_m_used_mm: float
    z_m_model_mm: float
    z_m_diverged: bool
    acoustic_wavelength_m: float
    rayleigh_range_m: float
    washout_at_waist: float
    piezooptic_per_pa: float
    piezooptic_in_reference: bool
    absorption_db_per_mm: float
    midfringe_gain_w_per_m: float
    squeezed_variance: float
    anti_squeezed_variance: float
    squeezed_db: float
    anti_squeezed_db: float
    equivalent_shot_noise_power_w: float
    path_amplitude_m: float
    pressure_at_beam_pa: float
    config: RunConfig


NoiseSelector = Literal["shot", "squeezed", "antisqueezed", "none"]


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: RunConfig = Field(default_factory=RunConfig)
    unit: Literal["m", "pa", "rel"] = "m"
    noise: NoiseSelector = "shot"
    seed: int | None = None
    z_m_mm: float = Field(default=1.0, gt=0.0)


class SimulateResponse(BaseModel):
    trace: TracePayload
    peak: PeakPayload
    signal_asd_pa: float
    total_asd_pa: float
    band_rms_m: float
    noise_variance: float
    shot_noise_floor_asd_m: float
    seed: int
    config: RunConfig


class SqueezeDemoRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: RunConfig = Field(default_factory=RunConfig)
    seed: int | None = None
    z_m_mm: float = Field(default=1.0, gt=0.0)
    v_squeezed: float | None = Field(default=None, gt=0.0)  # None: from config.squeezer
    v_antisqueezed: float | None = Field(default=None, gt=0.0)


class DemoTracePayload(BaseModel):
    label: str
    noise_variance: float
    trace: TracePayload
    peak: PeakPayload
    signal_asd_pa: float
    visible: bool

    @classmethod
    def from_core(cls, demo: DemoTrace) -> "DemoTracePayload":
        return cls(
            label=demo.label,
            noise_variance=demo.noise_variance,
            trace=TracePayload.from_core(demo.trace),
            peak=PeakPayload.from_core(demo.peak),
            signal_asd_pa=demo.signal_asd_pa,
            visible=demo.visible,
        )


class SqueezeDemoResponse(BaseModel):
    shot: DemoTracePayload
    squeezed: DemoTracePayload
    anti_squeezed: DemoTracePayload
    pressure_amplitude_pa: float
    path_amplitude_m: float
    z_m_used_mm: float
    shot_floor_asd_m: float
    seed: int
    config: RunConfig

    @classmethod
    def from_core(cls, demo: SqueezingDemo, seed: int, config: RunConfig) -> "SqueezeDemoResponse":
        return cls(
            shot=DemoTracePayload.from_core(demo.shot),
            squeezed=DemoTracePayload.from_core(demo.squeezed),
            anti_squeezed=DemoTracePayload.from_core(demo.anti_squeezed),
            pressure_amplitude_pa=demo.pressure_amplitude,
            path_amplitude_m=demo.path_amplitude,
            z_m_used_mm=demo.z_m_calibration * 1e3,
            shot_floor_asd_m=demo.shot_floor_asd,
            seed=seed,
            config=config,
        )


def default_frequency_grid() -> list[float]:
    return [4.2e6, 4.95e6, 5.7e6, 6.45e6, 7.2e6]


def default_distance_grid() -> list[float]:
    return [7.0 * k / 9.0 for k in range(10)]


def default_temperature_grid() -> list[float]:
    return [291.15, 304.65, 318.15, 331.65, 345.15]


class FrequencySweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: RunConfig = Field(default_factory=RunConfig)
    frequencies_hz: list[float] = Field(default_factory=default_frequency_grid, min_length=1)
    distances_mm: list[float] = Field(default_factory=default_distance_grid, min_length=2)
    source_pressures_pa: list[float] | None = None  # None: config.scene value everywhere
    seed: int | None = None


class TemperatureSweepRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    config: RunConfig = Field(default_factory=RunConfig)
    temperatures_k: list[float] = Field(default_factory=default_temperature_grid, min_length=1)
    frequency_hz: float | None = Field(default=None, gt=0.0)  # None: config.scene value
    distances_mm: list[float] = Field(default_factory=default_distance_grid, min_length=2)
    seed: int | None = None


class SweepRowPayload(BaseModel):
    x: float
    alpha_fit_db_per_mm: float | None
    alpha_err: float | None
    alpha_theory_db_per_mm: float
    n_usable: int
    usable_distances_mm: list[float]
    flagged: bool
    degenerate: bool

    @classmethod
    def from_core(cls, row: SweepRow) -> "SweepRowPayload":
        return cls(
            x=row.x,
            alpha_fit_db_per_mm=_finite_or_none(row.alpha_fit_db_per_mm),
            alpha_err=_finite_or_none(row.alpha_std_error),
            alpha_theory_db_per_mm=row.alpha_theory_db_per_mm,
            n_usable=row.n_usable,
            usable_distances_mm=list(row.usable_distances_mm),
            flagged=row.flagged,
            degenerate=row.degenerate,
        )


class SweepResponse(BaseModel):
    kind: Literal["frequency", "temperature"]
    rows: list[SweepRowPayload]
    seed: int
    config: RunConfig


class FitRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    distances_mm: list[float] = Field(min_length=2)
    peak_powers: list[float] = Field(min_length=2)
    frequency_hz: float = Field(default=5.204e6, gt=0.0)
    temperature_k: float = Field(default=293.15, gt=0.0)
    weights: list[float] | None = None


class FitResponse(BaseModel):
    alpha_db_per_mm: float
    alpha_std_error: float
    intercept_log10_power: float
    residual_rms: float
    degenerate: bool
    alpha_theory_db_per_mm: float
