"""End-to-end measurement campaigns run against the simulated sensor.

Each campaign drives the whole chain: sound field -> index grating ->
path-length signal -> noisy detector record -> averaged spectrum -> peak
reading. Absorption coefficients come out of exponential fits of peak power
against propagation distance, exactly how the bench measurement works.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from .acousto import (
    AcousticScene,
    GaussianBeam,
    InteractionResult,
    effective_interaction_length,
    interaction_at,
)
from .air import PIEZOOPTIC_COEFFICIENT, AirState, absorption_coefficient
from .interferometer import InterferometerConfig, synthesize
from .spectral import (
    PeakMeasurement,
    SpectrumTrace,
    apply_vbw,
    asd_to_pressure,
    averaged_psd,
    extract_peak,
    normalize_to_shot_noise,
    segment_length,
)

# Seed layout for campaign runs: every (row, point) pair gets its own
# substream so single rows can be reproduced in isolation.
ROW_SEED_STRIDE = 1_000_000


def point_seed(master_seed: int, row_index: int, point_index: int) -> int:
    return master_seed + ROW_SEED_STRIDE * row_index + point_index


@dataclass(frozen=True)
class MeasurementSetup:
    """Everything about the instrument that stays fixed during a campaign."""

    air: AirState = field(default_factory=AirState)
    beam: GaussianBeam = field(default_factory=GaussianBeam)
    interferometer: InterferometerConfig = field(default_factory=InterferometerConfig)
    rbw: float = 1000.0  # [Hz]
    vbw: float = 10.0  # [Hz]
    n_avg: int = 30
    noise_variance: float = 1.0  # normalized quadrature variance of the readout
    visibility_threshold_db: float = 3.0
    subtraction: str = "power"
    guard_bins: int = 8

    def __post_init__(self) -> None:
        if self.rbw <= 0.0:
            raise ValueError(f"rbw must be positive, got {self.rbw}")
        if not 0.0 < self.vbw <= self.rbw:
            raise ValueError(f"vbw must lie in (0, rbw], got {self.vbw}")
        if self.n_avg < 1:
            raise ValueError(f"n_avg must be at least 1, got {self.n_avg}")
        if self.noise_variance < 0.0:
            raise ValueError(f"noise_variance must be non-negative, got {self.noise_variance}")


@dataclass(frozen=True)
class DistancePoint:
    distance_mm: float
    peak_power: float  # noise-subtracted peak PSD [m^2/Hz]
    visibility_db: float
    usable: bool


@dataclass(frozen=True)
class DistanceSeries:
    """Peak powers against propagation distance at one frequency and temperature."""

    distances_mm: np.ndarray
    peak_powers: np.ndarray
    frequency: float  # [Hz]
    temperature: float  # [K]

    def __post_init__(self) -> None:
        object.__setattr__(self, "distances_mm", np.asarray(self.distances_mm, dtype=float))
        object.__setattr__(self, "peak_powers", np.asarray(self.peak_powers, dtype=float))
        if len(self.distances_mm) != len(self.peak_powers):
            raise ValueError("distances_mm and peak_powers must have equal length")
        if len(self.distances_mm) < 2:
            raise ValueError("a distance series needs at least two points")
        if np.any(self.distances_mm < 0.0):
            raise ValueError("distances must be non-negative")
        if np.any(np.diff(self.distances_mm) <= 0.0):
            raise ValueError("distances must be strictly increasing")
        self.distances_mm.setflags(write=False)
        self.peak_powers.setflags(write=False)


@dataclass(frozen=True)
class DecayFit:
    alpha_db_per_mm: float
    alpha_std_error: float  # [dB/mm]; 0 for a two-point (degenerate) fit
    intercept_log10_power: float
    residual_rms: float  # RMS residual in log10(power)
    degenerate: bool


def fit_decay(series: DistanceSeries, weights: Sequence[float] | None = None) -> DecayFit:
    """Least-squares exponential-decay fit of a distance series.

    Straight line in log10(power) vs distance; the amplitude absorption
    coefficient is -10 times the slope, because power falls as
    10^(-alpha d / 10). Uniform weights by default; passing weights turns
    the fit into WLS for heteroscedastic points. Scale-invariant: rescaling
    all powers only moves the intercept.
    """
    d = np.asarray(series.distances_mm, dtype=float)
    p = np.asarray(series.peak_powers, dtype=float)
    if np.any(p <= 0.0):
        raise ValueError("peak powers must be positive to fit a decay")
    if len(np.unique(d)) < 2:
        raise ValueError("need at least two distinct distances")
    w = np.ones_like(d) if weights is None else np.asarray(weights, dtype=float)
    if w.shape != d.shape or np.any(w <= 0.0):
        raise ValueError("weights must be positive and match the series length")
    y = np.log10(p)
    # Weighted straight-line normal equations.
    sw = np.sum(w)
    dbar = np.sum(w * d) / sw
    ybar = np.sum(w * y) / sw
    sdd = np.sum(w * (d - dbar) ** 2)
    if sdd == 0.0:
        raise ValueError("distances carry no spread")
    slope = np.sum(w * (d - dbar) * (y - ybar)) / sdd
    intercept = ybar - slope * dbar
    residuals = y - (intercept + slope * d)
    n = len(d)
    degenerate = n < 3
    if degenerate:
        stderr = 0.0
    else:
        sigma2 = np.sum(w * residuals**2) / (n - 2)
        stderr = math.sqrt(sigma2 / sdd)
    rms = math.sqrt(float(np.mean(residuals**2)))
    return DecayFit(
        alpha_db_per_mm=float(-10.0 * slope),
        alpha_std_error=float(10.0 * stderr),
        intercept_log10_power=float(intercept),
        residual_rms=rms,
        degenerate=degenerate,
    )


def measure_distance_point(
    setup: MeasurementSetup,
    scene: AcousticScene,
    distance_mm: float,
    seed: int,
) -> DistancePoint:
    """One synthesized spectrum-analyzer reading at one standoff distance."""
    interaction = interaction_at(setup.air, setup.beam, scene, distance_mm)
    sample_rate = 4.0 * scene.frequency
    n_seg = segment_length(sample_rate, setup.rbw)
    duration = n_seg * setup.n_avg / sample_rate
    ts = synthesize(
        setup.interferometer,
        interaction.path_amplitude,
        scene.frequency,
        setup.noise_variance,
        sample_rate,
        duration,
        seed,
        signal_phase=interaction.phase,
    )
    trace = averaged_psd(ts, setup.rbw, setup.n_avg)
    peak = extract_peak(trace, scene.frequency, setup.guard_bins, setup.subtraction)
    vis = peak.visibility_db
    return DistancePoint(
        distance_mm=distance_mm,
        peak_power=peak.signal_asd**2,
        visibility_db=vis,
        usable=vis >= setup.visibility_threshold_db,
    )


@dataclass(frozen=True)
class SweepRow:
    x: float  # frequency [Hz] or temperature [K]
    alpha_fit_db_per_mm: float  # nan when flagged
    alpha_std_error: float
    alpha_theory_db_per_mm: float
    n_usable: int
    usable_distances_mm: tuple[float, ...]
    flagged: bool
    degenerate: bool


def _fit_row(
    x: float,
    points: list[DistancePoint],
    frequency: float,
    temperature: float,
) -> SweepRow:
    theory = absorption_coefficient(temperature, frequency).value
    usable = [pt for pt in points if pt.usable and pt.peak_power > 0.0]
    usable_d = tuple(pt.distance_mm for pt in usable)
    if len(usable) < 2 or len({pt.distance_mm for pt in usable}) < 2:
        return SweepRow(
            x=x,
            alpha_fit_db_per_mm=math.nan,
            alpha_std_error=math.nan,
            alpha_theory_db_per_mm=theory,
            n_usable=len(usable),
            usable_distances_mm=usable_d,
            flagged=True,
            degenerate=False,
        )
    series = DistanceSeries(
        distances_mm=np.array([pt.distance_mm for pt in usable]),
        peak_powers=np.array([pt.peak_power for pt in usable]),
        frequency=frequency,
        temperature=temperature,
    )
    fit = fit_decay(series)
    return SweepRow(
        x=x,
        alpha_fit_db_per_mm=fit.alpha_db_per_mm,
        alpha_std_error=fit.alpha_std_error,
        alpha_theory_db_per_mm=theory,
        n_usable=len(usable),
        usable_distances_mm=usable_d,
        flagged=False,
        degenerate=fit.degenerate,
    )


def run_frequency_sweep(
    setup: MeasurementSetup,
    frequencies: Sequence[float],
    distances_mm: Sequence[float],
    source_amplitudes: float | Sequence[float],
    master_seed: int,
    distance_grids: Sequence[Sequence[float]] | None = None,
) -> list[SweepRow]:
    """Fitted vs theoretical absorption across ultrasound frequencies.

    source_amplitudes may be a scalar or one value per frequency (a real
    transducer is far weaker at its band edges). distance_grids optionally
    overrides the distance grid per frequency the same way. Row i, point j
    uses seed master_seed + 1_000_000 i + j.
    """
    freqs = list(frequencies)
    if np.isscalar(source_amplitudes):
        amplitudes = [float(source_amplitudes)] * len(freqs)
    else:
        amplitudes = [float(a) for a in source_amplitudes]
        if len(amplitudes) != len(freqs):
            raise ValueError("need one source amplitude per frequency")
    if distance_grids is not None and len(distance_grids) != len(freqs):
        raise ValueError("need one distance grid per frequency")
    rows = []
    for i, (f, amp) in enumerate(zip(freqs, amplitudes)):
        grid = distances_mm if distance_grids is None else distance_grids[i]
        scene = AcousticScene(frequency=f, source_pressure_amplitude=amp)
        points = [
            measure_distance_point(setup, scene, float(d), point_seed(master_seed, i, j))
            for j, d in enumerate(grid)
        ]
        rows.append(_fit_row(f, points, f, setup.air.temperature))
    return rows


def run_temperature_sweep(
    setup: MeasurementSetup,
    temperatures: Sequence[float],
    frequency: float,
    distances_mm: Sequence[float],
    source_amplitude: float,
    master_seed: int,
) -> list[SweepRow]:
    """Fitted vs theoretical absorption across air temperatures at one frequency.

    The sound speed (and with it the acoustic wavelength and interaction
    length) rescales with sqrt(T) for every row.
    """
    rows = []
    for i, t in enumerate(temperatures):
        air_t = setup.air.with_temperature(float(t))
        row_setup = replace(setup, air=air_t)
        scene = AcousticScene(frequency=frequency, source_pressure_amplitude=source_amplitude)
        points = [
            measure_distance_point(row_setup, scene, float(d), point_seed(master_seed, i, j))
            for j, d in enumerate(distances_mm)
        ]
        rows.append(_fit_row(float(t), points, frequency, float(t)))
    return rows


@dataclass(frozen=True)
class DemoTrace:
    label: str
    noise_variance: float
    trace: SpectrumTrace  # shot-noise-normalized, VBW applied
    peak: PeakMeasurement  # read before VBW, displacement units
    signal_asd_pa: float  # calibrated pressure equivalent of the subtracted peak
    visible: bool


@dataclass(frozen=True)
class SqueezingDemo:
    shot: DemoTrace
    squeezed: DemoTrace
    anti_squeezed: DemoTrace
    pressure_amplitude: float  # [Pa] at the beam
    path_amplitude: float  # [m]
    z_m_calibration: float  # [m] used for the pressure readout
    shot_floor_asd: float  # [m/sqrt(Hz)] detected-power shot noise


def run_squeezing_demo(
    setup: MeasurementSetup,
    frequency: float,
    pressure_amplitude: float,
    v_squeezed: float,
    v_antisqueezed: float,
    seed: int,
    z_m_calibration: float = 1e-3,
) -> SqueezingDemo:
    """Same scene measured at shot-noise, squeezed and anti-squeezed floors.

    The tone is identical in the three records; only the quantum noise
    variance changes (1, v_squeezed, v_antisqueezed). Noise draws use seeds
    seed, seed+1, seed+2. Peaks are read off the unsmoothed trace; the
    exported traces are shot-normalized and VBW-smoothed.
    """
    if v_squeezed <= 0.0 or v_antisqueezed <= 0.0:
        raise ValueError("variances must be positive")
    scene = AcousticScene(frequency=frequency, source_pressure_amplitude=pressure_amplitude)
    interaction = interaction_at(setup.air, setup.beam, scene, 0.0)
    shot_floor = setup.interferometer.shot_noise_floor_asd
    sample_rate = 4.0 * frequency
    n_seg = segment_length(sample_rate, setup.rbw)
    duration = n_seg * setup.n_avg / sample_rate

    def one(label: str, variance: float, offset: int) -> DemoTrace:
        ts = synthesize(
            setup.interferometer,
            interaction.path_amplitude,
            frequency,
            variance,
            sample_rate,
            duration,
            seed + offset,
            signal_phase=interaction.phase,
        )
        trace_m = averaged_psd(ts, setup.rbw, setup.n_avg)
        peak = extract_peak(trace_m, frequency, setup.guard_bins, setup.subtraction)
        relative = apply_vbw(normalize_to_shot_noise(trace_m, shot_floor), setup.vbw)
        return DemoTrace(
            label=label,
            noise_variance=variance,
            trace=relative,
            peak=peak,
            signal_asd_pa=asd_to_pressure(peak.signal_asd, z_m_calibration, PIEZOOPTIC_COEFFICIENT),
            visible=peak.visibility_db >= setup.visibility_threshold_db,
        )

    return SqueezingDemo(
        shot=one("shot", 1.0, 0),
        squeezed=one("squeezed", v_squeezed, 1),
        anti_squeezed=one("antisqueezed", v_antisqueezed, 2),
        pressure_amplitude=pressure_amplitude,
        path_amplitude=interaction.path_amplitude,
        z_m_calibration=z_m_calibration,
        shot_floor_asd=shot_floor,
    )


def demo_pressure_for_subtracted_peak(
    setup: MeasurementSetup,
    frequency: float,
    target_pa_per_rthz: float,
    floor_variance: float,
    z_m_calibration: float = 1e-3,
    subtraction: str = "power",
) -> float:
    """Source pressure [Pa] whose noise-subtracted peak reads a target value.

    Solves the peak arithmetic backwards at expectation: the trace floor is
    floor_variance * shot + dark, the target is a calibrated pressure ASD
    read through z_m_calibration, and the required tone gets converted to a
    beam pressure through the modelled interaction length. With "power"
    subtraction the tone PSD equals the target PSD outright; with
    "amplitude" the target rides on top of the floor ASD.
    """
    if target_pa_per_rthz <= 0.0:
        raise ValueError(f"target must be positive, got {target_pa_per_rthz}")
    if floor_variance < 0.0:
        raise ValueError(f"floor_variance must be non-negative, got {floor_variance}")
    cfg = setup.interferometer
    floor_psd = floor_variance * cfg.shot_noise_floor_asd**2 + cfg.dark_noise_asd**2
    target_m = target_pa_per_rthz * z_m_calibration * PIEZOOPTIC_COEFFICIENT
    if subtraction == "power":
        tone_psd = target_m**2
    elif subtraction == "amplitude":
        tone_psd = (math.sqrt(floor_psd) + target_m) ** 2 - floor_psd
    else:
        raise ValueError(f"subtraction must be 'power' or 'amplitude', got {subtraction}")
    amplitude_m = math.sqrt(2.0 * setup.rbw * tone_psd)
    wavelength = setup.air.acoustic_wavelength(frequency)
    z_m_model = effective_interaction_length(setup.beam, wavelength).value
    return amplitude_m / (PIEZOOPTIC_COEFFICIENT * z_m_model)


def write_sweep_csv(rows: Sequence[SweepRow], path: str | Path, kind: str) -> None:
    """Sweep table export; kind picks the first column ('frequency' or 'temperature')."""
    if kind == "frequency":
        x_header = "f_hz"
    elif kind == "temperature":
        x_header = "t_k"
    else:
        raise ValueError(f"kind must be 'frequency' or 'temperature', got {kind}")
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(f"{x_header},alpha_fit_db_per_mm,alpha_err,alpha_theory_db_per_mm\n")
        for row in rows:
            fh.write(
                f"{float(row.x)!r},{float(row.alpha_fit_db_per_mm)!r},{float(row.alpha_std_error)!r},"
                f"{float(row.alpha_theory_db_per_mm)!r}\n"
            )
