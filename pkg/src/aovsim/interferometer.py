"""Mid-fringe Mach-Zehnder readout, synthesized directly in displacement units.

The lock is ideal, so the detector record is modelled as the path-length
signal plus white quantum noise plus white dark noise, all expressed as
equivalent displacement. The quantum noise level follows the power actually
reaching the detectors, not the power entering the interferometer.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .quantum import shot_noise_asd

# Default dark noise, one tenth of the default carrier's shot noise in power.
_DEFAULT_DARK_ASD = shot_noise_asd(1.55e-6, 0.012) / math.sqrt(10.0)


@dataclass(frozen=True)
class InterferometerConfig:
    input_power: float = 0.012  # [W] at the interferometer input
    wavelength: float = 1.55e-6  # [m]
    contrast: float = 0.99  # fringe visibility, 0..1
    detector_efficiency: float = 0.99  # quantum efficiency, 0..1
    carrier_path_loss: float = 0.02  # optical loss seen by the carrier, 0..1
    dark_noise_asd: float = _DEFAULT_DARK_ASD  # [m/sqrt(Hz)] equivalent

    def __post_init__(self) -> None:
        if self.input_power <= 0.0:
            raise ValueError(f"input_power must be positive, got {self.input_power}")
        if self.wavelength <= 0.0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if not 0.0 < self.contrast <= 1.0:
            raise ValueError(f"contrast must lie in (0, 1], got {self.contrast}")
        if not 0.0 < self.detector_efficiency <= 1.0:
            raise ValueError(f"detector_efficiency must lie in (0, 1], got {self.detector_efficiency}")
        if not 0.0 <= self.carrier_path_loss < 1.0:
            raise ValueError(f"carrier_path_loss must lie in [0, 1), got {self.carrier_path_loss}")
        if self.dark_noise_asd < 0.0:
            raise ValueError(f"dark_noise_asd must be non-negative, got {self.dark_noise_asd}")

    @property
    def detected_power(self) -> float:
        """Power [W] reaching the balanced detector pair."""
        return self.input_power * (1.0 - self.carrier_path_loss) * self.detector_efficiency

    @property
    def shot_noise_floor_asd(self) -> float:
        """Displacement-equivalent shot noise [m/sqrt(Hz)] at the detected power."""
        return shot_noise_asd(self.wavelength, self.detected_power)


@dataclass(frozen=True)
class TimeSeries:
    sample_rate: float  # [Hz]
    duration: float  # [s]
    samples: np.ndarray  # equivalent displacement [m]

    def __post_init__(self) -> None:
        if self.sample_rate <= 0.0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if self.duration <= 0.0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        expected = round(self.sample_rate * self.duration)
        if len(self.samples) != expected:
            raise ValueError(f"expected {expected} samples, got {len(self.samples)}")
        self.samples.setflags(write=False)


def midfringe_gain(config: InterferometerConfig, wavelength: float) -> float:
    """Differential power per path-length change at mid fringe [W/m].

    d(P_diff)/d(dL) = 2 pi * P_in * contrast / lambda.
    """
    if wavelength <= 0.0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    return 2.0 * math.pi * config.input_power * config.contrast / wavelength


def synthesize(
    config: InterferometerConfig,
    signal_amplitude: float,
    signal_frequency: float,
    noise_variance: float,
    sample_rate: float,
    duration: float,
    seed: int,
    signal_phase: float = 0.0,
) -> TimeSeries:
    """Detector record in displacement units for one measurement run.

    samples[k] = A cos(2 pi f t_k + phase) + quantum noise + dark noise.
    The quantum noise is white Gaussian with one-sided ASD
    shot_noise_floor_asd * sqrt(noise_variance); noise_variance is the
    normalized quadrature variance (1 = shot noise, <1 squeezed, >1
    anti-squeezed). Fixed seed gives a bit-identical record; the quantum
    noise is drawn first, then the dark noise.
    """
    if signal_amplitude < 0.0:
        raise ValueError(f"signal_amplitude must be non-negative, got {signal_amplitude}")
    if signal_frequency < 0.0:
        raise ValueError(f"signal_frequency must be non-negative, got {signal_frequency}")
    if noise_variance < 0.0:
        raise ValueError(f"noise_variance must be non-negative, got {noise_variance}")
    if sample_rate <= 2.5 * signal_frequency:
        raise ValueError(
            f"sample_rate {sample_rate} too low for signal at {signal_frequency} Hz "
            "(need > 2.5x to keep the tone clear of the band edge)"
        )
    n = round(sample_rate * duration)
    if n < 2:
        raise ValueError(f"duration {duration} too short at sample_rate {sample_rate}")
    t = np.arange(n) / sample_rate
    samples = signal_amplitude * np.cos(2.0 * math.pi * signal_frequency * t + signal_phase)
    rng = np.random.default_rng(seed)
    # One-sided ASD a spreads a^2 over [0, fs/2]: per-sample sigma = a sqrt(fs/2).
    sigma_quantum = config.shot_noise_floor_asd * math.sqrt(noise_variance) * math.sqrt(sample_rate / 2.0)
    if sigma_quantum > 0.0:
        samples = samples + rng.normal(0.0, sigma_quantum, n)
    sigma_dark = config.dark_noise_asd * math.sqrt(sample_rate / 2.0)
    if sigma_dark > 0.0:
        samples = samples + rng.normal(0.0, sigma_dark, n)
    return TimeSeries(sample_rate=sample_rate, duration=duration, samples=samples)


def config_digest(payload: dict) -> str:
    """Stable hash of a JSON-serializable configuration mapping."""
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def export_binary(
    ts: TimeSeries,
    path: str | Path,
    seed: int | None = None,
    digest: str | None = None,
) -> Path:
    """Write raw little-endian float64 samples plus a JSON metadata sidecar.

    The sidecar lands next to the data file with a .json suffix appended and
    records sample_rate, duration, seed and the configuration digest.
    """
    path = Path(path)
    ts.samples.astype("<f8").tofile(path)
    meta = {
        "sample_rate": ts.sample_rate,
        "duration": ts.duration,
        "n_samples": int(len(ts.samples)),
        "dtype": "<f8",
        "seed": seed,
        "config_digest": digest,
    }
    sidecar = path.with_name(path.name + ".json")
    sidecar.write_text(json.dumps(meta, indent=2) + "\n", encoding="utf-8")
    return sidecar


def export_csv(ts: TimeSeries, path: str | Path) -> None:
    """Write (time_s, displacement_m) rows; meant for short records."""
    path = Path(path)
    t = np.arange(len(ts.samples)) / ts.sample_rate
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write("time_s,displacement_m\n")
        for ti, xi in zip(t, ts.samples):
            fh.write(f"{float(ti)!r},{float(xi)!r}\n")
