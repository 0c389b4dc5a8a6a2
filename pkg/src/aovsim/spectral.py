"""Spectrum-analyzer style processing of detector time series.

A trace is built the way a swept analyzer in RMS mode would display it:
Hann-windowed periodograms of non-overlapping segments are averaged, the
segment length is picked so the window's equivalent noise bandwidth equals
the requested resolution bandwidth, and an optional video bandwidth smooths
the displayed bins afterwards.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import signal as sps

from .interferometer import TimeSeries

# Equivalent noise bandwidth of the Hann window, in bins. Exact for the
# periodic window: ENBW = N * sum(w^2) / sum(w)^2 = 1.5.
HANN_ENBW_BINS = 1.5


class SpectrumUnit(str, Enum):
    DISPLACEMENT = "m2/Hz"
    PRESSURE = "Pa2/Hz"
    RELATIVE = "rel"


@dataclass(frozen=True)
class SpectrumTrace:
    frequencies: np.ndarray  # [Hz], strictly increasing
    values: np.ndarray  # power spectral density in `unit`
    unit: SpectrumUnit
    rbw: float  # [Hz] realized resolution bandwidth
    vbw: float  # [Hz] video bandwidth actually applied (== rbw when none)
    n_avg: int

    def __post_init__(self) -> None:
        if len(self.frequencies) != len(self.values):
            raise ValueError("frequencies and values must have equal length")
        if len(self.frequencies) < 2:
            raise ValueError("a trace needs at least two bins")
        if np.any(np.diff(self.frequencies) <= 0.0):
            raise ValueError("frequencies must be strictly increasing")
        if np.any(self.values < 0.0):
            raise ValueError("spectral densities must be non-negative")
        if self.rbw <= 0.0:
            raise ValueError(f"rbw must be positive, got {self.rbw}")
        if not 0.0 < self.vbw <= self.rbw:
            raise ValueError(f"vbw must lie in (0, rbw], got {self.vbw}")
        if self.n_avg < 1:
            raise ValueError(f"n_avg must be at least 1, got {self.n_avg}")
        self.frequencies.setflags(write=False)
        self.values.setflags(write=False)

    @property
    def bin_width(self) -> float:
        return float(self.frequencies[1] - self.frequencies[0])


def segment_length(sample_rate: float, rbw: float) -> int:
    """Samples per segment so the Hann ENBW equals the requested RBW."""
    n = round(HANN_ENBW_BINS * sample_rate / rbw)
    if n < 8:
        raise ValueError(f"rbw {rbw} too coarse for sample_rate {sample_rate}")
    return n


def averaged_psd(ts: TimeSeries, rbw: float, n_avg: int) -> SpectrumTrace:
    """One-sided PSD averaged over n_avg non-overlapping Hann segments.

    Density normalization: white noise of one-sided ASD a averages to a^2.
    The realized RBW (1.5 * fs / N with N the rounded segment length) is
    stored on the trace and may differ slightly from the request. A
    bin-centered tone of amplitude A peaks at A^2 / (2 * rbw).
    """
    if n_avg < 1:
        raise ValueError(f"n_avg must be at least 1, got {n_avg}")
    if rbw < 2.0 / ts.duration:
        raise ValueError(f"rbw {rbw} finer than 2/duration of the record")
    n_seg = segment_length(ts.sample_rate, rbw)
    needed = n_seg * n_avg
    if needed > len(ts.samples):
        raise ValueError(
            f"record too short: need {needed} samples for {n_avg} segments of {n_seg}, "
            f"have {len(ts.samples)}"
        )
    realized_rbw = HANN_ENBW_BINS * ts.sample_rate / n_seg
    freqs, psd = sps.welch(
        ts.samples[:needed],
        fs=ts.sample_rate,
        window="hann",
        nperseg=n_seg,
        noverlap=0,
        detrend=False,
        return_onesided=True,
        scaling="density",
    )
    # Drop the DC bin; the analyzer never displays it and downstream unit
    # conversions assume strictly positive frequencies.
    return SpectrumTrace(
        frequencies=freqs[1:],
        values=psd[1:],
        unit=SpectrumUnit.DISPLACEMENT,
        rbw=realized_rbw,
        vbw=realized_rbw,
        n_avg=n_avg,
    )


# Power correlation of neighbouring bins in a non-overlapped Hann Welch
# trace: the window spectrum spans +-1 bin, giving |c1|^2 = (2/3)^2 and
# |c2|^2 = (1/6)^2. The VBW smoother must budget for it or it under-smooths.
_HANN_BIN_RHO1 = 4.0 / 9.0
_HANN_BIN_RHO2 = 1.0 / 36.0


def _vbw_coefficient(ratio: float) -> float:
    """Single-pole coefficient so white-noise bin variance shrinks by ratio.

    For y[k] = (1-b) y[k-1] + b x[k] with input lag correlations rho1, rho2:
    Var(y)/Var(x) = b/(2-b) * (1 + 2 rho1 (1-b) + 2 rho2 (1-b)^2). Solved by
    fixed-point iteration; exact enough after a handful of rounds.
    """
    beta = ratio
    for _ in range(40):
        c = 1.0 + 2.0 * _HANN_BIN_RHO1 * (1.0 - beta) + 2.0 * _HANN_BIN_RHO2 * (1.0 - beta) ** 2
        beta = 2.0 * ratio / (c + ratio)
    return min(1.0, beta)


def apply_vbw(trace: SpectrumTrace, vbw: float) -> SpectrumTrace:
    """Video-bandwidth smoothing: single-pole low-pass across displayed bins.

    The coefficient is solved so the white-noise bin variance shrinks by
    vbw/rbw (std by sqrt(vbw/rbw)), the averaging an RMS detector with
    rbw/vbw independent looks would give, accounting for the correlation
    the Hann window leaves between neighbouring bins. vbw = rbw is the
    identity. Means of flat regions are preserved; sharp peaks are smeared
    over ~rbw/vbw bins, which is why peak readings happen before this step.
    """
    if not 0.0 < vbw <= trace.rbw:
        raise ValueError(f"vbw must lie in (0, rbw], got {vbw} with rbw {trace.rbw}")
    if vbw == trace.rbw:
        return replace(trace, vbw=vbw)
    beta = _vbw_coefficient(vbw / trace.rbw)
    if beta >= 1.0:
        return replace(trace, vbw=vbw)
    # y[k] = (1-beta) y[k-1] + beta x[k]. Seeding with one raw bin would
    # leave a turn-on transient a full correlation length (~1/beta bins)
    # long; seed with the local mean of that stretch instead.
    lead = max(1, min(len(trace.values), round(1.0 / beta)))
    zi = np.array([(1.0 - beta) * float(np.mean(trace.values[:lead]))])
    smoothed, _ = sps.lfilter([beta], [1.0, beta - 1.0], trace.values, zi=zi)
    smoothed = np.maximum(smoothed, 0.0)
    return SpectrumTrace(
        frequencies=trace.frequencies,
        values=smoothed,
        unit=trace.unit,
        rbw=trace.rbw,
        vbw=vbw,
        n_avg=trace.n_avg,
    )


def normalize_to_shot_noise(trace: SpectrumTrace, shot_asd: float) -> SpectrumTrace:
    """Divide a PSD trace by the shot-noise PSD shot_asd^2.

    shot_asd must be expressed in the trace's own amplitude unit, so the
    normalization commutes with the m <-> Pa recalibration.
    """
    if trace.unit is SpectrumUnit.RELATIVE:
        raise ValueError("trace is already shot-noise normalized")
    if shot_asd <= 0.0:
        raise ValueError(f"shot_asd must be positive, got {shot_asd}")
    return SpectrumTrace(
        frequencies=trace.frequencies,
        values=trace.values / shot_asd**2,
        unit=SpectrumUnit.RELATIVE,
        rbw=trace.rbw,
        vbw=trace.vbw,
        n_avg=trace.n_avg,
    )


def asd_to_pressure(asd_m: float, effective_length: float, dn_dp: float) -> float:
    """Convert a displacement ASD [m/sqrt(Hz)] to pressure [Pa/sqrt(Hz)].

    Inverse of the sensing chain: sqrt(S_p) = sqrt(S_z) / (z_M * dn/dp).
    """
    if asd_m < 0.0:
        raise ValueError(f"asd_m must be non-negative, got {asd_m}")
    if effective_length <= 0.0:
        raise ValueError(f"effective_length must be positive, got {effective_length}")
    if dn_dp <= 0.0:
        raise ValueError(f"dn_dp must be positive, got {dn_dp}")
    return asd_m / (effective_length * dn_dp)


def trace_to_pressure(trace: SpectrumTrace, effective_length: float, dn_dp: float) -> SpectrumTrace:
    """Displacement PSD trace recalibrated to pressure PSD [Pa^2/Hz]."""
    if trace.unit is not SpectrumUnit.DISPLACEMENT:
        raise ValueError(f"can only convert displacement traces, got unit {trace.unit}")
    scale = (effective_length * dn_dp) ** 2
    if scale <= 0.0:
        raise ValueError("effective_length and dn_dp must be positive")
    return SpectrumTrace(
        frequencies=trace.frequencies,
        values=trace.values / scale,
        unit=SpectrumUnit.PRESSURE,
        rbw=trace.rbw,
        vbw=trace.vbw,
        n_avg=trace.n_avg,
    )


@dataclass(frozen=True)
class PeakMeasurement:
    frequency: float  # [Hz] bin of the maximum
    total_asd: float  # sqrt of the max PSD near the target frequency
    noise_floor_asd: float  # sqrt of the median off-peak PSD
    signal_asd: float  # noise-subtracted peak amplitude density

    @property
    def visibility_db(self) -> float:
        """Peak-over-floor in dB; +inf on a noiseless trace."""
        if self.noise_floor_asd == 0.0:
            return math.inf
        return 20.0 * math.log10(self.total_asd / self.noise_floor_asd)


def extract_peak(
    trace: SpectrumTrace,
    f0: float,
    guard_bins: int = 8,
    subtraction: str = "power",
) -> PeakMeasurement:
    """Read a tone at f0 against the local noise floor.

    total is the maximum PSD within one RBW of f0; the floor is the median
    PSD of all bins more than guard_bins away from f0. Subtraction happens
    in the power domain by default, signal^2 = max(total^2 - floor^2, 0);
    subtraction="amplitude" instead returns max(total - floor, 0) in
    amplitude units, which reads higher for peaks near the floor.
    """
    if subtraction not in ("power", "amplitude"):
        raise ValueError(f"subtraction must be 'power' or 'amplitude', got {subtraction}")
    if guard_bins < 1:
        raise ValueError(f"guard_bins must be at least 1, got {guard_bins}")
    freqs = trace.frequencies
    if not freqs[0] <= f0 <= freqs[-1]:
        raise ValueError(f"f0 {f0} outside the trace span [{freqs[0]}, {freqs[-1]}]")
    near = np.abs(freqs - f0) <= trace.rbw
    if not np.any(near):
        raise ValueError(f"no bins within one RBW of {f0}")
    peak_idx = np.flatnonzero(near)[np.argmax(trace.values[near])]
    total_psd = float(trace.values[peak_idx])
    off = np.abs(freqs - f0) > guard_bins * trace.bin_width
    if int(np.count_nonzero(off)) < 20:
        raise ValueError("fewer than 20 bins available for the noise-floor estimate")
    floor_psd = float(np.median(trace.values[off]))
    total_asd = math.sqrt(total_psd)
    floor_asd = math.sqrt(floor_psd)
    if subtraction == "power":
        signal_asd = math.sqrt(max(total_psd - floor_psd, 0.0))
    else:
        signal_asd = max(total_asd - floor_asd, 0.0)
    return PeakMeasurement(
        frequency=float(freqs[peak_idx]),
        total_asd=total_asd,
        noise_floor_asd=floor_asd,
        signal_asd=signal_asd,
    )


def tone_power(trace: SpectrumTrace, f0: float) -> float:
    """Mean-square tone power (A^2/2) by three-bin energy summation at f0.

    Summing the peak bin and its two neighbours corrects Hann scalloping to
    within 2% for tones that fall between bin centers (the worst case is a
    half-bin offset, where the sum captures 98.0% of the tone power). Units
    are trace units times Hz.
    """
    freqs = trace.frequencies
    if not freqs[0] <= f0 <= freqs[-1]:
        raise ValueError(f"f0 {f0} outside the trace span [{freqs[0]}, {freqs[-1]}]")
    near = np.abs(freqs - f0) <= trace.rbw
    peak_idx = np.flatnonzero(near)[np.argmax(trace.values[near])]
    lo = max(peak_idx - 1, 0)
    hi = min(peak_idx + 2, len(freqs))
    # ENBW correction: the three-bin sum counts window energy, not density
    # bins, so the density-to-power conversion uses the plain bin width.
    return float(np.sum(trace.values[lo:hi]) * trace.bin_width)


def band_rms(peak: PeakMeasurement, rbw: float) -> float:
    """RMS amplitude of an RBW-limited tone: signal ASD times sqrt(RBW)."""
    if rbw <= 0.0:
        raise ValueError(f"rbw must be positive, got {rbw}")
    return peak.signal_asd * math.sqrt(rbw)


def slice_trace(trace: SpectrumTrace, center: float, span: float) -> SpectrumTrace:
    """Restrict a trace to [center - span/2, center + span/2]."""
    if span <= 0.0:
        raise ValueError(f"span must be positive, got {span}")
    mask = np.abs(trace.frequencies - center) <= span / 2.0
    if int(np.count_nonzero(mask)) < 2:
        raise ValueError("requested window contains fewer than two bins")
    return SpectrumTrace(
        frequencies=trace.frequencies[mask].copy(),
        values=trace.values[mask].copy(),
        unit=trace.unit,
        rbw=trace.rbw,
        vbw=trace.vbw,
        n_avg=trace.n_avg,
    )


def write_trace_csv(trace: SpectrumTrace, path: str | Path) -> None:
    """CSV export with one row per bin.

    Columns: frequency_hz, value, unit, rbw_hz, vbw_hz, n_avg, and for
    relative traces a trailing value_db column (blank for empty bins).
    """
    path = Path(path)
    relative = trace.unit is SpectrumUnit.RELATIVE
    header = "frequency_hz,value,unit,rbw_hz,vbw_hz,n_avg"
    if relative:
        header += ",value_db"
    with path.open("w", encoding="utf-8", newline="") as fh:
        fh.write(header + "\n")
        for f, v in zip(trace.frequencies, trace.values):
            f, v = float(f), float(v)  # numpy scalar repr is not valid CSV text
            row = f"{f!r},{v!r},{trace.unit.value},{float(trace.rbw)!r},{float(trace.vbw)!r},{trace.n_avg}"
            if relative:
                row += f",{10.0 * math.log10(v)!r}" if v > 0.0 else ","
            fh.write(row + "\n")
