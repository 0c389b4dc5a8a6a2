"""HTTP facade over the core simulation package.

Every endpoint is a pure function of its request body: no state is kept
between calls and the resolved configuration is echoed back so any response
can be replayed. Validation failures surface as 422 with pydantic's
field-path messages; anything the core raises intentionally (ValueError and
friends) becomes a 400 with the message intact.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from .. import __version__
from ..acousto import interaction_at
from ..air import absorption_coefficient, piezooptic_coefficient
from ..experiments import (
    fit_decay,
    DistanceSeries,
    run_frequency_sweep,
    run_squeezing_demo,
    run_temperature_sweep,
)
from ..interferometer import midfringe_gain, synthesize
from ..quantum import (
    equivalent_shot_noise_power,
    quadrature_variance,
    shot_noise_asd,
    variance_db,
)
from ..spectral import (
    SpectrumUnit,
    apply_vbw,
    averaged_psd,
    band_rms,
    extract_peak,
    normalize_to_shot_noise,
    segment_length,
    slice_trace,
    trace_to_pressure,
)
from .schemas import (
    SCHEMA_VERSION,
    CalibrateRequest,
    CalibrationResponse,
    FitRequest,
    FitResponse,
    FrequencySweepRequest,
    HealthResponse,
    PeakPayload,
    RunConfig,
    SimulateRequest,
    SimulateResponse,
    SqueezeDemoRequest,
    SqueezeDemoResponse,
    SweepResponse,
    SweepRowPayload,
    TemperatureSweepRequest,
    TracePayload,
)

app = FastAPI(title="aovsim", version=__version__)


@app.exception_handler(ValueError)
async def _value_error_handler(request, exc: ValueError) -> JSONResponse:
    return JSONResponse(status_code=400, content={"detail": str(exc)})


@app.get("/health", response_model=HealthResponse)
async def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__, schema_version=SCHEMA_VERSION)


def _noise_variance_for(config: RunConfig, noise: str) -> float:
    if noise == "shot":
        return 1.0
    if noise == "none":
        return 0.0
    squeezer = config.squeezer.to_core()
    pair = quadrature_variance(squeezer)
    return pair.squeezed if noise == "squeezed" else pair.anti_squeezed


@app.post("/calibrate", response_model=CalibrationResponse)
async def calibrate(request: CalibrateRequest) -> CalibrationResponse:
    config = request.config.resolve()
    air = config.air.to_core()
    beam = config.beam.to_core()
    scene = config.scene.to_core()
    ifo = config.interferometer.to_core(config.beam.wavelength_m)

    coeff = piezooptic_coefficient(air)
    alpha = absorption_coefficient(air.temperature, scene.frequency)
    interaction = interaction_at(air, beam, scene, scene.source_position_mm)
    pair = quadrature_variance(config.squeezer.to_core())

    z_m_used = request.z_m_mm * 1e-3
    shot_in = shot_noise_asd(beam.wavelength, ifo.input_power)
    shot_det = ifo.shot_noise_floor_asd

    return CalibrationResponse(
        shot_noise_asd_m=shot_in,
        shot_noise_asd_m_detected=shot_det,
        dark_noise_asd_m=ifo.dark_noise_asd,
        pressure_floor_pa=shot_in / (z_m_used * coeff.value),
        pressure_floor_pa_detected=shot_det / (z_m_used * coeff.value),
        z_m_used_mm=request.z_m_mm,
        z_m_model_mm=interaction.effective_length * 1e3,
        z_m_diverged=interaction.diverged,
        acoustic_wavelength_m=scene.wavelength_in(air),
        rayleigh_range_m=beam.rayleigh_range,
        washout_at_waist=_washout_at_waist(beam, scene.wavelength_in(air)),
        piezooptic_per_pa=coeff.value,
        piezooptic_in_reference=coeff.in_reference,
        absorption_db_per_mm=alpha.value,
        midfringe_gain_w_per_m=midfringe_gain(ifo, beam.wavelength),
        squeezed_variance=pair.squeezed,
        anti_squeezed_variance=pair.anti_squeezed,
        squeezed_db=variance_db(pair.squeezed),
        anti_squeezed_db=variance_db(pair.anti_squeezed),
        equivalent_shot_noise_power_w=equivalent_shot_noise_power(
            ifo.input_power, pair.squeezed
        ),
        path_amplitude_m=interaction.path_amplitude,
        pressure_at_beam_pa=interaction.pressure_amplitude,
        config=config,
    )


def _washout_at_waist(beam, acoustic_wavelength: float) -> float:
    from ..acousto import washout_factor

    return washout_factor(beam.waist_radius, acoustic_wavelength)


@app.post("/simulate", response_model=SimulateResponse)
async def simulate(request: SimulateRequest) -> SimulateResponse:
    config = request.config.resolve()
    seed = request.seed if request.seed is not None else config.seed
    noise_variance = _noise_variance_for(config, request.noise)

    air = config.air.to_core()
    beam = config.beam.to_core()
    scene = config.scene.to_core()
    ifo = config.interferometer.to_core(config.beam.wavelength_m)
    analysis = config.analysis

    interaction = interaction_at(air, beam, scene, scene.source_position_mm)
    fs = analysis.resolved_sample_rate()
    n_seg = segment_length(fs, analysis.rbw_hz)
    duration = n_seg * analysis.n_avg / fs

    ts = synthesize(
        ifo,
        signal_amplitude=interaction.path_amplitude,
        signal_frequency=scene.frequency,
        noise_variance=noise_variance,
        sample_rate=fs,
        duration=duration,
        seed=seed,
        signal_phase=interaction.phase,
    )
    raw = averaged_psd(ts, analysis.rbw_hz, analysis.n_avg)
    peak = extract_peak(
        raw,
        scene.frequency,
        guard_bins=analysis.guard_bins,
        subtraction=analysis.subtraction,
    )

    coeff = piezooptic_coefficient(air)
    z_m_used = request.z_m_mm * 1e-3
    smoothed = apply_vbw(raw, analysis.vbw_hz)
    windowed = slice_trace(smoothed, analysis.center_hz, analysis.span_hz)
    if request.unit == "pa":
        out = trace_to_pressure(windowed, z_m_used, coeff.value)
    elif request.unit == "rel":
        out = normalize_to_shot_noise(windowed, ifo.shot_noise_floor_asd)
    else:
        out = windowed

    denom = z_m_used * coeff.value
    return SimulateResponse(
        trace=TracePayload.from_core(out),
        peak=PeakPayload.from_core(peak),
        signal_asd_pa=peak.signal_asd / denom,
        total_asd_pa=peak.total_asd / denom,
        band_rms_m=band_rms(peak, raw.rbw),
        noise_variance=noise_variance,
        shot_noise_floor_asd_m=ifo.shot_noise_floor_asd,
        seed=seed,
        config=config,
    )


@app.post("/squeeze-demo", response_model=SqueezeDemoResponse)
async def squeeze_demo(request: SqueezeDemoRequest) -> SqueezeDemoResponse:
    config = request.config.resolve()
    seed = request.seed if request.seed is not None else config.seed

    if (request.v_squeezed is None) != (request.v_antisqueezed is None):
        raise HTTPException(
            status_code=422,
            detail="v_squeezed and v_antisqueezed must be given together",
        )
    if request.v_squeezed is not None:
        v_s, v_a = request.v_squeezed, request.v_antisqueezed
    else:
        pair = quadrature_variance(config.squeezer.to_core())
        v_s, v_a = pair.squeezed, pair.anti_squeezed

    setup = config.to_setup()
    demo = run_squeezing_demo(
        setup,
        frequency=config.scene.frequency_hz,
        pressure_amplitude=config.scene.source_pressure_pa,
        v_squeezed=v_s,
        v_antisqueezed=v_a,
        seed=seed,
        z_m_calibration=request.z_m_mm * 1e-3,
    )
    return SqueezeDemoResponse.from_core(demo, seed=seed, config=config)


@app.post("/sweep/frequency", response_model=SweepResponse)
async def sweep_frequency(request: FrequencySweepRequest) -> SweepResponse:
    config = request.config.resolve()
    seed = request.seed if request.seed is not None else config.seed

    amplitudes: float | list[float]
    if request.source_pressures_pa is None:
        amplitudes = config.scene.source_pressure_pa
    else:
        if len(request.source_pressures_pa) != len(request.frequencies_hz):
            raise HTTPException(
                status_code=422,
                detail="source_pressures_pa must match frequencies_hz in length",
            )
        amplitudes = request.source_pressures_pa

    setup = config.to_setup()
    rows = run_frequency_sweep(
        setup,
        frequencies=request.frequencies_hz,
        distances_mm=request.distances_mm,
        source_amplitudes=amplitudes,
        master_seed=seed,
    )
    return SweepResponse(
        kind="frequency",
        rows=[SweepRowPayload.from_core(r) for r in rows],
        seed=seed,
        config=config,
    )


@app.post("/sweep/temperature", response_model=SweepResponse)
async def sweep_temperature(request: TemperatureSweepRequest) -> SweepResponse:
    config = request.config.resolve()
    seed = request.seed if request.seed is not None else config.seed
    frequency = (
        request.frequency_hz if request.frequency_hz is not None else config.scene.frequency_hz
    )

    setup = config.to_setup()
    rows = run_temperature_sweep(
        setup,
        temperatures=request.temperatures_k,
        frequency=frequency,
        distances_mm=request.distances_mm,
        source_amplitude=config.scene.source_pressure_pa,
        master_seed=seed,
    )
    return SweepResponse(
        kind="temperature",
        rows=[SweepRowPayload.from_core(r) for r in rows],
        seed=seed,
        config=config,
    )


@app.post("/fit", response_model=FitResponse)
async def fit(request: FitRequest) -> FitResponse:
    series = DistanceSeries(
        distances_mm=request.distances_mm,
        peak_powers=request.peak_powers,
        frequency=request.frequency_hz,
        temperature=request.temperature_k,
    )
    result = fit_decay(series, weights=request.weights)
    theory = absorption_coefficient(request.temperature_k, request.frequency_hz)
    return FitResponse(
        alpha_db_per_mm=result.alpha_db_per_mm,
        alpha_std_error=result.alpha_std_error,
        intercept_log10_power=result.intercept_log10_power,
        residual_rms=result.residual_rms,
        degenerate=result.degenerate,
        alpha_theory_db_per_mm=theory.value,
    )
