"""Digital twin of a squeezed-light interferometric ultrasound sensor in air."""

from .air import (
    AbsorptionCoefficient,
    AirState,
    PIEZOOPTIC_COEFFICIENT,
    PiezoopticCoefficient,
    absorption_coefficient,
    attenuated_pressure,
    piezooptic_coefficient,
)
from .acousto import (
    AcousticScene,
    EffectiveLength,
    GaussianBeam,
    InteractionResult,
    acoustic_pressure_at,
    beam_radius,
    delta_n,
    effective_interaction_length,
    interaction_at,
    path_length_amplitude,
    washout_factor,
)
from .quantum import (
    InfeasiblePairError,
    LossSqueezeEstimate,
    QuadraturePair,
    SqueezerConfig,
    equivalent_shot_noise_power,
    infer_loss_and_squeeze,
    quadrature_variance,
    shot_noise_asd,
    variance_at,
    variance_db,
)
from .interferometer import InterferometerConfig, TimeSeries, midfringe_gain, synthesize
from .spectral import (
    PeakMeasurement,
    SpectrumTrace,
    SpectrumUnit,
    apply_vbw,
    asd_to_pressure,
    averaged_psd,
    band_rms,
    extract_peak,
    normalize_to_shot_noise,
    slice_trace,
    tone_power,
    trace_to_pressure,
    write_trace_csv,
)
from .experiments import (
    DecayFit,
    DistancePoint,
    DistanceSeries,
    MeasurementSetup,
    SqueezingDemo,
    SweepRow,
    demo_pressure_for_subtracted_peak,
    fit_decay,
    measure_distance_point,
    run_frequency_sweep,
    run_squeezing_demo,
    run_temperature_sweep,
    write_sweep_csv,
)

__version__ = "0.1.0"
