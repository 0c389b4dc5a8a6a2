"""Campaign-level tests: decay fits, sweeps, and the squeezing demo."""

import math

import numpy as np
import pytest
from scipy import stats

from aovsim.acousto import AcousticScene, GaussianBeam, effective_interaction_length, interaction_at
from aovsim.air import PIEZOOPTIC_COEFFICIENT, AirState, absorption_coefficient
from aovsim.experiments import (
    ROW_SEED_STRIDE,
    DecayFit,
    DistanceSeries,
    MeasurementSetup,
    SweepRow,
    demo_pressure_for_subtracted_peak,
    fit_decay,
    measure_distance_point,
    point_seed,
    run_frequency_sweep,
    run_squeezing_demo,
    run_temperature_sweep,
    write_sweep_csv,
)
from aovsim.interferometer import InterferometerConfig

ALPHA_REF = absorption_coefficient(293.15, 5.204e6).value  # 4.3046... dB/mm


def exact_series(alpha_db_per_mm, distances_mm, p0=1.0):
    d = np.asarray(distances_mm, dtype=float)
    p = p0 * 10.0 ** (-alpha_db_per_mm * d / 10.0)
    return DistanceSeries(distances_mm=d, peak_powers=p, frequency=5.204e6, temperature=293.15)


class TestDistanceSeries:
    def test_accepts_plain_lists(self):
        s = DistanceSeries([0.0, 1.0], [1.0, 0.5], 5e6, 293.15)
        assert isinstance(s.distances_mm, np.ndarray)
        assert not s.distances_mm.flags.writeable

    @pytest.mark.parametrize(
        "distances,powers",
        [
            ([0.0, 1.0, 2.0], [1.0, 0.5]),  # length mismatch
            ([0.0], [1.0]),  # single point
            ([-1.0, 0.0], [1.0, 0.5]),  # negative distance
            ([0.0, 0.0], [1.0, 0.5]),  # repeated distance
            ([1.0, 0.5], [1.0, 0.5]),  # decreasing
        ],
    )
    def test_rejects_bad_grids(self, distances, powers):
        with pytest.raises(ValueError):
            DistanceSeries(distances, powers, 5e6, 293.15)


class TestFitDecay:
    def test_exact_decay_recovered(self):
        series = exact_series(ALPHA_REF, np.linspace(0.0, 7.0, 10), p0=3.3e-27)
        fit = fit_decay(series)
        assert fit.alpha_db_per_mm == pytest.approx(ALPHA_REF, rel=1e-12, abs=0.0)
        assert fit.residual_rms == pytest.approx(0.0, abs=1e-12)
        assert fit.alpha_std_error == pytest.approx(0.0, abs=1e-12)
        assert fit.intercept_log10_power == pytest.approx(math.log10(3.3e-27), rel=1e-12, abs=0.0)
        assert not fit.degenerate

    def test_two_points_degenerate(self):
        series = DistanceSeries([0.0, 1.0], [1.0, 10.0 ** (-0.4305)], 5.204e6, 293.15)
        fit = fit_decay(series)
        assert fit.degenerate
        assert fit.alpha_db_per_mm == pytest.approx(4.305, rel=1e-12, abs=0.0)
        assert fit.alpha_std_error == 0.0

    def test_matches_linregress_on_noisy_data(self):
        # Uniform-weight fit must agree with scipy's line fit bit for bit
        # (same normal equations), including the slope standard error.
        d = np.linspace(0.0, 7.0, 8)
        covered = 0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            p = 10.0 ** (-ALPHA_REF * d / 10.0) * (1.0 + 0.01 * rng.standard_normal(d.size))
            series = DistanceSeries(d, p, 5.204e6, 293.15)
            fit = fit_decay(series)
            ref = stats.linregress(d, np.log10(p))
            assert fit.alpha_db_per_mm == pytest.approx(-10.0 * ref.slope, rel=1e-10, abs=0.0)
            assert fit.alpha_std_error == pytest.approx(10.0 * ref.stderr, rel=1e-10, abs=0.0)
            assert fit.intercept_log10_power == pytest.approx(ref.intercept, rel=1e-10, abs=1e-15)
            if abs(fit.alpha_db_per_mm - ALPHA_REF) < 2.0 * fit.alpha_std_error:
                covered += 1
        # 2-sigma coverage is about 93% at 6 degrees of freedom.
        assert covered >= 16

    def test_scale_invariance(self):
        d = np.linspace(0.0, 7.0, 8)
        rng = np.random.default_rng(7)
        p = 10.0 ** (-ALPHA_REF * d / 10.0) * (1.0 + 0.02 * rng.standard_normal(d.size))
        base = fit_decay(DistanceSeries(d, p, 5.204e6, 293.15))
        scaled = fit_decay(DistanceSeries(d, 1e6 * p, 5.204e6, 293.15))
        assert scaled.alpha_db_per_mm == pytest.approx(base.alpha_db_per_mm, rel=1e-12, abs=0.0)
        assert scaled.alpha_std_error == pytest.approx(base.alpha_std_error, rel=1e-12, abs=0.0)
        assert scaled.residual_rms == pytest.approx(base.residual_rms, rel=1e-9, abs=1e-15)
        assert scaled.intercept_log10_power == pytest.approx(
            base.intercept_log10_power + 6.0, rel=1e-12, abs=0.0
        )

    def test_constant_weights_match_unweighted(self):
        d = np.linspace(0.0, 7.0, 8)
        rng = np.random.default_rng(11)
        p = 10.0 ** (-ALPHA_REF * d / 10.0) * (1.0 + 0.02 * rng.standard_normal(d.size))
        series = DistanceSeries(d, p, 5.204e6, 293.15)
        plain = fit_decay(series)
        weighted = fit_decay(series, weights=np.full(d.size, 5.0))
        assert weighted.alpha_db_per_mm == pytest.approx(plain.alpha_db_per_mm, rel=1e-12, abs=0.0)
        assert weighted.alpha_std_error == pytest.approx(plain.alpha_std_error, rel=1e-12, abs=0.0)

    def test_heteroscedastic_weights_match_polyfit(self):
        # polyfit's w multiplies residuals, so w_polyfit = sqrt(our weights).
        d = np.linspace(0.0, 7.0, 8)
        rng = np.random.default_rng(3)
        sigma = np.linspace(0.005, 0.05, d.size)
        p = 10.0 ** (-ALPHA_REF * d / 10.0) * (1.0 + sigma * rng.standard_normal(d.size))
        w = 1.0 / sigma**2
        fit = fit_decay(DistanceSeries(d, p, 5.204e6, 293.15), weights=w)
        slope, intercept = np.polyfit(d, np.log10(p), 1, w=np.sqrt(w))
        assert fit.alpha_db_per_mm == pytest.approx(-10.0 * slope, rel=1e-10, abs=0.0)
        assert fit.intercept_log10_power == pytest.approx(intercept, rel=1e-10, abs=0.0)

    def test_rejects_nonpositive_power(self):
        series = DistanceSeries([0.0, 1.0, 2.0], [1.0, 0.5, 0.25], 5e6, 293.15)
        bad = DistanceSeries.__new__(DistanceSeries)
        object.__setattr__(bad, "distances_mm", series.distances_mm)
        object.__setattr__(bad, "peak_powers", np.array([1.0, 0.0, 0.25]))
        object.__setattr__(bad, "frequency", 5e6)
        object.__setattr__(bad, "temperature", 293.15)
        with pytest.raises(ValueError, match="positive"):
            fit_decay(bad)

    @pytest.mark.parametrize("weights", [[1.0, 2.0], [1.0, -1.0, 1.0], [0.0, 1.0, 1.0]])
    def test_rejects_bad_weights(self, weights):
        series = DistanceSeries([0.0, 1.0, 2.0], [1.0, 0.5, 0.25], 5e6, 293.15)
        with pytest.raises(ValueError, match="weights"):
            fit_decay(series, weights=weights)


class TestMeasurementSetup:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"rbw": 0.0},
            {"rbw": -10.0},
            {"vbw": 0.0},
            {"vbw": 2000.0},  # above rbw
            {"n_avg": 0},
            {"noise_variance": -0.1},
        ],
    )
    def test_rejects_bad_settings(self, kwargs):
        with pytest.raises(ValueError):
            MeasurementSetup(**kwargs)

    def test_defaults_are_self_consistent(self):
        setup = MeasurementSetup()
        assert setup.vbw <= setup.rbw
        assert setup.noise_variance == 1.0


QUIET = MeasurementSetup(
    interferometer=InterferometerConfig(dark_noise_asd=0.0),
    noise_variance=0.0,
    n_avg=2,
)
SHOT = MeasurementSetup(n_avg=10)
STRONG_SCENE = AcousticScene(frequency=5.204e6, source_pressure_amplitude=100.0)


class TestMeasureDistancePoint:
    def test_same_seed_reproduces_exactly(self):
        a = measure_distance_point(SHOT, STRONG_SCENE, 1.0, 42)
        b = measure_distance_point(SHOT, STRONG_SCENE, 1.0, 42)
        assert a == b

    def test_different_seed_changes_noise(self):
        a = measure_distance_point(SHOT, STRONG_SCENE, 1.0, 42)
        b = measure_distance_point(SHOT, STRONG_SCENE, 1.0, 43)
        assert a.peak_power != b.peak_power

    def test_strong_tone_is_usable(self):
        pt = measure_distance_point(SHOT, STRONG_SCENE, 0.0, 5)
        assert pt.usable
        assert pt.visibility_db > 30.0
        assert pt.peak_power > 0.0

    def test_peak_power_follows_absorption(self):
        near = measure_distance_point(SHOT, STRONG_SCENE, 0.0, 9)
        far = measure_distance_point(SHOT, STRONG_SCENE, 7.0, 9)
        expected = 10.0 ** (-ALPHA_REF * 7.0 / 10.0)
        assert far.peak_power / near.peak_power == pytest.approx(expected, rel=0.02, abs=0.0)

    def test_noiseless_point_reads_tone_exactly(self):
        # No quantum noise, no dark noise: the peak is the deterministic
        # tone and the fitted decay is the programmed decade law.
        pt = measure_distance_point(QUIET, STRONG_SCENE, 0.0, 0)
        interaction = interaction_at(QUIET.air, QUIET.beam, STRONG_SCENE, 0.0)
        expected = interaction.path_amplitude**2 / (2.0 * QUIET.rbw)
        assert pt.peak_power == pytest.approx(expected, rel=1e-6, abs=0.0)
        assert pt.usable


class TestFrequencySweep:
    def test_noiseless_sweep_reproduces_theory_exactly(self):
        rows = run_frequency_sweep(
            QUIET,
            [4.2e6, 5.204e6],
            [0.0, 1.0, 2.0, 3.0],
            100.0,
            master_seed=1,
        )
        for row in rows:
            assert not row.flagged
            assert row.n_usable == 4
            assert row.alpha_fit_db_per_mm == pytest.approx(
                row.alpha_theory_db_per_mm, rel=1e-6, abs=0.0
            )

    def test_shot_noise_sweep_tracks_theory(self):
        rows = run_frequency_sweep(
            SHOT,
            [4.2e6, 5.204e6, 6.45e6],
            [0.0, 1.5, 3.0, 4.5],
            10.0,
            master_seed=20260817,
        )
        for row in rows:
            assert not row.flagged
            assert row.alpha_fit_db_per_mm == pytest.approx(
                row.alpha_theory_db_per_mm, rel=0.05, abs=0.0
            )
            assert row.alpha_std_error >= 0.0
            assert row.alpha_theory_db_per_mm == pytest.approx(
                absorption_coefficient(SHOT.air.temperature, row.x).value, rel=1e-12, abs=0.0
            )

    def test_deterministic_and_row_seeds_reproducible(self):
        freqs = [4.2e6, 5.204e6]
        grid = [0.0, 2.0, 4.0]
        rows_a = run_frequency_sweep(SHOT, freqs, grid, 10.0, master_seed=7)
        rows_b = run_frequency_sweep(SHOT, freqs, grid, 10.0, master_seed=7)
        assert rows_a == rows_b
        # Row 1 rebuilt point by point from the documented seed layout.
        scene = AcousticScene(frequency=freqs[1], source_pressure_amplitude=10.0)
        points = [
            measure_distance_point(SHOT, scene, d, point_seed(7, 1, j))
            for j, d in enumerate(grid)
        ]
        series = DistanceSeries(
            [pt.distance_mm for pt in points],
            [pt.peak_power for pt in points],
            freqs[1],
            SHOT.air.temperature,
        )
        refit = fit_decay(series)
        assert rows_a[1].alpha_fit_db_per_mm == refit.alpha_db_per_mm

    def test_silent_source_row_is_flagged(self):
        rows = run_frequency_sweep(SHOT, [5.204e6], [0.0, 1.0, 2.0], 0.0, master_seed=3)
        row = rows[0]
        assert row.flagged
        assert math.isnan(row.alpha_fit_db_per_mm)
        assert math.isnan(row.alpha_std_error)
        assert row.n_usable < 2
        assert not math.isnan(row.alpha_theory_db_per_mm)

    def test_per_frequency_amplitudes_and_grids(self):
        rows = run_frequency_sweep(
            QUIET,
            [4.2e6, 5.204e6],
            [0.0, 1.0],
            [50.0, 100.0],
            master_seed=1,
            distance_grids=[[0.0, 1.0, 2.0], [0.0, 3.0]],
        )
        assert rows[0].usable_distances_mm == (0.0, 1.0, 2.0)
        assert rows[1].usable_distances_mm == (0.0, 3.0)

    def test_amplitude_count_must_match(self):
        with pytest.raises(ValueError, match="amplitude"):
            run_frequency_sweep(QUIET, [4.2e6, 5.204e6], [0.0, 1.0], [50.0], master_seed=1)

    def test_grid_count_must_match(self):
        with pytest.raises(ValueError, match="grid"):
            run_frequency_sweep(
                QUIET, [4.2e6], [0.0, 1.0], 50.0, master_seed=1, distance_grids=[[0.0], [1.0]]
            )


class TestTemperatureSweep:
    def test_theory_column_tracks_row_temperature(self):
        temps = [291.15, 318.15, 345.15]
        rows = run_temperature_sweep(SHOT, temps, 5.204e6, [0.0, 1.5, 3.0, 4.5], 10.0, 99)
        assert [row.x for row in rows] == temps
        for row in rows:
            assert row.alpha_theory_db_per_mm == pytest.approx(
                absorption_coefficient(row.x, 5.204e6).value, rel=1e-12, abs=0.0
            )
            assert not row.flagged
            assert row.alpha_fit_db_per_mm == pytest.approx(
                row.alpha_theory_db_per_mm, rel=0.05, abs=0.0
            )

    def test_fitted_alpha_rises_with_temperature(self):
        rows = run_temperature_sweep(
            QUIET, [291.15, 345.15], 5.204e6, [0.0, 1.0, 2.0], 100.0, 1
        )
        assert rows[1].alpha_fit_db_per_mm > rows[0].alpha_fit_db_per_mm
        assert rows[1].alpha_fit_db_per_mm / rows[0].alpha_fit_db_per_mm == pytest.approx(
            345.15 / 291.15, rel=1e-6, abs=0.0
        )


DEMO_SETUP = MeasurementSetup()


class TestSqueezingDemo:
    def test_weak_tone_needs_squeezing(self):
        # Tone PSD parked at 0.3 of the shot floor: buried at shot noise,
        # 6 dB proud of a 10 dB squeezed floor.
        floor = DEMO_SETUP.interferometer.shot_noise_floor_asd
        target_pa = math.sqrt(0.3) * floor / (1e-3 * PIEZOOPTIC_COEFFICIENT)
        pressure = demo_pressure_for_subtracted_peak(DEMO_SETUP, 5.204e6, target_pa, 1.0)
        demo = run_squeezing_demo(DEMO_SETUP, 5.204e6, pressure, 0.1, 38.7, seed=12)
        assert not demo.shot.visible
        assert demo.squeezed.visible
        assert not demo.anti_squeezed.visible

    def test_normalized_floors_sit_at_their_variances(self):
        pressure = demo_pressure_for_subtracted_peak(
            DEMO_SETUP, 5.204e6, 1e-2, 1.0
        )
        demo = run_squeezing_demo(DEMO_SETUP, 5.204e6, pressure, 0.1, 38.7, seed=4)
        for trace_obj, variance in [
            (demo.shot, 1.0),
            (demo.squeezed, 0.1),
            (demo.anti_squeezed, 38.7),
        ]:
            trace = trace_obj.trace
            # Median of off-peak bins; dark noise adds 0.1 of shot on top.
            off_peak = np.abs(trace.frequencies - 5.204e6) > 20.0 * trace.rbw
            floor = float(np.median(trace.values[off_peak]))
            assert floor == pytest.approx(variance + 0.1, rel=0.05, abs=0.0)

    def test_strong_tone_reads_same_pressure_on_all_floors(self):
        target_pa = 1e-2  # far above every floor
        pressure = demo_pressure_for_subtracted_peak(DEMO_SETUP, 5.204e6, target_pa, 1.0)
        demo = run_squeezing_demo(DEMO_SETUP, 5.204e6, pressure, 0.1, 38.7, seed=8)
        for trace_obj in (demo.shot, demo.squeezed, demo.anti_squeezed):
            assert trace_obj.visible
            assert trace_obj.signal_asd_pa == pytest.approx(target_pa, rel=0.05, abs=0.0)
            assert trace_obj.peak.frequency == pytest.approx(5.204e6, abs=DEMO_SETUP.rbw)

    def test_silent_scene_triggers_no_detection(self):
        demo = run_squeezing_demo(DEMO_SETUP, 5.204e6, 0.0, 0.1, 38.7, seed=21)
        assert not demo.shot.visible
        assert not demo.squeezed.visible
        assert not demo.anti_squeezed.visible
        assert demo.path_amplitude == 0.0

    def test_records_calibration_inputs(self):
        demo = run_squeezing_demo(DEMO_SETUP, 5.204e6, 0.4, 0.1, 38.7, seed=2, z_m_calibration=2e-3)
        assert demo.z_m_calibration == 2e-3
        assert demo.shot_floor_asd == DEMO_SETUP.interferometer.shot_noise_floor_asd
        assert demo.pressure_amplitude == 0.4
        interaction = interaction_at(DEMO_SETUP.air, DEMO_SETUP.beam, AcousticScene(5.204e6, 0.4), 0.0)
        assert demo.path_amplitude == interaction.path_amplitude
        assert demo.shot.trace.vbw == DEMO_SETUP.vbw

    def test_rejects_nonpositive_variances(self):
        with pytest.raises(ValueError, match="variance"):
            run_squeezing_demo(DEMO_SETUP, 5.204e6, 0.4, 0.0, 38.7, seed=1)
        with pytest.raises(ValueError, match="variance"):
            run_squeezing_demo(DEMO_SETUP, 5.204e6, 0.4, 0.1, -1.0, seed=1)


class TestDemoPressureTarget:
    def test_power_mode_arithmetic(self):
        setup = DEMO_SETUP
        target_pa = 5e-3
        target_m = target_pa * 1e-3 * PIEZOOPTIC_COEFFICIENT
        wavelength = setup.air.acoustic_wavelength(5.204e6)
        z_model = effective_interaction_length(setup.beam, wavelength).value
        expected = math.sqrt(2.0 * setup.rbw) * target_m / (PIEZOOPTIC_COEFFICIENT * z_model)
        got = demo_pressure_for_subtracted_peak(setup, 5.204e6, target_pa, 1.0)
        assert got == pytest.approx(expected, rel=1e-12, abs=0.0)

    def test_amplitude_mode_needs_more_drive_over_a_floor(self):
        p_power = demo_pressure_for_subtracted_peak(DEMO_SETUP, 5.204e6, 1e-3, 1.0)
        p_amp = demo_pressure_for_subtracted_peak(
            DEMO_SETUP, 5.204e6, 1e-3, 1.0, subtraction="amplitude"
        )
        assert p_amp > p_power

    def test_amplitude_mode_collapses_to_power_without_floor(self):
        quiet = MeasurementSetup(interferometer=InterferometerConfig(dark_noise_asd=0.0))
        p_power = demo_pressure_for_subtracted_peak(quiet, 5.204e6, 1e-3, 0.0)
        p_amp = demo_pressure_for_subtracted_peak(
            quiet, 5.204e6, 1e-3, 0.0, subtraction="amplitude"
        )
        assert p_amp == pytest.approx(p_power, rel=1e-12, abs=0.0)

    def test_measured_peak_hits_the_target(self):
        target_pa = 5e-2  # 100x the shot floor in power, scatter ~4%
        pressure = demo_pressure_for_subtracted_peak(DEMO_SETUP, 5.204e6, target_pa, 1.0)
        demo = run_squeezing_demo(DEMO_SETUP, 5.204e6, pressure, 0.1, 38.7, seed=17)
        assert demo.shot.signal_asd_pa == pytest.approx(target_pa, rel=0.15, abs=0.0)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"target_pa_per_rthz": 0.0},
            {"target_pa_per_rthz": -1e-3},
            {"floor_variance": -1.0},
            {"subtraction": "median"},
        ],
    )
    def test_rejects_bad_arguments(self, kwargs):
        args = {"target_pa_per_rthz": 1e-3, "floor_variance": 1.0}
        args.update(kwargs)
        with pytest.raises(ValueError):
            demo_pressure_for_subtracted_peak(
                DEMO_SETUP, 5.204e6, args["target_pa_per_rthz"], args["floor_variance"],
                subtraction=args.get("subtraction", "power"),
            )


class TestSeedLayout:
    def test_point_seed_arithmetic(self):
        assert point_seed(100, 0, 0) == 100
        assert point_seed(100, 2, 3) == 100 + 2 * ROW_SEED_STRIDE + 3
        seeds = {point_seed(0, i, j) for i in range(5) for j in range(10)}
        assert len(seeds) == 50


class TestSweepCsv:
    def test_frequency_table_bytes(self, tmp_path):
        rows = [
            SweepRow(5204000.0, 4.305, 0.125, ALPHA_REF, 4, (0.0, 1.0, 2.0, 3.0), False, False),
            SweepRow(7200000.0, math.nan, math.nan, 8.24, 1, (0.0,), True, False),
        ]
        path = tmp_path / "sweep.csv"
        write_sweep_csv(rows, path, "frequency")
        lines = path.read_text().splitlines()
        assert lines[0] == "f_hz,alpha_fit_db_per_mm,alpha_err,alpha_theory_db_per_mm"
        assert lines[1] == f"5204000.0,4.305,0.125,{ALPHA_REF!r}"
        assert lines[2] == "7200000.0,nan,nan,8.24"

    def test_temperature_header(self, tmp_path):
        rows = [SweepRow(293.15, 4.3, 0.1, ALPHA_REF, 3, (0.0, 1.0, 2.0), False, False)]
        path = tmp_path / "sweep.csv"
        write_sweep_csv(rows, path, "temperature")
        assert path.read_text().startswith("t_k,")

    def test_rejects_unknown_kind(self, tmp_path):
        with pytest.raises(ValueError, match="kind"):
            write_sweep_csv([], tmp_path / "x.csv", "humidity")
