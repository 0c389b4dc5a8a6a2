from __future__ import annotations

import math

import pytest

from aovsim.air import (
    AirState,
    absorption_coefficient,
    attenuated_pressure,
    piezooptic_coefficient,
)

REFERENCE_AIR = AirState(
    temperature=293.15,
    static_pressure=101325.0,
    relative_humidity=0.40,
    co2_fraction=0.00045,
)


class TestAirState:
    def test_reference_state_valid(self):
        assert REFERENCE_AIR.temperature == 293.15
        assert REFERENCE_AIR.sound_speed == pytest.approx(343.0)

    def test_sound_speed_scales_with_sqrt_temperature(self):
        warm = REFERENCE_AIR.with_temperature(343.15)
        assert warm.sound_speed == pytest.approx(343.0 * math.sqrt(343.15 / 293.15), rel=1e-12, abs=0.0)

    def test_explicit_sound_speed_honored(self):
        # 317 m/s makes 5.204 MHz come out near 61 um.
        air = AirState(293.15, 101325.0, 0.40, 0.00045, sound_speed=317.0)
        assert air.acoustic_wavelength(5.204e6) == pytest.approx(317.0 / 5.204e6)

    def test_acoustic_wavelength_default_speed(self):
        lam = REFERENCE_AIR.acoustic_wavelength(5.204e6)
        assert lam == pytest.approx(343.0 / 5.204e6, rel=1e-12, abs=0.0)  # about 66 um

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(temperature=0.0),
            dict(temperature=-5.0),
            dict(static_pressure=0.0),
            dict(relative_humidity=-0.1),
            dict(relative_humidity=1.2),
            dict(co2_fraction=-1e-5),
            dict(co2_fraction=0.02),
            dict(sound_speed=0.0),
        ],
    )
    def test_invalid_states_rejected(self, kwargs):
        base = dict(
            temperature=293.15,
            static_pressure=101325.0,
            relative_humidity=0.40,
            co2_fraction=0.00045,
        )
        base.update(kwargs)
        with pytest.raises(ValueError):
            AirState(**base)


class TestPiezoopticCoefficient:
    def test_reference_value(self):
        coeff = piezooptic_coefficient(REFERENCE_AIR)
        assert coeff.value == pytest.approx(2.072e-9)
        assert coeff.in_reference

    def test_hot_state_same_constant_but_flagged(self):
        coeff = piezooptic_coefficient(REFERENCE_AIR.with_temperature(345.15))
        assert coeff.value == pytest.approx(2.072e-9)
        assert not coeff.in_reference

    def test_low_pressure_flagged(self):
        air = AirState(293.15, 96000.0, 0.40, 0.00045)
        coeff = piezooptic_coefficient(air)
        assert coeff.value == pytest.approx(2.072e-9)
        assert not coeff.in_reference

    def test_window_edges(self):
        inside = AirState(298.0, 101325.0 * 1.049, 0.40, 0.00045)
        assert piezooptic_coefficient(inside).in_reference
        outside = AirState(298.5, 101325.0, 0.40, 0.00045)
        assert not piezooptic_coefficient(outside).in_reference


class TestAbsorptionCoefficient:
    def test_headline_value(self):
        alpha = absorption_coefficient(293.15, 5.204e6)
        assert alpha.value == pytest.approx(4.305, rel=1e-3, abs=0.0)

    def test_zero_frequency(self):
        assert absorption_coefficient(293.15, 0.0).value == 0.0

    def test_hot_value(self):
        alpha = absorption_coefficient(345.15, 5.204e6)
        assert alpha.value == pytest.approx(5.068, rel=1e-3, abs=0.0)

    def test_low_frequency_value(self):
        alpha = absorption_coefficient(293.15, 4.2e6)
        assert alpha.value == pytest.approx(2.804, rel=1e-3, abs=0.0)

    def test_quadratic_in_frequency(self):
        f = 3.7e6
        assert absorption_coefficient(293.15, 2 * f).value == pytest.approx(
            4.0 * absorption_coefficient(293.15, f).value, rel=1e-15, abs=0.0
        )

    def test_linear_in_temperature(self):
        t1, t2 = 291.15, 345.15
        a1 = absorption_coefficient(t1, 5.204e6).value
        a2 = absorption_coefficient(t2, 5.204e6).value
        assert a1 / a2 == pytest.approx(t1 / t2, rel=1e-15, abs=0.0)

    def test_records_inputs(self):
        alpha = absorption_coefficient(300.0, 6e6)
        assert alpha.temperature == 300.0
        assert alpha.frequency == 6e6

    def test_negative_frequency_rejected(self):
        with pytest.raises(ValueError):
            absorption_coefficient(293.15, -1.0)

    def test_nonpositive_temperature_rejected(self):
        with pytest.raises(ValueError):
            absorption_coefficient(0.0, 5e6)


class TestAttenuatedPressure:
    def test_zero_distance_identity(self):
        assert attenuated_pressure(1.0, 123.4, 0.0) == 1.0

    def test_one_mm_at_headline_alpha(self):
        assert attenuated_pressure(1.0, 4.305, 1.0) == pytest.approx(0.6093, rel=1e-3, abs=0.0)

    def test_seven_mm(self):
        assert attenuated_pressure(1.0, 4.305, 7.0) == pytest.approx(10 ** (-4.305 * 7 / 20), rel=1e-12, abs=0.0)
        assert attenuated_pressure(1.0, 4.305, 7.0) == pytest.approx(0.0311, rel=2e-2, abs=0.0)

    def test_semigroup_property(self):
        p, alpha = 2.5, 3.3
        direct = attenuated_pressure(p, alpha, 4.1)
        chained = attenuated_pressure(attenuated_pressure(p, alpha, 1.6), alpha, 2.5)
        assert chained == pytest.approx(direct, rel=1e-12, abs=0.0)

    def test_monotone_in_distance_and_alpha(self):
        prev = attenuated_pressure(1.0, 2.0, 0.0)
        for d in [0.5, 1.0, 2.0, 5.0]:
            cur = attenuated_pressure(1.0, 2.0, d)
            assert cur <= prev
            prev = cur
        assert attenuated_pressure(1.0, 5.0, 1.0) <= attenuated_pressure(1.0, 2.0, 1.0)

    def test_negative_inputs_rejected(self):
        with pytest.raises(ValueError):
            attenuated_pressure(-1.0, 1.0, 1.0)
        with pytest.raises(ValueError):
            attenuated_pressure(1.0, -1.0, 1.0)
        with pytest.raises(ValueError):
            attenuated_pressure(1.0, 1.0, -1.0)
