"""Test Pydantic schemas."""

import numpy as np
import pytest
from pydantic import ValidationError

from tests.conftest import make_record, make_segment, straight_positions
from utils.validators import (
    CalibrationSpec,
    DenoiseConfig,
    IdmParams,
    IdmRanges,
    InteractionCategory,
    LightClassification,
    LightRuleParams,
    LightState,
    QualityThresholds,
    RunManifest,
    ScenarioSpec,
    Segment,
    SignClassification,
    SignRuleParams,
    StopSign,
    TimeStep,
    TrafficLightTrack,
    TrajectoryRecord,
    samples_for,
    validate_segment,
)


def test_well_formed_segment_has_no_violations():
    """Test that a 91-step segment with valid context validates cleanly."""
    segment = make_segment(straight_positions(5.0), [5.0] * 91, lights=[((0.0, 20.0), 6)], signs=[(3.0, 4.0)])
    assert validate_segment(segment) == []


def test_short_segment_reports_length():
    """Test that a 90-step segment names the steps field."""
    segment = make_segment(straight_positions(5.0)[:90], [5.0] * 90)
    violations = validate_segment(segment)
    assert len(violations) == 1
    assert violations[0].field == "steps"


def test_state_code_out_of_range():
    """Test that light state code 9 is reported at its timestep."""
    states = [6] * 91
    states[17] = 9
    segment = make_segment(straight_positions(5.0), [5.0] * 91)
    segment = Segment(
        id=segment.id,
        steps=segment.steps,
        lights=(TrafficLightTrack(stop_line=(0.0, 10.0), states=tuple(states)),),
    )
    violations = validate_segment(segment)
    assert [(v.field, v.index) for v in violations] == [("lights[0].states", 17)]


def test_negative_speed_and_broken_index():
    """Test speed and index invariants."""
    steps = list(make_segment(straight_positions(5.0), [5.0] * 91).steps)
    steps[3] = TimeStep(index=4, position=steps[3].position, speed=-0.5)
    steps[10] = TimeStep(index=12, position=steps[10].position, speed=5.0)
    violations = validate_segment(Segment(id="bad", steps=tuple(steps)))
    fields = {(v.field, v.index) for v in violations}
    assert ("steps.speed", 3) in fields
    assert ("steps.index", 10) in fields


def test_non_finite_sign():
    """Test that NaN sign coordinates are rejected."""
    segment = make_segment(straight_positions(5.0), [5.0] * 91, signs=[(float("nan"), 1.0)])
    assert validate_segment(segment)[0].field == "signs[0].position"


def test_light_state_names():
    """Test decoding of the nine state codes."""
    light = TrafficLightTrack(stop_line=(0.0, 0.0), states=(0, 3, 4, 8, 9))
    assert light.state_names() == ["UNKNOWN", "ARROW_GO", "STOP", "FLASHING_CAUTION", "INVALID"]
    assert LightState.GO == 6


def test_samples_for():
    """Test seconds to sample conversion."""
    assert samples_for(1.0) == 10
    assert samples_for(0.5) == 5
    assert samples_for(2.0) == 20


def test_light_rule_defaults():
    """Test the shipped traffic light thresholds."""
    params = LightRuleParams()
    assert (params.l_move, params.d_pass, params.d_poly, params.p_extend) == (1.0, 0.1, 6, 0.2)
    assert (params.v_stop_light, params.l_begin, params.l_end, params.d_stop, params.l_extend) == (1.0, 1.0, 1.0, 5.0, 2.0)
    assert (params.eta_left, params.eta_right, params.eta_through_1, params.eta_through_2) == (0.3, -0.3, 0.1, -0.1)


def test_sign_rule_defaults():
    """Test the shipped stop sign thresholds."""
    params = SignRuleParams()
    assert (params.r_stop, params.l_stop, params.v_stop_sign, params.delta_t_stop) == (5.0, 0.5, 0.5, 1.0)
    assert (params.eta_left_sign, params.eta_right_sign) == (0.3, -0.3)
    assert (params.dbscan_eps, params.dbscan_min_pts) == (28.0, 2)
    assert params.stop_area_center == "nearest_point"


def test_eta_ordering_rejected():
    """Test that crossed turn thresholds fail validation."""
    with pytest.raises(ValidationError):
        LightRuleParams(eta_left=0.1, eta_through_1=0.3)


def test_p_extend_bounds():
    """Test that the extension fraction must lie in (0, 1)."""
    with pytest.raises(ValidationError):
        LightRuleParams(p_extend=1.0)


def test_unknown_key_rejected():
    """Test extra keys are forbidden in parameter sections."""
    with pytest.raises(ValidationError):
        SignRuleParams(dbscan_radius=30.0)


def test_quality_threshold_bands():
    """Test band ordering and window length checks."""
    assert QualityThresholds().window_samples == 10
    with pytest.raises(ValidationError):
        QualityThresholds(accel_min=5.0, accel_max=-8.0)
    with pytest.raises(ValidationError):
        QualityThresholds(window=0.1)


def test_denoise_config_validation():
    """Test wavelet name, extension mode and depth checks."""
    assert DenoiseConfig().wavelet == "db6"
    with pytest.raises(ValidationError):
        DenoiseConfig(wavelet="not-a-wavelet")
    with pytest.raises(ValidationError):
        DenoiseConfig(boundary="mirror-ish")
    with pytest.raises(ValidationError):
        DenoiseConfig(levels=5)


def test_idm_params_array_round_trip():
    """Test parameter vector ordering."""
    params = IdmParams(v0=10.0, T=1.5, a_max=1.0, b=2.0, s0=2.0, delta=4.0)
    assert np.allclose(params.as_array(), [10.0, 1.5, 1.0, 2.0, 2.0, 4.0])
    assert IdmParams.from_array(params.as_array()) == params


def test_idm_ranges_must_be_positive_intervals():
    """Test range validation."""
    with pytest.raises(ValidationError):
        IdmRanges(T=(2.0, 1.0))
    with pytest.raises(ValidationError):
        IdmRanges(s0=(0.0, 1.0))
    lows, highs = IdmRanges().bounds()
    assert np.all(lows < highs)


def test_calibration_spec_defaults():
    """Test the 15/4 default split and sample count."""
    spec = CalibrationSpec()
    assert spec.n_samples == 100_000
    assert spec.calibration_fraction == pytest.approx(15 / 19)
    assert spec.objective == "pooled"


def test_record_requires_null_distance_without_anchor():
    """Test that a distance without a stop line is rejected."""
    speeds = [5.0] * 91
    with pytest.raises(ValidationError):
        make_record(speeds, stop_line=None, gaps=[10.0] * 91)


def test_record_requires_91_rows():
    """Test record length."""
    record = make_record([5.0] * 91)
    with pytest.raises(ValidationError):
        TrajectoryRecord(segment_id="x", category=InteractionCategory.NONE, rows=record.rows[:90])


def test_record_kinematics_copy():
    """Test that with_kinematics only swaps speed and acceleration."""
    record = make_record([5.0] * 91, stop_line=(0.0, 100.0), gaps=[50.0] * 91)
    updated = record.with_kinematics(np.full(91, 4.0), np.full(91, -1.0))
    assert np.all(updated.speeds() == 4.0)
    assert np.all(updated.accelerations() == -1.0)
    assert np.array_equal(updated.positions(), record.positions())
    assert updated.stop_line == record.stop_line


def test_run_manifest_counts_must_sum():
    """Test manifest count conservation."""
    RunManifest(command="extract", output_dir="out", total_segments=3, category_counts={"LightStop": 1, "None": 2})
    with pytest.raises(ValidationError):
        RunManifest(command="extract", output_dir="out", total_segments=4, category_counts={"LightStop": 1, "None": 2})


def test_classification_consistency():
    """Test that categories and anchors come together."""
    light = TrafficLightTrack(stop_line=(0.0, 0.0), states=(6,) * 91)
    assert LightClassification().category == InteractionCategory.NONE
    with pytest.raises(ValidationError):
        LightClassification(category=InteractionCategory.LIGHT_STOP)
    with pytest.raises(ValidationError):
        LightClassification(category=InteractionCategory.SIGN_FOUR_WAY, influencing_light=light)
    with pytest.raises(ValidationError):
        SignClassification(category=InteractionCategory.NONE, initial_nearest_sign=StopSign(position=(1.0, 1.0)))


def test_scenario_spec_rejects_negative_noise():
    """Test scenario recipe validation."""
    with pytest.raises(ValidationError):
        ScenarioSpec(category=InteractionCategory.LIGHT_STOP, noise_sigma_speed=-1.0)
    with pytest.raises(ValidationError):
        ScenarioSpec(category=InteractionCategory.LIGHT_STOP, colour="red")


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
