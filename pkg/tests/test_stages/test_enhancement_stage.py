"""Test the enhancement stage."""

import numpy as np
import pytest

from stages.enhancement_stage import EnhancementStage, enhance_record
from tests.conftest import make_record
from utils.signal_processing import differentiate
from utils.validators import DenoiseConfig, InteractionCategory


def noisy_stop(rng, segment_id: str, category=InteractionCategory.LIGHT_STOP):
    clean = np.concatenate([np.full(30, 8.0), np.linspace(8.0, 0.0, 41)[1:], np.zeros(21)])
    speeds = np.clip(clean + rng.normal(scale=0.3, size=91), 0.0, None)
    return make_record(speeds, accelerations=differentiate(speeds), category=category, segment_id=segment_id)


def test_enhance_record_reduces_jerk_anomalies(rng, thresholds):
    """Test that denoising lowers the jerk-derived metrics."""
    record = noisy_stop(rng, "n1")
    enhanced, before, after, alternate = enhance_record(record, DenoiseConfig(levels=3), thresholds)
    assert enhanced.segment_id == record.segment_id
    assert np.array_equal(enhanced.positions(), record.positions())
    assert after.anomaly_jerk_pct <= before.anomaly_jerk_pct
    assert after.anomaly_inversion_pct < before.anomaly_inversion_pct
    assert alternate.anomaly_jerk_pct >= 0.0


def test_stage_comparison_rows(rng, thresholds):
    """Test per-category rows plus All, aligned outputs and job independence."""
    records = [
        noisy_stop(rng, "a"),
        noisy_stop(rng, "b", InteractionCategory.SIGN_FOUR_WAY),
        noisy_stop(rng, "c"),
    ]
    stage = EnhancementStage(DenoiseConfig(), thresholds)
    enhanced, pairs, comparisons = stage.execute(records, jobs=1)

    assert [r.segment_id for r in enhanced] == ["a", "b", "c"]
    assert len(pairs) == 3
    assert [(c.category, c.segments) for c in comparisons] == [("LightStop", 2), ("SignFourWay", 1), ("All", 3)]
    assert comparisons[-1].after_inversion_pct <= comparisons[-1].before_inversion_pct

    again, _, _ = stage.execute(records, jobs=2)
    assert again == enhanced


def test_stage_with_no_records(thresholds):
    """Test an empty batch."""
    assert EnhancementStage(DenoiseConfig(), thresholds).execute([]) == ([], [], [])


if __name__ == "__main__":
    pytest.main([__file__, "-v"])
