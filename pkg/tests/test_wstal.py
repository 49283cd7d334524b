"""Weakly-supervised localization benchmark: generator, trainer, scoring."""

from dataclasses import replace

import numpy as np
import pytest

from videomix.cam import compute_tcam, extract_proposals
from videomix.errors import SpecInfeasible, ValueOutOfRange
from videomix.toylab import ToyModel
from videomix.wstal_toy import (
    WstalConfig,
    WstalSpec,
    eval_wstal,
    gen_wstal_dataset,
    run_wstal_benchmark,
    train_wstal,
)

SMALL = WstalSpec(train_per_class=6, test_per_class=3, seed=0)


def test_spec_validation():
    with pytest.raises(ValueOutOfRange):
        WstalSpec(k=1)
    with pytest.raises(SpecInfeasible):
        WstalSpec(k=4, dim=4)  # no room for the context dim
    with pytest.raises(SpecInfeasible):
        WstalSpec(min_len=0)
    with pytest.raises(SpecInfeasible):
        WstalSpec(min_len=20, max_len=10)
    with pytest.raises(SpecInfeasible):
        WstalSpec(max_len=200, segments=100)


def test_config_validation():
    with pytest.raises(ValueOutOfRange):
        WstalConfig(epochs=0)
    with pytest.raises(ValueOutOfRange):
        WstalConfig(lr=-1.0)


def test_dataset_sizes_ids_and_labels():
    train_v, test_v, gts = gen_wstal_dataset(SMALL)
    assert len(train_v) == 4 * 6
    assert len(test_v) == len(gts) == 4 * 3
    assert [g.video_id for g in gts[:3]] == ["test-000", "test-001", "test-002"]
    for cls in range(4):
        for v in train_v[cls * 6:(cls + 1) * 6]:
            assert int(np.argmax(v.label.masses)) == cls
        for g in gts[cls * 3:(cls + 1) * 3]:
            assert g.k == cls


def test_dataset_deterministic():
    a_train, a_test, a_gts = gen_wstal_dataset(SMALL)
    b_train, b_test, b_gts = gen_wstal_dataset(SMALL)
    assert all(x.data.tobytes() == y.data.tobytes()
               for x, y in zip(a_train + a_test, b_train + b_test))
    assert a_gts == b_gts


def test_planted_cues_match_ground_truth():
    spec = replace(SMALL, noise=0.0)
    _, test_v, gts = gen_wstal_dataset(spec)
    for video, gt in zip(test_v, gts):
        data = video.data
        assert spec.min_len <= gt.end - gt.start <= spec.max_len
        assert 0 <= gt.start and gt.end <= spec.segments
        # Action dim fires exactly inside the interval.
        fired = np.flatnonzero(data[:, gt.k] > 0.5)
        assert fired.tolist() == list(range(gt.start, gt.end))
        # Context dim carries the class-graded level on every segment.
        level = (gt.k + 1) / (spec.k + 1)
        assert np.allclose(data[:, spec.k], level, atol=1e-6)


def test_train_deterministic_and_mixing_changes_weights():
    train_v, _, _ = gen_wstal_dataset(SMALL)
    cfg = WstalConfig(epochs=5, prob=1.0)
    a = train_wstal(train_v, SMALL.k, cfg)
    b = train_wstal(train_v, SMALL.k, cfg)
    assert a.weights.tobytes() == b.weights.tobytes()
    assert a.bias.tobytes() == b.bias.tobytes()
    plain = train_wstal(train_v, SMALL.k, replace(cfg, use_featmix=False))
    assert a.weights.tobytes() != plain.weights.tobytes()


def test_prob_zero_equals_no_featmix():
    train_v, _, _ = gen_wstal_dataset(SMALL)
    gated_off = train_wstal(train_v, SMALL.k, WstalConfig(epochs=4, prob=0.0))
    plain = train_wstal(train_v, SMALL.k, WstalConfig(epochs=4, use_featmix=False))
    assert gated_off.weights.tobytes() == plain.weights.tobytes()
    assert gated_off.bias.tobytes() == plain.bias.tobytes()


def test_action_only_model_localizes_perfectly():
    spec = replace(SMALL, noise=0.0)
    _, test_v, gts = gen_wstal_dataset(spec)
    weights = np.zeros((spec.k, spec.dim))
    weights[np.arange(spec.k), np.arange(spec.k)] = 1.0
    model = ToyModel(weights, np.zeros(spec.k))
    assert eval_wstal(model, test_v, gts) == 1.0
    # Proposals from the oracle model reproduce each interval exactly.
    tcam = compute_tcam(test_v[0], model.weights, model.bias)
    props = extract_proposals(tcam, gts[0].k, 0.5, video_id=gts[0].video_id)
    assert [(p.start, p.end) for p in props] == [(gts[0].start, gts[0].end)]


def test_context_only_model_localizes_poorly():
    spec = replace(SMALL, noise=0.0)
    _, test_v, gts = gen_wstal_dataset(spec)
    weights = np.zeros((spec.k, spec.dim))
    weights[:, spec.k] = np.arange(spec.k) + 1.0  # score rises with context level
    model = ToyModel(weights, np.zeros(spec.k))
    # Flat-in-time scores make every proposal span the whole video.
    score = eval_wstal(model, test_v, gts)
    assert score < 0.5


def test_benchmark_arms_at_reference_settings():
    spec = WstalSpec(seed=0)
    mixed = run_wstal_benchmark(spec, WstalConfig(use_featmix=True))
    plain = run_wstal_benchmark(spec, WstalConfig(use_featmix=False))
    assert mixed == 1.0 and plain == 1.0
