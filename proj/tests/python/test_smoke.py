import math

import numpy as np
import pytest

import attncomp


def test_compress_keeps_original_order():
    r = attncomp.compress(0.1, [("a", 0.2), ("b", 0.6), ("c", 0.1)], 0.95, 0.01)
    assert r.selection_order == ["b", "a", "c"]
    assert r.kept == ["a", "b", "c"]
    assert r.cumulative_score == pytest.approx(1.0)


def test_segment_scores_sum_to_one():
    rng = np.random.default_rng(0)
    a = rng.random((3, 7))
    a /= a.sum(axis=1, keepdims=True)
    spans = [("instruction", "ins", 0, 2), ("document", "d1", 2, 5), ("document", "d2", 5, 7)]
    scores = attncomp.segment_scores(a, spans)
    ins = scores["instruction"]
    assert math.isclose(ins + sum(s for _, s in scores["documents"]), 1.0, abs_tol=1e-9)
    assert math.isclose(ins, a[:, :2].sum(axis=1).mean(), abs_tol=1e-12)


def test_metrics():
    assert attncomp.normalize_answer("The Eiffel Tower!") == "eiffel tower"
    assert attncomp.normalize_and_match("It is the Eiffel Tower", ["Eiffel Tower"])
    assert attncomp.token_f1("Barack Obama", ["Obama"]) == pytest.approx(2 / 3)
    assert attncomp.compression_rate([1000], [100]) == pytest.approx(10.0)


def test_invalid_input_raises():
    with pytest.raises(ValueError):
        attncomp.compress(0.0, [("a", 1.0)], 1.5, 0.01)


def test_attention_rows_are_stochastic():
    head = attncomp.init_random(2, 8, 4, 1)
    rng = np.random.default_rng(1)
    a = attncomp.attention(head, rng.standard_normal((6, 8)), rng.standard_normal((3, 8)))
    assert a.shape == (3, 6)
    np.testing.assert_allclose(a.sum(axis=1), 1.0, atol=1e-12)


def test_gradcheck_and_training():
    passed, err = attncomp.gradcheck(seed=3, instances=5)
    assert passed and err <= 1e-4
    cfg = attncomp.TrainConfig()
    cfg.learning_rate = 1e-2
    cfg.epochs = 3
    head, losses = attncomp.train_synthetic(20, 7, cfg, 1)
    assert len(losses) == 3
    assert losses[-1] < losses[0]
    assert head.heads == cfg.heads
