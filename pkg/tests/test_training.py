from __future__ import annotations

import numpy as np
import pytest

from motifrep.dataset import build_dataset
from motifrep.model import (
    CheckpointError,
    ModelConfig,
    ModelState,
    checkpoint_hash,
    classify_tokens,
    decode_tokens,
    gradient_check,
    layer_gradient_checks,
    load_checkpoint,
    save_checkpoint,
    train,
)
from motifrep.model.training import TrainingDivergedError, sample_matrices
from motifrep.rules import RepetitionType
from motifrep.synthetic import synthetic_corpus

TINY = ModelConfig(layers=1, heads=2, hidden=16, feed_forward=32,
                   embedding_sizes=(4, 4, 4, 4, 8, 4, 4), label_embedding=4,
                   batch_size=8, max_steps=15, learning_rate=1e-3, seed=0)


@pytest.fixture(scope="module")
def samples():
    return build_dataset(synthetic_corpus(songs_per_type=10, seed=12)).samples


class TestTrainLoop:
    def test_descent_on_small_dataset(self, samples):
        cfg = ModelConfig(layers=1, heads=2, hidden=16, feed_forward=32,
                          embedding_sizes=(4, 4, 4, 4, 8, 4, 4), label_embedding=4,
                          batch_size=16, max_steps=120, learning_rate=1e-3, seed=1,
                          stop_window=40)
        state, log = train(samples, cfg, "R")
        means = log.window_means(40)
        assert means[-1] < means[0]

    def test_fixed_seed_identical_loss_trace(self, samples):
        _, log1 = train(samples, TINY, "R")
        _, log2 = train(samples, TINY, "R")
        assert log1.rows == log2.rows

    def test_lambda_one_leaves_decoder_untouched(self, samples):
        cfg = ModelConfig(layers=1, heads=2, hidden=16, feed_forward=32,
                          embedding_sizes=(4, 4, 4, 4, 8, 4, 4), label_embedding=4,
                          batch_size=8, max_steps=6, learning_rate=1e-3, seed=0, lam=1.0)
        state, _ = train(samples, cfg, "R")
        fresh = ModelState.fresh(cfg, "R")
        for name in state.params:
            if name.startswith("dec."):
                assert np.array_equal(state.params[name], fresh.params[name]), name
            # the shared trunk must have moved
        moved = any(
            not np.array_equal(state.params[n], fresh.params[n])
            for n in state.params
            if n.startswith(("emb.", "enc."))
        )
        assert moved

    def test_lambda_zero_leaves_classifier_untouched(self, samples):
        cfg = ModelConfig(layers=1, heads=2, hidden=16, feed_forward=32,
                          embedding_sizes=(4, 4, 4, 4, 8, 4, 4), label_embedding=4,
                          batch_size=8, max_steps=6, learning_rate=1e-3, seed=0, lam=0.0)
        state, _ = train(samples, cfg, "R")
        fresh = ModelState.fresh(cfg, "R")
        for name in state.params:
            if name.startswith("lab."):
                assert np.array_equal(state.params[name], fresh.params[name]), name

    def test_shared_trunk_couples_both_pipelines(self, samples):
        """Classification-only updates still change the reconstruction output."""
        cfg = ModelConfig(layers=1, heads=2, hidden=16, feed_forward=32,
                          embedding_sizes=(4, 4, 4, 4, 8, 4, 4), label_embedding=4,
                          batch_size=8, max_steps=6, learning_rate=1e-3, seed=0, lam=1.0)
        state, _ = train(samples, cfg, "R")
        fresh = ModelState.fresh(cfg, "R")
        tm = samples[0].input
        before = decode_tokens(fresh, tm, RepetitionType.STRICT)
        after = decode_tokens(state, tm, RepetitionType.STRICT)
        assert np.abs(before - after).max() > 0

    def test_empty_dataset_rejected(self):
        with pytest.raises(ValueError):
            train([], TINY, "R")

    def test_divergence_detection(self, samples):
        cfg = ModelConfig(layers=1, heads=2, hidden=16, feed_forward=32,
                          embedding_sizes=(4, 4, 4, 4, 8, 4, 4), label_embedding=4,
                          batch_size=8, max_steps=60, learning_rate=1e6, seed=0)
        with pytest.raises(TrainingDivergedError):
            train(samples, cfg, "R")

    def test_variant_changes_weight_matrices(self, samples):
        v = sample_matrices(samples[:3], TINY, "V")
        r = sample_matrices(samples[:3], TINY, "R")
        assert (v["A"] == 1.0).all()
        assert not (r["A"] == 1.0).all()


class TestGradientCheck:
    def test_end_to_end_under_1e3(self):
        errs = gradient_check(coords_per_tensor=4, seed=0)
        assert max(errs.values()) < 1e-3

    def test_head_weights_under_1e5(self):
        errs = gradient_check(coords_per_tensor=4, seed=0)
        heads = {k: v for k, v in errs.items() if k.startswith(("lab.out", "dec.head"))}
        assert heads and max(heads.values()) < 1e-5

    def test_embeddings_under_1e4(self):
        errs = gradient_check(coords_per_tensor=4, seed=0)
        embs = {k: v for k, v in errs.items() if k.startswith("emb.")}
        assert embs and max(embs.values()) < 1e-4

    def test_isolated_layers_under_1e4(self):
        errs = layer_gradient_checks(seed=0)
        assert set(errs) == {
            "linear", "layer_norm", "gelu", "attention", "classify_head", "reconstruction",
        }
        assert max(errs.values()) < 1e-4

    def test_float32_rejected(self):
        with pytest.raises(ValueError, match="float64"):
            gradient_check(ModelConfig(dtype="float32"))


class TestCheckpoint:
    def test_round_trip_bitwise(self, samples, tmp_path):
        state, _ = train(samples, TINY, "RR")
        p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
        save_checkpoint(state, p1)
        loaded = load_checkpoint(p1)
        for name, arr in state.params.items():
            assert np.array_equal(arr, loaded.params[name])
        tm = samples[0].input
        np.testing.assert_array_equal(
            classify_tokens(state, tm), classify_tokens(loaded, tm)
        )
        save_checkpoint(loaded, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_truncated_file_rejected(self, samples, tmp_path):
        state = ModelState.fresh(TINY, "V")
        path = tmp_path / "m.ckpt"
        save_checkpoint(state, path)
        path.write_bytes(path.read_bytes()[:-100])
        with pytest.raises(CheckpointError, match="truncated"):
            load_checkpoint(path)

    def test_bad_magic_rejected(self, tmp_path):
        path = tmp_path / "m.ckpt"
        path.write_bytes(b"JUNKJUNKJUNKJUNKJUNK")
        with pytest.raises(CheckpointError, match="magic"):
            load_checkpoint(path)

    def test_cross_config_load_rejected(self, tmp_path):
        state = ModelState.fresh(TINY, "V")
        path = tmp_path / "m.ckpt"
        save_checkpoint(state, path)
        other = ModelConfig(layers=2, heads=2, hidden=32, feed_forward=64,
                            embedding_sizes=(4, 4, 4, 4, 8, 4, 4), label_embedding=4)
        with pytest.raises(CheckpointError, match="config"):
            load_checkpoint(path, expected_config=other)

    def test_hash_stability(self, tmp_path):
        state = ModelState.fresh(TINY, "V")
        p1, p2 = tmp_path / "a.ckpt", tmp_path / "b.ckpt"
        save_checkpoint(state, p1)
        save_checkpoint(state, p2)
        assert checkpoint_hash(p1) == checkpoint_hash(p2)
