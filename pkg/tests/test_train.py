import json

import numpy as np
import pytest

import repaugment.training as train
from repaugment import augment, store
from repaugment.training import (DivergenceError, TrainConfig, train as run_train,
                              train_multi_seed)


def quick_config(mode="none", **overrides):
    kwargs = dict(lr=1e-3, batch_size=16, epochs=10, seed=0,
                  augment=augment.AugmentConfig(mode=mode))
    kwargs.update(overrides)
    return TrainConfig(**kwargs)


@pytest.fixture(scope="module")
def blobs():
    return store.synth_dataset(8, (60, 40, 40, 30), 5.0, seed=3)


class TestPresets:
    def test_transformer_recipe(self):
        config = TrainConfig.preset("transformer")
        assert (config.lr, config.batch_size, config.epochs) == (5e-5, 8, 50)

    def test_cnn_recipe(self):
        config = TrainConfig.preset("cnn")
        assert (config.lr, config.batch_size, config.epochs) == (1e-3, 64, 400)

    def test_unknown_preset(self):
        with pytest.raises(ValueError):
            TrainConfig.preset("rnn")


class TestTrain:
    def test_deterministic_bit_identical(self, blobs):
        config = quick_config(mode="full", seed=11)
        r1 = run_train(blobs, config)
        r2 = run_train(blobs, config)
        assert json.dumps(r1.to_dict(), sort_keys=True) == \
            json.dumps(r2.to_dict(), sort_keys=True)

    def test_loss_trace_shape_and_finiteness(self, blobs):
        result = run_train(blobs, quick_config(epochs=7))
        assert len(result.loss_trace) == 7
        assert np.isfinite(result.loss_trace).all()

    def test_separable_data_learned(self, blobs):
        result = run_train(blobs, quick_config(epochs=40))
        accuracy = np.trace(result.report.confusion) / result.report.confusion.sum()
        assert accuracy >= 0.95

    def test_chance_level_at_zero_separation(self):
        ds = store.synth_dataset(8, (100, 40, 30, 20), 0.0, seed=1)
        result = run_train(ds, quick_config(epochs=20))
        assert abs(result.report.score - 0.5) <= 0.05

    def test_empty_train_split_rejected(self):
        ds = store.synth_dataset(4, (10, 5, 5, 2), 1.0, seed=0, train_frac=0.0)
        with pytest.raises(store.DataError):
            run_train(ds, quick_config())

    def test_test_class_without_train_examples_rejected(self):
        base = store.synth_dataset(4, (10, 8, 8, 4), 1.0, seed=0)
        # drop every "both" train example but keep its test examples
        keep = ~((base.labels == 3) & (base.splits == store.TRAIN))
        ds = base.subset(keep)
        with pytest.raises(store.DataError):
            run_train(ds, quick_config())

    def test_divergent_lr_raises_with_location(self, blobs):
        config = quick_config(lr=1e155, epochs=3)
        with pytest.raises(DivergenceError) as err:
            run_train(blobs, config)
        assert err.value.epoch >= 0 and err.value.step >= 0

    def test_dataset_not_mutated(self, blobs):
        before = blobs.features.copy()
        run_train(blobs, quick_config(mode="full"))
        assert np.array_equal(blobs.features, before)

    def test_augmentation_mode_changes_training_not_eval_path(self, blobs):
        # same data, same seed: parameters differ but both evaluate the
        # clean test split (reports are recomputable from saved params)
        from repaugment.metrics import evaluate
        test = blobs.test()
        for mode in ("none", "full"):
            result = run_train(blobs, quick_config(mode=mode, seed=5))
            again = evaluate(result.params, test.features.astype(np.float64),
                             test.labels.astype(np.int64))
            assert np.array_equal(again.confusion, result.report.confusion)

    def test_shuffles_are_permutations(self):
        for epoch in range(5):
            perm = train._shuffle_rng(3, epoch).permutation(31)
            assert sorted(perm) == list(range(31))

    def test_normal_only_training_consumes_no_gaussian_draws(self):
        # the class-conditional policy is exercised through the per-example
        # noise sources the trainer would build
        ds = store.synth_dataset(6, (20, 4, 4, 4), 2.0, seed=2)
        config = quick_config(mode="full")
        tr = ds.train()
        for i in range(len(tr)):
            source = train.augment_noise_source(config.seed, 0, i)
            augment.repaugment(tr.features[i].astype(float),
                               int(tr.labels[i]), config.augment, source)
            if tr.labels[i] == 0:
                assert source.gaussian_draws == 0
            else:
                assert source.gaussian_draws == ds.dim


class TestTrainMultiSeed:
    def test_single_seed_zero_variance(self, blobs):
        _, agg = train_multi_seed(blobs, quick_config(), [4])
        assert agg["score"]["var"] == 0.0

    def test_repeated_seed_zero_variance(self, blobs):
        _, agg = train_multi_seed(blobs, quick_config(), [9, 9, 9])
        assert agg["score"]["var"] == 0.0
        assert agg["sp"]["var"] == 0.0

    def test_five_seeds_separable(self, blobs):
        runs, agg = train_multi_seed(blobs, quick_config(epochs=40),
                                     [0, 1, 2, 3, 4])
        assert len(runs) == 5
        accs = [np.trace(r.report.confusion) / r.report.confusion.sum()
                for r in runs]
        assert np.mean(accs) >= 0.95
        assert np.isfinite(agg["score"]["var"])

    def test_parallel_matches_serial(self, blobs):
        config = quick_config(epochs=5)
        serial, agg_s = train_multi_seed(blobs, config, [0, 1], parallel=1)
        parallel, agg_p = train_multi_seed(blobs, config, [0, 1], parallel=2)
        for a, b in zip(serial, parallel):
            assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())
        assert agg_s == agg_p

    def test_no_seeds_rejected(self, blobs):
        with pytest.raises(ValueError):
            train_multi_seed(blobs, quick_config(), [])


class TestRunResultSerialization:
    def test_round_trip(self, blobs):
        result = run_train(blobs, quick_config(epochs=3))
        again = train.RunResult.from_dict(
            json.loads(json.dumps(result.to_dict())))
        assert again.seed == result.seed
        assert again.loss_trace == result.loss_trace
        assert np.array_equal(again.params.weight, result.params.weight)
