"""Training-loop tests: config validation, memorization, determinism, guards."""

import math

import numpy as np
import pytest
import torch

from neloradec import TrainConfig, load_checkpoint, scan_tree, split_records, train
from neloradec.evaluate import classify_clean


class TestConfigValidation:
    def _cfg(self, **kw):
        base = dict(sf=7, dataset="x", checkpoint="y")
        base.update(kw)
        return TrainConfig(**base)

    def test_defaults_valid(self):
        cfg = self._cfg()
        assert cfg.loss_weight == 1.0 and cfg.snr_low == -30.0

    @pytest.mark.parametrize("kw", [
        {"sf": 6}, {"loss_weight": 0.0}, {"loss_weight": -1.0}, {"lr": 0.0},
        {"epochs": 0}, {"batch_size": 0}, {"train_fraction": 1.0}, {"seed": -1},
        {"snr_low": -50.0}, {"snr_high": 20.0}, {"snr_low": -5.0, "snr_high": -10.0},
        {"snr_low": -math.inf, "snr_high": -math.inf},
    ])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            self._cfg(**kw)

    def test_clean_sentinel_range_allowed(self):
        cfg = self._cfg(snr_low=math.inf, snr_high=math.inf)
        assert math.isinf(cfg.snr_low)


@pytest.fixture(scope="module")
def overfit_run(overfit_corpus, tmp_path_factory):
    """64 clean symbols, 200 full-batch steps: the memorization check."""
    path = tmp_path_factory.mktemp("overfit_ck") / "sf7.pt"
    cfg = TrainConfig(sf=7, dataset=str(overfit_corpus), checkpoint=str(path),
                      epochs=200, batch_size=64, lr=1e-2, base_channels=8,
                      snr_low=math.inf, snr_high=math.inf, seed=3)
    train(cfg)
    return load_checkpoint(path) + (cfg,)


class TestOverfitSmoke:
    def test_200_steps_recorded(self, overfit_run):
        _, _, history, _ = overfit_run[:4]
        # all 51 training records fit one batch -> one step per epoch
        assert len(history["step_loss"]) == 200

    def test_memorizes_clean_training_set(self, overfit_run):
        _, _, history, _ = overfit_run[:4]
        assert history["epoch_acc"][-1] == 1.0

    def test_eval_mode_agrees_with_memorization(self, overfit_run,
                                                overfit_corpus):
        model, _, _, _, cfg = overfit_run
        records = scan_tree(overfit_corpus, sf=7)
        train_recs, _ = split_records(records, cfg.train_fraction, cfg.seed)
        preds = classify_clean(model, train_recs)
        truths = np.array([r.truth for r in train_recs])
        assert np.mean(preds == truths) >= 0.98

    def test_loss_finite_and_decreasing(self, overfit_run):
        _, _, history, _ = overfit_run[:4]
        steps = np.array(history["step_loss"][:100])
        assert np.all(np.isfinite(steps))
        assert steps[:20].mean() > steps[-20:].mean()


class TestCheckpoint:
    def test_contents_roundtrip(self, overfit_run, overfit_corpus):
        model, cfg_dict, history, train_ids, cfg = overfit_run
        assert cfg_dict["sf"] == 7
        assert cfg_dict["base_channels"] == 8
        assert len(history["epoch_loss"]) == cfg.epochs
        records = scan_tree(overfit_corpus, sf=7)
        expect_train, expect_test = split_records(records, cfg.train_fraction,
                                                  cfg.seed)
        assert set(map(tuple, train_ids)) == {r.ident for r in expect_train}
        assert not set(map(tuple, train_ids)) & {r.ident for r in expect_test}

    def test_rejects_foreign_payload(self, tmp_path):
        bad = tmp_path / "bad.pt"
        torch.save({"weights": torch.zeros(3)}, bad)
        with pytest.raises(ValueError):
            load_checkpoint(bad)


class TestDeterminism:
    def test_same_config_same_weights(self, overfit_corpus, tmp_path):
        outs = []
        for name in ("a.pt", "b.pt"):
            cfg = TrainConfig(sf=7, dataset=str(overfit_corpus),
                              checkpoint=str(tmp_path / name), epochs=2,
                              batch_size=16, base_channels=8, seed=12)
            train(cfg)
            outs.append(load_checkpoint(tmp_path / name)[0])
        for pa, pb in zip(outs[0].parameters(), outs[1].parameters()):
            assert torch.equal(pa, pb)


class TestGuards:
    def test_divergence_aborts_with_diagnostics(self, overfit_corpus, tmp_path):
        cfg = TrainConfig(sf=7, dataset=str(overfit_corpus),
                          checkpoint=str(tmp_path / "d.pt"), epochs=3,
                          batch_size=16, base_channels=8, lr=1e20, seed=0)
        with pytest.raises(RuntimeError, match="diverged"):
            train(cfg)

    def test_missing_dataset(self, tmp_path):
        cfg = TrainConfig(sf=7, dataset=str(tmp_path / "nope"),
                          checkpoint=str(tmp_path / "c.pt"))
        with pytest.raises(FileNotFoundError):
            train(cfg)
