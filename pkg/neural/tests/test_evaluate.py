"""Evaluation tests: CSV contract, split hygiene, and trained-model quality."""

import numpy as np
import pytest
import torch

from neloradec import (
    CSV_HEADER,
    EvalConfig,
    EvalPoint,
    EvalResult,
    Geometry,
    TrainConfig,
    emit_csv,
    evaluate,
    load_checkpoint,
    load_record,
    render_csv,
    scan_tree,
    split_records,
    train,
)
from neloradec.evaluate import classify_clean
from neloradec.spectrogram import augment


@pytest.fixture(scope="module")
def quick_ckpt(tiny_corpus, tmp_path_factory):
    """Cheap 2-epoch checkpoint for plumbing tests (quality irrelevant)."""
    path = tmp_path_factory.mktemp("quick_ck") / "sf7.pt"
    cfg = TrainConfig(sf=7, dataset=str(tiny_corpus), checkpoint=str(path),
                      epochs=2, batch_size=32, base_channels=8, seed=5)
    train(cfg)
    return path, cfg


class TestConfigValidation:
    def _cfg(self, **kw):
        base = dict(checkpoint="c", dataset="d")
        base.update(kw)
        return EvalConfig(**base)

    def test_default_grid(self):
        cfg = self._cfg()
        assert cfg.snr_grid[0] == -25.0 and cfg.snr_grid[-1] == 0.0
        assert len(cfg.snr_grid) == 26 and cfg.trials == 5000

    @pytest.mark.parametrize("kw", [
        {"trials": 0}, {"batch_size": 0}, {"snr_grid": []},
        {"snr_grid": [-5.0, -5.0]}, {"snr_grid": [-5.0, -10.0]},
        {"train_fraction": 0.0}, {"decoder": ""}, {"decoder": "a,b"},
    ])
    def test_rejects(self, kw):
        with pytest.raises(ValueError):
            self._cfg(**kw)


class TestCsvContract:
    def test_header_literal(self):
        assert CSV_HEADER == "decoder,sf,snr_db,trials,errors,ser"

    def test_row_format(self):
        res = EvalResult(decoder="nelora", sf=7,
                         points=[EvalPoint(-16.0, 5000, 466)])
        assert render_csv(res) == (
            "decoder,sf,snr_db,trials,errors,ser\n"
            "nelora,7,-16.0,5000,466,0.0932\n")

    def test_floats_keep_full_precision(self):
        res = EvalResult(decoder="x", sf=8, points=[EvalPoint(-12.5, 3, 1)])
        assert render_csv(res, include_header=False) == \
            "x,8,-12.5,3,1,0.3333333333333333\n"

    def test_rows_sorted_by_snr(self):
        res = EvalResult(decoder="d", sf=7,
                         points=[EvalPoint(0.0, 10, 0), EvalPoint(-20.0, 10, 9)])
        body = render_csv(res, include_header=False).splitlines()
        assert body[0].startswith("d,7,-20.0") and body[1].startswith("d,7,0.0")

    def test_emit_append_keeps_single_header(self, tmp_path):
        out = tmp_path / "curves.csv"
        a = EvalResult("a", 7, [EvalPoint(-10.0, 5, 1)])
        b = EvalResult("b", 7, [EvalPoint(-10.0, 5, 2)])
        emit_csv(a, out)
        emit_csv(b, out, append=True)
        lines = out.read_text().splitlines()
        assert lines.count(CSV_HEADER) == 1
        assert len(lines) == 3 and lines[2].startswith("b,7,")

    def test_emit_overwrite(self, tmp_path):
        out = tmp_path / "curves.csv"
        emit_csv(EvalResult("a", 7, [EvalPoint(-10.0, 5, 1)]), out)
        emit_csv(EvalResult("b", 7, [EvalPoint(-10.0, 5, 2)]), out)
        lines = out.read_text().splitlines()
        assert len(lines) == 2 and lines[1].startswith("b,7,")


class TestEvaluatePlumbing:
    def test_deterministic_and_labeled(self, quick_ckpt, tiny_corpus):
        path, tcfg = quick_ckpt
        cfg = EvalConfig(checkpoint=str(path), dataset=str(tiny_corpus),
                         snr_grid=[-20.0, -10.0], trials=64, batch_size=48,
                         master_seed=tcfg.seed, decoder="probe")
        first = evaluate(cfg)
        second = evaluate(cfg)
        assert first.decoder == "probe" and first.sf == 7
        assert [p.errors for p in first.points] == [p.errors for p in second.points]
        assert all(p.trials == 64 for p in first.points)

    def test_mismatched_split_seed_is_refused(self, quick_ckpt, tiny_corpus):
        path, tcfg = quick_ckpt
        cfg = EvalConfig(checkpoint=str(path), dataset=str(tiny_corpus),
                         snr_grid=[-10.0], trials=4,
                         master_seed=tcfg.seed + 1)
        with pytest.raises(RuntimeError, match="part of training"):
            evaluate(cfg)

    def test_missing_records(self, quick_ckpt, tmp_path):
        path, tcfg = quick_ckpt
        cfg = EvalConfig(checkpoint=str(path), dataset=str(tmp_path),
                         snr_grid=[-10.0], trials=4, master_seed=tcfg.seed)
        with pytest.raises(FileNotFoundError):
            evaluate(cfg)

    def test_foreign_checkpoint_rejected(self, tiny_corpus, tmp_path):
        bad = tmp_path / "bad.pt"
        torch.save({"state": 1}, bad)
        cfg = EvalConfig(checkpoint=str(bad), dataset=str(tiny_corpus))
        with pytest.raises(ValueError):
            evaluate(cfg)


class TestTrainedModelQuality:
    """Statistical checks on the shared desk-scale checkpoint."""

    def test_clean_test_symbols_nearly_all_correct(self, trained_checkpoint,
                                                   desk_corpus):
        path, tcfg = trained_checkpoint
        model, _, _, _ = load_checkpoint(path)
        records = scan_tree(desk_corpus, sf=7)
        _, test = split_records(records, tcfg.train_fraction, tcfg.seed)
        preds = classify_clean(model, test)
        truths = np.array([r.truth for r in test])
        assert np.mean(preds != truths) <= 0.01

    def _deep_ser(self, trained_checkpoint, desk_corpus, snr_db):
        path, tcfg = trained_checkpoint
        cfg = EvalConfig(checkpoint=str(path), dataset=str(desk_corpus),
                         snr_grid=[snr_db], trials=2560,
                         master_seed=tcfg.seed)
        return evaluate(cfg).points[0].ser

    def test_deep_noise_sits_at_chance(self, trained_checkpoint, desk_corpus):
        ser = self._deep_ser(trained_checkpoint, desk_corpus, -50.0)
        chance = 1.0 - 2.0 ** -7
        sigma = np.sqrt(chance * (1 - chance) / 2560)
        assert abs(ser - chance) <= 3 * sigma

    def test_no_leakage_at_minus_40(self, trained_checkpoint, desk_corpus):
        # a converged model keeps a small, real processing-gain residual
        # at -40 dB (symbol integration spans 8192 samples), so only bound
        # the window: collapse far below chance would mean label leakage
        ser = self._deep_ser(trained_checkpoint, desk_corpus, -40.0)
        chance = 1.0 - 2.0 ** -7
        sigma = np.sqrt(chance * (1 - chance) / 2560)
        assert chance - 0.03 <= ser <= chance + 3 * sigma

    def test_denoiser_moves_spectrogram_toward_clean(self, trained_checkpoint,
                                                     desk_corpus):
        path, tcfg = trained_checkpoint
        model, _, _, _ = load_checkpoint(path)
        records = scan_tree(desk_corpus, sf=7)
        _, test = split_records(records, tcfg.train_fraction, tcfg.seed)
        noisy_mse = clean_mse = 0.0
        for k, rec in enumerate(test[:8]):
            load_record(rec)
            noisy_spec, clean_spec, _ = augment(rec, -15.0, seed=k)
            with torch.no_grad():
                denoised, _ = model(torch.from_numpy(noisy_spec[None]))
            clean_mse += float(np.mean((denoised.numpy()[0] - clean_spec) ** 2))
            noisy_mse += float(np.mean((noisy_spec - clean_spec) ** 2))
        assert clean_mse < noisy_mse
