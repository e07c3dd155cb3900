import shutil
import subprocess

import numpy as np
import pytest

from neloradec import Geometry, TrainConfig, train

LORABENCH = shutil.which("lorabench")

needs_baseline = pytest.mark.skipif(
    LORABENCH is None, reason="baseline lorabench CLI not on PATH")


def generate_corpus(out_dir, packets: int, symbols: int, seed: int, sf: int = 7):
    r = subprocess.run(
        [LORABENCH, "generate", "--out", str(out_dir), "--sf", str(sf),
         "--packets", str(packets), "--symbols-per-packet", str(symbols),
         "--seed", str(seed)],
        capture_output=True, text=True)
    assert r.returncode == 0, r.stderr
    return out_dir


def write_symbol_file(path, iq: np.ndarray) -> None:
    flat = np.empty(2 * iq.size, dtype="<f4")
    flat[0::2] = iq.real
    flat[1::2] = iq.imag
    path.write_bytes(flat.tobytes())


@pytest.fixture
def geo7():
    return Geometry(7)


@pytest.fixture
def rng():
    return np.random.default_rng(0xBEEF)


@pytest.fixture(scope="session")
def handmade_tree(tmp_path_factory):
    """10 packets x 12 symbols of deterministic junk in the capture format."""
    root = tmp_path_factory.mktemp("handmade")
    gen = np.random.default_rng(8)
    for pid in range(10):
        d = root / "sf7" / str(pid)
        d.mkdir(parents=True)
        for idx in range(12):
            truth = (pid * 13 + idx * 7) % 128
            iq = gen.standard_normal(1024) + 1j * gen.standard_normal(1024)
            write_symbol_file(d / f"{idx}_{truth}_{pid}_7", iq.astype(np.complex64))
    return root


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """120 clean chirp symbols (10 packets x 12) at sf7."""
    if LORABENCH is None:
        pytest.skip("baseline lorabench CLI not on PATH")
    return generate_corpus(tmp_path_factory.mktemp("tiny"), 10, 12, seed=5)


@pytest.fixture(scope="session")
def overfit_corpus(tmp_path_factory):
    """64 clean chirp symbols (8 packets x 8) at sf7."""
    if LORABENCH is None:
        pytest.skip("baseline lorabench CLI not on PATH")
    return generate_corpus(tmp_path_factory.mktemp("overfit"), 8, 8, seed=11)


@pytest.fixture(scope="session")
def desk_corpus(tmp_path_factory):
    """The 6000-symbol sf7 corpus used by the desk-scale comparison."""
    if LORABENCH is None:
        pytest.skip("baseline lorabench CLI not on PATH")
    return generate_corpus(tmp_path_factory.mktemp("desk"), 100, 60, seed=2024)


@pytest.fixture(scope="session")
def trained_checkpoint(desk_corpus, tmp_path_factory):
    """Default-config sf7 training run; shared by the model-quality tests."""
    path = tmp_path_factory.mktemp("ckpt") / "sf7.pt"
    cfg = TrainConfig(sf=7, dataset=str(desk_corpus), checkpoint=str(path))
    train(cfg)
    return path, cfg
