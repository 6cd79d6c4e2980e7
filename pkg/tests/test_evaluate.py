"""SER metric, SNR sweeps, and the QPSK maximum-likelihood oracle."""
import hashlib

import numpy as np
import pytest

from qcae import zoo
from qcae.autoencoder import ModelSpec, LookupTxSpec, DenseRxSpec, assemble
from qcae.channel import ChannelConfig
from qcae.classical import DenseLayer
from qcae.errors import DomainError
from qcae.evaluate import (
    DEFAULT_LEVELS,
    qpsk_mc_ser,
    qpsk_ml_oracle,
    ser,
    snr_sweep,
    sweep_to_csv,
)


def qpsk_toy_model():
    """Hand-built lookup QPSK transmitter + matched-filter linear receiver."""
    spec = ModelSpec("toy_qpsk", 4, 1, LookupTxSpec(), DenseRxSpec(()),
                     ChannelConfig("awgn", 2.0, sigma_mode="textbook"))
    model = assemble(spec, 0)
    points = np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]]) / np.sqrt(2)
    model.tx.enc.table = points.copy()
    old = model.rx.layers[0]
    model.rx.layers[0] = DenseLayer(40.0 * points, np.zeros(4), old.activation)
    return model


class TestSer:
    def test_all_correct(self):
        assert ser([1, 2, 3], [1, 2, 3]) == 0.0

    def test_all_wrong(self):
        assert ser([2, 3, 4], [1, 2, 3]) == 1.0

    def test_uniform_random_chance_level(self):
        rng = np.random.default_rng(12)
        pred = rng.integers(1, 5, 10_000)
        truth = rng.integers(1, 5, 10_000)
        assert abs(ser(pred, truth) - 0.75) < 0.02

    def test_empty_rejected(self):
        with pytest.raises(DomainError):
            ser([], [])

    def test_length_mismatch_rejected(self):
        with pytest.raises(DomainError):
            ser([1, 2], [1])


class TestSnrSweep:
    def test_high_snr_limit_nearly_errorless(self):
        model = qpsk_toy_model()
        sw = snr_sweep(model, levels=(40.0,), batches=10, batch=64, seed=3)
        assert sw.points[0].ser <= 1.0 / 640.0

    def test_monotone_trend_with_slack(self):
        model = qpsk_toy_model()
        sw = snr_sweep(model, DEFAULT_LEVELS, batches=10, batch=64, seed=5)
        sers = sw.sers()
        inversions = [max(b - a, 0.0) for a, b in zip(sers, sers[1:])]
        assert sum(1 for v in inversions if v > 0) <= 1
        assert max(inversions, default=0.0) <= 0.01

    def test_reproducible_bitwise(self):
        model = qpsk_toy_model()
        a = snr_sweep(model, (0.0, 6.0), batches=10, batch=32, seed=9)
        b = snr_sweep(model, (0.0, 6.0), batches=10, batch=32, seed=9)
        assert a == b

    def test_does_not_mutate_parameters(self):
        model = assemble(zoo.get("cq1"), 4)
        before = hashlib.sha256(model.get_params().tobytes()).hexdigest()
        snr_sweep(model, (0.0, 15.0), batches=10, batch=16, seed=1)
        after = hashlib.sha256(model.get_params().tobytes()).hexdigest()
        assert before == after

    def test_fewer_than_ten_batches_rejected(self):
        with pytest.raises(DomainError):
            snr_sweep(qpsk_toy_model(), (0.0,), batches=9, batch=16, seed=1)

    def test_csv_format(self, tmp_path):
        model = qpsk_toy_model()
        sw = snr_sweep(model, (0.0, 15.0), batches=10, batch=16, seed=7)
        path = tmp_path / "sweep.csv"
        sweep_to_csv(sw, path)
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "ebn0_db,ser,batches,batch_size,seed,sigma_mode"
        assert len(lines) == 3
        assert lines[1].endswith("textbook")


class TestQpskOracle:
    def test_zero_noise_zero_errors(self):
        assert qpsk_mc_ser(0.0, 10_000, np.random.default_rng(0)) == 0.0

    def test_textbook_15db_effectively_zero(self):
        sers = qpsk_ml_oracle(levels=(15.0,), samples=100_000, sigma_mode="textbook", seed=2)
        assert sers[0] < 1e-6

    def test_decreasing_where_resolvable(self):
        # at 100k samples only the low-SNR levels have measurable error
        # counts; the tail of the sweep is identically zero in both modes
        sers = qpsk_ml_oracle(levels=(0.0, 3.0, 6.0, 9.0, 12.0, 15.0),
                              samples=200_000, sigma_mode="textbook", seed=4)
        assert all(a >= b for a, b in zip(sers, sers[1:]))
        assert sers[0] > sers[1] > sers[2] > sers[3]

    def test_matches_gaussian_tail_analytics(self):
        # SER of QPSK = 1 - (1 - Q(d/2sigma))^2 per axis with d = sqrt(2)
        scipy_stats = pytest.importorskip("scipy.stats")
        sigma = 0.35
        per_axis = scipy_stats.norm.sf((1 / np.sqrt(2)) / sigma)
        expected = 1 - (1 - per_axis) ** 2
        got = qpsk_mc_ser(sigma, 400_000, np.random.default_rng(8))
        assert got == pytest.approx(expected, abs=0.004)
