"""Channel models: sigma mapping, AWGN and Rayleigh statistics, differentiability."""
import numpy as np
import pytest

from qcae.channel import (
    ChannelConfig,
    apply_draw,
    awgn,
    channel_from_dict,
    channel_to_dict,
    draw_vjp,
    sample_draw,
    sigma_from_snr,
    validate_channel,
)
from qcae.errors import ConfigurationError
from qcae.qgrad import fd_grad


class TestSigma:
    def test_paper_mode_value(self):
        # 1 / (2 * 2 * 10^1.5)
        assert sigma_from_snr(2.0, 15.0) == pytest.approx(0.0079057, abs=1e-7)

    def test_zero_db(self):
        assert sigma_from_snr(1.0, 0.0) == pytest.approx(0.5)

    def test_textbook_mode(self):
        assert sigma_from_snr(1.0, 0.0, "textbook") == pytest.approx(1 / np.sqrt(2))
        assert sigma_from_snr(2.0, 15.0, "textbook") == pytest.approx(
            1 / np.sqrt(4 * 10**1.5))

    @pytest.mark.parametrize("mode", ["paper", "textbook"])
    def test_strictly_decreasing_in_snr(self, mode):
        grid = np.linspace(-5, 25, 61)
        sigmas = [sigma_from_snr(2.0, db, mode) for db in grid]
        assert all(a > b for a, b in zip(sigmas, sigmas[1:]))

    def test_bad_rate(self):
        with pytest.raises(ConfigurationError):
            sigma_from_snr(0.0, 10.0)

    def test_bad_mode(self):
        with pytest.raises(ConfigurationError):
            sigma_from_snr(1.0, 0.0, "folklore")


class TestAwgn:
    def test_zero_noise_is_identity(self):
        x = np.array([[0.3, -0.7]])
        y, draw = awgn(x, 0.0, np.random.default_rng(0))
        assert np.array_equal(y, x)

    def test_noise_variance_within_3pct(self):
        rng = np.random.default_rng(11)
        sigma = 0.37
        x = np.zeros((100_000, 2))
        y, _ = awgn(x, sigma, rng)
        var = y.var(axis=0)
        assert np.abs(var - sigma**2).max() < 0.03 * sigma**2

    def test_noise_mean_clt_bound(self):
        rng = np.random.default_rng(13)
        sigma = 0.5
        n = 100_000
        y, _ = awgn(np.zeros((n, 2)), sigma, rng)
        assert np.abs(y.mean(axis=0)).max() < 4 * sigma / np.sqrt(n)

    def test_reproducible_bitwise(self):
        x = np.ones((4, 2))
        y1, d1 = awgn(x, 0.2, np.random.default_rng(99))
        y2, d2 = awgn(x, 0.2, np.random.default_rng(99))
        assert np.array_equal(y1, y2)
        assert np.array_equal(d1.noise, d2.noise)


class TestRayleigh:
    def test_unit_fading_zero_noise(self):
        x = np.array([[0.3, 0.4]])
        draw = sample_draw("rayleigh", 0.0, 1, 1, np.random.default_rng(0))
        draw = type(draw)(noise=draw.noise, fading=np.array([[1.0, 0.0]]))
        assert np.allclose(apply_draw(x, draw), x)

    def test_multiplication_by_i(self):
        # h = i, x = 1 + 0j -> y = i
        draw = sample_draw("rayleigh", 0.0, 1, 1, np.random.default_rng(0))
        draw = type(draw)(noise=draw.noise, fading=np.array([[0.0, 1.0]]))
        y = apply_draw(np.array([[1.0, 0.0]]), draw)
        assert np.allclose(y, [[0.0, 1.0]])

    def test_fading_power_within_3pct(self):
        rng = np.random.default_rng(21)
        draw = sample_draw("rayleigh", 0.1, 1, 100_000, rng)
        power = (draw.fading**2).sum(axis=1).mean()
        assert abs(power - 2.0) < 0.06

    def test_single_h_shared_across_uses(self):
        # with two uses and no noise, y_c / x_c is the same complex number
        # for both uses of a transmission
        rng = np.random.default_rng(5)
        x = rng.normal(0, 1, (8, 4))
        draw = sample_draw("rayleigh", 0.0, 2, 8, rng)
        assert draw.fading.shape == (8, 2)
        y = apply_draw(x, draw)
        xc = x[:, 0::2] + 1j * x[:, 1::2]
        yc = y[:, 0::2] + 1j * y[:, 1::2]
        ratios = yc / xc
        assert np.allclose(ratios[:, 0], ratios[:, 1], atol=1e-12)

    def test_noise_fresh_per_use(self):
        rng = np.random.default_rng(6)
        draw = sample_draw("rayleigh", 1.0, 2, 1000, rng)
        assert draw.noise.shape == (1000, 4)
        corr = np.corrcoef(draw.noise.T)
        off_diag = corr[~np.eye(4, dtype=bool)]
        assert np.abs(off_diag).max() < 0.1


class TestDrawVjp:
    @pytest.mark.parametrize("family", ["awgn", "rayleigh"])
    def test_matches_fd_with_frozen_draw(self, family):
        rng = np.random.default_rng(31)
        for _ in range(25):
            x = rng.normal(0, 1, 4)
            draw = sample_draw(family, 0.3, 2, 1, rng)
            up = rng.normal(0, 1, 4)
            g = draw_vjp(draw, up)
            gfd = fd_grad(lambda v: float(np.sum(apply_draw(v[None, :], draw) * up)), x)
            assert np.abs(g.ravel() - gfd).max() < 1e-6

    def test_awgn_identity_jacobian(self):
        draw = sample_draw("awgn", 0.5, 1, 3, np.random.default_rng(0))
        up = np.arange(6.0).reshape(3, 2)
        assert np.array_equal(draw_vjp(draw, up), up)


class TestConfig:
    def test_round_trip(self):
        cfg = ChannelConfig("rayleigh", 1.0, 12.0, 2, "textbook")
        assert channel_from_dict(channel_to_dict(cfg)) == cfg

    def test_sigma_helper_uses_mode(self):
        cfg = ChannelConfig("awgn", 2.0, 15.0, 1, "paper")
        assert cfg.sigma() == pytest.approx(sigma_from_snr(2.0, 15.0, "paper"))
        assert cfg.sigma(0.0) == pytest.approx(sigma_from_snr(2.0, 0.0, "paper"))

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            validate_channel(ChannelConfig("fso", 1.0))
        with pytest.raises(ConfigurationError):
            validate_channel(ChannelConfig("awgn", -1.0))
        with pytest.raises(ConfigurationError):
            validate_channel(ChannelConfig("awgn", 1.0, uses=0))
