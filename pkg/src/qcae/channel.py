"""Stochastic channel models with frozen-draw differentiability.

The channel is sampled once per transmission into a ChannelDraw; applying a
frozen draw is a deterministic, differentiable map, so backpropagation
treats noise and fading as constants.

Signals are real vectors of length 2n: n channel uses, each an (I, Q)
pair, i.e. one complex number.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError

SIGMA_MODES = ("paper", "textbook")


@dataclass(frozen=True)
class ChannelConfig:
    family: str  # awgn | rayleigh
    rate: float  # bits per channel use (R = log2(M) / n)
    ebn0_db: float = 15.0
    uses: int = 1  # n
    sigma_mode: str = "paper"

    def sigma(self, ebn0_db: float | None = None) -> float:
        level = self.ebn0_db if ebn0_db is None else ebn0_db
        return sigma_from_snr(self.rate, level, self.sigma_mode)


@dataclass(frozen=True)
class ChannelDraw:
    """One transmission's randomness: additive noise and (optionally) fading.

    noise is (B, 2n); fading is (B, 2) -- one complex coefficient per
    transmission, shared by all n uses -- or None for AWGN.
    """

    noise: np.ndarray
    fading: np.ndarray | None = None


def validate_channel(cfg: ChannelConfig) -> None:
    if cfg.family not in ("awgn", "rayleigh"):
        raise ConfigurationError(f"unknown channel family {cfg.family!r}")
    if cfg.rate <= 0:
        raise ConfigurationError(f"rate must be positive, got {cfg.rate}")
    if cfg.uses < 1:
        raise ConfigurationError(f"channel uses must be >= 1, got {cfg.uses}")
    if cfg.sigma_mode not in SIGMA_MODES:
        raise ConfigurationError(f"unknown sigma mode {cfg.sigma_mode!r}")


def sigma_from_snr(rate: float, ebn0_db: float, mode: str = "paper") -> float:
    """Noise scale from the per-bit SNR.

    "paper" mode: sigma = 1 / (2 R Eb/N0). "textbook" mode applies the
    square root: sigma = 1 / sqrt(2 R Eb/N0).
    """
    if rate <= 0:
        raise ConfigurationError(f"rate must be positive, got {rate}")
    lin = 10.0 ** (ebn0_db / 10.0)
    if mode == "paper":
        return 1.0 / (2.0 * rate * lin)
    if mode == "textbook":
        return 1.0 / np.sqrt(2.0 * rate * lin)
    raise ConfigurationError(f"unknown sigma mode {mode!r}")


def sample_draw(family: str, sigma: float, uses: int, batch: int,
                rng: np.random.Generator) -> ChannelDraw:
    """Fresh randomness for a batch of transmissions.

    Per transmission: one 2n-vector of N(0, sigma^2) noise and, for
    rayleigh, one fading coefficient h ~ N(0, I_2) shared across uses.
    """
    if sigma < 0:
        raise ConfigurationError(f"sigma must be >= 0, got {sigma}")
    noise = rng.normal(0.0, 1.0, size=(batch, 2 * uses)) * sigma
    fading = None
    if family == "rayleigh":
        fading = rng.normal(0.0, 1.0, size=(batch, 2))
    elif family != "awgn":
        raise ConfigurationError(f"unknown channel family {family!r}")
    return ChannelDraw(noise, fading)


def _as_complex_uses(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] % 2 != 0:
        raise ConfigurationError("signal length must be even (I/Q pairs)")
    return x[:, 0::2] + 1j * x[:, 1::2]


def _interleave(c: np.ndarray) -> np.ndarray:
    out = np.empty((c.shape[0], 2 * c.shape[1]))
    out[:, 0::2] = c.real
    out[:, 1::2] = c.imag
    return out


def apply_draw(x: np.ndarray, draw: ChannelDraw) -> np.ndarray:
    """Deterministic channel map for a frozen draw."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if draw.fading is None:
        return x + draw.noise
    h = draw.fading[:, 0] + 1j * draw.fading[:, 1]
    y = _interleave(h[:, None] * _as_complex_uses(x))
    return y + draw.noise


def draw_vjp(draw: ChannelDraw, upstream: np.ndarray) -> np.ndarray:
    """d loss / d x given d loss / d y, with the draw held constant."""
    upstream = np.atleast_2d(np.asarray(upstream, dtype=float))
    if draw.fading is None:
        return upstream.copy()
    h = draw.fading[:, 0] + 1j * draw.fading[:, 1]
    return _interleave(np.conj(h)[:, None] * _as_complex_uses(upstream))


def awgn(x: np.ndarray, sigma: float, rng: np.random.Generator):
    """y = x + n with n ~ N(0, sigma^2 I). Returns (y, draw)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    draw = sample_draw("awgn", sigma, x.shape[1] // 2, x.shape[0], rng)
    return apply_draw(x, draw), draw


def rayleigh(x: np.ndarray, sigma: float, rng: np.random.Generator):
    """y = h * x + n with complex scalar fading per transmission. Returns (y, draw)."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    draw = sample_draw("rayleigh", sigma, x.shape[1] // 2, x.shape[0], rng)
    return apply_draw(x, draw), draw


def channel_to_dict(cfg: ChannelConfig) -> dict:
    return {
        "family": cfg.family,
        "rate": cfg.rate,
        "ebn0_db": cfg.ebn0_db,
        "uses": cfg.uses,
        "sigma_mode": cfg.sigma_mode,
    }


def channel_from_dict(d: dict) -> ChannelConfig:
    cfg = ChannelConfig(
        family=d["family"],
        rate=float(d["rate"]),
        ebn0_db=float(d.get("ebn0_db", 15.0)),
        uses=int(d.get("uses", 1)),
        sigma_mode=d.get("sigma_mode", "paper"),
    )
    validate_channel(cfg)
    return cfg
