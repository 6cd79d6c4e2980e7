"""Channel models: noise-scale mapping, AWGN clouds, Rayleigh fading.

Saves a constellation scatter to demos/output/channels.png.
"""
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from qcae.channel import apply_draw, awgn, rayleigh, sigma_from_snr

rng = np.random.default_rng(11)
out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

# --- the two noise-scale conventions ---------------------------------------
print("Eb/N0 -> sigma at rate R = 2 (4-QAM, one channel use):")
print(f"{'dB':>4s} {'paper':>10s} {'textbook':>10s}")
for db in (0, 3, 6, 9, 12, 15, 18):
    print(f"{db:4d} {sigma_from_snr(2.0, db, 'paper'):10.5f} "
          f"{sigma_from_snr(2.0, db, 'textbook'):10.5f}")

# --- AWGN statistics --------------------------------------------------------
sigma = sigma_from_snr(2.0, 6.0, "textbook")
qpsk = np.array([[1, 1], [-1, 1], [-1, -1], [1, -1]]) / np.sqrt(2)
x = qpsk[rng.integers(0, 4, 4000)]
y_awgn, draw = awgn(x, sigma, rng)
print(f"\nAWGN at 6 dB (textbook): sigma = {sigma:.4f}, "
      f"measured noise std = {draw.noise.std():.4f}")

# --- Rayleigh fading --------------------------------------------------------
y_ray, draw_r = rayleigh(x, sigma, rng)
h_power = (draw_r.fading**2).sum(axis=1)
print(f"Rayleigh fading: mean |h|^2 = {h_power.mean():.3f} (expected 2.0), "
      f"deep fades |h|^2 < 0.1 in {np.mean(h_power < 0.1):.1%} of transmissions")

# with a frozen draw the channel is a deterministic, differentiable map
y_again = apply_draw(x, draw_r)
print("frozen-draw replay identical:", bool(np.array_equal(y_ray, y_again)))

# --- picture ----------------------------------------------------------------
fig, axes = plt.subplots(1, 3, figsize=(12, 4), sharex=True, sharey=True)
axes[0].scatter(x[:, 0], x[:, 1], s=4)
axes[0].set_title("transmitted (QPSK)")
axes[1].scatter(y_awgn[:, 0], y_awgn[:, 1], s=4, alpha=0.4)
axes[1].set_title("after AWGN, 6 dB")
axes[2].scatter(y_ray[:, 0], y_ray[:, 1], s=4, alpha=0.4)
axes[2].set_title("after Rayleigh fading + noise")
for ax in axes:
    ax.set_aspect("equal")
    ax.grid(alpha=0.3)
fig.tight_layout()
fig.savefig(out_dir / "channels.png", dpi=120)
print(f"\nwrote {out_dir / 'channels.png'}")
