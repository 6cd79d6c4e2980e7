"""Generalization across noise levels: sweep a trained model, compare with
the maximum-likelihood QPSK oracle.

The model trains at a single SNR (15 dB) and is then evaluated on levels it
never saw. Saves demos/output/snr_sweep.png.
"""
from dataclasses import replace
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from qcae import zoo
from qcae.autoencoder import restore_model, train
from qcae.evaluate import DEFAULT_LEVELS, qpsk_ml_oracle, snr_sweep, sweep_to_csv

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

spec = zoo.get("qq1")
spec = replace(spec, channel=replace(spec.channel, sigma_mode="textbook"))
record = train(spec, steps=1500, batch=64, lr=0.1, train_ebn0_db=15.0, seed=2)
print(f"trained qq1: trailing SER {record.final_train_ser:.4f}")

model = restore_model(record)
sweep = snr_sweep(model, DEFAULT_LEVELS, batches=30, batch=64, seed=77)
oracle = qpsk_ml_oracle(DEFAULT_LEVELS, samples=200_000, sigma_mode="textbook", seed=77)

print(f"{'Eb/N0':>6s} {'learned':>9s} {'ML QPSK':>9s}")
for point, ref in zip(sweep.points, oracle):
    print(f"{point.ebn0_db:6.1f} {point.ser:9.4f} {ref:9.4f}")

sweep_to_csv(sweep, out_dir / "qq1_sweep.csv")

fig, ax = plt.subplots(figsize=(5.5, 4))
floor = 1e-5  # display floor for zero Monte-Carlo estimates
ax.semilogy(sweep.levels(), [max(v, floor) for v in sweep.sers()], "o-",
            label="learned (quantum TX+RX, 14 params)")
ax.semilogy(list(DEFAULT_LEVELS), [max(v, floor) for v in oracle], "s--",
            label="maximum-likelihood QPSK")
ax.set_xlabel("Eb/N0 [dB]")
ax.set_ylabel("symbol error rate")
ax.grid(alpha=0.3, which="both")
ax.legend()
fig.tight_layout()
fig.savefig(out_dir / "snr_sweep.png", dpi=120)
print(f"wrote {out_dir / 'snr_sweep.png'} and {out_dir / 'qq1_sweep.csv'}")
