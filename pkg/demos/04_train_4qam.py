"""Train the fully-quantum 4-QAM autoencoder end to end.

A 6-parameter quantum transmitter (basis encoding + one entangled rotation
layer) learns a constellation while an 8-parameter quantum receiver learns
to classify the noisy channel output. Saves convergence curves and the
learned constellation to demos/output/train_4qam.png.
"""
from dataclasses import replace
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from qcae import zoo
from qcae.autoencoder import restore_model, train
from qcae.classical import normalize

out_dir = Path(__file__).parent / "output"
out_dir.mkdir(exist_ok=True)

spec = zoo.get("qq1")
spec = replace(spec, channel=replace(spec.channel, sigma_mode="textbook"))
print(f"model {spec.name}: quantum TX + quantum RX, "
      f"{zoo.get('qq1').num_symbols}-symbol alphabet")

record = train(spec, steps=800, batch=64, lr=0.1, train_ebn0_db=15.0, seed=2)
print(f"initial SER {record.initial_ser:.3f} -> trailing SER {record.final_train_ser:.4f} "
      f"in {record.wall_clock_seconds:.1f}s")

# the learned constellation: transmitter outputs for each symbol, power-normalized
model = restore_model(record)
x_raw, _ = model.tx.forward(np.arange(1, 5))
points = normalize(x_raw, spec.uses)
for s, p in enumerate(points, 1):
    print(f"  symbol {s}: ({p[0]:+.3f}, {p[1]:+.3f})")

fig, axes = plt.subplots(1, 3, figsize=(12, 3.6))
axes[0].plot(record.losses)
axes[0].set_yscale("log")
axes[0].set_title("training loss")
axes[0].set_xlabel("step")
axes[1].plot(record.sers)
axes[1].set_title("training SER")
axes[1].set_xlabel("step")
axes[2].scatter(points[:, 0], points[:, 1], c=range(4), cmap="tab10", s=80)
for s, p in enumerate(points, 1):
    axes[2].annotate(str(s), p, textcoords="offset points", xytext=(6, 4))
axes[2].set_title("learned constellation")
axes[2].set_aspect("equal")
axes[2].grid(alpha=0.3)
theta = np.linspace(0, 2 * np.pi, 200)
axes[2].plot(np.cos(theta), np.sin(theta), lw=0.5, color="gray")
fig.tight_layout()
fig.savefig(out_dir / "train_4qam.png", dpi=120)
print(f"wrote {out_dir / 'train_4qam.png'}")
