"""End-to-end models: symbol -> TX -> normalize -> channel -> RX -> distribution.

Transmitters are lookup tables, dense stacks over one-hot symbols, or
quantum circuits with an expectations head. Receivers are dense softmax
stacks or quantum circuits with a probabilities head. Training minimizes
categorical cross-entropy with Adam; gradients are exact (backprop for the
classical parts, adjoint/shift-rule for the quantum parts, chained through
the frozen channel draw and the power normalization).
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field

import numpy as np

from . import ansatz, qgrad
from .channel import ChannelConfig, ChannelDraw, apply_draw, channel_from_dict, channel_to_dict, draw_vjp, sample_draw, validate_channel
from .classical import (
    lookup_backward,
    lookup_forward,
    lookup_init,
    normalize,
    normalize_backward,
    softmax_xent_grad,
    stack_backward,
    stack_forward,
    stack_get_params,
    stack_init,
    stack_param_count,
    stack_set_params,
)
from .errors import ConfigurationError, DivergenceError, DomainError

P_MIN = 1e-12  # cross-entropy clamp


# ---------------------------------------------------------------------------
# model specs


@dataclass(frozen=True)
class LookupTxSpec:
    kind: str = "lookup"


@dataclass(frozen=True)
class DenseTxSpec:
    hidden: tuple[int, ...] = ()
    kind: str = "dense"


@dataclass(frozen=True)
class QuantumTxSpec:
    circuit: ansatz.CircuitSpec = None
    kind: str = "quantum"


@dataclass(frozen=True)
class DenseRxSpec:
    hidden: tuple[int, ...] = ()
    kind: str = "dense"


@dataclass(frozen=True)
class QuantumRxSpec:
    circuit: ansatz.CircuitSpec = None
    kind: str = "quantum"


@dataclass(frozen=True)
class ModelSpec:
    name: str
    num_symbols: int  # M
    uses: int  # n
    tx: LookupTxSpec | DenseTxSpec | QuantumTxSpec
    rx: DenseRxSpec | QuantumRxSpec
    channel: ChannelConfig


def spec_to_dict(spec: ModelSpec) -> dict:
    tx: dict
    if isinstance(spec.tx, LookupTxSpec):
        tx = {"kind": "lookup"}
    elif isinstance(spec.tx, DenseTxSpec):
        tx = {"kind": "dense", "hidden": list(spec.tx.hidden)}
    else:
        tx = {"kind": "quantum", "circuit": ansatz.circuit_to_dict(spec.tx.circuit)}
    if isinstance(spec.rx, DenseRxSpec):
        rx = {"kind": "dense", "hidden": list(spec.rx.hidden)}
    else:
        rx = {"kind": "quantum", "circuit": ansatz.circuit_to_dict(spec.rx.circuit)}
    return {
        "name": spec.name,
        "num_symbols": spec.num_symbols,
        "uses": spec.uses,
        "tx": tx,
        "rx": rx,
        "channel": channel_to_dict(spec.channel),
    }


def spec_from_dict(d: dict) -> ModelSpec:
    tx_d, rx_d = d["tx"], d["rx"]
    if tx_d["kind"] == "lookup":
        tx = LookupTxSpec()
    elif tx_d["kind"] == "dense":
        tx = DenseTxSpec(hidden=tuple(int(h) for h in tx_d.get("hidden", [])))
    elif tx_d["kind"] == "quantum":
        tx = QuantumTxSpec(circuit=ansatz.circuit_from_dict(tx_d["circuit"]))
    else:
        raise ConfigurationError(f"unknown tx kind {tx_d['kind']!r}")
    if rx_d["kind"] == "dense":
        rx = DenseRxSpec(hidden=tuple(int(h) for h in rx_d.get("hidden", [])))
    elif rx_d["kind"] == "quantum":
        rx = QuantumRxSpec(circuit=ansatz.circuit_from_dict(rx_d["circuit"]))
    else:
        raise ConfigurationError(f"unknown rx kind {rx_d['kind']!r}")
    spec = ModelSpec(
        name=d["name"],
        num_symbols=int(d["num_symbols"]),
        uses=int(d["uses"]),
        tx=tx,
        rx=rx,
        channel=channel_from_dict(d["channel"]),
    )
    validate_spec(spec)
    return spec


def validate_spec(spec: ModelSpec) -> None:
    M, n = spec.num_symbols, spec.uses
    if M < 2 or (M & (M - 1)) != 0:
        raise ConfigurationError(f"symbol count must be a power of two >= 2, got {M}")
    if n < 1:
        raise ConfigurationError(f"channel uses must be >= 1, got {n}")
    validate_channel(spec.channel)
    if isinstance(spec.tx, QuantumTxSpec):
        c = spec.tx.circuit
        ansatz.validate_circuit(c)
        if c.measurement.head != "expectations":
            raise ConfigurationError("quantum TX needs an expectations head")
        if len(c.measurement.observables) != 2 * n:
            raise ConfigurationError(
                f"quantum TX must emit {2 * n} reals, head emits {len(c.measurement.observables)}"
            )
        if c.num_symbols != M:
            raise ConfigurationError("quantum TX circuit symbol count differs from model")
        if not ansatz.takes_symbol(c):
            raise ConfigurationError("quantum TX circuit must use a symbol encoding")
    if isinstance(spec.rx, QuantumRxSpec):
        c = spec.rx.circuit
        ansatz.validate_circuit(c)
        if c.measurement.head != "probabilities":
            raise ConfigurationError("quantum RX needs a probabilities head")
        if (1 << len(c.measurement.subset)) < M:
            raise ConfigurationError("quantum RX emits fewer outcomes than symbols")
        if ansatz.takes_symbol(c):
            raise ConfigurationError(
                "quantum RX input enters via a symbol encoding, which is not differentiable"
            )
        if ansatz.num_features(c) != 2 * n:
            raise ConfigurationError(
                f"quantum RX must consume {2 * n} features, circuit takes {ansatz.num_features(c)}"
            )


# ---------------------------------------------------------------------------
# assembled components


class _LookupTx:
    def __init__(self, spec: ModelSpec, rng):
        self.enc = lookup_init(rng, spec.num_symbols, 2 * spec.uses)

    @property
    def num_params(self):
        return self.enc.num_params

    def get_params(self):
        return self.enc.table.ravel().copy()

    def set_params(self, flat):
        self.enc.table = flat.reshape(self.enc.table.shape).copy()

    def forward(self, s):
        return lookup_forward(self.enc, s), None

    def backward(self, s, cache, upstream):
        return lookup_backward(self.enc, s, upstream).ravel()


class _DenseTx:
    def __init__(self, spec: ModelSpec, rng):
        dims = (spec.num_symbols,) + spec.tx.hidden + (2 * spec.uses,)
        self.layers = stack_init(rng, dims, final_activation="linear")
        self.M = spec.num_symbols

    @property
    def num_params(self):
        return stack_param_count(self.layers)

    def get_params(self):
        return stack_get_params(self.layers)

    def set_params(self, flat):
        stack_set_params(self.layers, flat)

    def _onehot(self, s):
        s = np.atleast_1d(np.asarray(s))
        v = np.zeros((len(s), self.M))
        v[np.arange(len(s)), s - 1] = 1.0
        return v

    def forward(self, s):
        out, cache = stack_forward(self.layers, self._onehot(s))
        return out, cache

    def backward(self, s, cache, upstream):
        _, flat = stack_backward(self.layers, cache, upstream)
        return flat


class _QuantumTx:
    def __init__(self, spec: ModelSpec, rng):
        self.circuit = spec.tx.circuit
        self.params = ansatz.init_circuit_params(self.circuit, rng)

    @property
    def num_params(self):
        return self.params.size

    def get_params(self):
        return self.params.copy()

    def set_params(self, flat):
        self.params = flat.copy()

    def forward(self, s):
        tape = ansatz.compile_tape(self.circuit, self.params, np.atleast_1d(np.asarray(s)))
        return ansatz.run_tape(tape), tape

    def backward(self, s, tape, upstream):
        pgrad, _ = qgrad.adjoint_vjp(tape, upstream)
        return pgrad


class _DenseRx:
    def __init__(self, spec: ModelSpec, rng):
        dims = (2 * spec.uses,) + spec.rx.hidden + (spec.num_symbols,)
        self.layers = stack_init(rng, dims, final_activation="softmax")

    @property
    def num_params(self):
        return stack_param_count(self.layers)

    def get_params(self):
        return stack_get_params(self.layers)

    def set_params(self, flat):
        stack_set_params(self.layers, flat)

    def forward(self, y):
        return stack_forward(self.layers, y)

    def backward_fused(self, cache, probs, s):
        """Backward from the fused softmax+cross-entropy logit gradient."""
        dlogits = softmax_xent_grad(probs, s) / len(s)
        # bypass the softmax Jacobian: feed dlogits into the final linear map
        last = self.layers[-1]
        dv = dlogits @ last.weights
        dw = dlogits.T @ cache[-1]
        db = dlogits.sum(axis=0)
        upstream, flat_head = dv, np.concatenate([dw.ravel(), db])
        if len(self.layers) == 1:
            return upstream, flat_head
        upstream, flat_rest = stack_backward(self.layers[:-1], cache[:-1], upstream)
        return upstream, np.concatenate([flat_rest, flat_head])


class _QuantumRx:
    def __init__(self, spec: ModelSpec, rng):
        self.circuit = spec.rx.circuit
        self.params = ansatz.init_circuit_params(self.circuit, rng)

    @property
    def num_params(self):
        return self.params.size

    def get_params(self):
        return self.params.copy()

    def set_params(self, flat):
        self.params = flat.copy()

    def forward(self, y):
        tape = ansatz.compile_tape(self.circuit, self.params, y)
        return ansatz.run_tape(tape), tape


# ---------------------------------------------------------------------------
# loss head


def xent_loss(p: np.ndarray, s, num_symbols: int) -> float:
    """Mean cross-entropy -log q_s over the designated (first M) outcomes.

    Surplus outcomes of an oversized receiver head are dropped and the
    designated block renormalized; probabilities are clamped at P_MIN.
    """
    p = np.atleast_2d(np.asarray(p, dtype=float))
    s = np.atleast_1d(np.asarray(s))
    designated = p[:, :num_symbols]
    z = designated.sum(axis=1)
    q = designated[np.arange(len(s)), s - 1] / np.maximum(z, P_MIN)
    return float(np.mean(-np.log(np.maximum(q, P_MIN))))


def _xent_prob_grad(p: np.ndarray, s, num_symbols: int) -> np.ndarray:
    """d mean-loss / d p for a probabilities-head receiver."""
    p = np.atleast_2d(p)
    s = np.atleast_1d(np.asarray(s))
    B = len(s)
    designated = p[:, :num_symbols]
    z = np.maximum(designated.sum(axis=1), P_MIN)
    ps = designated[np.arange(B), s - 1]
    grad = np.zeros_like(p)
    live = (ps / z) > P_MIN  # clamped rows have zero gradient
    grad[:, :num_symbols] = 1.0 / z[:, None]
    grad[np.arange(B), s - 1] -= 1.0 / np.maximum(ps, P_MIN)
    grad[~live] = 0.0
    return grad / B


def decode(p: np.ndarray, num_symbols: int) -> np.ndarray:
    """Most likely symbol per row, over the designated outcomes."""
    p = np.atleast_2d(np.asarray(p, dtype=float))
    return np.argmax(p[:, :num_symbols], axis=1) + 1


# ---------------------------------------------------------------------------
# assembled model


_TX_BUILDERS = {LookupTxSpec: _LookupTx, DenseTxSpec: _DenseTx, QuantumTxSpec: _QuantumTx}
_RX_BUILDERS = {DenseRxSpec: _DenseRx, QuantumRxSpec: _QuantumRx}


class Model:
    """An assembled, trainable transmitter/receiver pair."""

    def __init__(self, spec: ModelSpec, rng: np.random.Generator):
        validate_spec(spec)
        self.spec = spec
        self.tx = _TX_BUILDERS[type(spec.tx)](spec, rng)
        self.rx = _RX_BUILDERS[type(spec.rx)](spec, rng)

    @property
    def tx_param_count(self) -> int:
        return self.tx.num_params

    @property
    def rx_param_count(self) -> int:
        return self.rx.num_params

    @property
    def param_count(self) -> int:
        return self.tx.num_params + self.rx.num_params

    def get_params(self) -> np.ndarray:
        return np.concatenate([self.tx.get_params(), self.rx.get_params()])

    def set_params(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=float)
        if flat.shape != (self.param_count,):
            raise DomainError(f"expected {self.param_count} parameters, got {flat.shape}")
        self.tx.set_params(flat[: self.tx.num_params])
        self.rx.set_params(flat[self.tx.num_params:])

    # forward / backward ------------------------------------------------

    def forward_with_draws(self, s, draws: ChannelDraw):
        """Forward pass with frozen channel randomness; returns (probs, cache)."""
        s = np.atleast_1d(np.asarray(s))
        if np.any(s < 1) or np.any(s > self.spec.num_symbols):
            raise DomainError(f"symbols must lie in [1, {self.spec.num_symbols}]")
        x_raw, tx_cache = self.tx.forward(s)
        x = normalize(x_raw, self.spec.uses)
        y = apply_draw(x, draws)
        probs, rx_cache = self.rx.forward(y)
        cache = {"s": s, "tx": tx_cache, "x_raw": x_raw, "draws": draws,
                 "y": y, "rx": rx_cache, "probs": probs}
        return probs, cache

    def forward(self, s, rng: np.random.Generator, ebn0_db: float | None = None):
        s = np.atleast_1d(np.asarray(s))
        cfg = self.spec.channel
        draws = sample_draw(cfg.family, cfg.sigma(ebn0_db), cfg.uses, len(s), rng)
        return self.forward_with_draws(s, draws)

    def backward(self, cache, grad_method: str = "adjoint") -> np.ndarray:
        """Gradient of the mean cross-entropy w.r.t. the flat parameter vector."""
        s, probs = cache["s"], cache["probs"]
        M = self.spec.num_symbols
        if isinstance(self.rx, _DenseRx):
            dy, rx_grad = self.rx.backward_fused(cache["rx"], probs, s)
        else:
            dp = _xent_prob_grad(probs, s, M)
            rx_grad, dy = qgrad.adjoint_vjp(cache["rx"], dp) if grad_method == "adjoint" \
                else qgrad.circuit_vjp(self.rx.circuit, self.rx.params, cache["y"], dp, "shift")
        dx = draw_vjp(cache["draws"], dy)
        dx_raw = normalize_backward(cache["x_raw"], dx, self.spec.uses)
        if isinstance(self.tx, _QuantumTx):
            if grad_method == "adjoint":
                tx_grad, _ = qgrad.adjoint_vjp(cache["tx"], dx_raw)
            else:
                tx_grad, _ = qgrad.circuit_vjp(self.tx.circuit, self.tx.params, s, dx_raw, "shift")
        else:
            tx_grad = self.tx.backward(s, cache["tx"], dx_raw)
        return np.concatenate([tx_grad, rx_grad])

    def loss_on(self, s, draws: ChannelDraw, params: np.ndarray | None = None) -> float:
        """Pure loss evaluation (optionally at a given parameter vector)."""
        if params is not None:
            saved = self.get_params()
            self.set_params(params)
            try:
                probs, _ = self.forward_with_draws(s, draws)
            finally:
                self.set_params(saved)
        else:
            probs, _ = self.forward_with_draws(s, draws)
        return xent_loss(probs, s, self.spec.num_symbols)


def assemble(spec: ModelSpec, rng: np.random.Generator | int | None = None) -> Model:
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    return Model(spec, rng)


# ---------------------------------------------------------------------------
# Adam


@dataclass
class AdamState:
    lr: float
    m: np.ndarray
    v: np.ndarray
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def adam_init(lr: float, num_params: int) -> AdamState:
    return AdamState(lr, np.zeros(num_params), np.zeros(num_params))


def adam_step(state: AdamState, params: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """One bias-corrected Adam update; mutates the state, returns new params."""
    if params.shape != grads.shape or params.shape != state.m.shape:
        raise DomainError("adam shapes do not match")
    state.step += 1
    state.m = state.beta1 * state.m + (1 - state.beta1) * grads
    state.v = state.beta2 * state.v + (1 - state.beta2) * grads**2
    m_hat = state.m / (1 - state.beta1**state.step)
    v_hat = state.v / (1 - state.beta2**state.step)
    return params - state.lr * m_hat / (np.sqrt(v_hat) + state.eps)


# ---------------------------------------------------------------------------
# training


@dataclass
class TrainRecord:
    spec: ModelSpec
    seed: int
    steps: int
    batch: int
    lr: float
    train_ebn0_db: float
    losses: list[float] = field(default_factory=list)
    sers: list[float] = field(default_factory=list)
    initial_ser: float = 1.0
    final_train_ser: float = 1.0
    final_params: np.ndarray | None = None
    wall_clock_seconds: float = 0.0  # informational; excluded from serialization
    diverged_at: int | None = None

    def to_dict(self) -> dict:
        return {
            "spec": spec_to_dict(self.spec),
            "seed": self.seed,
            "steps": self.steps,
            "batch": self.batch,
            "lr": self.lr,
            "train_ebn0_db": self.train_ebn0_db,
            "losses": [float(v) for v in self.losses],
            "sers": [float(v) for v in self.sers],
            "initial_ser": float(self.initial_ser),
            "final_train_ser": float(self.final_train_ser),
            "final_params": [float(v) for v in self.final_params],
            "diverged_at": self.diverged_at,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainRecord":
        return cls(
            spec=spec_from_dict(d["spec"]),
            seed=int(d["seed"]),
            steps=int(d["steps"]),
            batch=int(d["batch"]),
            lr=float(d["lr"]),
            train_ebn0_db=float(d["train_ebn0_db"]),
            losses=[float(v) for v in d["losses"]],
            sers=[float(v) for v in d["sers"]],
            initial_ser=float(d["initial_ser"]),
            final_train_ser=float(d["final_train_ser"]),
            final_params=np.asarray(d["final_params"], dtype=float),
            diverged_at=d.get("diverged_at"),
        )


TRAILING_WINDOW = 100  # steps averaged into final_train_ser


def fit_model(model: Model, steps: int, batch: int, lr: float, train_ebn0_db: float,
              seed: int, rng: np.random.Generator) -> TrainRecord:
    """Training loop on an already-assembled model; rng drives symbol/noise draws."""
    spec = model.spec
    cfg = spec.channel
    sigma = cfg.sigma(train_ebn0_db)
    record = TrainRecord(spec=spec, seed=seed, steps=steps, batch=batch, lr=lr,
                         train_ebn0_db=train_ebn0_db)
    t0 = time.perf_counter()

    # pre-training symbol error rate at the training noise level
    s0 = rng.integers(1, spec.num_symbols + 1, size=batch)
    d0 = sample_draw(cfg.family, sigma, cfg.uses, batch, rng)
    p0, _ = model.forward_with_draws(s0, d0)
    record.initial_ser = float(np.mean(decode(p0, spec.num_symbols) != s0))

    params = model.get_params()
    adam = adam_init(lr, params.size)
    for step in range(steps):
        s = rng.integers(1, spec.num_symbols + 1, size=batch)
        draws = sample_draw(cfg.family, sigma, cfg.uses, batch, rng)
        probs, cache = model.forward_with_draws(s, draws)
        loss = xent_loss(probs, s, spec.num_symbols)
        ser = float(np.mean(decode(probs, spec.num_symbols) != s))
        record.losses.append(float(loss))
        record.sers.append(ser)
        if not np.isfinite(loss):
            record.diverged_at = step
            record.final_params = model.get_params()
            record.wall_clock_seconds = time.perf_counter() - t0
            raise DivergenceError(
                f"non-finite loss at step {step} (lr={lr}, seed={seed})", record
            )
        grads = model.backward(cache)
        params = adam_step(adam, params, grads)
        model.set_params(params)

    record.final_params = model.get_params()
    record.wall_clock_seconds = time.perf_counter() - t0
    tail = record.sers[-TRAILING_WINDOW:]
    record.final_train_ser = float(np.mean(tail)) if tail else record.initial_ser
    return record


def train(spec: ModelSpec, steps: int, batch: int = 64, lr: float = 0.01,
          train_ebn0_db: float = 15.0, seed: int = 0) -> TrainRecord:
    """Assemble and train a model; fully reproducible from (spec, seed)."""
    rng = np.random.default_rng(seed)
    model = Model(spec, rng)
    return fit_model(model, steps, batch, lr, train_ebn0_db, seed, rng)


def restore_model(record: TrainRecord) -> Model:
    """Rebuild a model from a record snapshot and load its final parameters."""
    model = Model(record.spec, np.random.default_rng(record.seed))
    model.set_params(np.asarray(record.final_params, dtype=float))
    return model
