"""Exact statevector simulation of small qubit registers.

Convention: qubit 0 is the most-significant bit of the basis-state index,
so |q0 q1 ... q_{k-1}> lives at index sum_i q_i * 2**(k-1-i). Amplitudes
are complex128; every operation is a pure function returning new values.

The ``_``-prefixed kernels act on batches of states shaped ``(B, 2**k)``
(leading batch axis) and are reused by the circuit layer for vectorized
evaluation. The public API wraps single states.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import ConfigurationError, UnsupportedOperationError

MAX_QUBITS = 12

PAULI_MATS = {
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

_EYE2 = np.eye(2, dtype=complex)


# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class StateVector:
    """State of a k-qubit register: 2**k complex amplitudes."""

    num_qubits: int
    amps: np.ndarray

    def norm_sq(self) -> float:
        return float(np.sum(self.amps.real**2 + self.amps.imag**2))


@dataclass(frozen=True)
class GateOp:
    """One gate application.

    kind is one of {rx, ry, rz, rot, x, cnot, zz}; params holds the 0-3
    rotation angles in radians. rot(phi, theta, omega) is the ZYZ general
    rotation RZ(omega) @ RY(theta) @ RZ(phi).
    """

    kind: str
    targets: tuple[int, ...]
    params: tuple[float, ...] = ()


@dataclass(frozen=True)
class PauliWord:
    """Tensor product of single-qubit Paulis; unlisted qubits are identity."""

    factors: tuple[tuple[int, str], ...]


def pauli_word(factors: Mapping[int, str]) -> PauliWord:
    """Build a PauliWord from a {qubit: 'X'|'Y'|'Z'} mapping."""
    items = tuple(sorted((int(q), p.upper()) for q, p in factors.items()))
    for q, p in items:
        if p not in PAULI_MATS:
            raise ConfigurationError(f"unknown Pauli factor {p!r}")
        if q < 0:
            raise ConfigurationError(f"negative qubit index {q}")
    return PauliWord(items)


# gate constructors

def rx(q: int, theta: float) -> GateOp:
    return GateOp("rx", (q,), (float(theta),))


def ry(q: int, theta: float) -> GateOp:
    return GateOp("ry", (q,), (float(theta),))


def rz(q: int, theta: float) -> GateOp:
    return GateOp("rz", (q,), (float(theta),))


def rot(q: int, phi: float, theta: float, omega: float) -> GateOp:
    return GateOp("rot", (q,), (float(phi), float(theta), float(omega)))


def x(q: int) -> GateOp:
    return GateOp("x", (q,))


def cnot(ctrl: int, tgt: int) -> GateOp:
    return GateOp("cnot", (ctrl, tgt))


def zz(q0: int, q1: int, theta: float) -> GateOp:
    return GateOp("zz", (q0, q1), (float(theta),))


# ---------------------------------------------------------------------------
# batched kernels (states shaped (B, 2**k))


def _rot_mats(axis: str, angles: np.ndarray) -> np.ndarray:
    """2x2 matrices exp(-i*angle/2 * Pauli_axis), shaped angles.shape + (2, 2)."""
    a = np.asarray(angles, dtype=float)
    c, s = np.cos(a / 2), np.sin(a / 2)
    m = np.zeros(a.shape + (2, 2), dtype=complex)
    if axis == "X":
        m[..., 0, 0] = c
        m[..., 0, 1] = -1j * s
        m[..., 1, 0] = -1j * s
        m[..., 1, 1] = c
    elif axis == "Y":
        m[..., 0, 0] = c
        m[..., 0, 1] = -s
        m[..., 1, 0] = s
        m[..., 1, 1] = c
    elif axis == "Z":
        m[..., 0, 0] = c - 1j * s
        m[..., 1, 1] = c + 1j * s
    else:
        raise UnsupportedOperationError(f"unknown rotation axis {axis!r}")
    return m


def _bitflip_mats(bits: np.ndarray) -> np.ndarray:
    """Per-sample X**bit matrices, shaped (B, 2, 2)."""
    on = np.asarray(bits).astype(bool)[:, None, None]
    return np.where(on, PAULI_MATS["X"], _EYE2)


def _apply_1q(amps: np.ndarray, k: int, q: int, mats: np.ndarray) -> np.ndarray:
    """Apply 2x2 matrices to qubit q; mats is (2,2) shared or (B,2,2) per row."""
    B, dim = amps.shape
    a = amps.reshape(B, 1 << q, 2, dim >> (q + 1))
    a0 = a[:, :, 0, :]
    a1 = a[:, :, 1, :]
    out = np.empty_like(a)
    if mats.ndim == 2:
        out[:, :, 0, :] = mats[0, 0] * a0 + mats[0, 1] * a1
        out[:, :, 1, :] = mats[1, 0] * a0 + mats[1, 1] * a1
    else:
        m = mats[:, :, :, None, None]
        out[:, :, 0, :] = m[:, 0, 0] * a0 + m[:, 0, 1] * a1
        out[:, :, 1, :] = m[:, 1, 0] * a0 + m[:, 1, 1] * a1
    return out.reshape(B, dim)


def _apply_x(amps: np.ndarray, k: int, q: int) -> np.ndarray:
    B, dim = amps.shape
    a = amps.reshape(B, 1 << q, 2, dim >> (q + 1))
    return np.ascontiguousarray(a[:, :, ::-1, :]).reshape(B, dim)


def _apply_cnot(amps: np.ndarray, k: int, ctrl: int, tgt: int) -> np.ndarray:
    B, dim = amps.shape
    if ctrl < tgt:
        a = amps.reshape(
            B, 1 << ctrl, 2, 1 << (tgt - ctrl - 1), 2, dim >> (tgt + 1)
        ).copy()
        flipped = a[:, :, 1, :, ::-1, :].copy()
        a[:, :, 1, :, :, :] = flipped
    else:
        a = amps.reshape(
            B, 1 << tgt, 2, 1 << (ctrl - tgt - 1), 2, dim >> (ctrl + 1)
        ).copy()
        flipped = a[:, :, ::-1, :, 1, :].copy()
        a[:, :, :, :, 1, :] = flipped
    return a.reshape(B, dim)


def _zz_parity(k: int, q0: int, q1: int) -> np.ndarray:
    """+1 where the two qubits' bits agree, -1 where they differ."""
    idx = np.arange(1 << k)
    b0 = (idx >> (k - 1 - q0)) & 1
    b1 = (idx >> (k - 1 - q1)) & 1
    return 1.0 - 2.0 * (b0 ^ b1)


def _apply_zz(amps: np.ndarray, k: int, q0: int, q1: int, angles: np.ndarray) -> np.ndarray:
    """Diagonal gate exp(-i*angle/2 * Z_q0 Z_q1); angles scalar or (B,)."""
    parity = _zz_parity(k, q0, q1)
    a = np.atleast_1d(np.asarray(angles, dtype=float))
    phase = np.exp(-0.5j * a[:, None] * parity[None, :])
    return amps * phase


def _apply_pauli_word(amps: np.ndarray, k: int, factors) -> np.ndarray:
    out = amps
    for q, p in factors:
        out = _apply_1q(out, k, q, PAULI_MATS[p])
    return out


def _apply_gateop(amps: np.ndarray, k: int, g: GateOp) -> np.ndarray:
    if g.kind == "x":
        return _apply_x(amps, k, g.targets[0])
    if g.kind == "cnot":
        return _apply_cnot(amps, k, *g.targets)
    if g.kind == "zz":
        return _apply_zz(amps, k, g.targets[0], g.targets[1], g.params[0])
    if g.kind in ("rx", "ry", "rz"):
        return _apply_1q(amps, k, g.targets[0], _rot_mats(g.kind[1].upper(), g.params[0]))
    if g.kind == "rot":
        phi, theta, omega = g.params
        q = g.targets[0]
        out = _apply_1q(amps, k, q, _rot_mats("Z", phi))
        out = _apply_1q(out, k, q, _rot_mats("Y", theta))
        return _apply_1q(out, k, q, _rot_mats("Z", omega))
    raise UnsupportedOperationError(f"unknown gate kind {g.kind!r}")


def _marginal_probs(amps: np.ndarray, k: int, subset: Sequence[int]) -> np.ndarray:
    """Born probabilities of the ordered subset; subset[0] is the outcome MSB."""
    B = amps.shape[0]
    p = (amps.real**2 + amps.imag**2).reshape((B,) + (2,) * k)
    keep = sorted(subset)
    drop = tuple(1 + i for i in range(k) if i not in set(subset))
    if drop:
        p = p.sum(axis=drop)
    order = [0] + [1 + keep.index(q) for q in subset]
    return np.ascontiguousarray(p.transpose(order)).reshape(B, 1 << len(subset))


# ---------------------------------------------------------------------------
# public single-state API


def new_state(k: int) -> StateVector:
    """Prepare |0...0> on k qubits."""
    if not isinstance(k, (int, np.integer)) or not 1 <= k <= MAX_QUBITS:
        raise ConfigurationError(f"qubit count must be in [1, {MAX_QUBITS}], got {k}")
    amps = np.zeros(1 << k, dtype=complex)
    amps[0] = 1.0
    return StateVector(int(k), amps)


def _check_targets(g: GateOp, k: int) -> None:
    if len(set(g.targets)) != len(g.targets):
        raise IndexError(f"gate targets must be distinct, got {g.targets}")
    for q in g.targets:
        if not 0 <= q < k:
            raise IndexError(f"target {q} out of range for {k} qubits")


def apply_gate(state: StateVector, g: GateOp) -> StateVector:
    """Apply one gate, returning a new state with preserved norm."""
    _check_targets(g, state.num_qubits)
    amps = _apply_gateop(state.amps[None, :], state.num_qubits, g)[0]
    return StateVector(state.num_qubits, amps)


def apply_circuit(state: StateVector, gates: Sequence[GateOp]) -> StateVector:
    for g in gates:
        state = apply_gate(state, g)
    return state


def gate_matrix(g: GateOp) -> np.ndarray:
    """Unitary of the gate on its own targets (first target = row-index MSB)."""
    if g.kind in ("rx", "ry", "rz"):
        return _rot_mats(g.kind[1].upper(), g.params[0])
    if g.kind == "rot":
        phi, theta, omega = g.params
        return _rot_mats("Z", omega) @ _rot_mats("Y", theta) @ _rot_mats("Z", phi)
    if g.kind == "x":
        return PAULI_MATS["X"].copy()
    if g.kind == "cnot":
        m = np.eye(4, dtype=complex)
        m[[2, 3]] = m[[3, 2]]
        return m
    if g.kind == "zz":
        theta = g.params[0]
        phase = np.exp(-0.5j * theta * np.array([1.0, -1.0, -1.0, 1.0]))
        return np.diag(phase)
    raise UnsupportedOperationError(f"unknown gate kind {g.kind!r}")


def expectation(state: StateVector, obs: PauliWord) -> float:
    """Analytic <psi|O|psi> for a Pauli word; always real in [-1, 1]."""
    for q, _ in obs.factors:
        if not 0 <= q < state.num_qubits:
            raise IndexError(f"observable qubit {q} out of range")
    amps = state.amps[None, :]
    acted = _apply_pauli_word(amps, state.num_qubits, obs.factors)
    val = complex(np.vdot(amps, acted))
    if abs(val.imag) > 1e-12:
        raise AssertionError(f"expectation has imaginary residue {val.imag}")
    return float(val.real)


def probabilities(state: StateVector, subset: Sequence[int] | None = None) -> np.ndarray:
    """Marginal Born probabilities over the ordered qubit subset (default: all)."""
    k = state.num_qubits
    if subset is None:
        subset = tuple(range(k))
    subset = tuple(int(q) for q in subset)
    if len(subset) == 0:
        raise ConfigurationError("qubit subset must be non-empty")
    if len(set(subset)) != len(subset):
        raise ConfigurationError(f"qubit subset must be distinct, got {subset}")
    for q in subset:
        if not 0 <= q < k:
            raise IndexError(f"subset qubit {q} out of range")
    return _marginal_probs(state.amps[None, :], k, subset)[0]


def sample(state: StateVector, shots: int, rng: np.random.Generator) -> dict[str, int]:
    """Draw computational-basis outcomes; returns {bitstring: count} (qubit 0 leftmost)."""
    if shots < 1:
        raise ConfigurationError(f"shots must be >= 1, got {shots}")
    p = probabilities(state)
    p = p / p.sum()
    outcomes = rng.choice(p.size, size=shots, p=p)
    values, counts = np.unique(outcomes, return_counts=True)
    k = state.num_qubits
    return {format(int(v), f"0{k}b"): int(c) for v, c in zip(values, counts)}
