"""Exact circuit gradients.

Three routes:

* ``fd_grad`` -- central finite differences, the black-box oracle.
* ``shift_grad`` / ``input_grad`` -- the two-term shift rule applied per gate
  occurrence in angle space, then chained through each angle's linear
  dependence on parameters / input features. Exact for every gate in this
  package (all generators are Pauli words with +-1 eigenvalues).
* ``adjoint_vjp`` -- a reverse-mode pass over the tape computing the same
  values as the shift rule in O(gates) instead of O(gates * parameters).
  Used by the training loop; must agree with ``shift_grad`` to 1e-9.
"""
from __future__ import annotations

import numpy as np

from .ansatz import CircuitSpec, Tape, _apply_taped, compile_tape, run_tape, run_tape_amps, takes_symbol
from .errors import ConfigurationError, UnsupportedOperationError
from .qstate import PAULI_MATS, _apply_1q, _zz_parity

SHIFT = np.pi / 2

_GENERATOR_AXIS = {"rx": "X", "ry": "Y", "rz": "Z"}


def fd_grad(f, x, h: float = 1e-4) -> np.ndarray:
    """Central finite differences of f at x.

    f may return a scalar or an array; the result has shape
    f(x).shape + (len(x),).
    """
    if h <= 0:
        raise ConfigurationError(f"step size must be positive, got {h}")
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        e = np.zeros_like(x)
        e.flat[j] = h
        cols.append((np.asarray(f(x + e), dtype=float) - np.asarray(f(x - e), dtype=float)) / (2 * h))
    return np.stack(cols, axis=-1)


def _as_tape(circuit, params, x) -> Tape:
    if isinstance(circuit, Tape):
        return circuit
    return compile_tape(circuit, params, x)


def _occurrence_shift_derivs(tape: Tape, gate_index: int) -> np.ndarray:
    """d(outputs)/d(angle of one gate occurrence), shaped (B, O)."""
    g = tape.gates[gate_index]
    if g.kind not in ("rx", "ry", "rz", "zz"):
        raise UnsupportedOperationError(f"no shift rule for gate kind {g.kind!r}")
    orig = g.angle
    try:
        g.angle = orig + SHIFT
        plus = run_tape(tape)
        g.angle = orig - SHIFT
        minus = run_tape(tape)
    finally:
        g.angle = orig
    return (plus - minus) / 2.0


def shift_grad(circuit, params=None, x=None) -> tuple[np.ndarray, np.ndarray]:
    """Outputs and Jacobian w.r.t. the flat parameter vector.

    Accepts a CircuitSpec (with params and input) or a prebuilt Tape.
    Returns (outputs (B, O), jacobian (B, O, P)); a single (non-batched)
    input yields (O,) and (O, P).
    """
    tape = _as_tape(circuit, params, x)
    squeeze = not isinstance(circuit, Tape) and _single_input(circuit, x)
    outputs = run_tape(tape)
    jac = np.zeros(outputs.shape + (tape.num_params,))
    for gi, g in enumerate(tape.gates):
        if not g.pdeps:
            continue
        d = _occurrence_shift_derivs(tape, gi)
        for pidx, coeff in g.pdeps:
            jac[:, :, pidx] += coeff[:, None] * d
    if squeeze:
        return outputs[0], jac[0]
    return outputs, jac


def input_grad(circuit, params=None, x=None) -> tuple[np.ndarray, np.ndarray]:
    """Outputs and Jacobian w.r.t. the real input feature vector."""
    if isinstance(circuit, Tape):
        tape = circuit
        if tape.num_features == 0:
            raise ConfigurationError("circuit input is not differentiable (symbol encoding)")
    else:
        if takes_symbol(circuit):
            raise ConfigurationError("circuit input is not differentiable (symbol encoding)")
        tape = compile_tape(circuit, params, x)
    squeeze = not isinstance(circuit, Tape) and _single_input(circuit, x)
    outputs = run_tape(tape)
    jac = np.zeros(outputs.shape + (tape.num_features,))
    for gi, g in enumerate(tape.gates):
        if not g.xdeps:
            continue
        d = _occurrence_shift_derivs(tape, gi)
        for fidx, coeff in g.xdeps:
            jac[:, :, fidx] += coeff[:, None] * d
    if squeeze:
        return outputs[0], jac[0]
    return outputs, jac


def _single_input(spec: CircuitSpec, x) -> bool:
    arr = np.asarray(x)
    if takes_symbol(spec):
        return arr.ndim == 0
    return arr.ndim == 1


# ---------------------------------------------------------------------------
# adjoint fast path


def _apply_generator(amps: np.ndarray, k: int, g) -> np.ndarray:
    axis = _GENERATOR_AXIS.get(g.kind)
    if axis is not None:
        return _apply_1q(amps, k, g.qubits[0], PAULI_MATS[axis])
    if g.kind == "zz":
        return amps * _zz_parity(k, *g.qubits)[None, :]
    raise UnsupportedOperationError(f"no generator for gate kind {g.kind!r}")


def _head_adjoint_state(tape: Tape, amps: np.ndarray, upstream: np.ndarray) -> np.ndarray:
    """A|psi> for the effective observable A = sum_o upstream_o * O_o."""
    from .qstate import _apply_pauli_word

    k = tape.num_qubits
    if tape.head.head == "expectations":
        lam = np.zeros_like(amps)
        for j, obs in enumerate(tape.head.observables):
            lam += upstream[:, j, None] * _apply_pauli_word(amps, k, obs.factors)
        return lam
    # probabilities: A is diagonal with the upstream weight of each full
    # basis state's projected outcome
    weights = upstream[:, tape.outcome_index]
    return weights * amps


def adjoint_vjp(tape: Tape, upstream: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vector-Jacobian products sum_bo upstream[b,o] * d out[b,o] / d(theta, x).

    upstream has shape (B, O). Returns (param_grad (P,), input_grad (B, F)).
    Per-sample contributions are summed into the parameter gradient (shared
    parameters) and kept per sample for the input gradient.
    """
    k = tape.num_qubits
    amps = run_tape_amps(tape)
    lam = _head_adjoint_state(tape, amps, np.asarray(upstream, dtype=float))
    phi = amps
    pgrad = np.zeros(tape.num_params)
    xgrad = np.zeros((tape.batch, tape.num_features)) if tape.num_features else np.zeros((tape.batch, 0))
    for g in reversed(tape.gates):
        if g.pdeps or g.xdeps:
            # d<A>/d(angle) = 2 Re <lam| (-i/2 G) |phi> = Im <lam|G|phi>
            gphi = _apply_generator(phi, k, g)
            term = np.sum(np.conj(lam) * gphi, axis=1).imag
            for pidx, coeff in g.pdeps:
                pgrad[pidx] += float(np.dot(coeff, term))
            for fidx, coeff in g.xdeps:
                xgrad[:, fidx] += coeff * term
        lam = _apply_taped(lam, k, g, invert=True)
        phi = _apply_taped(phi, k, g, invert=True)
    return pgrad, xgrad


def circuit_vjp(spec: CircuitSpec, params: np.ndarray, x, upstream: np.ndarray,
                method: str = "adjoint") -> tuple[np.ndarray, np.ndarray]:
    """Loss-directed gradients through a circuit for a batch of inputs.

    method "adjoint" runs the reverse pass; "shift" contracts the full
    shift-rule Jacobians (reference, slower).
    """
    tape = compile_tape(spec, params, x)
    upstream = np.asarray(upstream, dtype=float)
    if method == "adjoint":
        return adjoint_vjp(tape, upstream)
    if method != "shift":
        raise ConfigurationError(f"unknown gradient method {method!r}")
    _, pjac = shift_grad(tape)
    pgrad = np.einsum("bo,bop->p", upstream, pjac)
    if tape.num_features:
        _, xjac = input_grad(tape)
        xgrad = np.einsum("bo,bof->bf", upstream, xjac)
    else:
        xgrad = np.zeros((tape.batch, 0))
    return pgrad, xgrad
