"""Tour of the statevector simulator.

Builds small registers gate by gate and reads them out three ways:
analytic Pauli expectations, Born probabilities, and shot sampling.
"""
import numpy as np

from qcae.qstate import (
    apply_circuit,
    apply_gate,
    cnot,
    expectation,
    new_state,
    pauli_word,
    probabilities,
    ry,
    rz,
    sample,
    x,
)

# --- single qubit ----------------------------------------------------------
# |0> rotated by RY(theta) has <Z> = cos(theta)
state = new_state(1)
for theta in (0.0, np.pi / 3, np.pi / 2, np.pi):
    rotated = apply_gate(state, ry(0, theta))
    print(f"RY({theta:.3f})|0>  <Z> = {expectation(rotated, pauli_word({0: 'Z'})):+.4f} "
          f"(cos = {np.cos(theta):+.4f})")

# --- entanglement ----------------------------------------------------------
# RY(pi/2) makes |+>, CNOT copies the superposition into correlations
bell = apply_circuit(new_state(2), [ry(0, np.pi / 2), cnot(0, 1)])
print("\nBell pair probabilities:", np.round(probabilities(bell), 4))
print("  <Z0>    =", round(expectation(bell, pauli_word({0: "Z"})), 10))
print("  <Z0 Z1> =", round(expectation(bell, pauli_word({0: "Z", 1: "Z"})), 10))

# marginals of one qubit are maximally mixed
print("  marginal of qubit 0:", np.round(probabilities(bell, (0,)), 4))

# --- sampling --------------------------------------------------------------
rng = np.random.default_rng(7)
counts = sample(bell, 10_000, rng)
print("\n10k shots on the Bell pair:", counts)

# --- a deeper register -----------------------------------------------------
state = new_state(3)
program = [ry(0, 0.4), ry(1, 1.1), ry(2, 2.2), cnot(0, 1), cnot(1, 2), rz(2, 0.9), x(0)]
state = apply_circuit(state, program)
print("\n3-qubit program: norm^2 =", round(state.norm_sq(), 12))
print("probabilities sum =", round(float(probabilities(state).sum()), 12))
