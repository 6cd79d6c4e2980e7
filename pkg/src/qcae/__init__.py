"""Hybrid quantum-classical channel autoencoders.

Trainable transmitter/receiver pairs (lookup tables, dense networks, or
simulated parameterized quantum circuits) optimized end-to-end against
AWGN and Rayleigh-fading channels.
"""

from . import ansatz, autoencoder, channel, classical, evaluate, qgrad, qstate, zoo
from .ansatz import CircuitSpec, CoreLayerSpec, EncodingSpec, MeasurementSpec, run_circuit
from .autoencoder import Model, ModelSpec, TrainRecord, assemble, train, xent_loss
from .channel import ChannelConfig, ChannelDraw, sigma_from_snr
from .errors import (
    ConfigurationError,
    DegenerateInputError,
    DivergenceError,
    DomainError,
    UnsupportedOperationError,
)
from .evaluate import qpsk_ml_oracle, ser, snr_sweep
from .qstate import GateOp, PauliWord, StateVector, new_state, apply_gate, expectation, probabilities

__version__ = "0.1.0"
