"""Built-in fixture models.

4-QAM AWGN family (M=4, n=1, R=2):

===== ========================== =========================== =====
name  transmitter                receiver                    total
===== ========================== =========================== =====
cc1   lookup, 8                  dense (2,2), 24             32
cc2   lookup, 8                  dense (16,8), 220           228
cc3   dense (3,), 23             dense (16,8), 220           243
qc1   quantum basis+rot+CNOT, 6  dense (16,8), 220           226
qc2   quantum basis+rot, 6       dense (16,8), 220           226
cq1   lookup, 8                  quantum weighted angle, 8   16
cq2   lookup, 8                  quantum qaoa + 2 layers, 15 23
qq1   quantum (as qc1), 6        quantum (as cq1), 8         14
===== ========================== =========================== =====

16-QAM AWGN family (M=16, n=1, R=4) shares a dense receiver sized
2 -> 4M -> 2M -> M; transmitters: qc1_16qam is a 2-qubit weighted-angle
encoder with two re-uploaded rotation layers (14 params), cc1_16qam and
cc2_16qam are dense baselines with 40 and 306 transmitter params.

Rayleigh 4-QAM family (M=4, n=2, R=1): cq1_rayleigh pairs a lookup
transmitter with a 16-layer RY-rotation receiver on 4 qubits (arctan input
squashing, per-layer encoding weights, trailing measurement rotations; 132
receiver params); cc_rayleigh is the parameter-matched dense baseline
(hidden (14,4), 150 receiver params).
"""
from __future__ import annotations

from .ansatz import (
    CircuitSpec,
    CoreLayerSpec,
    EncodingSpec,
    MeasurementSpec,
    default_tx_observables,
)
from .autoencoder import (
    DenseRxSpec,
    DenseTxSpec,
    LookupTxSpec,
    ModelSpec,
    QuantumRxSpec,
    QuantumTxSpec,
)
from .channel import ChannelConfig
from .errors import ConfigurationError

_CHAIN2 = ((0, 1),)
_RING4 = ((0, 1), (1, 2), (2, 3), (3, 0))

_RX_HIDDEN_BIG = (16, 8)  # 220 params on 2 -> M=4
_RX_HIDDEN_SMALL = (2, 2)  # 24 params on 2 -> M=4


def _awgn4() -> ChannelConfig:
    return ChannelConfig(family="awgn", rate=2.0, uses=1)


def _awgn16() -> ChannelConfig:
    return ChannelConfig(family="awgn", rate=4.0, uses=1)


def _rayleigh4() -> ChannelConfig:
    return ChannelConfig(family="rayleigh", rate=1.0, uses=2)


def _qc1_circuit(entangled: bool = True) -> CircuitSpec:
    return CircuitSpec(
        num_qubits=2,
        encoding=EncodingSpec("basis"),
        core=CoreLayerSpec("general_rot", _CHAIN2 if entangled else (), layers=1),
        measurement=MeasurementSpec("expectations", observables=default_tx_observables(2)),
        num_symbols=4,
    )


def _cq1_circuit() -> CircuitSpec:
    return CircuitSpec(
        num_qubits=2,
        encoding=EncodingSpec("feature_angle"),
        core=CoreLayerSpec("general_rot", _CHAIN2, layers=1),
        measurement=MeasurementSpec("probabilities", subset=(0, 1)),
        num_symbols=4,
    )


def _cq2_circuit() -> CircuitSpec:
    return CircuitSpec(
        num_qubits=2,
        encoding=EncodingSpec("qaoa", qaoa_layers=1),
        core=CoreLayerSpec("general_rot", _CHAIN2, layers=2),
        measurement=MeasurementSpec("probabilities", subset=(0, 1)),
        num_symbols=4,
    )


def _qc1_16qam_circuit() -> CircuitSpec:
    # weighted angle encoding shared across two re-uploaded rotation layers
    return CircuitSpec(
        num_qubits=2,
        encoding=EncodingSpec("weighted_angle", weight_sharing="shared"),
        core=CoreLayerSpec("general_rot", _CHAIN2, layers=2, reupload=True),
        measurement=MeasurementSpec("expectations", observables=default_tx_observables(2)),
        num_symbols=16,
    )


def _cq1_rayleigh_circuit() -> CircuitSpec:
    return CircuitSpec(
        num_qubits=4,
        encoding=EncodingSpec("feature_angle", weight_sharing="per_layer"),
        core=CoreLayerSpec("ry_only", _RING4, layers=16, reupload=True),
        measurement=MeasurementSpec("probabilities", subset=(0, 1), measurement_weights=True),
        num_symbols=4,
        preprocess="arctan",
    )


def _build(name: str) -> ModelSpec:
    if name == "cc1":
        return ModelSpec(name, 4, 1, LookupTxSpec(), DenseRxSpec(_RX_HIDDEN_SMALL), _awgn4())
    if name == "cc2":
        return ModelSpec(name, 4, 1, LookupTxSpec(), DenseRxSpec(_RX_HIDDEN_BIG), _awgn4())
    if name == "cc3":
        return ModelSpec(name, 4, 1, DenseTxSpec((3,)), DenseRxSpec(_RX_HIDDEN_BIG), _awgn4())
    if name == "qc1":
        return ModelSpec(name, 4, 1, QuantumTxSpec(_qc1_circuit(True)),
                         DenseRxSpec(_RX_HIDDEN_BIG), _awgn4())
    if name == "qc2":
        return ModelSpec(name, 4, 1, QuantumTxSpec(_qc1_circuit(False)),
                         DenseRxSpec(_RX_HIDDEN_BIG), _awgn4())
    if name == "cq1":
        return ModelSpec(name, 4, 1, LookupTxSpec(), QuantumRxSpec(_cq1_circuit()), _awgn4())
    if name == "cq2":
        return ModelSpec(name, 4, 1, LookupTxSpec(), QuantumRxSpec(_cq2_circuit()), _awgn4())
    if name == "qq1":
        return ModelSpec(name, 4, 1, QuantumTxSpec(_qc1_circuit(True)),
                         QuantumRxSpec(_cq1_circuit()), _awgn4())
    if name == "qc1_16qam":
        return ModelSpec(name, 16, 1, QuantumTxSpec(_qc1_16qam_circuit()),
                         DenseRxSpec((64, 32)), _awgn16())
    if name == "cc1_16qam":
        return ModelSpec(name, 16, 1, DenseTxSpec((2,)), DenseRxSpec((64, 32)), _awgn16())
    if name == "cc2_16qam":
        return ModelSpec(name, 16, 1, DenseTxSpec((16,)), DenseRxSpec((64, 32)), _awgn16())
    if name == "cq1_rayleigh":
        return ModelSpec(name, 4, 2, LookupTxSpec(),
                         QuantumRxSpec(_cq1_rayleigh_circuit()), _rayleigh4())
    if name == "cc_rayleigh":
        return ModelSpec(name, 4, 2, LookupTxSpec(), DenseRxSpec((14, 4)), _rayleigh4())
    raise ConfigurationError(f"unknown zoo model {name!r}")


ZOO_NAMES = (
    "cc1", "cc2", "cc3",
    "qc1", "qc2",
    "cq1", "cq2",
    "qq1",
    "qc1_16qam", "cc1_16qam", "cc2_16qam",
    "cq1_rayleigh", "cc_rayleigh",
)


def get(name: str) -> ModelSpec:
    """Fetch a built-in ModelSpec by name."""
    if name not in ZOO_NAMES:
        raise ConfigurationError(
            f"unknown zoo model {name!r}; available: {', '.join(ZOO_NAMES)}"
        )
    return _build(name)


def names() -> tuple[str, ...]:
    return ZOO_NAMES
