"""Declarative circuit specs and their compilation into executable gate tapes.

A circuit is encoding + core layers + measurement head. Compilation resolves
trainable parameters and the (symbol or feature) input into concrete gate
angles, recording for every parameterized gate how its angle depends on the
flat parameter vector and on the input features. Those linear dependency
records are what the gradient module consumes.

Tapes are batched: every angle / bit / coefficient is an array over the
batch axis, and states are simulated as (B, 2**k) blocks.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import ConfigurationError, DomainError
from .qstate import (
    GateOp,
    PauliWord,
    _apply_1q,
    _apply_cnot,
    _apply_pauli_word,
    _apply_x,
    _apply_zz,
    _bitflip_mats,
    _marginal_probs,
    _rot_mats,
    pauli_word,
)

ENCODING_KINDS = (
    "basis",
    "disc_angle",
    "disc_angle_z",
    "weighted_angle",
    "weighted_angle_z",
    "feature_angle",
    "feature_angle_parallel",
    "qaoa",
)

# encodings that consume an integer symbol; the rest consume a feature vector
SYMBOL_KINDS = ("basis", "disc_angle", "disc_angle_z", "weighted_angle", "weighted_angle_z")


# ---------------------------------------------------------------------------
# spec types


@dataclass(frozen=True)
class EncodingSpec:
    """How the classical input enters the register.

    alpha/beta are the rotation axes of the first/second qubit of a pair
    (X or Y). qaoa_layers counts the embedding repetitions of the qaoa
    kind. weight_sharing controls whether a re-uploaded weighted encoding
    reuses one weight vector ("shared") or owns a fresh vector per upload
    ("per_layer").
    """

    kind: str
    alpha: str = "Y"
    beta: str = "Y"
    qaoa_layers: int = 1
    weight_sharing: str = "shared"


@dataclass(frozen=True)
class CoreLayerSpec:
    """Trainable rotation block + CNOT entanglers, repeated ``layers`` times."""

    rotation_kind: str = "general_rot"  # general_rot | ry_only
    entanglers: tuple[tuple[int, int], ...] = ()
    layers: int = 1
    reupload: bool = False


@dataclass(frozen=True)
class MeasurementSpec:
    """Output head: Pauli expectations or Born probabilities of a qubit subset.

    measurement_weights adds one trainable RY per register qubit as a final
    layer before readout.
    """

    head: str  # expectations | probabilities
    observables: tuple[PauliWord, ...] = ()
    subset: tuple[int, ...] = ()
    measurement_weights: bool = False


@dataclass(frozen=True)
class CircuitSpec:
    num_qubits: int
    encoding: EncodingSpec
    core: CoreLayerSpec
    measurement: MeasurementSpec
    num_symbols: int
    preprocess: str = "none"  # none | arctan


@dataclass(frozen=True)
class ParamLayout:
    """Flat-vector layout: [encoding | core | measurement] role blocks."""

    encoding: slice
    core: slice
    measurement: slice
    total: int
    uploads: int
    enc_per_upload: int


# ---------------------------------------------------------------------------
# validation and bookkeeping


def takes_symbol(spec: CircuitSpec) -> bool:
    return spec.encoding.kind in SYMBOL_KINDS


def num_features(spec: CircuitSpec) -> int:
    """Length of the real input vector (0 for symbol-encoded circuits)."""
    kind = spec.encoding.kind
    if kind == "feature_angle":
        return spec.num_qubits
    if kind in ("feature_angle_parallel", "qaoa"):
        return 2
    return 0


def _enc_weights_per_upload(enc: EncodingSpec, k: int) -> int:
    return {
        "basis": 0,
        "disc_angle": 0,
        "disc_angle_z": 0,
        "weighted_angle": 2,
        "weighted_angle_z": 4,
        "feature_angle": k,
        "feature_angle_parallel": 4,
        "qaoa": 3 * enc.qaoa_layers,
    }[enc.kind]


def validate_circuit(spec: CircuitSpec) -> None:
    k = spec.num_qubits
    enc, core, meas = spec.encoding, spec.core, spec.measurement
    if enc.kind not in ENCODING_KINDS:
        raise ConfigurationError(f"unknown encoding kind {enc.kind!r}")
    if enc.alpha not in ("X", "Y") or enc.beta not in ("X", "Y"):
        raise ConfigurationError("encoding axes must be X or Y")
    if enc.weight_sharing not in ("shared", "per_layer"):
        raise ConfigurationError(f"unknown weight_sharing {enc.weight_sharing!r}")
    M = spec.num_symbols
    if M < 2 or (M & (M - 1)) != 0:
        raise ConfigurationError(f"symbol count must be a power of two >= 2, got {M}")
    if enc.kind == "basis" and (1 << k) < M:
        raise ConfigurationError(f"basis encoding of {M} symbols needs >= log2(M) qubits")
    if enc.kind in ("disc_angle", "disc_angle_z", "weighted_angle", "weighted_angle_z", "qaoa") and k < 2:
        raise ConfigurationError(f"{enc.kind} encoding needs at least 2 qubits")
    if enc.kind == "feature_angle_parallel" and k < 4:
        raise ConfigurationError("parallel feature encoding needs at least 4 qubits")
    if enc.kind == "qaoa" and enc.qaoa_layers < 1:
        raise ConfigurationError("qaoa encoding needs at least one embedding layer")
    if core.rotation_kind not in ("general_rot", "ry_only"):
        raise ConfigurationError(f"unknown rotation kind {core.rotation_kind!r}")
    if core.layers < 1:
        raise ConfigurationError("core layer count must be >= 1")
    for pair in core.entanglers:
        if len(pair) != 2 or pair[0] == pair[1]:
            raise ConfigurationError(f"bad entangler pair {pair}")
        for q in pair:
            if not 0 <= q < k:
                raise ConfigurationError(f"entangler qubit {q} out of range")
    if meas.head == "expectations":
        if not meas.observables:
            raise ConfigurationError("expectations head needs at least one observable")
        for obs in meas.observables:
            for q, _ in obs.factors:
                if not 0 <= q < k:
                    raise ConfigurationError(f"observable qubit {q} out of range")
    elif meas.head == "probabilities":
        subset = meas.subset
        if not subset or len(set(subset)) != len(subset):
            raise ConfigurationError("probabilities head needs a non-empty distinct subset")
        for q in subset:
            if not 0 <= q < k:
                raise ConfigurationError(f"subset qubit {q} out of range")
        if (1 << len(subset)) < M:
            raise ConfigurationError(
                f"subset of {len(subset)} qubits yields fewer outcomes than {M} symbols"
            )
    else:
        raise ConfigurationError(f"unknown measurement head {meas.head!r}")
    if spec.preprocess not in ("none", "arctan"):
        raise ConfigurationError(f"unknown preprocess {spec.preprocess!r}")


def param_layout(spec: CircuitSpec) -> ParamLayout:
    validate_circuit(spec)
    k = spec.num_qubits
    uploads = spec.core.layers if spec.core.reupload else 1
    per_upload = _enc_weights_per_upload(spec.encoding, k)
    if spec.encoding.weight_sharing == "per_layer":
        n_enc = per_upload * uploads
    else:
        n_enc = per_upload
    per_qubit = 3 if spec.core.rotation_kind == "general_rot" else 1
    n_core = spec.core.layers * k * per_qubit
    n_meas = k if spec.measurement.measurement_weights else 0
    return ParamLayout(
        encoding=slice(0, n_enc),
        core=slice(n_enc, n_enc + n_core),
        measurement=slice(n_enc + n_core, n_enc + n_core + n_meas),
        total=n_enc + n_core + n_meas,
        uploads=uploads,
        enc_per_upload=per_upload,
    )


def param_count(spec: CircuitSpec) -> int:
    return param_layout(spec).total


def init_circuit_params(spec: CircuitSpec, rng: np.random.Generator) -> np.ndarray:
    """Random initial parameters.

    Plain rotation angles (core, measurement, qaoa field/coupling weights)
    draw uniformly on [0, 2*pi). Encoding weights are frequency multipliers
    rather than angles, so they draw from a range that keeps the initial
    input-to-angle map within one period: [0, 2*pi/M) for symbol-weighted
    encodings (angle = w*s, s up to M) and [0, 1) for feature encodings.
    Full-period encoding inits alias the input map and reliably trap
    training on the larger alphabets.
    """
    layout = param_layout(spec)
    params = rng.uniform(0.0, 2.0 * np.pi, size=layout.total)
    kind = spec.encoding.kind
    if kind in ("weighted_angle", "weighted_angle_z"):
        params[layout.encoding] *= 1.0 / spec.num_symbols
    elif kind in ("feature_angle", "feature_angle_parallel"):
        params[layout.encoding] *= 1.0 / (2.0 * np.pi)
    return params


# ---------------------------------------------------------------------------
# tape representation


@dataclass
class TapedGate:
    """One concrete gate with per-batch angle and linear dependency records.

    pdeps/xdeps map this gate's angle to flat parameter indices / input
    feature indices: d(angle)/d(param j) and d(angle)/d(feature i), each a
    per-batch coefficient array.
    """

    kind: str  # rx | ry | rz | zz | x | cnot | bx
    qubits: tuple[int, ...]
    angle: np.ndarray | None = None
    bits: np.ndarray | None = None
    pdeps: tuple[tuple[int, np.ndarray], ...] = ()
    xdeps: tuple[tuple[int, np.ndarray], ...] = ()


@dataclass
class Tape:
    num_qubits: int
    batch: int
    gates: list[TapedGate]
    head: MeasurementSpec
    num_params: int
    num_features: int
    outcome_index: np.ndarray | None = None  # prob head: full-basis -> outcome


def _subset_outcome_index(k: int, subset: tuple[int, ...]) -> np.ndarray:
    idx = np.arange(1 << k)
    out = np.zeros(1 << k, dtype=np.int64)
    m = len(subset)
    for pos, q in enumerate(subset):
        out |= ((idx >> (k - 1 - q)) & 1) << (m - 1 - pos)
    return out


def _const(value: float, B: int) -> np.ndarray:
    return np.full(B, float(value))


class _Emitter:
    """Collects taped gates for one compiled circuit."""

    def __init__(self, B: int):
        self.B = B
        self.gates: list[TapedGate] = []

    def rot(self, axis: str, q: int, angle, pdeps=(), xdeps=()):
        kind = "r" + axis.lower()
        angle = np.asarray(angle, dtype=float)
        if angle.ndim == 0:
            angle = np.full(self.B, float(angle))
        self.gates.append(TapedGate(kind, (q,), angle, None, tuple(pdeps), tuple(xdeps)))

    def zz(self, q0: int, q1: int, angle, pdeps=()):
        angle = np.asarray(angle, dtype=float)
        if angle.ndim == 0:
            angle = np.full(self.B, float(angle))
        self.gates.append(TapedGate("zz", (q0, q1), angle, None, tuple(pdeps)))

    def bx(self, q: int, bits: np.ndarray):
        if np.any(bits):
            self.gates.append(TapedGate("bx", (q,), None, np.asarray(bits, dtype=np.int64)))

    def cnot(self, ctrl: int, tgt: int):
        self.gates.append(TapedGate("cnot", (ctrl, tgt)))


def _emit_encoding(em: _Emitter, spec: CircuitSpec, layout: ParamLayout, params: np.ndarray,
                   upload: int, sym: np.ndarray | None, feat: np.ndarray | None,
                   dfeat: np.ndarray | None) -> None:
    enc = spec.encoding
    k = spec.num_qubits
    B = em.B
    base = layout.encoding.start
    if enc.weight_sharing == "per_layer":
        base += upload * layout.enc_per_upload

    if enc.kind == "basis":
        for i in range(int(np.log2(spec.num_symbols))):
            bits = ((sym - 1) >> (int(np.log2(spec.num_symbols)) - 1 - i)) & 1
            em.bx(i, bits)
        return

    if enc.kind in ("disc_angle", "disc_angle_z"):
        a = np.pi * sym.astype(float) / spec.num_symbols
        em.rot(enc.alpha, 0, a)
        if enc.kind == "disc_angle_z":
            em.rot("Z", 0, a)
        em.rot(enc.beta, 1, a)
        if enc.kind == "disc_angle_z":
            em.rot("Z", 1, a)
        return

    if enc.kind == "weighted_angle":
        s = sym.astype(float)
        em.rot(enc.alpha, 0, params[base + 0] * s, pdeps=[(base + 0, s)])
        em.rot(enc.beta, 1, params[base + 1] * s, pdeps=[(base + 1, s)])
        return

    if enc.kind == "weighted_angle_z":
        s = sym.astype(float)
        # per qubit: axis rotation first, then RZ (weights ordered w1..w4)
        em.rot(enc.alpha, 0, params[base + 1] * s, pdeps=[(base + 1, s)])
        em.rot("Z", 0, params[base + 0] * s, pdeps=[(base + 0, s)])
        em.rot(enc.beta, 1, params[base + 3] * s, pdeps=[(base + 3, s)])
        em.rot("Z", 1, params[base + 2] * s, pdeps=[(base + 2, s)])
        return

    if enc.kind == "feature_angle":
        for i in range(k):
            axis = enc.alpha if i % 2 == 0 else enc.beta
            w = params[base + i]
            em.rot(axis, i, w * feat[:, i],
                   pdeps=[(base + i, feat[:, i])],
                   xdeps=[(i, _const(w, B) * dfeat[:, i])])
        return

    if enc.kind == "feature_angle_parallel":
        plan = ((0, 0, enc.alpha), (1, 1, enc.beta), (2, 0, enc.alpha), (3, 1, enc.beta))
        for j, (q, fi, axis) in enumerate(plan):
            w = params[base + j]
            em.rot(axis, q, w * feat[:, fi],
                   pdeps=[(base + j, feat[:, fi])],
                   xdeps=[(fi, _const(w, B) * dfeat[:, fi])])
        return

    if enc.kind == "qaoa":
        def encode_features():
            for q in (0, 1):
                em.rot("X", q, feat[:, q], xdeps=[(q, dfeat[:, q])])

        for layer in range(enc.qaoa_layers):
            b = base + 3 * layer
            encode_features()
            em.zz(0, 1, _const(params[b], B), pdeps=[(b, _const(1.0, B))])
            em.rot("Y", 0, _const(params[b + 1], B), pdeps=[(b + 1, _const(1.0, B))])
            em.rot("Y", 1, _const(params[b + 2], B), pdeps=[(b + 2, _const(1.0, B))])
        encode_features()
        return

    raise ConfigurationError(f"unknown encoding kind {enc.kind!r}")


def _emit_core_layer(em: _Emitter, spec: CircuitSpec, layout: ParamLayout,
                     params: np.ndarray, layer: int) -> None:
    core = spec.core
    k = spec.num_qubits
    B = em.B
    base = layout.core.start
    if core.rotation_kind == "general_rot":
        for i in range(k):
            idx = base + (layer * k + i) * 3
            # ZYZ general rotation: RZ(phi), RY(theta), RZ(omega)
            for c, axis in enumerate(("Z", "Y", "Z")):
                em.rot(axis, i, _const(params[idx + c], B),
                       pdeps=[(idx + c, _const(1.0, B))])
    else:
        for i in range(k):
            idx = base + layer * k + i
            em.rot("Y", i, _const(params[idx], B), pdeps=[(idx, _const(1.0, B))])
    for ctrl, tgt in core.entanglers:
        em.cnot(ctrl, tgt)


def compile_tape(spec: CircuitSpec, params: np.ndarray, x) -> Tape:
    """Resolve a circuit spec + parameters + input batch into a gate tape.

    x is an int array (B,) of symbols in [1..M] for symbol encodings, or a
    float array (B, F) of features otherwise. Single inputs are promoted to
    a batch of one.
    """
    layout = param_layout(spec)
    params = np.asarray(params, dtype=float)
    if params.shape != (layout.total,):
        raise ConfigurationError(
            f"expected {layout.total} parameters, got shape {params.shape}"
        )

    sym = feat = dfeat = None
    if takes_symbol(spec):
        sym = np.atleast_1d(np.asarray(x))
        if not np.issubdtype(sym.dtype, np.integer):
            raise DomainError("symbol encodings take integer input")
        if np.any(sym < 1) or np.any(sym > spec.num_symbols):
            raise DomainError(f"symbols must lie in [1, {spec.num_symbols}]")
        B = sym.shape[0]
    else:
        feat = np.asarray(x, dtype=float)
        if feat.ndim == 1:
            feat = feat[None, :]
        F = num_features(spec)
        if feat.shape[1] != F:
            raise DomainError(f"expected {F} input features, got {feat.shape[1]}")
        B = feat.shape[0]
        if spec.preprocess == "arctan":
            dfeat = 1.0 / (1.0 + feat**2)  # chain factor back to the raw input
            feat = np.arctan(feat)
        else:
            dfeat = np.ones_like(feat)

    em = _Emitter(B)
    if spec.core.reupload:
        for layer in range(spec.core.layers):
            _emit_encoding(em, spec, layout, params, layer, sym, feat, dfeat)
            _emit_core_layer(em, spec, layout, params, layer)
    else:
        _emit_encoding(em, spec, layout, params, 0, sym, feat, dfeat)
        for layer in range(spec.core.layers):
            _emit_core_layer(em, spec, layout, params, layer)
    if spec.measurement.measurement_weights:
        mbase = layout.measurement.start
        for i in range(spec.num_qubits):
            em.rot("Y", i, _const(params[mbase + i], B),
                   pdeps=[(mbase + i, _const(1.0, B))])

    outcome_index = None
    if spec.measurement.head == "probabilities":
        outcome_index = _subset_outcome_index(spec.num_qubits, tuple(spec.measurement.subset))
    return Tape(
        num_qubits=spec.num_qubits,
        batch=B,
        gates=em.gates,
        head=spec.measurement,
        num_params=layout.total,
        num_features=num_features(spec),
        outcome_index=outcome_index,
    )


# ---------------------------------------------------------------------------
# tape execution


def _apply_taped(amps: np.ndarray, k: int, g: TapedGate, invert: bool = False) -> np.ndarray:
    if g.kind == "cnot":
        return _apply_cnot(amps, k, *g.qubits)
    if g.kind == "x":
        return _apply_x(amps, k, g.qubits[0])
    if g.kind == "bx":
        return _apply_1q(amps, k, g.qubits[0], _bitflip_mats(g.bits))
    angle = -g.angle if invert else g.angle
    if g.kind == "zz":
        return _apply_zz(amps, k, g.qubits[0], g.qubits[1], angle)
    return _apply_1q(amps, k, g.qubits[0], _rot_mats(g.kind[1].upper(), angle))


def run_tape(tape: Tape) -> np.ndarray:
    """Execute the tape from |0...0>, returning head outputs shaped (B, O)."""
    amps = _zero_amps(tape)
    for g in tape.gates:
        amps = _apply_taped(amps, tape.num_qubits, g)
    return tape_head_outputs(tape, amps)


def _zero_amps(tape: Tape) -> np.ndarray:
    amps = np.zeros((tape.batch, 1 << tape.num_qubits), dtype=complex)
    amps[:, 0] = 1.0
    return amps


def run_tape_amps(tape: Tape) -> np.ndarray:
    """Final statevectors (B, 2**k) without applying the head."""
    amps = _zero_amps(tape)
    for g in tape.gates:
        amps = _apply_taped(amps, tape.num_qubits, g)
    return amps


def tape_head_outputs(tape: Tape, amps: np.ndarray) -> np.ndarray:
    k = tape.num_qubits
    if tape.head.head == "expectations":
        cols = []
        for obs in tape.head.observables:
            acted = _apply_pauli_word(amps, k, obs.factors)
            cols.append(np.sum(np.conj(amps) * acted, axis=1).real)
        return np.stack(cols, axis=1)
    return _marginal_probs(amps, k, tuple(tape.head.subset))


def num_outputs(spec: CircuitSpec) -> int:
    if spec.measurement.head == "expectations":
        return len(spec.measurement.observables)
    return 1 << len(spec.measurement.subset)


def run_circuit(spec: CircuitSpec, params: np.ndarray, x) -> np.ndarray:
    """Single-input circuit evaluation: returns the head output vector."""
    tape = compile_tape(spec, params, x)
    out = run_tape(tape)
    if tape.batch != 1:
        return out
    return out[0]


# ---------------------------------------------------------------------------
# standalone gate-sequence builders (single input, plain GateOps)


def _tape_to_gateops(gates: list[TapedGate]) -> list[GateOp]:
    out = []
    for g in gates:
        if g.kind == "cnot":
            out.append(GateOp("cnot", g.qubits))
        elif g.kind == "x":
            out.append(GateOp("x", g.qubits))
        elif g.kind == "bx":
            if int(g.bits[0]):
                out.append(GateOp("x", g.qubits))
        else:
            out.append(GateOp(g.kind, g.qubits, (float(g.angle[0]),)))
    return out


def encode_basis(s: int, M: int) -> list[GateOp]:
    """X on qubit i wherever bit i of (s-1) is set (qubit 0 = most significant)."""
    if M < 2 or (M & (M - 1)) != 0:
        raise ConfigurationError(f"symbol count must be a power of two, got {M}")
    if not 1 <= s <= M:
        raise DomainError(f"symbol {s} outside [1, {M}]")
    k = int(np.log2(M))
    gates = []
    for i in range(k):
        if ((s - 1) >> (k - 1 - i)) & 1:
            gates.append(GateOp("x", (i,)))
    return gates


def encode_disc_angle(s: int, M: int, weighted: bool = False, with_z: bool = False,
                      w=None, alpha: str = "Y", beta: str = "Y") -> list[GateOp]:
    """Two-qubit discretized angle encoding of a symbol, optionally weighted."""
    if not 1 <= s <= M:
        raise DomainError(f"symbol {s} outside [1, {M}]")
    if weighted:
        need = 4 if with_z else 2
        if w is None or len(w) != need:
            raise ConfigurationError(f"weighted encoding needs {need} weights")
        kind = "weighted_angle_z" if with_z else "weighted_angle"
    else:
        if w is not None:
            raise ConfigurationError("weights given but weighted flag not set")
        kind = "disc_angle_z" if with_z else "disc_angle"
    enc = EncodingSpec(kind, alpha=alpha, beta=beta)
    spec = _encoding_only_spec(enc, 2, M)
    params = np.asarray(w, dtype=float) if weighted else np.zeros(0)
    params = np.concatenate([params, np.zeros(2)])  # dummy ry core, stripped below
    tape = compile_tape(spec, params, np.array([s]))
    return _tape_to_gateops([g for g in tape.gates if not g.pdeps or _is_enc_gate(g, spec)])


def _encoding_only_spec(enc: EncodingSpec, k: int, M: int) -> CircuitSpec:
    # minimal valid spec whose core contributes identity rotations
    return CircuitSpec(
        num_qubits=k,
        encoding=enc,
        core=CoreLayerSpec(rotation_kind="ry_only", entanglers=(), layers=1),
        measurement=MeasurementSpec("expectations", observables=(pauli_word({0: "Z"}),)),
        num_symbols=M,
    )


def _is_enc_gate(g: TapedGate, spec: CircuitSpec) -> bool:
    layout = param_layout(spec)
    return all(layout.encoding.start <= i < layout.encoding.stop for i, _ in g.pdeps)


def encode_features(y, enc: EncodingSpec, w, preprocess: str = "none") -> list[GateOp]:
    """Weighted per-qubit angle encoding of a real feature vector."""
    y = np.asarray(y, dtype=float)
    if enc.kind == "feature_angle_parallel":
        k, M = 4, 16
    else:
        k, M = y.size, 1 << y.size
    spec = replace(_encoding_only_spec(enc, k, M), preprocess=preprocess)
    w = np.asarray(w, dtype=float)
    expected = _enc_weights_per_upload(enc, k)
    if w.size != expected:
        raise ConfigurationError(f"expected {expected} encoding weights, got {w.size}")
    params = np.concatenate([w, np.zeros(k)])
    tape = compile_tape(spec, params, y[None, :])
    return _tape_to_gateops(
        [g for g in tape.gates if (g.pdeps or g.xdeps) and _is_enc_gate(g, spec)])


def encode_qaoa(y, weights) -> list[GateOp]:
    """QAOA-style embedding: RX features / ZZ + RY fields per layer, then re-encode."""
    weights = np.asarray(weights, dtype=float).reshape(-1)
    if weights.size % 3 != 0 or weights.size == 0:
        raise ConfigurationError("qaoa weights come in per-layer triples (zz, ry, ry)")
    enc = EncodingSpec("qaoa", qaoa_layers=weights.size // 3)
    spec = _encoding_only_spec(enc, 2, 4)
    params = np.concatenate([weights, np.zeros(2)])
    tape = compile_tape(spec, params, np.asarray(y, dtype=float)[None, :])
    enc_slice = param_layout(spec).encoding
    keep = []
    for g in tape.gates:
        if g.xdeps or (g.pdeps and all(enc_slice.start <= i < enc_slice.stop for i, _ in g.pdeps)):
            keep.append(g)
    return _tape_to_gateops(keep)


def core_layer(core: CoreLayerSpec, W, num_qubits: int) -> list[GateOp]:
    """Gate sequence of the full core stack (rotations then CNOTs, repeated)."""
    W = np.asarray(W, dtype=float)
    per_qubit = 3 if core.rotation_kind == "general_rot" else 1
    expected = (core.layers, num_qubits, per_qubit) if per_qubit == 3 else (core.layers, num_qubits)
    if W.shape != expected:
        raise ConfigurationError(f"core weights must have shape {expected}, got {W.shape}")
    gates: list[GateOp] = []
    for layer in range(core.layers):
        for i in range(num_qubits):
            if per_qubit == 3:
                phi, theta, omega = W[layer, i]
                gates += [GateOp("rz", (i,), (float(phi),)),
                          GateOp("ry", (i,), (float(theta),)),
                          GateOp("rz", (i,), (float(omega),))]
            else:
                gates.append(GateOp("ry", (i,), (float(W[layer, i]),)))
        for ctrl, tgt in core.entanglers:
            gates.append(GateOp("cnot", (ctrl, tgt)))
    return gates


def default_tx_observables(num_qubits: int) -> tuple[PauliWord, ...]:
    """Default expectation readout for a transmitter circuit.

    Two qubits: one Z per qubit. Four qubits: Z (x) X on the (0,1) and (2,3)
    pairs. Other sizes: single-qubit Z on the first two qubits.
    """
    if num_qubits == 4:
        return (pauli_word({0: "Z", 1: "X"}), pauli_word({2: "Z", 3: "X"}))
    return (pauli_word({0: "Z"}), pauli_word({1: "Z"}))


# ---------------------------------------------------------------------------
# JSON serialization


def _pauli_to_json(word: PauliWord) -> dict:
    return {str(q): p for q, p in word.factors}


def _pauli_from_json(d: dict) -> PauliWord:
    return pauli_word({int(q): p for q, p in d.items()})


def circuit_to_dict(spec: CircuitSpec) -> dict:
    return {
        "num_qubits": spec.num_qubits,
        "num_symbols": spec.num_symbols,
        "preprocess": spec.preprocess,
        "encoding": {
            "kind": spec.encoding.kind,
            "alpha": spec.encoding.alpha,
            "beta": spec.encoding.beta,
            "qaoa_layers": spec.encoding.qaoa_layers,
            "weight_sharing": spec.encoding.weight_sharing,
        },
        "core": {
            "rotation_kind": spec.core.rotation_kind,
            "entanglers": [list(p) for p in spec.core.entanglers],
            "layers": spec.core.layers,
            "reupload": spec.core.reupload,
        },
        "measurement": {
            "head": spec.measurement.head,
            "observables": [_pauli_to_json(o) for o in spec.measurement.observables],
            "subset": list(spec.measurement.subset),
            "measurement_weights": spec.measurement.measurement_weights,
        },
    }


def circuit_from_dict(d: dict) -> CircuitSpec:
    enc = d["encoding"]
    core = d["core"]
    meas = d["measurement"]
    spec = CircuitSpec(
        num_qubits=int(d["num_qubits"]),
        encoding=EncodingSpec(
            kind=enc["kind"],
            alpha=enc.get("alpha", "Y"),
            beta=enc.get("beta", "Y"),
            qaoa_layers=int(enc.get("qaoa_layers", 1)),
            weight_sharing=enc.get("weight_sharing", "shared"),
        ),
        core=CoreLayerSpec(
            rotation_kind=core.get("rotation_kind", "general_rot"),
            entanglers=tuple(tuple(int(q) for q in p) for p in core.get("entanglers", [])),
            layers=int(core.get("layers", 1)),
            reupload=bool(core.get("reupload", False)),
        ),
        measurement=MeasurementSpec(
            head=meas["head"],
            observables=tuple(_pauli_from_json(o) for o in meas.get("observables", [])),
            subset=tuple(int(q) for q in meas.get("subset", [])),
            measurement_weights=bool(meas.get("measurement_weights", False)),
        ),
        num_symbols=int(d["num_symbols"]),
        preprocess=d.get("preprocess", "none"),
    )
    validate_circuit(spec)
    return spec


def circuit_to_json(spec: CircuitSpec) -> str:
    return json.dumps(circuit_to_dict(spec), indent=2, sort_keys=True)


def circuit_from_json(text: str) -> CircuitSpec:
    return circuit_from_dict(json.loads(text))
