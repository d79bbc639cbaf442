"""Layered gate-level circuit IR with random-circuit generators.

Circuits are immutable: a circuit is a tuple of layers, a layer is a tuple of
gates acting on pairwise-disjoint qubits. Matrix-valued gates are validated
to be unitary at construction. Qubit 0 is the most significant bit of a
measured bitstring, i.e. basis index ``i`` corresponds to ``format(i, '0mb')``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import CircuitError

UNITARITY_TOL = 1e-10

# Gate kinds
U1Q = "u1q"
SU4 = "su4"
CX = "cx"
X = "x"
MEASURE = "measure"
BARRIER = "barrier"
PARAM_U1Q = "param_u1q"

_ARITY = {U1Q: 1, X: 1, MEASURE: 1, PARAM_U1Q: 1, SU4: 2, CX: 2}
_MATRIX_DIM = {U1Q: 2, SU4: 4}

X_MATRIX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
# Basis order |control target>: 00, 01, 10, 11
CX_MATRIX = np.array(
    [
        [1, 0, 0, 0],
        [0, 1, 0, 0],
        [0, 0, 0, 1],
        [0, 0, 1, 0],
    ],
    dtype=complex,
)

X_MATRIX.setflags(write=False)
CX_MATRIX.setflags(write=False)


def _check_unitary(matrix: np.ndarray, dim: int) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (dim, dim):
        raise CircuitError(f"expected a {dim}x{dim} matrix, got shape {matrix.shape}")
    deviation = np.abs(matrix.conj().T @ matrix - np.eye(dim)).max()
    if deviation > UNITARITY_TOL:
        raise CircuitError(f"matrix is not unitary (max |U†U - I| = {deviation:.3e})")
    matrix = matrix.copy()
    matrix.setflags(write=False)
    return matrix


@dataclass(frozen=True, eq=False)
class Gate:
    """A single gate: kind, ordered targets, and an optional matrix or slot id."""

    kind: str
    targets: tuple[int, ...]
    matrix: np.ndarray | None = None
    slot: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in _ARITY and self.kind != BARRIER:
            raise CircuitError(f"unknown gate kind {self.kind!r}")
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.kind == BARRIER:
            if self.targets or self.matrix is not None or self.slot is not None:
                raise CircuitError("barrier takes no targets, matrix or slot")
            return
        if len(self.targets) != _ARITY[self.kind]:
            raise CircuitError(
                f"{self.kind} takes {_ARITY[self.kind]} target(s), got {len(self.targets)}"
            )
        if len(set(self.targets)) != len(self.targets):
            raise CircuitError("gate targets must be distinct")
        if self.kind in _MATRIX_DIM:
            if self.matrix is None:
                raise CircuitError(f"{self.kind} gate requires a matrix")
            object.__setattr__(self, "matrix", _check_unitary(self.matrix, _MATRIX_DIM[self.kind]))
        elif self.matrix is not None:
            raise CircuitError(f"{self.kind} gate does not take a matrix")
        if self.kind == PARAM_U1Q:
            if not self.slot:
                raise CircuitError("param_u1q gate requires a slot id")
        elif self.slot is not None:
            raise CircuitError(f"{self.kind} gate does not take a slot")

    def unitary(self) -> np.ndarray:
        """Concrete unitary for this gate; raises for barrier/measure/param slots."""
        if self.kind in (U1Q, SU4):
            return self.matrix  # type: ignore[return-value]
        if self.kind == X:
            return X_MATRIX
        if self.kind == CX:
            return CX_MATRIX
        raise CircuitError(f"{self.kind} gate has no unitary")

    def inverse(self) -> "Gate":
        if self.kind in (U1Q, SU4):
            return Gate(self.kind, self.targets, self.matrix.conj().T)  # type: ignore[union-attr]
        if self.kind in (X, CX, BARRIER):
            return self  # self-inverse / marker
        raise CircuitError(f"cannot invert a {self.kind} gate")


def barrier_gate() -> Gate:
    return Gate(BARRIER, ())


@dataclass(frozen=True, eq=False)
class Layer:
    """Gates acting in the same time step on pairwise-disjoint qubits."""

    gates: tuple[Gate, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        seen: set[int] = set()
        for gate in self.gates:
            if gate.kind == BARRIER and len(self.gates) != 1:
                raise CircuitError("a barrier must be the only gate in its layer")
            for t in gate.targets:
                if t in seen:
                    raise CircuitError(f"qubit {t} used twice in one layer")
                seen.add(t)

    @property
    def is_barrier(self) -> bool:
        return len(self.gates) == 1 and self.gates[0].kind == BARRIER

    def targets(self) -> frozenset[int]:
        return frozenset(t for g in self.gates for t in g.targets)


def barrier_layer() -> Layer:
    return Layer((barrier_gate(),))


@dataclass(frozen=True, eq=False)
class Circuit:
    """A width-m circuit: ordered layers over qubits 0..m-1."""

    width: int
    layers: tuple[Layer, ...] = ()

    def __post_init__(self) -> None:
        if self.width < 1:
            raise CircuitError("width must be >= 1")
        object.__setattr__(self, "layers", tuple(self.layers))
        for layer in self.layers:
            for gate in layer.gates:
                for t in gate.targets:
                    if not 0 <= t < self.width:
                        raise CircuitError(f"target {t} out of range for width {self.width}")

    def depth(self) -> int:
        """Number of non-barrier layers."""
        return sum(1 for layer in self.layers if not layer.is_barrier)

    @property
    def param_slots(self) -> tuple[str, ...]:
        """Unbound slot ids in first-appearance order."""
        slots: list[str] = []
        for layer in self.layers:
            for gate in layer.gates:
                if gate.kind == PARAM_U1Q and gate.slot not in slots:
                    slots.append(gate.slot)  # type: ignore[arg-type]
        return tuple(slots)

    def has_kind(self, kind: str) -> bool:
        return any(g.kind == kind for layer in self.layers for g in layer.gates)

    def gate_count(self, kind: str | None = None) -> int:
        if kind is None:
            return sum(len(layer.gates) for layer in self.layers)
        return sum(1 for layer in self.layers for g in layer.gates if g.kind == kind)


# ---------------------------------------------------------------------------
# Random samplers


def haar_su4(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed 4x4 unitary via QR of a complex Ginibre matrix."""
    return _haar_unitary(rng, 4)


def haar_su2(rng: np.random.Generator) -> np.ndarray:
    """Haar-random 2x2 unitary, normalized to unit determinant."""
    u = _haar_unitary(rng, 2)
    return u / np.sqrt(np.linalg.det(u))


def _haar_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(z)
    # Fix the phase ambiguity of QR so the distribution is exactly Haar.
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def random_permutation(m: int, rng: np.random.Generator) -> tuple[int, ...]:
    """A uniformly random bijection on 0..m-1."""
    perm = tuple(int(i) for i in rng.permutation(m))
    return perm


# ---------------------------------------------------------------------------
# Generators


def qv_model_circuit(m: int, rng: np.random.Generator) -> Circuit:
    """Square quantum-volume model circuit: m layers of floor(m/2) Haar SU(4) pairs.

    The per-layer qubit permutation is realized as index relabeling (the
    ideal all-to-all model circuit); routing to restricted connectivity is a
    compilation concern, not part of the definition.
    """
    if m < 2:
        raise CircuitError("quantum-volume circuits require width >= 2")
    layers = [qv_layer(m, rng) for _ in range(m)]
    return Circuit(m, tuple(layers))


def qv_layer(m: int, rng: np.random.Generator) -> Layer:
    perm = random_permutation(m, rng)
    gates = []
    for k in range(m // 2):
        pair = (perm[2 * k], perm[2 * k + 1])
        gates.append(Gate(SU4, pair, haar_su4(rng)))
    return Layer(tuple(gates))


def euler_u1q(theta: float, phi: float, lam: float) -> np.ndarray:
    """Generic single-qubit unitary from Euler angles.

    U(theta, phi, lam) = [[cos(t/2), -e^{i lam} sin(t/2)],
                          [e^{i phi} sin(t/2), e^{i(phi+lam)} cos(t/2)]]
    """
    c, s = math.cos(theta / 2.0), math.sin(theta / 2.0)
    return np.array(
        [
            [c, -np.exp(1j * lam) * s],
            [np.exp(1j * phi) * s, np.exp(1j * (phi + lam)) * c],
        ],
        dtype=complex,
    )


# ---------------------------------------------------------------------------
# Transformations


def inverse(circuit: Circuit) -> Circuit:
    """Layer-reversed circuit with each gate inverted.

    Matrix gates are replaced by their conjugate transpose; CX and X are
    self-inverse; barriers pass through. Measurement gates and unbound
    parameter slots cannot be inverted.
    """
    if circuit.has_kind(MEASURE):
        raise CircuitError("cannot invert a circuit containing measurements")
    if circuit.has_kind(PARAM_U1Q):
        raise CircuitError("cannot invert a circuit with unbound parameter slots")
    layers = tuple(
        Layer(tuple(g.inverse() for g in layer.gates)) for layer in reversed(circuit.layers)
    )
    return Circuit(circuit.width, layers)


def compose(a: Circuit, b: Circuit, barrier: bool = False) -> Circuit:
    """Concatenate two equal-width circuits, optionally separated by a barrier.

    The barrier marks a boundary that no later pass may simplify across.
    """
    if a.width != b.width:
        raise CircuitError(f"width mismatch: {a.width} != {b.width}")
    middle = (barrier_layer(),) if barrier else ()
    return Circuit(a.width, a.layers + middle + b.layers)


def bind_params(circuit: Circuit, values: Mapping[str, tuple[float, float, float]]) -> Circuit:
    """Replace every parameter slot with the concrete Euler-angle unitary."""
    missing = [s for s in circuit.param_slots if s not in values]
    if missing:
        raise CircuitError(f"missing values for slot(s): {', '.join(missing)}")
    layers = []
    for layer in circuit.layers:
        gates = []
        for gate in layer.gates:
            if gate.kind == PARAM_U1Q:
                theta, phi, lam = values[gate.slot]  # type: ignore[index]
                gates.append(Gate(U1Q, gate.targets, euler_u1q(theta, phi, lam)))
            else:
                gates.append(gate)
        layers.append(Layer(tuple(gates)))
    return Circuit(circuit.width, tuple(layers))


def gates_equal(a: Gate, b: Gate, tol: float = 1e-12) -> bool:
    """Structural equality with matrix comparison to an absolute tolerance."""
    if a.kind != b.kind or a.targets != b.targets or a.slot != b.slot:
        return False
    if (a.matrix is None) != (b.matrix is None):
        return False
    if a.matrix is not None:
        return bool(np.abs(a.matrix - b.matrix).max() <= tol)
    return True


def circuits_equal(a: Circuit, b: Circuit, tol: float = 1e-12) -> bool:
    if a.width != b.width or len(a.layers) != len(b.layers):
        return False
    for la, lb in zip(a.layers, b.layers):
        if len(la.gates) != len(lb.gates):
            return False
        if not all(gates_equal(ga, gb, tol) for ga, gb in zip(la.gates, lb.gates)):
            return False
    return True


# ---------------------------------------------------------------------------
# JSON serialization
#
# Format: {"width": m, "layers": [[{kind, targets, matrix?|slot?}, ...], ...]}
# with matrices as row-major [re, im] pairs. Floats are emitted with Python's
# shortest round-trip repr, so load(dump(c)) is bit-exact.


def _gate_to_obj(gate: Gate) -> dict:
    obj: dict = {"kind": gate.kind, "targets": list(gate.targets)}
    if gate.matrix is not None:
        obj["matrix"] = [[float(z.real), float(z.imag)] for z in gate.matrix.ravel()]
    if gate.slot is not None:
        obj["slot"] = gate.slot
    return obj


def _gate_from_obj(obj: dict) -> Gate:
    kind = obj["kind"]
    matrix = None
    if "matrix" in obj:
        pairs = obj["matrix"]
        dim = int(round(math.sqrt(len(pairs))))
        matrix = np.array([complex(re, im) for re, im in pairs]).reshape(dim, dim)
    return Gate(kind, tuple(obj["targets"]), matrix, obj.get("slot"))


def to_json(circuit: Circuit) -> str:
    doc = {
        "width": circuit.width,
        "layers": [[_gate_to_obj(g) for g in layer.gates] for layer in circuit.layers],
    }
    return json.dumps(doc)


def from_json(text: str) -> Circuit:
    doc = json.loads(text)
    layers = tuple(Layer(tuple(_gate_from_obj(o) for o in layer)) for layer in doc["layers"])
    return Circuit(int(doc["width"]), layers)
