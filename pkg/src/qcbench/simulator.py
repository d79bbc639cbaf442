"""Statevector simulation with Monte-Carlo Pauli-trajectory noise.

All shots of a circuit are evolved as a batch of statevectors, with per-shot
noise realized through masked Pauli insertions. After each gate the gate's
targets are fully depolarized with probability p1/p2 (a uniformly random
Pauli, identity included). Idle qubits pick up a coherent Rz(idle_drift)
every non-barrier layer plus a stochastic Z flip with probability
idle_dephase; an X gate conjugates the accumulated drift to its inverse,
which is what makes X-X decoupling refocus it.

Sampling is deterministic for a fixed seed: shots are split into fixed-size
blocks, each driven by a child seed, so results are identical no matter how
blocks or circuits are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import circuits as cir
from .errors import DistributionError, SimulationError
from .noise import NoiseModel

MAX_WIDTH_DEFAULT = 14
SHOT_BLOCK = 1024
NORM_TOL = 1e-8


@dataclass
class ExecutionCounter:
    """Tallies circuits and shots actually executed by the engine."""

    circuits: int = 0
    shots: int = 0

    def add(self, circuits: int = 0, shots: int = 0) -> None:
        self.circuits += circuits
        self.shots += shots

    def as_dict(self) -> dict:
        return {"circuits": self.circuits, "shots": self.shots}


@dataclass(frozen=True)
class CountsDistribution:
    """Measured bitstring counts for a fixed-width register."""

    counts: Mapping[str, int]
    shots: int
    width: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "counts", dict(self.counts))
        total = 0
        for bits, c in self.counts.items():
            if len(bits) != self.width or set(bits) - {"0", "1"}:
                raise DistributionError(f"bad bitstring {bits!r} for width {self.width}")
            if c < 0:
                raise DistributionError("counts must be non-negative")
            total += c
        if total != self.shots:
            raise DistributionError(f"counts sum to {total}, expected {self.shots} shots")

    @classmethod
    def from_indices(cls, indices: np.ndarray, width: int) -> "CountsDistribution":
        values, counts = np.unique(indices, return_counts=True)
        mapping = {format(int(v), f"0{width}b"): int(c) for v, c in zip(values, counts)}
        return cls(mapping, int(counts.sum()), width)

    def probabilities(self) -> dict[str, float]:
        return {b: c / self.shots for b, c in self.counts.items()}

    def vector(self) -> np.ndarray:
        """Dense probability vector over all 2^width bitstrings."""
        out = np.zeros(2**self.width)
        for bits, c in self.counts.items():
            out[int(bits, 2)] = c / self.shots
        return out


def as_generator(rng: np.random.Generator | int | None) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def spawn_seeds(seed: int, n: int) -> list[np.random.SeedSequence]:
    """Deterministic child seed sequences for n independent work items."""
    return np.random.SeedSequence(seed).spawn(n)


# ---------------------------------------------------------------------------
# Batched statevector kernels. States have shape (n_shots, 2**m); qubit 0 is
# the most significant bit of the basis index.


def _apply_1q(states: np.ndarray, m: int, q: int, u: np.ndarray) -> None:
    n = states.shape[0]
    v = states.reshape(n, 2**q, 2, -1)
    v0 = v[:, :, 0, :].copy()
    v1 = v[:, :, 1, :]
    v[:, :, 0, :] = u[0, 0] * v0 + u[0, 1] * v1
    v[:, :, 1, :] = u[1, 0] * v0 + u[1, 1] * v1


def _apply_2q(states: np.ndarray, m: int, qa: int, qb: int, u4: np.ndarray) -> np.ndarray:
    """Apply a 4x4 unitary with qa the high bit of the gate basis. Returns new array."""
    n = states.shape[0]
    v = states.reshape((n,) + (2,) * m)
    t = np.moveaxis(v, (1 + qa, 1 + qb), (m - 1, m))
    shape = t.shape
    flat = np.ascontiguousarray(t).reshape(-1, 4)
    flat = flat @ u4.T
    t = flat.reshape(shape)
    v = np.moveaxis(t, (m - 1, m), (1 + qa, 1 + qb))
    return np.ascontiguousarray(v).reshape(n, 2**m)


def _apply_pauli_rows(states: np.ndarray, m: int, q: int, pauli: int, rows: np.ndarray) -> None:
    """Apply X (1), Y (2) or Z (3) on qubit q to the given shot rows."""
    if rows.size == 0:
        return
    sub = states[rows].reshape(rows.size, 2**q, 2, -1)
    if pauli == 1:  # X
        sub = sub[:, :, ::-1, :]
    elif pauli == 2:  # Y
        s0 = sub[:, :, 0, :].copy()
        sub[:, :, 0, :] = -1j * sub[:, :, 1, :]
        sub[:, :, 1, :] = 1j * s0
    elif pauli == 3:  # Z
        sub[:, :, 1, :] *= -1.0
    else:
        raise ValueError(f"bad pauli index {pauli}")
    states[rows] = sub.reshape(rows.size, -1)


def _apply_rz_all(states: np.ndarray, m: int, q: int, angle: float) -> None:
    """Multiply the |1> component of qubit q by e^{i angle} on every shot."""
    v = states.reshape(states.shape[0], 2**q, 2, -1)
    v[:, :, 1, :] *= np.exp(1j * angle)


def _apply_gate(states: np.ndarray, m: int, gate: cir.Gate) -> np.ndarray:
    if gate.kind == cir.MEASURE:
        return states  # terminal marker; measurement is handled at the end
    if len(gate.targets) == 1:
        _apply_1q(states, m, gate.targets[0], gate.unitary())
        return states
    qa, qb = gate.targets
    return _apply_2q(states, m, qa, qb, gate.unitary())


def _depolarize_targets(
    states: np.ndarray,
    m: int,
    targets: tuple[int, ...],
    p: float,
    gen: np.random.Generator,
) -> None:
    """Full depolarization of the targets with probability p, per shot."""
    n = states.shape[0]
    hit = np.flatnonzero(gen.random(n) < p)
    if hit.size == 0:
        return
    for q in targets:
        choice = gen.integers(0, 4, size=hit.size)
        for pauli in (1, 2, 3):
            _apply_pauli_rows(states, m, q, pauli, hit[choice == pauli])


def _check_simulable(circuit: cir.Circuit, max_width: int) -> None:
    if circuit.width > max_width:
        raise SimulationError(
            f"width {circuit.width} exceeds the exact-simulation cap of {max_width}"
        )
    slots = circuit.param_slots
    if slots:
        raise SimulationError(f"circuit has unbound parameter slots: {', '.join(slots)}")


# ---------------------------------------------------------------------------
# Public entry points


def simulate_ideal(circuit: cir.Circuit, *, max_width: int = MAX_WIDTH_DEFAULT) -> np.ndarray:
    """Exact Born probabilities of the circuit applied to |0...0>."""
    _check_simulable(circuit, max_width)
    m = circuit.width
    states = np.zeros((1, 2**m), dtype=complex)
    states[0, 0] = 1.0
    for layer in circuit.layers:
        if layer.is_barrier:
            continue
        for gate in layer.gates:
            states = _apply_gate(states, m, gate)
    probs = np.abs(states[0]) ** 2
    total = probs.sum()
    if abs(total - 1.0) > NORM_TOL:
        raise SimulationError(f"probability leaked: sum = {total}")
    return probs / total


def sample_noisy(
    circuit: cir.Circuit,
    noise: NoiseModel,
    shots: int,
    rng: np.random.Generator | int | None,
    *,
    counter: ExecutionCounter | None = None,
    max_width: int = MAX_WIDTH_DEFAULT,
    idle_drift_signs: Sequence[int] | None = None,
    noise_free_tail: int = 0,
) -> CountsDistribution:
    """Sample measurement outcomes under Monte-Carlo trajectory noise.

    ``idle_drift_signs`` optionally flips the sign of the coherent idle drift
    per layer (one entry per layer), modeling inverse halves compiled with
    sign-reversed controls. The last ``noise_free_tail`` layers evolve without
    gate or idle noise (virtual basis rotations).
    """
    _check_simulable(circuit, max_width)
    if shots < 1:
        raise SimulationError("shots must be >= 1")
    if idle_drift_signs is not None and len(idle_drift_signs) != len(circuit.layers):
        raise SimulationError("idle_drift_signs must have one entry per layer")
    gen = as_generator(rng)
    if counter is not None:
        counter.add(circuits=1, shots=shots)
    m = circuit.width

    if noise.is_noiseless:
        probs = simulate_ideal(circuit, max_width=max_width)
        indices = gen.choice(2**m, size=shots, p=probs)
        return CountsDistribution.from_indices(indices, m)

    block_seeds = gen.integers(0, 2**63, size=-(-shots // SHOT_BLOCK))
    pieces = []
    remaining = shots
    for seed in block_seeds:
        n = min(SHOT_BLOCK, remaining)
        remaining -= n
        block_gen = np.random.default_rng(int(seed))
        pieces.append(
            _run_block(circuit, noise, n, block_gen, idle_drift_signs, noise_free_tail)
        )
    return CountsDistribution.from_indices(np.concatenate(pieces), m)


def _run_block(
    circuit: cir.Circuit,
    noise: NoiseModel,
    n: int,
    gen: np.random.Generator,
    idle_drift_signs: Sequence[int] | None,
    noise_free_tail: int,
) -> np.ndarray:
    m = circuit.width
    dim = 2**m
    states = np.zeros((n, dim), dtype=complex)
    states[:, 0] = 1.0
    noisy_until = len(circuit.layers) - noise_free_tail

    for li, layer in enumerate(circuit.layers):
        if layer.is_barrier:
            continue
        noisy = li < noisy_until
        busy = layer.targets()
        for gate in layer.gates:
            states = _apply_gate(states, m, gate)
            if gate.kind == cir.MEASURE or not noisy:
                continue
            p = noise.p1 if len(gate.targets) == 1 else noise.p2
            if p > 0.0:
                _depolarize_targets(states, m, gate.targets, p, gen)
        if not noisy:
            continue
        sign = 1 if idle_drift_signs is None else idle_drift_signs[li]
        for q in range(m):
            if q in busy:
                continue
            if noise.idle_drift != 0.0:
                _apply_rz_all(states, m, q, sign * noise.idle_drift)
            if noise.idle_dephase > 0.0:
                flips = np.flatnonzero(gen.random(n) < noise.idle_dephase)
                _apply_pauli_rows(states, m, q, 3, flips)

    probs = np.abs(states) ** 2
    norms = probs.sum(axis=1)
    if np.abs(norms - 1.0).max() > NORM_TOL:
        raise SimulationError("probability leaked during noisy evolution")
    probs /= norms[:, None]

    cum = probs.cumsum(axis=1)
    u = gen.random(n)
    indices = (cum > u[:, None]).argmax(axis=1)

    # Per-qubit readout confusion, independent across qubits.
    for q in range(m):
        conf = noise.confusion(q)
        if conf is None:
            continue
        bit = (indices >> (m - 1 - q)) & 1
        p_flip = np.where(bit == 0, conf[0, 1], conf[1, 0])
        flip = gen.random(n) < p_flip
        indices = indices ^ (flip.astype(indices.dtype) << (m - 1 - q))
    return indices


_BASIS_ROTATIONS = {
    "X": np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2),  # H
    "Y": np.array([[1, -1j], [1, 1j]], dtype=complex) / np.sqrt(2),  # H S†
}


def parse_pauli(observable: str, width: int) -> dict[int, str]:
    """Parse a Pauli string like 'ZIZ' into {qubit: letter}, skipping identities."""
    obs = observable.strip().upper()
    if not obs or len(obs) > width or set(obs) - set("IXYZ"):
        raise SimulationError(
            f"malformed observable {observable!r} for width {width}: "
            "expected a string over I/X/Y/Z no longer than the width"
        )
    return {q: ch for q, ch in enumerate(obs) if ch != "I"}


def eigenvalue_mask(support: Mapping[int, str], width: int) -> int:
    mask = 0
    for q in support:
        mask |= 1 << (width - 1 - q)
    return mask


def expectation(
    circuit: cir.Circuit,
    observable: str,
    noise: NoiseModel,
    shots: int,
    rng: np.random.Generator | int | None,
    *,
    counter: ExecutionCounter | None = None,
    max_width: int = MAX_WIDTH_DEFAULT,
) -> tuple[float, float]:
    """Estimate a Pauli-string expectation from sampled shots.

    Non-Z factors are handled by noiseless virtual basis rotations appended
    after the circuit. Returns (mean of the +-1 eigenvalues, standard error).
    """
    support = parse_pauli(observable, circuit.width)
    rot_gates = [
        cir.Gate(cir.U1Q, (q,), _BASIS_ROTATIONS[ch]) for q, ch in support.items() if ch != "Z"
    ]
    rotated = circuit
    tail = 0
    if rot_gates:
        rotated = cir.Circuit(circuit.width, circuit.layers + (cir.Layer(tuple(rot_gates)),))
        tail = 1

    dist = sample_noisy(
        rotated, noise, shots, rng, counter=counter, max_width=max_width, noise_free_tail=tail
    )

    mask = eigenvalue_mask(support, circuit.width)
    values = []
    weights = []
    for bits, c in dist.counts.items():
        parity = bin(int(bits, 2) & mask).count("1") & 1
        values.append(-1.0 if parity else 1.0)
        weights.append(c)
    arr = np.asarray(values)
    w = np.asarray(weights, dtype=float)
    mean = float(np.average(arr, weights=w))
    var = float(np.average((arr - mean) ** 2, weights=w))
    stderr = float(np.sqrt(var / shots))
    return mean, stderr
