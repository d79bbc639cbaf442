"""Noise models for the built-in simulator.

Depolarizing strengths follow the full-depolarization convention: with
probability ``p`` the targets of a gate are replaced by the maximally mixed
state, realized in trajectories as a uniformly random Pauli (identity
included). The resulting single-qubit channel contracts Bloch components by
exactly ``1 - p``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from typing import Mapping, Sequence

import numpy as np

from .errors import NoiseModelError

CONFUSION_ROW_TOL = 1e-12

DEFAULT_DURATIONS: Mapping[str, float] = {
    "u1q": 1.0,
    "x": 1.0,
    "param_u1q": 1.0,
    "su4": 3.0,
    "cx": 2.0,
    "measure": 5.0,
}


def _as_confusion(matrix) -> np.ndarray:
    m = np.asarray(matrix, dtype=float)
    if m.shape != (2, 2):
        raise NoiseModelError(f"confusion matrix must be 2x2, got {m.shape}")
    if (m < -CONFUSION_ROW_TOL).any() or (m > 1 + CONFUSION_ROW_TOL).any():
        raise NoiseModelError("confusion entries must lie in [0, 1]")
    if np.abs(m.sum(axis=1) - 1.0).max() > CONFUSION_ROW_TOL:
        raise NoiseModelError("confusion rows (true state) must sum to 1")
    m = m.copy()
    m.setflags(write=False)
    return m


def flip_confusion(p01: float, p10: float | None = None) -> np.ndarray:
    """Confusion matrix with P(report 1|true 0) = p01, P(report 0|true 1) = p10."""
    if p10 is None:
        p10 = p01
    return _as_confusion([[1 - p01, p01], [p10, 1 - p10]])


@dataclass(frozen=True)
class NoiseModel:
    """The simulated device: gate depolarizing, idle drift/dephasing, readout.

    Attributes:
        p1: depolarizing probability per single-qubit gate.
        p2: depolarizing probability per two-qubit gate.
        idle_drift: coherent Rz angle (radians) applied per idle layer.
        idle_dephase: stochastic Z-flip probability per idle layer.
        readout: per-qubit 2x2 confusion matrices (rows: true state). An empty
            tuple means ideal readout; a circuit qubit beyond the list also
            reads out ideally.
        durations: per-gate-kind duration in arbitrary time units.
    """

    p1: float = 0.0
    p2: float = 0.0
    idle_drift: float = 0.0
    idle_dephase: float = 0.0
    readout: tuple[np.ndarray, ...] = ()
    durations: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_DURATIONS))

    def __post_init__(self) -> None:
        for name in ("p1", "p2", "idle_dephase"):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise NoiseModelError(f"{name} must lie in [0, 1], got {v}")
        object.__setattr__(self, "readout", tuple(_as_confusion(m) for m in self.readout))
        if any(d < 0 for d in self.durations.values()):
            raise NoiseModelError("durations must be non-negative")

    def confusion(self, qubit: int) -> np.ndarray | None:
        """Confusion matrix for a qubit, or None when readout is ideal there."""
        if qubit < len(self.readout):
            return self.readout[qubit]
        return None

    @property
    def is_noiseless(self) -> bool:
        return (
            self.p1 == 0.0
            and self.p2 == 0.0
            and self.idle_drift == 0.0
            and self.idle_dephase == 0.0
            and all(np.allclose(m, np.eye(2)) for m in self.readout)
        )

    def scaled(self, factor: float) -> "NoiseModel":
        """Model with all error strengths scaled by ``factor`` (clipped to [0,1])."""

        def clip(p: float) -> float:
            return min(max(p * factor, 0.0), 1.0)

        readout = []
        for m in self.readout:
            p01, p10 = clip(m[0, 1]), clip(m[1, 0])
            readout.append(flip_confusion(p01, p10))
        return replace(
            self,
            p1=clip(self.p1),
            p2=clip(self.p2),
            idle_drift=self.idle_drift * factor,
            idle_dephase=clip(self.idle_dephase),
            readout=tuple(readout),
        )

    def take_qubits(self, qubits: Sequence[int]) -> "NoiseModel":
        """Model restricted to the given physical qubits, in order.

        Used by layout selection: logical qubit i inherits the readout of
        physical qubit qubits[i].
        """
        rows = []
        for q in qubits:
            m = self.confusion(q)
            rows.append(np.eye(2) if m is None else m)
        return replace(self, readout=tuple(rows))

    def to_obj(self) -> dict:
        return {
            "p1": self.p1,
            "p2": self.p2,
            "idle_drift": self.idle_drift,
            "idle_dephase": self.idle_dephase,
            "readout": [m.tolist() for m in self.readout],
            "durations": dict(self.durations),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_obj(), sort_keys=True)

    @classmethod
    def from_obj(cls, obj: Mapping) -> "NoiseModel":
        return cls(
            p1=float(obj.get("p1", 0.0)),
            p2=float(obj.get("p2", 0.0)),
            idle_drift=float(obj.get("idle_drift", 0.0)),
            idle_dephase=float(obj.get("idle_dephase", 0.0)),
            readout=tuple(np.asarray(m, dtype=float) for m in obj.get("readout", [])),
            durations=dict(obj.get("durations", DEFAULT_DURATIONS)),
        )

    @classmethod
    def from_json(cls, text: str) -> "NoiseModel":
        return cls.from_obj(json.loads(text))


def noiseless() -> NoiseModel:
    return NoiseModel()


def kolkata_like(width: int = 16) -> NoiseModel:
    """Preset loosely modeled on a 27-qubit transmon device's reported averages.

    Gate errors 1.8e-4 (1q) and 6.8e-3 (2q), 1% readout assignment error;
    per-layer idle drift/dephasing are configurable defaults of this artifact.
    """
    return NoiseModel(
        p1=1.8e-4,
        p2=6.8e-3,
        idle_drift=0.02,
        idle_dephase=0.002,
        readout=tuple(flip_confusion(0.01) for _ in range(width)),
    )


PRESETS = {
    "none": noiseless,
    "kolkata": kolkata_like,
}


def preset(name: str, width: int = 16) -> NoiseModel:
    """Look up a preset by name; 'none' and 'kolkata' are built in."""
    try:
        factory = PRESETS[name]
    except KeyError:
        raise NoiseModelError(f"unknown noise preset {name!r}; known: {sorted(PRESETS)}")
    if factory is noiseless:
        return factory()
    return factory(width)


def load_noise(spec: str, width: int = 16) -> NoiseModel:
    """Resolve a CLI noise spec: a preset name or a path to a JSON file."""
    if spec in PRESETS:
        return preset(spec, width)
    with open(spec, "r", encoding="utf-8") as fh:
        return NoiseModel.from_json(fh.read())
