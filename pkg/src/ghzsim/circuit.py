"""Gate-level circuits for GHZ generation, delay, analysis rotation and readout.

Circuits are immutable: builders return extended copies.  Gate durations are
carried on each gate so that optional idle-during-gate noise can be modeled;
only the identity duration (80 ns gate + 10 ns buffer = 90 ns) is fixed by
the hardware realization of delays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .topology import ChainError, CouplingGraph, QubitChain

H = "h"
CNOT = "cx"
ID = "id"
U3 = "u3"
MEASURE = "measure"

KINDS = (H, CNOT, ID, U3, MEASURE)

ID_DURATION_NS = 90.0  # 80 ns gate + 10 ns buffer


@dataclass(frozen=True)
class GateDurations:
    """Default gate times in ns; only the identity time is hardware-given."""

    h: float = 90.0
    u3: float = 90.0
    cx: float = 250.0
    id: float = ID_DURATION_NS
    measure: float = 0.0

    def of(self, kind: str) -> float:
        return getattr(self, kind)


DEFAULT_DURATIONS = GateDurations()


@dataclass(frozen=True)
class Gate:
    kind: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()
    duration_ns: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind!r}")
        n_ops = 2 if self.kind == CNOT else 1
        if len(self.qubits) != n_ops or len(set(self.qubits)) != n_ops:
            raise ValueError(f"{self.kind} needs {n_ops} distinct operand(s)")
        if self.kind == U3:
            if len(self.params) != 3:
                raise ValueError("u3 needs parameters (theta, phi, lambda)")
        elif self.params:
            raise ValueError(f"{self.kind} takes no parameters")

    @property
    def is_virtual(self) -> bool:
        """Zero-duration gates are software frame updates: noiseless, instant."""
        return self.duration_ns == 0.0 and self.kind in (U3, H, CNOT, ID)


@dataclass(frozen=True)
class Circuit:
    register: tuple[int, ...]
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(set(self.register)) != len(self.register):
            raise ValueError("register qubits must be distinct")
        reg = set(self.register)
        for g in self.gates:
            for q in g.qubits:
                if q not in reg:
                    raise ValueError(f"gate operand {q} not in register")

    @property
    def n_qubits(self) -> int:
        return len(self.register)

    def extended(self, gates: Iterable[Gate]) -> Circuit:
        return replace(self, gates=self.gates + tuple(gates))

    def count(self, kind: str) -> int:
        return sum(1 for g in self.gates if g.kind == kind)

    def position_of(self, qubit: int) -> int:
        return self.register.index(qubit)

    def to_dict(self) -> dict:
        return {
            "register": list(self.register),
            "gates": [
                {
                    "kind": g.kind,
                    "qubits": list(g.qubits),
                    "params": list(g.params),
                    "duration_ns": g.duration_ns,
                }
                for g in self.gates
            ],
        }

    @classmethod
    def from_dict(cls, data: dict) -> Circuit:
        gates = tuple(
            Gate(
                g["kind"],
                tuple(g["qubits"]),
                tuple(g.get("params", ())),
                float(g.get("duration_ns", 0.0)),
            )
            for g in data["gates"]
        )
        return cls(tuple(data["register"]), gates)


def wrap_angle(x: float) -> float:
    """Wrap an angle to (-pi, pi]."""
    r = math.fmod(x, 2.0 * math.pi)
    if r <= -math.pi:
        r += 2.0 * math.pi
    elif r > math.pi:
        r -= 2.0 * math.pi
    return r


def analysis_rotation(phi: float) -> tuple[np.ndarray, tuple[float, float, float]]:
    """Parity-analysis rotation for angle ``phi``.

    Returns the 2x2 unitary

        cos(pi/4) I + i sin(pi/4) [[0, e^{-i phi}], [e^{i phi}, 0]]

    together with the (theta, phi, lambda) triple realizing it as the
    hardware u3 gate: theta = pi/2, lambda = -phi - pi/2, phi_u3 = phi + pi/2.
    """
    c = math.cos(math.pi / 4)
    s = math.sin(math.pi / 4)
    u = np.array(
        [
            [c, 1j * s * np.exp(-1j * phi)],
            [1j * s * np.exp(1j * phi), c],
        ],
        dtype=complex,
    )
    return u, (math.pi / 2, phi + math.pi / 2, -phi - math.pi / 2)


def u3_matrix(theta: float, phi: float, lam: float) -> np.ndarray:
    """Standard u3 unitary with columns in the {|0>, |1>} basis."""
    ct = math.cos(theta / 2)
    st = math.sin(theta / 2)
    return np.array(
        [
            [ct, -np.exp(1j * lam) * st],
            [np.exp(1j * phi) * st, np.exp(1j * (lam + phi)) * ct],
        ],
        dtype=complex,
    )


def reference_phase(n_qubits: int) -> float:
    """Frame angle that zeroes the ideal parity phase offset.

    The analysis rotation turns the raw GHZ state into parity oscillations
    cos(N(phi - pi/2)); advancing the |1...1> amplitude phase by
    (1 - N) pi/2 shifts the ideal signal onto sin(N phi) for every N.
    """
    return wrap_angle((1 - n_qubits) * math.pi / 2)


def build_ghz(
    graph: CouplingGraph,
    chain: QubitChain,
    durations: GateDurations = DEFAULT_DURATIONS,
) -> Circuit:
    """GHZ preparation circuit on ``chain``: Hadamard on the head, then a
    CNOT along each link, wrapping reversed links in four extra Hadamards."""
    # Re-validate so stale chains cannot silently produce illegal CNOTs.
    chain = QubitChain.on_graph(graph, chain.qubits)
    gates = [Gate(H, (chain.qubits[0],), duration_ns=durations.h)]
    for a, b in zip(chain.qubits, chain.qubits[1:]):
        if graph.has_edge(a, b):
            gates.append(Gate(CNOT, (a, b), duration_ns=durations.cx))
        elif graph.has_edge(b, a):
            gates.append(Gate(H, (a,), duration_ns=durations.h))
            gates.append(Gate(H, (b,), duration_ns=durations.h))
            gates.append(Gate(CNOT, (b, a), duration_ns=durations.cx))
            gates.append(Gate(H, (a,), duration_ns=durations.h))
            gates.append(Gate(H, (b,), duration_ns=durations.h))
        else:  # unreachable after validation
            raise ChainError(f"qubits {a} and {b} are not coupled")
    return Circuit(chain.qubits, tuple(gates))


def append_delay(circuit: Circuit, k: int) -> Circuit:
    """Append ``k`` rounds of identity gates, one per register qubit per round:
    a delay of 90k ns on every qubit."""
    if k < 0:
        raise ValueError("identity count must be nonnegative")
    gates = [
        Gate(ID, (q,), duration_ns=ID_DURATION_NS)
        for _ in range(k)
        for q in circuit.register
    ]
    return circuit.extended(gates)


def append_analysis_and_measure(
    circuit: Circuit,
    phi: float,
    durations: GateDurations = DEFAULT_DURATIONS,
) -> Circuit:
    """Append the analysis rotation at angle ``phi`` and a measurement to
    every register qubit.

    A zero-duration u3 frame gate on the first qubit aligns the parity
    phase reference first, so the ideal signal is sin(N phi) independent
    of N.  Being virtual it adds no noise and leaves coherences untouched.
    """
    gates = []
    theta_ref = reference_phase(circuit.n_qubits)
    if theta_ref != 0.0:
        gates.append(Gate(U3, (circuit.register[0],), (0.0, theta_ref, 0.0), 0.0))
    _, (theta, phi_u3, lam) = analysis_rotation(phi)
    for q in circuit.register:
        gates.append(Gate(U3, (q,), (theta, phi_u3, lam), durations.u3))
    for q in circuit.register:
        gates.append(Gate(MEASURE, (q,), duration_ns=durations.measure))
    return circuit.extended(gates)


def gate_unitary(gate: Gate) -> np.ndarray:
    """Unitary matrix of a gate (2x2, or 4x4 for CNOT in (control, target) order)."""
    if gate.kind == H:
        return np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    if gate.kind == ID:
        return np.eye(2, dtype=complex)
    if gate.kind == U3:
        return u3_matrix(*gate.params)
    if gate.kind == CNOT:
        return np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]],
            dtype=complex,
        )
    raise ValueError(f"{gate.kind} has no unitary")


def validate_on_graph(circuit: Circuit, graph: CouplingGraph) -> None:
    """Hardware-faithfulness check: every CNOT must follow a directed edge."""
    for g in circuit.gates:
        if g.kind == CNOT and not graph.has_edge(*g.qubits):
            raise ChainError(
                f"cx {g.qubits[0]}->{g.qubits[1]} is not a directed coupling"
            )
