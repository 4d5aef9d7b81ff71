"""Exact density-matrix evolution under configurable noise, plus shot sampling.

The engine is an exact 2^n x 2^n density-matrix simulator: registers stay
small (n <= 10), and exactness turns every analytic decay law into a
zero-variance oracle.  Shot sampling with readout errors sits on top.

Conventions: register position 0 occupies the most significant index bit, so
the computational basis state |b0 b1 ... b_{n-1}> has index int(bits, 2) and
a measured bitstring reads left to right in register order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import kernels
from .circuit import CNOT, ID, MEASURE, Circuit, Gate, gate_unitary

HERMITICITY_ATOL = 1e-10
TRACE_ATOL = 1e-10
EIGENVALUE_FLOOR = -1e-9

NS_PER_US = 1000.0


class StateError(ValueError):
    """Raised when numerical state validity is violated beyond tolerance."""


def _popcounts(n_qubits: int) -> np.ndarray:
    idx = np.arange(1 << n_qubits, dtype=np.uint32)
    counts = np.zeros_like(idx)
    for b in range(n_qubits):
        counts += (idx >> b) & 1
    return counts.astype(np.int64)


@dataclass
class DensityMatrix:
    n_qubits: int
    mat: np.ndarray

    @classmethod
    def ground(cls, n_qubits: int) -> DensityMatrix:
        dim = 1 << n_qubits
        mat = np.zeros((dim, dim), dtype=complex)
        mat[0, 0] = 1.0
        return cls(n_qubits, mat)

    @classmethod
    def from_state(cls, psi: np.ndarray) -> DensityMatrix:
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        n = int(round(math.log2(psi.size)))
        if 1 << n != psi.size:
            raise ValueError("state vector length must be a power of two")
        return cls(n, np.outer(psi, psi.conj()))

    def copy(self) -> DensityMatrix:
        return DensityMatrix(self.n_qubits, self.mat.copy())

    @property
    def dim(self) -> int:
        return 1 << self.n_qubits

    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.mat))

    def validate(self) -> None:
        """Hermiticity, unit trace, and near-positivity checks."""
        if not np.allclose(self.mat, self.mat.conj().T, atol=HERMITICITY_ATOL):
            raise StateError("density matrix is not Hermitian")
        tr = np.trace(self.mat)
        if abs(tr - 1.0) > TRACE_ATOL:
            raise StateError(f"trace deviates from 1 by {abs(tr - 1.0):.3e}")
        evals = np.linalg.eigvalsh(self.mat)
        if evals.min() < EIGENVALUE_FLOOR:
            raise StateError(f"negative eigenvalue {evals.min():.3e}")


def _as_qubit_map(value: float | Mapping[int, float]) -> dict[int, float] | float:
    if isinstance(value, Mapping):
        return {int(k): float(v) for k, v in value.items()}
    return float(value)


@dataclass(frozen=True)
class NoiseModel:
    """Per-qubit relaxation/dephasing times (us), optional collective
    dephasing time, depolarizing gate errors and readout bit-flip rates.

    ``t1_us``/``t2_us``/``readout_error`` accept either a single value for
    all qubits or a mapping keyed by physical qubit label.
    """

    t1_us: float | Mapping[int, float] = math.inf
    t2_us: float | Mapping[int, float] = math.inf
    t2c_us: float | None = None
    p1: float = 0.0
    p2: float = 0.0
    readout_error: float | Mapping[int, float] = 0.0
    gate_time_noise: bool = False

    def __post_init__(self):
        object.__setattr__(self, "t1_us", _as_qubit_map(self.t1_us))
        object.__setattr__(self, "t2_us", _as_qubit_map(self.t2_us))
        object.__setattr__(self, "readout_error", _as_qubit_map(self.readout_error))
        for name in ("p1", "p2"):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise ValueError(f"{name} must be in [0, 1], got {p}")
        for label, value in self._items("readout_error"):
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"readout_error{label} must be in [0, 1]")
        for attr in ("t1_us", "t2_us"):
            for label, value in self._items(attr):
                if not value > 0.0:
                    raise ValueError(f"{attr}{label} must be positive")
        if self.t2c_us is not None and not self.t2c_us > 0.0:
            raise ValueError("t2c_us must be positive")
        qubits = set()
        for attr in ("t1_us", "t2_us"):
            v = getattr(self, attr)
            if isinstance(v, dict):
                qubits |= set(v)
        checks = sorted(qubits) if qubits else [None]
        for q in checks:
            t1, t2 = self.t1_of(q), self.t2_of(q)
            if t2 > 2.0 * t1 * (1.0 + 1e-12):
                raise ValueError(f"t2 <= 2*t1 violated for qubit {q}: {t2} > 2*{t1}")

    def _items(self, attr: str):
        v = getattr(self, attr)
        if isinstance(v, dict):
            return [(f"[{k}]", val) for k, val in v.items()]
        return [("", v)]

    def _lookup(self, attr: str, qubit: int | None) -> float:
        v = getattr(self, attr)
        if isinstance(v, dict):
            if qubit not in v:
                raise KeyError(f"{attr} has no entry for qubit {qubit}")
            return v[qubit]
        return v

    def t1_of(self, qubit: int | None) -> float:
        return self._lookup("t1_us", qubit)

    def t2_of(self, qubit: int | None) -> float:
        return self._lookup("t2_us", qubit)

    def readout_of(self, qubit: int | None) -> float:
        return self._lookup("readout_error", qubit)

    @property
    def has_idle(self) -> bool:
        def finite(v):
            return any(math.isfinite(x) for x in (v.values() if isinstance(v, dict) else [v]))

        return finite(self.t1_us) or finite(self.t2_us)


NOISELESS = NoiseModel()


@dataclass(frozen=True)
class Counts:
    """Measured bitstring histogram; keys read left to right in register order."""

    counts: Mapping[str, int]
    shots: int
    n_qubits: int = field(default=0)

    def __post_init__(self):
        total = sum(self.counts.values())
        if total != self.shots:
            raise ValueError(f"counts sum to {total}, expected {self.shots} shots")
        n = self.n_qubits or (len(next(iter(self.counts))) if self.counts else 0)
        object.__setattr__(self, "n_qubits", n)
        for key in self.counts:
            if len(key) != n or set(key) - {"0", "1"}:
                raise ValueError(f"malformed bitstring {key!r}")


def _idle_factors(duration_ns: float, t1_us: float, t2_us: float) -> tuple[float, float]:
    """(gamma, off-diagonal factor) for idling ``duration_ns`` on one qubit.

    gamma = 1 - exp(-t/T1); the off-diagonal factor combines the damping
    sqrt(1-gamma) with pure dephasing exp(-t/Tphi), 1/Tphi = 1/T2 - 1/(2 T1),
    for a net exp(-t/T2).
    """
    t_us = duration_ns / NS_PER_US
    gamma = -math.expm1(-t_us / t1_us) if math.isfinite(t1_us) else 0.0
    inv_tphi = (1.0 / t2_us if math.isfinite(t2_us) else 0.0) - 0.5 * (
        1.0 / t1_us if math.isfinite(t1_us) else 0.0
    )
    inv_tphi = max(inv_tphi, 0.0)  # t2 == 2*t1 up to rounding
    factor = math.sqrt(1.0 - gamma) * math.exp(-t_us * inv_tphi)
    return gamma, factor


def apply_idle_noise(
    rho: DensityMatrix, qubit_pos: int, duration_ns: float, noise: NoiseModel,
    qubit_label: int | None = None,
) -> DensityMatrix:
    """Amplitude damping then pure dephasing on one qubit for ``duration_ns``.

    ``qubit_label`` selects per-qubit times from the noise model; it defaults
    to uniform values.
    """
    if duration_ns < 0:
        raise ValueError("duration must be nonnegative")
    if duration_ns == 0 or not noise.has_idle:
        return rho
    t1 = noise.t1_of(qubit_label)
    t2 = noise.t2_of(qubit_label)
    gamma, factor = _idle_factors(duration_ns, t1, t2)
    rho.mat = kernels.apply_relax_dephase_1q(
        rho.mat, rho.n_qubits, qubit_pos, gamma, factor
    )
    return rho


def apply_collective_dephasing(
    rho: DensityMatrix, duration_ns: float, t2c_us: float
) -> DensityMatrix:
    """Shared-phase dephasing: rho_xy *= exp(-(m_x - m_y)^2 t / T2c), where
    m_z counts (zeros - ones)/2 of the basis index.

    Equivalent to averaging a global Z rotation over a Gaussian phase with
    variance 2t/T2c; a single qubit's off-diagonal decays as exp(-t/T2c) and
    the far-off-diagonal of an N-qubit GHZ state as exp(-N^2 t/T2c).
    """
    if duration_ns < 0:
        raise ValueError("duration must be nonnegative")
    if duration_ns == 0:
        return rho
    n = rho.n_qubits
    m = (n - 2 * _popcounts(n)) / 2.0
    dm = m[:, None] - m[None, :]
    rho.mat = rho.mat * np.exp(-(dm**2) * (duration_ns / NS_PER_US) / t2c_us)
    return rho


def apply_gate(
    rho: DensityMatrix, gate: Gate, noise: NoiseModel = NOISELESS,
    labels: Mapping[int, int] | None = None,
) -> DensityMatrix:
    """Apply one gate: unitary conjugation, then depolarizing gate error,
    then (optionally) idle noise on all spectator qubits for the gate time.

    Gate operands are register positions unless ``labels`` maps positions to
    physical labels for per-qubit noise lookup.  Zero-duration gates are
    virtual frame updates and acquire no noise.  MEASURE is a no-op here;
    sampling happens in :func:`sample_counts`.
    """
    n = rho.n_qubits
    for q in gate.qubits:
        if not 0 <= q < n:
            raise ValueError(f"operand {q} out of range for {n} qubits")
    label_of = (lambda p: labels[p]) if labels is not None else (lambda p: None)

    if gate.kind == MEASURE:
        return rho
    if gate.kind == ID:
        rho = apply_idle_noise(
            rho, gate.qubits[0], gate.duration_ns, noise, label_of(gate.qubits[0])
        )
        return rho

    u = gate_unitary(gate)
    if gate.kind == CNOT:
        rho.mat = kernels.apply_unitary_2q(rho.mat, n, gate.qubits[0], gate.qubits[1], u)
        if noise.p2 > 0.0 and not gate.is_virtual:
            rho.mat = kernels.apply_depolarize_2q(
                rho.mat, n, gate.qubits[0], gate.qubits[1], noise.p2
            )
    else:
        rho.mat = kernels.apply_unitary_1q(rho.mat, n, gate.qubits[0], u)
        if noise.p1 > 0.0 and not gate.is_virtual:
            rho.mat = kernels.apply_depolarize_1q(rho.mat, n, gate.qubits[0], noise.p1)

    if noise.gate_time_noise and gate.duration_ns > 0.0:
        for pos in range(n):
            if pos not in gate.qubits:
                rho = apply_idle_noise(rho, pos, gate.duration_ns, noise, label_of(pos))
    return rho


def evolve(
    circuit: Circuit, noise: NoiseModel = NOISELESS,
    initial: DensityMatrix | None = None,
) -> DensityMatrix:
    """Evolve ``initial`` (default |0...0>) through the circuit under noise.

    Identity gates realize delay: each applies per-qubit idle noise, and a
    contiguous identity block additionally applies one collective-dephasing
    step for the block's per-qubit duration (the identities of one round run
    in parallel on hardware).  Collective dephasing commutes with the
    per-qubit idle channels, so ordering inside a block is immaterial.
    """
    n = circuit.n_qubits
    rho = initial.copy() if initial is not None else DensityMatrix.ground(n)
    if rho.n_qubits != n:
        raise ValueError("initial state size does not match register")
    labels = dict(enumerate(circuit.register))
    positions = {q: i for i, q in enumerate(circuit.register)}

    id_time: dict[int, float] = {}

    def flush_idle_block():
        if not id_time:
            return
        if noise.t2c_us is not None:
            durations = set(id_time.values())
            if len(durations) > 1 or len(id_time) != n:
                raise ValueError(
                    "collective dephasing needs uniform identity blocks "
                    "covering every register qubit"
                )
            apply_collective_dephasing(rho, durations.pop(), noise.t2c_us)
        id_time.clear()

    for gate in circuit.gates:
        mapped = Gate(
            gate.kind,
            tuple(positions[q] for q in gate.qubits),
            gate.params,
            gate.duration_ns,
        )
        if gate.kind == ID:
            id_time[mapped.qubits[0]] = id_time.get(mapped.qubits[0], 0.0) + gate.duration_ns
        else:
            flush_idle_block()
        apply_gate(rho, mapped, noise, labels)
    flush_idle_block()
    return rho


def apply_delay(
    rho: DensityMatrix, duration_ns: float, noise: NoiseModel,
    labels: Mapping[int, int] | None = None,
) -> DensityMatrix:
    """Continuous-time delay: idle noise on every qubit plus one collective
    dephasing step.  Equal to a block of identity gates of the same total
    duration, without the 90 ns quantization."""
    for pos in range(rho.n_qubits):
        label = labels[pos] if labels is not None else None
        rho = apply_idle_noise(rho, pos, duration_ns, noise, label)
    if noise.t2c_us is not None:
        rho = apply_collective_dephasing(rho, duration_ns, noise.t2c_us)
    return rho


def coherence_of(rho: DensityMatrix) -> float:
    """Sum of the magnitudes of the two far-off-diagonal elements linking
    |0...0> and |1...1>; 1 for an ideal GHZ state."""
    return float(abs(rho.mat[0, -1]) + abs(rho.mat[-1, 0]))


def parity_expectation(
    rho: DensityMatrix, noise: NoiseModel = NOISELESS,
    labels: Mapping[int, int] | None = None,
) -> float:
    """Exact expectation of (-1)^(number of 1s) under measurement of ``rho``.

    Independent readout bit flips scale the parity by prod_q (1 - 2 r_q),
    which is folded in exactly so that this is the infinite-shot limit of
    sampled estimates.
    """
    signs = 1.0 - 2.0 * (_popcounts(rho.n_qubits) % 2)
    p = float(np.real(np.dot(signs, np.diag(rho.mat))))
    for pos in range(rho.n_qubits):
        label = labels[pos] if labels is not None else None
        p *= 1.0 - 2.0 * noise.readout_of(label)
    return p


def sample_counts(
    rho: DensityMatrix, shots: int, noise: NoiseModel = NOISELESS, seed=None,
    labels: Mapping[int, int] | None = None,
) -> Counts:
    """Draw ``shots`` bitstrings from the diagonal of ``rho`` and flip each
    bit independently with its readout-error probability.  Deterministic for
    a given ``seed`` (int, SeedSequence, or Generator)."""
    if shots < 1:
        raise ValueError("shots must be >= 1")
    n = rho.n_qubits
    probs = rho.diagonal()
    if probs.min() < EIGENVALUE_FLOOR:
        raise StateError(f"negative probability {probs.min():.3e}")
    probs = np.clip(probs, 0.0, None)
    probs /= probs.sum()

    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    outcomes = rng.choice(rho.dim, size=shots, p=probs)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    bits = (outcomes[:, None] >> shifts[None, :]) & 1

    rates = np.array(
        [noise.readout_of(labels[p] if labels is not None else None) for p in range(n)]
    )
    if np.any(rates > 0.0):
        flips = rng.random((shots, n)) < rates[None, :]
        bits = bits ^ flips

    packed = bits @ (1 << shifts)
    values, freq = np.unique(packed, return_counts=True)
    counts = {format(int(v), f"0{n}b"): int(c) for v, c in zip(values, freq)}
    return Counts(counts, shots, n)
