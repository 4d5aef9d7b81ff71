"""Four-stage experiment runner: generate, delay, rotate, measure.

A scan evolves the preparation and delay once per (N, tau) and branches per
analysis angle, which is exact because nothing before the rotation stage
depends on phi.  Sampling seeds derive deterministically from
(master seed, N, tau index, phi index) so any cell reproduces in isolation.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    Circuit,
    ID_DURATION_NS,
    append_analysis_and_measure,
    append_delay,
    build_ghz,
)
from .simulator import (
    Counts,
    DensityMatrix,
    NoiseModel,
    apply_delay,
    evolve,
    parity_expectation,
    sample_counts,
)
from .topology import CouplingGraph, QubitChain

EXACT = "exact"
SAMPLED = "sampled"

IDENTITY_GATES = "identity_gates"
CONTINUOUS = "continuous"


@dataclass(frozen=True)
class ExperimentPlan:
    graph: CouplingGraph
    chain: QubitChain
    delays_ns: tuple[float, ...]
    noise: NoiseModel = NoiseModel()
    phi_grid_size: int = 0  # 0 -> 4N + 1
    shots: int = 1000
    mode: str = EXACT
    delay_realization: str = IDENTITY_GATES
    seed: int = 0

    def __post_init__(self):
        if self.mode not in (EXACT, SAMPLED):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.delay_realization not in (IDENTITY_GATES, CONTINUOUS):
            raise ValueError(f"unknown delay realization {self.delay_realization!r}")
        if self.shots < 1:
            raise ValueError("shots must be >= 1")
        # Canonical delay order so seed derivation by tau index is unambiguous.
        object.__setattr__(
            self, "delays_ns", tuple(sorted(float(t) for t in self.delays_ns))
        )
        for tau in self.delays_ns:
            if tau < 0:
                raise ValueError("delays must be nonnegative")
            if self.delay_realization == IDENTITY_GATES and tau % ID_DURATION_NS != 0:
                raise ValueError(
                    f"delay {tau} ns is not a multiple of {ID_DURATION_NS:.0f} ns"
                )
        if self.phi_grid_size == 0:
            object.__setattr__(self, "phi_grid_size", 4 * self.n_qubits + 1)
        if self.phi_grid_size < 2:
            raise ValueError("phi grid needs at least 2 points")

    @property
    def n_qubits(self) -> int:
        return len(self.chain)

    def phi_grid(self) -> np.ndarray:
        return np.linspace(0.0, math.pi, self.phi_grid_size)


@dataclass(frozen=True)
class ParityPoint:
    phi: float
    parity: float
    delta_p: float
    shots: int  # 0 in exact mode


@dataclass(frozen=True)
class ParityDataset:
    n_qubits: int
    tau_ns: float
    points: tuple[ParityPoint, ...] = field(default_factory=tuple)

    def __post_init__(self):
        phis = [p.phi for p in self.points]
        if phis != sorted(phis):
            raise ValueError("points must be sorted by phi")

    def phis(self) -> np.ndarray:
        return np.array([p.phi for p in self.points])

    def parities(self) -> np.ndarray:
        return np.array([p.parity for p in self.points])

    def errors(self) -> np.ndarray:
        return np.array([p.delta_p for p in self.points])


def derive_seed(
    master: int, n_qubits: int, tau_index: int, phi_index: int
) -> np.random.SeedSequence:
    return np.random.SeedSequence(
        entropy=master, spawn_key=(n_qubits, tau_index, phi_index)
    )


def parity_of_counts(counts: Counts) -> tuple[float, float]:
    """Parity P = P_even - P_odd of a histogram, with its statistical error.

    P_odd = 1 - P_even, so both per-probability binomial dispersions
    sqrt(P(1-P)/n) coincide and the error on P is twice either:
    delta_p = 2 sqrt(P_even (1 - P_even) / n).
    """
    if counts.shots < 1:
        raise ValueError("counts are empty")
    even = sum(c for bits, c in counts.counts.items() if bits.count("1") % 2 == 0)
    p_even = even / counts.shots
    parity = 2.0 * p_even - 1.0
    delta_p = 2.0 * math.sqrt(p_even * (1.0 - p_even) / counts.shots)
    return parity, delta_p


def _prepared_state(plan: ExperimentPlan, tau_ns: float) -> tuple[DensityMatrix, Circuit]:
    """Evolve generation plus delay; returns the state and the base circuit."""
    prep = build_ghz(plan.graph, plan.chain)
    labels = dict(enumerate(prep.register))
    if plan.delay_realization == IDENTITY_GATES:
        base = append_delay(prep, int(round(tau_ns / ID_DURATION_NS)))
        rho = evolve(base, plan.noise)
    else:
        base = prep
        rho = evolve(prep, plan.noise)
        rho = apply_delay(rho, tau_ns, plan.noise, labels)
    return rho, base


def run_parity_scan(plan: ExperimentPlan, tau_ns: float) -> ParityDataset:
    """Scan the analysis angle at one delay and collect parity points."""
    if tau_ns not in plan.delays_ns:
        raise ValueError(f"tau {tau_ns} ns is not in the plan delays")
    tau_index = plan.delays_ns.index(tau_ns)
    rho_base, base = _prepared_state(plan, tau_ns)
    labels = dict(enumerate(base.register))

    points = []
    for phi_index, phi in enumerate(plan.phi_grid()):
        circuit = append_analysis_and_measure(Circuit(base.register), phi)
        rho = evolve(circuit, plan.noise, initial=rho_base)
        if plan.mode == EXACT:
            parity = parity_expectation(rho, plan.noise, labels)
            points.append(ParityPoint(float(phi), parity, 0.0, 0))
        else:
            seed = derive_seed(plan.seed, plan.n_qubits, tau_index, phi_index)
            counts = sample_counts(rho, plan.shots, plan.noise, seed, labels)
            parity, delta_p = parity_of_counts(counts)
            points.append(ParityPoint(float(phi), parity, delta_p, plan.shots))
    return ParityDataset(plan.n_qubits, float(tau_ns), tuple(points))


def run_delay_sweep(plan: ExperimentPlan) -> list[ParityDataset]:
    """One parity scan per configured delay, in delay order."""
    return [run_parity_scan(plan, tau) for tau in plan.delays_ns]


CSV_HEADER = "n_qubits,tau_ns,phi_rad,parity,delta_p,shots"


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def dataset_to_csv(dataset: ParityDataset, comments: list[str] | None = None) -> str:
    """Serialize one dataset to CSV; ``comments`` become leading # lines."""
    out = io.StringIO()
    for line in comments or []:
        out.write(f"# {line}\n")
    out.write(CSV_HEADER + "\n")
    for p in dataset.points:
        out.write(
            f"{dataset.n_qubits},{_fmt(dataset.tau_ns)},{_fmt(p.phi)},"
            f"{_fmt(p.parity)},{_fmt(p.delta_p)},{p.shots}\n"
        )
    return out.getvalue()


def dataset_from_csv(text: str) -> ParityDataset:
    n_qubits = None
    tau = None
    points = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#") or line == CSV_HEADER:
            continue
        fields = line.split(",")
        if len(fields) != 6:
            raise ValueError(f"bad dataset row: {line!r}")
        n, tau_ns, phi, parity, delta_p, shots = fields
        n_qubits = int(n)
        tau = float(tau_ns)
        points.append(ParityPoint(float(phi), float(parity), float(delta_p), int(shots)))
    if n_qubits is None:
        raise ValueError("dataset contains no rows")
    return ParityDataset(n_qubits, tau, tuple(points))
