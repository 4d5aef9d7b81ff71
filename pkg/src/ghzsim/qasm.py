"""OpenQASM 2.0 emission and parsing for the fixed gate set h/cx/id/u3/measure.

Emission is deterministic: u3 angles are wrapped to (-pi, pi] and printed
with 17 significant digits, so re-parsing reproduces the gate list exactly.
Durations are not part of OpenQASM; the parser restores the package default
durations, treating u3 gates with theta == 0 as zero-duration frame updates.
"""

from __future__ import annotations

import re

from .circuit import (
    CNOT,
    DEFAULT_DURATIONS,
    H,
    ID,
    MEASURE,
    U3,
    Circuit,
    Gate,
    GateDurations,
    wrap_angle,
)


class QasmError(ValueError):
    """Raised when OpenQASM text cannot be parsed."""


def _fmt(x: float) -> str:
    return f"{x:.17g}"


def emit_qasm(circuit: Circuit) -> str:
    """Serialize a circuit to OpenQASM 2.0 text."""
    size = max(circuit.register) + 1 if circuit.register else 0
    lines = [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        f"// register: {','.join(str(q) for q in circuit.register)}",
        f"qreg q[{size}];",
        f"creg c[{len(circuit.register)}];",
    ]
    for g in circuit.gates:
        if g.kind == H:
            lines.append(f"h q[{g.qubits[0]}];")
        elif g.kind == ID:
            lines.append(f"id q[{g.qubits[0]}];")
        elif g.kind == CNOT:
            lines.append(f"cx q[{g.qubits[0]}],q[{g.qubits[1]}];")
        elif g.kind == U3:
            theta, phi, lam = (wrap_angle(p) for p in g.params)
            lines.append(f"u3({_fmt(theta)},{_fmt(phi)},{_fmt(lam)}) q[{g.qubits[0]}];")
        elif g.kind == MEASURE:
            pos = circuit.position_of(g.qubits[0])
            lines.append(f"measure q[{g.qubits[0]}] -> c[{pos}];")
    return "\n".join(lines) + "\n"


_RE_QREG = re.compile(r"qreg\s+q\[(\d+)\];")
_RE_CREG = re.compile(r"creg\s+c\[(\d+)\];")
_RE_ONEQ = re.compile(r"(h|id)\s+q\[(\d+)\];")
_RE_CX = re.compile(r"cx\s+q\[(\d+)\]\s*,\s*q\[(\d+)\];")
_RE_U3 = re.compile(r"u3\(([^)]*)\)\s+q\[(\d+)\];")
_RE_MEASURE = re.compile(r"measure\s+q\[(\d+)\]\s*->\s*c\[(\d+)\];")
_RE_REGISTER = re.compile(r"//\s*register:\s*(.*)")


def parse_qasm(
    text: str, durations: GateDurations = DEFAULT_DURATIONS
) -> Circuit:
    """Parse OpenQASM 2.0 text produced by :func:`emit_qasm`.

    The register order is taken from the ``// register:`` comment when
    present, otherwise from operand order of first appearance.
    """
    register: list[int] = []
    explicit_register = False
    gates: list[Gate] = []
    seen_header = False

    def note(q: int):
        if not explicit_register and q not in register:
            register.append(q)

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        m = _RE_REGISTER.fullmatch(line)
        if m:
            spec = m.group(1).strip()
            if spec:
                register = [int(tok) for tok in spec.split(",")]
                explicit_register = True
            continue
        if line.startswith("//"):
            continue
        if line.startswith("OPENQASM"):
            if line != "OPENQASM 2.0;":
                raise QasmError(f"line {lineno}: unsupported version: {line}")
            seen_header = True
            continue
        if line.startswith("include"):
            continue
        if _RE_QREG.fullmatch(line) or _RE_CREG.fullmatch(line):
            continue
        m = _RE_ONEQ.fullmatch(line)
        if m:
            kind, q = m.group(1), int(m.group(2))
            note(q)
            gates.append(Gate(kind, (q,), duration_ns=durations.of(kind)))
            continue
        m = _RE_CX.fullmatch(line)
        if m:
            c, t = int(m.group(1)), int(m.group(2))
            note(c)
            note(t)
            gates.append(Gate(CNOT, (c, t), duration_ns=durations.cx))
            continue
        m = _RE_U3.fullmatch(line)
        if m:
            try:
                params = tuple(float(tok) for tok in m.group(1).split(","))
            except ValueError:
                raise QasmError(f"line {lineno}: bad u3 parameters: {line}") from None
            if len(params) != 3:
                raise QasmError(f"line {lineno}: u3 needs 3 parameters")
            q = int(m.group(2))
            note(q)
            duration = 0.0 if params[0] == 0.0 else durations.u3
            gates.append(Gate(U3, (q,), params, duration))
            continue
        m = _RE_MEASURE.fullmatch(line)
        if m:
            q = int(m.group(1))
            note(q)
            gates.append(Gate(MEASURE, (q,), duration_ns=durations.measure))
            continue
        raise QasmError(f"line {lineno}: unsupported statement: {line}")

    if not seen_header:
        raise QasmError("missing OPENQASM 2.0 header")
    return Circuit(tuple(register), tuple(gates))
