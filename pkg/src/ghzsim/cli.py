"""Command-line entry point wiring routing, simulation, and analysis.

Subcommands:

    route            pick a qubit chain on a coupling graph
    simulate         run a configured delay sweep, write parity CSVs + manifest
    analyze          fit datasets: sinusoid, decay, scaling, plot data
    reproduce-paper  re-derive the scaling statistics from the published
                     coherence-time table and compare against the published fits

Config and calibration files are JSON with units in the field names; all
tabular output is CSV with floats at 17 significant digits, so identical
configs and seeds give byte-identical outputs.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np

from . import __version__, analysis, refdata
from .circuit import ID_DURATION_NS, build_ghz
from .kernels import backend_name
from .protocol import (
    CONTINUOUS,
    EXACT,
    IDENTITY_GATES,
    SAMPLED,
    ExperimentPlan,
    ParityDataset,
    dataset_from_csv,
    dataset_to_csv,
    run_parity_scan,
)
from .simulator import NoiseModel
from .topology import (
    CouplingGraph,
    GraphFormatError,
    NoChainError,
    QubitChain,
    find_chain,
    load_graph,
)


class ConfigError(ValueError):
    """Invalid run configuration; message carries the offending field path."""


class DataError(ValueError):
    """Dataset directory is missing, inconsistent, or unparseable."""


def _fmt(x: float) -> str:
    return f"{x:.17g}"


# ---------------------------------------------------------------- run config


@dataclass(frozen=True)
class RunConfig:
    graph: CouplingGraph
    n_values: tuple[int, ...]
    chains: dict[int, QubitChain]
    delays_ns: dict[int, tuple[float, ...]]
    noise: NoiseModel
    shots: int
    mode: str
    delay_realization: str
    seed: int
    output_dir: str

    def plan_for(self, n: int) -> ExperimentPlan:
        return ExperimentPlan(
            graph=self.graph,
            chain=self.chains[n],
            delays_ns=self.delays_ns[n],
            noise=self.noise,
            shots=self.shots,
            mode=self.mode,
            delay_realization=self.delay_realization,
            seed=self.seed,
        )


def _expect(mapping: Mapping, key: str, kind, path: str, default=None, required=False):
    if key not in mapping:
        if required:
            raise ConfigError(f"{path}{key}: missing required field")
        return default
    value = mapping[key]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if not isinstance(value, kind) or isinstance(value, bool) and kind is not bool:
        raise ConfigError(f"{path}{key}: expected {getattr(kind, '__name__', kind)}")
    return value


def _parse_per_qubit(value, path: str):
    if value is None:
        return math.inf
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        return float(value)
    if isinstance(value, dict):
        try:
            return {int(k): float(v) for k, v in value.items()}
        except (TypeError, ValueError):
            raise ConfigError(f"{path}: per-qubit map needs integer keys") from None
    raise ConfigError(f"{path}: expected number, per-qubit map, or null")


def parse_noise(raw: Mapping[str, Any] | None, path: str = "noise.") -> NoiseModel:
    raw = raw or {}
    unknown = set(raw) - {
        "t1_us", "t2_us", "t2c_us", "p1", "p2", "readout_error", "gate_time_noise",
    }
    if unknown:
        raise ConfigError(f"{path}{sorted(unknown)[0]}: unknown field")
    t2c = raw.get("t2c_us")
    if t2c is not None and (isinstance(t2c, bool) or not isinstance(t2c, (int, float))):
        raise ConfigError(f"{path}t2c_us: expected number or null")
    try:
        readout = raw.get("readout_error", 0.0)
        return NoiseModel(
            t1_us=_parse_per_qubit(raw.get("t1_us"), path + "t1_us"),
            t2_us=_parse_per_qubit(raw.get("t2_us"), path + "t2_us"),
            t2c_us=None if t2c is None else float(t2c),
            p1=float(_expect(raw, "p1", (int, float), path, 0.0)),
            p2=float(_expect(raw, "p2", (int, float), path, 0.0)),
            readout_error=(
                0.0 if readout is None else _parse_per_qubit(readout, path + "readout_error")
            ),
            gate_time_noise=bool(raw.get("gate_time_noise", False)),
        )
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None


def _resolve_delays(raw, n_values: Sequence[int], realization: str) -> dict[int, tuple[float, ...]]:
    def as_list(value, path):
        if not isinstance(value, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in value
        ):
            raise ConfigError(f"{path}: expected a list of delays in ns")
        return tuple(float(v) for v in value)

    if raw is None:
        raw = [0.0]
    if isinstance(raw, list):
        per_n = {n: as_list(raw, "delays_ns") for n in n_values}
    elif isinstance(raw, dict) and "auto" in raw:
        auto = raw["auto"]
        points = _expect(auto, "points", int, "delays_ns.auto.", required=True)
        span = _expect(auto, "span_ns_over_n", (int, float), "delays_ns.auto.", required=True)
        if points < 2:
            raise ConfigError("delays_ns.auto.points: need at least 2")
        per_n = {}
        for n in n_values:
            taus = np.linspace(0.0, float(span) / n, points)
            if realization == IDENTITY_GATES:
                taus = np.unique(np.round(taus / ID_DURATION_NS) * ID_DURATION_NS)
            per_n[n] = tuple(float(t) for t in taus)
    elif isinstance(raw, dict):
        per_n = {}
        for n in n_values:
            key = str(n)
            if key not in raw:
                raise ConfigError(f"delays_ns.{key}: missing delays for N={n}")
            per_n[n] = as_list(raw[key], f"delays_ns.{key}")
    else:
        raise ConfigError("delays_ns: expected list, per-N map, or auto rule")

    for n, taus in per_n.items():
        for tau in taus:
            if tau < 0:
                raise ConfigError(f"delays_ns.{n}: delay {tau} is negative")
            if realization == IDENTITY_GATES and tau % ID_DURATION_NS != 0:
                raise ConfigError(
                    f"delays_ns.{n}: {tau} ns is not a multiple of "
                    f"{ID_DURATION_NS:.0f} ns (identity-gate realization)"
                )
    return per_n


def parse_config(raw: Mapping[str, Any], base_dir: Path | None = None) -> RunConfig:
    if not isinstance(raw, Mapping):
        raise ConfigError(": top level must be an object")
    graph_field = raw.get("graph", "ibmqx5")
    if not isinstance(graph_field, str):
        raise ConfigError("graph: expected a bundled name or file path")
    graph_source = graph_field
    if base_dir is not None and graph_field.endswith(".json"):
        graph_source = str((base_dir / graph_field).resolve())
    try:
        graph = load_graph(graph_source)
    except GraphFormatError as exc:
        raise ConfigError(f"graph: {exc}") from None

    n_range = raw.get("n_range", [1, 1])
    if (
        not isinstance(n_range, list)
        or len(n_range) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in n_range)
    ):
        raise ConfigError("n_range: expected [min, max]")
    lo, hi = n_range
    if not 1 <= lo <= hi:
        raise ConfigError("n_range: need 1 <= min <= max")
    if hi > graph.n_nodes:
        raise ConfigError(f"n_range: max {hi} exceeds the {graph.n_nodes}-qubit graph")
    n_values = tuple(range(lo, hi + 1))

    mode = _expect(raw, "mode", str, "", EXACT)
    if mode not in (EXACT, SAMPLED):
        raise ConfigError(f"mode: expected '{EXACT}' or '{SAMPLED}'")
    realization = _expect(raw, "delay_realization", str, "", IDENTITY_GATES)
    if realization not in (IDENTITY_GATES, CONTINUOUS):
        raise ConfigError(
            f"delay_realization: expected '{IDENTITY_GATES}' or '{CONTINUOUS}'"
        )
    shots = _expect(raw, "shots", int, "", 1000)
    if shots < 1:
        raise ConfigError("shots: must be >= 1")
    seed = _expect(raw, "seed", int, "", 0)

    chains: dict[int, QubitChain] = {}
    overrides = raw.get("chains", {})
    if not isinstance(overrides, dict):
        raise ConfigError("chains: expected a map of N to qubit lists")
    for n in n_values:
        key = str(n)
        try:
            if key in overrides:
                chains[n] = QubitChain.on_graph(graph, overrides[key])
            elif graph.name == "ibmqx5" and n in refdata.STUDY_CHAINS:
                chains[n] = QubitChain.on_graph(graph, refdata.STUDY_CHAINS[n])
            else:
                chains[n] = find_chain(graph, n)
        except (ValueError, NoChainError) as exc:
            raise ConfigError(f"chains.{key}: {exc}") from None

    delays = _resolve_delays(raw.get("delays_ns"), n_values, realization)
    noise = parse_noise(raw.get("noise"), "noise.")
    output_dir = _expect(raw, "output_dir", str, "", "ghzsim-out")
    return RunConfig(
        graph=graph,
        n_values=n_values,
        chains=chains,
        delays_ns=delays,
        noise=noise,
        shots=shots,
        mode=mode,
        delay_realization=realization,
        seed=seed,
        output_dir=output_dir,
    )


def _noise_dict(noise: NoiseModel) -> dict:
    def plain(v):
        if isinstance(v, dict):
            return {str(k): val for k, val in sorted(v.items())}
        return None if v == math.inf else v

    return {
        "t1_us": plain(noise.t1_us),
        "t2_us": plain(noise.t2_us),
        "t2c_us": noise.t2c_us,
        "p1": noise.p1,
        "p2": noise.p2,
        "readout_error": plain(noise.readout_error) or 0.0,
        "gate_time_noise": noise.gate_time_noise,
    }


def resolved_config_dict(config: RunConfig) -> dict:
    """Canonical, content-complete form of a config; the hash input."""
    return {
        "graph": {
            "name": config.graph.name,
            "nodes": list(config.graph.nodes),
            "edges": sorted(list(e) for e in config.graph.edges),
        },
        "n_values": list(config.n_values),
        "chains": {str(n): list(c.qubits) for n, c in sorted(config.chains.items())},
        "delays_ns": {str(n): list(d) for n, d in sorted(config.delays_ns.items())},
        "noise": _noise_dict(config.noise),
        "shots": config.shots,
        "mode": config.mode,
        "delay_realization": config.delay_realization,
        "seed": config.seed,
    }


def config_hash(config: RunConfig) -> str:
    canon = json.dumps(resolved_config_dict(config), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


# --------------------------------------------------------------- calibration


@dataclass(frozen=True)
class Calibration:
    timestamp: str
    t1_us: dict[int, float]
    t2_us: dict[int, float]
    readout_error: dict[int, float]
    cnot_error: dict[tuple[int, int], float]


def load_calibration(path: str | Path) -> Calibration:
    try:
        raw = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc.msg}") from None
    qubits = raw.get("qubits")
    if not isinstance(qubits, dict) or not qubits:
        raise ConfigError(f"{path}: qubits: expected a non-empty map")
    t1, t2, readout = {}, {}, {}
    for key, entry in qubits.items():
        q = int(key)
        path_q = f"qubits.{key}."
        t1[q] = float(_expect(entry, "t1_us", (int, float), path_q, required=True))
        t2[q] = float(_expect(entry, "t2_us", (int, float), path_q, required=True))
        readout[q] = float(_expect(entry, "readout_error", (int, float), path_q, 0.0))
        if t1[q] <= 0 or t2[q] <= 0:
            raise ConfigError(f"{path_q}: times must be positive")
        if t2[q] > 2 * t1[q] * (1 + 1e-12):
            raise ConfigError(f"{path_q}: t2_us exceeds 2*t1_us")
        if not 0 <= readout[q] <= 1:
            raise ConfigError(f"{path_q}readout_error: must be in [0, 1]")
    cnot = {}
    for i, entry in enumerate(raw.get("cnot_errors", [])):
        path_e = f"cnot_errors[{i}]."
        c = _expect(entry, "control", int, path_e, required=True)
        t = _expect(entry, "target", int, path_e, required=True)
        err = float(_expect(entry, "error", (int, float), path_e, required=True))
        if not 0 <= err <= 1:
            raise ConfigError(f"{path_e}error: must be in [0, 1]")
        cnot[(c, t)] = err
    return Calibration(str(raw.get("timestamp", "")), t1, t2, readout, cnot)


def noise_from_calibration(cal: Calibration, dephasing_only: bool = False) -> NoiseModel:
    """Build a noise model from calibration data.

    With ``dephasing_only`` the relaxation and readout channels are dropped,
    leaving the pure per-qubit coherence decay used for T2 predictions.
    """
    if dephasing_only:
        return NoiseModel(t2_us=dict(cal.t2_us))
    p2 = max(cal.cnot_error.values()) if cal.cnot_error else 0.0
    return NoiseModel(
        t1_us=dict(cal.t1_us),
        t2_us=dict(cal.t2_us),
        readout_error=dict(cal.readout_error),
        p2=p2,
    )


# ------------------------------------------------------------------ simulate


def _run_cell(args: tuple[ExperimentPlan, float]) -> ParityDataset:
    plan, tau = args
    return run_parity_scan(plan, tau)


def run_simulation(config: RunConfig, out_dir: Path, workers: int = 1) -> dict:
    """Execute every (N, tau) cell and write CSVs plus the manifest."""
    out_dir.mkdir(parents=True, exist_ok=True)
    digest = config_hash(config)
    cells = []
    for n in config.n_values:
        plan = config.plan_for(n)
        for tau_index, tau in enumerate(plan.delays_ns):
            cells.append((n, tau_index, plan, tau))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            datasets = list(pool.map(_run_cell, [(p, t) for _, _, p, t in cells]))
    else:
        datasets = [_run_cell((p, t)) for _, _, p, t in cells]

    files = []
    for (n, tau_index, _, tau), dataset in zip(cells, datasets):
        name = f"parity_N{n}_tau{tau_index:03d}.csv"
        comments = [f"config_hash={digest}", f"ghzsim={__version__}"]
        (out_dir / name).write_text(dataset_to_csv(dataset, comments))
        files.append(
            {
                "path": name,
                "n_qubits": n,
                "tau_ns": tau,
                "tau_index": tau_index,
                "seed_spawn_key": [n, tau_index],
            }
        )

    manifest = {
        "config_hash": digest,
        "config": resolved_config_dict(config),
        "files": files,
        "seed_scheme": "SeedSequence(master, spawn_key=(n_qubits, tau_index, phi_index))",
        "kernel_backend": backend_name(),
        "version": __version__,
    }
    (out_dir / "manifest.json").write_text(
        json.dumps(manifest, sort_keys=True, indent=2) + "\n"
    )
    return manifest


# ------------------------------------------------------------------- analyze


def _read_datasets(input_dir: Path, force: bool) -> tuple[dict, list[tuple[str, ParityDataset]]]:
    paths = sorted(input_dir.glob("parity_*.csv"))
    if not paths:
        raise DataError(f"no parity_*.csv datasets under {input_dir}")
    hashes = {}
    loaded = []
    for path in paths:
        text = path.read_text()
        for line in text.splitlines():
            if line.startswith("# config_hash="):
                hashes.setdefault(line.split("=", 1)[1].strip(), []).append(path.name)
                break
        try:
            loaded.append((path.name, dataset_from_csv(text)))
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from None
    if len(hashes) > 1 and not force:
        raise DataError(
            f"datasets carry {len(hashes)} different config hashes "
            f"({', '.join(sorted(hashes))}); rerun with --force to mix"
        )
    return hashes, loaded


def _svg_plot(
    path: Path,
    title: str,
    xlabel: str,
    ylabel: str,
    series: list[dict],
) -> None:
    """Tiny hand-rolled SVG scatter/line plot; series dicts carry x, y,
    optional yerr, a color, and draw mode ("points" or "line")."""
    width, height, margin = 640, 440, 60
    xs = np.concatenate([np.asarray(s["x"], dtype=float) for s in series])
    ys = np.concatenate([np.asarray(s["y"], dtype=float) for s in series])
    x0, x1 = float(xs.min()), float(xs.max())
    y0, y1 = float(ys.min()), float(ys.max())
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0
    pad = 0.05 * (y1 - y0)
    y0, y1 = y0 - pad, y1 + pad

    def sx(x):
        return margin + (x - x0) / (x1 - x0) * (width - 2 * margin)

    def sy(y):
        return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<text x="{width / 2}" y="{height - 12}" text-anchor="middle" font-size="12">{xlabel}</text>',
        f'<text x="16" y="{height / 2}" text-anchor="middle" font-size="12" '
        f'transform="rotate(-90 16 {height / 2})">{ylabel}</text>',
        f'<line x1="{margin}" y1="{height - margin}" x2="{width - margin}" '
        f'y2="{height - margin}" stroke="black"/>',
        f'<line x1="{margin}" y1="{margin}" x2="{margin}" y2="{height - margin}" stroke="black"/>',
    ]
    for frac in (0.0, 0.25, 0.5, 0.75, 1.0):
        xv = x0 + frac * (x1 - x0)
        yv = y0 + frac * (y1 - y0)
        parts.append(
            f'<text x="{sx(xv):.1f}" y="{height - margin + 16}" text-anchor="middle" '
            f'font-size="10">{xv:.3g}</text>'
        )
        parts.append(
            f'<text x="{margin - 6}" y="{sy(yv):.1f}" text-anchor="end" '
            f'font-size="10">{yv:.3g}</text>'
        )
    for s in series:
        color = s.get("color", "steelblue")
        x = np.asarray(s["x"], dtype=float)
        y = np.asarray(s["y"], dtype=float)
        if s.get("mode", "points") == "line":
            pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(x, y))
            parts.append(
                f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1.5"/>'
            )
        else:
            yerr = s.get("yerr")
            for i, (a, b) in enumerate(zip(x, y)):
                if yerr is not None and yerr[i] > 0:
                    parts.append(
                        f'<line x1="{sx(a):.2f}" y1="{sy(b - yerr[i]):.2f}" '
                        f'x2="{sx(a):.2f}" y2="{sy(b + yerr[i]):.2f}" stroke="{color}"/>'
                    )
                parts.append(
                    f'<circle cx="{sx(a):.2f}" cy="{sy(b):.2f}" r="3" fill="{color}"/>'
                )
    parts.append("</svg>")
    path.write_text("\n".join(parts) + "\n")


_COLORS = [
    "steelblue", "firebrick", "seagreen", "darkorange",
    "purple", "teal", "crimson", "olive", "navy",
]


def run_analysis(input_dir: Path, out_dir: Path, force: bool = False, svg: bool = False) -> dict:
    """Fit all datasets found in ``input_dir`` and write the report files."""
    hashes, loaded = _read_datasets(input_dir, force)
    out_dir.mkdir(parents=True, exist_ok=True)
    plot_dir = out_dir / "plotdata"
    plot_dir.mkdir(exist_ok=True)

    hash_comment = f"# config_hash={'+'.join(sorted(hashes)) or 'unknown'}"

    def write_csv(path: Path, lines: list[str]) -> None:
        path.write_text("\n".join([hash_comment, *lines]) + "\n")

    by_n: dict[int, list[ParityDataset]] = {}
    for _, ds in loaded:
        by_n.setdefault(ds.n_qubits, []).append(ds)
    for n in by_n:
        by_n[n].sort(key=lambda d: d.tau_ns)

    sinusoid_rows = ["n_qubits,tau_ns,amplitude,amplitude_err,phase,phase_err,rss,points"]
    parity_fits: dict[tuple[int, float], analysis.SinusoidFit] = {}
    for n, group in sorted(by_n.items()):
        for ds in group:
            fit = analysis.fit_parity(ds)
            parity_fits[(n, ds.tau_ns)] = fit
            sinusoid_rows.append(
                f"{n},{_fmt(ds.tau_ns)},{_fmt(fit.amplitude)},{_fmt(fit.amplitude_err)},"
                f"{_fmt(fit.phase)},{_fmt(fit.phase_err)},{_fmt(fit.rss)},{fit.n_points}"
            )
    write_csv(out_dir / "sinusoid_fits.csv", sinusoid_rows)

    decay_rows = ["n_qubits,c_init,c_init_err,t2n_us,t2n_err"]
    decay_fits: dict[int, analysis.DecayFit] = {}
    notes = []
    for n, group in sorted(by_n.items()):
        if len(group) < 3:
            notes.append(f"N={n}: fewer than 3 delays, decay fit skipped")
            continue
        try:
            fit = analysis.fit_sweep_decay(group)
        except analysis.FitError as exc:
            notes.append(f"N={n}: decay fit failed: {exc}")
            continue
        decay_fits[n] = fit
        decay_rows.append(
            f"{n},{_fmt(fit.c_init)},{_fmt(fit.c_init_err)},"
            f"{_fmt(fit.t2n_us)},{_fmt(fit.t2n_err)}"
        )
    write_csv(out_dir / "decay_fits.csv", decay_rows)

    initial_points = []
    for n, group in sorted(by_n.items()):
        first = group[0]
        initial_points.append((n, analysis.fit_parity(first).amplitude))
    initial_fit = None
    if len({n for n, _ in initial_points}) >= 2:
        initial_fit = analysis.fit_initial_coherence(initial_points)
        write_csv(
            out_dir / "initial_coherence.csv",
            [
                "intercept,intercept_err,slope,slope_err",
                f"{_fmt(initial_fit.intercept)},{_fmt(initial_fit.intercept_err)},"
                f"{_fmt(initial_fit.slope)},{_fmt(initial_fit.slope_err)}",
            ],
        )

    scaling: dict[str, dict[str, analysis.ScalingFit]] = {}
    if 1 in decay_fits and len(decay_fits) >= 3:
        t2_by_n = {n: (f.t2n_us, f.t2n_err) for n, f in decay_fits.items()}
        ratios = analysis.propagate_ratios(t2_by_n)
        scaling_rows = [
            "model,variant,term,value,std_err,ci99_low,ci99_high,r_squared,dof"
        ]
        for weighted in (False, True):
            variant = "weighted" if weighted else "unweighted"
            fits = analysis.fit_scaling(ratios, weighted=weighted)
            scaling[variant] = fits
            for model, fit in fits.items():
                for term, value in fit.coefficients.items():
                    lo, hi = fit.ci99[term]
                    scaling_rows.append(
                        f"{model},{variant},{term},{_fmt(value)},"
                        f"{_fmt(fit.std_errors[term])},{_fmt(lo)},{_fmt(hi)},"
                        f"{_fmt(fit.r_squared)},{fit.dof}"
                    )
        write_csv(out_dir / "scaling_fits.csv", scaling_rows)
        ratio_rows = ["n_qubits,ratio,ratio_err"]
        for n in sorted(ratios):
            r, s = ratios[n]
            ratio_rows.append(f"{n},{_fmt(r)},{_fmt(s)}")
        write_csv(out_dir / "rate_ratios.csv", ratio_rows)
    elif decay_fits:
        notes.append("scaling fits need N=1 and at least 3 sweeps; skipped")

    # Plot data: parity curves with fits, and per-N coherence decay
    # (linear and log columns; the log view makes exponential decay affine).
    for n, group in sorted(by_n.items()):
        for idx, ds in enumerate(group):
            fit = parity_fits[(n, ds.tau_ns)]
            phis = ds.phis()
            model = fit.amplitude * np.sin(n * phis + fit.phase)
            rows = ["phi_rad,parity,delta_p,fit_parity"]
            for p, m in zip(ds.points, model):
                rows.append(f"{_fmt(p.phi)},{_fmt(p.parity)},{_fmt(p.delta_p)},{_fmt(m)}")
            write_csv(plot_dir / f"parity_N{n}_tau{idx:03d}.csv", rows)
        if n in decay_fits:
            fit = decay_fits[n]
            rows = [
                "tau_ns,coherence,coherence_err,fit_coherence,"
                "log10_coherence,log10_fit_coherence"
            ]
            for ds in group:
                pf = parity_fits[(n, ds.tau_ns)]
                model = fit.c_init * math.exp(-ds.tau_ns / 1000.0 / fit.t2n_us)
                log_c = math.log10(pf.amplitude) if pf.amplitude > 0 else float("nan")
                rows.append(
                    f"{_fmt(ds.tau_ns)},{_fmt(pf.amplitude)},{_fmt(pf.amplitude_err)},"
                    f"{_fmt(model)},{_fmt(log_c)},{_fmt(math.log10(model))}"
                )
            write_csv(plot_dir / f"coherence_vs_tau_N{n}.csv", rows)

    if svg:
        for n, group in sorted(by_n.items()):
            ds = group[0]
            fit = parity_fits[(n, ds.tau_ns)]
            dense = np.linspace(0, math.pi, 200)
            _svg_plot(
                out_dir / f"parity_N{n}_tau000.svg",
                f"Parity oscillations, N={n}, tau={ds.tau_ns:g} ns",
                "phi (rad)",
                "parity",
                [
                    {"x": ds.phis(), "y": ds.parities(), "yerr": ds.errors(),
                     "color": "firebrick"},
                    {"x": dense, "y": fit.amplitude * np.sin(n * dense + fit.phase),
                     "mode": "line"},
                ],
            )
        if decay_fits:
            for log_scale in (False, True):
                series = []
                for i, (n, fit) in enumerate(sorted(decay_fits.items())):
                    group = by_n[n]
                    taus = np.array([d.tau_ns for d in group])
                    cs = np.array(
                        [parity_fits[(n, d.tau_ns)].amplitude for d in group]
                    )
                    dense = np.linspace(taus.min(), taus.max(), 100)
                    model = fit.c_init * np.exp(-dense / 1000.0 / fit.t2n_us)
                    color = _COLORS[i % len(_COLORS)]
                    if log_scale:
                        keep = cs > 0
                        series.append(
                            {"x": taus[keep], "y": np.log10(cs[keep]), "color": color}
                        )
                        series.append(
                            {"x": dense, "y": np.log10(model), "mode": "line",
                             "color": color}
                        )
                    else:
                        series.append({"x": taus, "y": cs, "color": color})
                        series.append(
                            {"x": dense, "y": model, "mode": "line", "color": color}
                        )
                name = "coherence_vs_tau_log.svg" if log_scale else "coherence_vs_tau.svg"
                ylabel = "log10 coherence" if log_scale else "coherence"
                _svg_plot(
                    out_dir / name, "Coherence decay", "tau (ns)", ylabel, series
                )

    report = {
        "config_hashes": sorted(hashes),
        "n_values": sorted(by_n),
        "decay_fits": {
            str(n): {
                "c_init": f.c_init,
                "c_init_err": f.c_init_err,
                "t2n_us": f.t2n_us,
                "t2n_err": f.t2n_err,
            }
            for n, f in decay_fits.items()
        },
        "initial_coherence": (
            None
            if initial_fit is None
            else {
                "intercept": initial_fit.intercept,
                "slope": initial_fit.slope,
                "slope_err": initial_fit.slope_err,
            }
        ),
        "scaling": {
            variant: {
                model: {
                    "coefficients": fit.coefficients,
                    "ci99": {k: list(v) for k, v in fit.ci99.items()},
                    "r_squared": fit.r_squared,
                }
                for model, fit in fits.items()
            }
            for variant, fits in scaling.items()
        },
        "notes": notes,
    }
    (out_dir / "report.json").write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    return report


# ----------------------------------------------------------- reproduce-paper


def _variant_score(fits: dict[str, analysis.ScalingFit]) -> float:
    score = 0.0
    for model, fit in fits.items():
        pub = refdata.PUBLISHED_SCALING[model]
        score += abs(fit.r_squared - pub["r_squared"])
        for term, (lo, hi) in pub["ci99"].items():
            clo, chi = fit.ci99[term]
            score += abs(clo - lo) + abs(chi - hi)
    return score


def reproduce_paper_report(calibration: Calibration | None = None) -> str:
    """Re-derive the scaling statistics from the published coherence times."""
    lines = []
    ratios = analysis.propagate_ratios(refdata.MEASURED_T2_US)
    lines.append("Published GHZ coherence times and normalized decoherence rates")
    lines.append(f"{'N':>2} {'T2 [us]':>10} {'err':>6} {'r_N':>8} {'err':>7}")
    for n in sorted(refdata.MEASURED_T2_US):
        t2, err = refdata.MEASURED_T2_US[n]
        r, sr = ratios[n]
        lines.append(f"{n:>2} {t2:>10.2f} {err:>6.2f} {r:>8.3f} {sr:>7.3f}")
    lines.append("")

    scores = {}
    for weighted in (False, True):
        variant = "weighted" if weighted else "unweighted"
        fits = analysis.fit_scaling(ratios, weighted=weighted)
        scores[variant] = _variant_score(fits)
        lines.append(f"Scaling fits, {variant} (99% CI, Student-t, reduced-chi2 scaled)")
        for model, fit in fits.items():
            pub = refdata.PUBLISHED_SCALING[model]
            lines.append(
                f"  {model:<15} R^2 = {fit.r_squared:.4f}"
                f"  (published {pub['r_squared']:.3f},"
                f" delta {fit.r_squared - pub['r_squared']:+.4f})"
            )
            for term, value in fit.coefficients.items():
                lo, hi = fit.ci99[term]
                ref = pub["ci99"].get(term)
                ref_txt = (
                    f"  (published [{ref[0]:.3f}, {ref[1]:.3f}])" if ref else ""
                )
                lines.append(
                    f"    {term:<6} = {value:+.4f}  CI99 [{lo:.3f}, {hi:.3f}]{ref_txt}"
                )
        lines.append("")

    best = min(scores, key=scores.get)
    lines.append(
        f"Closest variant to the published statistics: {best} "
        f"(score {scores[best]:.3f} vs {max(scores.values()):.3f}); the study's "
        "own weighting is not stated, so neither variant is asserted as ground truth."
    )

    if calibration is not None:
        lines.append("")
        lines.append("Calibration-based T2 predictions (uncorrelated dephasing)")
        lines.append(f"{'N':>2} {'predicted [us]':>14} {'reference [us]':>15} {'delta':>8}")
        for n, chain in sorted(refdata.STUDY_CHAINS.items()):
            if n not in refdata.CALCULATED_T2_US:
                continue
            try:
                pred = analysis.predict_t2n_from_calibration(calibration.t2_us, chain)
            except KeyError as exc:
                lines.append(f"{n:>2}  calibration incomplete: {exc}")
                continue
            ref = refdata.CALCULATED_T2_US[n]
            lines.append(f"{n:>2} {pred:>14.2f} {ref:>15.2f} {pred - ref:>+8.2f}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------- main


def _cmd_route(args) -> int:
    graph = load_graph(args.graph)
    chain = find_chain(graph, args.n, anchor=args.anchor)
    circuit = build_ghz(graph, chain)
    gate_count = len(circuit.gates)
    print(f"graph: {graph.name or args.graph} ({graph.n_nodes} qubits)")
    print(f"chain: {','.join(str(q) for q in chain.qubits)}")
    print(f"reversals: {chain.reversal_count}")
    print(f"gates: {gate_count} ({circuit.count('cx')} cx, {circuit.count('h')} h)")
    return 0


def _cmd_simulate(args) -> int:
    path = Path(args.config)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    config = parse_config(raw, base_dir=path.parent)
    if args.seed is not None:
        config = RunConfig(**{**config.__dict__, "seed": args.seed})
    if args.mode is not None:
        config = RunConfig(**{**config.__dict__, "mode": args.mode})
    out_dir = Path(args.output_dir or config.output_dir)
    manifest = run_simulation(config, out_dir, workers=args.workers)
    print(f"wrote {len(manifest['files'])} datasets to {out_dir}")
    print(f"config hash: {manifest['config_hash']}")
    return 0


def _cmd_analyze(args) -> int:
    report = run_analysis(
        Path(args.input_dir),
        Path(args.output_dir or (Path(args.input_dir) / "analysis")),
        force=args.force,
        svg=args.svg,
    )
    for n, fit in sorted(report["decay_fits"].items(), key=lambda kv: int(kv[0])):
        print(
            f"N={n}: c_init={fit['c_init']:.4f} "
            f"T2={fit['t2n_us']:.3f} +/- {fit['t2n_err']:.3f} us"
        )
    for note in report["notes"]:
        print(f"note: {note}")
    return 0


def _cmd_reproduce_paper(args) -> int:
    calibration = load_calibration(args.calibration) if args.calibration else None
    sys.stdout.write(reproduce_paper_report(calibration))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ghzsim",
        description="GHZ-state decoherence simulator and analysis toolkit",
    )
    parser.add_argument("--version", action="version", version=f"ghzsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("route", help="select a qubit chain on a coupling graph")
    p.add_argument("--graph", default="ibmqx5", help="bundled name or JSON path")
    p.add_argument("-n", type=int, required=True, help="chain length")
    p.add_argument("--anchor", type=int, default=None, help="required start qubit")
    p.set_defaults(func=_cmd_route)

    p = sub.add_parser("simulate", help="run a configured experiment")
    p.add_argument("--config", required=True, help="JSON run configuration")
    p.add_argument("-o", "--output-dir", default=None)
    p.add_argument("--seed", type=int, default=None, help="override config seed")
    p.add_argument("--mode", choices=[EXACT, SAMPLED], default=None)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("analyze", help="fit datasets and write reports")
    p.add_argument("input_dir")
    p.add_argument("-o", "--output-dir", default=None)
    p.add_argument("--force", action="store_true", help="allow mixed config hashes")
    p.add_argument("--svg", action="store_true", help="also render SVG plots")
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser(
        "reproduce-paper",
        help="recompute scaling statistics from the published coherence table",
    )
    p.add_argument("--calibration", default=None, help="calibration JSON file")
    p.set_defaults(func=_cmd_reproduce_paper)
    return parser


_ERROR_CATEGORIES = [
    (ConfigError, "config", 2),
    (GraphFormatError, "config", 2),
    (NoChainError, "routing", 4),
    (DataError, "data", 5),
    (OSError, "io", 3),
]


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - single reporting point
        for exc_type, category, code in _ERROR_CATEGORIES:
            if isinstance(exc, exc_type):
                print(
                    json.dumps({"category": category, "message": str(exc)}),
                    file=sys.stderr,
                )
                return code
        print(
            json.dumps({"category": "internal", "message": f"{type(exc).__name__}: {exc}"}),
            file=sys.stderr,
        )
        return 1


if __name__ == "__main__":
    sys.exit(main())
