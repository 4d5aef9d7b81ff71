"""Acceptance suite: one test per acceptance criterion, at stated tolerances.

Each test prints a single PASS/FAIL line (visible with ``pytest -s``) before
asserting, so the suite doubles as a checklist report.
"""

import math
import time

import numpy as np
import pytest

from ghzsim.analysis import (
    fit_initial_coherence,
    fit_parity,
    fit_scaling,
    fit_sweep_decay,
    predict_t2n_from_calibration,
    propagate_ratios,
)
from ghzsim.circuit import analysis_rotation, build_ghz, u3_matrix
from ghzsim.cli import reproduce_paper_report
from ghzsim.protocol import ExperimentPlan, run_delay_sweep, run_parity_scan
from ghzsim.qasm import emit_qasm, parse_qasm
from ghzsim.refdata import MEASURED_T2_US, PUBLISHED_SCALING, STUDY_CHAINS
from ghzsim.simulator import NoiseModel, coherence_of, evolve
from ghzsim.topology import QubitChain, find_chain

US = 1000.0
T2_REF = 48.34  # measured single-qubit coherence time, us


def report(criterion: str, ok: bool, detail: str) -> None:
    print(f"ACCEPTANCE {criterion}: {'PASS' if ok else 'FAIL'} - {detail}")
    assert ok, f"{criterion}: {detail}"


def _ratio_sweep(ibmqx5, noise: NoiseModel, span_for_n) -> dict[int, tuple[float, float]]:
    t2n = {}
    for n in range(1, 9):
        delays = tuple(np.linspace(0.0, span_for_n(n) * US, 9))
        plan = ExperimentPlan(
            graph=ibmqx5, chain=find_chain(ibmqx5, n), delays_ns=delays,
            noise=noise, delay_realization="continuous",
        )
        fit = fit_sweep_decay(run_delay_sweep(plan))
        t2n[n] = (fit.t2n_us, fit.t2n_err)
    return t2n


def test_criterion_1_linear_decoherence_scaling(ibmqx5):
    start = time.perf_counter()
    t2n = _ratio_sweep(ibmqx5, NoiseModel(t2_us=T2_REF), lambda n: 2 * T2_REF / n)
    ratios = propagate_ratios(t2n)
    worst = max(abs(ratios[n][0] - n) / n for n in range(1, 9))
    linear = fit_scaling(ratios, weighted=False)["linear"]
    beta, alpha = linear["beta"], linear["alpha"]
    elapsed = time.perf_counter() - start
    ok = (
        worst <= 0.02
        and 0.99 <= beta <= 1.01
        and -0.05 <= alpha <= 0.05
        and elapsed < 120.0
    )
    report(
        "1 linear scaling",
        ok,
        f"max |r_N - N|/N = {worst:.2e}, beta = {beta:.6f}, "
        f"alpha = {alpha:.2e}, {elapsed:.1f}s",
    )


def test_criterion_2_superdecoherence_contrast(ibmqx5):
    t2n = _ratio_sweep(ibmqx5, NoiseModel(t2c_us=T2_REF), lambda n: 2 * T2_REF / n**2)
    ratios = propagate_ratios(t2n)
    worst = max(abs(ratios[n][0] - n**2) / n**2 for n in range(1, 9))
    fits = fit_scaling(ratios, weighted=False)
    gamma = fits["quad_no_linear"]["gamma"]
    ok = (
        worst <= 0.04
        and 0.97 <= gamma <= 1.03
        and fits["quad_no_linear"].r_squared > fits["linear"].r_squared
    )
    report(
        "2 superdecoherence",
        ok,
        f"max |r_N - N^2|/N^2 = {worst:.2e}, gamma = {gamma:.6f}, "
        f"R2(quad) = {fits['quad_no_linear'].r_squared:.4f} vs "
        f"R2(lin) = {fits['linear'].r_squared:.4f}",
    )


def _table_fit_deltas():
    ratios = propagate_ratios(MEASURED_T2_US)
    out = {}
    for weighted in (False, True):
        variant = "weighted" if weighted else "unweighted"
        fits = fit_scaling(ratios, weighted=weighted)
        r2_delta = {
            model: abs(fits[model].r_squared - PUBLISHED_SCALING[model]["r_squared"])
            for model in fits
        }
        lo, hi = fits["linear"].ci99["beta"]
        pub_lo, pub_hi = PUBLISHED_SCALING["linear"]["ci99"]["beta"]
        out[variant] = {
            "r2_delta": r2_delta,
            "ci": (lo, hi),
            "ci_delta": (abs(lo - pub_lo), abs(hi - pub_hi)),
        }
    return out


def test_criterion_3_published_r_squared_regression():
    deltas = _table_fit_deltas()
    matching = [
        v for v, d in deltas.items() if all(x <= 0.01 for x in d["r2_delta"].values())
    ]
    detail = "; ".join(
        f"{v}: dR2 = {', '.join(f'{x:.4f}' for x in d['r2_delta'].values())}"
        for v, d in deltas.items()
    )
    ok = bool(matching) and "Closest variant" in reproduce_paper_report()
    report("3 R^2 regression", ok, f"matching variants: {matching or 'none'} ({detail})")


def test_criterion_3_published_beta_confidence_interval():
    # Known shortfall: under the pinned fit recipe (Student-t quantiles,
    # reduced-chi-square covariance) neither weighting variant places the
    # linear-model beta interval within 0.05 of the published endpoints.
    # The criterion is asserted as stated; see the decisions ledger.
    deltas = _table_fit_deltas()
    matching = [
        v for v, d in deltas.items() if max(d["ci_delta"]) <= 0.05
    ]
    detail = "; ".join(
        f"{v}: CI = [{d['ci'][0]:.3f}, {d['ci'][1]:.3f}], "
        f"delta = ({d['ci_delta'][0]:.3f}, {d['ci_delta'][1]:.3f})"
        for v, d in deltas.items()
    )
    report(
        "3 beta CI regression",
        bool(matching),
        f"published [0.968, 1.148]; {detail}",
    )


def test_criterion_4_parity_oscillation_fidelity(ibmqx5):
    worst_amp = worst_phase = worst_resid = 0.0
    for n in range(1, 9):
        plan = ExperimentPlan(
            graph=ibmqx5, chain=find_chain(ibmqx5, n), delays_ns=(0.0,)
        )
        dataset = run_parity_scan(plan, 0.0)
        fit = fit_parity(dataset)
        worst_amp = max(worst_amp, abs(fit.amplitude - 1.0))
        worst_phase = max(worst_phase, abs(fit.phase))
        resid = max(
            abs(p.parity - math.sin(n * p.phi)) for p in dataset.points
        )
        worst_resid = max(worst_resid, resid)
    ok = worst_amp < 1e-8 and worst_phase < 1e-8 and worst_resid < 1e-10
    report(
        "4 parity fidelity",
        ok,
        f"max |C-1| = {worst_amp:.2e}, max |phase| = {worst_phase:.2e}, "
        f"max residual = {worst_resid:.2e}",
    )


def test_criterion_5_statistical_error_formula(ibmqx5):
    parities, deltas = [], []
    for seed in range(200):
        plan = ExperimentPlan(
            graph=ibmqx5, chain=QubitChain.on_graph(ibmqx5, STUDY_CHAINS[2]),
            delays_ns=(0.0,), mode="sampled", shots=1000, seed=seed,
            phi_grid_size=9,
        )
        point = run_parity_scan(plan, 0.0).points[1]
        assert point.phi == pytest.approx(math.pi / 8)
        parities.append(point.parity)
        deltas.append(point.delta_p)
    empirical = float(np.std(parities, ddof=1))
    reported = float(np.mean(deltas))
    ok = abs(empirical - reported) / reported < 0.20
    report(
        "5 delta_p formula",
        ok,
        f"empirical std = {empirical:.5f}, reported delta_p = {reported:.5f}, "
        f"ratio = {empirical / reported:.3f}",
    )


def test_criterion_6_constrained_topology_circuits(ibmqx5):
    worst = 0.0
    for n in range(1, 10):
        chain = find_chain(ibmqx5, n)
        circ = build_ghz(ibmqx5, chain)
        worst = max(worst, abs(coherence_of(evolve(circ)) - 1.0))
        assert parse_qasm(emit_qasm(circ)) == circ
    report(
        "6 topology circuits",
        worst < 1e-12,
        f"N = 1..9 prepared, max |C-1| = {worst:.2e}, OpenQASM round-trips exact",
    )


def test_criterion_7_u3_mapping():
    rng = np.random.default_rng(4242)
    worst = 0.0
    for phi in rng.uniform(-2 * math.pi, 2 * math.pi, size=1000):
        u, params = analysis_rotation(phi)
        worst = max(worst, float(np.abs(u3_matrix(*params) - u).max()))
    report("7 u3 mapping", worst < 1e-12, f"max entrywise deviation = {worst:.2e}")


def test_criterion_8_calibration_predictor(ibmqx5):
    uniform = {q: 44.4 for q in ibmqx5.nodes}
    exact = all(
        predict_t2n_from_calibration(uniform, STUDY_CHAINS[n]) == pytest.approx(44.4 / n)
        for n in range(1, 9)
    )

    heterogeneous = {1: 35.0, 2: 52.0, 3: 41.0, 4: 61.5, 5: 47.0}
    chain = QubitChain.on_graph(ibmqx5, (1, 2, 3, 4, 5))
    predicted = predict_t2n_from_calibration(heterogeneous, chain)
    noise = NoiseModel(t2_us=heterogeneous)  # dephasing only
    delays = tuple(np.linspace(0.0, 2 * predicted * US, 8))
    plan = ExperimentPlan(
        graph=ibmqx5, chain=chain, delays_ns=delays, noise=noise,
        delay_realization="continuous",
    )
    fitted = fit_sweep_decay(run_delay_sweep(plan)).t2n_us
    rel = abs(fitted - predicted) / predicted
    ok = exact and rel < 0.02
    report(
        "8 calibration predictor",
        ok,
        f"uniform exact = {exact}, heterogeneous: predicted {predicted:.3f} us "
        f"vs fitted {fitted:.3f} us ({100 * rel:.3f}%)",
    )


def test_criterion_9_initial_coherence_trend(ibmqx5):
    p = 1.0 - math.sqrt(0.88)  # two single-qubit gates at N=1 give C(1,0) = 0.88
    noise = NoiseModel(p1=p, p2=p)
    fitted, predicted = [], []
    for n in range(1, 9):
        chain = QubitChain.on_graph(ibmqx5, STUDY_CHAINS[n])
        plan = ExperimentPlan(
            graph=ibmqx5, chain=chain, delays_ns=(0.0,), noise=noise,
            mode="sampled", shots=2000, seed=2026,
        )
        fit = fit_parity(run_parity_scan(plan, 0.0))
        fitted.append((n, fit.amplitude))
        prep = build_ghz(ibmqx5, chain)
        n_single = prep.count("h") + n
        n_double = prep.count("cx")
        predicted.append((n, (1 - p) ** (n_single + n_double)))

    amplitudes = [c for _, c in fitted]
    monotone = all(a >= b for a, b in zip(amplitudes, amplitudes[1:]))
    slope = fit_initial_coherence(fitted).slope
    slope_pred = fit_initial_coherence(predicted).slope
    ok = (
        abs(amplitudes[0] - 0.88) < 0.03
        and monotone
        and slope < 0
        and abs(slope - slope_pred) <= 0.5 * abs(slope_pred)
    )
    report(
        "9 initial coherence",
        ok,
        f"C(1,0) = {amplitudes[0]:.3f}, monotone = {monotone}, "
        f"slope = {slope:.4f} vs prediction {slope_pred:.4f}",
    )
