import math

import numpy as np
import pytest

from ghzsim.analysis import (
    FitError,
    coherence_sweep_points,
    fit_decay,
    fit_initial_coherence,
    fit_parity,
    fit_scaling,
    fit_sweep_decay,
    predict_t2n_from_calibration,
    propagate_ratios,
)
from ghzsim.circuit import build_ghz
from ghzsim.protocol import ExperimentPlan, ParityDataset, ParityPoint, run_delay_sweep
from ghzsim.refdata import MEASURED_T2_US
from ghzsim.simulator import NoiseModel
from ghzsim.topology import find_chain

US = 1000.0


def synthetic_dataset(n, amplitude, phase, grid=None, noise=None, errors=None):
    phis = np.linspace(0, math.pi, grid or (4 * n + 1))
    values = amplitude * np.sin(n * phis + phase)
    if noise is not None:
        values = values + noise
    errs = errors if errors is not None else np.zeros_like(phis)
    points = tuple(
        ParityPoint(float(p), float(v), float(e), 1000 if e else 0)
        for p, v, e in zip(phis, values, errs)
    )
    return ParityDataset(n, 0.0, points)


def test_fit_parity_exact_recovery():
    fit = fit_parity(synthetic_dataset(2, 0.8, 0.0, grid=9))
    assert fit.amplitude == pytest.approx(0.8, abs=1e-10)
    assert fit.phase == pytest.approx(0.0, abs=1e-10)

    fit = fit_parity(synthetic_dataset(3, 0.5, 0.3))
    assert fit.amplitude == pytest.approx(0.5, abs=1e-10)
    assert fit.phase == pytest.approx(0.3, abs=1e-10)
    assert fit.rss < 1e-20


def test_fit_parity_amplitude_is_nonnegative():
    fit = fit_parity(synthetic_dataset(2, 0.4, math.pi))  # negative-looking signal
    assert fit.amplitude == pytest.approx(0.4, abs=1e-10)
    assert abs(fit.phase) == pytest.approx(math.pi, abs=1e-10)


def test_fit_parity_weights_downweight_noisy_points():
    rng = np.random.default_rng(3)
    n = 2
    errors = np.full(9, 0.01)
    noise = rng.normal(0, 0.01, size=9)
    # corrupt one point but give it a huge error bar
    noise[4] += 2.0
    errors[4] = 5.0
    fit = fit_parity(synthetic_dataset(n, 0.7, 0.0, grid=9, noise=noise, errors=errors))
    assert fit.amplitude == pytest.approx(0.7, abs=0.02)
    assert fit.amplitude_err < 0.02


def test_fit_parity_errors():
    with pytest.raises(FitError, match="3"):
        fit_parity(synthetic_dataset(1, 1.0, 0.0, grid=2))
    degenerate = ParityDataset(
        1, 0.0, tuple(ParityPoint(0.5, 0.1, 0.0, 0) for _ in range(5))
    )
    with pytest.raises(FitError, match="singular"):
        fit_parity(degenerate)


def test_fit_parity_offset_flag():
    phis = np.linspace(0, math.pi, 9)
    values = 0.6 * np.sin(2 * phis) + 0.2
    ds = ParityDataset(
        2, 0.0, tuple(ParityPoint(float(p), float(v), 0.0, 0) for p, v in zip(phis, values))
    )
    fit = fit_parity(ds, include_offset=True)
    assert fit.amplitude == pytest.approx(0.6, abs=1e-10)


def test_fit_initial_coherence_exact_line():
    points = [(n, 1.0 - 0.12 * n) for n in range(1, 9)]
    fit = fit_initial_coherence(points)
    assert fit.intercept == pytest.approx(1.0, abs=1e-12)
    assert fit.slope == pytest.approx(-0.12, abs=1e-12)


def test_fit_initial_coherence_constant():
    fit = fit_initial_coherence([(n, 0.5) for n in range(1, 5)])
    assert fit.slope == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(FitError):
        fit_initial_coherence([(2, 0.5), (2, 0.6)])


def test_fit_initial_coherence_against_gate_count_prediction(ibmqx5):
    """Depolarizing gate errors: fitted slope within 15% of the first-order
    prediction from per-circuit gate counts."""
    p = 0.02
    noise = NoiseModel(p1=p, p2=p)
    measured = []
    predicted = []
    for n in range(1, 7):
        chain = find_chain(ibmqx5, n)
        plan = ExperimentPlan(
            graph=ibmqx5, chain=chain, delays_ns=(0.0,), noise=noise
        )
        fit = fit_parity(run_delay_sweep(plan)[0])
        measured.append((n, fit.amplitude))
        prep = build_ghz(ibmqx5, chain)
        n1 = prep.count("h") + n  # prep Hadamards + one analysis rotation per qubit
        n2 = prep.count("cx")
        predicted.append((n, (1 - p) ** n1 * (1 - p) ** n2))
    slope = fit_initial_coherence(measured).slope
    slope_pred = fit_initial_coherence(predicted).slope
    assert slope < 0
    assert abs(slope - slope_pred) <= 0.15 * abs(slope_pred)


def test_fit_decay_exact_model_recovery():
    taus = np.linspace(0, 30, 7)
    points = [(t, 0.9 * math.exp(-t / 10.0)) for t in taus]
    fit = fit_decay(points)
    assert fit.c_init == pytest.approx(0.9, abs=1e-8)
    assert fit.t2n_us == pytest.approx(10.0, abs=1e-8)


def test_fit_decay_input_validation():
    with pytest.raises(FitError, match="3"):
        fit_decay([(0, 1.0), (1, 0.5)])
    with pytest.raises(FitError, match="log seed"):
        fit_decay([(0, 1.0), (1, 0.5), (2, -0.1)])


def test_fit_decay_recovers_t2_over_n(ibmqx5):
    t2, n = 48.34, 4
    taus = tuple(np.linspace(0, 2 * t2 / n * US, 8))
    plan = ExperimentPlan(
        graph=ibmqx5, chain=find_chain(ibmqx5, n), delays_ns=taus,
        noise=NoiseModel(t2_us=t2), delay_realization="continuous",
    )
    fit = fit_sweep_decay(run_delay_sweep(plan))
    assert fit.t2n_us == pytest.approx(12.085, rel=5e-3)


def test_fit_decay_sampled_consistent_with_exact(ibmqx5):
    t2, n = 48.34, 2
    taus = tuple(
        round(t / 90) * 90.0 for t in np.linspace(0, 1.2 * t2 / n * US, 6)
    )
    exact_plan = ExperimentPlan(
        graph=ibmqx5, chain=find_chain(ibmqx5, n), delays_ns=taus,
        noise=NoiseModel(t2_us=t2),
    )
    exact_fit = fit_sweep_decay(run_delay_sweep(exact_plan))
    sampled_plan = ExperimentPlan(
        graph=ibmqx5, chain=find_chain(ibmqx5, n), delays_ns=taus,
        noise=NoiseModel(t2_us=t2), mode="sampled", shots=1000, seed=97,
    )
    sampled_fit = fit_sweep_decay(run_delay_sweep(sampled_plan))
    combined = math.hypot(exact_fit.t2n_err, sampled_fit.t2n_err)
    assert abs(sampled_fit.t2n_us - exact_fit.t2n_us) <= 3 * combined


def test_propagate_ratios_reference_values():
    ratios = propagate_ratios(MEASURED_T2_US)
    assert ratios[1] == (1.0, 0.0)
    assert ratios[8][0] == pytest.approx(8.805, abs=5e-4)
    assert ratios[2][0] == pytest.approx(1.849, abs=5e-4)
    with pytest.raises(ValueError):
        propagate_ratios({1: (0.0, 0.1), 2: (1.0, 0.1)})


@pytest.mark.parametrize("n", [2, 5, 8])
def test_ratio_errors_against_monte_carlo(n):
    """First-order propagation vs direct Monte-Carlo of the ratio (5%)."""
    rng = np.random.default_rng(1000 + n)
    t21, s1 = MEASURED_T2_US[1]
    t2n, sn = MEASURED_T2_US[n]
    draws = rng.normal(t21, s1, 10**5) / rng.normal(t2n, sn, 10**5)
    sigma_mc = draws.std(ddof=1)
    sigma = propagate_ratios(MEASURED_T2_US)[n][1]
    assert abs(sigma - sigma_mc) / sigma_mc < 0.05


def test_fit_scaling_exact_linear_data():
    ratios = {n: (float(n), 0.0) for n in range(1, 9)}
    fits = fit_scaling(ratios, weighted=False)
    lin = fits["linear"]
    assert lin["beta"] == pytest.approx(1.0, abs=1e-12)
    assert lin["alpha"] == pytest.approx(0.0, abs=1e-12)
    assert lin.r_squared == pytest.approx(1.0, abs=1e-12)
    lo, hi = lin.ci99["beta"]
    assert hi - lo < 1e-10


def test_fit_scaling_exact_quadratic_data():
    ratios = {n: (float(n) ** 2, 0.0) for n in range(1, 9)}
    fits = fit_scaling(ratios, weighted=False)
    quad = fits["quad_no_linear"]
    assert quad["gamma"] == pytest.approx(1.0, abs=1e-12)
    assert quad["alpha"] == pytest.approx(0.0, abs=1e-12)
    assert quad.r_squared == pytest.approx(1.0, abs=1e-12)
    assert all(fit.r_squared <= 1.0 for fit in fits.values())


def test_fit_scaling_reference_table_unweighted():
    # frozen from an independent calculation of the weighted least-squares
    # normal equations on the published table
    fits = fit_scaling(propagate_ratios(MEASURED_T2_US), weighted=False)
    assert fits["linear"]["beta"] == pytest.approx(1.1209, abs=2e-4)
    assert fits["linear"].r_squared == pytest.approx(0.9861, abs=2e-4)
    assert fits["quad_no_linear"].r_squared == pytest.approx(0.9759, abs=2e-4)
    assert fits["quad_no_const"].r_squared == pytest.approx(0.9982, abs=2e-4)
    lo, hi = fits["quad_no_const"].ci99["beta"]
    assert (lo, hi) == (pytest.approx(0.560, abs=2e-3), pytest.approx(1.104, abs=2e-3))


def test_fit_scaling_weight_scale_invariance():
    base = propagate_ratios(MEASURED_T2_US)
    fits_a = fit_scaling(base, weighted=True)

    # power-of-two scale: every float operation scales exactly, so the
    # homogeneous-weight invariance holds bit for bit
    scaled = {n: (r, 4.0 * s) for n, (r, s) in base.items()}
    fits_b = fit_scaling(scaled, weighted=True)
    for model in fits_a:
        assert fits_a[model].coefficients == fits_b[model].coefficients
        assert fits_a[model].r_squared == fits_b[model].r_squared
        assert fits_a[model].ci99 == fits_b[model].ci99

    # arbitrary scale: invariant up to float rounding
    scaled = {n: (r, 3.7 * s) for n, (r, s) in base.items()}
    fits_c = fit_scaling(scaled, weighted=True)
    for model in fits_a:
        for term, value in fits_a[model].coefficients.items():
            assert fits_c[model].coefficients[term] == pytest.approx(value, rel=1e-12)
        assert fits_c[model].r_squared == pytest.approx(
            fits_a[model].r_squared, rel=1e-12
        )


def test_fit_scaling_needs_enough_points():
    with pytest.raises(FitError):
        fit_scaling({1: (1.0, 0.0), 2: (2.0, 0.1)}, weighted=False)


def test_predict_t2n_from_calibration():
    assert predict_t2n_from_calibration({0: 44.4}, (0,)) == pytest.approx(44.4)
    uniform = {q: 44.4 for q in range(8)}
    for n in (2, 5, 8):
        assert predict_t2n_from_calibration(uniform, tuple(range(n))) == pytest.approx(
            44.4 / n
        )
    assert predict_t2n_from_calibration({0: 40.0, 1: 60.0}, (0, 1)) == pytest.approx(24.0)
    with pytest.raises(KeyError):
        predict_t2n_from_calibration({0: 40.0}, (0, 1))
    with pytest.raises(ValueError):
        predict_t2n_from_calibration({0: -1.0}, (0,))


def test_coherence_sweep_points_units(ibmqx5):
    plan = ExperimentPlan(
        graph=ibmqx5, chain=find_chain(ibmqx5, 1), delays_ns=(0.0, 900.0),
        noise=NoiseModel(t2_us=10.0),
    )
    points, sigmas = coherence_sweep_points(run_delay_sweep(plan))
    assert points[0][0] == 0.0
    assert points[1][0] == pytest.approx(0.9)  # ns -> us
    assert len(sigmas) == 2
