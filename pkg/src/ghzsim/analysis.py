"""Coherence extraction and scaling statistics.

The pipeline runs parity datasets through three fitting layers:

1. fixed-frequency sinusoid fits of the parity oscillations (linear in the
   {sin, cos} basis, so exact on representable signals),
2. exponential decay fits of the oscillation amplitudes over delay,
3. weighted linear fits of the normalized decoherence rates against qubit
   number for three candidate scaling laws.

Weight conventions, shared by all fitters: points with known errors are
weighted 1/sigma^2 and parameter covariances are taken directly from the
weighted normal equations; if no (or degenerate all-zero) errors are given,
unit weights are used and the covariance is scaled by the reduced chi-square.
Zero errors mixed with finite ones are replaced by the smallest positive
error, the conventional guard against infinite weights.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
from scipy import stats

from .protocol import ParityDataset
from .topology import QubitChain


class FitError(RuntimeError):
    """Raised when a fit is underdetermined, singular, or fails to converge."""


SCALING_MODELS = ("linear", "quad_no_linear", "quad_no_const")

_MODEL_TERMS: dict[str, tuple[str, ...]] = {
    "linear": ("beta", "alpha"),
    "quad_no_linear": ("gamma", "alpha"),
    "quad_no_const": ("gamma", "beta"),
}


@dataclass(frozen=True)
class SinusoidFit:
    amplitude: float
    phase: float
    amplitude_err: float
    phase_err: float
    rss: float
    n_points: int

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("amplitude must be nonnegative")


@dataclass(frozen=True)
class DecayFit:
    c_init: float
    t2n_us: float
    c_init_err: float
    t2n_err: float
    iterations: int

    def __post_init__(self):
        if not -1e-9 <= self.c_init <= 1.05:
            raise ValueError(f"initial coherence {self.c_init} outside [0, 1.05]")
        if self.t2n_us <= 0:
            raise ValueError("coherence time must be positive")


@dataclass(frozen=True)
class LinearFit:
    intercept: float
    slope: float
    intercept_err: float
    slope_err: float


@dataclass(frozen=True)
class ScalingFit:
    model: str
    weighted: bool
    coefficients: dict[str, float]
    std_errors: dict[str, float]
    ci99: dict[str, tuple[float, float]]
    r_squared: float
    dof: int

    def __getitem__(self, name: str) -> float:
        return self.coefficients[name]


def _weights_from_sigmas(sigmas: np.ndarray | None, count: int) -> tuple[np.ndarray, bool]:
    """(weights, absolute) where ``absolute`` marks real measurement errors."""
    if sigmas is None:
        return np.ones(count), False
    sigmas = np.asarray(sigmas, dtype=float)
    if np.any(sigmas < 0):
        raise FitError("negative error bars")
    positive = sigmas[sigmas > 0]
    if positive.size == 0:
        return np.ones(count), False
    guarded = np.where(sigmas > 0, sigmas, positive.min())
    return 1.0 / guarded**2, True


def _wls(
    design: np.ndarray, y: np.ndarray, weights: np.ndarray, absolute: bool
) -> tuple[np.ndarray, np.ndarray, float]:
    """Weighted least squares: (coefficients, covariance, weighted RSS)."""
    w_design = design * weights[:, None]
    normal = w_design.T @ design
    try:
        coef = np.linalg.solve(normal, w_design.T @ y)
        base_cov = np.linalg.inv(normal)
    except np.linalg.LinAlgError as exc:
        raise FitError(f"singular design matrix: {exc}") from exc
    resid = y - design @ coef
    wrss = float(np.sum(weights * resid**2))
    dof = len(y) - design.shape[1]
    if absolute:
        cov = base_cov
    else:
        cov = base_cov * (wrss / dof if dof > 0 else 0.0)
    return coef, cov, wrss


def fit_parity(
    dataset: ParityDataset, include_offset: bool = False
) -> SinusoidFit:
    """Fit P(phi) = C sin(N phi + delta) with the frequency fixed by N.

    The model is linear in the basis {sin(N phi), cos(N phi)}: C and delta
    come from the two basis coefficients, which makes the fit an exact
    projection for any representable signal.  Sampled datasets are weighted
    by their per-point errors; exact datasets use unit weights.
    """
    if len(dataset.points) < 3:
        raise FitError("need at least 3 parity points")
    phis = dataset.phis()
    y = dataset.parities()
    errs = dataset.errors()
    n = dataset.n_qubits
    cols = [np.sin(n * phis), np.cos(n * phis)]
    if include_offset:
        cols.append(np.ones_like(phis))
    design = np.column_stack(cols)
    sigmas = errs if np.any(errs > 0) else None
    weights, absolute = _weights_from_sigmas(sigmas, len(y))
    coef, cov, wrss = _wls(design, y, weights, absolute)

    a, b = coef[0], coef[1]
    amplitude = math.hypot(a, b)
    phase = math.atan2(b, a)
    if amplitude > 0:
        ja = np.array([a, b]) / amplitude  # d amplitude / d(a, b)
        jp = np.array([-b, a]) / amplitude**2  # d phase / d(a, b)
        amp_var = float(ja @ cov[:2, :2] @ ja)
        phase_var = float(jp @ cov[:2, :2] @ jp)
    else:
        amp_var = float(max(cov[0, 0], cov[1, 1]))
        phase_var = math.inf
        phase = 0.0
    return SinusoidFit(
        amplitude,
        phase,
        math.sqrt(max(amp_var, 0.0)),
        math.sqrt(phase_var) if math.isfinite(phase_var) else math.inf,
        wrss,
        len(y),
    )


def fit_initial_coherence(points: Sequence[tuple[int, float]]) -> LinearFit:
    """Ordinary least-squares line through (N, C(N, 0)) points."""
    if len({n for n, _ in points}) < 2:
        raise FitError("need at least two distinct N values")
    n = np.array([float(p[0]) for p in points])
    c = np.array([float(p[1]) for p in points])
    design = np.column_stack([np.ones_like(n), n])
    coef, cov, _ = _wls(design, c, np.ones_like(n), absolute=False)
    return LinearFit(
        coef[0], coef[1], math.sqrt(max(cov[0, 0], 0)), math.sqrt(max(cov[1, 1], 0))
    )


def fit_decay(
    points: Sequence[tuple[float, float]],
    sigmas: Sequence[float] | None = None,
    max_iterations: int = 100,
    relative_tolerance: float = 1e-10,
) -> DecayFit:
    """Fit C(tau) = c_init exp(-tau/T) to (tau_us, C) points.

    Seeded by weighted log-linear regression, refined by Gauss-Newton on the
    original model; converged when the relative parameter step drops below
    ``relative_tolerance``.
    """
    if len(points) < 3:
        raise FitError("need at least 3 decay points")
    tau = np.array([float(p[0]) for p in points])
    c = np.array([float(p[1]) for p in points])
    if np.any(c <= 0):
        raise FitError("nonpositive coherence value; log seed undefined")
    weights, absolute = _weights_from_sigmas(
        None if sigmas is None else np.asarray(sigmas, dtype=float), len(c)
    )

    # Log-linear seed; delta-method weights w * C^2 keep the weighting faithful.
    design = np.column_stack([np.ones_like(tau), -tau])
    seed_coef, _, _ = _wls(design, np.log(c), weights * c**2, absolute=True)
    c0 = math.exp(seed_coef[0])
    rate = max(seed_coef[1], 1e-30)

    params = np.array([c0, 1.0 / rate])
    iterations = 0
    for iterations in range(1, max_iterations + 1):
        ci, t = params
        model = ci * np.exp(-tau / t)
        resid = c - model
        jac = np.column_stack([model / ci, model * tau / t**2])
        try:
            step, cov, _ = _wls(jac, resid, weights, absolute=True)
        except FitError as exc:
            raise FitError(f"decay fit became singular: {exc}") from exc
        params = params + step
        if params[1] <= 0:
            raise FitError(f"fitted coherence time is nonpositive: {params[1]}")
        if np.max(np.abs(step) / np.maximum(np.abs(params), 1e-300)) < relative_tolerance:
            break
    else:
        raise FitError(f"decay fit did not converge in {max_iterations} iterations")

    ci, t = params
    model = ci * np.exp(-tau / t)
    jac = np.column_stack([model / ci, model * tau / t**2])
    _, cov, wrss = _wls(jac, c - model, weights, absolute=True)
    if not absolute:
        dof = len(c) - 2
        cov = cov * (wrss / dof if dof > 0 else 0.0)
    return DecayFit(
        ci, t, math.sqrt(max(cov[0, 0], 0)), math.sqrt(max(cov[1, 1], 0)), iterations
    )


def propagate_ratios(
    t2_by_n: Mapping[int, tuple[float, float]],
) -> dict[int, tuple[float, float]]:
    """Normalized decoherence rates r_N = T2(1)/T2(N) with first-order errors.

    sigma_r = sqrt((s1/T2N)^2 + (T21 sN / T2N^2)^2); the N = 1 entry is the
    ratio of one measurement with itself, so r_1 = 1 with zero error by
    construction.
    """
    if 1 not in t2_by_n:
        raise ValueError("need the single-qubit coherence time (N = 1)")
    t21, s1 = t2_by_n[1]
    out: dict[int, tuple[float, float]] = {}
    for n in sorted(t2_by_n):
        t2n, sn = t2_by_n[n]
        if t2n <= 0 or t21 <= 0:
            raise ValueError(f"nonpositive coherence time for N = {n}")
        if n == 1:
            out[n] = (1.0, 0.0)
            continue
        r = t21 / t2n
        sigma = math.sqrt((s1 / t2n) ** 2 + (t21 * sn / t2n**2) ** 2)
        out[n] = (r, sigma)
    return out


def _scaling_design(model: str, n: np.ndarray) -> np.ndarray:
    if model == "linear":
        return np.column_stack([n, np.ones_like(n)])
    if model == "quad_no_linear":
        return np.column_stack([n**2, np.ones_like(n)])
    if model == "quad_no_const":
        return np.column_stack([n**2, n])
    raise ValueError(f"unknown scaling model {model!r}")


def fit_scaling(
    ratios: Mapping[int, tuple[float, float]], weighted: bool
) -> dict[str, ScalingFit]:
    """Fit the three scaling laws to (N, r, sigma_r) points.

    All three models are linear in their coefficients, so each is a single
    weighted least-squares solve.  R^2 is computed on weighted residuals,
    against the weighted mean when the model has a constant term and against
    zero otherwise (the standard convention for fits through the origin).
    99% confidence intervals use Student-t quantiles with (points -
    parameters) degrees of freedom on the reduced-chi-square-scaled
    covariance; scaling every sigma by a common factor therefore leaves
    coefficients, R^2, and intervals unchanged.
    """
    if len(ratios) < 3:
        raise FitError("need at least 3 ratio points")
    ns = np.array(sorted(ratios), dtype=float)
    r = np.array([ratios[int(n)][0] for n in ns])
    sig = np.array([ratios[int(n)][1] for n in ns])
    if weighted:
        weights, _ = _weights_from_sigmas(sig, len(r))
    else:
        weights = np.ones_like(r)

    fits: dict[str, ScalingFit] = {}
    for model in SCALING_MODELS:
        design = _scaling_design(model, ns)
        dof = len(r) - design.shape[1]
        if dof < 1:
            raise FitError(f"model {model} is underdetermined")
        coef, base_cov, wrss = _wls(design, r, weights, absolute=True)
        cov = base_cov * (wrss / dof)
        has_const = model in ("linear", "quad_no_linear")
        if has_const:
            center = float(np.sum(weights * r) / np.sum(weights))
        else:
            center = 0.0
        total = float(np.sum(weights * (r - center) ** 2))
        r_squared = 1.0 - wrss / total
        tq = float(stats.t.ppf(0.995, dof))
        names = _MODEL_TERMS[model]
        se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
        fits[model] = ScalingFit(
            model=model,
            weighted=weighted,
            coefficients={name: float(c) for name, c in zip(names, coef)},
            std_errors={name: float(s) for name, s in zip(names, se)},
            ci99={
                name: (float(c - tq * s), float(c + tq * s))
                for name, c, s in zip(names, coef, se)
            },
            r_squared=r_squared,
            dof=dof,
        )
    return fits


def predict_t2n_from_calibration(
    t2_by_qubit: Mapping[int, float], chain: QubitChain | Sequence[int]
) -> float:
    """Uncorrelated-dephasing prediction 1 / sum(1/T2_i) over the chain qubits."""
    qubits = chain.qubits if isinstance(chain, QubitChain) else tuple(chain)
    total = 0.0
    for q in qubits:
        if q not in t2_by_qubit:
            raise KeyError(f"calibration is missing qubit {q}")
        t2 = t2_by_qubit[q]
        if t2 <= 0:
            raise ValueError(f"nonpositive T2 for qubit {q}")
        total += 1.0 / t2
    return 1.0 / total


def coherence_sweep_points(
    datasets: Sequence[ParityDataset],
) -> tuple[list[tuple[float, float]], list[float]]:
    """Fit every dataset of one N and return ((tau_us, C) points, sigma_C)."""
    points = []
    sigmas = []
    for ds in datasets:
        fit = fit_parity(ds)
        points.append((ds.tau_ns / 1000.0, fit.amplitude))
        sigmas.append(fit.amplitude_err)
    return points, sigmas


def fit_sweep_decay(datasets: Sequence[ParityDataset]) -> DecayFit:
    """Sinusoid-fit a delay sweep of one N, then fit the amplitude decay.

    The decay fit is weighted by the sinusoid amplitude errors; exact-mode
    sweeps only carry floating-point residue there, which is treated as
    error-free rather than as wildly uneven weights.
    """
    points, sigmas = coherence_sweep_points(datasets)
    if max(sigmas) < 1e-9:
        return fit_decay(points, None)
    return fit_decay(points, sigmas)
