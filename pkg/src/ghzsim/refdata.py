"""Reference data from the original ibmqx5 GHZ-state decoherence study.

These are consumed as inputs by the ``reproduce-paper`` command and the
regression tests: the measured coherence times are hardware results and are
not regenerated by simulation.
"""

from __future__ import annotations

# Measured GHZ coherence times T2^(N) in us, with fit errors, per state size.
MEASURED_T2_US: dict[int, tuple[float, float]] = {
    1: (48.34, 1.56),
    2: (26.15, 1.67),
    3: (16.11, 0.89),
    4: (12.25, 0.62),
    5: (10.83, 0.75),
    6: (7.63, 0.36),
    7: (6.32, 0.83),
    8: (5.49, 0.38),
}

# Coherence times predicted from device calibration data (us); method detail
# was not published, so these are reference output only, not an oracle.
CALCULATED_T2_US: dict[int, float] = {
    1: 44.4,
    2: 24.52,
    3: 17.21,
    4: 14.75,
    5: 10.97,
    6: 9.88,
    7: 5.99,
    8: 5.40,
}

# Published scaling-fit statistics for the normalized decoherence rates:
# R^2 per model and 99% confidence intervals per coefficient.
PUBLISHED_SCALING: dict[str, dict] = {
    "linear": {"r_squared": 0.996, "ci99": {"beta": (0.968, 1.148)}},
    "quad_no_linear": {"r_squared": 0.983, "ci99": {"gamma": (0.113, 0.160)}},
    "quad_no_const": {
        "r_squared": 0.998,
        "ci99": {"beta": (0.561, 1.103), "gamma": (-0.007, 0.075)},
    },
}

# Published linear trend of the zero-delay coherence: C(N,0) ~= 1 - 0.12 N.
PUBLISHED_INITIAL_COHERENCE = {"intercept": 1.0, "slope": -0.12}

# Physical-qubit chains used per GHZ size on ibmqx5.  Sizes 1-6 walk the
# device numbering from qubit 1; 7 and 8 maximize initial coherence; 9 is
# the chain from the failed 9-qubit attempt (buildable, hardware-limited).
STUDY_CHAINS: dict[int, tuple[int, ...]] = {
    1: (1,),
    2: (1, 2),
    3: (1, 2, 3),
    4: (1, 2, 3, 4),
    5: (1, 2, 3, 4, 5),
    6: (1, 2, 3, 4, 5, 6),
    7: (4, 13, 12, 11, 10, 9, 8),
    8: (3, 4, 13, 12, 11, 10, 9, 8),
    9: (4, 3, 14, 13, 12, 11, 10, 9, 8),
}
