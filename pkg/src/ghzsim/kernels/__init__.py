"""Density-matrix kernels with a compiled core and a NumPy fallback.

The compiled extension is preferred when importable; set ``GHZSIM_PURE=1``
to force the NumPy implementation (used by the fallback tests and the
benchmark).  Both expose the same functions:

    apply_unitary_1q(rho, n, pos, u)          -> rho'
    apply_unitary_2q(rho, n, pos_a, pos_b, u) -> rho'
    apply_relax_dephase_1q(rho, n, pos, gamma, offdiag_factor) -> rho'
    apply_depolarize_1q(rho, n, pos, p)       -> rho'
    apply_depolarize_2q(rho, n, pos_a, pos_b, p) -> rho'

Callers must use the returned array: the compiled kernels update in place,
the NumPy ones may not.
"""

from __future__ import annotations

import os

from . import _numpy_backend

if os.environ.get("GHZSIM_PURE"):
    _impl = _numpy_backend
else:
    try:
        from . import _core as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _numpy_backend

apply_unitary_1q = _impl.apply_unitary_1q
apply_unitary_2q = _impl.apply_unitary_2q
apply_relax_dephase_1q = _impl.apply_relax_dephase_1q
apply_depolarize_1q = _impl.apply_depolarize_1q
apply_depolarize_2q = _impl.apply_depolarize_2q


def backend_name() -> str:
    """Which kernel implementation is active: "cython" or "numpy"."""
    return _impl.BACKEND
