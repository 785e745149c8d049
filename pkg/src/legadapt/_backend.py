"""Kernel backend selection.

Prefers the compiled extension; falls back to the numpy implementation
when it is missing or when ``LEGADAPT_PURE`` is set to a non-zero value.
"""

import os

_force_pure = os.environ.get("LEGADAPT_PURE", "").strip() not in ("", "0")

if _force_pure:
    from . import _kernels_py as _impl

    BACKEND = "pure"
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        BACKEND = "compiled"
    except ImportError:
        from . import _kernels_py as _impl

        BACKEND = "pure"

leg_row = _impl.leg_row
coeff_sums = _impl.coeff_sums
sq_sums = _impl.sq_sums
eval_series = _impl.eval_series
