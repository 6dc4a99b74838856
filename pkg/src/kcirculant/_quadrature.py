"""Adaptive quadrature wrapper shared by the tail-probability integrals."""

from __future__ import annotations

import scipy.integrate


class QuadratureError(RuntimeError):
    """An integral could not be evaluated to the requested accuracy."""


def quad_smooth(f, lo, hi, *, epsrel=1e-11, epsabs=0.0, accept_abs=1e-10, limit=300):
    """Integrate a smooth scalar function on [lo, hi] with Gauss-Kronrod panels.

    Tolerances are pushed hard; with full_output the backend reports trouble
    through its return value instead of warning (keeps this re-entrant for
    threaded callers). A flagged result is still accepted when its error
    estimate beats accept_abs or a 1e-9 relative margin, otherwise
    QuadratureError reports the achieved error.
    """
    out = scipy.integrate.quad(f, lo, hi, epsabs=epsabs, epsrel=epsrel,
                               limit=limit, full_output=True)
    val, err = out[0], out[1]
    flagged = len(out) > 3
    if flagged and err > max(accept_abs, abs(val) * 1e-9):
        raise QuadratureError(
            f"quadrature on [{lo:g}, {hi:g}] achieved absolute error {err:.3e}"
        )
    return val, err
