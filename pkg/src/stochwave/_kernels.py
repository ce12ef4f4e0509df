"""Hot per-mode kernels with a numba fast path and a pure-numpy fallback.

Every time step of every integrator reduces to "add a forcing term to the
velocity slot, then multiply each Fourier mode by a real 2x2 matrix".  Those
loops run millions of times in a Monte Carlo study on arrays that are often
only a few hundred entries long, so fusing them into a single pass pays off.

The backend is chosen once at import time:

* numba available and ``STOCHWAVE_NO_NUMBA`` unset (or "0") -> jitted kernels
* otherwise -> vectorised numpy equivalents

Both paths compute the same IEEE-754 operations in the same per-element
order; reductions differ only in association (numpy pairwise vs sequential),
which matters below 1e-15 relative.  ``benchmarks/bench_kernels.py`` times
the two paths side by side.
"""

from __future__ import annotations

import os

import numpy as np

_env = os.environ.get("STOCHWAVE_NO_NUMBA", "")
NUMBA_REQUESTED = _env in ("", "0")

try:
    if not NUMBA_REQUESTED:
        raise ImportError("numba disabled by STOCHWAVE_NO_NUMBA")
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False


# ---------------------------------------------------------------------------
# numpy reference implementations (always defined; used as the fallback and
# by the benchmark).


def propagate_numpy(u, v, a11, a12, a21, a22):
    """Apply the per-mode 2x2 table to the pair of coefficient arrays."""
    return a11 * u + a12 * v, a21 * u + a22 * v


def propagate_noisy_numpy(u, v, z, c, a11, a12, a21, a22):
    """Same as :func:`propagate_numpy` on (u, v + c*z)."""
    w = v + c * z
    return a11 * u + a12 * w, a21 * u + a22 * w


def propagate_forced_noisy_numpy(u, v, g, z, tau, c, a11, a12, a21, a22):
    """Same as :func:`propagate_numpy` on (u, v + tau*g + c*z)."""
    w = v + tau * g + c * z
    return a11 * u + a12 * w, a21 * u + a22 * w


def weighted_norm_sq_numpy(u, v, wu, wv):
    """sum(wu*|u|^2 + wv*|v|^2) as a python float."""
    acc = np.sum(wu * (u.real * u.real + u.imag * u.imag))
    acc += np.sum(wv * (v.real * v.real + v.imag * v.imag))
    return float(acc)


# ---------------------------------------------------------------------------
# numba fast path

if HAVE_NUMBA:

    @njit(cache=True)
    def _propagate_nb(u, v, a11, a12, a21, a22, out_u, out_v):
        for i in range(u.shape[0]):
            ui = u[i]
            vi = v[i]
            out_u[i] = a11[i] * ui + a12[i] * vi
            out_v[i] = a21[i] * ui + a22[i] * vi

    @njit(cache=True)
    def _propagate_noisy_nb(u, v, z, c, a11, a12, a21, a22, out_u, out_v):
        for i in range(u.shape[0]):
            ui = u[i]
            wi = v[i] + c * z[i]
            out_u[i] = a11[i] * ui + a12[i] * wi
            out_v[i] = a21[i] * ui + a22[i] * wi

    @njit(cache=True)
    def _propagate_forced_noisy_nb(
        u, v, g, z, tau, c, a11, a12, a21, a22, out_u, out_v
    ):
        for i in range(u.shape[0]):
            ui = u[i]
            wi = v[i] + tau * g[i] + c * z[i]
            out_u[i] = a11[i] * ui + a12[i] * wi
            out_v[i] = a21[i] * ui + a22[i] * wi

    @njit(cache=True)
    def _weighted_norm_sq_nb(u, v, wu, wv):
        acc = 0.0
        for i in range(u.shape[0]):
            ur = u[i].real
            ui = u[i].imag
            vr = v[i].real
            vi = v[i].imag
            acc += wu[i] * (ur * ur + ui * ui) + wv[i] * (vr * vr + vi * vi)
        return acc

    def propagate(u, v, a11, a12, a21, a22):
        out_u = np.empty_like(u)
        out_v = np.empty_like(v)
        _propagate_nb(
            u.reshape(-1), v.reshape(-1),
            a11.reshape(-1), a12.reshape(-1), a21.reshape(-1), a22.reshape(-1),
            out_u.reshape(-1), out_v.reshape(-1),
        )
        return out_u, out_v

    def propagate_noisy(u, v, z, c, a11, a12, a21, a22):
        out_u = np.empty_like(u)
        out_v = np.empty_like(v)
        _propagate_noisy_nb(
            u.reshape(-1), v.reshape(-1), z.reshape(-1), c,
            a11.reshape(-1), a12.reshape(-1), a21.reshape(-1), a22.reshape(-1),
            out_u.reshape(-1), out_v.reshape(-1),
        )
        return out_u, out_v

    def propagate_forced_noisy(u, v, g, z, tau, c, a11, a12, a21, a22):
        out_u = np.empty_like(u)
        out_v = np.empty_like(v)
        _propagate_forced_noisy_nb(
            u.reshape(-1), v.reshape(-1), g.reshape(-1), z.reshape(-1), tau, c,
            a11.reshape(-1), a12.reshape(-1), a21.reshape(-1), a22.reshape(-1),
            out_u.reshape(-1), out_v.reshape(-1),
        )
        return out_u, out_v

    def weighted_norm_sq(u, v, wu, wv):
        return float(
            _weighted_norm_sq_nb(
                u.reshape(-1), v.reshape(-1), wu.reshape(-1), wv.reshape(-1)
            )
        )

else:
    propagate = propagate_numpy
    propagate_noisy = propagate_noisy_numpy
    propagate_forced_noisy = propagate_forced_noisy_numpy
    weighted_norm_sq = weighted_norm_sq_numpy


def backend_name() -> str:
    return "numba" if HAVE_NUMBA else "numpy"
