"""Time-stepping schemes for the first-order stochastic wave system.

Four steppers share one driver:

* ``hr_lri`` - the exponential integrator on the stepped band plus a single
  exact linear propagation of the recovery band at final time.  Per step,
  with A = e^(tau L) and the nonlinear images evaluated pseudospectrally,

      U_(n+1) = A (U_n + tau * I_N F(U_n) + I_N Sigma(U_n) * dW_n).

* ``lri`` - the same exponential update with an explicit frequency filter
  Pi_cut inside and around the nonlinear terms,

      U_(n+1) = A U_n + tau A Pi_cut F(Pi_cut U_n) + A Pi_cut Sigma(Pi_cut U_n) dW_n,

  where cut defaults to min(floor(1/tau), stepped band).  No recovery.

* ``stm`` - trigonometric baseline A (U_n + I_N Sigma(U_n) dW_n).

* ``sem`` - semi-implicit Euler-Maruyama: solve
  (I - tau L) U_(n+1) = U_n + I_N Sigma(U_n) dW_n mode by mode.

Both the forcing F(U) = (0, f(u)) and the diffusion Sigma(U) = (0, sigma(u))
live in the velocity slot only, so each step is one pseudospectral
evaluation round plus one fused per-mode 2x2 pass.

The driver decomposes the initial state into the stepped band ([-N, N-1]
per axis), the recovery band (box N^alpha minus box N) and a discarded
remainder; the recovery band never sees the noise and is propagated to the
final time in one shot when recovery is enabled.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import semigroup
from .noise import WienerLattice, coarsen
from .problems import NonlinearitySpec, ProblemSpec, build_initial
from .spectral import (
    SpectralGrid,
    SpectralState,
    diff_norm,
    project_band,
    project_low,
    pseudospectral_apply,
    with_band,
)

METHOD_KINDS = ("hr_lri", "lri", "sem", "stm")


class NumericalError(RuntimeError):
    """A run left the floating-point domain (NaN/inf state)."""


@dataclass(frozen=True)
class MethodSpec:
    kind: str
    tau: float
    n_steps: int
    filter_cut: int | None = None
    recovery: bool = False
    oversample: float = 1.0


@dataclass(frozen=True)
class RunResult:
    final_state: SpectralState
    wall_time: float
    steps: int


def method_spec(kind: str, tau: float, t_final: float,
                recovery: bool | None = None,
                filter_cut: int | None = None,
                oversample: float = 1.0) -> MethodSpec:
    """Validated spec; n_steps * tau must tile t_final exactly."""
    if kind not in METHOD_KINDS:
        raise ValueError(f"unknown method kind {kind!r}")
    if tau <= 0:
        raise ValueError(f"tau must be positive, got {tau}")
    n_steps = int(round(t_final / tau))
    if abs(n_steps * tau - t_final) > 1e-12 * max(1.0, t_final):
        raise ValueError(f"tau {tau} does not tile t_final {t_final}")
    if recovery is None:
        recovery = kind == "hr_lri"
    if recovery and kind != "hr_lri":
        raise ValueError(f"recovery is only defined for hr_lri, not {kind}")
    return MethodSpec(kind=kind, tau=tau, n_steps=n_steps,
                      filter_cut=filter_cut, recovery=recovery,
                      oversample=oversample)


def default_filter_cut(tau: float, band: int) -> int:
    """min(floor(1/tau), stepped band): the filter collapses onto the band
    under the usual tau = 1/(4N) coupling and only bites standalone."""
    return min(int(np.floor(1.0 / tau)), band)


# ---------------------------------------------------------------------------
# single steps


def _sigma_image(state: SpectralState, sigma: NonlinearitySpec, cut: int,
                 oversample: float = 1.0) -> np.ndarray:
    return pseudospectral_apply(sigma, state.u_hat, cut, oversample)


def step_lri(state: SpectralState, tau: float, dw: float,
             f_spec: NonlinearitySpec, sigma_spec: NonlinearitySpec,
             cut: int, oversample: float = 1.0) -> SpectralState:
    """Filtered exponential step at the stored band."""
    if cut > state.band:
        raise ValueError(f"filter cut {cut} exceeds stored band {state.band}")
    filtered = project_low(state, cut)
    if f_spec.is_zero:
        if sigma_spec.is_zero:
            return semigroup.apply_group(state, tau)
        z = _sigma_image(filtered, sigma_spec, cut, oversample)
        return semigroup.apply_group_noisy(state, tau, z, dw)
    g = pseudospectral_apply(f_spec, filtered.u_hat, cut, oversample)
    z = _sigma_image(filtered, sigma_spec, cut, oversample)
    return semigroup.apply_group_forced_noisy(state, tau, g, z, tau, dw)


def step_hrlri_low(state: SpectralState, tau: float, dw: float,
                   f_spec: NonlinearitySpec, sigma_spec: NonlinearitySpec,
                   n_cut: int) -> SpectralState:
    """Stepped-band update of the high-frequency recovered integrator.

    The state is confined to the stepped band, where the box projection is
    the identity, so this is the plain interpolated exponential step.
    """
    if state.band != n_cut:
        raise ValueError(f"state band {state.band} does not match stepped band {n_cut}")
    return step_lri(state, tau, dw, f_spec, sigma_spec, cut=n_cut)


def recover_high(initial_band: SpectralState, t: float) -> SpectralState:
    """Exact linear flow of the recovery band, applied once at time t."""
    return semigroup.apply_group(initial_band, t)


def step_sem(state: SpectralState, tau: float, dw: float,
             sigma_spec: NonlinearitySpec) -> SpectralState:
    """Semi-implicit Euler-Maruyama step (resolvent solve per mode)."""
    if sigma_spec.is_zero:
        return semigroup.apply_resolvent(state, tau)
    z = _sigma_image(state, sigma_spec, state.band)
    return semigroup.apply_resolvent_noisy(state, tau, z, dw)


def step_stm(state: SpectralState, tau: float, dw: float,
             sigma_spec: NonlinearitySpec) -> SpectralState:
    """Trigonometric step: exact linear flow of the noisy increment."""
    if sigma_spec.is_zero:
        return semigroup.apply_group(state, tau)
    z = _sigma_image(state, sigma_spec, state.band)
    return semigroup.apply_group_noisy(state, tau, z, dw)


# ---------------------------------------------------------------------------
# driver


def _conform(state: SpectralState, grid: SpectralGrid) -> SpectralState:
    """Bring an initial state onto the run grid's full band."""
    if state.grid.dim != grid.dim:
        raise ValueError("initial state dimension does not match grid")
    out = with_band(state, grid.n_high)
    return replace(out, grid=grid)


def _check_finite(state: SpectralState, step: int) -> None:
    if not (np.isfinite(state.u_hat).all() and np.isfinite(state.v_hat).all()):
        raise NumericalError(f"non-finite state at step {step}")


def run(method: MethodSpec, grid: SpectralGrid, problem: ProblemSpec,
        path: WienerLattice, snapshot_stride: int = 0,
        on_snapshot=None) -> RunResult:
    """Integrate one path; returns the final state at the full band.

    The Brownian increments are the exact grouped sums of the lattice's base
    increments, so runs at different step sizes on one lattice are coupled.
    With ``snapshot_stride`` > 0 the callback receives
    (step_index, time, full-band state) every stride steps and at both ends.
    """
    t_total = method.n_steps * method.tau
    if t_total > path.t_final + 1e-12:
        raise ValueError(f"run time {t_total} exceeds path horizon {path.t_final}")
    dws = coarsen(path, method.tau)[:method.n_steps] if method.n_steps else np.zeros(0)

    u0 = _conform(build_initial(problem.initial, grid), grid)
    low = with_band(u0, grid.n_cut)
    rec0 = None
    if grid.n_high > grid.n_cut:
        # the stepped storage holds |k_j| <= n_cut - 1 (its unpaired slot is
        # kept empty), so the recovery band starts one mode lower to tile the
        # retained spectrum completely
        rec0 = project_band(u0, grid.n_cut - 1, grid.n_high)

    cut = method.filter_cut
    if cut is None:
        cut = default_filter_cut(method.tau, grid.n_cut)

    def full_state(state_low: SpectralState, t: float) -> SpectralState:
        out = with_band(state_low, grid.n_high)
        if method.recovery and rec0 is not None:
            rec = recover_high(rec0, t)
            out = replace(out, u_hat=out.u_hat + rec.u_hat,
                          v_hat=out.v_hat + rec.v_hat)
        return out

    if on_snapshot is not None and snapshot_stride > 0:
        on_snapshot(0, 0.0, full_state(low, 0.0))

    start = time.perf_counter()
    state = low
    for n in range(method.n_steps):
        dw = float(dws[n])
        if method.kind == "hr_lri":
            state = step_hrlri_low(state, method.tau, dw, problem.f,
                                   problem.sigma, grid.n_cut)
        elif method.kind == "lri":
            state = step_lri(state, method.tau, dw, problem.f, problem.sigma,
                             cut, method.oversample)
        elif method.kind == "sem":
            state = step_sem(state, method.tau, dw, problem.sigma)
        elif method.kind == "stm":
            state = step_stm(state, method.tau, dw, problem.sigma)
        else:
            raise ValueError(f"unknown method kind {method.kind!r}")
        _check_finite(state, n)
        if (on_snapshot is not None and snapshot_stride > 0
                and (n + 1) % snapshot_stride == 0 and n + 1 < method.n_steps):
            on_snapshot(n + 1, (n + 1) * method.tau, full_state(state, (n + 1) * method.tau))
    wall = time.perf_counter() - start

    final = full_state(state, t_total)
    if on_snapshot is not None and snapshot_stride > 0 and method.n_steps > 0:
        on_snapshot(method.n_steps, t_total, final)
    return RunResult(final_state=final, wall_time=wall, steps=method.n_steps)


# ---------------------------------------------------------------------------
# oracles and diagnostics


def exact_linear_zero_mode(u0: float, v0: float, c: float,
                           path: WienerLattice, t_final: float) -> tuple[float, float]:
    """Reference for f = 0, sigma = c: only the mean mode is forced, with
    du = v dt, dv = c dW.

    v is exact (partial sums of the increments).  u uses the midpoint area
    proxy u += v*h + c*dW*h/2 per base cell, leaving an O(base_dt) pathwise
    residual; run the lattice much finer than the steps under test.
    """
    n = int(round(t_final / path.base_dt))
    if abs(n * path.base_dt - t_final) > 1e-9 or n > path.n_base:
        raise ValueError(f"t_final {t_final} not on the base lattice")
    h = path.base_dt
    u, v = float(u0), float(v0)
    inc = path.increments
    for i in range(n):
        dw = inc[i]
        u += v * h + c * dw * (h / 2.0)
        v += c * dw
    return float(u), float(v)


def projection_interpolation_gap(state: SpectralState,
                                 sigma_spec: NonlinearitySpec,
                                 cut: int, oversample: float = 2.0) -> float:
    """Coefficient-level distance between the interpolated nonlinear image
    and its oversampled (nearly alias-free) counterpart.

    Zero for band-limited images (polynomial compositions below the grid's
    alias threshold); positive in general, quantifying what the sharp-grid
    interpolation folds back into the band.
    """
    direct = pseudospectral_apply(sigma_spec, state.u_hat, cut)
    refined = pseudospectral_apply(sigma_spec, state.u_hat, cut, oversample)
    return float(np.linalg.norm(direct - refined))


def linear_exact_discrepancy(method: MethodSpec, grid: SpectralGrid,
                             problem: ProblemSpec, path: WienerLattice) -> float:
    """Error norm of a run against the exact linear flow of its own initial
    band; meaningful when both nonlinearities vanish."""
    result = run(method, grid, problem, path)
    u0 = _conform(build_initial(problem.initial, grid), grid)
    ref = semigroup.apply_group(project_low(u0, grid.n_high),
                                method.n_steps * method.tau)
    return diff_norm(result.final_state, ref, 0.0)
