"""Periodic Fourier representation of real field pairs on the unit torus.

A solution is carried as the pair of coefficient arrays (u_hat, v_hat) of a
displacement field u and a velocity field v on [0,1]^dim, dim in {1, 2}.
Coefficients live in the standard even-size FFT layout: a state stored "at
band m" uses 2m collocation points per dimension and holds the integer modes
k in [-m, m-1].

Two cutoffs describe a grid: the low cutoff ``n_cut`` (the band advanced by
the time steppers) and the recovery cutoff ``n_high = floor(n_cut**alpha)``
(the widest band any state of the grid retains).  Collocation nodes are
j / points_per_dim with points_per_dim = 2*n_high.

Nyquist convention: the even layout carries a single unpaired slot per axis
(index m, frequency -m).  States keep that slot identically zero, so every
retained mode has a proper conjugate partner at -k.  This makes zero-padding
an exact isometry for the Sobolev norms and band restriction an exact left
inverse of it; the cost is dropping one measure-zero mode per axis, the same
mode the even layout already halves.
"""

from __future__ import annotations

import struct
import threading
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels

_lock = threading.Lock()
_mode_cache: dict = {}
_mask_cache: dict = {}
_weight_cache: dict = {}


# ---------------------------------------------------------------------------
# grid and state


@dataclass(frozen=True)
class SpectralGrid:
    """Resolution parameters of a periodic solver grid."""

    dim: int
    n_cut: int
    alpha: float
    n_high: int
    points_per_dim: int


def make_grid(dim: int, n_cut: int, alpha: float) -> SpectralGrid:
    """Build a grid with recovery cutoff floor(n_cut**alpha).

    alpha = 1 keeps a single band; larger alpha widens the linearly
    recovered band without touching the stepped one.
    """
    if dim not in (1, 2):
        raise ValueError(f"dim must be 1 or 2, got {dim}")
    if n_cut < 1:
        raise ValueError(f"n_cut must be >= 1, got {n_cut}")
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    v = float(n_cut) ** float(alpha)
    # guard against 999.9999999 artifacts when the power is an exact integer
    n_high = int(round(v)) if abs(v - round(v)) < 1e-9 else int(v)
    return SpectralGrid(dim=dim, n_cut=n_cut, alpha=float(alpha),
                        n_high=n_high, points_per_dim=2 * n_high)


@dataclass(frozen=True)
class SpectralState:
    """Fourier coefficients of a (u, v) pair, stored at ``band`` <= n_high.

    Arrays have shape (2*band,)*dim in FFT layout and are treated as
    immutable; operations return fresh states.
    """

    grid: SpectralGrid
    band: int
    u_hat: np.ndarray
    v_hat: np.ndarray

    @property
    def time_points(self) -> int:
        return 2 * self.band


@dataclass(frozen=True)
class ModeFrequency:
    """One basis mode exp(2 pi i k.x) and its wave number 2 pi |k|."""

    k: tuple[int, ...]
    lam: float


def mode_frequency(*k: int) -> ModeFrequency:
    return ModeFrequency(k=tuple(int(c) for c in k),
                         lam=2.0 * np.pi * float(np.hypot(*k) if len(k) > 1 else abs(k[0])))


def zero_state(grid: SpectralGrid, band: int | None = None) -> SpectralState:
    band = grid.n_high if band is None else band
    shape = (2 * band,) * grid.dim
    return SpectralState(grid, band,
                         np.zeros(shape, dtype=np.complex128),
                         np.zeros(shape, dtype=np.complex128))


# ---------------------------------------------------------------------------
# mode bookkeeping


def mode_indices(band: int) -> np.ndarray:
    """Integer frequencies [0, 1, ..., band-1, -band, ..., -1]."""
    with _lock:
        k = _mode_cache.get(band)
        if k is None:
            k = np.rint(np.fft.fftfreq(2 * band) * 2 * band).astype(np.int64)
            k.setflags(write=False)
            _mode_cache[band] = k
    return k


def lambda_sq(dim: int, band: int) -> np.ndarray:
    """(2*pi*|k|)^2 on the full mode box of a band-m array."""
    key = ("lam", dim, band)
    with _lock:
        lam = _weight_cache.get(key)
    if lam is None:
        k = mode_indices(band).astype(np.float64)
        if dim == 1:
            lam = (2.0 * np.pi) ** 2 * k * k
        else:
            lam = (2.0 * np.pi) ** 2 * (k[:, None] ** 2 + k[None, :] ** 2)
        lam.setflags(write=False)
        with _lock:
            _weight_cache[key] = lam
    return lam


def band_mask(dim: int, band: int, cut: int) -> np.ndarray:
    """Boolean mask of modes with every |k_j| <= cut, Nyquist slots excluded.

    The slot at index ``band`` holds the unpaired frequency -band; it is
    masked out unconditionally so that states keep their zero-Nyquist
    invariant through every projection.
    """
    if not 0 <= cut <= band:
        raise ValueError(f"cut {cut} outside [0, {band}]")
    key = (dim, band, cut)
    with _lock:
        m = _mask_cache.get(key)
    if m is None:
        k = mode_indices(band)
        ax = (np.abs(k) <= cut) & (k != -band)
        m = ax if dim == 1 else ax[:, None] & ax[None, :]
        m.setflags(write=False)
        with _lock:
            _mask_cache[key] = m
    return m


# ---------------------------------------------------------------------------
# transforms


def forward(samples: np.ndarray) -> np.ndarray:
    """DFT normalised so coefficient k = mean of samples * exp(-2i pi k x)."""
    samples = np.asarray(samples)
    n = samples.shape[0]
    if any(s != n for s in samples.shape) or n % 2:
        raise ValueError(f"samples must be a square even-sized array, got {samples.shape}")
    return np.fft.fftn(samples) / samples.size


def inverse(coeffs: np.ndarray) -> np.ndarray:
    """Adjoint of :func:`forward`; complex output, real for Hermitian input."""
    coeffs = np.asarray(coeffs)
    return np.fft.ifftn(coeffs) * coeffs.size


def state_from_fields(grid: SpectralGrid, u: np.ndarray, v: np.ndarray,
                      band: int | None = None) -> SpectralState:
    """Transform sampled real fields into a state, zeroing Nyquist slots."""
    band = grid.n_high if band is None else band
    if u.shape != (2 * band,) * grid.dim:
        raise ValueError(f"field shape {u.shape} does not match band {band}")
    full = band_mask(grid.dim, band, band)
    return SpectralState(grid, band,
                         forward(u) * full, forward(v) * full)


def state_to_fields(state: SpectralState) -> tuple[np.ndarray, np.ndarray]:
    """Real-space samples of (u, v); raises if the state is not real-valued."""
    u = inverse(state.u_hat)
    v = inverse(state.v_hat)
    scale = max(np.abs(u).max(), np.abs(v).max(), 1e-300)
    resid = max(np.abs(u.imag).max(), np.abs(v.imag).max()) / scale
    if resid > 1e-10:
        raise ValueError(f"state is not Hermitian: imaginary residue {resid:.3e}")
    return u.real, v.real


def collocation_nodes(band: int) -> np.ndarray:
    """Nodes j / (2*band) along one axis."""
    return np.arange(2 * band) / (2.0 * band)


# ---------------------------------------------------------------------------
# projections


def project_low(state: SpectralState, m: int) -> SpectralState:
    """Zero every coefficient with some |k_j| > m (sharp box truncation)."""
    mask = band_mask(state.grid.dim, state.band, m)
    return replace(state, u_hat=state.u_hat * mask, v_hat=state.v_hat * mask)


def project_band(state: SpectralState, m1: int, m2: int) -> SpectralState:
    """Keep modes inside the m2 box but outside the m1 box."""
    if not 0 <= m1 < m2 <= state.band:
        raise ValueError(f"need 0 <= m1 < m2 <= band, got ({m1}, {m2}, band {state.band})")
    mask = band_mask(state.grid.dim, state.band, m2) & ~band_mask(
        state.grid.dim, state.band, m1)
    return replace(state, u_hat=state.u_hat * mask, v_hat=state.v_hat * mask)


# ---------------------------------------------------------------------------
# norms


def _norm_weights(dim: int, band: int, gamma: float):
    key = ("w", dim, band, float(gamma))
    with _lock:
        w = _weight_cache.get(key)
    if w is None:
        base = 1.0 + lambda_sq(dim, band)
        wu = base ** gamma
        wv = base ** (gamma - 1.0)
        wu.setflags(write=False)
        wv.setflags(write=False)
        w = (wu, wv)
        with _lock:
            _weight_cache[key] = w
    return w


def sobolev_norm(state: SpectralState, gamma: float) -> float:
    """Bessel-potential pair norm: the u slot weighted by (1+lambda^2)^gamma,
    the v slot by (1+lambda^2)^(gamma-1).  gamma = 0 is the L2 x H^-1 error
    norm used throughout the convergence studies.
    """
    wu, wv = _norm_weights(state.grid.dim, state.band, gamma)
    return float(np.sqrt(_kernels.weighted_norm_sq(state.u_hat, state.v_hat, wu, wv)))


def diff_norm(a: SpectralState, b: SpectralState, gamma: float = 0.0) -> float:
    """sobolev_norm(a - b) after padding both to the wider band."""
    band = max(a.band, b.band)
    a = with_band(a, band)
    b = with_band(b, band)
    wu, wv = _norm_weights(a.grid.dim, band, gamma)
    return float(np.sqrt(_kernels.weighted_norm_sq(
        a.u_hat - b.u_hat, a.v_hat - b.v_hat, wu, wv)))


# ---------------------------------------------------------------------------
# nonlinearity application


def pseudospectral_apply(scalar_fn, coeffs: np.ndarray, cut: int,
                         oversample: float = 1.0) -> np.ndarray:
    """Evaluate a scalar function on the collocation grid, truncated to ``cut``.

    Realises trigonometric interpolation of scalar_fn(u): inverse transform,
    pointwise map, forward transform, sharp truncation.  ``oversample`` > 1
    pads the evaluation grid first (e.g. 1.5 for the classical 3/2 rule) so
    the truncated image approaches the true projection of the composition;
    the default matches plain interpolation on the stored grid.
    """
    coeffs = np.asarray(coeffs)
    dim = coeffs.ndim
    band = coeffs.shape[0] // 2
    if cut > band:
        raise ValueError(f"cut {cut} exceeds stored band {band}")
    work_band = band
    if oversample > 1.0:
        work_band = int(np.ceil(band * oversample))
        coeffs = _pad_array(coeffs, band, work_band)
    samples = scalar_fn(inverse(coeffs).real)
    samples = np.asarray(samples, dtype=np.float64)
    if not np.isfinite(samples).all():
        raise FloatingPointError("nonlinearity produced non-finite samples")
    out = forward(samples) * band_mask(dim, work_band, cut)
    if work_band != band:
        out = _truncate_array(out, work_band, band)
    return out


# ---------------------------------------------------------------------------
# band changes


def _axis_slices(small: int, large: int):
    """Index pairs mapping modes [-small, small-1] between layouts."""
    head = slice(0, small)
    tail_large = slice(2 * large - small, 2 * large)
    tail_small = slice(small, 2 * small)
    return head, tail_small, tail_large


def _pad_array(arr: np.ndarray, band: int, new_band: int) -> np.ndarray:
    dim = arr.ndim
    out = np.zeros((2 * new_band,) * dim, dtype=arr.dtype)
    head, tail_s, tail_l = _axis_slices(band, new_band)
    if dim == 1:
        out[head] = arr[head]
        out[tail_l] = arr[tail_s]
    else:
        for rs, rd in ((head, head), (tail_s, tail_l)):
            for cs, cd in ((head, head), (tail_s, tail_l)):
                out[rd, cd] = arr[rs, cs]
    return out


def _truncate_array(arr: np.ndarray, band: int, new_band: int) -> np.ndarray:
    dim = arr.ndim
    out = np.zeros((2 * new_band,) * dim, dtype=arr.dtype)
    head, tail_s, tail_l = _axis_slices(new_band, band)
    if dim == 1:
        out[head] = arr[head]
        out[tail_s] = arr[tail_l]
    else:
        for rs, rd in ((head, head), (tail_l, tail_s)):
            for cs, cd in ((head, head), (tail_l, tail_s)):
                out[rd, cd] = arr[rs, cs]
    # incoming Nyquist-adjacent content at |k_j| = new_band stays behind
    mask = band_mask(dim, new_band, new_band)
    return out * mask


def with_band(state: SpectralState, band: int) -> SpectralState:
    """Re-store a state at another band on the same grid (pad or truncate)."""
    if band == state.band:
        return state
    op = _pad_array if band > state.band else _truncate_array
    return replace(state, band=band,
                   u_hat=op(state.u_hat, state.band, band),
                   v_hat=op(state.v_hat, state.band, band))


def embed(state: SpectralState, target: SpectralGrid) -> SpectralState:
    """Zero-pad onto a grid whose full band contains the stored one."""
    if target.dim != state.grid.dim:
        raise ValueError("embed requires matching dimensions")
    if target.n_high < state.band:
        raise ValueError(f"target band {target.n_high} smaller than stored {state.band}")
    out = with_band(state, target.n_high)
    return replace(out, grid=target)


def restrict(state: SpectralState, target: SpectralGrid) -> SpectralState:
    """Truncate onto a grid whose full band is contained in the stored one."""
    if target.dim != state.grid.dim:
        raise ValueError("restrict requires matching dimensions")
    if target.n_high > state.band:
        raise ValueError(f"target band {target.n_high} larger than stored {state.band}")
    out = with_band(state, target.n_high)
    return replace(out, grid=target)


# ---------------------------------------------------------------------------
# SWV1 snapshot format

_MAGIC = b"SWV1"


def save_snapshot(path, state: SpectralState, time: float) -> None:
    """Write the real-space fields: magic 'SWV1', little-endian u32 dim,
    u32 points_per_dim, f64 time, then points^dim f64 samples of u followed
    by the samples of v (C order).
    """
    u, v = state_to_fields(state)
    points = u.shape[0]
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IId", state.grid.dim, points, float(time)))
        fh.write(u.astype("<f8").tobytes(order="C"))
        fh.write(v.astype("<f8").tobytes(order="C"))


def load_snapshot(path) -> tuple[int, int, float, np.ndarray, np.ndarray]:
    """Read a snapshot; returns (dim, points_per_dim, time, u, v)."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise ValueError(f"{path}: bad magic {magic!r}")
        dim, points, time = struct.unpack("<IId", fh.read(16))
        count = points ** dim
        u = np.frombuffer(fh.read(8 * count), dtype="<f8").reshape((points,) * dim)
        v = np.frombuffer(fh.read(8 * count), dtype="<f8").reshape((points,) * dim)
    return dim, points, time, u.copy(), v.copy()
