"""Scalar Brownian increments on a shared base lattice with exact coarsening.

Every method and every step size in a study consumes the same underlying
path: the lattice stores i.i.d. N(0, base_dt) increments at the finest
resolution, and a coarse increment over r base cells is defined as the
ascending-order (left-to-right) float sum of those cells.  That definition
is the coupling contract; it is bit-reproducible and independent of how
many workers consume the path.

Generation is counter-based so samples parallelise with zero coordination:
the Philox4x64 stream keyed by (seed, sample_index) yields 64-bit words
w_0, w_1, ...; word i becomes the uniform ((w_i >> 11) + 0.5) * 2^-53 in
(0, 1), and the uniform becomes a standard normal through the inverse
normal CDF (scipy.special.ndtri).  No rejection sampling, so normal i is a
pure function of (seed, sample_index, i).

The lattice itself is the dyadic (Levy) refinement of one Brownian path,
which is why t_final / base_dt must be a power of two: the stream's first
normal fixes the total increment W(t_final) ~ N(0, t_final); level l then
splits each of its 2^l cells p into the pair p/2 + xi, p/2 - xi with fresh
refinement normals xi ~ N(0, width/4).  The split is the exact conditional
law, so the cells of every depth are i.i.d. N(0, base_dt) marginally while
lattices of different depths (e.g. a study rerun with a finer reference
step) sample nested refinements of the same path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

_U53 = 2.0 ** -53


@dataclass(frozen=True)
class WienerLattice:
    """One sampled path at the base resolution; immutable after creation."""

    t_final: float
    base_dt: float
    increments: np.ndarray
    seed: int
    sample_index: int

    @property
    def n_base(self) -> int:
        return self.increments.shape[0]


def _ratio(num: float, den: float) -> int:
    r = num / den
    n = int(round(r))
    if n < 1 or abs(r - n) > 1e-9:
        raise ValueError(f"{num} is not a positive integer multiple of {den}")
    return n


def standard_uniforms(seed: int, sample_index: int, count: int) -> np.ndarray:
    """Counter-based uniforms in the open interval (0, 1)."""
    bitgen = np.random.Philox(key=np.array([seed, sample_index], dtype=np.uint64))
    words = bitgen.random_raw(count)
    return ((words >> np.uint64(11)).astype(np.float64) + 0.5) * _U53


def standard_normals(seed: int, sample_index: int, count: int) -> np.ndarray:
    """The deterministic normal stream underlying the lattice."""
    return ndtri(standard_uniforms(seed, sample_index, count))


def sample_path(seed: int, sample_index: int, t_final: float,
                base_dt: float) -> WienerLattice:
    """Draw the full base-resolution path for one Monte Carlo sample."""
    if base_dt <= 0:
        raise ValueError(f"base_dt must be positive, got {base_dt}")
    n = _ratio(t_final, base_dt)
    if n & (n - 1):
        raise ValueError(f"t_final/base_dt must be a power of two, got {n}")
    depth = n.bit_length() - 1
    normals = standard_normals(seed, sample_index, n)
    cells = np.array([normals[0] * math.sqrt(t_final)])
    pos = 1
    for level in range(depth):
        m = 1 << level
        xi = normals[pos:pos + m] * math.sqrt(t_final / (1 << (level + 2)))
        pos += m
        children = np.empty(2 * m)
        children[0::2] = 0.5 * cells + xi
        children[1::2] = 0.5 * cells - xi
        cells = children
    cells.setflags(write=False)
    return WienerLattice(t_final=float(t_final), base_dt=float(base_dt),
                         increments=cells, seed=int(seed),
                         sample_index=int(sample_index))


def coarsen(lattice: WienerLattice, step_dt: float) -> np.ndarray:
    """All increments at resolution step_dt, each an ascending base sum.

    The accumulation loops over the offset within a group, so every group
    total is built strictly left to right; the result is bit-identical to a
    scalar running sum over each group.
    """
    r = _ratio(step_dt, lattice.base_dt)
    if lattice.n_base % r:
        raise ValueError(f"step {step_dt} does not tile {lattice.n_base} base cells")
    n_coarse = lattice.n_base // r
    if r == 1:
        return lattice.increments.copy()
    acc = np.zeros(n_coarse, dtype=np.float64)
    for j in range(r):
        acc += lattice.increments[j::r]
    return acc


def increment(lattice: WienerLattice, n: int, step_dt: float) -> float:
    """Single increment W(t_n + step_dt) - W(t_n) on the step_dt grid."""
    r = _ratio(step_dt, lattice.base_dt)
    lo, hi = n * r, (n + 1) * r
    if n < 0 or hi > lattice.n_base:
        raise ValueError(f"increment {n} at ratio {r} leaves the lattice")
    acc = 0.0
    for j in range(lo, hi):
        acc += lattice.increments[j]
    return float(acc)


def dump_path_csv(lattice: WienerLattice, path) -> None:
    """Debug dump with columns n, t_n, dW_n at 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("n,t_n,dW_n\n")
        for i, dw in enumerate(lattice.increments):
            fh.write(f"{i},{i * lattice.base_dt:.17g},{dw:.17g}\n")
