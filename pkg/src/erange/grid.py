"""Radial grids and interval-wise Gauss quadrature.

Nodes start at ``r_min > 0`` and grow geometrically (``points_per_decade``)
until the local step reaches the wave limit ``wave_step / sqrt(k^2 + Vmax(r))``,
where ``Vmax(r)`` is the envelope ``sup_{t >= r} |V(t)|``.  Every
discontinuity of the potential is a node, so no integration stage ever
straddles a jump.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy.special import roots_legendre

from . import kernels
from .errors import DomainError
from .potential import PotentialSpec, required_radius

DEFAULT_R_MIN = 1e-8
DEFAULT_PPD = 128
DEFAULT_WAVE_STEP = 0.2
K_POSITIVE_RMAX_CAP = 1000.0


def _partial_matrix(nodes01):
    """S[j, m] = int_0^{c_j} l_m(t) dt for the Lagrange basis on ``nodes01``."""
    m = len(nodes01)
    S = np.empty((m, m))
    for j in range(m):
        basis = np.zeros(m)
        basis[j] = 1.0
        coef = np.polynomial.polynomial.polyfit(nodes01, basis, m - 1)
        anti = np.polynomial.polynomial.polyint(coef)
        S[:, j] = np.polynomial.polynomial.polyval(nodes01, anti)
    return S


GAUSS3_PARTIAL = _partial_matrix(kernels.GAUSS_NODES)
_x5, _w5 = roots_legendre(5)
GAUSS5_NODES = 0.5 * (_x5 + 1.0)
GAUSS5_WEIGHTS = 0.5 * _w5
GAUSS5_PARTIAL = _partial_matrix(GAUSS5_NODES)


@dataclass(eq=False)
class RadialGrid:
    nodes: np.ndarray
    r_min: float
    r_max: float
    policy: str = "geometric-origin/uniform-tail"
    _samples: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        if self.nodes.ndim != 1 or self.nodes.size < 2:
            raise DomainError("grid needs at least two nodes")
        if not self.nodes[0] > 0.0 or np.any(np.diff(self.nodes) <= 0.0):
            raise DomainError("grid nodes must be positive and strictly increasing")
        self.nodes.setflags(write=False)

    @property
    def size(self) -> int:
        return self.nodes.size

    @cached_property
    def h(self) -> np.ndarray:
        return np.diff(self.nodes)

    @cached_property
    def gauss_points(self) -> np.ndarray:
        """(n, 3) stage points of each interval."""
        return self.nodes[:-1, None] + self.h[:, None] * kernels.GAUSS_NODES[None, :]

    @cached_property
    def sub_gauss_points(self) -> np.ndarray:
        """(n, 3, 3) stage points of the sub-steps from each left node to its Gauss points."""
        sub_h = self.h[:, None] * kernels.GAUSS_NODES[None, :]
        return self.nodes[:-1, None, None] + sub_h[:, :, None] * kernels.GAUSS_NODES[None, None, :]

    @cached_property
    def gauss5_points(self) -> np.ndarray:
        return self.nodes[:-1, None] + self.h[:, None] * GAUSS5_NODES[None, :]

    def potential_samples(self, pot: PotentialSpec) -> dict:
        """V at the stage points (cached per potential)."""
        key = pot
        if key not in self._samples:
            self._samples[key] = {
                "stage": pot._eval(self.gauss_points),
                "sub": pot._eval(self.sub_gauss_points),
                "node": pot._eval(self.nodes),
            }
        return self._samples[key]

    def sorted_samples(self, node_vals, dense_vals):
        """Interleave node and Gauss samples in increasing r."""
        n = self.size - 1
        r = np.empty(n * 4 + 1)
        out = np.empty(n * 4 + 1)
        r[0:-1:4] = self.nodes[:-1]
        out[0:-1:4] = node_vals[:-1]
        for j in range(3):
            r[j + 1::4] = self.gauss_points[:, j]
            out[j + 1::4] = dense_vals[:, j]
        r[-1] = self.nodes[-1]
        out[-1] = node_vals[-1]
        return r, out

    def integrate(self, dense_vals) -> float:
        """int_{r_min}^{r_max} f dr from values at the Gauss points."""
        return float(np.sum(self.h * (dense_vals @ kernels.GAUSS_WEIGHTS)))

    def cumulative(self, dense_vals):
        """Cumulative integral from r_min: (values at nodes, values at Gauss points)."""
        totals = self.h * (dense_vals @ kernels.GAUSS_WEIGHTS)
        at_nodes = np.concatenate(([0.0], np.cumsum(totals)))
        partial = self.h[:, None] * (dense_vals @ GAUSS3_PARTIAL.T)
        return at_nodes, at_nodes[:-1, None] + partial

    def cumulative_scaled(self, dense_mant, dense_log, ref_log):
        """Cumulative integral of ``dense_mant * exp(dense_log)``.

        ``ref_log`` gives the reference log scale at each node.  Returns node
        values in units of ``exp(ref_log)`` and Gauss-point values in units of
        ``exp(ref_log[:-1])`` (the left node of each interval).
        """
        terms = dense_mant * np.exp(dense_log - ref_log[:-1, None])
        totals = self.h * (terms @ kernels.GAUSS_WEIGHTS)
        ratio = np.exp(ref_log[:-1] - ref_log[1:])
        at_nodes = kernels.rescaled_cumsum(totals, ratio)
        partial = self.h[:, None] * (terms @ GAUSS3_PARTIAL.T)
        return at_nodes, at_nodes[:-1, None] + partial


def _envelope(pot: PotentialSpec, r_lo: float, r_hi: float):
    """Step function r -> sup_{t >= r} |V(t)| sampled on a log grid."""
    samples = np.geomspace(r_lo, r_hi, 4000)
    extra = []
    for b in pot.breakpoints():
        if r_lo < b < r_hi:
            extra.extend([b * (1 - 1e-12), b])
    samples = np.unique(np.concatenate((samples, extra)))
    vals = np.abs(pot._eval(samples))
    env = np.maximum.accumulate(vals[::-1])[::-1]
    return samples, env


def default_rmax(pot: PotentialSpec, k: float = 0.0, tail_tol: float = 1e-10) -> float:
    support = pot.support
    if support is not None:
        return max(2.0 * support, 10.0 * DEFAULT_R_MIN)
    if k > 0.0:
        R = required_radius(pot, weight_power=0.0, tol=tail_tol)
        return min(R, K_POSITIVE_RMAX_CAP * pot.range_scale())
    return required_radius(pot, weight_power=1.0, tol=tail_tol)


def make_grid(pot: PotentialSpec, k_max: float = 0.0, r_min: float = DEFAULT_R_MIN,
              r_max: Optional[float] = None, points_per_decade: int = DEFAULT_PPD,
              wave_step: float = DEFAULT_WAVE_STEP, extra_breakpoints=()) -> RadialGrid:
    """Build a grid adapted to ``pot`` and the largest momentum to be used."""
    if r_min <= 0.0:
        raise DomainError("r_min must be positive")
    if points_per_decade < 8:
        raise DomainError("points_per_decade must be at least 8")
    if r_max is None:
        r_max = default_rmax(pot, k_max)
    if r_max <= r_min:
        raise DomainError("r_max must exceed r_min")
    stops = sorted({float(b) for b in tuple(pot.breakpoints()) + tuple(extra_breakpoints)
                    if r_min < b < r_max} | {float(r_max)})
    env_r, env_v = _envelope(pot, r_min, r_max)
    ratio = 10.0 ** (1.0 / points_per_decade) - 1.0
    k2 = k_max * k_max
    nodes = [r_min]
    r = r_min
    idx = 0
    for stop in stops:
        while r < stop:
            while idx + 1 < env_r.size and env_r[idx + 1] <= r:
                idx += 1
            local = k2 + env_v[idx]
            h = ratio * r
            if local > 0.0:
                h = min(h, wave_step / math.sqrt(local))
            gap = stop - r
            if gap <= h:
                r = stop
            elif gap < 1.5 * h:
                r += 0.5 * gap
            else:
                r += h
            nodes.append(r)
    return RadialGrid(np.array(nodes), r_min, float(r_max))
