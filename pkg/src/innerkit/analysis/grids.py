"""Stratified sample grids over the unit disc.

A grid places the same quota of low-discrepancy points in every dyadic
cell up to a chosen depth (plus the central disc), so the boundary region,
where all the action is, is sampled at constant density per cell rather
than per unit area.  Point streams are prefix-nested: doubling the quota
keeps every existing point, which makes grid minima monotone under
refinement and halves the radial resolution exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..geometry import TWO_PI, whitney_levels


def radical_inverse(i, base):
    """Van der Corput radical inverse of integer array i in the given base."""
    i = np.asarray(i, dtype=np.int64).copy()
    out = np.zeros(i.shape, dtype=float)
    f = 1.0 / base
    while np.any(i > 0):
        out += (i % base) * f
        i //= base
        f /= base
    return out


def _next_pow2(n):
    return 1 << max(0, int(math.ceil(math.log2(max(1, n)))))


@dataclass
class SampleGrid:
    """Quota points per cell for the central disc and levels 2..depth.

    Placement within a cell: radial coordinate from the base-2 radical
    inverse (exactly uniform for power-of-two quotas, nested under
    doubling), angular coordinate from the base-3 radical inverse.
    """

    points: np.ndarray
    levels: np.ndarray
    quota: int
    depth: int
    refinement_level: int = 0

    @classmethod
    def build(cls, depth, quota=16, refinement_level=0):
        if depth < 2:
            raise ValueError("depth must be at least 2")
        quota = _next_pow2(quota)
        idx = np.arange(quota)
        s = radical_inverse(idx, 2)
        t = radical_inverse(idx, 3)
        chunks = []
        lvls = []
        # central disc: uniform radial samples, spacing 0.5/quota
        chunks.append(0.5 * s * np.exp(1j * TWO_PI * t))
        lvls.append(np.zeros(quota, dtype=np.int16))
        for j in range(2, depth + 1):
            k = np.repeat(np.arange(1 << j), quota)
            ss = np.tile(s, 1 << j)
            tt = np.tile(t, 1 << j)
            r = 1.0 - 2.0 ** (1 - j) * 2.0 ** (-ss)
            theta = TWO_PI * 2.0 ** (-j) * (k + tt)
            chunks.append(r * np.exp(1j * theta))
            lvls.append(np.full((1 << j) * quota, j, dtype=np.int16))
        return cls(
            points=np.concatenate(chunks),
            levels=np.concatenate(lvls),
            quota=quota,
            depth=depth,
            refinement_level=refinement_level,
        )

    def refine(self):
        """Same strata with doubled quota; contains every current point."""
        return SampleGrid.build(
            self.depth, self.quota * 2, refinement_level=self.refinement_level + 1
        )

    def __len__(self):
        return len(self.points)

    def cell_count(self):
        return 1 + sum(1 << j for j in range(2, self.depth + 1))

    def radial_resolution(self, radius):
        """Spacing of sampled moduli near the given radius."""
        if radius < 0.5:
            return 0.5 / self.quota
        return (1.0 - radius) * (1.0 - 2.0 ** (-1.0 / self.quota))


def depth_for_zeros(zeros, margin=2, min_depth=6, max_depth=40):
    """Grid depth reaching a couple of levels past the deepest zero."""
    zeros = np.asarray(zeros, dtype=complex)
    if zeros.size == 0:
        return min_depth
    deepest = int(whitney_levels(zeros).max())
    return int(min(max_depth, max(min_depth, deepest + margin)))
