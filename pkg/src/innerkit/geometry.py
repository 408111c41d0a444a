"""Pseudo-hyperbolic geometry of the unit disc and the upper half-plane.

Points are plain complex numbers (scalars or numpy arrays; everything
broadcasts).  The disc is tiled by dyadic annulus-sector cells

    cell (j, k):  2**-j < 1 - |z| <= 2**(1-j),
                  2*pi*(k-1)*2**-j <= arg z < 2*pi*k*2**-j,

for j >= 2, 1 <= k <= 2**j, plus a single root cell (0, 1) holding the
central disc |z| < 1/2.  Cells have bounded hyperbolic diameter, which is
what every stratified sweep in this package relies on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi

#: deepest representable cell level; zeros closer to the boundary than
#: 2**-J_MAX_DEFAULT are rejected at index construction (double precision
#: cannot resolve 1-|z| below that scale reliably).
J_MAX_DEFAULT = 52

ROOT_CELL = (0, 1)


def require_in_disc(z, name="z"):
    """Raise ValueError unless every entry lies strictly inside the disc."""
    if np.any(np.abs(z) >= 1.0):
        raise ValueError(f"{name} must lie strictly inside the unit disc")


def require_in_halfplane(z, name="z"):
    if np.any(np.imag(z) <= 0.0):
        raise ValueError(f"{name} must lie strictly inside the upper half-plane")


def pseudo_hyperbolic(z, w):
    """Pseudo-hyperbolic distance |z - w| / |1 - conj(z) w|.

    Symmetric, Moebius invariant, valued in [0, 1) for in-disc arguments.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return np.abs(z - w) / np.abs(1.0 - np.conj(z) * w)


def halfplane_distance(z, w):
    """Pseudo-hyperbolic distance on the upper half-plane, |z-w|/|z-conj(w)|."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    return np.abs(z - w) / np.abs(z - np.conj(w))


def mobius(a, z):
    """Disc automorphism phi_a(z) = (a - z) / (1 - z conj(a)).

    Involution: mobius(a, mobius(a, z)) == z.  phi_a swaps 0 and a.
    """
    a = np.asarray(a, dtype=complex)
    z = np.asarray(z, dtype=complex)
    return (a - z) / (1.0 - z * np.conj(a))


def cayley(w):
    """Upper half-plane to disc, w -> (w - i)/(w + i); sends i to 0."""
    w = np.asarray(w, dtype=complex)
    return (w - 1j) / (w + 1j)


def cayley_inv(q):
    """Disc to upper half-plane, q -> i (1 + q)/(1 - q); inverse of cayley."""
    q = np.asarray(q, dtype=complex)
    return 1j * (1.0 + q) / (1.0 - q)


def whitney_cell(z):
    """Cell index (j, k) of a disc point; (0, 1) for the central disc.

    For |z| >= 1/2 the returned pair satisfies the defining inequalities
    exactly (floating-point drift at cell borders is repaired by a local
    search over adjacent j).
    """
    z = complex(z)
    r = abs(z)
    if r >= 1.0:
        raise ValueError("point on or outside the unit circle")
    if r < 0.5:
        return ROOT_CELL
    t = 1.0 - r
    j = int(math.floor(-math.log2(t))) + 1
    while t <= 2.0 ** (-j):
        j += 1
    while t > 2.0 ** (1 - j):
        j -= 1
    theta = math.atan2(z.imag, z.real)
    if theta < 0.0:
        theta += TWO_PI
    width = TWO_PI * 2.0 ** (-j)
    k = int(theta / width) + 1
    return j, min(max(k, 1), 1 << j)


def whitney_levels(z):
    """Vectorized cell level of each point (0 for the central disc)."""
    z = np.asarray(z, dtype=complex)
    t = 1.0 - np.abs(z)
    if np.any(t <= 0.0):
        raise ValueError("point on or outside the unit circle")
    j = np.floor(-np.log2(t)).astype(int) + 1
    # repair border cases: need 2**-j < t <= 2**(1-j)
    j = np.where(t <= 2.0 ** (-j.astype(float)), j + 1, j)
    j = np.where(t > 2.0 ** (1.0 - j.astype(float)), j - 1, j)
    return np.where(np.abs(z) < 0.5, 0, j)


def cell_bounds(j, k):
    """(r_lo, r_hi, theta_lo, theta_hi) of a cell; closed radial bounds."""
    if (j, k) == ROOT_CELL:
        return 0.0, 0.5, 0.0, TWO_PI
    width = TWO_PI * 2.0 ** (-j)
    return 1.0 - 2.0 ** (1 - j), 1.0 - 2.0 ** (-j), (k - 1) * width, k * width


@dataclass(frozen=True)
class HyperbolicDisk:
    """Pseudo-hyperbolic ball {z : rho(center, z) < radius}."""

    center: complex
    radius: float

    def __post_init__(self):
        require_in_disc(self.center, "center")
        if not 0.0 < self.radius < 1.0:
            raise ValueError("radius must lie in (0, 1)")

    def contains(self, z):
        return pseudo_hyperbolic(self.center, z) < self.radius


def rho_lower_bound(euclid_dist, abs_z):
    """Certified lower bound rho(z, w) >= d / (d + 1 - |z|^2) for |z - w| >= d.

    Follows from |1 - conj(z) w| <= (1 - |z|^2) + |z||z - w|; the bound is
    increasing in d, which makes it usable for pruning.
    """
    c = 1.0 - abs_z * abs_z
    return euclid_dist / (euclid_dist + c)


def _sector_euclid_dist(z, bounds):
    """Exact Euclidean distance from z to a closed annular sector."""
    r_lo, r_hi, th_lo, th_hi = bounds
    r = abs(z)
    theta = math.atan2(z.imag, z.real)
    if theta < 0.0:
        theta += TWO_PI
    span = th_hi - th_lo
    rel = (theta - th_lo) % TWO_PI
    if rel <= span:
        return max(r_lo - r, r - r_hi, 0.0)
    # nearest point lies on one of the radial edge segments
    best = math.inf
    for edge_angle in (th_lo, th_hi):
        u = complex(math.cos(edge_angle), math.sin(edge_angle))
        proj = (z * u.conjugate()).real
        t = min(max(proj, r_lo), r_hi)
        best = min(best, abs(z - t * u))
    return best


class ZeroIndex:
    """Read-only spatial index over a finite zero multiset, bucketed by cell.

    Construction rejects zeros deeper than 2**-j_max.  The index is immutable
    after construction and safe to share across threads.
    """

    def __init__(self, zeros, mults=None, j_max=J_MAX_DEFAULT):
        zeros = np.atleast_1d(np.asarray(zeros, dtype=complex))
        require_in_disc(zeros, "zeros")
        if mults is None:
            mults = np.ones(len(zeros), dtype=int)
        mults = np.atleast_1d(np.asarray(mults, dtype=int))
        if np.any(mults < 1):
            raise ValueError("multiplicities must be positive")
        if len(mults) != len(zeros):
            raise ValueError("zeros and multiplicities length mismatch")
        depth = 1.0 - np.abs(zeros)
        if np.any(depth < 2.0 ** (-j_max)):
            raise ValueError(
                f"zero closer to the boundary than 2**-{j_max}; "
                "raise j_max or drop the offending zero"
            )
        self.zeros = zeros
        self.mults = mults
        self.j_max = j_max
        buckets: dict[tuple[int, int], list[int]] = {}
        for i, zk in enumerate(zeros):
            buckets.setdefault(whitney_cell(zk), []).append(i)
        self.buckets = {
            cell: np.asarray(ids, dtype=int) for cell, ids in buckets.items()
        }
        self._cell_bounds = {cell: cell_bounds(*cell) for cell in self.buckets}

    def __len__(self):
        return len(self.zeros)

    def nearest(self, z):
        """(min rho, index of a witness zero); (1.0, None) when empty.

        Buckets are scanned in order of a certified lower bound on rho and
        abandoned as soon as no closer zero can exist; agrees with the
        brute-force scan by construction of the bound.
        """
        if len(self.zeros) == 0:
            return 1.0, None
        z = complex(z)
        require_in_disc(z)
        abs_z = abs(z)
        order = []
        for cell, ids in self.buckets.items():
            d = _sector_euclid_dist(z, self._cell_bounds[cell])
            order.append((rho_lower_bound(d, abs_z), ids))
        order.sort(key=lambda item: item[0])
        best = math.inf
        best_id = None
        for lb, ids in order:
            if lb >= best:
                break
            rho = pseudo_hyperbolic(z, self.zeros[ids])
            pos = int(np.argmin(rho))
            if rho[pos] < best:
                best = float(rho[pos])
                best_id = int(ids[pos])
        return best, best_id


def rho_to_set(points, zeros, chunk=262144):
    """min over zeros of rho(point, zero), vectorized over points."""
    points = np.atleast_1d(np.asarray(points, dtype=complex))
    zeros = np.atleast_1d(np.asarray(zeros, dtype=complex))
    if zeros.size == 0:
        return np.ones(points.shape, dtype=float)
    out = np.empty(points.shape, dtype=float)
    step = max(1, chunk // max(1, zeros.size))
    for lo in range(0, points.size, step):
        blk = points[lo : lo + step, None]
        rho = np.abs(blk - zeros[None, :]) / np.abs(1.0 - np.conj(blk) * zeros[None, :])
        out[lo : lo + step] = rho.min(axis=1)
    return out
