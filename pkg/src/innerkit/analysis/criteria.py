"""Interpolation-type criteria: indicator profiles, exponent fits,
separation constants, and the split of a zero set into interpolating parts.

Verdicts produced here are empirical (finite grids, finite refinements)
and say so in their result objects; the only certified statements are the
optional cell-cover confirmations attached to indicator entries.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..geometry import pseudo_hyperbolic, rho_to_set
from ..inner import ZeroSequence, eval_log_modulus
from .cover import certify_min_modulus
from .grids import SampleGrid


@dataclass
class WepEntry:
    eps: float
    eta: float
    vacuous: bool = False
    certified: bool = False
    certified_lower: float | None = None


@dataclass
class WepProfile:
    """Indicator estimates eta(eps) = min |f| over grid points at
    pseudo-hyperbolic distance >= eps from the zero set.

    Upper estimates of the true indicator, non-increasing under grid
    refinement and non-decreasing in eps.
    """

    entries: list
    refinement_level: int
    grid_size: int

    @property
    def eps_values(self):
        return [e.eps for e in self.entries]

    @property
    def eta_estimates(self):
        return [e.eta for e in self.entries]

    def to_dict(self):
        return {
            "statistic": "wep_indicator",
            "refinement_level": self.refinement_level,
            "grid_size": self.grid_size,
            "entries": [
                {
                    "eps": e.eps,
                    "eta": e.eta,
                    "vacuous": e.vacuous,
                    "certified": e.certified,
                    "certified_lower": e.certified_lower,
                }
                for e in self.entries
            ],
        }


def wep_profile(
    expr,
    zeros,
    eps_list,
    grid,
    budget=1e-9,
    certify=False,
    certify_depth=6,
    certify_slack=0.25,
):
    """Indicator profile of expr against its asserted zero set.

    ``zeros`` is caller-asserted (flattened complex array or ZeroSequence).
    Entries with no qualifying grid point are flagged vacuous with eta 1.
    With certify=True a cell cover is built per entry to confirm
    |f| >= (1 - slack) * eta on the covered region away from the zeros.
    """
    zs = zeros.flattened() if isinstance(zeros, ZeroSequence) else np.asarray(
        zeros, dtype=complex
    )
    cv = eval_log_modulus(expr, grid.points, budget=budget)
    rho = rho_to_set(grid.points, zs)
    ok = ~np.atleast_1d(cv.at_zero)
    lm = np.atleast_1d(cv.log_modulus)
    entries = []
    for eps in sorted(float(e) for e in eps_list):
        mask = ok & (rho >= eps)
        if not mask.any():
            entries.append(WepEntry(eps=eps, eta=1.0, vacuous=True))
            continue
        eta = float(np.exp(lm[mask].min()))
        entry = WepEntry(eps=eps, eta=eta)
        if certify:
            threshold = (1.0 - certify_slack) * eta
            good, lower = certify_min_modulus(
                expr, zs, eps, threshold, depth=certify_depth, budget=budget
            )
            entry.certified = good
            entry.certified_lower = lower
        entries.append(entry)
    return WepProfile(
        entries=entries,
        refinement_level=grid.refinement_level,
        grid_size=len(grid),
    )


def vasyunin_constant(expr, zeros, grid, budget=1e-9):
    """min over the grid of |f(z)| / rho(z, zeros); at-zero points skipped.

    A positive limit under refinement indicates an interpolating product;
    the value is always <= 1 for products containing the nearest zero.
    """
    zs = zeros.flattened() if isinstance(zeros, ZeroSequence) else np.asarray(
        zeros, dtype=complex
    )
    cv = eval_log_modulus(expr, grid.points, budget=budget)
    rho = rho_to_set(grid.points, zs)
    mask = ~np.atleast_1d(cv.at_zero) & (rho > 0.0)
    lm = np.atleast_1d(cv.log_modulus)
    if not mask.any():
        return np.inf
    return float(np.exp((lm[mask] - np.log(rho[mask])).min()))


@dataclass
class CnFit:
    """Per-exponent constants A_n = min |f| / rho^n across grid refinements.

    ``exponent`` is the first n whose A_n does not decay across the two
    refinement steps (heuristic verdict, None when every exponent decays,
    consistent with WEP-but-not-finite-exponent examples).
    """

    exponent: int | None
    constants: dict
    decay_ratio: float
    refinement_levels: list

    def to_dict(self):
        return {
            "statistic": "cn_exponent_fit",
            "exponent": self.exponent,
            "decay_ratio": self.decay_ratio,
            "refinement_levels": self.refinement_levels,
            "constants": {str(n): vals for n, vals in self.constants.items()},
        }


def cn_exponent_fit(expr, zeros, grid, n_max=6, refinements=2, decay_ratio=0.75, budget=1e-9):
    """Fit the smallest exponent n with a non-decaying constant A_n."""
    zs = zeros.flattened() if isinstance(zeros, ZeroSequence) else np.asarray(
        zeros, dtype=complex
    )
    grids = [grid]
    for _ in range(refinements):
        grids.append(grids[-1].refine())
    constants = {n: [] for n in range(1, n_max + 1)}
    for g in grids:
        cv = eval_log_modulus(expr, g.points, budget=budget)
        rho = rho_to_set(g.points, zs)
        lm = np.atleast_1d(cv.log_modulus)
        mask = ~np.atleast_1d(cv.at_zero) & (rho > 0.0)
        logrho = np.log(rho[mask])
        base = lm[mask]
        for n in range(1, n_max + 1):
            constants[n].append(float(np.exp((base - n * logrho).min())))
    exponent = None
    for n in range(1, n_max + 1):
        vals = constants[n]
        decays = all(vals[i + 1] < decay_ratio * vals[i] for i in range(len(vals) - 1))
        if not decays:
            exponent = n
            break
    return CnFit(
        exponent=exponent,
        constants=constants,
        decay_ratio=decay_ratio,
        refinement_levels=[g.refinement_level for g in grids],
    )


def carleson_delta(seq):
    """Separation constant min_k prod_{j != k} rho(z_j, z_k) and its argmin.

    Equals |B'(z_k)| (1 - |z_k|^2) minimized over zeros of the product
    built from the sequence.  A repeated zero gives (0.0, witness index).
    """
    if isinstance(seq, ZeroSequence):
        if np.any(seq.mults > 1):
            return 0.0, int(np.argmax(seq.mults > 1))
        zeros = seq.zeros
    else:
        zeros = np.asarray(seq, dtype=complex)
    n = len(zeros)
    if n == 0:
        raise ValueError("empty zero sequence")
    if n == 1:
        return 1.0, 0
    log_delta = np.zeros(n)
    for k in range(n):
        others = np.concatenate([zeros[:k], zeros[k + 1 :]])
        rho = pseudo_hyperbolic(zeros[k], others)
        if np.any(rho < 1e-15):
            return 0.0, k
        log_delta[k] = np.log(rho).sum()
    k = int(np.argmin(log_delta))
    return float(np.exp(log_delta[k])), k


class DecompositionError(ValueError):
    """Input zeros violate the multiplicity bound; carries a witness disk."""

    def __init__(self, message, center, radius, count):
        super().__init__(message)
        self.center = center
        self.radius = radius
        self.count = count


@dataclass
class DecompositionResult:
    subsets: list
    carleson_constants: list
    delta: float
    component_count: int
    component_sizes: dict

    def to_dict(self):
        return {
            "statistic": "interpolating_decomposition",
            "delta": self.delta,
            "subset_sizes": [len(s) for s in self.subsets],
            "carleson_constants": self.carleson_constants,
            "component_count": self.component_count,
            "component_sizes": {str(k): v for k, v in self.component_sizes.items()},
        }


def _pairwise_rho(zeros):
    diff = np.abs(zeros[:, None] - zeros[None, :])
    den = np.abs(1.0 - np.conj(zeros[:, None]) * zeros[None, :])
    return diff / den


def split_into_interpolating(seq, n, delta_min_exp=20):
    """Split a zero multiset into n interpolating subsets.

    Finds the largest dyadic delta <= 1/2 such that every pseudo-hyperbolic
    delta-disk around a zero holds at most n zeros, links zeros closer than
    delta/(2n) into components (each then has at most n elements: n+1 chained
    points would sit inside one delta-disk), and deals the points of each
    component to distinct subsets.  Raises DecompositionError when no
    admissible delta >= 2**-delta_min_exp exists.
    """
    if not isinstance(seq, ZeroSequence):
        seq = ZeroSequence(seq)
    if n < 1:
        raise ValueError("n must be at least 1")
    zeros = seq.flattened()
    count = len(zeros)
    if count == 0:
        raise ValueError("empty zero sequence")
    rho = _pairwise_rho(zeros)
    delta = None
    for m in range(1, delta_min_exp + 1):
        cand = 2.0**-m
        per_disk = (rho < cand).sum(axis=1)  # diagonal counts the center
        if per_disk.max() <= n:
            delta = cand
            break
    if delta is None:
        worst = int(per_disk.argmax())
        raise DecompositionError(
            f"input violates the multiplicity bound: disk of radius 2**-{delta_min_exp} "
            f"around zero {worst} holds {int(per_disk[worst])} > {n} zeros",
            center=complex(zeros[worst]),
            radius=2.0**-delta_min_exp,
            count=int(per_disk[worst]),
        )

    # connected components under rho < delta/(2n)
    parent = list(range(count))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    edges = np.argwhere(rho < delta / (2 * n))
    for i, j in edges:
        if i < j:
            ri, rj = find(int(i)), find(int(j))
            if ri != rj:
                parent[rj] = ri
    comps: dict[int, list[int]] = {}
    for i in range(count):
        comps.setdefault(find(i), []).append(i)
    for members in comps.values():
        if len(members) > n:
            raise DecompositionError(
                f"component of {len(members)} zeros at the admissible delta {delta}",
                center=complex(zeros[members[0]]),
                radius=delta,
                count=len(members),
            )

    # deterministic deal: components and their points ordered by (|z|, arg z)
    def key(i):
        z = zeros[i]
        return (abs(z), np.angle(z) % (2 * np.pi), i)

    ordered = sorted(comps.values(), key=lambda mem: min(key(i) for i in mem))
    bins: list[list[int]] = [[] for _ in range(n)]
    counter = 0
    for members in ordered:
        for i in sorted(members, key=key):
            bins[counter % n].append(i)
            counter += 1
    subsets = [ZeroSequence(zeros[ids]) if ids else ZeroSequence() for ids in bins]
    constants = []
    for s in subsets:
        constants.append(carleson_delta(s)[0] if len(s) else 1.0)
    sizes: dict[int, int] = {}
    for members in comps.values():
        sizes[len(members)] = sizes.get(len(members), 0) + 1
    return DecompositionResult(
        subsets=subsets,
        carleson_constants=constants,
        delta=delta,
        component_count=len(comps),
        component_sizes=sizes,
    )
