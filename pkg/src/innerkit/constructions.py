"""Parametric generators for the package's worked examples.

Three families:

* graded cell families: (N - j)+ zeros in every dyadic cell at level j,
  with two-sided separation ~ (N - j)^(-1/2), and the shifted block
  products built from them (indicator stays positive at every fixed
  distance while no finite exponent bound survives refinement);
* circle block measures: blocks of n_k equal atoms at consecutive N_k-th
  roots of unity, sized so the sublevel sets of the singular factor keep
  collecting weighted area near the boundary;
* half-plane lattice measures: two-scale atom lattices whose Poisson sum
  exceeds c n^(1/3) on a union of boxes while every superlevel set keeps
  finite weighted area.

Everything is deterministic in its parameters; desk-scale caps keep atom
counts in memory and runtimes in seconds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import TWO_PI, mobius, pseudo_hyperbolic, rho_to_set
from .inner import (
    AtomicMeasure,
    BlaschkeProduct,
    Precompose,
    Product,
    SingularInner,
    ZeroSequence,
    blaschke,
    eval_log_modulus,
)

SEPARATION_BRACKET = (0.3, 3.0)


# --------------------------------------------------------------------------
# graded cell families


def _family_cell_point(j, k, s, t):
    """Point of cell (j, k) at cell-local coordinates (s, t) in [0, 1)."""
    if j == 1:
        # central-disc halves; the s-range is inset by the caller
        r = 1.0 - 2.0 ** (-s)
        theta = math.pi * (k - 1 + t)
    else:
        r = 1.0 - 2.0 ** (1 - j) * 2.0 ** (-s)
        theta = TWO_PI * 2.0 ** (-j) * (k - 1 + t)
    return r * np.exp(1j * theta)


def _subgrid_dims(d):
    """Angular x radial node counts, matched to the ~2.7 : 1 cell aspect."""
    m_t = max(1, math.ceil(math.sqrt(2.7 * d)))
    m_r = max(1, math.ceil(d / m_t))
    return m_t, m_r


def _cell_nodes(j, k, d):
    m_t, m_r = _subgrid_dims(d)
    nodes = np.empty(d, dtype=complex)
    for i in range(d):
        a, b = divmod(i, m_t)
        s = (a + 0.5) / m_r
        if j == 1:
            # keep central-cell rows away from the origin, where angular
            # spacing would collapse below the separation bracket
            s = 0.35 + 0.65 * s
        nodes[i] = _family_cell_point(j, k, s, (b + 0.5) / m_t)
    return nodes


@dataclass
class FamilyStats:
    """Per-level separation statistics, in units of (N - j)^(-1/2)."""

    sibling_min: dict
    sibling_max: dict
    covering_max: dict

    def worst(self):
        vals = (
            list(self.sibling_min.values())
            + list(self.sibling_max.values())
            + list(self.covering_max.values())
        )
        return (min(vals), max(vals)) if vals else (1.0, 1.0)

    def to_dict(self):
        return {
            "sibling_min": {str(j): v for j, v in self.sibling_min.items()},
            "sibling_max": {str(j): v for j, v in self.sibling_max.items()},
            "covering_max": {str(j): v for j, v in self.covering_max.items()},
        }


def _family_cells(N):
    for j in range(1, N):
        for k in range(1, (1 << j) + 1):
            yield j, k, N - j


def graded_cell_family(N, with_stats=True, probes=8):
    """Zeros with exactly (N - j)+ points per level-j cell, j = 1..N-1.

    Placement is a per-cell sub-grid matched to the cell's hyperbolic
    aspect; nearest-sibling and covering statistics are verified against
    the brackets [0.3, 3] * (N - j)^(-1/2) and a violation raises (it
    would mean the placement rule itself broke).
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if N > 12:
        raise ValueError("desk-scale cap: N <= 12 (cell populations grow as 2**N)")
    cells = {}
    for j, k, d in _family_cells(N):
        cells[(j, k)] = _cell_nodes(j, k, d)
    pts = (
        np.concatenate([cells[key] for key in sorted(cells)])
        if cells
        else np.empty(0, dtype=complex)
    )
    seq = ZeroSequence(pts) if len(pts) else ZeroSequence()
    if not with_stats or not cells:
        return seq, None

    def neighbor_points(j, k):
        out = []
        for jj in (j - 1, j, j + 1):
            if jj < 1 or jj >= N:
                continue
            lo = math.floor((k - 1) * 2.0 ** (jj - j)) - 1
            hi = math.ceil(k * 2.0 ** (jj - j)) + 1
            for kk in range(lo, hi + 1):
                key = (jj, (kk - 1) % (1 << jj) + 1)
                if key in cells:
                    out.append(cells[key])
        return np.concatenate(out)

    sib_min, sib_max, cov_max = {}, {}, {}
    for (j, k), nodes in cells.items():
        scale = (N - j) ** -0.5
        if len(nodes) > 1:
            rho = pseudo_hyperbolic(nodes[:, None], nodes[None, :])
            np.fill_diagonal(rho, 2.0)
            near = rho.min(axis=1)
            sib_min[j] = min(sib_min.get(j, np.inf), near.min() / scale)
            sib_max[j] = max(sib_max.get(j, 0.0), near.max() / scale)
        probe = np.array(
            [
                _family_cell_point(j, k, (a + 0.5) / probes, (b + 0.5) / probes)
                for a in range(probes)
                for b in range(probes)
            ]
        )
        fam = neighbor_points(j, k)
        cov = pseudo_hyperbolic(probe[:, None], fam[None, :]).min(axis=1).max()
        cov_max[j] = max(cov_max.get(j, 0.0), cov / scale)
    stats = FamilyStats(sibling_min=sib_min, sibling_max=sib_max, covering_max=cov_max)
    lo, hi = stats.worst()
    if lo < SEPARATION_BRACKET[0] or hi > SEPARATION_BRACKET[1]:
        raise RuntimeError(
            f"placement rule bug: separation statistic {lo:.3f}..{hi:.3f} outside "
            f"brackets {SEPARATION_BRACKET}"
        )
    return seq, stats


# --------------------------------------------------------------------------
# shifted block products


@dataclass
class ShiftedBlockProduct:
    expr: Product
    shifts: list
    factor_families: list
    protected_radii: list
    tail_bounds: dict

    def zero_sequence(self):
        zs = [
            mobius(w, fam.zeros)
            for w, fam in zip(self.shifts, self.factor_families)
            if len(fam)
        ]
        return ZeroSequence(np.concatenate(zs)) if zs else ZeroSequence()

    def to_dict(self):
        return {
            "shifts": [w for w in self.shifts],
            "zero_count": len(self.zero_sequence()),
            "protected_radii": self.protected_radii,
            "tail_bounds": {str(k): v for k, v in self.tail_bounds.items()},
        }


def _shift_mass(family, r):
    """sum(1 - |phi_w(z)|) over the family, w = 1 - r, plus the largest term."""
    if len(family) == 0:
        return 0.0, 0.0
    depth = 1.0 - np.abs(mobius(1.0 - r, family.zeros))
    return float(depth.sum()), float(depth.max())


def shifted_block_product(N_list, r_first_exp=3, max_exp=45):
    """Product over k of B_k(phi_{w_k}) with adaptively certified shifts.

    w_k = 1 - r_k real, r_k dyadic and decreasing, chosen largest such that
    for every earlier factor p < k the whole tail m > p perturbs log|B| on
    the protected disc |z| <= 1 - 2 r_p by less than 2**-p (factor m gets
    the share 2**-m / 2; the per-zero bound is
    -log rho(z, zeta) <= 4 (1 - |zeta|)/(1 - R), valid once
    1 - |zeta| <= (1 - R)/8).  Raises when the dyadic search runs out of
    representable radii (the selection budget is exhausted).
    """
    if list(N_list) != sorted(N_list) or len(set(N_list)) != len(N_list):
        raise ValueError("N_list must be strictly increasing")
    families = [graded_cell_family(N)[0] for N in N_list]
    shifts, radii = [], []
    exp_prev = r_first_exp - 1
    tail_bounds = {}
    for k, fam in enumerate(families, start=1):
        chosen = None
        for i in range(exp_prev + 1, max_exp + 1):
            r = 2.0**-i
            mass, worst = _shift_mass(fam, r)
            ok = True
            for p, r_p in enumerate(radii, start=1):
                if worst > r_p / 4.0:  # validity of the per-zero bound
                    ok = False
                    break
                if (2.0 / r_p) * mass > 2.0 ** (-k) / 2.0:
                    ok = False
                    break
            if ok and (len(fam) == 0 or (1.0 - np.abs(mobius(1.0 - r, fam.zeros))).min() >= 2.0**-52):
                chosen = (i, r, mass)
                break
        if chosen is None:
            raise RuntimeError(
                f"w-selection budget exhausted at factor {k}: no dyadic radius "
                f"down to 2**-{max_exp} satisfies the tail certificates"
            )
        i, r, mass = chosen
        exp_prev = i
        radii.append(r)
        shifts.append(1.0 - r)
        for p, r_p in enumerate(radii[:-1], start=1):
            tail_bounds.setdefault(p, 0.0)
            tail_bounds[p] += (2.0 / r_p) * mass
    factors = tuple(
        Precompose(w, BlaschkeProduct(fam)) for w, fam in zip(shifts, families)
    )
    return ShiftedBlockProduct(
        expr=Product(factors),
        shifts=shifts,
        factor_families=families,
        protected_radii=[1.0 - 2.0 * r for r in radii],
        tail_bounds=tail_bounds,
    )


@dataclass
class IndicatorFloorFit:
    """Fitted floor min|B| >= c1 * x * exp(-c / x**4) over distance bins."""

    bin_centers: list
    bin_minima: list
    c: float
    c1: float

    def to_dict(self):
        return {
            "statistic": "indicator_floor_fit",
            "bin_centers": self.bin_centers,
            "bin_minima": self.bin_minima,
            "c": self.c,
            "c1": self.c1,
        }


def indicator_floor_fit(expr, zeros, grid, bins=12, budget=1e-9):
    """Bin grid points by rho to the zero set and fit the floor profile.

    The exponent c comes from least squares on log(min/x) against -1/x^4;
    c1 is then lowered until the floor holds on every bin, so the returned
    pair always satisfies min_i >= c1 x_i exp(-c/x_i^4).
    """
    zs = zeros.flattened() if isinstance(zeros, ZeroSequence) else np.asarray(
        zeros, dtype=complex
    )
    cv = eval_log_modulus(expr, grid.points, budget=budget)
    lm = np.atleast_1d(cv.log_modulus)
    rho = rho_to_set(grid.points, zs)
    ok = ~np.atleast_1d(cv.at_zero) & (rho > 1e-6) & (rho < 1.0)
    edges = np.geomspace(max(1e-4, rho[ok].min()), 1.0, bins + 1)
    centers, minima = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sel = ok & (rho >= lo) & (rho < hi)
        if sel.sum() < 4:
            continue
        centers.append(float(math.sqrt(lo * hi)))
        minima.append(float(np.exp(lm[sel].min())))
    x = np.asarray(centers)
    y = np.log(np.asarray(minima)) - np.log(x)
    a = np.vstack([np.ones_like(x), -1.0 / x**4]).T
    sol, *_ = np.linalg.lstsq(a, y, rcond=None)
    c = max(0.0, float(sol[1]))
    c1 = float(np.min(np.asarray(minima) / (x * np.exp(-c / x**4))))
    return IndicatorFloorFit(
        bin_centers=centers, bin_minima=minima, c=c, c1=c1
    )


# --------------------------------------------------------------------------
# circle block measures


@dataclass
class CircleBlocks:
    measure: AtomicMeasure
    eps: list
    n: list
    N: list

    def block_measure(self, k):
        """Single block k as its own measure."""
        angles = TWO_PI * np.arange(1, self.n[k - 1] + 1) / self.N[k - 1]
        return AtomicMeasure(angles, np.full(self.n[k - 1], self.eps[k - 1]))

    def block_mass(self, k):
        return self.eps[k - 1] * self.n[k - 1]

    def to_dict(self):
        return {
            "blocks": [
                {"k": k + 1, "eps": self.eps[k], "n": self.n[k], "N": self.N[k],
                 "mass": self.eps[k] * self.n[k]}
                for k in range(len(self.eps))
            ],
            "atom_count": len(self.measure),
            "total_mass": self.measure.total_mass,
        }


def circle_block_measure(k_max):
    """Union over k <= k_max of n_k atoms of mass eps_k at angles 2 pi m / N_k.

    Schedule: eps_k = 2**-k^2, n_k = 2**(k^2 - k), N_k = k 2**k^2, so each
    block carries mass exactly 2**-k.  Atom counts are materialized, which
    caps k_max at 4 (n_4 = 4096; n_5 would be over a million atoms).
    """
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if k_max > 4:
        raise ValueError(
            "desk-scale cap: k_max <= 4 (n_5 = 2**20 atoms would be materialized)"
        )
    eps, n, N = [], [], []
    angles, masses = [], []
    for k in range(1, k_max + 1):
        eps_k = 2.0 ** (-k * k)
        n_k = 2 ** (k * k - k)
        N_k = k * 2 ** (k * k)
        eps.append(eps_k)
        n.append(n_k)
        N.append(N_k)
        angles.append(TWO_PI * np.arange(1, n_k + 1) / N_k)
        masses.append(np.full(n_k, eps_k))
    measure = AtomicMeasure(np.concatenate(angles), np.concatenate(masses))
    return CircleBlocks(measure=measure, eps=eps, n=n, N=N)


@dataclass
class SectorBound:
    k: int
    theta_hi: float
    t_lo: float
    t_hi: float
    area: float
    area_bracket: tuple
    c_hat: float | None
    c_hat_refined: float | None

    def to_dict(self):
        return {
            "statistic": "block_sector_bound",
            "k": self.k,
            "sector": {"theta_hi": self.theta_hi, "t_lo": self.t_lo, "t_hi": self.t_hi},
            "area": self.area,
            "area_bracket": list(self.area_bracket),
            "c_hat": self.c_hat,
            "c_hat_refined": self.c_hat_refined,
        }


def block_sector_bound(blocks, k, samples=32):
    """Sector spec and weighted-area value for block k, plus the empirical
    lower constant min over the sector of (P * mu_k) / (eps_k N_k).

    The sector is 0 < arg z < 2 pi n/N, 1/N < 1 - |z| < n/N; its weighted
    area is exact, Delta_theta * (ln n - (n-1)/N), bracketed by
    [(1 - n/N) * Delta_theta * ln n, Delta_theta * ln n].  Degenerate for
    n = 1 (empty sector, zero area).
    """
    eps_k, n_k, N_k = blocks.eps[k - 1], blocks.n[k - 1], blocks.N[k - 1]
    theta_hi = TWO_PI * n_k / N_k
    t_lo, t_hi = 1.0 / N_k, n_k / N_k
    if n_k == 1:
        return SectorBound(k, theta_hi, t_lo, t_hi, 0.0, (0.0, 0.0), None, None)
    area = theta_hi * (math.log(n_k) - (n_k - 1) / N_k)
    bracket = ((1.0 - n_k / N_k) * theta_hi * math.log(n_k), theta_hi * math.log(n_k))
    mu = blocks.block_measure(k)
    sf = SingularInner(mu)

    def min_ratio(m):
        t = np.geomspace(t_lo * 1.0001, t_hi * 0.9999, m)
        th = np.linspace(theta_hi / (m + 1), theta_hi * (1 - 1.0 / (m + 1)), m)
        z = ((1.0 - t)[:, None] * np.exp(1j * th)[None, :]).ravel()
        u = -eval_log_modulus(sf, z).log_modulus  # P * mu_k
        return float(u.min() / (eps_k * N_k))

    return SectorBound(
        k,
        theta_hi,
        t_lo,
        t_hi,
        area,
        bracket,
        min_ratio(samples),
        min_ratio(2 * samples),
    )


# --------------------------------------------------------------------------
# half-plane lattice measures


@dataclass
class LatticeBlocks:
    measure: AtomicMeasure
    n: list
    N: list

    def block_measure(self, j):
        n_j, N_j = self.n[j - 1], self.N[j - 1]
        return AtomicMeasure(
            _lattice_positions(n_j, N_j),
            np.full(1 << (2 * n_j), n_j ** (1.0 / 3.0) / N_j),
            model="halfplane",
        )

    def block_mass(self, j):
        n_j, N_j = self.n[j - 1], self.N[j - 1]
        return n_j ** (1.0 / 3.0) / N_j * (1 << (2 * n_j))

    def to_dict(self):
        return {
            "blocks": [
                {
                    "j": j + 1,
                    "n": self.n[j],
                    "N": self.N[j],
                    "atoms": 1 << (2 * self.n[j]),
                    "mass": self.block_mass(j + 1),
                }
                for j in range(len(self.n))
            ],
            "atom_count": len(self.measure),
            "summability_terms": [
                self.n[j] * (1 << (2 * self.n[j])) / self.N[j]
                for j in range(len(self.n))
            ],
            "growth_terms": [
                self.n[j] ** (5.0 / 3.0) * (1 << (2 * self.n[j])) / self.N[j]
                for j in range(len(self.n))
            ],
        }


def _lattice_positions(n, N):
    m = np.arange(1 << n)
    s = np.arange(1 << n)
    grid = (s[:, None] * n ** (2.0 / 3.0) * (1 << n) + m[None, :]) / N
    return grid.ravel()


def halfplane_lattice_measure(j_max, schedule=None):
    """Atoms lambda_{m,s} = (s n^(2/3) 2^n + m)/N, each of mass n^(1/3)/N.

    Default schedule n_j = 2**j, N_j = ceil(n_j^(4/3)) * 2**(2 n_j): then
    sum n_j 2**(2 n_j)/N_j tracks the summable n_j^(-1/3) pattern while
    n_j^(5/3) 2**(2 n_j)/N_j = n_j^(1/3) increases, and N_j > 2**(2 n_j)
    always.  Block j materializes 2**(2 n_j) atoms, capping j_max at 3.
    """
    if j_max < 1:
        raise ValueError("j_max must be at least 1")
    if j_max > 3 and schedule is None:
        raise ValueError(
            "desk-scale cap: j_max <= 3 (block 4 would materialize 2**32 atoms)"
        )
    ns, Ns = [], []
    for j in range(1, j_max + 1):
        if schedule is None:
            n_j = 2**j
            N_j = math.ceil(n_j ** (4.0 / 3.0)) * (1 << (2 * n_j))
        else:
            n_j, N_j = schedule[j - 1]
        if N_j <= (1 << (2 * n_j)):
            raise ValueError(f"schedule violates N_j > 2**(2 n_j) at j={j}")
        if 2 * n_j > 26:
            raise ValueError(f"block j={j} would materialize 2**{2*n_j} atoms")
        ns.append(n_j)
        Ns.append(N_j)
    pos, mass = [], []
    for n_j, N_j in zip(ns, Ns):
        pos.append(_lattice_positions(n_j, N_j))
        mass.append(np.full(1 << (2 * n_j), n_j ** (1.0 / 3.0) / N_j))
    measure = AtomicMeasure(np.concatenate(pos), np.concatenate(mass), model="halfplane")
    return LatticeBlocks(measure=measure, n=ns, N=Ns)


@dataclass
class LatticeBlockReport:
    j: int
    n: int
    N: int
    block_mass: float
    min_u_ratio: float
    min_u_ratio_refined: float
    box_area: float
    box_area_formula: float
    superlevel_area: float
    superlevel_err: float
    superlevel_ratio: float

    def to_dict(self):
        return {
            "statistic": "lattice_block_report",
            "j": self.j,
            "n": self.n,
            "N": self.N,
            "block_mass": self.block_mass,
            "min_u_over_n13": self.min_u_ratio,
            "min_u_over_n13_refined": self.min_u_ratio_refined,
            "tall_box_area": self.box_area,
            "tall_box_area_formula": self.box_area_formula,
            "superlevel_area": self.superlevel_area,
            "superlevel_err": self.superlevel_err,
            "superlevel_ratio": self.superlevel_ratio,
        }


def lattice_block_report(blocks, j, delta=0.5, samples=5):
    """Quantitative checks for lattice block j.

    (i) min of (P * mu_j)/n^(1/3) over samples of the union of boxes
        1/N <= Im z <= 2^n/N above each atom cluster (reported at two
        sampling densities);
    (ii) the exact weighted area of the tall rectangle
        [0, n^(2/3) 2^(2n)/N] x [n^(2/3) 2^n/N, n^(2/3) 2^(2n)/N],
        which equals (n^(5/3) 2^(2n)/N) ln 2 by the closed form;
    (iii) a certified estimate of the weighted area of {P * mu_j > delta},
        reported relative to (n/N) 2^(2n).
    """
    from .analysis.cover import halfplane_superlevel_area

    n_j, N_j = blocks.n[j - 1], blocks.N[j - 1]
    mu = blocks.block_measure(j)
    sf = SingularInner(mu)

    def min_ratio(m):
        stride = n_j ** (2.0 / 3.0) * (1 << n_j) / N_j
        width = (1 << n_j) / N_j
        xs_loc = np.linspace(width / (m + 1), width * (1 - 1.0 / (m + 1)), m)
        ys = np.geomspace(1.0 / N_j, (1 << n_j) / N_j, m)
        best = np.inf
        for s in range(1 << n_j):
            x = s * stride + xs_loc
            z = x[None, :] + 1j * ys[:, None]
            u = -eval_log_modulus(sf, z.ravel(), model="halfplane").log_modulus
            best = min(best, float(u.min()))
        return best / n_j ** (1.0 / 3.0)

    width = n_j ** (2.0 / 3.0) * (1 << (2 * n_j)) / N_j
    y0 = n_j ** (2.0 / 3.0) * (1 << n_j) / N_j
    box_area = width * math.log((1 << (2 * n_j)) / (1 << n_j))
    formula = n_j ** (5.0 / 3.0) * (1 << (2 * n_j)) / N_j * math.log(2.0)
    inside, err, _cells = halfplane_superlevel_area(mu, delta)
    scale = n_j / N_j * (1 << (2 * n_j))
    return LatticeBlockReport(
        j=j,
        n=n_j,
        N=N_j,
        block_mass=blocks.block_mass(j),
        min_u_ratio=min_ratio(samples),
        min_u_ratio_refined=min_ratio(2 * samples),
        box_area=box_area,
        box_area_formula=formula,
        superlevel_area=inside,
        superlevel_err=err,
        superlevel_ratio=(inside + err) / scale,
    )


# --------------------------------------------------------------------------
# fixtures for the interpolation criteria


def interleaved_radial_fixture(k_max=10, ratio=1.5):
    """Union of the radial sequences 1 - 2**-k and 1 - ratio * 2**-k."""
    ks = np.arange(1, k_max + 1)
    return ZeroSequence(np.concatenate([1.0 - 2.0**-ks, 1.0 - ratio * 2.0**-ks]))


def coalescing_pairs_fixture(k_max=10):
    """Interleaved radial pairs whose gap shrinks: 1 - 2**-k paired with
    1 - (1 + 2**-k) 2**-k.

    Each subsequence is interpolating but the pairs coalesce, so no grid
    refinement stabilizes the first-power constant while the second-power
    constant stays bounded below: the two-products-but-not-one behavior.
    """
    ks = np.arange(1, k_max + 1)
    first = 1.0 - 2.0**-ks
    second = 1.0 - (1.0 + 2.0**-ks) * 2.0**-ks
    return ZeroSequence(np.concatenate([first, second]))


def triple_cluster_fixture(gap=3e-8):
    """Three zeros at mutual pseudo-hyperbolic distance below 2**-20."""
    base = 0.5
    return ZeroSequence([base, base + gap, base + gap * 1j, -0.5])
