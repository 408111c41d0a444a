"""Certified covers of sublevel sets and weighted-area integration.

Cells are annular sectors (dyadic annulus pieces).  A cell is decided by a
center evaluation plus the ball form of the Schwarz-Pick lemma: an analytic
self-map of the disc satisfies rho(f(z), f(c)) <= rho(z, c), so on a cell of
pseudo-hyperbolic circumradius d around its center c,

    (|f(c)| - d) / (1 - |f(c)| d)  <=  |f(z)|  <=  (|f(c)| + d) / (1 + |f(c)| d).

The weight integral of 1/(1 - |z|) over a cell is closed-form in r, so the
inside cells integrate exactly and the undecided cells are the error bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..geometry import TWO_PI, HyperbolicDisk, pseudo_hyperbolic, rho_to_set
from ..inner import eval_log_modulus

INSIDE, OUTSIDE, BOUNDARY = 0, 1, 2

# cell array columns
_R0, _R1, _T0, _T1, _LEVEL, _GEN = range(6)


def _root_cells(depth):
    """Central disc plus all annulus cells at levels 2..depth."""
    rows = [np.array([[0.0, 0.5, 0.0, TWO_PI, 1.0, 0.0]])]
    for j in range(2, depth + 1):
        k = np.arange(1 << j, dtype=float)
        width = TWO_PI * 2.0 ** (-j)
        cells = np.empty(((1 << j), 6))
        cells[:, _R0] = 1.0 - 2.0 ** (1 - j)
        cells[:, _R1] = 1.0 - 2.0 ** (-j)
        cells[:, _T0] = k * width
        cells[:, _T1] = (k + 1.0) * width
        cells[:, _LEVEL] = j
        cells[:, _GEN] = 0.0
        rows.append(cells)
    return np.concatenate(rows, axis=0)


def _cell_weight(cells):
    """Exact integral of dm2 / (1 - |z|) over each cell."""
    r0, r1 = cells[:, _R0], cells[:, _R1]
    dtheta = cells[:, _T1] - cells[:, _T0]
    return dtheta * (np.log((1.0 - r0) / (1.0 - r1)) - (r1 - r0))


def _cell_center(cells):
    rc = 1.0 - np.sqrt((1.0 - cells[:, _R0]) * (1.0 - cells[:, _R1]))
    tc = 0.5 * (cells[:, _T0] + cells[:, _T1])
    return rc * np.exp(1j * tc)


def _cell_radius(cells, centers):
    """Upper bound on the pseudo-hyperbolic circumradius around the center.

    max over the cell of |c - w| is attained at a corner; then
    rho(c, w) <= |c - w| / (1 - |c| r1).
    """
    c = centers
    d = np.zeros(len(cells))
    for rcol in (_R0, _R1):
        for tcol in (_T0, _T1):
            corner = cells[:, rcol] * np.exp(1j * cells[:, tcol])
            d = np.maximum(d, np.abs(c - corner))
    denom = 1.0 - np.abs(c) * cells[:, _R1]
    rho = d / denom
    return np.where(denom > 0.0, rho, 1.0)


def _split(cells):
    """Four children: radial split at the hyperbolic midpoint, angular at mid."""
    r0, r1 = cells[:, _R0], cells[:, _R1]
    rm = 1.0 - np.sqrt((1.0 - r0) * (1.0 - r1))
    tm = 0.5 * (cells[:, _T0] + cells[:, _T1])
    out = np.repeat(cells, 4, axis=0)
    n = len(cells)
    idx = np.arange(n) * 4
    for off, (rlo, rhi) in enumerate(((r0, rm), (rm, r1))):
        for toff, (tlo, thi) in enumerate(
            ((cells[:, _T0], tm), (tm, cells[:, _T1]))
        ):
            rows = idx + 2 * off + toff
            out[rows, _R0] = rlo
            out[rows, _R1] = rhi
            out[rows, _T0] = tlo
            out[rows, _T1] = thi
    out[:, _GEN] += 1.0
    return out


def _band_bounds(mid, d):
    """Schwarz-Pick band [lo, hi] for |f| on a cell from |f(center)| = mid."""
    hi = (mid + d) / (1.0 + mid * d)
    lo = np.where(mid > d, (mid - d) / (1.0 - mid * d), 0.0)
    return lo, hi


@dataclass
class RegionCover:
    """Finished cover: per-cell status plus exact weight integrals."""

    cells: np.ndarray
    status: np.ndarray
    weights: np.ndarray
    depth: int

    @property
    def inside_weight(self):
        return float(self.weights[self.status == INSIDE].sum())

    @property
    def boundary_weight(self):
        return float(self.weights[self.status == BOUNDARY].sum())

    def cell_count(self):
        return len(self.cells)

    def per_annulus(self):
        """level -> (inside weight, boundary weight), levels ascending."""
        levels = self.cells[:, _LEVEL].astype(int)
        out = {}
        for lvl in sorted(set(levels.tolist())):
            sel = levels == lvl
            out[lvl] = (
                float(self.weights[sel & (self.status == INSIDE)].sum()),
                float(self.weights[sel & (self.status == BOUNDARY)].sum()),
            )
        return out


def _build_cover(classify, depth, extra_depth, max_cells):
    queue = _root_cells(depth)
    done_cells, done_status = [], []
    used = len(queue)
    while len(queue):
        status = classify(queue)
        undecided = status == BOUNDARY
        splittable = undecided & (queue[:, _GEN] < extra_depth)
        budget_left = max_cells - used
        if budget_left <= 0:
            splittable[:] = False
        elif splittable.sum() * 4 > budget_left:
            # keep the heaviest cells splitting first
            w = _cell_weight(queue)
            order = np.argsort(-w)
            allowed = np.zeros(len(queue), dtype=bool)
            quota = budget_left // 4
            picked = [i for i in order if splittable[i]][:quota]
            allowed[picked] = True
            splittable &= allowed
        final = ~splittable
        done_cells.append(queue[final])
        done_status.append(status[final])
        queue = _split(queue[splittable]) if splittable.any() else np.empty((0, 6))
        used += len(queue)
    cells = np.concatenate(done_cells, axis=0)
    status = np.concatenate(done_status)
    return RegionCover(
        cells=cells, status=status, weights=_cell_weight(cells), depth=depth
    )


def level_set_cover(expr, eps, depth, budget=1e-9, extra_depth=8, max_cells=300000):
    """Certified cover of the sublevel set {|f| < eps} within |z| <= 1 - 2**-depth."""
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")

    def classify(cells):
        centers = _cell_center(cells)
        d = _cell_radius(cells, centers)
        cv = eval_log_modulus(expr, centers, budget=budget)
        lm = np.atleast_1d(cv.log_modulus)
        at_zero = np.atleast_1d(cv.at_zero)
        err = cv.err_bound
        mid_hi = np.where(at_zero, 0.0, np.exp(np.minimum(lm + err, 0.0)))
        mid_lo = np.where(at_zero, 0.0, np.exp(lm - err))
        lo, _hi_unused = _band_bounds(mid_lo, d)
        _lo_unused, hi = _band_bounds(mid_hi, d)
        status = np.full(len(cells), BOUNDARY, dtype=np.int8)
        status[hi < eps] = INSIDE
        status[lo >= eps] = OUTSIDE
        return status

    return _build_cover(classify, depth, extra_depth, max_cells)


def disk_cover(disk: HyperbolicDisk, depth, extra_depth=8, max_cells=300000):
    """Certified cover of a pseudo-hyperbolic disk within |z| <= 1 - 2**-depth."""

    def classify(cells):
        centers = _cell_center(cells)
        d = _cell_radius(cells, centers)
        rc = pseudo_hyperbolic(centers, disk.center)
        lo, hi = _band_bounds(rc, d)
        status = np.full(len(cells), BOUNDARY, dtype=np.int8)
        status[hi < disk.radius] = INSIDE
        status[lo >= disk.radius] = OUTSIDE
        return status

    return _build_cover(classify, depth, extra_depth, max_cells)


def certify_min_modulus(
    expr, zeros, eps, threshold, depth=6, budget=1e-9, extra_depth=8, max_cells=200000
):
    """Prove |f| >= threshold on {rho(z, zeros) >= eps, |z| <= 1 - 2**-depth}.

    Returns (success, certified lower bound over the relevant cells).
    Cells entirely inside the eps-neighborhood of the zeros are irrelevant.
    """
    zeros = np.asarray(zeros, dtype=complex)

    def bounds(cells):
        centers = _cell_center(cells)
        d = _cell_radius(cells, centers)
        cv = eval_log_modulus(expr, centers, budget=budget)
        lm = np.atleast_1d(cv.log_modulus)
        at_zero = np.atleast_1d(cv.at_zero)
        mid_lo = np.where(at_zero, 0.0, np.exp(lm - cv.err_bound))
        f_lo, _ = _band_bounds(mid_lo, d)
        rho_c = rho_to_set(centers, zeros)
        rho_hi = (rho_c + d) / (1.0 + rho_c * d)
        return f_lo, rho_hi

    def classify(cells):
        f_lo, rho_hi = bounds(cells)
        status = np.full(len(cells), BOUNDARY, dtype=np.int8)
        status[rho_hi < eps] = INSIDE  # irrelevant: no qualifying points
        status[f_lo >= threshold] = OUTSIDE  # certified above the threshold
        return status

    cover = _build_cover(classify, depth, extra_depth, max_cells)
    relevant = cover.status != INSIDE
    if not relevant.any():
        return True, 1.0
    f_lo, _ = bounds(cover.cells[relevant])
    lower = float(f_lo.min())
    success = bool((cover.status[relevant] == OUTSIDE).all())
    return success, lower


# --------------------------------------------------------------------------
# parametric regions and the weighted-area dispatcher


@dataclass(frozen=True)
class Sector:
    """Disc sector theta in [theta0, theta1], 1 - |z| in [t_lo, t_hi]."""

    theta0: float
    theta1: float
    t_lo: float
    t_hi: float

    def __post_init__(self):
        if not 0.0 < self.t_lo <= self.t_hi <= 1.0:
            raise ValueError("need 0 < t_lo <= t_hi <= 1")
        if self.theta1 < self.theta0:
            raise ValueError("need theta0 <= theta1")


@dataclass(frozen=True)
class HalfplaneRect:
    """Half-plane rectangle [x0, x1] x [y0, y1], y0 > 0."""

    x0: float
    x1: float
    y0: float
    y1: float

    def __post_init__(self):
        if not 0.0 < self.y0 <= self.y1:
            raise ValueError("need 0 < y0 <= y1")


@dataclass
class AreaResult:
    value: float
    err_bound: float
    annulus_partial: dict

    def to_dict(self):
        return {
            "value": self.value,
            "err_bound": self.err_bound,
            "annulus_partial": {str(k): v for k, v in self.annulus_partial.items()},
        }


def _sector_area(sector):
    """Exact integral of dm2/(1-|z|) over a sector, split by dyadic annuli."""
    span = sector.theta1 - sector.theta0
    partial = {}
    total = 0.0
    lo_level = max(1, int(math.floor(-math.log2(sector.t_hi))) + 1)
    hi_level = int(math.floor(-math.log2(sector.t_lo))) + 1
    for lvl in range(lo_level, hi_level + 1):
        t0 = max(sector.t_lo, 2.0 ** (-lvl))
        t1 = min(sector.t_hi, 2.0 ** (1 - lvl))
        if t1 <= t0:
            continue
        piece = span * (math.log(t1 / t0) - (t1 - t0))
        partial[lvl] = piece
        total += piece
    return total, partial


def weighted_area(region, depth=10, **cover_kw):
    """Weighted area of a region: integral of dm2/(1-|z|), or dm2/Im z.

    Accepts a finished RegionCover, a parametric Sector or HalfplaneRect
    (closed forms, zero error), or a HyperbolicDisk (certified cover).
    Returns AreaResult(value, error bound, per-annulus partial contributions).
    """
    if isinstance(region, RegionCover):
        per = region.per_annulus()
        return AreaResult(
            value=region.inside_weight,
            err_bound=region.boundary_weight,
            annulus_partial={lvl: v[0] for lvl, v in per.items()},
        )
    if isinstance(region, Sector):
        total, partial = _sector_area(region)
        return AreaResult(value=total, err_bound=0.0, annulus_partial=partial)
    if isinstance(region, HalfplaneRect):
        value = (region.x1 - region.x0) * math.log(region.y1 / region.y0)
        return AreaResult(value=value, err_bound=0.0, annulus_partial={})
    if isinstance(region, HyperbolicDisk):
        cover = disk_cover(region, depth, **cover_kw)
        return weighted_area(cover)
    raise TypeError(f"unsupported region {region!r}")


# --------------------------------------------------------------------------
# divergence-trend report


@dataclass
class AreaTrend:
    """Finite-scale trend of the weighted areas of a sublevel set.

    ``label`` is one of growing / bounded / inconclusive and is a statement
    about the covered annuli only, never a proof of (non)divergence.
    """

    eps: float
    levels: list
    inside: list
    err: list
    partial: list
    label: str
    q_grow: float
    tol_bounded: float

    def to_dict(self):
        return {
            "statistic": "sublevel_area_trend",
            "eps": self.eps,
            "levels": self.levels,
            "inside": self.inside,
            "err": self.err,
            "partial_sums": self.partial,
            "label": self.label,
            "q_grow": self.q_grow,
            "tol_bounded": self.tol_bounded,
        }


def _trend_label(inside, partial, q_grow, tol_bounded, window=3):
    if not partial or partial[-1] <= 0.0:
        return "bounded"
    tail = list(zip(inside, partial))[-window:]
    if all(a >= q_grow * s for a, s in tail if s > 0.0):
        return "growing"
    if all(a <= tol_bounded * s for a, s in tail):
        return "bounded"
    return "inconclusive"


def sublevel_area_report(
    expr,
    eps_list,
    depth,
    budget=1e-9,
    q_grow=0.05,
    tol_bounded=0.01,
    extra_depth=8,
    max_cells=300000,
):
    """Per-eps weighted-area trend of {|f| < eps} across dyadic annuli."""
    out = []
    for eps in eps_list:
        cover = level_set_cover(
            expr,
            float(eps),
            depth,
            budget=budget,
            extra_depth=extra_depth,
            max_cells=max_cells,
        )
        per = cover.per_annulus()
        levels = sorted(per)
        inside = [per[lvl][0] for lvl in levels]
        err = [per[lvl][1] for lvl in levels]
        partial = list(np.cumsum(inside))
        out.append(
            AreaTrend(
                eps=float(eps),
                levels=levels,
                inside=inside,
                err=err,
                partial=[float(p) for p in partial],
                label=_trend_label(inside, [float(p) for p in partial], q_grow, tol_bounded),
                q_grow=q_grow,
                tol_bounded=tol_bounded,
            )
        )
    return out


# --------------------------------------------------------------------------
# half-plane superlevel cover (for Poisson sums of half-plane measures)


def halfplane_superlevel_area(
    measure,
    delta,
    y_floor_frac=1e-12,
    kx=8,
    extra_depth=60,
    max_cells=60000,
    chunk=4_000_000,
):
    """Weighted area (dm2 / Im z) of {P*mu > delta} for an atomic half-plane mu.

    Returns (inside, err_bound, cells_used).  The strip below the adaptive
    floor is accounted analytically into the error bound: points there with
    P*mu > delta lie in per-atom tangent disks of diameter n*mass/delta whose
    weighted area below height y is O(sqrt(y)).
    """
    if measure.model != "halfplane":
        raise ValueError("needs a half-plane measure")
    t = measure.positions
    mass = measure.masses
    n = len(t)
    total = measure.total_mass
    y_max = total / delta
    y_floor = y_max * y_floor_frac
    err_floor = float(np.sum(4.0 * np.sqrt(n * mass * y_floor / delta)))
    x_lo, x_hi = t.min() - y_max, t.max() + y_max

    def u_bounds(cells):
        # cells columns: x0, x1, y0, y1, gen
        lo_out = np.empty(len(cells))
        hi_out = np.empty(len(cells))
        step = max(1, chunk // max(1, n))
        for base in range(0, len(cells), step):
            blk = cells[base : base + step]
            x0 = blk[:, 0][:, None]
            x1 = blk[:, 1][:, None]
            y0 = blk[:, 2][:, None]
            y1 = blk[:, 3][:, None]
            tt = t[None, :]
            dx_min = np.maximum(np.maximum(x0 - tt, tt - x1), 0.0)
            dx_max = np.maximum(np.abs(x0 - tt), np.abs(x1 - tt))
            ystar = np.clip(dx_min, y0, y1)
            g_max = ystar / (dx_min**2 + ystar**2)
            g_min = np.minimum(
                y0 / (dx_max**2 + y0**2), y1 / (dx_max**2 + y1**2)
            )
            hi_out[base : base + step] = (mass[None, :] * g_max).sum(axis=1)
            lo_out[base : base + step] = (mass[None, :] * g_min).sum(axis=1)
        return lo_out, hi_out

    # root cells: kx columns per dyadic row of heights
    rows = []
    y = y_floor
    while y < y_max:
        y_next = min(2.0 * y, y_max)
        xs = np.linspace(x_lo, x_hi, kx + 1)
        row = np.empty((kx, 5))
        row[:, 0] = xs[:-1]
        row[:, 1] = xs[1:]
        row[:, 2] = y
        row[:, 3] = y_next
        row[:, 4] = 0.0
        rows.append(row)
        y = y_next
    queue = np.concatenate(rows, axis=0)
    used = len(queue)
    inside = 0.0
    err = err_floor

    def cell_weight(blk):
        return (blk[:, 1] - blk[:, 0]) * np.log(blk[:, 3] / blk[:, 2])

    while len(queue):
        lo, hi = u_bounds(queue)
        w = cell_weight(queue)
        is_in = lo > delta
        is_out = hi < delta
        undecided = ~(is_in | is_out)
        inside += float(w[is_in].sum())
        splittable = undecided & (queue[:, 4] < extra_depth)
        if used >= max_cells:
            splittable[:] = False
        err += float(w[undecided & ~splittable].sum())
        blk = queue[splittable]
        if not len(blk):
            break
        # split the axis that is longer at the cell's own height scale
        ymid = np.sqrt(blk[:, 2] * blk[:, 3])
        split_x = (blk[:, 1] - blk[:, 0]) > ymid * np.log(blk[:, 3] / blk[:, 2])
        children = []
        bx = blk[split_x]
        if len(bx):
            xm = 0.5 * (bx[:, 0] + bx[:, 1])
            left, right = bx.copy(), bx.copy()
            left[:, 1] = xm
            right[:, 0] = xm
            children += [left, right]
        by = blk[~split_x]
        if len(by):
            ym = np.sqrt(by[:, 2] * by[:, 3])
            bot, top = by.copy(), by.copy()
            bot[:, 3] = ym
            top[:, 2] = ym
            children += [bot, top]
        queue = np.concatenate(children, axis=0)
        queue[:, 4] += 1.0
        used += len(queue)
    return inside, err, used
