"""Level-set solver for finite Blaschke expressions: all roots of f = gamma.

A finite Blaschke expression reduces to a rational function P/Q with Q
zero-free on the closed disc, so f = gamma becomes the polynomial equation
P - gamma Q = 0, whose roots are exactly the d = deg(f) solutions in the
disc.  Roots come from the companion matrix, get polished by Newton on
P - gamma Q, and the count is certified per cell by winding numbers of the
polynomial along a rectangle cover of an enclosing disk.
"""

from __future__ import annotations

import math

import numpy as np

from ..inner import (
    BlaschkeProduct,
    FrostmanShift,
    Precompose,
    Product,
    SingularInner,
)


class LevelSolveError(RuntimeError):
    pass


def _trim(c, rel=1e-12):
    c = np.asarray(c, dtype=complex)
    scale = np.abs(c).max()
    if scale == 0.0:
        return np.zeros(1, dtype=complex)
    keep = np.nonzero(np.abs(c) > rel * scale)[0]
    return c[keep[0] :] if len(keep) else np.zeros(1, dtype=complex)


def _compose_mobius(coeffs, a):
    """Coefficients of p((a - z)/(1 - conj(a) z)) * (1 - conj(a) z)**deg(p)."""
    d = len(coeffs) - 1
    # powers of (a - z) and (1 - conj(a) z)
    lin1 = np.array([-1.0, a], dtype=complex)  # a - z, highest degree first
    lin2 = np.array([-np.conj(a), 1.0], dtype=complex)  # 1 - conj(a) z
    pow1 = [np.ones(1, dtype=complex)]
    pow2 = [np.ones(1, dtype=complex)]
    for _ in range(d):
        pow1.append(np.convolve(pow1[-1], lin1))
        pow2.append(np.convolve(pow2[-1], lin2))
    out = np.zeros(d + 1, dtype=complex)
    for m, c in enumerate(coeffs):
        deg_m = d - m  # coefficient of z**deg_m term in p
        out += c * np.convolve(pow1[deg_m], pow2[d - deg_m])  # length d + 1
    return out


def rational_coeffs(expr):
    """(P, Q) coefficient arrays (highest degree first) with f = P/Q.

    Defined for finite, untailed Blaschke expressions: Blaschke leaves,
    products, Moebius precompositions, and Frostman shifts.  Q is zero-free
    on the closed disc.
    """
    if isinstance(expr, BlaschkeProduct):
        if expr.tail_bound > 0.0:
            raise ValueError("level solve needs an exactly evaluable product")
        zeros = expr.zeros.flattened()
        p = np.ones(1, dtype=complex)
        q = np.ones(1, dtype=complex)
        for zk in zeros:
            p = np.convolve(p, np.array([1.0, -zk], dtype=complex))
            if zk != 0:
                q = np.convolve(q, np.array([-np.conj(zk), 1.0], dtype=complex))
        return p, q
    if isinstance(expr, Product):
        p = np.ones(1, dtype=complex)
        q = np.ones(1, dtype=complex)
        for f in expr.factors:
            pf, qf = rational_coeffs(f)
            p = np.convolve(p, pf)
            q = np.convolve(q, qf)
        return p, q
    if isinstance(expr, Precompose):
        pc, qc = rational_coeffs(expr.child)
        d = max(len(pc), len(qc)) - 1
        pc = np.concatenate([np.zeros(d + 1 - len(pc), dtype=complex), pc])
        qc = np.concatenate([np.zeros(d + 1 - len(qc), dtype=complex), qc])
        return _compose_mobius(pc, expr.a), _compose_mobius(qc, expr.a)
    if isinstance(expr, FrostmanShift):
        pc, qc = rational_coeffs(expr.child)
        d = max(len(pc), len(qc))
        pc = np.concatenate([np.zeros(d - len(pc), dtype=complex), pc])
        qc = np.concatenate([np.zeros(d - len(qc), dtype=complex), qc])
        g = complex(expr.gamma)
        return g * qc - pc, qc - np.conj(g) * pc
    if isinstance(expr, SingularInner):
        raise ValueError("level solve supports finite Blaschke parts only")
    raise TypeError(f"not an inner expression: {expr!r}")


def _edge_winding(coeffs, a, b, min_mod, max_refine=18):
    """Total argument change of the polynomial along segment a -> b.

    Adaptive bisection until consecutive samples differ by < pi/2 in
    argument; returns None if some sample gets within min_mod of zero.
    """
    ts = np.linspace(0.0, 1.0, 17)
    for _ in range(max_refine):
        pts = a + (b - a) * ts
        vals = np.polyval(coeffs, pts)
        if np.abs(vals).min() < min_mod:
            return None
        dphi = np.angle(vals[1:] / vals[:-1])
        bad = np.abs(dphi) >= 0.5 * math.pi
        if not bad.any():
            return float(dphi.sum())
        new_ts = 0.5 * (ts[:-1][bad] + ts[1:][bad])
        ts = np.sort(np.concatenate([ts, new_ts]))
        if len(ts) > 200000:
            return None
    return None


def _rect_winding(coeffs, x0, x1, y0, y1, min_mod):
    corners = [
        complex(x0, y0),
        complex(x1, y0),
        complex(x1, y1),
        complex(x0, y1),
        complex(x0, y0),
    ]
    total = 0.0
    for a, b in zip(corners, corners[1:]):
        piece = _edge_winding(coeffs, a, b, min_mod)
        if piece is None:
            return None
        total += piece
    return int(round(total / (2.0 * math.pi)))


def level_solve(expr, gamma, radius=None, residual_tol=1e-9, seed=0):
    """All solutions of f(z) = gamma inside the disc, with multiplicity.

    Residuals satisfy |f(root) - gamma| < residual_tol.  The root count per
    rectangle of a cover of an enclosing disk is certified by winding-number
    integration of P - gamma Q along cell boundaries; cells are jittered and
    retried when a root sits too close to an edge.
    """
    gamma = complex(gamma)
    if abs(gamma) >= 1.0:
        raise ValueError("need |gamma| < 1")
    p, q = rational_coeffs(expr)
    d = max(len(p), len(q)) - 1
    pp = np.concatenate([np.zeros(d + 1 - len(p), dtype=complex), p])
    qq = np.concatenate([np.zeros(d + 1 - len(q), dtype=complex), q])
    r_poly = _trim(pp - gamma * qq)
    if len(r_poly) - 1 != d:
        raise LevelSolveError("degree collapsed; expression is not a proper map")
    if d == 0:
        return np.zeros(0, dtype=complex)
    roots = np.roots(r_poly)
    dr = np.polyder(r_poly)
    for _ in range(60):
        val = np.polyval(r_poly, roots)
        den = np.polyval(dr, roots)
        ok = np.abs(den) > 1e-300
        step = np.where(ok, val / np.where(ok, den, 1.0), 0.0)
        if np.abs(step).max() < 1e-16:
            break
        roots = roots - step
    residual = np.abs(np.polyval(r_poly, roots) / np.polyval(qq, roots))
    if np.any(np.abs(roots) >= 1.0):
        raise LevelSolveError("root escaped the open disc; ill-conditioned input")
    if np.any(residual >= residual_tol):
        raise LevelSolveError(
            f"residual {residual.max():.3e} above tolerance {residual_tol:.1e}"
        )

    # winding certification over a rectangle cover of an enclosing disk
    top = float(np.abs(roots).max())
    r_c = radius if radius is not None else top + 0.5 * (1.0 - top)
    if r_c <= top:
        raise ValueError("certification radius excludes some roots")
    m = max(2, int(math.ceil(math.sqrt(d))))
    rng = np.random.default_rng(seed)
    scale = np.abs(np.polyval(r_poly, r_c * np.exp(2j * np.pi * np.linspace(0, 1, 64)))).max()
    for attempt in range(8):
        off = 0.0 if attempt == 0 else (rng.uniform(-1, 1) + 1j * rng.uniform(-1, 1)) * (
            r_c / m
        ) * 0.1
        xs = np.linspace(-r_c, r_c, m + 1) + off.real
        ys = np.linspace(-r_c, r_c, m + 1) + off.imag
        # outer frame must still enclose every root
        xs[0] = min(xs[0], -r_c)
        xs[-1] = max(xs[-1], r_c)
        ys[0] = min(ys[0], -r_c)
        ys[-1] = max(ys[-1], r_c)
        total = 0
        per_cell_ok = True
        for i in range(m):
            for j in range(m):
                w = _rect_winding(
                    r_poly, xs[i], xs[i + 1], ys[j], ys[j + 1], 1e-13 * scale
                )
                if w is None:
                    per_cell_ok = False
                    break
                in_cell = int(
                    np.sum(
                        (roots.real >= xs[i])
                        & (roots.real < xs[i + 1])
                        & (roots.imag >= ys[j])
                        & (roots.imag < ys[j + 1])
                    )
                )
                if w != in_cell:
                    per_cell_ok = False
                    break
                total += w
            if not per_cell_ok:
                break
        if per_cell_ok and total == d:
            return roots
    raise LevelSolveError("winding certification failed after jitter retries")
