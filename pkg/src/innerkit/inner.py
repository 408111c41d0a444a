"""Inner-function expressions and certified log-modulus evaluation.

An expression is a finite tree over five node kinds: Blaschke products
(finite, or certified truncations of infinite ones), singular factors built
from atomic boundary measures, Frostman shifts phi_gamma(f), Moebius
precompositions f(phi_a), and products.  All quantitative statements in this
package are about |f|, so evaluation happens in log-modulus space; phases
are tracked on demand for exactly evaluable (untailed) expressions, using
the canonical representative

    B(z) = prod ((z - z_k) / (1 - conj(z_k) z))**mult.

Singular factors use the unnormalized Poisson kernels
(1-|z|^2)/|e^{i t}-z|^2 on the disc (value 1 at z = 0 for unit mass) and
y/((x-t)^2+y^2) on the half-plane (no 1/pi); every empirical constant in
reports is relative to these conventions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Union

import numpy as np

from .geometry import (
    cayley,
    cayley_inv,
    mobius,
    pseudo_hyperbolic,
    require_in_disc,
    require_in_halfplane,
)

#: below this pseudo-hyperbolic distance to a zero, evaluation returns the
#: distinguished at-zero value instead of the log of a denormal
AT_ZERO_RHO = 1e-14

DISC = "disc"
HALFPLANE = "halfplane"


class ZeroSequence:
    """Finite multiset of disc zeros with multiplicities.

    Carries the Blaschke sum sum(mult * (1 - |z|)); all zeros strictly
    inside the disc.  Immutable after construction.
    """

    def __init__(self, zeros=(), mults=None):
        zeros = np.atleast_1d(np.asarray(zeros, dtype=complex))
        if mults is None:
            mults = np.ones(len(zeros), dtype=int)
        mults = np.atleast_1d(np.asarray(mults, dtype=int))
        if len(mults) != len(zeros):
            raise ValueError("zeros and multiplicities length mismatch")
        if len(zeros):
            require_in_disc(zeros, "zeros")
        if np.any(mults < 1):
            raise ValueError("multiplicities must be positive integers")
        self.zeros = zeros
        self.mults = mults
        self.blaschke_sum = float(np.sum(mults * (1.0 - np.abs(zeros))))

    def __len__(self):
        return len(self.zeros)

    @property
    def degree(self):
        return int(self.mults.sum())

    def flattened(self):
        """Zeros repeated by multiplicity, as one complex array."""
        return np.repeat(self.zeros, self.mults)

    def subset(self, ids):
        return ZeroSequence(self.zeros[ids], self.mults[ids])

    def __repr__(self):
        return f"ZeroSequence(n={len(self)}, degree={self.degree}, sum={self.blaschke_sum:.3g})"


class AtomicMeasure:
    """Finite positive atomic measure on the circle (angles) or the line."""

    def __init__(self, positions, masses, model=DISC):
        positions = np.atleast_1d(np.asarray(positions, dtype=float))
        masses = np.atleast_1d(np.asarray(masses, dtype=float))
        if len(positions) != len(masses):
            raise ValueError("positions and masses length mismatch")
        if np.any(masses <= 0.0):
            raise ValueError("masses must be strictly positive")
        if model not in (DISC, HALFPLANE):
            raise ValueError(f"unknown model {model!r}")
        if model == DISC:
            positions = np.mod(positions, 2.0 * math.pi)
        self.positions = positions
        self.masses = masses
        self.model = model
        self.total_mass = float(masses.sum())

    def __len__(self):
        return len(self.positions)

    def __repr__(self):
        return (
            f"AtomicMeasure(n={len(self)}, total={self.total_mass:.6g}, "
            f"model={self.model})"
        )


# --------------------------------------------------------------------------
# expression nodes


@dataclass(frozen=True)
class BlaschkeProduct:
    """Blaschke product over a finite zero sequence.

    ``tail_bound`` > 0 marks a certified truncation of an infinite product:
    the stored prefix approximates the full log-modulus within tail_bound
    for |z| <= region_radius.  Exact finite products carry tail_bound 0.
    """

    zeros: ZeroSequence
    tail_bound: float = 0.0
    region_radius: float = 1.0


@dataclass(frozen=True)
class SingularInner:
    measure: AtomicMeasure


@dataclass(frozen=True)
class FrostmanShift:
    gamma: complex
    child: "InnerExpr"

    def __post_init__(self):
        if not 0.0 < abs(self.gamma) < 1.0:
            raise ValueError("Frostman parameter must satisfy 0 < |gamma| < 1")


@dataclass(frozen=True)
class Precompose:
    a: complex
    child: "InnerExpr"

    def __post_init__(self):
        require_in_disc(self.a, "a")


@dataclass(frozen=True)
class Product:
    factors: tuple


InnerExpr = Union[BlaschkeProduct, SingularInner, FrostmanShift, Precompose, Product]


def blaschke(zeros, mults=None):
    """Finite Blaschke product from raw zeros."""
    return BlaschkeProduct(ZeroSequence(zeros, mults))


def singular(positions, masses, model=DISC):
    return SingularInner(AtomicMeasure(positions, masses, model))


def frostman_shift(expr, gamma):
    """phi_gamma composed with expr; |shift(z0)| = |gamma| at zeros z0 of expr."""
    return FrostmanShift(complex(gamma), expr)


def product(*factors):
    return Product(tuple(factors))


# --------------------------------------------------------------------------
# truncation of infinite products

#: a tail source is any object iterating (zero, mult) pairs and exposing
#: tail_majorant(n) -> certified upper bound on sum_{i >= n} mult*(1-|z_i|)


def truncate_blaschke(source, region_radius, budget, hard_cap=1_000_000):
    """Certified prefix of a (possibly infinite) zero sequence.

    Returns (prefix, tail_bound) with
        | log|B_full(z)| - log|B_prefix(z)| | <= tail_bound   for |z| <= R,
    using -log rho(z, w) <= 4 (1 - |w|) / (1 - R), valid once
    1 - |w| <= (1 - R)/8 (from 1 - rho^2 = (1-|z|^2)(1-|w|^2)/|1-conj(z) w|^2).
    tail_bound may exceed the budget when the hard cap is hit; callers check.
    """
    if isinstance(source, ZeroSequence):
        return source, 0.0
    if not 0.0 < region_radius < 1.0:
        raise ValueError("region_radius must lie in (0, 1)")
    if not hasattr(source, "tail_majorant"):
        raise ValueError("source cannot certify its tail (no tail_majorant)")
    coef = 4.0 / (1.0 - region_radius)
    target = min((1.0 - region_radius) / 8.0, budget / coef)
    zeros, mults = [], []
    it = iter(source)
    n = 0
    while source.tail_majorant(n) > target and n < hard_cap:
        try:
            z, m = next(it)
        except StopIteration:
            break
        zeros.append(complex(z))
        mults.append(int(m))
        n += 1
    tail = float(source.tail_majorant(n))
    return ZeroSequence(zeros, mults), coef * tail


# --------------------------------------------------------------------------
# evaluation


@dataclass
class CertifiedValue:
    """log|f| with a sound truncation-error bound.

    Fields are scalars for scalar input and ndarrays for array input.
    ``at_zero`` marks points within AT_ZERO_RHO of a zero (log_modulus is
    -inf there); ``budget_met`` is False when the achievable tail bound
    exceeded the requested budget.  ``phase`` is arg f when tracked.
    """

    log_modulus: object
    err_bound: float
    at_zero: object
    budget_met: bool = True
    phase: object = None


class _Pts:
    """Evaluation points with lazy disc <-> half-plane transfer."""

    def __init__(self, z, model):
        z = np.asarray(z, dtype=complex)
        if model == DISC:
            require_in_disc(z)
            self._disc, self._half = z, None
        elif model == HALFPLANE:
            require_in_halfplane(z)
            self._disc, self._half = None, z
        else:
            raise ValueError(f"unknown model {model!r}")

    @property
    def disc(self):
        if self._disc is None:
            self._disc = cayley(self._half)
        return self._disc

    @property
    def half(self):
        if self._half is None:
            self._half = cayley_inv(self._disc)
        return self._half

    def precomposed(self, a):
        return _Pts(mobius(a, self.disc), DISC)


def _blaschke_eval(node, pts, want_phase, chunk=262144):
    z = pts.disc
    if node.tail_bound > 0.0:
        if want_phase:
            raise ValueError("phase is not certified for truncated products")
        if np.any(np.abs(z) > node.region_radius):
            raise ValueError(
                "evaluation point outside the certified region of a truncation"
            )
    seq = node.zeros
    lm = np.zeros(z.shape, dtype=float)
    ph = np.zeros(z.shape, dtype=float) if want_phase else None
    minrho = np.full(z.shape, np.inf)
    step = max(1, chunk // max(1, len(seq)))
    flat_z = z.reshape(-1)
    flat_lm = lm.reshape(-1)
    flat_min = minrho.reshape(-1)
    flat_ph = ph.reshape(-1) if want_phase else None
    for lo in range(0, flat_z.size, step):
        blk = flat_z[lo : lo + step, None]
        num = blk - seq.zeros[None, :]
        den = 1.0 - np.conj(seq.zeros[None, :]) * blk
        rho = np.abs(num) / np.abs(den)
        flat_min[lo : lo + step] = np.minimum(
            flat_min[lo : lo + step], rho.min(axis=1) if len(seq) else np.inf
        )
        with np.errstate(divide="ignore"):
            flat_lm[lo : lo + step] += (np.log(rho) * seq.mults[None, :]).sum(axis=1)
        if want_phase:
            flat_ph[lo : lo + step] += (np.angle(num / den) * seq.mults[None, :]).sum(
                axis=1
            )
    at_zero = minrho < AT_ZERO_RHO
    lm[at_zero] = -np.inf
    return lm, ph, float(node.tail_bound), at_zero


def _singular_eval(node, pts, want_phase, chunk=262144):
    mu = node.measure
    if mu.model == DISC:
        z = pts.disc
        lm = np.zeros(z.shape, dtype=float)
        ph = np.zeros(z.shape, dtype=float) if want_phase else None
        flat_z = z.reshape(-1)
        flat_lm = lm.reshape(-1)
        flat_ph = ph.reshape(-1) if want_phase else None
        atoms = np.exp(1j * mu.positions)
        one_minus = 1.0 - np.abs(flat_z) ** 2
        step = max(1, chunk // max(1, len(mu)))
        for lo in range(0, flat_z.size, step):
            blk = flat_z[lo : lo + step, None]
            dist2 = np.abs(atoms[None, :] - blk) ** 2
            flat_lm[lo : lo + step] -= (
                mu.masses[None, :] / dist2
            ).sum(axis=1) * one_minus[lo : lo + step]
            if want_phase:
                q = 2.0 * np.imag(blk * np.conj(atoms[None, :])) / dist2
                flat_ph[lo : lo + step] -= (mu.masses[None, :] * q).sum(axis=1)
    else:
        w = pts.half
        x, y = np.real(w), np.imag(w)
        lm = np.zeros(w.shape, dtype=float)
        ph = np.zeros(w.shape, dtype=float) if want_phase else None
        flat_x, flat_y = x.reshape(-1), y.reshape(-1)
        flat_lm = lm.reshape(-1)
        flat_ph = ph.reshape(-1) if want_phase else None
        step = max(1, chunk // max(1, len(mu)))
        for lo in range(0, flat_x.size, step):
            dx = mu.positions[None, :] - flat_x[lo : lo + step, None]
            den = dx**2 + flat_y[lo : lo + step, None] ** 2
            flat_lm[lo : lo + step] -= (
                mu.masses[None, :] * flat_y[lo : lo + step, None] / den
            ).sum(axis=1)
            if want_phase:
                flat_ph[lo : lo + step] += (mu.masses[None, :] * dx / den).sum(axis=1)
    at_zero = np.zeros(lm.shape, dtype=bool)
    return lm, ph, 0.0, at_zero


def _eval(expr, pts, want_phase):
    if isinstance(expr, BlaschkeProduct):
        return _blaschke_eval(expr, pts, want_phase)
    if isinstance(expr, SingularInner):
        return _singular_eval(expr, pts, want_phase)
    if isinstance(expr, Precompose):
        return _eval(expr.child, pts.precomposed(expr.a), want_phase)
    if isinstance(expr, Product):
        lm = np.zeros(pts.disc.shape, dtype=float)
        ph = np.zeros(pts.disc.shape, dtype=float) if want_phase else None
        err = 0.0
        at_zero = np.zeros(pts.disc.shape, dtype=bool)
        for child in expr.factors:
            clm, cph, cerr, caz = _eval(child, pts, want_phase)
            lm = lm + clm
            if want_phase:
                ph = ph + cph
            err += cerr
            at_zero |= caz
        lm[at_zero] = -np.inf
        return lm, ph, err, at_zero
    if isinstance(expr, FrostmanShift):
        clm, cph, cerr, caz = _eval(expr.child, pts, True)
        if cerr > 0.0:
            raise ValueError(
                "Frostman shift needs an exactly evaluable child "
                "(build the shift from the truncated prefix instead)"
            )
        u = np.where(caz, 0.0, np.exp(clm + 1j * np.asarray(cph)))
        g = complex(expr.gamma)
        v = (g - u) / (1.0 - u * np.conjugate(g))
        mod = np.abs(v)
        at_zero = mod < AT_ZERO_RHO
        with np.errstate(divide="ignore"):
            lm = np.where(at_zero, -np.inf, np.log(np.maximum(mod, 1e-300)))
        ph = np.angle(v) if want_phase else None
        return lm, ph, 0.0, at_zero
    raise TypeError(f"not an inner expression: {expr!r}")


def eval_log_modulus(expr, z, budget=1e-9, model=DISC, want_phase=False):
    """Certified log|f(z)|; z may be a scalar or any-shape array.

    Boundary points are rejected.  When the expression carries truncation
    tails whose combined bound exceeds ``budget``, the result is returned
    with the achieved bound and budget_met=False.
    """
    scalar = np.isscalar(z) or (isinstance(z, np.ndarray) and z.ndim == 0)
    pts = _Pts(np.atleast_1d(np.asarray(z, dtype=complex)), model)
    lm, ph, err, at_zero = _eval(expr, pts, want_phase)
    if scalar:
        lm = float(lm[0])
        at_zero = bool(at_zero[0])
        ph = float(ph[0]) if ph is not None else None
    return CertifiedValue(
        log_modulus=lm,
        err_bound=float(err),
        at_zero=at_zero,
        budget_met=(err <= budget),
        phase=ph,
    )


def complex_value(expr, z, model=DISC):
    """Exact complex value of an untailed expression (0 at its zeros)."""
    scalar = np.isscalar(z) or (isinstance(z, np.ndarray) and z.ndim == 0)
    pts = _Pts(np.atleast_1d(np.asarray(z, dtype=complex)), model)
    lm, ph, err, at_zero = _eval(expr, pts, True)
    if err > 0.0:
        raise ValueError("complex value is not certified for truncated products")
    out = np.where(at_zero, 0.0, np.exp(lm + 1j * np.asarray(ph)))
    return complex(out[0]) if scalar else out


def zero_list(expr, shift_solver=None):
    """Zero multiset of an expression, as a ZeroSequence.

    Frostman-shift nodes need ``shift_solver(child_expr, gamma) -> roots``
    (the analysis layer provides one); truncated Blaschke nodes contribute
    their realized prefix, which is the zero set of the evaluated object.
    """
    if isinstance(expr, BlaschkeProduct):
        return expr.zeros
    if isinstance(expr, SingularInner):
        return ZeroSequence()
    if isinstance(expr, Product):
        parts = [zero_list(f, shift_solver) for f in expr.factors]
        zs = np.concatenate([p.zeros for p in parts]) if parts else []
        ms = np.concatenate([p.mults for p in parts]) if parts else None
        return ZeroSequence(zs, ms)
    if isinstance(expr, Precompose):
        inner = zero_list(expr.child, shift_solver)
        return ZeroSequence(mobius(expr.a, inner.zeros), inner.mults)
    if isinstance(expr, FrostmanShift):
        if shift_solver is None:
            raise ValueError("zeros of a Frostman shift need a level-set solver")
        roots = np.asarray(shift_solver(expr.child, expr.gamma), dtype=complex)
        return ZeroSequence(roots)
    raise TypeError(f"not an inner expression: {expr!r}")


# --------------------------------------------------------------------------
# JSON construction config


def _c2pair(c):
    c = complex(c)
    return [c.real, c.imag]


def _pair2c(v):
    if isinstance(v, (int, float)):
        return complex(v)
    return complex(v[0], v[1])


def expr_to_config(expr):
    """Expression tree to the JSON-serializable construction config."""
    if isinstance(expr, BlaschkeProduct):
        zs = [
            [z.real, z.imag, int(m)]
            for z, m in zip(expr.zeros.zeros, expr.zeros.mults)
        ]
        out = {"kind": "blaschke", "zeros": zs}
        if expr.tail_bound > 0.0:
            out["tail_bound"] = expr.tail_bound
            out["region_radius"] = expr.region_radius
        return out
    if isinstance(expr, SingularInner):
        mu = expr.measure
        return {
            "kind": "singular",
            "atoms": [[p, m] for p, m in zip(mu.positions, mu.masses)],
            "model": mu.model,
        }
    if isinstance(expr, FrostmanShift):
        return {
            "kind": "frostman",
            "gamma": _c2pair(expr.gamma),
            "child": expr_to_config(expr.child),
        }
    if isinstance(expr, Precompose):
        return {
            "kind": "precompose",
            "a": _c2pair(expr.a),
            "child": expr_to_config(expr.child),
        }
    if isinstance(expr, Product):
        return {"kind": "product", "children": [expr_to_config(f) for f in expr.factors]}
    raise TypeError(f"not an inner expression: {expr!r}")


def expr_from_config(cfg):
    """Inverse of expr_to_config; validates as it builds."""
    kind = cfg.get("kind")
    if kind == "blaschke":
        rows = cfg.get("zeros", [])
        zeros = [complex(r[0], r[1]) for r in rows]
        mults = [int(r[2]) if len(r) > 2 else 1 for r in rows]
        return BlaschkeProduct(
            ZeroSequence(zeros, mults),
            tail_bound=float(cfg.get("tail_bound", 0.0)),
            region_radius=float(cfg.get("region_radius", 1.0)),
        )
    if kind == "singular":
        atoms = cfg.get("atoms", [])
        return singular(
            [a[0] for a in atoms],
            [a[1] for a in atoms],
            model=cfg.get("model", DISC),
        )
    if kind == "frostman":
        return FrostmanShift(_pair2c(cfg["gamma"]), expr_from_config(cfg["child"]))
    if kind == "precompose":
        return Precompose(_pair2c(cfg["a"]), expr_from_config(cfg["child"]))
    if kind == "product":
        return Product(tuple(expr_from_config(c) for c in cfg.get("children", [])))
    raise ValueError(f"unknown expression kind {kind!r}")
