"""Analytic upper bounds for the projection averages.

Bounds on the average inter-crossing number and total curvature of Fourier
curves, the Hadamard-type bound on the mean squared linking number with its
configuration constant ``C``, the refinement that splits ``C`` near the
diagonal, and the unknot-fraction bound from the mean total curvature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .curves import FourierSpec, SpaceCurve
from .errors import InvalidInput, NonpositiveEta, TouchingCurves
from .mc_engine import MCSpec, _integrate
from .stats import MCEstimate
from .streams import STREAM_BOUNDS

TOUCH_DISTANCE = 1e-9
SQUARE_INV_R = 8.0 * math.asinh(1.0)  # integral of 1/|x| over [-1, 1]^2


@dataclass(frozen=True)
class BoundReport:
    """A bound value with the named scalars that produced it."""

    bound_value: float
    ingredients: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.bound_value >= 0:
            raise InvalidInput(f"bound must be non-negative, got {self.bound_value}")
        bad = [k for k, v in self.ingredients.items() if not math.isfinite(float(v))]
        if bad:
            raise InvalidInput(f"non-finite ingredients: {bad}")

    def as_record(self) -> dict:
        return {"bound": self.bound_value, **self.ingredients}


# ---------------------------------------------------------------------------
# separation


def _pair_distance(c1: SpaceCurve, c2: SpaceCurve, t, s) -> np.ndarray:
    return np.linalg.norm(c2.eval(s) - c1.eval(t), axis=-1)


def min_distance(c1: SpaceCurve, c2: SpaceCurve, grid: int = 256, refine_iters: int = 4) -> float:
    """Minimum of ``|r2(s) - r1(t)|`` over both parameter domains.

    A ``grid x grid`` scan picks the best few cells; each is refined by
    alternating bounded Brent/golden-section line searches in ``t`` and ``s``
    for ``refine_iters`` rounds.

    Raises
    ------
    TouchingCurves
        When the minimum is below 1e-9.
    """
    if grid < 4:
        raise InvalidInput("grid must be >= 4")
    ht, hs = c1.period / grid, c2.period / grid
    t = np.arange(grid) * ht
    s = np.arange(grid) * hs
    dist = np.linalg.norm(c2.eval(s)[None, :, :] - c1.eval(t)[:, None, :], axis=-1)
    best = float(dist.min())
    for flat in np.argsort(dist, axis=None)[:4]:
        ti, si = t[flat // grid], s[flat % grid]
        for _ in range(refine_iters):
            r = minimize_scalar(lambda x: float(_pair_distance(c1, c2, x, si)),
                                bounds=(ti - ht, ti + ht), method="bounded")
            ti = float(r.x)
            r = minimize_scalar(lambda x: float(_pair_distance(c1, c2, ti, x)),
                                bounds=(si - hs, si + hs), method="bounded")
            si = float(r.x)
        best = min(best, float(_pair_distance(c1, c2, ti, si)))
    if best < TOUCH_DISTANCE:
        raise TouchingCurves(f"curves come within {best:.3e}")
    return best


# ---------------------------------------------------------------------------
# Fourier-coefficient bounds


def _weighted_sq(spec: FourierSpec, power: int) -> float:
    c = spec.array[1:]
    k = np.arange(1, c.size + 1, dtype=float)
    return float((k**power * c * c).sum())


def icn_bound(c: FourierSpec, d: FourierSpec, min_dist: float, c_icn: float = 1.0) -> BoundReport:
    """``C pi sqrt(sum j^2 c_j^2 * sum j^2 d_j^2) / minDist^2``.

    The factor ``pi`` comes from integrating the pointwise bound over the
    two parameter circles against the ``1/4pi`` prefactor.
    """
    if not min_dist > 0:
        raise InvalidInput("min_dist must be positive")
    sc, sd = _weighted_sq(c, 2), _weighted_sq(d, 2)
    value = c_icn * math.pi * math.sqrt(sc * sd) / min_dist**2
    return BoundReport(value, {"v1": math.sqrt(sc), "v2": math.sqrt(sd),
                               "minDist": float(min_dist), "C": float(c_icn)})


def icn_bound_orthogonal(c: FourierSpec, d: FourierSpec, c_icn: float = 1.0) -> BoundReport:
    """:func:`icn_bound` for orthogonally supported pairs.

    Their separation is constant, ``minDist^2 = sum c_j^2 + sum d_j^2``
    (including the constant terms).
    """
    sep2 = float((c.array**2).sum() + (d.array**2).sum())
    return icn_bound(c, d, math.sqrt(sep2), c_icn)


def curvature_bound(c: FourierSpec) -> float:
    """``2 pi sqrt(sum k^4 c_k^2 / sum k^2 c_k^2)``: the ratio ``|r''| / |r'|`` times length."""
    return 2 * math.pi * math.sqrt(_weighted_sq(c, 4) / _weighted_sq(c, 2))


# ---------------------------------------------------------------------------
# the second-moment bound


def _discriminant(a3, b3):
    u = np.einsum("...i,...i->...", a3, a3) * np.einsum("...i,...i->...", b3, b3)
    x = np.einsum("...i,...i->...", a3, b3)
    return u - x * x, u


def compute_C(c1: SpaceCurve, c2: SpaceCurve, spec: MCSpec) -> MCEstimate:
    """Monte Carlo of ``iiii 1/sqrt(|a3|^2 |a3'|^2 - (a3.a3')^2)``.

    The chords are ``a3 = r2(s) - r1(t)`` and ``a3' = r2(s') - r1(t')``;
    the domain is ``[0,T1) x [0,T2)`` taken twice.  Samples whose relative
    discriminant is at most ``spec.guard`` are rejected.
    """
    def f(x):
        t, s, tp, sp = x.T
        d, u = _discriminant(c2.eval(s) - c1.eval(t), c2.eval(sp) - c1.eval(tp))
        ok = d > spec.guard * u
        return np.where(ok, 1.0 / np.sqrt(np.where(ok, d, 1.0)), np.nan)

    box = [(0.0, c1.period), (0.0, c2.period)] * 2
    return _integrate(f, box, spec, STREAM_BOUNDS).estimate


def lk2_bound(v1: float, v2: float, min_dist: float, c_const: float) -> float:
    """``(1/(4pi)^2) * 4 C v1^2 v2^2 / (pi minDist^2)``."""
    if not (v1 > 0 and v2 > 0 and min_dist > 0 and c_const > 0):
        raise InvalidInput("lk2_bound needs positive inputs")
    return 4.0 * c_const * v1**2 * v2**2 / (math.pi * min_dist**2) / (4 * math.pi) ** 2


def lk2_bound_report(c1: SpaceCurve, c2: SpaceCurve, spec: MCSpec, grid: int = 256) -> BoundReport:
    """:func:`lk2_bound` with ``v`` the maximal speeds, ``minDist`` and ``C`` computed.

    ``C`` enters at its estimate plus three standard errors.
    """
    v1, v2 = c1.max_speed(), c2.max_speed()
    k = min_distance(c1, c2, grid)
    c = compute_C(c1, c2, spec)
    c_hi = c.mean + 3 * c.stderr
    return BoundReport(lk2_bound(v1, v2, k, c_hi),
                       {"v1": v1, "v2": v2, "minDist": k, "C": c.mean, "C_stderr": c.stderr,
                        "C_rejected": c.n_rejected})


# ---------------------------------------------------------------------------
# splitting C near the diagonal


def _wrap(delta, period):
    return (delta + period / 2) % period - period / 2


def _eta1_grid(c1, c2, epsilon, grid):
    # sqrt(D) / |offset| at base points (t, s) and offsets in (-eps, eps)^2
    t = (np.arange(grid) + 0.5) * (c1.period / grid)
    s = (np.arange(grid) + 0.5) * (c2.period / grid)
    off = (np.arange(grid) + 0.5) / grid * 2 * epsilon - epsilon
    tt, ss = np.meshgrid(t, s, indexing="ij")
    dt, ds = np.meshgrid(off, off, indexing="ij")
    a3 = c2.eval(ss) - c1.eval(tt)
    b3 = (c2.eval(ss[..., None, None] + ds) - c1.eval(tt[..., None, None] + dt))
    d, _ = _discriminant(a3[:, :, None, None, :], b3)
    ratio = np.sqrt(np.maximum(d, 0.0)) / np.hypot(dt, ds)
    flat = int(np.argmin(ratio))
    idx = np.unravel_index(flat, ratio.shape)
    return float(ratio[idx]), np.array([tt[idx[:2]], ss[idx[:2]], dt[idx[2:]], ds[idx[2:]]])


def _eta2_grid(c1, c2, epsilon, grid):
    t = (np.arange(grid) + 0.5) * (c1.period / grid)
    s = (np.arange(grid) + 0.5) * (c2.period / grid)
    tt, ss = np.meshgrid(t, s, indexing="ij")
    a3 = (c2.eval(ss) - c1.eval(tt)).reshape(grid * grid, -1)
    d, _ = _discriminant(a3[:, None, :], a3[None, :, :])
    tf, sf = tt.ravel(), ss.ravel()
    near = ((np.abs(_wrap(tf[:, None] - tf[None, :], c1.period)) < epsilon)
            & (np.abs(_wrap(sf[:, None] - sf[None, :], c2.period)) < epsilon))
    root = np.where(near, np.inf, np.sqrt(np.maximum(d, 0.0)))
    i, j = np.unravel_index(int(np.argmin(root)), root.shape)
    return float(root[i, j]), np.array([tf[i], sf[i], tf[j], sf[j]])


def _refine(fun, x0, scale):
    r = minimize(fun, x0, method="Nelder-Mead",
                 options={"initial_simplex": x0 + np.vstack([np.zeros(4), np.eye(4) * scale]),
                          "xatol": 1e-10, "fatol": 1e-14, "maxiter": 400})
    return float(r.fun)


def diagonal_split(c1: SpaceCurve, c2: SpaceCurve, epsilon: float, grid: int = 24,
                   v1: float | None = None, v2: float | None = None,
                   min_dist: float | None = None) -> BoundReport:
    """Refined second-moment bound from splitting ``C`` at the diagonal.

    ``mu1`` is the set where both ``|t - t'|`` and ``|s - s'|`` (periodic)
    are below ``epsilon``.  On it ``sqrt(D) >= eta1 |(t'-t, s'-s)|``, so
    its part of ``C`` is at most ``C1 = T1 T2 * 8 asinh(1) epsilon / eta1``.
    Off it ``sqrt(D) >= eta2``.  The bound is
    ``(1/(4pi)^2) (4 v1^2 v2^2 / (pi k^2)) (C1 + vol(mu1^c) / eta2)``.

    ``eta1`` and ``eta2`` are grid minima followed by one local
    Nelder-Mead refinement; being minima they only grow the bound.

    Raises
    ------
    NonpositiveEta
        When ``eta1`` or ``eta2`` is not positive; the refinement is then
        inapplicable and :func:`lk2_bound_report` applies instead.
    """
    t1, t2 = c1.period, c2.period
    if not 0 < epsilon <= math.pi / 4 or epsilon >= min(t1, t2) / 2:
        raise InvalidInput("epsilon must lie in (0, pi/4] and below half of each period")
    if grid < 4:
        raise InvalidInput("grid must be >= 4")

    eta1, x1 = _eta1_grid(c1, c2, epsilon, grid)

    def ratio(x):
        t, s, dt, ds = x
        if max(abs(dt), abs(ds)) >= epsilon or dt == ds == 0.0:
            return math.inf
        d, _ = _discriminant(c2.eval(s) - c1.eval(t), c2.eval(s + ds) - c1.eval(t + dt))
        return math.sqrt(max(float(d), 0.0)) / math.hypot(dt, ds)

    eta1 = min(eta1, _refine(ratio, x1, epsilon / grid))

    eta2, x2 = _eta2_grid(c1, c2, epsilon, grid)

    def root(x):
        t, s, tp, sp = x
        if abs(_wrap(tp - t, t1)) < epsilon and abs(_wrap(sp - s, t2)) < epsilon:
            return math.inf
        d, _ = _discriminant(c2.eval(s) - c1.eval(t), c2.eval(sp) - c1.eval(tp))
        return math.sqrt(max(float(d), 0.0))

    eta2 = min(eta2, _refine(root, x2, min(t1, t2) / grid))
    if not eta1 > 0 or not eta2 > 0:
        raise NonpositiveEta(f"eta1={eta1:.3e}, eta2={eta2:.3e} at epsilon={epsilon:g}")

    v1 = c1.max_speed() if v1 is None else v1
    v2 = c2.max_speed() if v2 is None else v2
    k = min_distance(c1, c2) if min_dist is None else min_dist
    vol_near = t1 * t2 * (2 * epsilon) ** 2
    vol_far = (t1 * t2) ** 2 - vol_near
    c1_bound = t1 * t2 * SQUARE_INV_R * epsilon / eta1
    pref = 4.0 * v1**2 * v2**2 / (math.pi * k**2) / (4 * math.pi) ** 2
    value = pref * (c1_bound + vol_far / eta2)
    return BoundReport(value, {"v1": v1, "v2": v2, "minDist": k, "C": c1_bound + vol_far / eta2,
                               "C1": c1_bound, "eta1": eta1, "eta2": eta2,
                               "epsilon_split": epsilon, "vol_mu1": vol_near, "grid": grid})


def refined_lk2_bound(c1: SpaceCurve, c2: SpaceCurve, epsilons=None, grid: int = 24) -> BoundReport:
    """Smallest :func:`diagonal_split` bound over a set of split widths.

    Widths whose refinement is inapplicable are skipped; if none applies
    the last :class:`NonpositiveEta` propagates.
    """
    if epsilons is None:
        top = min(math.pi / 4, 0.49 * min(c1.period, c2.period))
        epsilons = np.linspace(top / 8, top, 8)
    v1, v2, k = c1.max_speed(), c2.max_speed(), min_distance(c1, c2)
    best, err = None, None
    for eps in epsilons:
        try:
            rep = diagonal_split(c1, c2, float(eps), grid, v1, v2, k)
        except NonpositiveEta as e:
            err = e
            continue
        if best is None or rep.bound_value < best.bound_value:
            best = rep
    if best is None:
        raise err
    return best


def unknot_fraction_bound(kappa_mean: float) -> float:
    """Upper bound ``kappa/(2pi) - 1`` on the knotted fraction, clamped to [0, 1].

    A knotted curve has total curvature above ``4pi``, so at most this
    fraction of the projections can be knotted.
    """
    if not kappa_mean >= 2 * math.pi - 1e-12:
        raise InvalidInput(f"mean total curvature {kappa_mean} is below 2pi")
    return min(1.0, max(0.0, kappa_mean / (2 * math.pi) - 1.0))
