"""Invariants of polygonal links and quadrature expectations over curves.

The polygonal linking number sums signed solid angles over every pair of
segments (two spherical triangles per pair of edges).  Total curvature of
a polygon is its sum of turning angles.  The smooth expectations integrate
the closed-form kernels along the curves with panels split at breakpoints.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core_linalg import solid_angle_batch
from .curves import SpaceCurve
from .errors import DegenerateInput, InvalidInput, ShapeError
from .kernels import curvature_kernel_batch, icn_kernel_batch

log = logging.getLogger(__name__)

TOUCH_TOL = 1e-12


@dataclass(frozen=True)
class PolyLink:
    """Two closed polygons in R^3 given by their vertex lists."""

    component1: np.ndarray
    component2: np.ndarray

    def __post_init__(self):
        for name in ("component1", "component2"):
            pts = np.asarray(getattr(self, name), dtype=float)
            if pts.ndim != 2 or pts.shape[1] != 3 or pts.shape[0] < 3:
                raise ShapeError(f"{name} must be an (m >= 3, 3) array, got {pts.shape}")
            edges = np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1)
            if edges.min() == 0.0:
                raise DegenerateInput(f"{name} has a zero-length edge")
            object.__setattr__(self, name, pts)


@dataclass(frozen=True)
class QuadratureSpec:
    """Nodes per panel and the composite rule used on each panel."""

    points_per_axis: int = 256
    rule: str = "midpoint"

    def __post_init__(self):
        if int(self.points_per_axis) < 16:
            raise InvalidInput("points_per_axis must be >= 16")
        if self.rule not in ("midpoint", "trapezoid"):
            raise InvalidInput(f"rule must be midpoint or trapezoid, got {self.rule!r}")


def linking_number_batch(p: np.ndarray, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Linking numbers of a stack of polygon pairs.

    Parameters
    ----------
    p : ndarray, shape (B, m, 3)
    q : ndarray, shape (B, m2, 3)

    Returns
    -------
    (values, min_gap)
        Linking numbers and, per link, the smallest vertex-to-vertex
        difference norm entering the solid angles.
    """
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    pn = np.roll(p, -1, axis=1)
    qn = np.roll(q, -1, axis=1)
    # index layout [batch, i (segment of p), j (segment of q), xyz]
    a = q[:, None, :, :] - p[:, :, None, :]
    b = q[:, None, :, :] - pn[:, :, None, :]
    c = qn[:, None, :, :] - pn[:, :, None, :]
    d = qn[:, None, :, :] - p[:, :, None, :]
    total = solid_angle_batch(a, b, c) + solid_angle_batch(c, d, a)
    gap = np.linalg.norm(a, axis=-1).min(axis=(1, 2))
    return total.sum(axis=(1, 2)) / (4 * math.pi), gap


def linking_number(link: PolyLink) -> float:
    """Linking number of a polygonal link by the solid-angle sum.

    For segment pairs ``(p_i p_{i+1}, q_j q_{j+1})`` with
    ``a = q_j - p_i, b = q_j - p_{i+1}, c = q_{j+1} - p_{i+1}, d = q_{j+1} - p_i``
    the link number is ``sum [Omega(a,b,c) + Omega(c,d,a)] / (4 pi)``.

    Raises
    ------
    DegenerateInput
        When a vertex of one component touches the other (gap < 1e-12).
    """
    val, gap = linking_number_batch(link.component1[None], link.component2[None])
    if gap[0] < TOUCH_TOL:
        raise DegenerateInput(f"components touch (gap {gap[0]:.2e})")
    return float(val[0])


def min_segment_distance(p: np.ndarray, q: np.ndarray) -> float:
    """Smallest distance between an edge of closed polygon ``p`` and one of ``q``."""
    p0 = np.asarray(p, float)[:, None, :]
    p1 = np.roll(np.asarray(p, float), -1, axis=0)[:, None, :]
    q0 = np.asarray(q, float)[None, :, :]
    q1 = np.roll(np.asarray(q, float), -1, axis=0)[None, :, :]
    u, v, w = p1 - p0, q1 - q0, p0 - q0
    a = (u * u).sum(-1)
    b = (u * v).sum(-1)
    c = (v * v).sum(-1)
    d = (u * w).sum(-1)
    e = (v * w).sum(-1)
    den = a * c - b * b
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.clip(np.where(den > 1e-300, (b * e - c * d) / den, 0.0), 0.0, 1.0)
        t = np.clip((b * s + e) / c, 0.0, 1.0)
        s = np.clip((b * t - d) / a, 0.0, 1.0)
    diff = w + s[..., None] * u - t[..., None] * v
    return float(np.sqrt((diff * diff).sum(-1)).min())


def total_curvature_poly_batch(points: np.ndarray) -> np.ndarray:
    """Turning-angle sums of a stack of closed polygons, shape (B, m, 3)."""
    e = np.roll(points, -1, axis=-2) - points
    norms = np.linalg.norm(e, axis=-1, keepdims=True)
    u = e / norms
    cosang = np.einsum("...i,...i->...", u, np.roll(u, -1, axis=-2))
    return np.arccos(np.clip(cosang, -1.0, 1.0)).sum(axis=-1)


def total_curvature_poly(points) -> float:
    """Sum of exterior angles ``arccos(e_i . e_{i+1})`` of a closed polygon."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ShapeError(f"need at least 3 vertices, got shape {pts.shape}")
    if np.linalg.norm(np.roll(pts, -1, axis=0) - pts, axis=1).min() == 0.0:
        raise DegenerateInput("polygon has a zero-length edge")
    return float(total_curvature_poly_batch(pts))


def panel_rule(curve: SpaceCurve, quad: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    """Composite nodes and weights on ``[0, T)`` with panels split at breakpoints.

    Each panel between consecutive breakpoints receives
    ``quad.points_per_axis`` nodes (midpoint rule) or intervals (trapezoid).
    """
    cuts = sorted({0.0, *(float(b) for b in curve.breakpoints if 0.0 < b < curve.period)})
    cuts.append(curve.period)
    m = int(quad.points_per_axis)
    nodes, weights = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        h = (hi - lo) / m
        if quad.rule == "midpoint":
            nodes.append(lo + (np.arange(m) + 0.5) * h)
            weights.append(np.full(m, h))
        else:
            # trapezoid with one-sided endpoint values: nudge off the kinks
            x = lo + np.arange(m + 1) * h
            x[0] += 1e-12 * (hi - lo)
            x[-1] -= 1e-12 * (hi - lo)
            w = np.full(m + 1, h)
            w[[0, -1]] = h / 2
            nodes.append(x)
            weights.append(w)
    return np.concatenate(nodes), np.concatenate(weights)


def curvature_expectation(curve: SpaceCurve, quad: QuadratureSpec = QuadratureSpec()) -> float:
    """Expected total curvature of a random 3-projection of ``curve``.

    Equals the total curvature of the curve itself:
    ``integral of curvature_kernel(r'(t), r''(t)) dt``.
    """
    t, w = panel_rule(curve, quad)
    return float((curvature_kernel_batch(curve.deriv(t), curve.deriv2(t)) * w).sum())


def icn_expectation(c1: SpaceCurve, c2: SpaceCurve, quad: QuadratureSpec = QuadratureSpec(),
                    c_icn: float = 1.0) -> float:
    """Expected inter-crossing number ``(C/4pi) iint icn_kernel dt ds``.

    The kernel is evaluated at ``(r1'(t), r2'(s), r2(s) - r1(t))`` on the
    tensor product of both panel rules.
    """
    if c1.ambient_dim != c2.ambient_dim:
        raise ShapeError("curves live in different dimensions")
    t, wt = panel_rule(c1, quad)
    s, ws = panel_rule(c2, quad)
    r1, d1 = c1.eval(t), c1.deriv(t)
    r2, d2 = c2.eval(s), c2.deriv(s)
    total = 0.0
    step = max(1, 2_000_000 // max(len(s), 1))
    for lo in range(0, len(t), step):
        sl = slice(lo, lo + step)
        a3 = r2[None, :, :] - r1[sl, None, :]
        if np.linalg.norm(a3, axis=-1).min() < 1e-9:
            raise DegenerateInput("curves come within 1e-9 of each other")
        a1 = np.broadcast_to(d1[sl, None, :], a3.shape)
        a2 = np.broadcast_to(d2[None, :, :], a3.shape)
        total += float((icn_kernel_batch(a1, a2, a3) * wt[sl, None] * ws[None, :]).sum())
    return c_icn / (4 * math.pi) * total
