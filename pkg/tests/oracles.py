"""Independent reference implementations used only by the tests.

Each oracle takes a different computational route from the library code:
cofactor expansion instead of elimination, explicit 4x4 determinants
instead of Gram matrices, Riemann sums of the smooth Gauss integral instead
of solid angles.
"""

from __future__ import annotations

import math

import numpy as np


def cofactor_det(m) -> float:
    """Determinant by Laplace expansion along the first row."""
    m = np.asarray(m, dtype=float)
    k = m.shape[0]
    if k == 1:
        return float(m[0, 0])
    if k == 2:
        return float(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0])
    total = 0.0
    for j in range(k):
        minor = np.delete(m[1:], j, axis=1)
        total += (-1) ** j * m[0, j] * cofactor_det(minor)
    return total


def bracket_by_cofactors(vectors) -> np.ndarray:
    """``X_i = det[e_i; a_1; ...; a_{n-1}]`` so that ``X . x = det[x; a_1; ...]``."""
    v = np.asarray(vectors, dtype=float)
    n = v.shape[1]
    return np.array([cofactor_det(np.vstack([np.eye(n)[i], v])) for i in range(n)])


def lk2_kernel_r4(vectors) -> float:
    """The R^4 kernel with explicit 4x4 determinants (no Gram matrices)."""
    a1, a2, a3, b1, b2, b3 = np.asarray(vectors, dtype=float)
    u = (a3 @ a3) * (b3 @ b3)
    x = a3 @ b3
    d = u - x * x
    g3 = cofactor_det(np.array([a1, a2, a3]) @ np.array([b1, b2, b3]).T)
    g4 = cofactor_det(np.array([a3, b1, b2, b3])) * cofactor_det(np.array([b3, a1, a2, a3]))
    return 2.0 / math.pi * (d * g3 + x * g4) / (u * d**1.5)


def gauss_linking_smooth(r1, d1, r2, d2, period1, period2, m: int = 400) -> float:
    """Midpoint-rule Gauss integral ``(1/4pi) iint (r1' x r2') . (r1 - r2) / |r1 - r2|^3``."""
    t = (np.arange(m) + 0.5) * period1 / m
    s = (np.arange(m) + 0.5) * period2 / m
    p, dp = r1(t), d1(t)
    q, dq = r2(s), d2(s)
    diff = p[:, None, :] - q[None, :, :]
    cr = np.cross(dp[:, None, :], dq[None, :, :])
    val = (cr * diff).sum(-1) / np.linalg.norm(diff, axis=-1) ** 3
    return float(val.sum() * (period1 / m) * (period2 / m) / (4 * math.pi))


def random_orthogonal(n: int, rng: np.random.Generator) -> np.ndarray:
    q, r = np.linalg.qr(rng.standard_normal((n, n)))
    return q * np.sign(np.diag(r))


def hopf_link(m: int = 64):
    t = 2 * np.pi * np.arange(m) / m
    p = np.stack([np.cos(t), np.sin(t), 0 * t], 1)
    q = np.stack([1 + np.cos(t), 0 * t, np.sin(t)], 1)
    return p, q


def split_link(m: int = 64, gap: float = 10.0):
    t = 2 * np.pi * np.arange(m) / m
    p = np.stack([np.cos(t), np.sin(t), 0 * t], 1)
    q = np.stack([np.cos(t), np.sin(t), gap + 0 * t], 1)
    return p, q
