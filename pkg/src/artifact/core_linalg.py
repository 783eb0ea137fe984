"""Small dense linear algebra over float64.

Orthonormal 3-frames, determinants of small matrices, Gram matrices, the
Levi-Civita bracket (the R^n analogue of the cross product) and signed
solid angles.  Scalar routines favour clarity and an explicit pivoting
strategy; the ``*_batch`` helpers are the vectorised hot paths used by the
Monte Carlo code.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DegenerateInput, ShapeError

PIVOT_TOL = 1e-12


@dataclass(frozen=True)
class Frame3:
    """An ``n x 3`` matrix with orthonormal columns.

    Attributes
    ----------
    matrix : ndarray, shape (n, 3)
        Column ``j`` is the ``j``-th basis vector of the 3-subspace.
    """

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[1] != 3:
            raise ShapeError(f"frame must be n x 3, got {m.shape}")
        err = np.abs(m.T @ m - np.eye(3)).max()
        if err > 1e-10:
            raise DegenerateInput(f"frame columns not orthonormal (err={err:.2e})")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def ambient_dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def columns(self) -> tuple:
        return tuple(self.matrix[:, j] for j in range(3))


def _as_vectors(vectors, count=None) -> np.ndarray:
    arr = np.asarray(vectors, dtype=float)
    if arr.ndim != 2:
        raise ShapeError(f"expected a sequence of vectors, got shape {arr.shape}")
    if count is not None and arr.shape[0] != count:
        raise ShapeError(f"expected {count} vectors, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ShapeError("vectors must be finite")
    return arr


def orthonormalize(columns, tol: float = PIVOT_TOL) -> Frame3:
    """Classical Gram-Schmidt on three vectors with one re-orthogonalisation.

    Parameters
    ----------
    columns : array_like, shape (3, n)
        The three input vectors, in order.
    tol : float
        Relative pivot tolerance.  A pivot whose norm after projection is at
        most ``tol`` times the original column norm signals rank < 3.

    Returns
    -------
    Frame3
        Orthonormal frame with the same span; column 0 is parallel to the
        first input.
    """
    u = _as_vectors(columns, 3)
    q = np.zeros((u.shape[1], 3))
    for j in range(3):
        v = u[j].copy()
        scale = np.linalg.norm(v)
        if scale == 0.0:
            raise DegenerateInput(f"column {j} is zero")
        for _ in range(2):  # second pass restores orthogonality lost to rounding
            v -= q[:, :j] @ (q[:, :j].T @ v)
        nv = np.linalg.norm(v)
        if nv <= tol * scale:
            raise DegenerateInput(f"pivot {j} has relative norm {nv / scale:.3e}")
        q[:, j] = v / nv
    return Frame3(q)


def orthonormalize_batch(u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised Gram-Schmidt for a stack of ``(n, 3)`` matrices.

    Returns the orthonormalised stack and a boolean mask of degenerate
    inputs (rows of the mask are ``True`` where a pivot fell below
    :data:`PIVOT_TOL`; the corresponding output is garbage).
    """
    u = np.asarray(u, dtype=float)
    q = np.zeros_like(u)
    bad = np.zeros(u.shape[:-2], dtype=bool)
    for j in range(3):
        v = u[..., :, j].copy()
        scale = np.linalg.norm(v, axis=-1)
        for _ in range(2):
            if j:
                coef = np.einsum("...nk,...n->...k", q[..., :, :j], v)
                v -= np.einsum("...nk,...k->...n", q[..., :, :j], coef)
        nv = np.linalg.norm(v, axis=-1)
        bad |= ~(nv > PIVOT_TOL * scale)
        q[..., :, j] = v / np.where(nv > 0, nv, 1.0)[..., None]
    return q, bad


def det(m) -> float:
    """Determinant by Gaussian elimination with partial pivoting.

    Intended for the small (k <= 6) matrices of the kernels; works for any
    square size.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ShapeError(f"det needs a square matrix, got shape {a.shape}")
    k = a.shape[0]
    sign = 1.0
    for col in range(k):
        piv = col + int(np.argmax(np.abs(a[col:, col])))
        if a[piv, col] == 0.0:
            return 0.0
        if piv != col:
            a[[col, piv]] = a[[piv, col]]
            sign = -sign
        a[col + 1:, col:] -= np.outer(a[col + 1:, col] / a[col, col], a[col, col:])
    return sign * float(np.prod(np.diag(a)))


def gram(a, b) -> np.ndarray:
    """Cross-Gram matrix ``G[i, j] = a[i] . b[j]``."""
    a = _as_vectors(a)
    b = _as_vectors(b)
    if a.shape[1] != b.shape[1]:
        raise ShapeError(f"ambient dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    return a @ b.T


@lru_cache(maxsize=None)
def _levi_civita_table(n: int) -> tuple[np.ndarray, np.ndarray]:
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    # parity via cycle counting: sign = (-1)^(n - #cycles)
    signs = np.empty(len(perms))
    for r, p in enumerate(perms):
        seen = np.zeros(n, bool)
        cycles = 0
        for s in range(n):
            if not seen[s]:
                cycles += 1
                while not seen[s]:
                    seen[s] = True
                    s = p[s]
        signs[r] = -1.0 if (n - cycles) % 2 else 1.0
    return perms, signs


def _bracket_r4(v: np.ndarray) -> np.ndarray:
    a, b, c = v
    # X_i = (-1)^i det(rows a, b, c with column i removed)
    out = np.empty(4)
    for i in range(4):
        cols = [j for j in range(4) if j != i]
        m = np.array([a[cols], b[cols], c[cols]])
        minor = (m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
                 - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
                 + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0]))
        out[i] = -minor if i % 2 else minor
    return out


def _bracket_levi_civita(v: np.ndarray) -> np.ndarray:
    n = v.shape[1]
    perms, signs = _levi_civita_table(n)
    terms = signs * np.prod(v[np.arange(n - 1), perms[:, 1:]], axis=1)
    out = np.zeros(n)
    np.add.at(out, perms[:, 0], terms)
    return out


def bracket_batch(v: np.ndarray) -> np.ndarray:
    """Bracket of a stack of ``(n-1, n)`` vector sets via signed minors."""
    v = np.asarray(v, dtype=float)
    n = v.shape[-1]
    out = np.empty(v.shape[:-2] + (n,))
    for i in range(n):
        minor = np.linalg.det(np.delete(v, i, axis=-1))
        out[..., i] = -minor if i % 2 else minor
    return out


def bracket(vectors) -> np.ndarray:
    """Levi-Civita bracket ``[a_1 : ... : a_{n-1}]`` in R^n.

    Component ``i`` is ``sum eps_{i j_1 ... j_{n-1}} a_{1 j_1} ... a_{n-1 j_{n-1}}``,
    so ``bracket(vs) . x == det([x, a_1, ..., a_{n-1}])``.  In R^3 this is
    the cross product; ``bracket(e1, e2, e3) == -e4`` in R^4.

    R^4 uses explicit 3x3 cofactors, 5 <= n <= 8 direct epsilon summation
    and larger n signed minors.
    """
    v = _as_vectors(vectors)
    m, n = v.shape
    if m != n - 1:
        raise ShapeError(f"bracket needs n-1 vectors in R^n, got {m} in R^{n}")
    if n < 2:
        raise ShapeError("bracket needs n >= 2")
    if n == 4:
        return _bracket_r4(v)
    if n <= 8:
        return _bracket_levi_civita(v)
    return bracket_batch(v)


def solid_angle(a, b, c) -> float:
    """Signed solid angle of the spherical triangle spanned by ``a, b, c``.

    Uses the Van Oosterom-Strackee formula; the result lies in (-2pi, 2pi)
    and is positive when ``det[a, b, c] > 0``.
    """
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    if a.shape != (3,) or b.shape != (3,) or c.shape != (3,):
        raise ShapeError("solid_angle takes three vectors in R^3")
    na, nb, nc = np.linalg.norm(a), np.linalg.norm(b), np.linalg.norm(c)
    if min(na, nb, nc) < 1e-300:
        raise DegenerateInput("solid_angle argument has zero norm")
    return float(solid_angle_batch(a, b, c))


def solid_angle_batch(a, b, c) -> np.ndarray:
    """Vectorised :func:`solid_angle` over leading axes (no validation)."""
    num = np.einsum("...i,...i->...", a, np.cross(b, c))
    na = np.linalg.norm(a, axis=-1)
    nb = np.linalg.norm(b, axis=-1)
    nc = np.linalg.norm(c, axis=-1)
    den = (na * nb * nc
           + np.einsum("...i,...i->...", a, b) * nc
           + np.einsum("...i,...i->...", c, a) * nb
           + np.einsum("...i,...i->...", b, c) * na)
    return 2.0 * np.arctan2(num, den)
