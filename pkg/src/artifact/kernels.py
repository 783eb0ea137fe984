"""Closed-form projection-averaged kernels and their Monte Carlo oracles.

Each kernel is the average, over uniformly random 3-dimensional (or
codimension-one) subspaces, of a Gauss-type integrand evaluated on
tangent/chord vectors:

* ``icn_kernel``       -- sqrt(det A^T A) / |a3|^3, the inter-crossing kernel
* ``curvature_kernel`` -- sqrt(|r'|^2 |r''|^2 - (r'.r'')^2) / |r'|^2
* ``lk2_kernel``       -- second moment of the Gauss linking integrand,
  expressed through inner products only, valid in every ambient dimension
* ``higher_kernel``    -- the analogue for m- and n-manifolds in R^{m+n+2}

The Gaussian-integral estimators (``lk2_oracle``, ``higher_oracle``,
``i33_mc``) evaluate the defining integrals by brute force and serve as
independent checks of the closed forms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .core_linalg import bracket, det, gram, orthonormalize_batch
from .errors import DegenerateInput, InvalidInput, NearSingular, ShapeError, Unsupported
from .stats import MCEstimate, accumulate_blocks, to_estimate
from .streams import STREAM_CALIBRATION, STREAM_HIGHER, STREAM_ORACLE, make_rng

DEFAULT_GUARD = 1e-12
TINY = 1e-300


@dataclass(frozen=True)
class ConfigTriple:
    """Tangent ``a1``, tangent ``a2`` and chord ``a3`` (all in R^n)."""

    a1: np.ndarray
    a2: np.ndarray
    a3: np.ndarray

    def __post_init__(self):
        vs = [np.asarray(v, dtype=float) for v in (self.a1, self.a2, self.a3)]
        if any(v.ndim != 1 for v in vs) or len({v.shape for v in vs}) != 1:
            raise ShapeError("ConfigTriple vectors must share one ambient dimension")
        for name, v in zip(("a1", "a2", "a3"), vs):
            object.__setattr__(self, name, v)

    @property
    def matrix(self) -> np.ndarray:
        """Rows ``a1, a2, a3``."""
        return np.stack([self.a1, self.a2, self.a3])

    @property
    def dim(self) -> int:
        return self.a1.shape[0]


@dataclass(frozen=True)
class ConfigPair:
    """The six vectors ``(a1, a2, a3, a1', a2', a3')`` of the Lk^2 kernel."""

    first: ConfigTriple
    second: ConfigTriple

    def __post_init__(self):
        if self.first.dim != self.second.dim:
            raise ShapeError("ConfigPair triples live in different dimensions")

    @classmethod
    def from_vectors(cls, vectors) -> "ConfigPair":
        v = np.asarray(vectors, dtype=float)
        if v.shape[0] != 6:
            raise ShapeError(f"expected 6 vectors, got {v.shape[0]}")
        return cls(ConfigTriple(*v[:3]), ConfigTriple(*v[3:]))

    @property
    def vectors(self) -> np.ndarray:
        return np.concatenate([self.first.matrix, self.second.matrix])

    def discriminant(self) -> tuple[float, float]:
        """``D = |a3|^2 |a3'|^2 - (a3.a3')^2`` and ``D / (|a3|^2 |a3'|^2)``."""
        u = float(self.first.a3 @ self.first.a3) * float(self.second.a3 @ self.second.a3)
        x = float(self.first.a3 @ self.second.a3)
        d = u - x * x
        return d, (d / u if u > 0 else 0.0)


@dataclass(frozen=True)
class AbCoords:
    """Positive ``a, b`` with ``a^2 + b^2 = 1``."""

    a: float
    b: float

    def __post_init__(self):
        a, b = float(self.a), float(self.b)
        if not (a > 0 and b > 0) or abs(a * a + b * b - 1) > 1e-10:
            raise InvalidInput(f"need a, b > 0 with a^2 + b^2 = 1, got ({a}, {b})")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_angle(cls, theta: float) -> "AbCoords":
        return cls(math.cos(theta), math.sin(theta))


# ---------------------------------------------------------------------------
# inter-crossing and curvature kernels


def icn_kernel(c: ConfigTriple) -> float:
    """``sqrt(det gram(A, A)) / |a3|^3`` for ``A = [a1, a2, a3]``."""
    n3 = float(np.linalg.norm(c.a3))
    if n3 < TINY:
        raise DegenerateInput("chord a3 vanishes")
    g = det(gram(c.matrix, c.matrix))
    return math.sqrt(max(g, 0.0)) / n3**3


def icn_kernel_batch(a1, a2, a3) -> np.ndarray:
    """Vectorised :func:`icn_kernel` over leading axes."""
    a = np.stack([a1, a2, a3], axis=-2)
    g = np.linalg.det(a @ np.swapaxes(a, -1, -2))
    n3 = np.linalg.norm(a3, axis=-1)
    return np.sqrt(np.maximum(g, 0.0)) / n3**3


def curvature_kernel(r1, r2) -> float:
    """Curvature density ``sqrt(|r'|^2 |r''|^2 - (r'.r'')^2) / |r'|^2``."""
    r1 = np.asarray(r1, dtype=float)
    r2 = np.asarray(r2, dtype=float)
    s = float(r1 @ r1)
    if math.sqrt(s) < TINY:
        raise DegenerateInput("zero velocity")
    g = s * float(r2 @ r2) - float(r1 @ r2) ** 2
    return math.sqrt(max(g, 0.0)) / s


def curvature_kernel_batch(r1, r2) -> np.ndarray:
    s = np.einsum("...i,...i->...", r1, r1)
    g = s * np.einsum("...i,...i->...", r2, r2) - np.einsum("...i,...i->...", r1, r2) ** 2
    return np.sqrt(np.maximum(g, 0.0)) / s


def calibrate_c_icn(n: int, n_samples: int = 200_000, seed: int = 0) -> MCEstimate:
    """Monte Carlo of the ICN constant: the projection average at ``(e1, e2, e3)``.

    For a uniformly random 3-frame ``F`` of R^n this averages
    ``|det F[:3]| / |F[2]|^3``.  The value is exactly 1 for ``n = 4``.
    """
    if n < 4:
        raise InvalidInput("ambient dimension must be >= 4")

    def block(b, size):
        rng = make_rng(seed, STREAM_CALIBRATION, n, b)
        q, bad = orthonormalize_batch(rng.standard_normal((size, n, 3)))
        top = q[:, :3, :]
        val = np.abs(np.linalg.det(top)) / np.linalg.norm(top[:, 2, :], axis=-1) ** 3
        return np.where(bad, np.nan, val)

    mom, rej, _ = accumulate_blocks(n_samples, block)
    return to_estimate(mom, 1.0, rej, seed)


# ---------------------------------------------------------------------------
# second moment of the linking integrand


def lk2_kernel(p: ConfigPair, guard: float = DEFAULT_GUARD) -> float:
    """Projection-averaged product of two Gauss linking integrands.

    ``(pi/2) I = [D det(A A'^T) + (a3.a3') det(G4)] / (|a3|^2 |a3'|^2 D^{3/2})``
    where ``G4`` is the cross-Gram matrix of ``[a3, a1', a2', a3']`` against
    ``[a3', a1, a2, a3]``; in R^4 ``det G4`` is the product of the two 4x4
    determinants, and the Gram form extends the kernel to any dimension.

    Raises
    ------
    NearSingular
        When ``D / (|a3|^2 |a3'|^2) <= guard`` (chords (anti)parallel).
    """
    f, s = p.first, p.second
    u = float(f.a3 @ f.a3) * float(s.a3 @ s.a3)
    x = float(f.a3 @ s.a3)
    d = u - x * x
    if not u > 0 or d / u <= guard:
        raise NearSingular(f"relative discriminant {d / u if u > 0 else 0.0:.3e} <= guard {guard:g}")
    g3 = det(gram(f.matrix, s.matrix))
    g4 = det(gram([f.a3, s.a1, s.a2, s.a3], [s.a3, f.a1, f.a2, f.a3]))
    return (2.0 / math.pi) * (d * g3 + x * g4) / (u * d**1.5)


def lk2_kernel_batch(a1, a2, a3, b1, b2, b3, guard: float = DEFAULT_GUARD):
    """Vectorised :func:`lk2_kernel`.

    Returns ``(values, relative_discriminant)``; guarded entries are NaN.
    Determinants use LAPACK LU with partial pivoting.
    """
    x = np.einsum("...i,...i->...", a3, b3)
    u = np.einsum("...i,...i->...", a3, a3) * np.einsum("...i,...i->...", b3, b3)
    d = u - x * x
    with np.errstate(divide="ignore", invalid="ignore"):
        rel = np.where(u > 0, d / u, 0.0)
    a = np.stack([a1, a2, a3], axis=-2)
    b = np.stack([b1, b2, b3], axis=-2)
    g3 = np.linalg.det(a @ np.swapaxes(b, -1, -2))
    m = np.stack([a3, b1, b2, b3], axis=-2)
    n = np.stack([b3, a1, a2, a3], axis=-2)
    g4 = np.linalg.det(m @ np.swapaxes(n, -1, -2))
    ok = rel > guard
    dd = np.where(ok, d, 1.0)
    uu = np.where(ok, u, 1.0)
    val = (2.0 / np.pi) * (dd * g3 + x * g4) / (uu * dd**1.5)
    return np.where(ok, val, np.nan), rel


def _projected_gauss_estimate(rows, rows_p, n_samples, seed, stream, chunks=1, threads=1):
    """Gaussian-direction estimate of ``E[(X.v)(X'.v) / (|P a_N|^N |P a'_N|^N)]``.

    ``rows`` holds ``a_1 .. a_N`` in R^{N+1}; ``X`` is their bracket and
    ``P`` the projection orthogonal to the unit direction ``v``.
    """
    rows = np.asarray(rows, dtype=float)
    rows_p = np.asarray(rows_p, dtype=float)
    big_n, dim = rows.shape
    if rows_p.shape != rows.shape or dim != big_n + 1:
        raise ShapeError("need N vectors in R^{N+1} for both configurations")
    x, xp = bracket(rows), bracket(rows_p)
    last, last_p = rows[-1], rows_p[-1]
    nl, nlp = float(last @ last), float(last_p @ last_p)
    underflow = [0]

    def block(b, size):
        rng = make_rng(seed, stream, b)
        v = rng.standard_normal((size, dim))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        p1 = nl - (v @ last) ** 2
        p2 = nlp - (v @ last_p) ** 2
        den = np.maximum(p1, 0.0) ** (big_n / 2) * np.maximum(p2, 0.0) ** (big_n / 2)
        small = den < TINY
        underflow[0] += int(small.sum())
        return np.where(small, np.nan, (v @ x) * (v @ xp) / np.where(small, 1.0, den))

    mom, rej, _ = accumulate_blocks(n_samples, block, chunks, threads)
    if rej > 0.01 * n_samples:
        raise NearSingular(f"{rej} of {n_samples} oracle samples underflowed")
    return to_estimate(mom, 1.0, rej, seed)


def lk2_oracle(p: ConfigPair, n_samples: int = 1_000_000, seed: int = 0,
               chunks: int = 1, threads: int = 1) -> MCEstimate:
    """Brute-force Gaussian integral defining :func:`lk2_kernel` (R^4 only).

    Averages ``Det[A v] Det[A' v] / (|P a3|^3 |P a3'|^3)`` over standard
    Gaussian ``v`` (only its direction matters), where ``P`` projects
    orthogonally to ``v``.
    """
    if p.first.dim != 4:
        raise ShapeError("lk2_oracle integrates over R^4 directions")
    if n_samples < 10_000:
        raise InvalidInput("lk2_oracle needs at least 1e4 samples")
    return _projected_gauss_estimate(p.first.matrix, p.second.matrix, n_samples, seed,
                                     STREAM_ORACLE, chunks, threads)


# ---------------------------------------------------------------------------
# the I_ijkl table of the basis configurations


def _ijkl_branches(i, j, k, l, a, b):
    s13 = {1, 3, 4, 5, 6}
    s23 = {2, 3, 4, 5, 6}
    s3 = {3, 4, 5, 6}
    rows = [
        (1, 2 * b * b, j == k and i == l and i != j and i in s13 and j in s13),
        (2, -2 * b * b, i == k and j == l and i != j and i in s13 and j in s13),
        (3, -2 * a * a, j == k and i == l and i != j and i in s23 and j in s23),
        (4, 2 * a * a, i == k and j == l and i != j and i in s23 and j in s23),
        (5, 2 * a * b, (l == 1 and j == 2 and i == k and i in s3)
         or (i == 1 and l == 2 and j == k and j in s3)
         or (k == 1 and i == 2 and j == l and j in s3)
         or (j == 1 and k == 2 and i == l and i in s3)),
        (6, -2 * a * b, (j == 1 and l == 2 and i == k and i in s3)
         or (l == 1 and i == 2 and j == k and j in s3)
         or (i == 1 and k == 2 and j == l and j in s3)
         or (k == 1 and j == 2 and i == l and i in s3)),
    ]
    scale = math.pi * math.sqrt(1.0 - (a * a - b * b) ** 2)
    return [(no, num / scale) for no, num, hit in rows if hit]


def ijkl_matching_branches(i, j, k, l, ab: AbCoords) -> list[tuple[int, float]]:
    """All table rows (1-based row number, value) whose condition holds."""
    for idx in (i, j, k, l):
        if idx not in range(1, 7):
            raise InvalidInput(f"indices must lie in 1..6, got {(i, j, k, l)}")
    return _ijkl_branches(i, j, k, l, ab.a, ab.b)


def ijkl_table(i, j, k, l, ab: AbCoords) -> float:
    """Tabulated ``I_ijkl(a, b)``, first matching row, 0 when none matches.

    The row conditions overlap for indices in {3, 4, 5, 6}; use
    :func:`ijkl_matching_branches` to see every candidate and
    :func:`ijkl_consistency_report` to compare with :func:`lk2_kernel`.
    """
    hits = ijkl_matching_branches(i, j, k, l, ab)
    return hits[0][1] if hits else 0.0


def ijkl_config(i, j, k, l, ab: AbCoords) -> ConfigPair:
    """``([e_i, e_j, a e1 + b e2], [e_k, e_l, a e1 - b e2])`` in R^6."""
    e = np.eye(6)
    return ConfigPair(ConfigTriple(e[i - 1], e[j - 1], ab.a * e[0] + ab.b * e[1]),
                      ConfigTriple(e[k - 1], e[l - 1], ab.a * e[0] - ab.b * e[1]))


@dataclass(frozen=True)
class IjklReport:
    """Comparison of the table against the closed-form kernel on all 6^4 tuples."""

    ab: AbCoords
    n_tuples: int
    n_overlapping: int
    n_discrepant: int
    discrepancies: tuple  # ((i, j, k, l), table_value, kernel_value)


def ijkl_consistency_report(ab: AbCoords, tol: float = 1e-9) -> IjklReport:
    overlap = 0
    bad = []
    for idx in itertools.product(range(1, 7), repeat=4):
        hits = ijkl_matching_branches(*idx, ab)
        overlap += len(hits) > 1
        table = hits[0][1] if hits else 0.0
        kern = lk2_kernel(ijkl_config(*idx, ab))
        if abs(table - kern) > tol:
            bad.append((idx, table, kern))
    return IjklReport(ab, 6**4, overlap, len(bad), tuple(bad))


# ---------------------------------------------------------------------------
# higher-dimensional linking: the I_{3,3} coefficient and the assembled kernel

SUPPORTED_MN = (2, 4, 6, 8)


def _check_mn(mn):
    if mn not in SUPPORTED_MN:
        raise Unsupported(f"m+n = {mn} has no closed form; supported: {SUPPORTED_MN}")


def i33_coeff(mn: int, ab: AbCoords) -> float:
    """Closed-form ``I_{3,3}(a, b)`` for ``m + n`` in {2, 4, 6, 8}."""
    _check_mn(mn)
    a, b = ab.a, ab.b
    a2, b2 = a * a, b * b
    if mn == 2:
        return 1.0 / (math.pi * a * b)
    if mn == 4:
        return (1 + 4 * a2 * b2) / (9 * math.pi * a**3 * b**3)
    if mn == 6:
        num = 9 * b2**2 + 2 * a2 * b2 * (5 + 16 * b2) + a2**2 * (9 + 32 * b2 + 128 * b2**2)
        return num / (450 * math.pi * a**5 * b**5)
    num = (15 * b2**3 + 3 * a2 * b2**2 * (7 + 20 * b2)
           + 3 * a2**3 * (1 + 4 * b2) * (5 + 64 * b2**2)
           + a2**2 * b2 * (21 + 56 * b2 + 192 * b2**2))
    return num / (3675 * math.pi * a**7 * b**7)


def _graded_gauss(lo, hi, nodes, levels=30):
    """Gauss-Legendre rule on [lo, hi] with panels refined geometrically at ``lo``."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = [lo] + [lo + (hi - lo) * 2.0**-j for j in range(levels, -1, -1)]
    pts = [p + (q - p) * (x + 1) / 2 for p, q in zip(edges[:-1], edges[1:])]
    wts = [w * (q - p) / 2 for p, q in zip(edges[:-1], edges[1:])]
    return np.concatenate(pts), np.concatenate(wts)


def i33_quadrature(mn: int, ab: AbCoords, nodes: int = 24) -> float:
    """Deterministic quadrature of ``I_{3,3}`` in toroidal coordinates.

    After integrating out the radial variable the coefficient is a
    2-D integral over ``theta`` in [0, 2pi) and ``sigma`` in [0, pi/2]
    (the remaining angle factors out).  The integrand has an integrable
    kink at ``sigma = 0, theta = pi/4 (mod pi/2)``; panels are graded
    toward it.  Independent of :func:`i33_coeff`, so it serves as an oracle.
    """
    _check_mn(mn)
    a, b = ab.a, ab.b
    big_n, big_np = mn + 1, mn + 2
    d = mn - 2
    sphere = 2 * math.pi ** ((d + 1) / 2) / math.gamma((d + 1) / 2)
    pref = sphere * math.factorial(mn // 2) * 2 ** (mn // 2) / (2 * a * b * (2 * math.pi) ** (big_np / 2))
    # angle factor: int_0^{2pi} sin^{N'-4} phi cos^2 phi dphi
    pw = big_np - 4
    phi = 2 * math.pi * math.gamma((pw + 1) / 2) * math.gamma(1.5) / (math.pi * math.gamma(pw / 2 + 2))
    off, wo = _graded_gauss(0.0, math.pi / 4, nodes)
    theta = np.concatenate([math.pi / 4 - off, math.pi / 4 + off])
    wt = np.concatenate([wo, wo])
    sig, ws = _graded_gauss(0.0, math.pi / 2, nodes)
    th, sg = np.meshgrid(theta, sig, indexing="ij")
    k1 = np.sin(sg) ** 2 + np.cos(sg) ** 2 * ((np.cos(th) / b) ** 2 + (np.sin(th) / a) ** 2)
    # 1 - cos^4(s) sin^2(2t), rewritten to avoid cancellation near the kink
    den = np.cos(2 * th) ** 2 + np.sin(2 * th) ** 2 * np.sin(sg) ** 2 * (1 + np.cos(sg) ** 2)
    f = k1 ** ((big_np - 4) / 2) * np.sin(sg) ** big_n * np.cos(sg) / den ** (big_n / 2)
    # theta in [0, pi/2] covers a quarter of the period
    return float(pref * phi * 4 * (f * np.outer(wt, ws)).sum())


def _split_form_integrand(v, ab: AbCoords, mn: int, weight: str):
    a, b = ab.a, ab.b
    big_n = mn + 1
    r2 = np.einsum("ij,ij->i", v, v)
    rest = r2 - v[:, 0] ** 2 - v[:, 1] ** 2
    d1 = (b * v[:, 0] - a * v[:, 1]) ** 2 + rest
    d2 = (b * v[:, 0] + a * v[:, 1]) ** 2 + rest
    if weight == "33":
        num = v[:, 2] ** 2
    else:  # a^2 I22 - b^2 I11 combined, which stays integrable
        num = a * a * v[:, 1] ** 2 - b * b * v[:, 0] ** 2
    return r2**mn * num / (d1 * d2) ** (big_n / 2)


def i33_mc(mn: int, ab: AbCoords, n_samples: int = 1_000_000, seed: int = 0) -> MCEstimate:
    """Gaussian Monte Carlo of ``I_{3,3}`` in R^{mn+2} (direct defining integral)."""
    if mn < 2 or mn % 2:
        raise Unsupported("m+n must be even and >= 2")

    def block(bi, size):
        v = make_rng(seed, STREAM_HIGHER, 33, mn, bi).standard_normal((size, mn + 2))
        return _split_form_integrand(v, ab, mn, "33")

    mom, rej, _ = accumulate_blocks(n_samples, block)
    return to_estimate(mom, 1.0, rej, seed)


def split_pair_mc(mn: int, ab: AbCoords, n_samples: int = 1_000_000, seed: int = 0) -> MCEstimate:
    """Monte Carlo of ``a^2 I_{2,2} - b^2 I_{1,1}``.

    ``I_{1,1}`` and ``I_{2,2}`` diverge individually, but only this
    combination enters the assembled kernel (see :func:`higher_kernel`) and
    its numerator vanishes on both singular directions.  It is exactly 0
    for ``m + n = 2``.  The integrand has infinite variance, so treat the
    stderr as indicative; :func:`split_pair_quadrature` is the accurate path.
    """
    if mn < 2 or mn % 2:
        raise Unsupported("m+n must be even and >= 2")

    def block(bi, size):
        v = make_rng(seed, STREAM_HIGHER, 12, mn, bi).standard_normal((size, mn + 2))
        return _split_form_integrand(v, ab, mn, "12")

    mom, rej, _ = accumulate_blocks(n_samples, block)
    return to_estimate(mom, 1.0, rej, seed)


def _disk_rule(ab: AbCoords, nodes: int):
    """Polar Gauss-Legendre rule on the unit disk graded toward the four
    boundary points ``+-(a, b)``, ``+-(a, -b)`` where the integrands peak."""
    alpha = math.atan2(ab.b, ab.a)
    cuts = np.sort(np.mod([alpha, -alpha, math.pi + alpha, math.pi - alpha], 2 * math.pi))
    cuts = np.append(cuts, cuts[0] + 2 * math.pi)
    phis, wphis = [], []
    for lo, hi in zip(cuts[:-1], cuts[1:]):
        x, w = _graded_gauss(0.0, (hi - lo) / 2, nodes)
        phis += [lo + x, hi - x]
        wphis += [w, w]
    s, ws = _graded_gauss(0.0, 1.0, nodes)
    r, phi = np.meshgrid(1.0 - s, np.concatenate(phis), indexing="ij")
    return r, phi, np.outer(ws, np.concatenate(wphis)) * r, alpha


def split_pair_quadrature(mn: int, ab: AbCoords, nodes: int = 24) -> float:
    """Deterministic value of ``a^2 I_{2,2} - b^2 I_{1,1}``.

    The integrand is homogeneous of degree 0, so the Gaussian average is a
    uniform average over the unit sphere of R^d (``d = mn + 2``).  Its
    numerator involves only ``v1, v2``, whose joint law on the sphere has
    density ``(d-2)/(2 pi) (1 - r^2)^{(d-4)/2}`` on the unit disk, giving
    a 2-D integral that is absolutely convergent.
    """
    if mn < 2 or mn % 2:
        raise Unsupported("m+n must be even and >= 2")
    d, big_n = mn + 2, mn + 1
    r, phi, w, alpha = _disk_rule(ab, nodes)
    r2 = r * r
    om = 1.0 - r2
    d1 = om + r2 * np.sin(phi - alpha) ** 2
    d2 = om + r2 * np.sin(phi + alpha) ** 2
    num = -r2 * np.sin(alpha - phi) * np.sin(alpha + phi)
    f = (d - 2) / (2 * math.pi) * om ** ((d - 4) // 2) * num / (d1 * d2) ** (big_n / 2)
    return float((f * w).sum())


@dataclass(frozen=True)
class HigherKernelResult:
    value: float
    stderr: float
    ab: AbCoords
    split_term: float  # contribution of the I_{1,1}/I_{2,2} pair
    i33_term: float


def higher_kernel(vectors, primed, mn: int, guard: float = DEFAULT_GUARD,
                  method: str = "quadrature", n_samples: int = 1_000_000,
                  seed: int = 0) -> HigherKernelResult:
    """Second-moment kernel for linking of manifolds with ``m + n = mn``.

    Parameters
    ----------
    vectors, primed : array_like, shape (mn+1, mn+2)
        ``a_1 .. a_{mn}`` (tangents) followed by the chord ``a_{mn+1}``.
    method : {"quadrature", "mc"}
        How the ``I_{1,1}/I_{2,2}`` combination is evaluated for ``mn > 2``.
        The Monte Carlo integrand has infinite variance, so its reported
        stderr is only indicative; quadrature is the default.

    Notes
    -----
    With ``q = a_N / |a_N|`` (``N = mn+1``), ``b1 ~ q + q'``,
    ``b2 ~ q - q'``, ``a = q.b1``, ``b = q.b2`` and ``X`` the bracket of the
    ``a_i``::

        I |a_N|^N |a'_N|^N = I11 c1 + I22 c2 + I33 (X.X' - c1 - c2)

    with ``c_i = (b_i.X)(b_i.X')``.  Because ``X`` is orthogonal to ``q``
    (and ``X'`` to ``q'``), ``c1 = -(b/a)^2 c2``, so the first two terms
    equal ``(c2/a^2)(a^2 I22 - b^2 I11)``.  ``I11`` and ``I22`` diverge on
    their own; the combination converges and vanishes for ``mn = 2``.
    """
    _check_mn(mn)
    if method not in ("quadrature", "mc"):
        raise InvalidInput(f"unknown method {method!r}")
    rows = np.asarray(vectors, dtype=float)
    rows_p = np.asarray(primed, dtype=float)
    big_n = mn + 1
    if rows.shape != (big_n, big_n + 1) or rows_p.shape != rows.shape:
        raise ShapeError(f"need {big_n} vectors in R^{big_n + 1} for each configuration")
    last, last_p = rows[-1], rows_p[-1]
    nl, nlp = float(np.linalg.norm(last)), float(np.linalg.norm(last_p))
    if min(nl, nlp) < TINY:
        raise DegenerateInput("chord vanishes")
    q, qp = last / nl, last_p / nlp
    cos = float(q @ qp)
    rel = 1.0 - cos * cos
    if rel <= guard:
        raise NearSingular(f"relative discriminant {rel:.3e} <= guard {guard:g}")
    plus, minus = q + qp, q - qp
    a_len, b_len = np.linalg.norm(plus), np.linalg.norm(minus)
    b1, b2 = plus / a_len, minus / b_len
    h = math.hypot(a_len, b_len)
    ab = AbCoords(a_len / h, b_len / h)
    x, xp = bracket(rows), bracket(rows_p)
    c1 = float(b1 @ x) * float(b1 @ xp)
    c2 = float(b2 @ x) * float(b2 @ xp)
    rest = float(x @ xp) - c1 - c2
    norm = nl**big_n * nlp**big_n
    i33_term = i33_coeff(mn, ab) * rest / norm
    if mn == 2:
        split, split_err = 0.0, 0.0
    else:
        scale = c2 / ab.a**2 / norm
        if method == "quadrature":
            split, split_err = scale * split_pair_quadrature(mn, ab), 0.0
        else:
            est = split_pair_mc(mn, ab, n_samples, seed)
            split, split_err = scale * est.mean, abs(scale) * est.stderr
    return HigherKernelResult(i33_term + split, split_err, ab, split, i33_term)


def higher_oracle(vectors, primed, n_samples: int = 1_000_000, seed: int = 0) -> MCEstimate:
    """Direct Gaussian integral defining :func:`higher_kernel`."""
    return _projected_gauss_estimate(vectors, primed, n_samples, seed, STREAM_ORACLE + 100)
