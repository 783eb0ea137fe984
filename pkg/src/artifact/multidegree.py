"""Inner-product monomials as multigraphs, and least-squares kernel fitting.

A monomial in the pairwise inner products of six vectors
``A = (a1, a2, a3, a1', a2', a3')`` is a multigraph on six vertices: an edge
``(i, j)`` is a factor ``A_i . A_j`` and a loop ``(i, i)`` a factor
``|A_i|^2`` (contributing 2 to the degree of ``i``).  Vertices are 0-based
throughout, so the tangent pairs are vertices ``(0, 1)`` and ``(3, 4)``.

A kernel ``I = f / sqrt(g2)`` with ``g2 = sum d_p P_p`` is fitted by
expanding the numerator ``f`` in the antisymmetry-filtered monomials of
multidegree ``(1, 1, 3, 1, 1, 3)`` and solving linear least squares.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .errors import IllConditioned, InvalidInput, ShapeError
from .kernels import lk2_kernel_batch
from .streams import STREAM_FIT, make_rng

NUMERATOR_DEGREES = (1, 1, 3, 1, 1, 3)
DENOMINATOR_DEGREES = (0, 0, 10, 0, 0, 10)
TANGENT_PAIRS = ((0, 1), (3, 4))


@dataclass(frozen=True, order=True)
class MultiGraph:
    """Multigraph with sorted edge tuple ``((i, j), ...)``, ``i <= j``."""

    edges: tuple
    n_vertices: int = 6

    def __post_init__(self):
        edges = tuple(sorted(tuple(sorted((int(i), int(j)))) for i, j in self.edges))
        for i, j in edges:
            if not 0 <= i <= j < self.n_vertices:
                raise InvalidInput(f"edge {(i, j)} outside {self.n_vertices} vertices")
        object.__setattr__(self, "edges", edges)

    @property
    def degrees(self) -> tuple:
        deg = [0] * self.n_vertices
        for i, j in self.edges:
            deg[i] += 1
            deg[j] += 1
        return tuple(deg)

    @property
    def label(self) -> str:
        return " ".join(f"{i}-{j}" for i, j in self.edges)


def enumerate_multigraphs(degrees: Iterable[int]) -> set:
    """All multigraphs (loops allowed) with the given degree sequence.

    Edges are generated vertex by vertex in nondecreasing order, which makes
    every edge multiset appear exactly once.
    """
    deg = [int(d) for d in degrees]
    if any(d < 0 for d in deg) or sum(deg) % 2:
        raise InvalidInput("degrees must be non-negative with an even sum")
    n = len(deg)
    out = set()

    def rec(rem, edges, last):
        i = next((v for v in range(n) if rem[v]), None)
        if i is None:
            out.add(MultiGraph(tuple(edges), n))
            return
        lo = last[1] if last and last[0] == i else i
        for j in range(lo, n):
            if (j == i and rem[i] < 2) or (j != i and rem[j] < 1):
                continue
            rem[i] -= 1
            rem[j] -= 1
            edges.append((i, j))
            rec(rem, edges, (i, j))
            edges.pop()
            rem[i] += 1
            rem[j] += 1

    rec(deg[:], [], None)
    return out


def antisymmetry_filter(graphs: Iterable[MultiGraph]) -> set:
    """Drop graphs with a factor ``a1 . a2`` or ``a1' . a2'`` (edges (0,1), (3,4)).

    The kernel is antisymmetric under swapping either tangent pair, so such
    monomials have zero coefficient.
    """
    return {g for g in graphs if not any(e in g.edges for e in TANGENT_PAIRS)}


def numerator_basis() -> list:
    """The 42 retained numerator monomials in canonical (sorted) order."""
    return sorted(antisymmetry_filter(enumerate_multigraphs(NUMERATOR_DEGREES)))


def monomial_eval(g: MultiGraph, vectors) -> np.ndarray:
    """Product over edges of ``A_i . A_j``.

    ``vectors`` has shape ``(..., n_vertices, dim)``; the result has the
    leading shape (a float for a single configuration).
    """
    v = np.asarray(vectors, dtype=float)
    if v.ndim < 2 or v.shape[-2] != g.n_vertices:
        raise ShapeError(f"need {g.n_vertices} vectors, got shape {v.shape}")
    gram = v @ np.swapaxes(v, -1, -2)
    out = np.ones(v.shape[:-2])
    for i, j in g.edges:
        out = out * gram[..., i, j]
    return out if out.ndim else float(out)


def denominator_monomials(vectors) -> np.ndarray:
    """``P_1 .. P_6`` with ``P_p = (|a3|^2 |a3'|^2)^(6-p) (a3 . a3')^(2p-2)``.

    Returns shape ``(..., 6)``.
    """
    v = np.asarray(vectors, dtype=float)
    u = np.einsum("...i,...i->...", v[..., 2, :], v[..., 2, :]) * \
        np.einsum("...i,...i->...", v[..., 5, :], v[..., 5, :])
    x = np.einsum("...i,...i->...", v[..., 2, :], v[..., 5, :])
    return np.stack([u ** (5 - p) * x ** (2 * p) for p in range(6)], axis=-1)


def denominator_coefficients() -> np.ndarray:
    """``d`` with ``sum d_p P_p = |a3|^4 |a3'|^4 D^3``, ``D = |a3|^2 |a3'|^2 - (a3.a3')^2``.

    From ``u^2 (u - x^2)^3`` expanded by the binomial theorem in ``u`` and
    ``x^2``: ``d = (1, -3, 3, -1, 0, 0)``.
    """
    return np.array([1.0, -3.0, 3.0, -1.0, 0.0, 0.0])


@dataclass(frozen=True)
class FitResult:
    """Fitted numerator coefficients per monomial and fit diagnostics.

    ``residual_rms`` is measured on held-out samples in the
    ``oracle * sqrt(g2)`` scale; ``relative_residual`` divides it by the
    RMS of the held-out targets.  ``rank`` is the numerical rank of the
    (column-scaled) design matrix.
    """

    coefficients: dict
    residual_rms: float
    relative_residual: float
    rank: int

    def predict(self, vectors, d_coeffs) -> np.ndarray:
        """Evaluate the fitted rational kernel ``f / sqrt(sum d P)``."""
        v = np.asarray(vectors, dtype=float)
        num = sum(c * monomial_eval(g, v) for g, c in self.coefficients.items())
        return num / np.sqrt(denominator_monomials(v) @ np.asarray(d_coeffs, float))


def sample_configs(n: int, seed: int = 0, dim: int = 4, min_rel_disc: float = 0.05) -> np.ndarray:
    """Standard-normal six-vector configurations with relative discriminant above a floor.

    Returns shape ``(n, 6, dim)``.
    """
    rng = make_rng(seed, STREAM_FIT, dim)
    out = []
    have = 0
    while have < n:
        v = rng.standard_normal((max(2 * (n - have), 64), 6, dim))
        a, b = v[:, 2, :], v[:, 5, :]
        u = (a * a).sum(-1) * (b * b).sum(-1)
        rel = 1.0 - (a * b).sum(-1) ** 2 / u
        v = v[rel > min_rel_disc]
        out.append(v)
        have += len(v)
    return np.concatenate(out)[:n]


def lk2_kernel_configs(vectors) -> np.ndarray:
    """The second-moment kernel on ``(..., 6, dim)`` configurations."""
    v = np.asarray(vectors, dtype=float)
    val, _ = lk2_kernel_batch(*(v[..., i, :] for i in range(6)), guard=0.0)
    return val


def fit_numerator(samples, d_coeffs, oracle: Callable[[np.ndarray], np.ndarray],
                  holdout: float = 0.2, basis=None) -> FitResult:
    """Least-squares fit of ``oracle * sqrt(sum d P)`` in the numerator basis.

    The design matrix is column-scaled to unit norm and solved with the
    SVD-based minimum-norm solver; rank deficiency (Gram identities among the
    monomials in low dimension) is reported, not treated as failure.

    Raises
    ------
    IllConditioned
        When the held-out residual exceeds ``1e-3`` times the RMS target.
    """
    x = np.asarray(samples, dtype=float)
    if x.ndim != 3 or x.shape[1] != 6:
        raise ShapeError("samples must have shape (S, 6, dim)")
    if len(x) < 200:
        raise InvalidInput("need at least 200 samples")
    d = np.asarray(d_coeffs, dtype=float)
    g2 = denominator_monomials(x) @ d
    if np.any(g2 <= 0):
        raise InvalidInput("denominator polynomial is not positive on all samples")
    basis = numerator_basis() if basis is None else list(basis)
    target = np.asarray(oracle(x), dtype=float) * np.sqrt(g2)
    design = np.stack([monomial_eval(g, x) for g in basis], axis=1)

    n_fit = len(x) - max(1, int(round(holdout * len(x))))
    scale = np.linalg.norm(design[:n_fit], axis=0)
    scale[scale == 0] = 1.0
    sol, _, rank, _ = np.linalg.lstsq(design[:n_fit] / scale, target[:n_fit], rcond=None)
    coef = sol / scale

    resid = design[n_fit:] @ coef - target[n_fit:]
    rms = float(np.sqrt(np.mean(resid**2)))
    ref = float(np.sqrt(np.mean(target[n_fit:] ** 2)))
    rel = rms / ref if ref > 0 else rms
    if rms > 1e-3 * ref:
        raise IllConditioned(f"held-out residual {rms:.3e} exceeds 1e-3 x target RMS {ref:.3e}")
    return FitResult(dict(zip(basis, coef.tolist())), rms, rel, int(rank))
