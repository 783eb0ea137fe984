"""Parametrised closed input curves with analytic derivatives.

Families: Fourier curves, orthogonally supported Fourier link pairs, tapered
petal (rose) curves and petal link pairs, plus planar circles used as golden
test links.  Every evaluator is vectorised: ``curve.eval(t)`` accepts an
array of parameters of any shape and returns ``t.shape + (n,)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import InvalidSpec

Evaluator = Callable[[np.ndarray], np.ndarray]

FD_STEP = 1e-5


@dataclass(frozen=True)
class SpaceCurve:
    """A closed curve ``r: [0, T) -> R^n``.

    Attributes
    ----------
    ambient_dim : int
    period : float
        Length ``T`` of the parameter domain.
    eval_fn, deriv_fn : callable
        Vectorised position and first derivative.
    deriv2_fn : callable, optional
        Second derivative; central differences of ``deriv_fn`` when absent.
    breakpoints : tuple of float
        Parameters in ``[0, T)`` where the derivative is one-sided.
    label : str
    """

    ambient_dim: int
    period: float
    eval_fn: Evaluator
    deriv_fn: Evaluator
    deriv2_fn: Optional[Evaluator] = None
    breakpoints: tuple = ()
    label: str = field(default="curve", compare=False)

    def eval(self, t) -> np.ndarray:
        return self.eval_fn(np.asarray(t, dtype=float))

    def deriv(self, t) -> np.ndarray:
        return self.deriv_fn(np.asarray(t, dtype=float))

    def deriv2(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.deriv2_fn is not None:
            return self.deriv2_fn(t)
        h = FD_STEP
        return (self.deriv_fn(t + h / 2) - self.deriv_fn(t - h / 2)) / h

    def max_speed(self, grid: int = 4096) -> float:
        t = np.arange(grid) * (self.period / grid)
        return float(np.linalg.norm(self.deriv(t), axis=-1).max())


@dataclass(frozen=True)
class FourierSpec:
    """Coefficients ``c_0 .. c_N`` of ``c_0 e_0 + sum c_k (cos kt, sin kt)``."""

    coefficients: tuple

    def __post_init__(self):
        c = tuple(float(x) for x in self.coefficients)
        if len(c) < 2 or not np.all(np.isfinite(c)) or not any(x != 0.0 for x in c[1:]):
            raise InvalidSpec("Fourier spec needs a nonzero oscillatory coefficient")
        object.__setattr__(self, "coefficients", c)

    @property
    def array(self) -> np.ndarray:
        return np.array(self.coefficients)

    @property
    def modes(self) -> int:
        return len(self.coefficients) - 1


@dataclass(frozen=True)
class PetalSpec:
    """Petal count ``k`` (odd, >= 3) and taper height ``epsilon`` (> 0)."""

    petals: int
    epsilon: float

    def __post_init__(self):
        k = self.petals
        if int(k) != k or k < 3 or k % 2 == 0:
            raise InvalidSpec(f"petal count must be an odd integer >= 3, got {k}")
        if not (self.epsilon > 0 and np.isfinite(self.epsilon)):
            raise InvalidSpec(f"epsilon must be positive, got {self.epsilon}")
        object.__setattr__(self, "petals", int(k))
        object.__setattr__(self, "epsilon", float(self.epsilon))


def fourier_curve(spec: FourierSpec) -> SpaceCurve:
    """Fourier curve in R^{2N+1} with period 2pi.

    Coordinate 0 holds ``c_0``; mode ``k`` occupies coordinates ``2k-1, 2k``.
    The speed is constant: ``|r'(t)|^2 = sum k^2 c_k^2``.
    """
    c = spec.array
    n_modes = spec.modes
    k = np.arange(1, n_modes + 1)
    dim = 2 * n_modes + 1

    def _place(t, cos_part, sin_part, const):
        out = np.zeros(t.shape + (dim,))
        out[..., 0] = const
        out[..., 1::2] = cos_part
        out[..., 2::2] = sin_part
        return out

    def ev(t):
        kt = t[..., None] * k
        return _place(t, c[1:] * np.cos(kt), c[1:] * np.sin(kt), c[0])

    def d1(t):
        kt = t[..., None] * k
        return _place(t, -k * c[1:] * np.sin(kt), k * c[1:] * np.cos(kt), 0.0)

    def d2(t):
        kt = t[..., None] * k
        return _place(t, -k**2 * c[1:] * np.cos(kt), -k**2 * c[1:] * np.sin(kt), 0.0)

    return SpaceCurve(dim, 2 * np.pi, ev, d1, d2, (), f"fourier{spec.coefficients}")


def orthogonal_fourier_pair(c: FourierSpec, d: FourierSpec) -> tuple[SpaceCurve, SpaceCurve]:
    """Two Fourier curves with disjoint coordinate supports.

    With 0-based coordinates, ``r1`` uses coordinate 0 for ``c_0`` and
    ``4k-2, 4k-1`` for mode ``k``; ``r2`` uses coordinate 1 for ``d_0`` and
    ``4k, 4k+1``.  Hence ``r1(t) . r2(s) = 0`` and
    ``|r2(s) - r1(t)|^2 = sum c^2 + sum d^2`` for all ``s, t``.
    """
    n_modes = max(c.modes, d.modes)
    dim = 4 * n_modes + 2
    k = np.arange(1, n_modes + 1)

    def pad(spec):
        a = np.zeros(n_modes + 1)
        a[: spec.modes + 1] = spec.array
        return a

    def build(coef, const_idx, first_idx, label):
        def place(t, cos_part, sin_part, const):
            out = np.zeros(t.shape + (dim,))
            out[..., const_idx] = const
            out[..., first_idx::4] = cos_part
            out[..., first_idx + 1::4] = sin_part
            return out

        def ev(t):
            kt = t[..., None] * k
            return place(t, coef[1:] * np.cos(kt), coef[1:] * np.sin(kt), coef[0])

        def d1(t):
            kt = t[..., None] * k
            return place(t, -k * coef[1:] * np.sin(kt), k * coef[1:] * np.cos(kt), 0.0)

        def d2(t):
            kt = t[..., None] * k
            return place(t, -k**2 * coef[1:] * np.cos(kt), -k**2 * coef[1:] * np.sin(kt), 0.0)

        return SpaceCurve(dim, 2 * np.pi, ev, d1, d2, (), label)

    return (build(pad(c), 0, 2, f"orth1{c.coefficients}"),
            build(pad(d), 1, 4, f"orth2{d.coefficients}"))


def _rose(t, k, angle):
    """Rose ``cos(kt)(cos t, sin t)`` rotated by ``angle``, with derivatives."""
    c, s = np.cos(k * t), np.sin(k * t)
    ct, st = np.cos(t), np.sin(t)
    pts = np.stack([c * ct, c * st], -1)
    d1 = np.stack([-k * s * ct - c * st, -k * s * st + c * ct], -1)
    d2 = np.stack([-(k * k + 1) * c * ct + 2 * k * s * st,
                   -(k * k + 1) * c * st - 2 * k * s * ct], -1)
    if angle:
        rot = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        pts, d1, d2 = pts @ rot.T, d1 @ rot.T, d2 @ rot.T
    return pts, d1, d2


def _petal(spec: PetalSpec, dim: int, taper_offset: int, angle: float, label: str) -> SpaceCurve:
    k, eps = spec.petals, spec.epsilon
    h = np.pi / (2 * k)
    slope = eps / h  # = 2k eps / pi

    def panel(t):
        t = np.mod(t, np.pi)
        p = np.minimum((t // h).astype(np.intp), 2 * k - 1)
        return t, p, p // 2, (p % 2) == 0

    def scatter(out, idx, val):
        np.put_along_axis(out, idx[..., None], val[..., None], axis=-1)

    def ev(t):
        t, p, i, rising = panel(t)
        out = np.zeros(t.shape + (dim,))
        out[..., :2] = _rose(t, k, angle)[0]
        scatter(out, taper_offset + i,
                np.where(rising, slope * (t - p * h), slope * ((p + 1) * h - t)))
        return out

    def d1(t):
        t, p, i, rising = panel(t)
        out = np.zeros(t.shape + (dim,))
        out[..., :2] = _rose(t, k, angle)[1]
        scatter(out, taper_offset + i, np.where(rising, slope, -slope))
        return out

    def d2(t):
        t = np.mod(t, np.pi)
        out = np.zeros(t.shape + (dim,))
        out[..., :2] = _rose(t, k, angle)[2]
        return out  # the taper is piecewise linear

    breaks = tuple(j * h for j in range(2 * k))
    return SpaceCurve(dim, np.pi, ev, d1, d2, breaks, label)


def petal_curve(spec: PetalSpec) -> SpaceCurve:
    """Tapered rose with ``k`` petals in R^{2+k} on ``[0, pi)``.

    Coordinates 0, 1 trace ``cos(kt)(cos t, sin t)``.  Strand ``i`` (0-based)
    lifts coordinate ``2+i`` linearly from 0 to ``epsilon`` over
    ``[2ih, (2i+1)h]`` and back to 0 over ``[(2i+1)h, (2i+2)h]`` with
    ``h = pi/(2k)``.
    """
    k = spec.petals
    return _petal(spec, 2 + k, 2, 0.0, f"petal({k},{spec.epsilon:g})")


def petal_link_pair(spec: PetalSpec) -> tuple[SpaceCurve, SpaceCurve]:
    """Two petal curves in R^{2+2k} with disjoint taper coordinates.

    The second rose is the first rotated by ``(k-2)pi/k``; its tapers live in
    coordinates ``2+k .. 1+2k`` while the first curve's are ``2 .. 1+k``.
    """
    k = spec.petals
    dim = 2 + 2 * k
    return (_petal(spec, dim, 2, 0.0, f"petal1({k},{spec.epsilon:g})"),
            _petal(spec, dim, 2 + k, (k - 2) * np.pi / k, f"petal2({k},{spec.epsilon:g})"))


def planar_circle(center, u, v, radius: float = 1.0) -> SpaceCurve:
    """Circle ``center + radius (cos t u + sin t v)`` with period 2pi.

    ``u`` and ``v`` should be orthonormal; they are used as given.
    """
    center, u, v = (np.asarray(x, dtype=float) for x in (center, u, v))
    dim = center.shape[0]

    def ev(t):
        return center + radius * (np.cos(t)[..., None] * u + np.sin(t)[..., None] * v)

    def d1(t):
        return radius * (-np.sin(t)[..., None] * u + np.cos(t)[..., None] * v)

    def d2(t):
        return -radius * (np.cos(t)[..., None] * u + np.sin(t)[..., None] * v)

    return SpaceCurve(dim, 2 * np.pi, ev, d1, d2, (), "circle")


def polyline_sample(curve: SpaceCurve, m: int) -> np.ndarray:
    """Vertices ``curve(i T / m)`` for ``i = 0 .. m-1`` of a closed polygon."""
    if m < 3:
        raise InvalidSpec(f"a closed polygon needs at least 3 vertices, got {m}")
    return curve.eval(np.arange(m) * (curve.period / m))
