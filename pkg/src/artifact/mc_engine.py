"""Two independent estimators of the mean squared linking number.

``lk2_mc`` integrates the closed-form kernel over the product of parameter
domains by plain Monte Carlo.  ``lk2_sampled`` projects polygonal samples of
the curves onto random 3-frames and averages the squared linking numbers.

Determinism: samples are drawn in fixed blocks of :data:`stats.BLOCK`, each
with its own substream keyed by block index.  ``chunks`` and ``threads`` only
group and schedule blocks; the merge order is the block order, so results
are bit-identical for every choice of either.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .curves import SpaceCurve, polyline_sample
from .errors import DegenerateInput, InvalidInput, TooManyRejections
from .invariants import TOUCH_TOL, linking_number_batch, min_segment_distance, total_curvature_poly_batch
from .kernels import DEFAULT_GUARD, lk2_kernel_batch
from .sampling import GAUSSIAN, FrameDistribution, frame_for_sample, sample_frame
from .stats import MCEstimate, Moments, accumulate_blocks, to_estimate
from .streams import STREAM_MC, check_seed, make_rng

log = logging.getLogger(__name__)

MAX_REJECTION_RATE = 0.10
INTEGER_TOL = 1e-6
LINK_BATCH = 100


@dataclass(frozen=True)
class MCSpec:
    """Sample count, seed, chunk count and relative-discriminant guard."""

    n_samples: int = 500_000
    seed: int = 0
    chunks: int = 1
    guard: float = DEFAULT_GUARD
    threads: int = 1

    def __post_init__(self):
        if int(self.n_samples) < 1000:
            raise InvalidInput("n_samples must be >= 1000")
        if int(self.chunks) < 1 or int(self.threads) < 1:
            raise InvalidInput("chunks and threads must be >= 1")
        if not (self.guard >= 0 and math.isfinite(self.guard)):
            raise InvalidInput("guard must be a finite non-negative number")
        object.__setattr__(self, "seed", check_seed(self.seed))


@dataclass(frozen=True)
class MCRun:
    """An estimate together with its largest single contribution.

    ``peak_share`` is ``max |f| / n_used`` divided by ``|mean f|``: the
    fraction of the estimate carried by the single largest sample.  Values
    near or above 1 expose an integrand with (practically) infinite variance.
    """

    estimate: MCEstimate
    peak_share: float


def _integrate(f: Callable[[np.ndarray], np.ndarray], box: Sequence[tuple[float, float]],
               spec: MCSpec, stream: int) -> MCRun:
    box = np.asarray(box, dtype=float)
    if box.ndim != 2 or box.shape[1] != 2 or np.any(box[:, 1] <= box[:, 0]):
        raise InvalidInput("box must be a sequence of (lo, hi) with lo < hi")
    lo, width = box[:, 0], box[:, 1] - box[:, 0]
    volume = float(np.prod(width))

    def block(b, size):
        rng = make_rng(spec.seed, stream, b)
        return f(lo + width * rng.random((size, len(lo))))

    mom, rej, peak = accumulate_blocks(spec.n_samples, block, spec.chunks, spec.threads)
    if rej > MAX_REJECTION_RATE * spec.n_samples:
        raise TooManyRejections(f"{rej} of {spec.n_samples} samples rejected")
    est = to_estimate(mom, volume, rej, spec.seed)
    share = peak / mom.n / abs(mom.mean) if mom.n and mom.mean else math.inf
    return MCRun(est, float(share))


def mc_integrate(f: Callable[[np.ndarray], np.ndarray], box: Sequence[tuple[float, float]],
                 spec: MCSpec) -> MCEstimate:
    """Plain Monte Carlo of ``f`` over an axis-aligned box.

    Parameters
    ----------
    f : callable
        Maps an ``(m, dim)`` array of points to ``m`` values; NaN marks a
        rejected evaluation (counted, not imputed).
    box : sequence of (lo, hi)
    spec : MCSpec

    Returns
    -------
    MCEstimate
        ``volume * mean`` with stderr ``volume * sqrt(var / n_used)``.

    Raises
    ------
    TooManyRejections
        When more than 10% of the samples are rejected.
    """
    return _integrate(f, box, spec, STREAM_MC).estimate


def lk2_integrand(c1: SpaceCurve, c2: SpaceCurve, guard: float = DEFAULT_GUARD):
    """Vectorised kernel on points ``(t, s, t', s')`` of the parameter torus.

    The configuration at ``(t, s)`` is ``(r1'(t), r2'(s), r2(s) - r1(t))``.
    """
    def f(x):
        t, s, tp, sp = x.T
        a3 = c2.eval(s) - c1.eval(t)
        b3 = c2.eval(sp) - c1.eval(tp)
        val, _ = lk2_kernel_batch(c1.deriv(t), c2.deriv(s), a3,
                                  c1.deriv(tp), c2.deriv(sp), b3, guard)
        return val
    return f


def lk2_mc_run(c1: SpaceCurve, c2: SpaceCurve, spec: MCSpec) -> MCRun:
    """:func:`lk2_mc` together with its largest-sample diagnostic."""
    if c1.ambient_dim != c2.ambient_dim:
        raise InvalidInput("curves live in different dimensions")
    box = [(0.0, c1.period), (0.0, c2.period), (0.0, c1.period), (0.0, c2.period)]
    run = _integrate(lk2_integrand(c1, c2, spec.guard), box, spec, STREAM_MC)
    e = run.estimate
    scale = 1.0 / (16 * math.pi**2)
    return MCRun(MCEstimate(e.mean * scale, e.stderr * scale, e.n_used, e.n_rejected, e.seed),
                 run.peak_share)


def lk2_mc(c1: SpaceCurve, c2: SpaceCurve, spec: MCSpec) -> MCEstimate:
    """Kernel Monte Carlo of the mean squared linking number.

    ``(1/16pi^2)`` times the integral of the kernel over
    ``[0,T1) x [0,T2) x [0,T1) x [0,T2)``; guarded samples are rejected and
    reported in ``n_rejected``.
    """
    return lk2_mc_run(c1, c2, spec).estimate


@dataclass(frozen=True)
class LinkSample:
    """Result of :func:`lk2_sampled`.

    Attributes
    ----------
    estimate : MCEstimate
        Mean of ``Lk^2`` (equal to ``mean^2 + variance``) with stderr
        ``std(Lk^2) / sqrt(n)``.  ``n_rejected`` is always 0 here.
    linking : ndarray
        Linking number of each accepted sample, in sample order.
    frame_seeds : ndarray of uint64
        Seed regenerating each accepted frame.
    n_resampled : int
        Samples redrawn because a projection made the components touch.
    min_turning : float
        Smallest turning-angle sum over all projected components.
    non_integer : int
        Samples farther than 1e-6 from an integer.
    """

    estimate: MCEstimate
    linking: np.ndarray
    frame_seeds: np.ndarray
    n_resampled: int
    min_turning: float
    non_integer: int

    @property
    def mean(self) -> float:
        return float(self.linking.mean())

    @property
    def variance(self) -> float:
        return float(self.linking.var())


def _project_batch(x1, x2, n, dist, seed, indices):
    frames, seeds = [], []
    for i in indices:
        fr, fs = frame_for_sample(n, dist, seed, int(i))
        frames.append(fr.matrix)
        seeds.append(fs)
    f = np.stack(frames)
    p = np.einsum("mn,bnj->bmj", x1, f)
    q = np.einsum("mn,bnj->bmj", x2, f)
    lk, gap = linking_number_batch(p, q)
    turn = np.minimum(total_curvature_poly_batch(p), total_curvature_poly_batch(q))
    return lk, gap, turn, np.array(seeds, dtype=np.uint64)


def lk2_sampled(c1: SpaceCurve, c2: SpaceCurve, n_links: int, segments: int = 64,
                dist: FrameDistribution = GAUSSIAN, seed: int = 0,
                threads: int = 1) -> LinkSample:
    """Direct estimate of the mean squared linking number by projection.

    Each sample ``i`` draws a 3-frame from its own substream, projects the
    ``segments``-vertex polygons of both curves and computes their linking
    number.  A sample whose projected components touch is redrawn with the
    next retry index of the same sample and counted in ``n_resampled``.
    """
    seed = check_seed(seed)
    if int(n_links) < 1:
        raise InvalidInput("n_links must be >= 1")
    if int(segments) < 8:
        raise InvalidInput("segments must be >= 8")
    if c1.ambient_dim != c2.ambient_dim:
        raise InvalidInput("curves live in different dimensions")
    n = c1.ambient_dim
    x1, x2 = polyline_sample(c1, segments), polyline_sample(c2, segments)
    batches = [np.arange(lo, min(lo + LINK_BATCH, n_links)) for lo in range(0, n_links, LINK_BATCH)]

    def run(idx):
        return _project_batch(x1, x2, n, dist, seed, idx)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as ex:
            parts = list(ex.map(run, batches))
    else:
        parts = [run(b) for b in batches]

    lk = np.concatenate([p[0] for p in parts])
    gap = np.concatenate([p[1] for p in parts])
    turn = np.concatenate([p[2] for p in parts])
    seeds = np.concatenate([p[3] for p in parts])

    resampled = 0
    for i in np.flatnonzero(gap < TOUCH_TOL):
        for attempt in range(1, 9):
            resampled += 1
            fr, fs = frame_for_sample(n, dist, seed, int(i), attempt)
            p, q = x1 @ fr.matrix, x2 @ fr.matrix
            val, g = linking_number_batch(p[None], q[None])
            if g[0] >= TOUCH_TOL:
                lk[i], seeds[i] = val[0], fs
                turn[i] = min(total_curvature_poly_batch(p), total_curvature_poly_batch(q))
                break
        else:
            raise DegenerateInput(f"sample {i}: components touch in 8 consecutive frames")

    off = np.abs(lk - np.round(lk))
    bad = np.flatnonzero(off > INTEGER_TOL)
    for i in bad:
        fr = sample_frame(n, dist, make_rng(int(seeds[i])))
        log.warning("sample %d: linking number %.9f is not an integer (min segment distance %.3e)",
                    i, lk[i], min_segment_distance(x1 @ fr.matrix, x2 @ fr.matrix))

    sq = lk * lk
    est = to_estimate(Moments.of(sq), 1.0, 0, seed)
    return LinkSample(est, lk, seeds, resampled, float(turn.min()), int(bad.size))
