"""Monte Carlo estimates and order-fixed streaming moment accumulation."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

BLOCK = 65536


@dataclass(frozen=True)
class MCEstimate:
    """Monte Carlo result.

    ``n_used + n_rejected`` equals the number of requested samples; rejected
    samples (guard hits) are excluded from ``mean`` and ``stderr``.
    """

    mean: float
    stderr: float
    n_used: int
    n_rejected: int
    seed: int

    @property
    def n_requested(self) -> int:
        return self.n_used + self.n_rejected

    @property
    def rejection_rate(self) -> float:
        return self.n_rejected / max(self.n_requested, 1)


@dataclass(frozen=True)
class Moments:
    """Count, mean and centred sum of squares of a sample."""

    n: int = 0
    mean: float = 0.0
    m2: float = 0.0

    @classmethod
    def of(cls, values: np.ndarray) -> "Moments":
        values = np.asarray(values, dtype=float)
        if values.size == 0:
            return cls()
        mu = float(values.mean())
        return cls(values.size, mu, float(((values - mu) ** 2).sum()))

    def merge(self, other: "Moments") -> "Moments":
        # Chan et al. pairwise update; stable for heavy-tailed integrands
        if other.n == 0:
            return self
        if self.n == 0:
            return other
        n = self.n + other.n
        delta = other.mean - self.mean
        mean = self.mean + delta * other.n / n
        m2 = self.m2 + other.m2 + delta * delta * self.n * other.n / n
        return Moments(n, mean, m2)

    @property
    def variance(self) -> float:
        """Population variance (``ddof = 0``)."""
        return self.m2 / self.n if self.n else float("nan")


def to_estimate(mom: Moments, scale: float, n_rejected: int, seed: int) -> MCEstimate:
    """``scale * mean`` with stderr ``scale * sqrt(var / n)``."""
    if mom.n == 0:
        return MCEstimate(float("nan"), float("nan"), 0, n_rejected, seed)
    stderr = abs(scale) * np.sqrt(max(mom.variance, 0.0) / mom.n)
    return MCEstimate(scale * mom.mean, float(stderr), mom.n, n_rejected, seed)


def block_sizes(n_samples: int, block: int = BLOCK) -> list[int]:
    full, rest = divmod(int(n_samples), block)
    return [block] * full + ([rest] if rest else [])


def accumulate_blocks(n_samples: int, evaluate: Callable[[int, int], np.ndarray],
                      chunks: int = 1, threads: int = 1, block: int = BLOCK):
    """Evaluate ``evaluate(block_index, size)`` over all blocks and merge.

    ``evaluate`` returns per-sample values with NaN marking rejected
    samples.  Blocks are grouped into ``chunks`` tasks that may run on
    ``threads`` workers, but partial moments are always merged in block
    order, so the result is identical for every ``chunks``/``threads``.

    Returns
    -------
    (Moments, int, float)
        Moments of accepted values, rejection count and the largest
        absolute accepted value.
    """
    sizes = block_sizes(n_samples, block)
    chunks = max(1, min(int(chunks), len(sizes) or 1))
    groups = np.array_split(np.arange(len(sizes)), chunks)

    def run(group):
        out = []
        for b in group:
            v = np.asarray(evaluate(int(b), sizes[b]), dtype=float)
            ok = np.isfinite(v)
            acc = v[ok]
            out.append((Moments.of(acc), int((~ok).sum()),
                        float(np.abs(acc).max()) if acc.size else 0.0))
        return out

    if threads > 1 and len(groups) > 1:
        with ThreadPoolExecutor(max_workers=int(threads)) as ex:
            parts = list(ex.map(run, groups))
    else:
        parts = [run(g) for g in groups]

    total, rejected, peak = Moments(), 0, 0.0
    for part in parts:
        for mom, rej, mx in part:
            total = total.merge(mom)
            rejected += rej
            peak = max(peak, mx)
    return total, rejected, peak
