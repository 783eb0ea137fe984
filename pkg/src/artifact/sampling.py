"""Random 3-subspaces of R^n and projection of polylines onto them."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core_linalg import Frame3, orthonormalize
from .errors import DegenerateInput, InvalidInput, ShapeError
from .streams import STREAM_FRAMES, derive_seed, make_rng

MAX_FRAME_RETRIES = 8


@dataclass(frozen=True)
class FrameDistribution:
    """Law of the raw ``n x 3`` matrix before orthonormalisation.

    ``gaussian`` (standard normal entries) yields frames whose span is
    uniform on the Grassmannian; ``uniform`` draws entries from (-1, 1) and
    carries no such invariance.
    """

    kind: str = "gaussian"

    def __post_init__(self):
        if self.kind not in ("gaussian", "uniform"):
            raise InvalidInput(f"frame distribution must be gaussian or uniform, got {self.kind!r}")

    def draw(self, rng: np.random.Generator, shape) -> np.ndarray:
        if self.kind == "gaussian":
            return rng.standard_normal(shape)
        return rng.uniform(-1.0, 1.0, shape)


GAUSSIAN = FrameDistribution("gaussian")
UNIFORM = FrameDistribution("uniform")


def sample_frame(n: int, dist: FrameDistribution, stream: np.random.Generator) -> Frame3:
    """Draw an ``n x 3`` matrix from ``dist`` and Gram-Schmidt it.

    Degenerate draws are redrawn from the same stream, at most
    :data:`MAX_FRAME_RETRIES` times.
    """
    if n < 4:
        raise InvalidInput(f"ambient dimension must be >= 4, got {n}")
    for _ in range(MAX_FRAME_RETRIES):
        raw = dist.draw(stream, (3, n))
        try:
            return orthonormalize(raw)
        except DegenerateInput:
            continue
    raise DegenerateInput(f"{MAX_FRAME_RETRIES} consecutive degenerate frame draws")


def frame_seed(seed: int, index: int, attempt: int = 0) -> int:
    """64-bit seed of the frame used for sample ``index`` (and retry ``attempt``)."""
    return derive_seed(seed, STREAM_FRAMES, index, attempt)


def frame_for_sample(n: int, dist: FrameDistribution, seed: int, index: int,
                     attempt: int = 0) -> tuple[Frame3, int]:
    """Frame for sample ``index`` drawn from its own substream.

    Returns the frame and the 64-bit seed that regenerates it via
    ``sample_frame(n, dist, make_rng(fs))``.
    """
    fs = frame_seed(seed, index, attempt)
    return sample_frame(n, dist, make_rng(fs)), fs


def project_polyline(points, frame: Frame3) -> np.ndarray:
    """Coordinates ``F^T x`` of each point in the frame basis."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != frame.ambient_dim:
        raise ShapeError(f"points of shape {pts.shape} do not match frame dimension {frame.ambient_dim}")
    return pts @ frame.matrix
