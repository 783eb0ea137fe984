import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from artifact.bounds import lk2_bound_report
from artifact.curves import (FourierSpec, PetalSpec, orthogonal_fourier_pair, petal_link_pair,
                             planar_circle)
from artifact.errors import InvalidInput, InvalidSpec, TooManyRejections
from artifact.mc_engine import MCSpec, lk2_mc, lk2_mc_run, lk2_sampled, mc_integrate
from artifact.stats import Moments, accumulate_blocks, block_sizes
from conftest import DRAWS

UNIT2 = [(0.0, 1.0), (0.0, 1.0)]


# -- streaming moments ----------------------------------------------------------------

@settings(max_examples=DRAWS)
@given(st.integers(0, 2**32 - 1), st.integers(1, 200), st.integers(1, 200))
def test_moment_merge_matches_direct(seed, n1, n2):
    x = np.random.default_rng(seed).standard_cauchy(n1 + n2)
    merged = Moments.of(x[:n1]).merge(Moments.of(x[n1:]))
    direct = Moments.of(x)
    assert merged.n == direct.n
    assert merged.mean == pytest.approx(direct.mean, rel=1e-9, abs=1e-9)
    assert merged.m2 == pytest.approx(direct.m2, rel=1e-9)


def test_block_sizes():
    assert block_sizes(10, 4) == [4, 4, 2]
    assert block_sizes(8, 4) == [4, 4]
    assert sum(block_sizes(1_000_001)) == 1_000_001


def test_accumulate_counts_rejections():
    def ev(b, size):
        v = np.arange(size, dtype=float)
        v[::10] = np.nan
        return v

    mom, rej, peak = accumulate_blocks(100, ev, block=25)
    assert rej == 12 and mom.n == 88 and peak == 24.0


# -- generic integration -----------------------------------------------------------------

def test_constant_integrand():
    est = mc_integrate(lambda x: np.full(len(x), 3.0), UNIT2, MCSpec(10_000))
    assert est.mean == 3.0 and est.stderr == 0.0
    assert est.n_used == 10_000 and est.n_rejected == 0


def test_product_integrand():
    est = mc_integrate(lambda x: x[:, 0] * x[:, 1], UNIT2, MCSpec(1_000_000, seed=4))
    assert abs(est.mean - 0.25) < 4 * est.stderr


def test_box_volume_scaling():
    est = mc_integrate(lambda x: np.ones(len(x)), [(0, 2), (-1, 2), (0, math.pi)], MCSpec(1000))
    assert est.mean == pytest.approx(6 * math.pi)


def test_clt_scaling():
    def f(x):
        return np.sin(5 * x[:, 0]) + x[:, 1] ** 2

    small = np.mean([mc_integrate(f, UNIT2, MCSpec(20_000, seed=s)).stderr for s in range(10)])
    large = np.mean([mc_integrate(f, UNIT2, MCSpec(80_000, seed=100 + s)).stderr for s in range(10)])
    assert large / small == pytest.approx(0.5, rel=0.2)


def test_rejections_counted_and_capped():
    def f(x):
        return np.where(x[:, 0] < 0.05, np.nan, 1.0)

    est = mc_integrate(f, UNIT2, MCSpec(100_000))
    assert est.n_used + est.n_rejected == 100_000
    assert 0.04 < est.rejection_rate < 0.06
    assert est.mean == 1.0
    with pytest.raises(TooManyRejections):
        mc_integrate(lambda x: np.where(x[:, 0] < 0.2, np.nan, 1.0), UNIT2, MCSpec(10_000))


def test_spec_validation():
    with pytest.raises(InvalidInput):
        MCSpec(999)
    with pytest.raises(InvalidInput):
        MCSpec(chunks=0)
    with pytest.raises(InvalidInput):
        MCSpec(guard=-1.0)
    with pytest.raises(InvalidInput):
        MCSpec(seed=-1)
    with pytest.raises(InvalidInput):
        mc_integrate(lambda x: x[:, 0], [(1.0, 0.0)], MCSpec(1000))


@pytest.mark.parametrize("chunks,threads", [(4, 1), (16, 1), (4, 4)])
def test_chunk_and_thread_invariance(chunks, threads):
    def f(x):
        return np.exp(x[:, 0]) * np.cos(x[:, 1])

    base = mc_integrate(f, UNIT2, MCSpec(300_000, seed=9))
    other = mc_integrate(f, UNIT2, MCSpec(300_000, seed=9, chunks=chunks, threads=threads))
    assert base == other


# -- second-moment estimators ---------------------------------------------------------

def test_lk2_mc_deterministic_and_chunk_invariant():
    r1, r2 = petal_link_pair(PetalSpec(3, 1.0))
    a = lk2_mc(r1, r2, MCSpec(100_000, seed=2))
    b = lk2_mc(r1, r2, MCSpec(100_000, seed=2, chunks=16))
    assert a == b
    assert a.mean > 0 and a.n_used + a.n_rejected == 100_000


def test_lk2_mc_far_circles_vanish():
    c1 = planar_circle([0, 0, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0])
    c2 = planar_circle([0, 0, 50, 0], [1, 0, 0, 0], [0, 0, 0, 1])
    est = lk2_mc(c1, c2, MCSpec(50_000, seed=1))
    assert abs(est.mean) < 1e-4


def test_lk2_mc_below_bound_on_orthogonal_pair():
    r1, r2 = orthogonal_fourier_pair(FourierSpec((1, 1)), FourierSpec((1, 1)))
    est = lk2_mc(r1, r2, MCSpec(200_000, seed=3))
    bound = lk2_bound_report(r1, r2, MCSpec(100_000, seed=5)).bound_value
    assert est.mean - 3 * est.stderr <= bound


def test_degenerate_second_curve_rejected():
    with pytest.raises(InvalidSpec):
        FourierSpec((1.0, 0.0))


def test_lk2_sampled_far_circles_vanish():
    c1 = planar_circle([0, 0, 0, 0], [1, 0, 0, 0], [0, 1, 0, 0])
    c2 = planar_circle([0, 0, 50, 0], [1, 0, 0, 0], [0, 0, 0, 1])
    res = lk2_sampled(c1, c2, 500, segments=16, seed=3)
    assert res.estimate.mean < 1e-12
    assert res.non_integer == 0


def test_lk2_sampled_bookkeeping():
    r1, r2 = petal_link_pair(PetalSpec(3, 1.0))
    res = lk2_sampled(r1, r2, 600, segments=32, seed=8)
    assert res.linking.shape == res.frame_seeds.shape == (600,)
    assert res.frame_seeds.dtype == np.uint64
    assert res.estimate.mean == pytest.approx(res.mean**2 + res.variance, rel=1e-12)
    assert res.min_turning >= 2 * math.pi - 1e-9
    again = lk2_sampled(r1, r2, 600, segments=32, seed=8, threads=3)
    np.testing.assert_array_equal(res.linking, again.linking)
    assert res.estimate == again.estimate
    with pytest.raises(InvalidInput):
        lk2_sampled(r1, r2, 10, segments=4)


def test_small_estimator_agreement():
    r1, r2 = petal_link_pair(PetalSpec(3, 1.0))
    mc = lk2_mc_run(r1, r2, MCSpec(200_000, seed=1)).estimate
    sampled = lk2_sampled(r1, r2, 2000, segments=64, seed=1).estimate
    assert abs(mc.mean - sampled.mean) <= 3 * math.hypot(mc.stderr, sampled.stderr)
