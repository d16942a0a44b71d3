from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gkplitho.exceptions import DomainError
from gkplitho.ideal_code import (
    ideal_spike_lattice, momentum_error_regions, position_error_regions, recover_momentum,
    recover_position,
)

PI = math.pi


def test_lattice_zero_position():
    lat = ideal_spike_lattice("0", "position", 1 / 8)
    assert (lat.period, lat.offset, lat.alternating) == (0.25, 0.0, False)
    assert lat.stabilizers == (0.25, 16 * PI)
    assert lat.logical_z == pytest.approx(8 * PI)
    assert lat.logical_x == 1 / 8


def test_lattice_minus_momentum():
    lat = ideal_spike_lattice("-", "momentum", 1 / 8)
    assert lat.period == pytest.approx(16 * PI)
    assert lat.offset == pytest.approx(8 * PI)


def test_lattice_one_is_zero_shifted():
    theta = 0.3
    one = ideal_spike_lattice("1", "position", theta)
    shifted = ideal_spike_lattice("0", "position", theta).shifted(theta)
    assert (one.period, one.offset, one.alternating) == (shifted.period, shifted.offset, shifted.alternating)


def test_plus_minus_position_structure():
    theta = 1 / 8
    zero = ideal_spike_lattice("0", "position", theta)
    one = ideal_spike_lattice("1", "position", theta)
    plus = ideal_spike_lattice("+", "position", theta)
    minus = ideal_spike_lattice("-", "position", theta)
    union = np.sort(np.concatenate([zero.points(-3, 3)[0], one.points(-3, 3)[0]]))
    pts, signs = plus.points(-6, 7)
    assert np.allclose(pts, union)
    assert np.all(signs == 1)
    mpts, msigns = minus.points(-6, 7)
    assert np.allclose(mpts, union)
    # even spikes belong to |0>, odd ones to |1> with a minus sign
    assert np.all(msigns == np.where(np.arange(-6, 8) % 2 == 0, 1, -1))


def test_momentum_combs():
    zero = ideal_spike_lattice("0", "momentum")
    one = ideal_spike_lattice("1", "momentum")
    plus = ideal_spike_lattice("+", "momentum")
    assert zero.period == one.period == pytest.approx(8 * PI)
    assert one.alternating and not zero.alternating
    assert plus.period == pytest.approx(16 * PI) and plus.offset == 0


@pytest.mark.parametrize("label,space", [("2", "position"), ("0", "phase")])
def test_lattice_bad_inputs(label, space):
    with pytest.raises(DomainError):
        ideal_spike_lattice(label, space)


def test_recover_position_examples():
    r = recover_position(PI / 4 + 0.05)
    assert r.corrected == pytest.approx(PI / 4) and r.correctable and not r.boundary
    r = recover_position(PI / 4 + PI / 8 + 0.01)
    assert r.corrected == pytest.approx(PI / 2) and r.index == 2
    r = recover_position(3 * PI / 8)
    assert r.boundary and not r.correctable and r.corrected == pytest.approx(PI / 4)


def test_recover_momentum_examples():
    r = recover_momentum(8 * PI + 1.0)
    assert r.corrected == pytest.approx(8 * PI) and r.correctable
    assert r.shift == pytest.approx(1.0)
    r = recover_momentum(0.0)
    assert r.corrected == 0.0 and r.shift == 0.0 and r.correctable
    r = recover_momentum(4 * PI)
    assert r.boundary and r.index == 0 and not r.correctable


@settings(max_examples=200, deadline=None)
@given(y=st.floats(min_value=-1e3, max_value=1e3, allow_nan=False),
       theta=st.floats(min_value=0.01, max_value=2.0))
def test_recovery_idempotent(y, theta):
    once = recover_position(y, theta)
    twice = recover_position(once.corrected, theta)
    assert twice.corrected == pytest.approx(once.corrected, abs=1e-9)
    assert twice.shift == pytest.approx(0.0, abs=1e-9)
    m1 = recover_momentum(y, theta)
    assert recover_momentum(m1.corrected, theta).corrected == pytest.approx(m1.corrected, abs=1e-9)


def test_position_regions_d1():
    r = position_error_regions(1)
    assert len(r) == 2
    assert np.allclose(r.lo, [3 * PI / 8, 7 * PI / 8])
    assert np.allclose(r.hi, [5 * PI / 8, PI])


@pytest.mark.parametrize("d", [1, 2, 4, 20])
def test_position_regions_structure(d):
    r = position_error_regions(d)
    assert len(r) == 2 * d
    assert r.total_measure == pytest.approx((4 * d - 1) * PI / 8)
    lo, hi = np.array(r.lo), np.array(r.hi)
    assert np.all(lo[1:] >= hi[:-1])
    centres = (lo[:-1] + hi[:-1]) / 2
    assert np.allclose(centres, np.arange(1, 2 * d) * PI / 2)
    assert np.allclose(hi[:-1] - lo[:-1], PI / 4)


def test_position_regions_left_edge_extension():
    r = position_error_regions(2, include_left_edge=True)
    assert len(r) == 5 and r.lo[0] == 0.0 and r.hi[0] == pytest.approx(PI / 8)


def test_momentum_regions_examples():
    m0 = momentum_error_regions("-", 0)
    assert np.allclose([m0.lo[0], m0.hi[0]], [-4 * PI, 4 * PI])
    p1 = momentum_error_regions("+", 1)
    assert np.allclose(p1.lo, [-12 * PI, 4 * PI, 20 * PI])
    assert np.allclose(p1.hi, [-4 * PI, 12 * PI, 28 * PI])


def test_momentum_regions_tile_axis():
    plus = momentum_error_regions("+", 5)
    minus = momentum_error_regions("-", 5)
    p = np.linspace(-80 * PI, 80 * PI, 20001)
    inside_p, inside_m = plus.contains(p), minus.contains(p)
    assert not np.any(inside_p & inside_m)
    assert np.all(inside_p | inside_m)


def test_regions_half_open():
    r = position_error_regions(2)
    assert r.contains([3 * PI / 8])[0]
    assert not r.contains([5 * PI / 8])[0]


def test_region_recovery_duality():
    """A point in a |0~> error region snaps onto the |1~> lattice (even multiples of pi/4)."""
    d = 20
    regions = position_error_regions(d)
    rng = np.random.default_rng(11)
    y = rng.uniform(PI / 8, PI * d, 10_000)
    in_region = regions.contains(y)
    to_one = np.array([recover_position(v).index % 2 == 0 for v in y])
    assert np.array_equal(in_region, to_one)
