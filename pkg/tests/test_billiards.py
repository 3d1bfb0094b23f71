"""Billiard map, reflectivity averages and decay-rate bounds."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sabine_lab import billiards as bl
from sabine_lab.billiards import Model, PhasePoint, PotentialSpec
from sabine_lab.errors import (
    GlancingInputError,
    NoValidDiameterPairError,
    OrbitError,
)
from sabine_lab.geometry import BoundaryCurve

POT1 = PotentialSpec(V0=1.0, alpha=0.0)


def test_step_circle_diameter_orbit(unit_circle):
    seg = bl.billiard_step(unit_circle, PhasePoint(0.0, 0.0))
    assert abs(seg.end.s - math.pi) < 1e-12
    assert abs(seg.end.xi) < 1e-12
    assert abs(seg.chord_length - 2.0) < 1e-12


def test_step_circle_oblique(unit_circle):
    seg = bl.billiard_step(unit_circle, PhasePoint(0.0, 0.5))
    assert abs(seg.end.s - 2 * math.pi / 3) < 1e-12
    assert abs(seg.end.xi - 0.5) < 1e-12
    assert abs(seg.chord_length - math.sqrt(3)) < 1e-12


def test_step_ellipse_major_axis(ellipse21):
    seg = bl.billiard_step(ellipse21, PhasePoint(0.0, 0.0))
    assert abs(seg.end.s - ellipse21.total_length / 2) < 1e-9
    assert abs(seg.chord_length - 4.0) < 1e-12
    # brute-force ray-tracing oracle: the chord connects (2,0) to (-2,0)
    end = ellipse21.point_at(seg.end.s).position
    assert np.allclose(end, [-2, 0], atol=1e-9)


def test_iterate_chains_and_symmetry(unit_circle):
    segs = bl.iterate(unit_circle, PhasePoint(0.0, 0.0), 4)
    for a, b in zip(segs, segs[1:]):
        assert a.end == b.start
    s_values = [seg.end.s for seg in segs]
    for s, expect in zip(s_values, [math.pi, 0.0, math.pi, 0.0]):
        assert abs(math.sin(s)) < 1e-9 and abs(abs(math.cos(s)) - 1) < 1e-12
    segs = bl.iterate(unit_circle, PhasePoint(0.0, 0.5), 3)
    advance = 2 * math.pi / 3
    for k, seg in enumerate(segs, start=1):
        circ = abs((seg.end.s - k * advance + math.pi) % (2 * math.pi) - math.pi)
        assert circ < 1e-10
        assert abs(seg.end.xi - 0.5) < 1e-12


def test_iterate_near_glancing_survives(ellipse21):
    xi = math.sqrt(1 - 0.01**2)
    segs = bl.iterate(ellipse21, PhasePoint(0.3, xi), 50)
    radials = [math.sqrt(1 - seg.end.xi**2) for seg in segs]
    assert all(r < 0.05 for r in radials)


def test_glancing_input_rejected(unit_circle):
    with pytest.raises(GlancingInputError):
        bl.billiard_step(unit_circle, PhasePoint(0.0, 1.0 - 1e-12))
    with pytest.raises(OrbitError):
        bl.iterate(unit_circle, PhasePoint(0.0, 1.0 - 1e-11), 3)


def test_xi_conservation_long_orbit(unit_circle):
    q = PhasePoint(0.3, 0.4321)
    segs = bl.iterate(unit_circle, q, 10_000)
    drift = max(abs(seg.end.xi - q.xi) for seg in segs)
    assert drift < 1e-12


def test_generating_function_momenta(rng, ellipse21):
    # departure momentum = -d_x|x-y| . tangent(x); arrival = d_y|x-y| . tangent(y)
    for _ in range(50):
        q = PhasePoint(rng.uniform(0, ellipse21.total_length), rng.uniform(-0.9, 0.9))
        seg = bl.billiard_step(ellipse21, q)
        x = ellipse21.point_at(seg.start.s)
        y = ellipse21.point_at(seg.end.s)
        u = (y.position - x.position) / np.linalg.norm(y.position - x.position)
        assert abs(np.dot(u, x.unit_tangent) - seg.start.xi) < 1e-10
        assert abs(np.dot(u, y.unit_tangent) - seg.end.xi) < 1e-10


def test_reversibility(rng, ellipse21):
    for _ in range(50):
        q = PhasePoint(rng.uniform(0, ellipse21.total_length), rng.uniform(-0.9, 0.9))
        seg = bl.billiard_step(ellipse21, q)
        back = bl.billiard_step(ellipse21, PhasePoint(seg.end.s, -seg.end.xi))
        assert abs(back.end.s - q.s) < 1e-9 or \
            abs(back.end.s - q.s - ellipse21.total_length) < 1e-9 or \
            abs(back.end.s - q.s + ellipse21.total_length) < 1e-9
        assert abs(back.end.xi + q.xi) < 1e-9


def test_near_glancing_quadratic_drift(ellipse21):
    # |r(beta q) - r(q)| <= C r^2 with a stable constant over two decades
    s0 = 1.234
    constants = []
    for r in np.geomspace(1e-3, 1e-1, 9):
        xi = math.sqrt(1 - r * r)
        seg = bl.billiard_step(ellipse21, PhasePoint(s0, xi))
        r_next = math.sqrt(1 - seg.end.xi**2)
        constants.append(abs(r_next - r) / (r * r))
    assert max(constants) / min(constants) < 2.0


def test_chord_average(unit_circle, ellipse21):
    assert abs(bl.chord_average(unit_circle, PhasePoint(0, 0), 7) - 2.0) < 1e-12
    assert abs(bl.chord_average(unit_circle, PhasePoint(0, 0.5), 3) - math.sqrt(3)) < 1e-12
    assert abs(bl.chord_average(ellipse21, PhasePoint(0, 0), 2) - 4.0) < 1e-12


def test_reflect_delta_values():
    # h*sigma = 2 at normal incidence: R = 2/(2i-2) = -(1+i)/2
    r = bl.reflect_delta(PhasePoint(0, 0), 2.0, POT1)
    assert abs(r - (-(1 + 1j) / 2)) < 1e-15
    assert abs(abs(r) ** 2 - 0.5) < 1e-15
    # no barrier
    zero_pot = PotentialSpec(V0=1.0, alpha=0.0, profile=lambda s: np.zeros_like(np.asarray(s, float)))
    assert bl.reflect_delta(PhasePoint(0, 0), 1.0, zero_pot) == 0.0


def test_reflect_delta_glancing_limit():
    # |R_delta| -> 1 while |R_delta'| -> 0 as xi -> 1 at fixed strength
    vals_d, vals_p = [], []
    for xi in (0.9, 0.99, 0.999, 0.99999):
        vals_d.append(abs(bl.reflect_delta(PhasePoint(0, xi), 1.0, POT1)))
        vals_p.append(abs(bl.reflect_delta_prime(PhasePoint(0, xi), 0.2, POT1)))
    assert all(b > a for a, b in zip(vals_d, vals_d[1:]))
    assert vals_d[-1] > 0.999
    assert all(b < a for a, b in zip(vals_p, vals_p[1:]))
    assert vals_p[-1] < 2e-2


def test_reflect_delta_prime_values():
    # sigma = 2h at xi1 = 1: R = i/(i-1) = (1-i)/2
    r = bl.reflect_delta_prime(PhasePoint(0, 0), 0.5, POT1)
    assert abs(r - (1 - 1j) / 2) < 1e-15
    # perfect-barrier limit: sigma -> infinity gives R -> 1
    strong = PotentialSpec(V0=1e12, alpha=0.0)
    assert abs(bl.reflect_delta_prime(PhasePoint(0, 0), 1.0, strong) - 1.0) < 1e-10


@settings(max_examples=120, deadline=None)
@given(xi=st.floats(-0.999, 0.999), h=st.floats(1e-3, 2.0),
       v0=st.floats(1e-3, 1e3), alpha=st.floats(0.0, 0.95))
def test_reflection_moduli_below_one(xi, h, v0, alpha):
    pot = PotentialSpec(V0=v0, alpha=alpha)
    q = PhasePoint(0.0, xi)
    assert abs(bl.reflect_delta(q, h, pot)) < 1.0
    assert abs(bl.reflect_delta_prime(q, h, pot)) < 1.0


def test_log_reflectivity_average_circle(unit_circle):
    # constant strength: value independent of depth, equals log|R|
    for n in (1, 3, 5):
        val = bl.reflectivity_log_average(unit_circle, PhasePoint(0, 0), n, 2.0,
                                          POT1, Model.DELTA)
        assert abs(val - 0.5 * math.log(0.5)) < 1e-12


def test_log_reflectivity_sentinel(unit_circle):
    gap_profile = PotentialSpec(
        V0=1.0, alpha=0.0,
        profile=lambda s: np.where(np.abs(np.asarray(s) - math.pi) < 0.5, 0.0, 1.0))
    val = bl.reflectivity_log_average(unit_circle, PhasePoint(0, 0), 5, 2.0,
                                      gap_profile, Model.DELTA)
    assert val == -math.inf


def test_sabine_gap_circle_closed_form(unit_circle):
    report = bl.sabine_gap(unit_circle, 0.01, POT1, Model.DELTA)
    closed = math.log(1 + 4 / 0.01**2) / 4
    assert abs(report.bound - closed) <= 0.01 * closed
    assert abs(report.minimizer.xi) < 1e-12
    assert report.converged
    assert report.within_theory


def test_sabine_gap_delta_prime_closed_form(unit_circle):
    pot = PotentialSpec(V0=1.0, alpha=0.9)
    report = bl.sabine_gap(unit_circle, 0.01, pot, Model.DELTA_PRIME)
    closed = math.log(1 + 4 * 0.01**0.2) / 4
    assert abs(report.bound - closed) <= 0.01 * closed


def test_sabine_gap_rotation_invariance(unit_circle):
    # rotating a non-constant profile by a whole grid cell leaves the bound
    # unchanged on the rotationally symmetric circle
    n_s = 32
    shift = unit_circle.total_length / n_s

    def prof(s):
        return 1.0 + 0.5 * np.sin(np.asarray(s))

    def prof_shifted(s):
        return 1.0 + 0.5 * np.sin(np.asarray(s) - shift)

    kwargs = dict(delta1=0.05, n_average=4, grid=(n_s, 17))
    a = bl.sabine_gap(unit_circle, 0.05, PotentialSpec(1.0, 0.0, prof),
                      Model.DELTA, **kwargs)
    b = bl.sabine_gap(unit_circle, 0.05, PotentialSpec(1.0, 0.0, prof_shifted),
                      Model.DELTA, **kwargs)
    assert abs(a.bound - b.bound) < 1e-12


def test_sabine_gap_grid_validation(unit_circle):
    with pytest.raises(ValueError):
        bl.sabine_gap(unit_circle, 0.1, POT1, Model.DELTA, grid=(8, 8))
    with pytest.raises(ValueError):
        bl.sabine_gap(unit_circle, 0.1, POT1, Model.DELTA, delta1=1.5)


def test_sabine_gap_warns_for_large_alpha(unit_circle):
    with pytest.warns(UserWarning):
        bl.sabine_gap(unit_circle, 0.1, PotentialSpec(V0=1.0, alpha=0.7),
                      Model.DELTA, grid=(16, 16), n_average=2)


def test_sabine_gap_stadium_flagged(stadium11):
    report = bl.sabine_gap(stadium11, 0.1, POT1, Model.DELTA,
                           grid=(32, 17), n_average=4)
    assert not report.within_theory
    assert "outside-theorem" in report.notes


def test_diameter_bound_circle(unit_circle):
    bound = bl.sabine_diameter_bound(unit_circle, 0.01, POT1)
    assert abs(bound - 0.5 * (math.log(100) + math.log(2))) < 1e-12


def test_diameter_bound_ellipse(ellipse21):
    bound = bl.sabine_diameter_bound(ellipse21, 0.01, POT1)
    assert abs(bound - 0.25 * (math.log(100) + math.log(2))) < 1e-12


def test_diameter_bound_agrees_with_gap(unit_circle):
    gap = bl.sabine_gap(unit_circle, 0.01, POT1, Model.DELTA).bound
    diam = bl.sabine_diameter_bound(unit_circle, 0.01, POT1)
    assert abs(gap - diam) <= 1e-3 * diam
    assert abs(diam - 2.64916) < 5e-4


def test_diameter_bound_requires_support(unit_circle):
    dead = PotentialSpec(V0=1.0, alpha=0.0,
                         profile=lambda s: np.zeros_like(np.asarray(s, float)))
    with pytest.raises(NoValidDiameterPairError):
        bl.sabine_diameter_bound(unit_circle, 0.01, dead)
    with pytest.raises(ValueError):
        bl.sabine_diameter_bound(unit_circle, 0.01, PotentialSpec(V0=1.0, alpha=1.2))


def test_all_orbits_escape(unit_circle):
    dead = PotentialSpec(V0=1.0, alpha=0.0,
                         profile=lambda s: np.zeros_like(np.asarray(s, float)))
    with pytest.raises(bl.AllOrbitsEscapeError):
        bl.sabine_gap(unit_circle, 0.1, dead, Model.DELTA,
                      grid=(16, 16), n_average=2)


def test_potential_symbol_scaling():
    pot = PotentialSpec(V0=2.0, alpha=0.5)
    h = 0.04
    assert pot.symbol(0.0, h, Model.DELTA) == pytest.approx(2.0 * h**-0.5)
    assert pot.symbol(0.0, h, Model.DELTA_PRIME) == pytest.approx(2.0 * h**0.5)
