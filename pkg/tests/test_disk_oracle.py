"""Per-mode transcendental resonances on the unit disk."""

import math

import mpmath as mp
import numpy as np
import pytest

from sabine_lab import disk_oracle as do
from sabine_lab.billiards import Model, PotentialSpec
from sabine_lab.errors import NewtonConditionError, SabineLabError, WindowMissError

mp.mp.dps = 40
POT1 = PotentialSpec(V0=1.0, alpha=0.0)


def independent_residual(candidate, pot):
    """Re-evaluate the mode equation with the extended-precision oracle."""
    prov = candidate.provenance
    h = mp.mpf(repr(candidate.h))
    z = mp.mpc(candidate.z)
    lam = z / h
    n = prov.n
    if prov.model is Model.DELTA:
        val = 1 - (mp.pi * h ** (-pot.alpha) * pot.V0 / (2j)) * \
            mp.besselj(n, lam) * mp.hankel1(n, lam)
    else:
        if n == 0:
            jp = -mp.besselj(1, lam)
            hp = -mp.hankel1(1, lam)
        else:
            jp = (mp.besselj(n - 1, lam) - mp.besselj(n + 1, lam)) / 2
            hp = (mp.hankel1(n - 1, lam) - mp.hankel1(n + 1, lam)) / 2
        val = 1 + (mp.pi * z * z * h ** (pot.alpha - 2) * pot.V0 / (2j)) * jp * hp
    return float(abs(val))


# ---------------------------------------------------------------------------
# newton_contract
# ---------------------------------------------------------------------------

def test_newton_contract_quadratic():
    res = do.newton_contract(lambda z: z * z - 1, lambda z: 2 * z,
                             1.05 + 0j, 0.1, a=abs(1.05**2 - 1), b=2.0, d=2.0)
    assert abs(res.root - 1.0) < 1e-12
    assert res.contraction < 1.0


def test_newton_contract_exponential():
    res = do.newton_contract(lambda z: np.exp(z) - 1, lambda z: np.exp(z),
                             0.05 + 0j, 0.1,
                             a=abs(np.exp(0.05) - 1), b=np.exp(-0.05), d=np.exp(0.15))
    assert abs(res.root) < 1e-12


def test_newton_contract_condition_guard():
    with pytest.raises(NewtonConditionError):
        do.newton_contract(lambda z: z, lambda z: 1.0, 0j, 0.1, a=5.0, b=1.0, d=1.0)


# ---------------------------------------------------------------------------
# delta model
# ---------------------------------------------------------------------------

def test_delta_resonance_reference_mode():
    cand = do.delta_resonance(0, 6, 0.05, POT1)
    target = 0.05 / 2 * (math.log(1 / 0.05) + math.log(2))
    assert abs(-cand.z.imag - target) <= 3 * 0.05**1.75
    assert cand.z.imag < 0
    assert cand.residual < 1e-10
    assert independent_residual(cand, POT1) < 1e-9
    # the root parks a quarter lattice spacing right of its anchor near 0.98
    assert 0.95 < cand.z.real < 1.06


def test_delta_law_small_h():
    for h, k in ((0.05, 6), (0.02, 16), (0.01, 32)):
        cand = do.delta_resonance(0, k, h, POT1)
        target = h / 2 * (math.log(1 / h) + math.log(2))
        assert abs(-cand.z.imag - target) <= 3 * h**1.75


def test_delta_root_locally_unique(rng):
    h = 0.05
    base = do.delta_resonance(0, 6, h, POT1).z
    f, fp = do.mode_equation(0, h, POT1, Model.DELTA)
    for _ in range(8):
        angle = rng.uniform(0, 2 * math.pi)
        start = base + (h / 100) * complex(math.cos(angle), math.sin(angle))
        res = do._certified_solve(f, fp, start, eps0=math.pi * h / 4)
        assert abs(res.root - base) < 1e-10


def test_delta_alpha_guard():
    with pytest.raises(ValueError):
        do.delta_resonance(0, 6, 0.05, PotentialSpec(V0=1.0, alpha=1.0))
    with pytest.raises(ValueError):
        do.delta_resonance(0, 6, 0.05,
                           PotentialSpec(V0=1.0, alpha=0.0, profile=lambda s: 1 + 0 * s))


def test_window_miss():
    with pytest.raises(WindowMissError):
        do.delta_resonance(0, 6, 0.05, POT1, window=(1.3, 1.5))


# ---------------------------------------------------------------------------
# delta-prime model
# ---------------------------------------------------------------------------

def test_delta_prime_reference_mode():
    pot = PotentialSpec(V0=1.0, alpha=0.9)
    cand = do.delta_prime_resonance(0, 32, 0.01, pot)
    assert cand.z.imag < 0
    assert cand.residual < 1e-10
    assert independent_residual(cand, pot) < 1e-9


def test_delta_prime_rate_approaches_inverse_square_amplitude():
    # -Im z / h^{3-2a} climbs monotonically toward 1/V0^2 = 1; at alpha = 0.8
    # it is within 30% by h = 0.005 (at alpha = 0.9 the o(1) term decays like
    # h^{0.2} and the 30% band is not reached at desk-scale h)
    for alpha, within_30pct in ((0.8, True), (0.9, False)):
        pot = PotentialSpec(V0=1.0, alpha=alpha)
        ratios = []
        for h in (0.02, 0.01, 0.005):
            k = round((4 / (math.pi * h) - 1) / 4)
            cand = do.delta_prime_resonance(0, k, h, pot)
            ratios.append(-cand.z.imag / h ** (3 - 2 * alpha))
        assert ratios[0] < ratios[1] < ratios[2] < 1.0
        assert (0.7 <= ratios[2] <= 1.3) == within_30pct


def test_delta_prime_alpha_guard():
    with pytest.raises(ValueError):
        do.delta_prime_resonance(0, 16, 0.02, PotentialSpec(V0=1.0, alpha=0.4))


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def test_mode_sweep_single_candidate_window():
    out = do.mode_sweep(0.05, POT1, Model.DELTA, 0, window=(0.9, 1.1))
    assert len(out) == 1
    prov = out[0].provenance
    assert (prov.n, prov.k) == (0, 6)


def test_mode_sweep_empty_window():
    assert do.mode_sweep(0.05, POT1, Model.DELTA, 3, window=(1.1, 1.1)) == []


def test_mode_sweep_sorted_and_deduplicated():
    out = do.mode_sweep(0.1, POT1, Model.DELTA, 9, window=(0.9, 1.1))
    res = [c.z.real for c in out]
    assert res == sorted(res)
    for a, b in zip(out, out[1:]):
        assert abs(a.z - b.z) >= 1e-8
    # ground-truth family set for this window (independent dense-scan oracle)
    assert [c.provenance.n for c in out] == [1, 7, 4, 2, 0]


def test_mode_sweep_n10_family_respects_diameter_bound():
    from sabine_lab.billiards import sabine_diameter_bound
    from sabine_lab.geometry import BoundaryCurve
    h = 0.02
    out = do.mode_sweep(h, POT1, Model.DELTA, 10, window=(0.9, 1.1))
    tens = [c for c in out if c.provenance.n == 10]
    assert tens
    line = sabine_diameter_bound(BoundaryCurve.circle(1.0), h, POT1)
    for c in tens:
        assert -c.z.imag / h <= line + 0.1


def test_mode_sweep_collects_failures_quietly(caplog):
    # near-glancing modes are skipped with a warning, never fatally
    out = do.mode_sweep(0.1, POT1, Model.DELTA, 12, window=(0.9, 1.1))
    assert [c.provenance.n for c in out] == [1, 7, 4, 2, 0]
