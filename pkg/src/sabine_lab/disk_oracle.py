"""Exact resonances of the unit disk by per-mode transcendental solving.

Separation of variables reduces the disk problem to one transcendental
equation per angular mode n, built from products of Bessel and Hankel
functions at argument z/h.  Enumerating n >= 0 is complete: the equations
involve n only through J_n*H1_n products, which modes n and -n share.
Roots are located from lattice initial guesses (phase-corrected for higher
modes), pulled in by a damped Newton pre-pass when needed, and finished by
a certified contraction iteration that guarantees local uniqueness.
Serves as ground truth for the boundary-integral search.
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional, Union

from . import specfun
from .billiards import Model, PotentialSpec
from .errors import (
    NewtonConditionError,
    NewtonConvergenceError,
    RegionError,
    SabineLabError,
    WindowMissError,
)

logger = logging.getLogger(__name__)

_RESIDUAL_TOL = 1e-10
_DEDUP_TOL = 1e-8
DEFAULT_WINDOW = (0.5, 1.5)


@dataclass(frozen=True)
class ModeIndex:
    """Angular mode n and radial lattice index k."""

    n: int
    k: int


@dataclass(frozen=True)
class OracleProvenance:
    n: int
    k: int
    model: Model

    def describe(self) -> str:
        return f"oracle(n={self.n},k={self.k},{self.model.value})"


@dataclass(frozen=True)
class BieProvenance:
    sigma_min: float
    cond: float
    quad_n: int
    start: complex

    def describe(self) -> str:
        return f"bie(N={self.quad_n},sigma_min={self.sigma_min:.3e})"


@dataclass(frozen=True)
class ResonanceCandidate:
    """A located resonance in rescaled coordinates (z = h * lambda)."""

    z: complex
    h: float
    residual: float
    provenance: Union[OracleProvenance, BieProvenance]
    sabine_margin: Optional[float] = None


class NewtonResult(NamedTuple):
    root: complex
    residual: float
    contraction: float
    iterations: int


# ---------------------------------------------------------------------------
# certified contraction solve
# ---------------------------------------------------------------------------

def newton_contract(f: Callable, fprime: Callable, z0: complex, eps: float,
                    a: float, b: float, d: float, c: float = 0.9,
                    max_iter: int = 100) -> NewtonResult:
    """Root of f in |z - z0| <= eps, certified by the contraction bounds.

    Requires |f(z0)| <= a, |f'(z0)| >= b and sup |f''| <= d on the disk,
    with a + d*eps^2 < eps*b < c < 1.  Iterates the frozen-derivative map
    g(z) = z - f(z)/f'(z0), which is a contraction with factor d*eps/b.
    """
    if not (a + d * eps * eps < eps * b < c < 1.0):
        raise NewtonConditionError(
            f"contraction condition failed: a={a:.3e}, b={b:.3e}, d={d:.3e}, "
            f"eps={eps:.3e} (need a + d*eps^2 < eps*b < {c})"
        )
    dz0 = fprime(z0)
    tol = 1e-12 * b * eps
    z = z0
    fz = f(z)
    for it in range(1, max_iter + 1):
        z_next = z - fz / dz0
        step = abs(z_next - z)
        z = z_next
        fz = f(z)
        if abs(fz) < tol or step < 1e-17 * max(abs(z), 1.0):
            return NewtonResult(root=z, residual=abs(fz),
                                contraction=d * eps / b, iterations=it)
    raise NewtonConvergenceError(
        f"no convergence after {max_iter} iterations; final |f| = {abs(fz):.3e} "
        f"(bound estimates a={a:.3e}, b={b:.3e}, d={d:.3e} may be wrong)"
    )


def _damped_newton(f, fprime, z, max_iter=15, step_cap=None):
    """Plain Newton with |f|-monotone step damping; best-effort refiner.

    Steps are capped at step_cap (roots of the mode equations are lattice
    spaced, so larger moves would leave the basin) and trial points outside
    the validated region count as non-improving.
    """
    fz = f(z)
    for _ in range(max_iter):
        dfz = fprime(z)
        if dfz == 0:
            break
        step = fz / dfz
        if step_cap is not None and abs(step) > step_cap:
            step *= step_cap / abs(step)
        lam = 1.0
        for _ in range(30):
            z_try = z - lam * step
            try:
                f_try = f(z_try)
            except RegionError:
                lam *= 0.5
                continue
            if abs(f_try) < abs(fz):
                break
            lam *= 0.5
        else:
            break
        z, fz = z_try, f_try
        if abs(fz) < 1e-14:
            break
    return z


def _second_derivative_bound(f, center: complex, eps: float) -> float:
    """max |f''| over 8 samples of the eps-circle, by second differences."""
    delta = eps / 8.0
    worst = 0.0
    for j in range(8):
        w = center + eps * cmath.exp(2j * math.pi * j / 8.0)
        d2 = (f(w + delta) - 2.0 * f(w) + f(w - delta)) / (delta * delta)
        worst = max(worst, abs(d2))
    return worst


def _certified_solve(f, fprime, z0: complex, eps0: float) -> NewtonResult:
    """Certification with radius halving, rescued by a damped pre-pass."""

    def attempt(center, eps):
        a = abs(f(center))
        b = abs(fprime(center))
        for _ in range(7):
            d = _second_derivative_bound(f, center, eps)
            if a + d * eps * eps < eps * b < 0.9:
                return newton_contract(f, fprime, center, eps, a, b, d)
            eps *= 0.5
        raise NewtonConditionError(
            f"contraction condition failed after 6 radius halvings at {center}"
        )

    try:
        result = attempt(z0, eps0)
    except (NewtonConditionError, NewtonConvergenceError):
        refined = _damped_newton(f, fprime, z0, step_cap=2.0 * eps0)
        result = attempt(refined, eps0 / 4.0)
    # polish the certified root with fresh-derivative steps
    z = result.root
    for _ in range(3):
        dfz = fprime(z)
        if dfz == 0 or abs(f(z)) < 1e-14:
            break
        z = z - f(z) / dfz
    return NewtonResult(root=z, residual=abs(f(z)),
                        contraction=result.contraction, iterations=result.iterations)


# ---------------------------------------------------------------------------
# mode equations and lattice guesses
# ---------------------------------------------------------------------------

def mode_equation(n: int, h: float, pot: PotentialSpec, model: Model):
    """The per-mode transcendental function F and its derivative F'.

    delta:       F(z) = 1 - (pi h^-alpha V0 / 2i) J_n(z/h) H1_n(z/h)
    delta-prime: F(z) = 1 + (pi z^2 h^(alpha-2) V0 / 2i) J_n'(z/h) H1_n'(z/h)
    """
    if not pot.is_constant:
        raise ValueError("the disk oracle requires a constant potential profile")
    if model is Model.DELTA:
        # 1 - (pi x / 2i) J H = 1 + (i pi x / 2) J H
        coeff = 0.5j * math.pi * h ** (-pot.alpha) * pot.V0

        def f(z: complex) -> complex:
            ev = specfun.bessel_quad(n, z / h)
            return 1.0 + coeff * ev.J * ev.H1

        def fp(z: complex) -> complex:
            ev = specfun.bessel_quad(n, z / h)
            return coeff * (ev.Jp * ev.H1 + ev.J * ev.H1p) / h

        return f, fp

    # 1 + (pi x / 2i) z^2 J' H' = 1 - (i pi x / 2) z^2 J' H'
    coeff = -0.5j * math.pi * h ** (pot.alpha - 2.0) * pot.V0

    def f_prime_model(z: complex) -> complex:
        ev = specfun.bessel_quad(n, z / h)
        return 1.0 + coeff * z * z * ev.Jp * ev.H1p

    def fp_prime_model(z: complex) -> complex:
        lam = z / h
        ev = specfun.bessel_quad(n, lam)
        # second derivatives from the Bessel ODE y'' = -y'/x + (n^2/x^2 - 1) y
        jpp = -ev.Jp / lam + (n * n / (lam * lam) - 1.0) * ev.J
        hpp = -ev.H1p / lam + (n * n / (lam * lam) - 1.0) * ev.H1
        return coeff * (2.0 * z * ev.Jp * ev.H1p
                        + z * z * (jpp * ev.H1p + ev.Jp * hpp) / h)

    return f_prime_model, fp_prime_model


def _phase(lam: float, n: int) -> float:
    """Oscillation phase of J_n H1_n along the real axis (Debye regime)."""
    root = math.sqrt(lam * lam - n * n)
    if n == 0:
        return 2.0 * lam - 0.5 * math.pi
    return 2.0 * root - 2.0 * n * math.acos(n / lam) - 0.5 * math.pi


def _anchor_lambda(n: int, k: int) -> float:
    """Real frequency where the mode-n phase completes k full turns.

    For n = 0 this is the closed-form lattice pi(4k + 2n + 1)/4; for n >= 1
    the same winding condition is solved on the phase with its tangential
    shift, which keeps the guesses usable up to moderately glancing modes.
    """
    target = 2.0 * math.pi * k
    if n == 0:
        return math.pi * (4 * k + 1) / 4.0
    lam = max(math.pi * (4 * k + 2 * n + 1) / 4.0, n * 1.02 + 0.5)
    for _ in range(60):
        g = _phase(lam, n) - target
        gp = 2.0 * math.sqrt(lam * lam - n * n) / lam
        step = g / gp
        lam_new = max(lam - step, n * (1.0 + 1e-9))
        if abs(lam_new - lam) < 1e-14 * lam:
            lam = lam_new
            break
        lam = lam_new
    return lam


def mode_guess(n: int, k: int, h: float, pot: PotentialSpec, model: Model) -> complex:
    """Initial guess z0 = h*(anchor + displacement) for the (n, k) root.

    The displacement solves the leading asymptotic model of the mode
    equation: e^{i Phi} = B with B = 2i*lam*xi1*h^alpha/V0 - 1 (delta) or
    B = 1 + 2i/(lam*xi1*h^alpha*V0) (delta-prime); for n = 0 this reduces
    to the -i(h/2)log(...) lattice formula.
    """
    lam = _anchor_lambda(n, k)
    if lam <= n * (1.0 + 1e-9):
        raise WindowMissError(f"mode (n={n}, k={k}) anchors at glancing")
    xi1 = math.sqrt(max(1e-300, 1.0 - (n / lam) ** 2))
    if model is Model.DELTA:
        big_b = 2j * lam * xi1 * h ** pot.alpha / pot.V0 - 1.0
    else:
        big_b = 1.0 + 2j * h ** (-pot.alpha) / (lam * xi1 * pot.V0)
    displacement = -1j * cmath.log(big_b) / (2.0 * xi1)
    return h * (lam + displacement)


def _solve_mode(n: int, k: int, h: float, pot: PotentialSpec, model: Model,
                window) -> ResonanceCandidate:
    lo, hi = window
    anchor = h * _anchor_lambda(n, k)
    if not (lo <= anchor <= hi):
        raise WindowMissError(
            f"mode (n={n}, k={k}) anchor Re z = {anchor:.6f} outside window "
            f"[{lo}, {hi}]"
        )
    z0 = mode_guess(n, k, h, pot, model)
    f, fp = mode_equation(n, h, pot, model)
    result = _certified_solve(f, fp, z0, eps0=math.pi * h / 4.0)
    z = result.root
    if result.residual >= _RESIDUAL_TOL:
        raise NewtonConvergenceError(
            f"mode (n={n}, k={k}) residual {result.residual:.3e} above {_RESIDUAL_TOL}"
        )
    if z.imag >= 0.0:
        raise NewtonConvergenceError(
            f"mode (n={n}, k={k}) converged to nonnegative Im z = {z.imag:.3e}"
        )
    return ResonanceCandidate(
        z=z, h=h, residual=result.residual,
        provenance=OracleProvenance(n=n, k=k, model=model),
    )


def delta_resonance(n: int, k: int, h: float, pot: PotentialSpec,
                    window=DEFAULT_WINDOW) -> ResonanceCandidate:
    """Resonance of the delta barrier for mode (n, k); requires alpha < 1."""
    if pot.alpha >= 1.0:
        raise ValueError("delta-barrier oracle requires alpha < 1")
    return _solve_mode(n, k, h, pot, Model.DELTA, window)


def delta_prime_resonance(n: int, k: int, h: float, pot: PotentialSpec,
                          window=DEFAULT_WINDOW) -> ResonanceCandidate:
    """Resonance of the delta-prime barrier for mode (n, k); alpha > 1/2."""
    if pot.alpha <= 0.5:
        raise ValueError("delta-prime oracle requires alpha > 1/2")
    return _solve_mode(n, k, h, pot, Model.DELTA_PRIME, window)


# ---------------------------------------------------------------------------
# sweeps
# ---------------------------------------------------------------------------

def mode_sweep(h: float, pot: PotentialSpec, model: Model, n_max: int,
               window=DEFAULT_WINDOW) -> list[ResonanceCandidate]:
    """All per-mode resonances whose roots land in the window.

    Lattice anchors are enumerated over the window widened by two spacings
    (roots sit about a quarter spacing right of their anchors and shift
    further for higher modes), then filtered by the solved root's real part.
    Per-mode failures are logged and skipped, never fatal.
    """
    lo, hi = window
    if hi <= lo:
        return []
    margin = 2.0 * math.pi * h
    lam_lo = max((lo - margin) / h, 1e-6)
    lam_hi = (hi + margin) / h
    out: list[ResonanceCandidate] = []
    for n in range(n_max + 1):
        if n >= 0.995 * lam_hi:
            logger.warning("mode n=%d is glancing/elliptic for the window; skipped", n)
            continue
        lam_start = max(lam_lo, n * 1.005 + 1e-9)
        k_lo = max(0, math.ceil(_phase(lam_start, n) / (2.0 * math.pi)))
        k_hi = math.floor(_phase(lam_hi, n) / (2.0 * math.pi))
        for k in range(k_lo, k_hi + 1):
            try:
                cand = _solve_mode(n, k, h, pot, model,
                                   window=(lo - margin, hi + margin))
            except SabineLabError as exc:
                logger.warning("mode (n=%d, k=%d) failed: %s", n, k, exc)
                continue
            if lo <= cand.z.real <= hi:
                out.append(cand)
    out.sort(key=lambda c: (c.z.real, c.provenance.n))
    deduped: list[ResonanceCandidate] = []
    for cand in out:
        if any(abs(cand.z - kept.z) < _DEDUP_TOL for kept in deduped):
            continue
        deduped.append(cand)
    return deduped
