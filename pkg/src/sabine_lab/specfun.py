"""Complex-argument Bessel and Hankel functions of integer order.

Self-contained evaluator tuned for the resonance strip: arguments with
Re z in (0, 2000] and |Im z| <= 50.  Regime switching:

* |z| <= 14: Maclaurin series for J0/J1 and the log-series for Y0/Y1,
  accumulated in double-double arithmetic to absorb the cancellation of the
  alternating sums.
* |z| > 14: large-argument Hankel expansions for orders 0 and 1, truncated
  at the first non-decreasing term.
* higher orders: forward recurrence for H (dominant solution), forward
  recurrence for J while n stays well below |z|, and Miller-type backward
  recurrence normalized against the order-0/1 values otherwise.

Everything here is stateless and pure.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import RecurrenceBudgetError, RegionError, ZeroArgumentError

# Validated argument region (resonance strip plus margin).
REGION_RE_MAX = 2000.0
REGION_IM_MAX = 50.0

# scalar switch: below this the double-double series runs; above it the
# large-argument expansion truncates at ~e^{-2|z|} <= 6e-16
_SERIES_RADIUS = 17.5
_VEC_SERIES_RADIUS = 12.0    # vectorized switch (plain-double series below)

# Euler-Mascheroni constant as a double-double pair.
_GAMMA_HI = 0.5772156649015329
_GAMMA_LO = -4.942915152430645e-18


# ---------------------------------------------------------------------------
# double-double scalar kernel (error-free transforms, Dekker splitting)
# ---------------------------------------------------------------------------

_SPLIT = 134217729.0  # 2**27 + 1


def _two_sum(a: float, b: float):
    s = a + b
    bb = s - a
    return s, (a - (s - bb)) + (b - bb)


def _two_prod(a: float, b: float):
    p = a * b
    ta = _SPLIT * a
    ah = ta - (ta - a)
    al = a - ah
    tb = _SPLIT * b
    bh = tb - (tb - b)
    bl = b - bh
    return p, ((ah * bh - p) + ah * bl + al * bh) + al * bl


def _dd_add(xh, xl, yh, yl):
    s, e = _two_sum(xh, yh)
    e += xl + yl
    return _two_sum(s, e)


def _dd_mul(xh, xl, yh, yl):
    p, e = _two_prod(xh, yh)
    e += xh * yl + xl * yh
    return _two_sum(p, e)


def _dd_div_real(xh, xl, d):
    q1 = xh / d
    ph, pl = _two_prod(q1, d)
    rh, rl = _dd_add(xh, xl, -ph, -pl)
    return _two_sum(q1, (rh + rl) / d)


# complex double-double = (re_hi, re_lo, im_hi, im_lo)

def _cdd(z: complex):
    return (z.real, 0.0, z.imag, 0.0)


def _cdd_to_complex(a):
    return complex(a[0] + a[1], a[2] + a[3])


def _cdd_add(a, b):
    rh, rl = _dd_add(a[0], a[1], b[0], b[1])
    ih, il = _dd_add(a[2], a[3], b[2], b[3])
    return (rh, rl, ih, il)


def _cdd_mul(a, b):
    ach, acl = _dd_mul(a[0], a[1], b[0], b[1])
    bdh, bdl = _dd_mul(a[2], a[3], b[2], b[3])
    adh, adl = _dd_mul(a[0], a[1], b[2], b[3])
    bch, bcl = _dd_mul(a[2], a[3], b[0], b[1])
    rh, rl = _dd_add(ach, acl, -bdh, -bdl)
    ih, il = _dd_add(adh, adl, bch, bcl)
    return (rh, rl, ih, il)


def _cdd_div_real(a, d):
    rh, rl = _dd_div_real(a[0], a[1], d)
    ih, il = _dd_div_real(a[2], a[3], d)
    return (rh, rl, ih, il)


def _cdd_mul_dd_real(a, dh, dl):
    rh, rl = _dd_mul(a[0], a[1], dh, dl)
    ih, il = _dd_mul(a[2], a[3], dh, dl)
    return (rh, rl, ih, il)


def _cdd_abs_hi(a) -> float:
    return math.hypot(a[0], a[2])


def _cdd_neg(a):
    return (-a[0], -a[1], -a[2], -a[3])


def _cdd_recip(z: complex):
    """1/z as complex double-double (one Newton correction)."""
    r0 = _cdd(1.0 / z)
    zr = _cdd_mul(_cdd(z), r0)
    correction = _cdd_add((2.0, 0.0, 0.0, 0.0), _cdd_neg(zr))
    return _cdd_mul(r0, correction)


# ---------------------------------------------------------------------------
# small-argument series (scalar, double-double)
# ---------------------------------------------------------------------------

def _series_j01(z: complex):
    """J0(z) and J1(z) by Maclaurin series in double-double arithmetic."""
    zdd = _cdd(z)
    z2 = _cdd_mul(zdd, zdd)
    w = _cdd_div_real((-z2[0], -z2[1], -z2[2], -z2[3]), 4.0)  # -z^2/4

    def sum_series(n: int):
        term = (1.0, 0.0, 0.0, 0.0)
        total = term
        for m in range(1, 90):
            term = _cdd_div_real(_cdd_mul(term, w), float(m * (m + n)))
            total = _cdd_add(total, term)
            if _cdd_abs_hi(term) < 1e-35 * (_cdd_abs_hi(total) + 1e-300):
                break
        return total

    s0 = sum_series(0)
    s1 = _cdd_mul(sum_series(1), _cdd_div_real(zdd, 2.0))
    return s0, s1  # still in cdd form


def _series_y01(z: complex, j0dd, j1dd):
    """Y0(z), Y1(z) by the log-series, reusing the cdd J0/J1 sums."""
    zdd = _cdd(z)
    z2 = _cdd_mul(zdd, zdd)
    x = _cdd_div_real(z2, 4.0)            # z^2/4
    mx = (-x[0], -x[1], -x[2], -x[3])     # -z^2/4

    # S0 = sum_{k>=1} (-1)^{k+1} H_k x^k / (k!)^2 = -sum_{k>=1} H_k b_k,
    # b_k = (-x)^k/(k!)^2
    b = (1.0, 0.0, 0.0, 0.0)
    hh, hl = 0.0, 0.0
    s0 = (0.0, 0.0, 0.0, 0.0)
    for k in range(1, 90):
        b = _cdd_div_real(_cdd_mul(b, mx), float(k * k))
        rh, rl = _dd_div_real(1.0, 0.0, float(k))
        hh, hl = _dd_add(hh, hl, rh, rl)
        s0 = _cdd_add(s0, _cdd_mul_dd_real(b, -hh, -hl))
        if _cdd_abs_hi(b) * hh < 1e-35 * (_cdd_abs_hi(s0) + 1e-300):
            break

    # S1 = sum_{k>=0} (H_k + H_{k+1}) (-x)^k / (k!(k+1)!)
    b = (1.0, 0.0, 0.0, 0.0)   # (-x)^k/(k!(k+1)!) at k=0
    hh, hl = 0.0, 0.0          # H_k
    gh, gl = 1.0, 0.0          # H_{k+1}
    s1 = _cdd_mul_dd_real(b, *_dd_add(hh, hl, gh, gl))
    for k in range(1, 90):
        b = _cdd_div_real(_cdd_mul(b, mx), float(k * (k + 1)))
        hh, hl = gh, gl
        rh, rl = _dd_div_real(1.0, 0.0, float(k + 1))
        gh, gl = _dd_add(gh, gl, rh, rl)
        th, tl = _dd_add(hh, hl, gh, gl)
        s1 = _cdd_add(s1, _cdd_mul_dd_real(b, th, tl))
        if _cdd_abs_hi(b) * th < 1e-35 * (_cdd_abs_hi(s1) + 1e-300):
            break

    log_term = cmath.log(z / 2.0)
    ldd = _cdd_add(_cdd(log_term), (_GAMMA_HI, _GAMMA_LO, 0.0, 0.0))

    two_over_pi = 2.0 / math.pi
    y0 = _cdd_add(_cdd_mul(ldd, j0dd), s0)
    y0c = two_over_pi * _cdd_to_complex(y0)

    y1 = _cdd_mul(ldd, j1dd)
    y1c = (two_over_pi * _cdd_to_complex(y1)
           - 2.0 / (math.pi * z)
           - z / (2.0 * math.pi) * _cdd_to_complex(s1))
    return y0c, y1c


# ---------------------------------------------------------------------------
# large-argument Hankel expansion (orders 0 and 1)
# ---------------------------------------------------------------------------

def _hankel_asymptotic(n: int, z: complex, kind: int) -> complex:
    mu = 4.0 * n * n
    pref = cmath.sqrt(2.0 / (math.pi * z))
    rot = 1j if kind == 1 else -1j
    phase = cmath.exp(rot * (z - (0.5 * n + 0.25) * math.pi))
    s = 1.0 + 0.0j
    term = 1.0 + 0.0j
    prev = 1.0
    for k in range(1, 60):
        term = term * rot * ((mu - (2 * k - 1) ** 2) / (8.0 * k)) / z
        mag = abs(term)
        if mag >= prev:
            break
        s += term
        prev = mag
        if mag < 1e-18 * abs(s):
            break
    return pref * phase * s


# ---------------------------------------------------------------------------
# base quadruple and rows
# ---------------------------------------------------------------------------

def _check_region(z: complex, allow_zero: bool = False) -> complex:
    z = complex(z)
    if z == 0:
        if allow_zero:
            return z
        raise ZeroArgumentError("Hankel functions are singular at z = 0")
    if not (0.0 < z.real <= REGION_RE_MAX) or abs(z.imag) > REGION_IM_MAX:
        raise RegionError(
            f"argument {z} outside validated region "
            f"Re z in (0, {REGION_RE_MAX}], |Im z| <= {REGION_IM_MAX}"
        )
    return z


def _base_quad(z: complex):
    """(J0, J1, H0, H1) at z, regime-switched."""
    if abs(z) <= _SERIES_RADIUS:
        j0dd, j1dd = _series_j01(z)
        y0, y1 = _series_y01(z, j0dd, j1dd)
        j0 = _cdd_to_complex(j0dd)
        j1 = _cdd_to_complex(j1dd)
        return j0, j1, j0 + 1j * y0, j1 + 1j * y1
    h0 = _hankel_asymptotic(0, z, 1)
    h1 = _hankel_asymptotic(1, z, 1)
    h0b = _hankel_asymptotic(0, z, 2)
    h1b = _hankel_asymptotic(1, z, 2)
    return 0.5 * (h0 + h0b), 0.5 * (h1 + h1b), h0, h1


def _upward_recurrence(n_top: int, z: complex, v0: complex, v1: complex):
    """Three-term recurrence upward in the order, in double-double.

    Rounding noise in a plain-double recurrence random-walks to ~sqrt(n)*eps
    and gets amplified by e^{2|Im z|} in Wronskian-type combinations; the
    double-double pass keeps the per-step noise at eps^2 for negligible cost.
    """
    row = [v0, v1]
    inv_z = _cdd_recip(z)
    prev = _cdd(v0)
    cur = _cdd(v1)
    for n in range(1, n_top):
        coeff = _cdd_mul(inv_z, (2.0 * n, 0.0, 0.0, 0.0))
        nxt = _cdd_add(_cdd_mul(coeff, cur), _cdd_neg(prev))
        row.append(_cdd_to_complex(nxt))
        prev, cur = cur, nxt
    return row[: n_top + 1]


def _h_row(n_top: int, z: complex, h0: complex, h1: complex):
    return _upward_recurrence(n_top, z, h0, h1)


def _miller_margin(n_top: int, z: complex) -> int:
    # enough downward steps above max(n_top, |z|) to purify the minimal
    # solution, including the slow Airy zone of width ~ |z|^(1/3)
    return 40 + int(12.0 * abs(z) ** (1.0 / 3.0)) + int(0.02 * n_top)


def _j_row(n_top: int, z: complex, j0: complex, j1: complex):
    if n_top == 0:
        return [j0]
    if n_top == 1:
        return [j0, j1]
    if n_top <= 0.5 * abs(z):
        # oscillatory regime: upward recurrence is neutrally stable
        return _upward_recurrence(n_top, z, j0, j1)
    n_start = max(n_top, int(abs(z)) + 1) + _miller_margin(n_top, z)
    inv_z = _cdd_recip(z)
    p_up = (0.0, 0.0, 0.0, 0.0)             # p_{n+1}
    p = (1e-280, 0.0, 0.0, 0.0)             # p_n (arbitrary seed)
    stored = [0.0 + 0.0j] * (n_top + 1)
    for n in range(n_start, 0, -1):
        coeff = _cdd_mul(inv_z, (2.0 * n, 0.0, 0.0, 0.0))
        p_dn = _cdd_add(_cdd_mul(coeff, p), _cdd_neg(p_up))
        p_up, p = p, p_dn
        if n - 1 <= n_top:
            stored[n - 1] = _cdd_to_complex(p)
        if abs(p[0]) > 1e250 or abs(p[2]) > 1e250:
            p = tuple(v * 1e-250 for v in p)
            p_up = tuple(v * 1e-250 for v in p_up)
            for i in range(n, n_top + 1):
                stored[i] *= 1e-250
    if abs(j0) >= abs(j1):
        ratio = j0 / stored[0]
    else:
        ratio = j1 / stored[1]
    return [v * ratio for v in stored]


# ---------------------------------------------------------------------------
# public scalar API
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BesselEval:
    """J_n, J_n', H1_n, H1_n' at a common argument."""

    n: int
    z: complex
    J: complex
    Jp: complex
    H1: complex
    H1p: complex

    def wronskian(self) -> complex:
        """J*H1' - J'*H1; analytically 2i/(pi z)."""
        return self.J * self.H1p - self.Jp * self.H1


def _require_order(n: int) -> int:
    if n < 0 or int(n) != n:
        raise ValueError(f"order must be a nonnegative integer, got {n}")
    return int(n)


def _budget(n: int, z: complex) -> None:
    if n > 4.0 * abs(z) + 200.0:
        raise RecurrenceBudgetError(
            f"order {n} exceeds recurrence budget 4|z|+200 at |z|={abs(z):.3g}"
        )


def bessel_j(n: int, z: complex) -> complex:
    """Bessel function of the first kind J_n(z)."""
    n = _require_order(n)
    z = _check_region(z, allow_zero=True)
    if z == 0:
        return 1.0 + 0.0j if n == 0 else 0.0 + 0.0j
    _budget(n, z)
    j0, j1, _, _ = _base_quad(z)
    return _j_row(n, z, j0, j1)[n]


def hankel1(n: int, z: complex) -> complex:
    """Hankel function of the first kind H^(1)_n(z)."""
    n = _require_order(n)
    z = _check_region(z)
    _budget(n, z)
    _, _, h0, h1 = _base_quad(z)
    return _h_row(n, z, h0, h1)[n]


def bessel_j_deriv(n: int, z: complex) -> complex:
    """d/dz J_n(z) via the neighbor identity."""
    n = _require_order(n)
    z = _check_region(z, allow_zero=True)
    if z == 0:
        if n == 1:
            return 0.5 + 0.0j
        return 0.0 + 0.0j
    _budget(n + 1, z)
    j0, j1, _, _ = _base_quad(z)
    row = _j_row(n + 1, z, j0, j1)
    if n == 0:
        return -row[1]
    return 0.5 * (row[n - 1] - row[n + 1])


def hankel1_deriv(n: int, z: complex) -> complex:
    """d/dz H^(1)_n(z) via the neighbor identity."""
    n = _require_order(n)
    z = _check_region(z)
    _budget(n + 1, z)
    _, _, h0, h1 = _base_quad(z)
    row = _h_row(n + 1, z, h0, h1)
    if n == 0:
        return -row[1]
    return 0.5 * (row[n - 1] - row[n + 1])


def bessel_quad(n: int, z: complex) -> BesselEval:
    """J, J', H1, H1' at z in one evaluation (shared recurrences)."""
    n = _require_order(n)
    z = _check_region(z)
    _budget(n + 1, z)
    j0, j1, h0, h1 = _base_quad(z)
    jrow = _j_row(n + 1, z, j0, j1)
    hrow = _h_row(n + 1, z, h0, h1)
    if n == 0:
        jp, hp = -jrow[1], -hrow[1]
    else:
        jp = 0.5 * (jrow[n - 1] - jrow[n + 1])
        hp = 0.5 * (hrow[n - 1] - hrow[n + 1])
    return BesselEval(n=n, z=z, J=jrow[n], Jp=jp, H1=hrow[n], H1p=hp)


def bessel_row(n_max: int, z: complex) -> list[BesselEval]:
    """BesselEval for every order 0..n_max at a common argument."""
    n_max = _require_order(n_max)
    z = _check_region(z)
    _budget(n_max, z)
    j0, j1, h0, h1 = _base_quad(z)
    jrow = _j_row(n_max + 1, z, j0, j1)
    hrow = _h_row(n_max + 1, z, h0, h1)
    out = []
    for n in range(n_max + 1):
        if n == 0:
            jp, hp = -jrow[1], -hrow[1]
        else:
            jp = 0.5 * (jrow[n - 1] - jrow[n + 1])
            hp = 0.5 * (hrow[n - 1] - hrow[n + 1])
        if not (cmath.isfinite(hrow[n]) and cmath.isfinite(hp)):
            raise RecurrenceBudgetError(
                f"H_{n}({z}) exceeds double range; row not representable"
            )
        out.append(BesselEval(n=n, z=z, J=jrow[n], Jp=jp, H1=hrow[n], H1p=hp))
    return out


# ---------------------------------------------------------------------------
# vectorized order-0 pair for boundary-integral kernels
# ---------------------------------------------------------------------------

def _j0_h0_series_band(ws: np.ndarray, kmax: int):
    # the harmonic companion shares the base term (-x)^k/(k!)^2 with J0
    x = ws * ws * 0.25
    term = np.ones_like(ws)
    j = term.copy()
    s = np.zeros_like(ws)
    hk = 0.0
    for k in range(1, kmax):
        term *= x
        term /= -(k * k)
        j += term
        hk += 1.0 / k
        s -= term * hk
        if np.max(np.abs(term)) < 1e-18 * max(np.max(np.abs(j)), 1e-300):
            break
    y = (2.0 / np.pi) * ((np.log(ws / 2.0) + np.euler_gamma) * j + s)
    return j, j + 1j * y


def _j0_h0_asym_band(wb: np.ndarray, kmax: int):
    # the incoming-wave sum has terms (-1)^k times the outgoing ones
    pref = np.sqrt(2.0 / (np.pi * wb))
    e1 = pref * np.exp(1j * (wb - 0.25 * np.pi))
    e2 = pref * np.exp(-1j * (wb - 0.25 * np.pi))
    s1 = np.ones_like(wb)
    s2 = np.ones_like(wb)
    t1 = np.ones_like(wb)
    prev = np.ones(wb.shape)
    live = np.ones(wb.shape, dtype=bool)
    sign = 1.0
    for k in range(1, kmax):
        fac = (-((2 * k - 1) ** 2)) / (8.0 * k)
        t1 = t1 * (1j * fac) / wb
        sign = -sign
        mag = np.abs(t1)
        live &= mag < prev
        if not live.any():
            break
        s1[live] += t1[live]
        s2[live] += sign * t1[live]
        prev = mag
        if np.max(mag) < 1e-17:
            break
    h1k = e1 * s1
    h2k = e2 * s2
    return 0.5 * (h1k + h2k), h1k


def j0_h0_arrays(w: np.ndarray):
    """J0(w) and H^(1)_0(w) elementwise over a complex array.

    Plain-double regime switching at |w| = 12, banded by magnitude so the
    series/expansion loops run only as long as the band needs; intended for
    kernel assembly where ~1e-11 relative accuracy suffices.  Entries with
    w == 0 must be excluded by the caller.
    """
    w = np.asarray(w, dtype=np.complex128)
    j0 = np.empty_like(w)
    h0 = np.empty_like(w)
    aw = np.abs(w)
    for lo, hi, kmax, evaluator in (
        (-1.0, 3.0, 14, _j0_h0_series_band),
        (3.0, 7.0, 28, _j0_h0_series_band),
        (7.0, _VEC_SERIES_RADIUS, 46, _j0_h0_series_band),
        (_VEC_SERIES_RADIUS, 30.0, 34, _j0_h0_asym_band),
        (30.0, np.inf, 16, _j0_h0_asym_band),
    ):
        m = (aw > lo) & (aw <= hi) if np.isfinite(hi) else (aw > lo)
        if m.any():
            j0[m], h0[m] = evaluator(w[m], kmax)
    return j0, h0
