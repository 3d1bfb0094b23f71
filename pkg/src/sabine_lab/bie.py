"""Nystrom discretization of the single layer operator on a convex curve.

The boundary is sampled at equal arclength steps; the weakly singular
kernel (i/4) H0(lambda |x - y|) is split into a log-singular part handled
by spectrally accurate trigonometric quadrature weights and a smooth
remainder handled by the trapezoid rule.  The smallest singular value of
the discretized I + G(lambda) V is the functional whose near-vanishing
marks a resonance.
"""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np

from . import specfun
from .billiards import Model, PotentialSpec
from .errors import RegionError
from .geometry import BoundaryCurve, SurfacePoint


@dataclass
class NystromGrid:
    """Equal-arclength quadrature grid on a boundary curve.

    weights are the arclength steps (speed times the 2pi/N parameter step,
    which is constant here because the parametrization is arclength).
    """

    curve: BoundaryCurve
    N: int
    s: np.ndarray
    points: np.ndarray
    weights: np.ndarray
    _node_cache: Optional[list] = field(default=None, repr=False)
    _assembly_cache: Optional[dict] = field(default=None, repr=False)

    @classmethod
    def build(cls, curve: BoundaryCurve, N: int) -> "NystromGrid":
        if N < 16 or N % 2 != 0:
            raise ValueError("node count must be even and at least 16")
        s = curve.total_length * np.arange(N) / N
        data = curve.point_many(s)
        weights = np.full(N, curve.total_length / N)
        return cls(curve=curve, N=N, s=s, points=data["position"], weights=weights)

    @property
    def nodes(self) -> list[SurfacePoint]:
        if self._node_cache is None:
            data = self.curve.point_many(self.s)
            self._node_cache = [
                SurfacePoint(
                    s=float(self.s[i]),
                    position=data["position"][i],
                    unit_tangent=data["tangent"][i],
                    outward_normal=data["normal"][i],
                    curvature=float(data["curvature"][i]),
                )
                for i in range(self.N)
            ]
        return self._node_cache


@dataclass
class LayerMatrix:
    """Discretized single layer operator at physical frequency lambda."""

    lam: complex
    entries: np.ndarray
    grid: Optional[NystromGrid] = None


class BoundaryOperatorConditioning(NamedTuple):
    sigma_min: float
    cond: float


def _check_lambda(curve: BoundaryCurve, lam: complex) -> complex:
    lam = complex(lam)
    d, _ = curve.diameter()
    if lam.real <= 0:
        raise RegionError(f"frequency {lam} must have positive real part")
    if abs(lam) * d > specfun.REGION_RE_MAX or abs(lam.imag) * d > specfun.REGION_IM_MAX:
        raise RegionError(
            f"kernel arguments up to lambda*d = {abs(lam) * d:.4g} exceed the "
            f"validated special-function region"
        )
    return lam


def _log_quadrature_weights(N: int) -> np.ndarray:
    """Trigonometric weights R_d for the log(4 sin^2((t-tau)/2)) factor.

    R_d = -(4 pi / N) [ sum_{m=1}^{N/2-1} cos(m t_d)/m + cos(N t_d / 2)/N ]
    on the even periodic grid t_d = 2 pi d / N.
    """
    d = np.arange(N)
    ang = 2.0 * np.pi * d / N
    m = np.arange(1, N // 2)
    weights = (np.cos(np.outer(ang, m)) / m).sum(axis=1)
    weights += np.cos(0.5 * N * ang) / N
    return -(4.0 * np.pi / N) * weights


def _assembly_context(grid: NystromGrid) -> dict:
    """Frequency-independent assembly data, cached on the grid.

    Circles get a ring fast path: the node distances depend only on the
    index offset, so the kernel is evaluated on N-1 values instead of N^2.
    """
    if grid._assembly_cache is not None:
        return grid._assembly_cache
    N = grid.N
    off = ~np.eye(N, dtype=bool)
    t = 2.0 * np.pi * np.arange(N) / N
    dt = t[:, None] - t[None, :]
    logterm = np.zeros((N, N))
    logterm[off] = np.log(4.0 * np.sin(0.5 * dt[off]) ** 2)
    idx = (np.arange(N)[:, None] - np.arange(N)[None, :]) % N
    rmat = _log_quadrature_weights(N)[idx]
    ctx = {"off": off, "logterm": logterm, "rmat": rmat}
    from .geometry import CurveKind
    if grid.curve.kind is CurveKind.CIRCLE:
        radius = grid.curve.params["radius"]
        ring = 2.0 * radius * np.sin(np.pi * np.arange(N) / N)
        ring[N // 2 + 1:] = ring[1:N // 2][::-1]   # exact mirror symmetry
        ctx["ring_r"] = ring
        ctx["idx"] = idx
    else:
        diff = grid.points[:, None, :] - grid.points[None, :, :]
        ctx["r"] = np.sqrt(np.sum(diff * diff, axis=-1))
    grid._assembly_cache = ctx
    return ctx


def assemble_single_layer(grid: NystromGrid, lam: complex) -> LayerMatrix:
    """Nystrom matrix of the single layer operator at frequency lambda.

    The kernel K = (i/4) H0(lambda r) * speed is split as
    K = K1 * log(4 sin^2((t - tau)/2)) + K2 with K1 = -(1/4pi) J0(lambda r)
    * speed; K2's diagonal limit involves the Euler-Mascheroni constant and
    the parametrization speed.
    """
    lam = _check_lambda(grid.curve, lam)
    N = grid.N
    d, _ = grid.curve.diameter()
    if abs(lam) * d > N / 4.0:
        warnings.warn(
            f"lambda*diameter = {abs(lam) * d:.1f} exceeds N/4 = {N / 4:.0f}; "
            "the discretization is under-resolved (rule of thumb)",
            stacklevel=2,
        )
    if not grid.curve.is_strictly_convex:
        warnings.warn(
            "stadium boundary is only C^{1,1}; the spectral log-quadrature "
            "loses accuracy at the cap junctions (expect halved convergence)",
            stacklevel=2,
        )
    speed = grid.curve.total_length / (2.0 * np.pi)
    ctx = _assembly_context(grid)
    off = ctx["off"]

    if "ring_r" in ctx:
        vec_j = np.zeros(N, dtype=complex)
        vec_h = np.zeros(N, dtype=complex)
        vec_j[1:], vec_h[1:] = specfun.j0_h0_arrays(lam * ctx["ring_r"][1:])
        j0 = vec_j[ctx["idx"]]
        h0 = vec_h[ctx["idx"]]
    else:
        j0 = np.zeros((N, N), dtype=complex)
        h0 = np.zeros((N, N), dtype=complex)
        j0[off], h0[off] = specfun.j0_h0_arrays(lam * ctx["r"][off])

    k1 = -(0.25 / np.pi) * speed * j0
    k1[~off] = -(0.25 / np.pi) * speed      # J0 -> 1 on the diagonal
    k2 = 0.25j * speed * h0 - k1 * ctx["logterm"]
    k2[~off] = (0.25j - np.euler_gamma / (2.0 * np.pi)
                - np.log(lam * speed / 2.0) / (2.0 * np.pi)) * speed
    entries = ctx["rmat"] * k1 + (2.0 * np.pi / N) * k2
    return LayerMatrix(lam=lam, entries=entries, grid=grid)


def _weight_symmetrized(matrix: LayerMatrix) -> np.ndarray:
    d = np.sqrt(matrix.grid.weights) if matrix.grid is not None else None
    if d is None:
        return matrix.entries
    return (d[:, None] * matrix.entries) / d[None, :]


def operator_norm(matrix: LayerMatrix) -> float:
    """L2(dS) operator norm: largest singular value of the symmetrized matrix."""
    sym = _weight_symmetrized(matrix)
    if not np.any(sym):
        return 0.0
    return float(np.linalg.svd(sym, compute_uv=False)[0])


def sigma_min_boundary_operator(grid: NystromGrid, z: complex, h: float,
                                pot: PotentialSpec) -> BoundaryOperatorConditioning:
    """Smallest singular value (and condition number) of I + G(z/h) V.

    Near-vanishing of sigma_min marks a resonance; the condition number is
    the complementary diagnostic maximized at resonances.
    """
    sv = np.asarray(pot.symbol(grid.s, h, Model.DELTA), dtype=float)
    if np.ndim(sv) == 0:
        sv = np.full(grid.N, float(sv))
    if not sv.any():
        return BoundaryOperatorConditioning(sigma_min=1.0, cond=1.0)
    layer = assemble_single_layer(grid, complex(z) / h)
    op = np.eye(grid.N, dtype=complex) + layer.entries * sv[None, :]
    d = np.sqrt(grid.weights)
    sym = (d[:, None] * op) / d[None, :]
    svals = np.linalg.svd(sym, compute_uv=False)
    return BoundaryOperatorConditioning(
        sigma_min=float(svals[-1]),
        cond=float(svals[0] / svals[-1]) if svals[-1] > 0 else math.inf,
    )


# ---------------------------------------------------------------------------
# binary matrix dump (offline inspection)
# ---------------------------------------------------------------------------

_MAGIC = b"SLAB"


def write_matrix(matrix: LayerMatrix, path) -> None:
    """Dump: 16-byte header (magic "SLAB", uint32 N, complex64 lambda) then
    row-major complex128 entries, all little-endian."""
    n = matrix.entries.shape[0]
    header = _MAGIC + struct.pack("<Iff", n, float(matrix.lam.real), float(matrix.lam.imag))
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(matrix.entries.astype("<c16").tobytes(order="C"))


def read_matrix(path) -> LayerMatrix:
    """Inverse of write_matrix; the grid reference is not persisted."""
    with open(path, "rb") as fh:
        header = fh.read(16)
        if header[:4] != _MAGIC:
            raise ValueError(f"{path}: not a layer-matrix dump (bad magic)")
        n, lre, lim = struct.unpack("<Iff", header[4:])
        data = np.frombuffer(fh.read(), dtype="<c16").reshape(n, n).copy()
    return LayerMatrix(lam=complex(lre, lim), entries=data, grid=None)
