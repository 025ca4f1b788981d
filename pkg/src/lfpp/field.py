"""Lattice approximations of the planar Gaussian free field.

Two samplers are provided, both spectral and both deterministic given a
64-bit seed:

* ``sample_zero_boundary_gff`` draws independent Gaussians on the discrete
  sine modes of the grid, weighted by the inverse square root of the
  Dirichlet Laplacian eigenvalues.  The covariance is the discrete Green
  function in the -log|x-y| convention (the one under which circle
  averages run at unit Brownian diffusivity).

* ``sample_whole_plane_gff`` synthesizes a field on a torus of twice the
  requested side, crops the requested window, and recenters so that the
  unit-circle average about the window center is exactly zero.  This is
  the finite-volume surrogate for the whole-plane field: the short-range
  covariance in the window interior is correct, boundary effects are
  pushed to the doubled torus.

Fields are immutable value objects; everything downstream (mollifiers,
metrics) treats them as read-only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Tuple

import numpy as np
from scipy import fft as sfft

ZERO_BOUNDARY = "zero-boundary-gff"
WHOLE_PLANE = "whole-plane-gff-normalized"
DETERMINISTIC = "deterministic"
COMPOSITE = "composite"

FIELD_KINDS = (ZERO_BOUNDARY, WHOLE_PLANE, DETERMINISTIC, COMPOSITE)


@dataclass(frozen=True)
class GridSpec:
    """Square grid: ``n`` vertices per side, physical step ``spacing``.

    ``origin`` is the physical coordinate of the vertex with index (0, 0);
    vertex (i, j) sits at ``origin + (i*spacing, j*spacing)``.  The first
    array axis is x, the second is y.
    """

    n: int
    spacing: float
    origin: Tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not (self.spacing > 0.0):
            raise ValueError(f"spacing must be positive, got {self.spacing}")
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))

    @property
    def side(self) -> float:
        return (self.n - 1) * self.spacing

    @property
    def center(self) -> Tuple[float, float]:
        return (self.origin[0] + 0.5 * self.side, self.origin[1] + 0.5 * self.side)

    def axis(self) -> np.ndarray:
        return self.origin[0] + self.spacing * np.arange(self.n)

    def mesh(self) -> Tuple[np.ndarray, np.ndarray]:
        x = self.origin[0] + self.spacing * np.arange(self.n)
        y = self.origin[1] + self.spacing * np.arange(self.n)
        return np.meshgrid(x, y, indexing="ij")

    def contains_point(self, z: Tuple[float, float]) -> bool:
        x0, y0 = self.origin
        return (x0 <= z[0] <= x0 + self.side) and (y0 <= z[1] <= y0 + self.side)

    def contains_disk(self, z: Tuple[float, float], r: float) -> bool:
        x0, y0 = self.origin
        return (
            z[0] - r >= x0
            and z[0] + r <= x0 + self.side
            and z[1] - r >= y0
            and z[1] + r <= y0 + self.side
        )


@dataclass(frozen=True)
class LatticeField:
    spec: GridSpec
    values: np.ndarray
    kind: str
    seed: int = 0
    # Constant subtracted by rescale_field (the circle average h_r(0) under
    # the target grid's own quadrature); 0.0 for fields built any other way.
    recentering: float = 0.0

    def __post_init__(self):
        if self.kind not in FIELD_KINDS:
            raise ValueError(f"unknown field kind {self.kind!r}")
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.spec.n, self.spec.n):
            raise ValueError(f"values shape {v.shape} != grid {self.spec.n}")
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def _rng(seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed)))


def sample_zero_boundary_gff(spec: GridSpec, seed: int) -> LatticeField:
    """Dirichlet GFF on the grid: exact zeros on the boundary ring.

    Spectral synthesis over the discrete sine modes.  Mode (j, k) gets an
    independent standard Gaussian scaled by sqrt(2*pi / (lambda_jk * s^2)),
    with lambda_jk the eigenvalue of the 5-point Dirichlet Laplacian, so the
    covariance matrix is 2*pi * (-Laplacian)^-1 interpreted as an integral
    kernel (the -log|x-y| + harmonic-correction convention).
    """
    m = spec.n - 2
    s = spec.spacing
    j = np.arange(1, m + 1)
    lam1 = (4.0 / s**2) * np.sin(np.pi * j / (2.0 * (m + 1))) ** 2
    lam = lam1[:, None] + lam1[None, :]
    amp = np.sqrt(2.0 * np.pi / (lam * s**2))
    coeff = _rng(seed).standard_normal((m, m)) * amp / (2.0 * (m + 1))
    interior = sfft.dstn(coeff, type=1)
    values = np.zeros((spec.n, spec.n))
    values[1:-1, 1:-1] = interior
    return LatticeField(spec=spec, values=values, kind=ZERO_BOUNDARY, seed=int(seed))


def dirichlet_green_diagonal(spec: GridSpec, index: Tuple[int, int]) -> float:
    """Direct eigen-sum for Var(h(x)) at a grid vertex of the Dirichlet field.

    Independent of the DST synthesis path: sums 2*pi * v_jk(x)^2 / (lambda_jk
    * s^2) over all retained modes with orthonormal eigenvectors v_jk.
    """
    m = spec.n - 2
    s = spec.spacing
    ix, iy = index
    if not (1 <= ix <= m and 1 <= iy <= m):
        raise ValueError("index must be an interior vertex")
    j = np.arange(1, m + 1)
    lam1 = (4.0 / s**2) * np.sin(np.pi * j / (2.0 * (m + 1))) ** 2
    lam = lam1[:, None] + lam1[None, :]
    vx = np.sqrt(2.0 / (m + 1)) * np.sin(np.pi * j * ix / (m + 1))
    vy = np.sqrt(2.0 / (m + 1)) * np.sin(np.pi * j * iy / (m + 1))
    v2 = (vx[:, None] * vy[None, :]) ** 2
    return float(np.sum(2.0 * np.pi * v2 / (lam * s**2)))


def sample_whole_plane_gff(spec: GridSpec, seed: int) -> LatticeField:
    """Whole-plane surrogate: doubled-torus spectral sample, recentered.

    The additive-constant ambiguity of the whole-plane field is fixed by
    subtracting the unit-circle average about the grid center, so the
    returned field satisfies h_1(center) = 0 up to float roundoff.
    """
    half_side = 0.5 * spec.side
    if half_side <= 1.0 + spec.spacing:
        raise ValueError(
            "window must strictly contain the unit disk about its center "
            f"(half side {half_side:.4f})"
        )
    n, s = spec.n, spec.spacing
    big = 2 * n
    k = np.arange(big)
    lam1 = (4.0 / s**2) * np.sin(np.pi * k / big) ** 2
    lam = lam1[:, None] + lam1[None, :]
    g = np.zeros_like(lam)
    nz = lam > 0
    g[nz] = np.sqrt(2.0 * np.pi / (s**2 * lam[nz]))
    w = _rng(seed).standard_normal((big, big))
    torus = np.fft.ifft2(np.fft.fft2(w) * g).real
    off = n // 2
    window = torus[off : off + n, off : off + n].copy()
    raw = LatticeField(spec=spec, values=window, kind=COMPOSITE, seed=int(seed))
    c = circle_average(raw, spec.center, 1.0)
    return LatticeField(spec=spec, values=window - c, kind=WHOLE_PLANE, seed=int(seed))


def bilinear(field: LatticeField, pts: np.ndarray) -> np.ndarray:
    """Bilinear interpolation of the field at physical points, shape (m, 2)."""
    spec = field.spec
    fx = (pts[:, 0] - spec.origin[0]) / spec.spacing
    fy = (pts[:, 1] - spec.origin[1]) / spec.spacing
    eps = 1e-9
    if np.any(fx < -eps) or np.any(fy < -eps) or np.any(fx > spec.n - 1 + eps) or np.any(fy > spec.n - 1 + eps):
        raise ValueError("interpolation point outside grid window")
    fx = np.clip(fx, 0.0, spec.n - 1.0)
    fy = np.clip(fy, 0.0, spec.n - 1.0)
    i0 = np.minimum(fx.astype(np.int64), spec.n - 2)
    j0 = np.minimum(fy.astype(np.int64), spec.n - 2)
    tx = fx - i0
    ty = fy - j0
    v = field.values
    return (
        v[i0, j0] * (1 - tx) * (1 - ty)
        + v[i0 + 1, j0] * tx * (1 - ty)
        + v[i0, j0 + 1] * (1 - tx) * ty
        + v[i0 + 1, j0 + 1] * tx * ty
    )


def circle_average(field: LatticeField, z: Tuple[float, float], r: float) -> float:
    """Mean of the (bilinearly interpolated) field over the circle dB_r(z)."""
    spec = field.spec
    if r < 2.0 * spec.spacing:
        raise ValueError(f"radius {r} below resolvable scale {2 * spec.spacing}")
    if not spec.contains_disk(z, r):
        raise ValueError("circle leaves the grid window")
    npts = max(64, int(math.ceil(2.0 * math.pi * r / spec.spacing)))
    theta = 2.0 * np.pi * np.arange(npts) / npts
    pts = np.stack([z[0] + r * np.cos(theta), z[1] + r * np.sin(theta)], axis=1)
    return float(np.mean(bilinear(field, pts)))


def circle_average_trace(
    field: LatticeField, z: Tuple[float, float], radii: np.ndarray
) -> np.ndarray:
    """Circle averages at several radii; rows (t, h_r, r) with t = log(1/r)."""
    rows = []
    for r in radii:
        rows.append((math.log(1.0 / r), circle_average(field, z, float(r)), float(r)))
    return np.array(rows)


def sample_function(spec: GridSpec, fn: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> np.ndarray:
    """Evaluate a continuous function on the grid mesh."""
    xx, yy = spec.mesh()
    return np.asarray(fn(xx, yy), dtype=np.float64)


def log_singularity(spec: GridSpec, alpha: float, z0: Tuple[float, float]) -> np.ndarray:
    """Grid sample of -alpha*log|z - z0|, clamped at half a grid step.

    Vertices closer to z0 than spacing/2 (in particular a vertex that
    coincides with z0) take the value at distance spacing/2, keeping all
    weights finite.
    """
    xx, yy = spec.mesh()
    dist = np.hypot(xx - z0[0], yy - z0[1])
    dist = np.maximum(dist, 0.5 * spec.spacing)
    return -alpha * np.log(dist)


def add_function(field: LatticeField, f: np.ndarray) -> LatticeField:
    """Pointwise sum of the field and a function sampled on the same grid."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != field.values.shape:
        raise ValueError("sampled function shape does not match the field grid")
    return LatticeField(
        spec=field.spec,
        values=field.values + f,
        kind=COMPOSITE,
        seed=field.seed,
        recentering=field.recentering,
    )


def rescale_field(field: LatticeField, r: int) -> LatticeField:
    """Zoom out by a power of two: h^r(z) = h(r*z) - h_r(0).

    The target grid is the stride-r subsample of the source with coordinates
    divided by r, so no interpolation happens.  The subtracted constant is
    the circle average of h(r*.) at radius 1 about the physical origin,
    i.e. h_r(0) under the target grid's quadrature; it is recorded in
    ``recentering`` so scaling experiments can reuse the exact value.
    """
    if r < 1 or (r & (r - 1)) != 0:
        raise ValueError(f"rescale factor must be a power of two >= 1, got {r}")
    sub = field.values[::r, ::r]
    n_new = sub.shape[0]
    spec_new = GridSpec(
        n=n_new,
        spacing=field.spec.spacing,
        origin=(field.spec.origin[0] / r, field.spec.origin[1] / r),
    )
    raw = LatticeField(spec=spec_new, values=sub.copy(), kind=COMPOSITE, seed=field.seed)
    c = circle_average(raw, (0.0, 0.0), 1.0)
    return LatticeField(
        spec=spec_new,
        values=sub - c,
        kind=COMPOSITE,
        seed=field.seed,
        recentering=c,
    )
