"""Heat-kernel mollification of lattice fields, full and truncated.

The full mollifier convolves with the Gaussian kernel of per-coordinate
variance eps^2/2 (density (1/(pi*eps^2)) * exp(-|z|^2/eps^2)) by FFT,
with padding matched to the field's boundary behavior: periodic for the
torus-backed whole-plane surrogate, reflective otherwise.  The kernel is
renormalized to unit mass on the grid, so constants pass through exactly.

The truncated mollifier multiplies the same kernel by a C^1 radial bump
that is 1 inside radius sqrt(eps)/2 and exactly 0 outside sqrt(eps), and
convolves in the spatial domain.  Kernel entries beyond the bump radius
are exact zeros, so the output at z is bit-for-bit independent of the
base field outside B_sqrt(eps)(z).  This kernel is deliberately NOT
renormalized: its mass is the actual mass of psi_eps * p_(eps^2/2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import signal

from .field import WHOLE_PLANE, GridSpec, LatticeField

HEAT_FULL = "heat-full"
HEAT_TRUNCATED = "heat-truncated"

MOLLIFIER_KINDS = (HEAT_FULL, HEAT_TRUNCATED)


@dataclass(frozen=True)
class MollifiedField:
    """A field convolved at scale eps.

    ``spec`` describes the lattice the mollified values live on.  It equals
    ``base.spec`` right after mollification but may be coarser after
    ``subsample`` (used to build metric lattices whose step matches eps).
    """

    base: LatticeField
    eps: float
    kernel: str
    values: np.ndarray
    spec: GridSpec
    padding: str

    def __post_init__(self):
        if self.kernel not in MOLLIFIER_KINDS:
            raise ValueError(f"unknown mollifier kind {self.kernel!r}")
        v = np.asarray(self.values, dtype=np.float64)
        if v.shape != (self.spec.n, self.spec.n):
            raise ValueError("mollified values do not match the grid spec")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def _padding_for(base: LatticeField) -> str:
    return "periodic" if base.kind == WHOLE_PLANE else "reflective"


def _heat_kernel_wrapped(n: int, spacing: float, eps: float) -> np.ndarray:
    """Gaussian kernel on an n x n torus, centered at index (0, 0), mass 1."""
    idx = np.arange(n)
    d = np.minimum(idx, n - idx) * spacing
    r2 = d[:, None] ** 2 + d[None, :] ** 2
    k = np.exp(-r2 / eps**2)
    return k / k.sum()


def mollify_heat(base: LatticeField, eps: float, padding: str | None = None) -> MollifiedField:
    """FFT convolution with the heat kernel at time eps^2/2."""
    s = base.spec.spacing
    if eps < 2.0 * s:
        raise ValueError(f"eps {eps} below resolvable scale {2 * s}")
    pad_mode = padding if padding is not None else _padding_for(base)
    n = base.spec.n
    if pad_mode == "periodic":
        k = _heat_kernel_wrapped(n, s, eps)
        out = np.fft.ifft2(np.fft.fft2(base.values) * np.fft.fft2(k)).real
    elif pad_mode == "reflective":
        p = min(n - 1, int(math.ceil(6.5 * eps / s)))
        # 'symmetric' repeats the edge sample, matching scipy.ndimage's
        # 'reflect' so both mollifiers see the same extension
        padded = np.pad(base.values, p, mode="symmetric")
        m = n + 2 * p
        k = _heat_kernel_wrapped(m, s, eps)
        conv = np.fft.ifft2(np.fft.fft2(padded) * np.fft.fft2(k)).real
        out = conv[p : p + n, p : p + n]
    else:
        raise ValueError(f"unknown padding {pad_mode!r}")
    return MollifiedField(
        base=base, eps=float(eps), kernel=HEAT_FULL, values=out, spec=base.spec, padding=pad_mode
    )


def bump_profile(rho: np.ndarray, eps: float) -> np.ndarray:
    """C^1 radial bump: 1 on [0, sqrt(eps)/2], smoothstep down to 0 at sqrt(eps)."""
    R = math.sqrt(eps)
    t = np.clip((rho - 0.5 * R) / (0.5 * R), 0.0, 1.0)
    return 1.0 - (3.0 * t**2 - 2.0 * t**3)


def truncated_kernel(spacing: float, eps: float) -> np.ndarray:
    """Spatial kernel psi_eps * p_(eps^2/2) * spacing^2 with exact zero tail."""
    R = math.sqrt(eps)
    half = int(math.floor(R / spacing))
    idx = np.arange(-half, half + 1) * spacing
    rho = np.hypot(idx[:, None], idx[None, :])
    gauss = (1.0 / (math.pi * eps**2)) * np.exp(-(rho**2) / eps**2)
    k = bump_profile(rho, eps) * gauss * spacing**2
    k[rho >= R] = 0.0
    return k


def mollify_truncated(base: LatticeField, eps: float, padding: str | None = None) -> MollifiedField:
    """Spatial convolution with the bump-truncated heat kernel.

    The value at z depends only on base values inside B_sqrt(eps)(z)
    (exactly: the kernel is zero there, and 0*x contributes an exact 0).
    """
    s = base.spec.spacing
    if math.sqrt(eps) < 4.0 * s:
        raise ValueError(f"truncation radius sqrt({eps}) below 4*spacing = {4 * s}")
    pad_mode = padding if padding is not None else _padding_for(base)
    k = truncated_kernel(s, eps)
    boundary = "wrap" if pad_mode == "periodic" else "symm"
    out = signal.convolve2d(base.values, k, mode="same", boundary=boundary)
    return MollifiedField(
        base=base, eps=float(eps), kernel=HEAT_TRUNCATED, values=out, spec=base.spec, padding=pad_mode
    )


def mollify(base: LatticeField, eps: float, kind: str, padding: str | None = None) -> MollifiedField:
    if kind == HEAT_FULL:
        return mollify_heat(base, eps, padding)
    if kind == HEAT_TRUNCATED:
        return mollify_truncated(base, eps, padding)
    raise ValueError(f"unknown mollifier kind {kind!r}")


def subsample(mf: MollifiedField, stride: int) -> MollifiedField:
    """Coarsen the mollified lattice by an integer stride (metric lattices).

    Keeps eps and the base field; only the lattice the metric will be built
    on changes.  The coarse step may equal eps (the discretized-LFPP
    coupling), which is why resolvability is enforced at mollification
    time, not here.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if stride == 1:
        return mf
    sub = mf.values[::stride, ::stride]
    spec = GridSpec(
        n=sub.shape[0], spacing=mf.spec.spacing * stride, origin=mf.spec.origin
    )
    return MollifiedField(
        base=mf.base, eps=mf.eps, kernel=mf.kernel, values=sub.copy(), spec=spec, padding=mf.padding
    )


def constant_mollified(spec: GridSpec, value: float, eps: float) -> MollifiedField:
    """Deterministic constant 'mollified' field, for oracle tests and smoke runs."""
    from .field import DETERMINISTIC

    base = LatticeField(spec=spec, values=np.full((spec.n, spec.n), value), kind=DETERMINISTIC)
    return MollifiedField(
        base=base, eps=float(eps), kernel=HEAT_FULL,
        values=np.full((spec.n, spec.n), float(value)), spec=spec, padding="reflective",
    )


def from_values(spec: GridSpec, values: np.ndarray, eps: float) -> MollifiedField:
    """Wrap explicit per-vertex values as a mollified field (weight tables in tests)."""
    from .field import DETERMINISTIC

    vals = np.asarray(values, dtype=np.float64)
    base = LatticeField(spec=spec, values=vals, kind=DETERMINISTIC)
    return MollifiedField(
        base=base, eps=float(eps), kernel=HEAT_FULL, values=vals, spec=spec, padding="reflective"
    )
