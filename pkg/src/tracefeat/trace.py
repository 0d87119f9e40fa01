"""Discrete trace transform, its functionals and sampling-quality analysis."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional

import numpy as np

from . import _kernels
from ._accel import resolve_backend
from .errors import ContractError


class PhiRange(str, Enum):
    FULL = "full"  # [0, 2 pi)
    HALF = "half"  # [0, pi)


class RhoRange(str, Enum):
    SIGNED = "signed"  # [-r, r]
    POSITIVE = "positive"  # [0, r]


class Functional(str, Enum):
    RADON = "radon"
    IF2 = "if2"


class Sampling(str, Enum):
    BILINEAR = "bilinear"
    NEAREST = "nearest"


@dataclass(frozen=True)
class TraceParams:
    """Sampling resolutions and functional selection for one transform."""

    n_phi: int = 71
    n_rho: int = 71
    n_xi: int = 251
    phi_range: PhiRange = PhiRange.FULL
    rho_range: RhoRange = RhoRange.SIGNED
    functional: Functional = Functional.IF2
    q: float = 2.0
    r: float = 0.5
    sampling: Sampling = Sampling.BILINEAR

    def __post_init__(self):
        for name, enum in (("phi_range", PhiRange), ("rho_range", RhoRange),
                           ("functional", Functional), ("sampling", Sampling)):
            object.__setattr__(self, name, enum(getattr(self, name)))
        if self.n_phi < 5:
            raise ContractError(f"n_phi must be >= 5 (got {self.n_phi}); fewer angles carry too little angular information")
        if self.n_rho < 1:
            raise ContractError(f"n_rho must be >= 1 (got {self.n_rho})")
        if self.n_xi < 2:
            raise ContractError(f"n_xi must be >= 2 (got {self.n_xi})")
        if not (self.q > 0 and self.r > 0):
            raise ContractError(f"IF2 exponents must be positive (q={self.q}, r={self.r})")

    @property
    def n_samples(self):
        return self.n_phi * self.n_rho * self.n_xi


@dataclass
class Sinogram:
    values: np.ndarray  # (n_phi, n_rho), row = angle
    params: TraceParams
    channel_id: Optional[str] = None


@dataclass
class ContributionMask:
    counts: np.ndarray  # (height, width) sample hits per pixel


@dataclass(frozen=True)
class MaskMetrics:
    coverage_pct: float
    mean_repetition: float
    variance: float


def resolutions_from_steps(delta_phi, delta_rho, delta_L, width, height):
    """Grid sizes ``(n_phi, n_rho, n_xi)`` implied by angular, radial and along-line steps."""
    if not (delta_phi > 0 and delta_rho > 0 and delta_L > 0):
        raise ContractError("all sampling steps must be positive")
    # the small slack keeps 2*pi/(pi/2) from flooring to 3 on rounding noise
    def count(ratio):
        return max(1, int(math.floor(ratio + 1e-9)))

    return count(2 * math.pi / delta_phi), count(min(width, height) / delta_rho), count(1.0 / delta_L)


def phi_grid(params: TraceParams):
    span = 2 * math.pi if params.phi_range is PhiRange.FULL else math.pi
    return np.arange(params.n_phi) * (span / params.n_phi)


def rho_grid(params: TraceParams, width, height):
    """``n_rho`` radii spanning [-r, r] (or [0, r]) inclusive, r = min(W, H) / 2."""
    r = min(width, height) / 2.0
    lo = -r if params.rho_range is RhoRange.SIGNED else 0.0
    if params.n_rho == 1:
        return np.array([0.0 if params.rho_range is RhoRange.SIGNED else r / 2.0])
    return np.linspace(lo, r, params.n_rho)


def line_points(phi, rho, n_xi, width, height):
    """Sample points of one line inside the raster, as an ``(m, 2)`` array of (x, y).

    The m = n_xi points sit at the midpoints of n_xi equal steps along the
    clipped chord. Lines that miss the raster give an empty array.
    """
    t0, t1, hit = _kernels.chord_bounds(math.cos(phi), math.sin(phi), rho, width / 2.0, height / 2.0)
    if not hit:
        return np.empty((0, 2))
    t0, t1 = float(t0), float(t1)
    dt = (t1 - t0) / n_xi
    t = t0 + (np.arange(n_xi) + 0.5) * dt
    c, s = math.cos(phi), math.sin(phi)
    return np.column_stack([rho * c - t * s, rho * s + t * c])


def functional_radon(samples, dt):
    if dt <= 0:
        raise ContractError("dt must be positive")
    samples = np.asarray(samples, float)
    return float(samples.sum() * dt) if samples.size else 0.0


def functional_if2(samples, dt, q=2.0, r=0.5):
    """``(sum |s|^q dt)^r``; scales by ``c**(q*r)`` when the samples scale by ``c``."""
    if dt <= 0 or q <= 0 or r <= 0:
        raise ContractError("dt, q and r must be positive")
    samples = np.asarray(samples, float)
    if not samples.size:
        return 0.0
    return float(((np.abs(samples) ** q).sum() * dt) ** r)


def trace_transform(plane, params: TraceParams, channel_id=None, backend=None) -> Sinogram:
    """Apply the configured functional along every (phi, rho) line of ``plane``."""
    plane = np.ascontiguousarray(plane, dtype=np.float64)
    if plane.ndim != 2 or plane.size == 0:
        raise ContractError(f"expected a non-empty 2D plane, got shape {plane.shape}")
    h, w = plane.shape
    phis = phi_grid(params)
    rhos = rho_grid(params, w, h)
    func = _kernels.RADON if params.functional is Functional.RADON else _kernels.IF2
    interp = _kernels.NEAREST if params.sampling is Sampling.NEAREST else _kernels.BILINEAR
    kernel = _kernels.trace_numba if resolve_backend(backend) == "numba" else _kernels.trace_numpy
    values = kernel(plane, phis, rhos, params.n_xi, func, float(params.q), float(params.r), interp)
    return Sinogram(values=values, params=params, channel_id=channel_id)


def mask_for_lines(phis, rhos, n_xi, width, height, backend=None) -> ContributionMask:
    """Nearest-pixel hit counts for an arbitrary set of lines (every phi with every rho)."""
    phis = np.ascontiguousarray(np.atleast_1d(phis), dtype=np.float64)
    rhos = np.ascontiguousarray(np.atleast_1d(rhos), dtype=np.float64)
    kernel = _kernels.mask_numba if resolve_backend(backend) == "numba" else _kernels.mask_numpy
    return ContributionMask(counts=kernel(int(height), int(width), phis, rhos, int(n_xi)))


def contribution_mask(params: TraceParams, width, height, backend=None) -> ContributionMask:
    return mask_for_lines(phi_grid(params), rho_grid(params, width, height), params.n_xi,
                          width, height, backend=backend)


def mask_metrics(mask: ContributionMask) -> MaskMetrics:
    counts = np.asarray(mask.counts, dtype=np.float64)
    return MaskMetrics(
        coverage_pct=100.0 * np.count_nonzero(counts) / counts.size,
        mean_repetition=float(counts.mean()),
        variance=float(counts.var()),
    )


# ---------------------------------------------------------------- exports


def write_sinogram_csv(sinogram: Sinogram, path):
    """One row per angle, one column per radius; values written with ``repr``."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        for row in np.asarray(sinogram.values):
            writer.writerow([repr(float(v)) for v in row])


def write_sinogram_pgm(sinogram: Sinogram, path):
    """Binary 8-bit PGM, min-max scaled. Constant sinograms come out black."""
    vals = np.asarray(sinogram.values, float)
    lo, hi = vals.min(), vals.max()
    scaled = np.zeros_like(vals) if hi <= lo else (vals - lo) / (hi - lo)
    img = np.round(scaled * 255).astype(np.uint8)
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        fh.write(img.tobytes())


def format_mask_table(rows):
    """Text table with one line per ``((n_phi, n_rho, n_xi), MaskMetrics)`` pair."""
    lines = [f"{'n_phi':>6} {'n_rho':>6} {'n_xi':>7} {'% pixels used':>14} {'Mean':>10} {'Var':>14}"]
    for (n_phi, n_rho, n_xi), m in rows:
        lines.append(f"{n_phi:>6} {n_rho:>6} {n_xi:>7} {m.coverage_pct:>14.2f} "
                     f"{m.mean_repetition:>10.2f} {m.variance:>14.2f}")
    return "\n".join(lines)
