"""Timing of the extraction stages and sampling-parameter sweeps."""
from __future__ import annotations

import statistics
import time
from dataclasses import dataclass

import numpy as np

from .. import descriptor, preproc
from .._accel import resolve_backend
from ..trace import TraceParams, contribution_mask, mask_metrics, trace_transform
from .config import PipelineConfig

# (n_phi, n_rho, n_xi) reference quantisation settings for mask analysis
MASK_ROWS = [
    (64, 64, 15), (64, 64, 45), (64, 64, 85), (64, 64, 185),
    (300, 5, 45), (300, 5, 151),
    (5, 300, 45), (5, 300, 151), (5, 300, 218), (5, 300, 251),
    (384, 256, 15),
    (100, 100, 85), (100, 100, 185), (100, 100, 218), (100, 100, 2185),
    (42, 75, 12000),
]


def synthetic_image(width, height, seed=0):
    """Smooth seeded RGB test image, uint8."""
    rng = np.random.default_rng(seed)
    y, x = np.mgrid[0:height, 0:width] / max(width, height)
    planes = []
    for _ in range(3):
        fx, fy, ph = rng.uniform(1, 6), rng.uniform(1, 6), rng.uniform(0, 2 * np.pi)
        planes.append(0.5 + 0.4 * np.sin(2 * np.pi * (fx * x + fy * y) + ph))
    img = np.stack(planes, axis=-1) + rng.normal(0, 0.03, (height, width, 3))
    return np.round(np.clip(img, 0, 1) * 255).astype(np.uint8)


def _time(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return times


@dataclass(frozen=True)
class StageTiming:
    stage: str
    median_s: float
    min_s: float
    max_s: float


def bench_stages(config: PipelineConfig, rgb8, repeats=20, backend=None):
    """Median wall time of each extraction stage on one image (after a warm-up run)."""
    backend = resolve_backend(backend)
    params = config.trace_params()
    kernel = preproc.gaussian_kernel(config.kernel_size, config.kernel_sigma)
    state = {}

    def stage_preproc():
        img = preproc.ImagePlanes.from_rgb8(rgb8)
        state["hsv"] = preproc.hsv_stats(preproc.rgb_to_hsv(img))
        state["ycc"] = preproc.lowpass(preproc.rgb_to_ycbcr(img), kernel)

    def stage_trace():
        state["sinos"] = [trace_transform(p, params, backend=backend).values for p in state["ycc"].planes]

    def stage_dct():
        state["dct"] = [descriptor.dct2(s) for s in state["sinos"]]

    def stage_compress():
        ch = [descriptor.compress_channel(c) for c in state["dct"]]
        descriptor.assemble_descriptor(ch, state["hsv"], config.keep)

    stages = [("preproc", stage_preproc), ("trace", stage_trace), ("dct", stage_dct),
              ("compress", stage_compress)]
    for _, fn in stages:  # warm-up, also compiles numba kernels
        fn()
    out = []
    for name, fn in stages:
        t = _time(fn, repeats)
        out.append(StageTiming(name, statistics.median(t), min(t), max(t)))
    return out


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    values: list
    work: list  # n_phi * n_rho * n_xi at each point
    median_s: list
    slope: float
    intercept: float
    r2: float


def linear_fit(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid ** 2) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), float(intercept), float(r2)


def sweep(parameter, values, base: TraceParams, plane, repeats=7, backend=None) -> SweepResult:
    """Time the trace transform while one sampling parameter varies.

    ``parameter`` is ``n_xi``, ``n_phi``, ``n_rho`` or ``n_phi_n_rho`` (square
    grid, both set to the value). Times are regressed on the sample count.
    """
    backend = resolve_backend(backend)
    plane = np.ascontiguousarray(plane, dtype=np.float64)
    grids = []
    for v in values:
        if parameter == "n_phi_n_rho":
            grids.append(TraceParams(v, v, base.n_xi, base.phi_range, base.rho_range,
                                     base.functional, base.q, base.r, base.sampling))
        elif parameter in ("n_xi", "n_phi", "n_rho"):
            kw = {f: getattr(base, f) for f in ("n_phi", "n_rho", "n_xi", "phi_range", "rho_range",
                                                "functional", "q", "r", "sampling")}
            kw[parameter] = v
            grids.append(TraceParams(**kw))
        else:
            raise ValueError(f"unknown sweep parameter {parameter!r}")
    trace_transform(plane, grids[0], backend=backend)  # compile before timing
    medians = [statistics.median(_time(lambda p=p: trace_transform(plane, p, backend=backend), repeats))
               for p in grids]
    work = [p.n_samples for p in grids]
    slope, intercept, r2 = linear_fit(work, medians)
    return SweepResult(parameter, list(values), work, medians, slope, intercept, r2)


def format_stages(timings):
    lines = [f"{'stage':<10} {'median ms':>10} {'min ms':>10} {'max ms':>10}"]
    for t in timings:
        lines.append(f"{t.stage:<10} {t.median_s * 1e3:>10.3f} {t.min_s * 1e3:>10.3f} {t.max_s * 1e3:>10.3f}")
    total = sum(t.median_s for t in timings)
    lines.append(f"{'total':<10} {total * 1e3:>10.3f}")
    return "\n".join(lines)


def format_sweep(res: SweepResult):
    lines = [f"{res.parameter:>12} {'samples':>12} {'median ms':>10}"]
    for v, w, t in zip(res.values, res.work, res.median_s):
        lines.append(f"{v:>12} {w:>12} {t * 1e3:>10.3f}")
    lines.append(f"linear fit vs samples: slope={res.slope * 1e9:.3f} ns/sample, R^2={res.r2:.4f}")
    return "\n".join(lines)


def analyze_mask(rows, width, height, backend=None):
    """Coverage, mean and variance of the contribution mask for each ``(n_phi, n_rho, n_xi)``."""
    out = []
    for n_phi, n_rho, n_xi in rows:
        m = mask_metrics(contribution_mask(TraceParams(n_phi, n_rho, n_xi), width, height, backend=backend))
        out.append(((n_phi, n_rho, n_xi), m))
    return out
