"""Line-sampling kernels shared by the trace transform and the contribution mask.

Geometry: image centre at the origin, x grows with the column index and y with
the row index, the raster occupies [-W/2, W/2] x [-H/2, H/2]. A line with
normal angle phi and signed distance rho is x cos(phi) + y sin(phi) = rho,
parametrised as p(t) = rho * (cos, sin) + t * (-sin, cos). Each line is clipped
to the raster and sampled at ``n_xi`` chord midpoints, t_k = t0 + (k + 1/2) dt
with dt = (t1 - t0) / n_xi.

Every kernel has a numba twin and a numpy twin that perform the same float
operations; tests hold them to agree to ~1e-12.
"""
import math

import numpy as np

from ._accel import njit, prange

RADON = 0
IF2 = 1

BILINEAR = 0
NEAREST = 1

# Lines shorter than this (tangent to a corner) are treated as missing the raster.
EPS = 1e-12

# Upper bound on samples materialised at once by the numpy path.
_CHUNK_SAMPLES = 1 << 21


# ---------------------------------------------------------------- numpy path


def chord_bounds(cos_phi, sin_phi, rho, half_w, half_h):
    """Parametric interval [t0, t1] of each line inside the raster.

    Arguments broadcast against each other. Returns ``(t0, t1, hit)``; entries
    where ``hit`` is False have t0 = t1 = 0.
    """
    cos_phi, sin_phi, rho = np.broadcast_arrays(
        np.asarray(cos_phi, float), np.asarray(sin_phi, float), np.asarray(rho, float)
    )
    lo = np.full(cos_phi.shape, -np.inf)
    hi = np.full(cos_phi.shape, np.inf)
    for p, d, h in ((rho * cos_phi, -sin_phi, half_w), (rho * sin_phi, cos_phi, half_h)):
        flat = np.abs(d) < EPS
        safe = np.where(flat, 1.0, d)
        a = (-h - p) / safe
        b = (h - p) / safe
        inside = np.abs(p) <= h + EPS
        lo = np.where(flat, np.where(inside, lo, np.inf), np.maximum(lo, np.minimum(a, b)))
        hi = np.where(flat, np.where(inside, hi, -np.inf), np.minimum(hi, np.maximum(a, b)))
    hit = (hi - lo) > EPS
    return np.where(hit, lo, 0.0), np.where(hit, hi, 0.0), hit


def _points_numpy(cphi, sphi, rhos, n_xi, half_w, half_h):
    c = cphi[:, None]
    s = sphi[:, None]
    r = rhos[None, :]
    t0, t1, hit = chord_bounds(c, s, r, half_w, half_h)
    dt = (t1 - t0) / n_xi
    k = np.arange(n_xi, dtype=float) + 0.5
    t = t0[..., None] + k * dt[..., None]
    x = (r * c)[..., None] - t * s[..., None]
    y = (r * s)[..., None] + t * c[..., None]
    return x + half_w, y + half_h, dt, hit


def _bilinear_numpy(plane, u, v):
    h, w = plane.shape
    fx = np.clip(u - 0.5, 0.0, w - 1.0)
    fy = np.clip(v - 0.5, 0.0, h - 1.0)
    x0 = np.minimum(np.floor(fx).astype(np.int64), max(w - 2, 0))
    y0 = np.minimum(np.floor(fy).astype(np.int64), max(h - 2, 0))
    ax = fx - x0
    ay = fy - y0
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    return ((1.0 - ax) * (1.0 - ay) * plane[y0, x0] + ax * (1.0 - ay) * plane[y0, x1]
            + (1.0 - ax) * ay * plane[y1, x0] + ax * ay * plane[y1, x1])


def _nearest_index_numpy(u, v, w, h):
    col = np.clip(np.floor(u).astype(np.int64), 0, w - 1)
    row = np.clip(np.floor(v).astype(np.int64), 0, h - 1)
    return row, col


def _chunks(n_phi, n_rho, n_xi):
    step = max(1, _CHUNK_SAMPLES // max(1, n_rho * n_xi))
    for start in range(0, n_phi, step):
        yield slice(start, min(n_phi, start + step))


def trace_numpy(plane, phis, rhos, n_xi, functional, q, r, interp):
    h, w = plane.shape
    cphi, sphi = np.cos(phis), np.sin(phis)
    out = np.zeros((len(phis), len(rhos)))
    for sl in _chunks(len(phis), len(rhos), n_xi):
        u, v, dt, hit = _points_numpy(cphi[sl], sphi[sl], rhos, n_xi, w / 2.0, h / 2.0)
        if interp == NEAREST:
            row, col = _nearest_index_numpy(u, v, w, h)
            vals = plane[row, col]
        else:
            vals = _bilinear_numpy(plane, u, v)
        if functional == RADON:
            res = vals.sum(axis=-1) * dt
        else:
            res = (np.abs(vals) ** q).sum(axis=-1) * dt
            res = res ** r
        out[sl] = np.where(hit, res, 0.0)
    return out


def mask_numpy(height, width, phis, rhos, n_xi):
    counts = np.zeros(height * width, dtype=np.int64)
    cphi, sphi = np.cos(phis), np.sin(phis)
    for sl in _chunks(len(phis), len(rhos), n_xi):
        u, v, _, hit = _points_numpy(cphi[sl], sphi[sl], rhos, n_xi, width / 2.0, height / 2.0)
        row, col = _nearest_index_numpy(u[hit], v[hit], width, height)
        counts += np.bincount((row * width + col).ravel(), minlength=height * width)
    return counts.reshape(height, width)


# ---------------------------------------------------------------- numba path


@njit
def _chord_scalar(c, s, rho, half_w, half_h):
    lo = -np.inf
    hi = np.inf
    for axis in range(2):
        if axis == 0:
            p = rho * c
            d = -s
            h = half_w
        else:
            p = rho * s
            d = c
            h = half_h
        if abs(d) < EPS:
            if abs(p) > h + EPS:
                return 0.0, 0.0, False
        else:
            a = (-h - p) / d
            b = (h - p) / d
            lo = max(lo, min(a, b))
            hi = min(hi, max(a, b))
    if hi - lo > EPS:
        return lo, hi, True
    return 0.0, 0.0, False


@njit
def _bilinear_scalar(plane, u, v):
    h, w = plane.shape
    fx = min(max(u - 0.5, 0.0), w - 1.0)
    fy = min(max(v - 0.5, 0.0), h - 1.0)
    x0 = min(int(math.floor(fx)), max(w - 2, 0))
    y0 = min(int(math.floor(fy)), max(h - 2, 0))
    ax = fx - x0
    ay = fy - y0
    x1 = min(x0 + 1, w - 1)
    y1 = min(y0 + 1, h - 1)
    return ((1.0 - ax) * (1.0 - ay) * plane[y0, x0] + ax * (1.0 - ay) * plane[y0, x1]
            + (1.0 - ax) * ay * plane[y1, x0] + ax * ay * plane[y1, x1])


@njit
def _nearest_scalar(u, v, w, h):
    col = min(max(int(math.floor(u)), 0), w - 1)
    row = min(max(int(math.floor(v)), 0), h - 1)
    return row, col


@njit
def _power(x, e):
    # generic pow is several times slower than these special cases
    if e == 2.0:
        return x * x
    if e == 1.0:
        return x
    if e == 0.5:
        return math.sqrt(x)
    return x ** e


@njit(parallel=True)
def trace_numba(plane, phis, rhos, n_xi, functional, q, r, interp):
    h, w = plane.shape
    half_w = w / 2.0
    half_h = h / 2.0
    n_phi = phis.shape[0]
    n_rho = rhos.shape[0]
    out = np.zeros((n_phi, n_rho))
    for i in prange(n_phi):
        c = math.cos(phis[i])
        s = math.sin(phis[i])
        for j in range(n_rho):
            rho = rhos[j]
            t0, t1, hit = _chord_scalar(c, s, rho, half_w, half_h)
            if not hit:
                continue
            dt = (t1 - t0) / n_xi
            px = rho * c
            py = rho * s
            acc = 0.0
            for k in range(n_xi):
                t = t0 + (k + 0.5) * dt
                u = (px - t * s) + half_w
                v = (py + t * c) + half_h
                if interp == NEAREST:
                    row, col = _nearest_scalar(u, v, w, h)
                    val = plane[row, col]
                else:
                    val = _bilinear_scalar(plane, u, v)
                if functional == RADON:
                    acc += val
                else:
                    acc += _power(abs(val), q)
            if functional == RADON:
                out[i, j] = acc * dt
            else:
                out[i, j] = _power(acc * dt, r)
    return out


@njit
def mask_numba(height, width, phis, rhos, n_xi):
    counts = np.zeros((height, width), dtype=np.int64)
    half_w = width / 2.0
    half_h = height / 2.0
    for i in range(phis.shape[0]):
        c = math.cos(phis[i])
        s = math.sin(phis[i])
        for j in range(rhos.shape[0]):
            rho = rhos[j]
            t0, t1, hit = _chord_scalar(c, s, rho, half_w, half_h)
            if not hit:
                continue
            dt = (t1 - t0) / n_xi
            px = rho * c
            py = rho * s
            for k in range(n_xi):
                t = t0 + (k + 0.5) * dt
                row, col = _nearest_scalar((px - t * s) + half_w, (py + t * c) + half_h, width, height)
                counts[row, col] += 1
    return counts
