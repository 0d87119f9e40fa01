"""Frequency-domain compression of sinograms into (mean, kurtosis) descriptors.

A sinogram is taken to the DCT domain, its coefficients are grouped into bands
perpendicular to the main diagonal and each band collapses to its mean and
kurtosis. Three colour channels of such pairs, with the DC pair replaced by HSV
statistics and the high-frequency tail cut, form the descriptor.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import fft

from .errors import ContractError
from .preproc import HsvStats

CHANNELS = ("Y", "Cb", "Cr")
# HSV statistic substituted into each channel's DC pair
HSV_FOR_CHANNEL = {"Y": "v", "Cb": "h", "Cr": "s"}

N_FEATURES = 2  # (mu, k) per bin


def n_bins(n_phi, n_rho):
    return math.ceil(math.hypot(n_phi, n_rho))


def dct2(matrix):
    """Orthonormal 2D DCT-II."""
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or min(matrix.shape) < 1:
        raise ContractError(f"expected a non-empty 2D matrix, got shape {matrix.shape}")
    return fft.dctn(matrix, type=2, norm="ortho")


def bin_index(shape):
    """Bin of every coefficient: floor of its projection on the unit main-diagonal direction."""
    n1, n2 = shape
    k1, k2 = np.meshgrid(np.arange(n1), np.arange(n2), indexing="ij")
    return np.floor((k1 * n1 + k2 * n2) / math.hypot(n1, n2)).astype(np.int64)


@dataclass
class DiagonalBins:
    bins: list  # one 1D array of coefficients per bin, ascending bin order
    index: np.ndarray  # bin id of every coefficient

    @property
    def n_bins(self):
        return len(self.bins)


def diagonal_bins(coeffs) -> DiagonalBins:
    coeffs = np.asarray(coeffs, dtype=np.float64)
    idx = bin_index(coeffs.shape)
    total = n_bins(*coeffs.shape)
    flat_idx = idx.ravel()
    flat = coeffs.ravel()
    order = np.argsort(flat_idx, kind="stable")
    bounds = np.searchsorted(flat_idx[order], np.arange(total + 1))
    bins = [flat[order[bounds[b]:bounds[b + 1]]] for b in range(total)]
    return DiagonalBins(bins=bins, index=idx)


def mu_kurtosis(values):
    """Mean and (non-excess) kurtosis with population moments.

    A constant list has no defined kurtosis; it is reported as 0.
    """
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        raise ContractError("mu_kurtosis needs at least one value")
    mu = x.mean()
    d = x - mu
    m2 = np.mean(d * d)
    scale = np.abs(x).max()
    if m2 <= (1e-12 * scale) ** 2:
        return float(mu), 0.0
    m4 = np.mean(d ** 4)
    return float(mu), float(m4 / (m2 * m2))


def compress_channel(coeffs):
    """Interleaved ``[mu_0, k_0, mu_1, k_1, ...]``; empty trailing bins give (0, 0)."""
    out = []
    for b in diagonal_bins(coeffs).bins:
        out.extend(mu_kurtosis(b) if b.size else (0.0, 0.0))
    return np.array(out)


def attribute_names(n_phi, n_rho, keep=None):
    """Column names matching :func:`assemble_descriptor` output."""
    per_channel = n_bins(n_phi, n_rho) * N_FEATURES
    return names_for_keep((per_channel,) * 3 if keep is None else keep)


def names_for_keep(keep):
    names = []
    for ch, k in zip(CHANNELS, keep):
        hsv = HSV_FOR_CHANNEL[ch]
        for i in range(k):
            b, stat = divmod(i, 2)
            if b == 0:
                names.append(f"{ch}_hsv_{hsv}_{'mu' if stat == 0 else 'sigma'}")
            else:
                names.append(f"{ch}_b{b:03d}_{'mu' if stat == 0 else 'k'}")
    return names


@dataclass
class DescriptorVector:
    values: np.ndarray
    layout: tuple  # ((channel, kept values), ...)
    names: list = field(default_factory=list)
    label: Optional[int] = None

    def __len__(self):
        return len(self.values)


def assemble_descriptor(channels: Sequence, hsv: HsvStats, keep=None, label=None) -> DescriptorVector:
    """Substitute HSV (mu, sigma) into each channel's DC pair, truncate, concatenate Y|Cb|Cr."""
    if len(channels) != 3:
        raise ContractError(f"expected 3 compressed channels, got {len(channels)}")
    channels = [np.asarray(c, dtype=np.float64) for c in channels]
    keep = tuple(len(c) for c in channels) if keep is None else tuple(int(k) for k in keep)
    if len(keep) != 3:
        raise ContractError(f"expected 3 keep counts, got {keep}")
    parts = []
    for name, values, k in zip(CHANNELS, channels, keep):
        if k > len(values):
            raise ContractError(f"keep={k} exceeds the {len(values)} values of channel {name}")
        if k < 0 or k % 2:
            raise ContractError(f"keep counts must be even and non-negative, got {k} for {name}")
        hsv_key = HSV_FOR_CHANNEL[name]
        values = values.copy()
        if len(values) >= 2:
            values[0] = getattr(hsv, f"mu_{hsv_key}")
            values[1] = getattr(hsv, f"sigma_{hsv_key}")
        parts.append(values[:k])
    return DescriptorVector(
        values=np.concatenate(parts),
        layout=tuple(zip(CHANNELS, keep)),
        names=names_for_keep(keep),
        label=label,
    )


def full_length(n_phi, n_rho, n_channels=3, n_features=N_FEATURES):
    """Untruncated descriptor length, ``ceil(hypot(n_phi, n_rho)) * n_c * n_f``."""
    return n_bins(n_phi, n_rho) * n_channels * n_features


def reduction_factor(n_phi, n_rho, n_f=N_FEATURES):
    """How many sinogram cells each retained attribute stands for."""
    if min(n_phi, n_rho, n_f) <= 0:
        raise ContractError("arguments must be positive")
    return n_phi * n_rho / (math.hypot(n_phi, n_rho) * n_f)
