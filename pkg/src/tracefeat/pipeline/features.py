"""Per-image descriptor extraction and the CSV feature cache.

Cache layout::

    # tracefeat feature cache
    # config_hash=<16 hex digits>
    image,sha256,<attribute names...>,label
    <relative path>,<content digest>,<values...>,<class name>

Rows follow manifest order and floats are written with ``repr`` so identical
inputs give byte-identical files.
"""
from __future__ import annotations

import csv
import hashlib
import io
import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import descriptor, preproc
from .._accel import set_threads
from ..errors import DataError
from ..learn import Dataset
from ..trace import trace_transform
from .config import PipelineConfig
from .corpus import CorpusManifest, load_rgb

log = logging.getLogger(__name__)

MAGIC = "# tracefeat feature cache"


def channel_sinograms(rgb8, config: PipelineConfig, backend=None):
    """Low-passed Y, Cb, Cr sinograms plus HSV statistics of the unfiltered image."""
    img = preproc.ImagePlanes.from_rgb8(rgb8)
    hsv = preproc.hsv_stats(preproc.rgb_to_hsv(img))
    kernel = preproc.gaussian_kernel(config.kernel_size, config.kernel_sigma)
    ycc = preproc.lowpass(preproc.rgb_to_ycbcr(img), kernel)
    params = config.trace_params()
    sinos = [trace_transform(plane, params, channel_id=ch, backend=backend)
             for plane, ch in zip(ycc.planes, descriptor.CHANNELS)]
    return sinos, hsv


def image_descriptor(rgb8, config: PipelineConfig, backend=None) -> descriptor.DescriptorVector:
    sinos, hsv = channel_sinograms(rgb8, config, backend)
    channels = [descriptor.compress_channel(descriptor.dct2(s.values)) for s in sinos]
    return descriptor.assemble_descriptor(channels, hsv, config.keep)


def feature_names(config: PipelineConfig):
    return descriptor.attribute_names(config.n_phi, config.n_rho, config.keep)


def file_digest(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class ExtractResult:
    path: Path
    computed: int
    reused: int
    failed: list
    written: bool


def _read_cache_text(text):
    lines = text.splitlines()
    if len(lines) < 3 or lines[0] != MAGIC or not lines[1].startswith("# config_hash="):
        raise DataError("not a tracefeat feature cache (missing header)")
    config_hash = lines[1].split("=", 1)[1].strip()
    reader = csv.reader(lines[2:])
    header = next(reader)
    if header[:2] != ["image", "sha256"] or header[-1] != "label":
        raise DataError("feature cache header must be image,sha256,<attributes>,label")
    rows = [r for r in reader if r]
    for r in rows:
        if len(r) != len(header):
            raise DataError(f"feature cache row for {r[0]!r} has {len(r)} fields, expected {len(header)}")
    return config_hash, header[2:-1], rows


def read_cache(path):
    """Return ``(config_hash, attribute_names, rows)``; rows are raw string lists."""
    try:
        with open(path, newline="") as fh:
            return _read_cache_text(fh.read())
    except OSError as exc:
        raise DataError(f"cannot read feature cache {path}: {exc}")


def cache_to_dataset(path) -> Dataset:
    _, names, rows = read_cache(path)
    if not rows:
        raise DataError(f"feature cache {path} has no rows")
    labels = [r[-1] for r in rows]
    classes = sorted(set(labels))
    index = {c: i for i, c in enumerate(classes)}
    X = np.array([[float(v) for v in r[2:-1]] for r in rows], dtype=np.float64)
    return Dataset(X, np.array([index[l] for l in labels]), classes, names)


def _format_row(rel, digest, values, label):
    return [rel, digest] + [repr(float(v)) for v in values] + [label]


def extract_features(manifest: CorpusManifest, config: PipelineConfig, cache_path=None,
                     strict=False, backend=None, force=False) -> ExtractResult:
    """Extract descriptors for every manifest entry, reusing rows already in the cache.

    Rows are keyed by (relative path, content digest). A cache written under a
    different feature configuration is refused unless ``force`` is set.
    """
    cache_path = Path(cache_path or config.cache)
    config_hash = config.feature_hash()
    names = feature_names(config)

    cached = {}
    old_text = None
    if cache_path.exists():
        with open(cache_path, newline="") as fh:
            old_text = fh.read()
        old_hash, old_names, rows = _read_cache_text(old_text)
        if old_hash != config_hash or old_names != names:
            if not force:
                raise DataError(
                    f"{cache_path} was extracted with a different configuration "
                    f"(config_hash {old_hash}, now {config_hash}); delete it or re-run with --force")
            old_text = None
        else:
            cached = {(r[0], r[1]): r for r in rows}

    digests = [file_digest(manifest.path(rel)) for rel, _ in manifest.entries]
    todo = [i for i, (rel, _) in enumerate(manifest.entries) if (rel, digests[i]) not in cached]

    def work(i):
        rel, _ = manifest.entries[i]
        try:
            return i, image_descriptor(load_rgb(manifest.path(rel)), config, backend).values, None
        except Exception as exc:
            if strict:
                raise
            return i, None, exc

    results = {}
    failed = []
    threads = config.effective_threads()
    if todo:
        set_threads(threads)
        if threads > 1 and len(todo) > 1:
            with ThreadPoolExecutor(threads) as pool:
                outcomes = list(pool.map(work, todo))
        else:
            outcomes = [work(i) for i in todo]
        for i, values, exc in outcomes:
            rel = manifest.entries[i][0]
            if exc is not None:
                log.warning("feature extraction failed for %s: %s", rel, exc)
                failed.append((rel, str(exc)))
            else:
                results[i] = values

    buf = io.StringIO()
    buf.write(f"{MAGIC}\n# config_hash={config_hash}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["image", "sha256"] + names + ["label"])
    reused = 0
    for i, (rel, label) in enumerate(manifest.entries):
        key = (rel, digests[i])
        if key in cached:
            row = cached[key][:-1] + [label]
            reused += 1
        elif i in results:
            row = _format_row(rel, digests[i], results[i], label)
        else:
            continue
        w.writerow(row)
    text = buf.getvalue()

    written = text != old_text
    if written:
        cache_path.parent.mkdir(parents=True, exist_ok=True)
        tmp = cache_path.with_name(cache_path.name + ".tmp")
        with open(tmp, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, cache_path)
    return ExtractResult(cache_path, len(results), reused, failed, written)
