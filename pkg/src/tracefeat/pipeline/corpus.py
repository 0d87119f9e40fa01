from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from ..errors import DataError

log = logging.getLogger(__name__)

IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".ppm", ".pgm", ".pnm", ".bmp", ".tif", ".tiff"}


@dataclass
class CorpusManifest:
    root: Path
    entries: list  # (relative posix path, class label), sorted by (label, filename)
    skipped: list = field(default_factory=list)  # (relative path, reason)

    @property
    def class_names(self):
        return sorted({label for _, label in self.entries})

    def class_counts(self):
        counts = {c: 0 for c in self.class_names}
        for _, label in self.entries:
            counts[label] += 1
        return counts

    def __len__(self):
        return len(self.entries)

    def path(self, rel):
        return self.root / rel

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["image", "label"])
            w.writerows(self.entries)


def load_rgb(path):
    """Decode an image file into an ``(H, W, 3)`` uint8 array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def ingest(root) -> CorpusManifest:
    """Collect ``root/<class>/<image>`` files; undecodable images are warned about and skipped."""
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"corpus root {root} is not a directory")
    entries, skipped = [], []
    for class_dir in sorted(p for p in root.iterdir() if p.is_dir() and not p.name.startswith(".")):
        for f in sorted(class_dir.iterdir()):
            if not f.is_file() or f.name.startswith(".") or f.suffix.lower() not in IMAGE_SUFFIXES:
                continue
            rel = f.relative_to(root).as_posix()
            try:
                with Image.open(f) as im:
                    im.load()
            except Exception as exc:  # PIL raises a zoo of types for broken files
                log.warning("skipping undecodable image %s: %s", rel, exc)
                skipped.append((rel, str(exc)))
                continue
            entries.append((rel, class_dir.name))
    if not entries:
        raise DataError(f"no decodable images under {root} (expected one sub-directory per class)")
    return CorpusManifest(root=root, entries=entries, skipped=skipped)
