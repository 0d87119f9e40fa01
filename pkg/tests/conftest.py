import numpy as np
import pytest
from PIL import Image

NATURAL_SOURCES = ("astronaut", "chelsea", "coffee", "rocket", "hubble_deep_field", "retina",
                   "immunohistochemistry")
CROPS_PER_SOURCE = 8
CROP_W, CROP_H = 384, 256


@pytest.fixture(scope="session")
def natural_crops():
    """56 seeded 384x256 RGB crops of the colour photographs bundled with scikit-image."""
    skdata = pytest.importorskip("skimage.data")
    rng = np.random.default_rng(2024)
    crops = []
    for name in NATURAL_SOURCES:
        img = getattr(skdata, name)()[..., :3]
        h, w = img.shape[:2]
        for _ in range(CROPS_PER_SOURCE):
            y = int(rng.integers(0, h - CROP_H + 1))
            x = int(rng.integers(0, w - CROP_W + 1))
            crops.append(np.ascontiguousarray(img[y:y + CROP_H, x:x + CROP_W]))
    return crops


@pytest.fixture(scope="session")
def natural_sinograms(natural_crops):
    """Default-configuration Y/Cb/Cr sinogram values (71x71) of every natural crop."""
    from tracefeat.pipeline import PipelineConfig
    from tracefeat.pipeline.features import channel_sinograms

    config = PipelineConfig()
    out = []
    for rgb in natural_crops:
        sinos, _ = channel_sinograms(rgb, config)
        out.append([s.values for s in sinos])
    return out


def blob_image(label, seed, size=24):
    """Small RGB image whose dominant hue depends on ``label``; noise varies with ``seed``."""
    rng = np.random.default_rng(seed)
    base = np.zeros((size, size, 3))
    base[..., label % 3] = 0.8
    base[size // 4:3 * size // 4, size // 4:3 * size // 4, (label + 1) % 3] = 0.6
    img = np.clip(base + rng.normal(0, 0.05, base.shape), 0, 1)
    return (img * 255).round().astype(np.uint8)


def write_corpus(root, n_classes=2, per_class=3, size=24, fmt="png"):
    """Class-per-directory corpus of blob images; returns the root path."""
    root.mkdir(parents=True, exist_ok=True)
    for c in range(n_classes):
        d = root / f"class{c}"
        d.mkdir(exist_ok=True)
        for i in range(per_class):
            Image.fromarray(blob_image(c, 100 * c + i, size)).save(d / f"img{i:02d}.{fmt}")
    return root


@pytest.fixture
def small_corpus(tmp_path):
    return write_corpus(tmp_path / "corpus")
