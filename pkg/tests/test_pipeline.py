import csv
import logging
import subprocess
import sys

import numpy as np
import pytest

from tracefeat.cli import main
from tracefeat.errors import ContractError, DataError
from tracefeat.pipeline import (DEFAULT_KEEP, PipelineConfig, cache_to_dataset, extract_features,
                                image_descriptor, ingest, read_cache, run_evaluation)
from tracefeat.pipeline.bench import (MASK_ROWS, analyze_mask, bench_stages, format_stages, linear_fit,
                                      sweep, synthetic_image)
from tracefeat.pipeline.config import parse_keep
from tracefeat.pipeline.features import channel_sinograms, feature_names
from tracefeat.trace import TraceParams, contribution_mask, mask_metrics

from .conftest import blob_image, write_corpus

SMALL = PipelineConfig(n_phi=12, n_rho=12, n_xi=30, keep=None, classifier="gnb", folds=3, threads=1)
SMALL_ARGS = ["--nphi", "12", "--nrho", "12", "--nxi", "30", "--keep", "full", "--classifier", "gnb",
              "--folds", "3", "--threads", "1"]


# ---------------------------------------------------------------- configuration


def test_config_round_trip(tmp_path):
    cfg = PipelineConfig(n_phi=33, q=1.5, keep=(10, 4, 4), classifier="gnb", seed=7, cache="x/f.csv")
    text = cfg.to_text()
    assert PipelineConfig.from_text(text) == cfg
    assert PipelineConfig.from_text(text).to_text() == text
    full = cfg.replace(keep=None)
    assert PipelineConfig.from_text(full.to_text()).keep is None
    (tmp_path / "c.txt").write_text("# comment\nn_phi = 20  # trailing\n\nkeep = 4,2,2\n")
    loaded = PipelineConfig.load(tmp_path / "c.txt")
    assert loaded.n_phi == 20 and loaded.keep == (4, 2, 2) and loaded.n_rho == 71


@pytest.mark.parametrize("text", ["bogus = 1", "n_phi 3", "n_phi = x", "n_phi = 3", "keep = 1,2",
                                  "classifier = tree", "folds = 1"])
def test_config_rejects(text):
    with pytest.raises(ContractError):
        PipelineConfig.from_text(text)


def test_feature_hash_tracks_feature_fields():
    base = PipelineConfig()
    assert base.feature_hash() == PipelineConfig().feature_hash()
    assert base.replace(seed=5, folds=4, classifier="gnb").feature_hash() == base.feature_hash()
    assert base.replace(n_xi=250).feature_hash() != base.feature_hash()
    assert base.replace(keep=None).feature_hash() != base.feature_hash()
    assert parse_keep("FULL") is None and parse_keep("2,2,2") == (2, 2, 2)


# ---------------------------------------------------------------- ingestion


def test_ingest(small_corpus):
    m = ingest(small_corpus)
    assert len(m) == 6 and m.class_names == ["class0", "class1"]
    assert m.class_counts() == {"class0": 3, "class1": 3}
    assert m.entries[0] == ("class0/img00.png", "class0")
    assert m.entries == sorted(m.entries, key=lambda e: (e[1], e[0]))


def test_ingest_skips_corrupt(tmp_path, caplog):
    root = write_corpus(tmp_path / "c", n_classes=1, per_class=4)
    (root / "class0" / "broken.jpg").write_bytes(b"not an image at all")
    (root / "class0" / "notes.txt").write_text("ignored")
    with caplog.at_level(logging.WARNING):
        m = ingest(root)
    assert len(m) == 4 and len(m.skipped) == 1
    warnings = [r for r in caplog.records if r.levelno == logging.WARNING]
    assert len(warnings) == 1 and "broken.jpg" in warnings[0].getMessage()


def test_ingest_errors(tmp_path):
    with pytest.raises(DataError):
        ingest(tmp_path / "missing")
    (tmp_path / "empty" / "a").mkdir(parents=True)
    with pytest.raises(DataError):
        ingest(tmp_path / "empty")


# ---------------------------------------------------------------- extraction


def test_dimensions_at_reference_resolution():
    cfg = PipelineConfig()
    rgb = synthetic_image(48, 32, 0)
    sinos, _ = channel_sinograms(rgb, cfg)
    assert sum(s.values.size for s in sinos) == 15_123
    assert len(image_descriptor(rgb, cfg.replace(keep=None))) == 606
    assert len(image_descriptor(rgb, cfg)) == 224 and cfg.keep == DEFAULT_KEEP


def test_extract_columns_and_idempotence(small_corpus, tmp_path):
    cache = tmp_path / "f.csv"
    m = ingest(small_corpus)
    res = extract_features(m, SMALL, cache)
    assert (res.computed, res.reused, res.failed, res.written) == (6, 0, [], True)
    config_hash, names, rows = read_cache(cache)
    assert config_hash == SMALL.feature_hash() and names == feature_names(SMALL)
    assert len(names) == 17 * 2 * 3 and len(rows) == 6
    assert [r[-1] for r in rows] == ["class0"] * 3 + ["class1"] * 3
    before = cache.read_bytes()
    mtime = cache.stat().st_mtime_ns
    again = extract_features(m, SMALL, cache)
    assert (again.computed, again.reused, again.written) == (0, 6, False)
    assert cache.read_bytes() == before and cache.stat().st_mtime_ns == mtime
    data = cache_to_dataset(cache)
    assert data.X.shape == (6, 102) and data.class_names == ["class0", "class1"]


def test_extract_row_matches_direct_descriptor(small_corpus, tmp_path):
    cache = tmp_path / "f.csv"
    extract_features(ingest(small_corpus), SMALL.replace(keep=(4, 2, 2)), cache)
    _, _, rows = read_cache(cache)
    direct = image_descriptor(blob_image(0, 0), SMALL.replace(keep=(4, 2, 2))).values
    np.testing.assert_array_equal([float(v) for v in rows[0][2:-1]], direct)


def test_extract_only_new_images(small_corpus, tmp_path):
    cache = tmp_path / "f.csv"
    extract_features(ingest(small_corpus), SMALL, cache)
    from PIL import Image

    Image.fromarray(blob_image(1, 999)).save(small_corpus / "class1" / "img99.png")
    res = extract_features(ingest(small_corpus), SMALL, cache)
    assert (res.computed, res.reused) == (1, 6)


def test_extract_config_mismatch(small_corpus, tmp_path):
    cache = tmp_path / "f.csv"
    m = ingest(small_corpus)
    extract_features(m, SMALL, cache)
    with pytest.raises(DataError, match="different configuration"):
        extract_features(m, SMALL.replace(n_xi=31), cache)
    res = extract_features(m, SMALL.replace(n_xi=31), cache, force=True)
    assert res.computed == 6


def test_extract_threads_do_not_change_output(small_corpus, tmp_path):
    m = ingest(small_corpus)
    extract_features(m, SMALL, tmp_path / "a.csv")
    extract_features(m, SMALL.replace(threads=4), tmp_path / "b.csv")
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_extract_failure_handling(small_corpus, tmp_path, monkeypatch):
    from tracefeat.pipeline import features

    real = features.load_rgb

    def flaky(path):
        if path.name == "img01.png":
            raise OSError("disk gremlin")
        return real(path)

    monkeypatch.setattr(features, "load_rgb", flaky)
    m = ingest(small_corpus)
    res = extract_features(m, SMALL, tmp_path / "f.csv")
    assert len(res.failed) == 2 and res.computed == 4
    with pytest.raises(OSError):
        extract_features(m, SMALL, tmp_path / "g.csv", strict=True)


def test_bad_cache_file(tmp_path):
    (tmp_path / "bad.csv").write_text("a,b\n1,2\n")
    with pytest.raises(DataError):
        cache_to_dataset(tmp_path / "bad.csv")
    with pytest.raises(DataError):
        cache_to_dataset(tmp_path / "nope.csv")


# ---------------------------------------------------------------- evaluation


def test_run_evaluation(tmp_path):
    root = write_corpus(tmp_path / "c", n_classes=3, per_class=6)
    cache = tmp_path / "f.csv"
    extract_features(ingest(root), SMALL, cache)
    rep = run_evaluation(cache, SMALL, tmp_path / "out", fss=True)
    assert rep.accuracy == 1.0
    np.testing.assert_array_equal(rep.confusion.counts, np.diag([6, 6, 6]))
    assert rep.edges == []
    assert set(rep.files) == {"confusion", "metrics", "graph_dot", "graph_edges", "folds", "fss"}
    for path in rep.files.values():
        assert path.exists()
    with open(rep.files["folds"]) as fh:
        folds = list(csv.DictReader(fh))
    assert len(folds) == 18 and {f["fold"] for f in folds} == {"0", "1", "2"}
    assert rep.fss.selected and rep.attributes == [rep.fss.attribute_names[a] for a in rep.fss.selected]


def test_run_evaluation_rejects_degenerate(tmp_path):
    root = write_corpus(tmp_path / "one", n_classes=1, per_class=4)
    extract_features(ingest(root), SMALL, tmp_path / "one.csv")
    with pytest.raises(DataError, match="at least 2 classes"):
        run_evaluation(tmp_path / "one.csv", SMALL, tmp_path / "o1")
    root = write_corpus(tmp_path / "single", n_classes=2, per_class=3)
    for p in sorted((root / "class1").iterdir())[1:]:
        p.unlink()
    extract_features(ingest(root), SMALL, tmp_path / "single.csv")
    with pytest.raises(DataError, match="single instance"):
        run_evaluation(tmp_path / "single.csv", SMALL, tmp_path / "o2")


# ---------------------------------------------------------------- bench and mask analysis


def test_bench_trivial_config():
    cfg = PipelineConfig(n_phi=5, n_rho=1, n_xi=2, keep=None)
    timings = bench_stages(cfg, synthetic_image(8, 8, 0), repeats=20)
    assert [t.stage for t in timings] == ["preproc", "trace", "dct", "compress"]
    assert all(0 <= t.min_s <= t.median_s <= t.max_s < 1 for t in timings)
    assert "total" in format_stages(timings)


def test_sweep_and_fit():
    slope, intercept, r2 = linear_fit([1, 2, 3], [3, 5, 7])
    assert (slope, intercept, r2) == pytest.approx((2, 1, 1))
    plane = synthetic_image(32, 32, 1)[..., 0] / 255
    res = sweep("n_xi", [10, 20, 30], TraceParams(8, 8, 10), plane, repeats=2)
    assert res.work == [640, 1280, 1920] and len(res.median_s) == 3
    with pytest.raises(ValueError):
        sweep("n_bogus", [1], TraceParams(), plane)


def test_analyze_mask_matches_direct():
    rows = analyze_mask([(5, 3, 9)], 3, 3)
    assert rows[0][0] == (5, 3, 9)
    assert rows[0][1] == mask_metrics(contribution_mask(TraceParams(5, 3, 9), 3, 3))
    assert len(MASK_ROWS) == 16


# ---------------------------------------------------------------- CLI


def run_cli(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_cli_workflow(tmp_path, capsys):
    corpus = write_corpus(tmp_path / "c", n_classes=3, per_class=6)
    cache = tmp_path / "f.csv"
    code, out, _ = run_cli(["ingest", corpus, "--manifest", tmp_path / "m.csv"], capsys)
    assert code == 0 and "18 images, 3 classes, 0 skipped" in out
    assert (tmp_path / "m.csv").read_text().splitlines()[1] == "class0/img00.png,class0"

    code, out, _ = run_cli(["extract", corpus, *SMALL_ARGS, "--cache", cache], capsys)
    assert code == 0 and "18 extracted, 0 reused" in out
    code, out, _ = run_cli(["extract", corpus, *SMALL_ARGS, "--cache", cache], capsys)
    assert code == 0 and "0 extracted, 18 reused" in out and "(unchanged)" in out

    code, out, _ = run_cli(["evaluate", *SMALL_ARGS, "--cache", cache, "--out", tmp_path / "rep"], capsys)
    assert code == 0 and out.startswith("accuracy 1.0000")
    code, out, _ = run_cli(["fss", *SMALL_ARGS, "--cache", cache, "--out", tmp_path / "rep2",
                            "--patience", "1"], capsys)
    assert code == 0 and "step 1:" in out and (tmp_path / "rep2" / "fss.csv").exists()

    code, out, _ = run_cli(["export-graph", tmp_path / "rep" / "confusion.csv"], capsys)
    assert code == 0 and out.startswith("graph misclassification {")
    code, out, _ = run_cli(["export-graph", tmp_path / "rep" / "confusion.csv", "--format", "edges",
                            "--out", tmp_path / "e.csv"], capsys)
    assert code == 0 and (tmp_path / "e.csv").read_text() == "source,target,weight\n"


def test_cli_config_file(small_corpus, tmp_path, capsys):
    cfg_file = tmp_path / "cfg.txt"
    cfg_file.write_text(SMALL.replace(cache=str(tmp_path / "f.csv")).to_text())
    code, _, _ = run_cli(["extract", small_corpus, "--config", cfg_file], capsys)
    assert code == 0
    assert read_cache(tmp_path / "f.csv")[0] == SMALL.feature_hash()
    # a flag overrides the file: different n_xi means a different feature hash
    code, _, err = run_cli(["extract", small_corpus, "--config", cfg_file, "--nxi", "31"], capsys)
    assert code == 2 and "different configuration" in err


def test_cli_mask_and_bench(capsys):
    code, out, _ = run_cli(["mask", "--width", 3, "--height", 3, "--row", "5,3,9"], capsys)
    assert code == 0 and out.splitlines()[1].split() == ["5", "3", "9", "100.00", "15.00", "32.00"]
    code, out, _ = run_cli(["bench", "--nphi", 5, "--nrho", 1, "--nxi", 2, "--keep", "full",
                            "--width", 8, "--height", 8, "--repeats", 2, "--backend", "numpy"], capsys)
    assert code == 0 and "trace" in out and "total" in out
    code, out, _ = run_cli(["bench", "--nphi", 8, "--nrho", 8, "--width", 16, "--height", 16,
                            "--sweep", "n_xi", "--values", "5,10,15", "--repeats", 1], capsys)
    assert code == 0 and "R^2=" in out


@pytest.mark.parametrize("args, code", [
    ([], 1),
    (["frobnicate"], 1),
    (["mask", "--row", "1,2"], 1),
    (["extract", "ROOT", "--nphi", "3"], 1),       # n_phi below the minimum: contract violation
    (["extract", "ROOT", "--keep", "1,2"], 1),
    (["ingest", "MISSING"], 2),
    (["export-graph", "MISSING"], 2),
    (["evaluate", "--cache", "MISSING"], 2),
])
def test_cli_exit_codes(args, code, small_corpus, tmp_path, capsys):
    args = [str(small_corpus) if a == "ROOT" else str(tmp_path / "nope") if a == "MISSING" else a
            for a in args]
    if code == 1 and not args:
        with pytest.raises(SystemExit) as exc:
            main(args)
        assert exc.value.code == 1
        return
    try:
        got = main(args)
    except SystemExit as exc:
        got = exc.code
    assert got == code


def test_cli_bad_confusion_csv(tmp_path, capsys):
    (tmp_path / "cm.csv").write_text("x\n")
    code, _, err = run_cli(["export-graph", tmp_path / "cm.csv"], capsys)
    assert code == 2 and "data error" in err


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "tracefeat", "mask", "--width", "3", "--height", "3",
                          "--row", "5,3,9", "--backend", "numpy"], capture_output=True, text=True)
    assert out.returncode == 0 and "% pixels used" in out.stdout
    bad = subprocess.run([sys.executable, "-m", "tracefeat", "mask", "--row", "x"],
                         capture_output=True, text=True)
    assert bad.returncode == 1
