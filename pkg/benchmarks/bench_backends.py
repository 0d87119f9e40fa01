"""Compare the numba and numpy trace kernels.

    python benchmarks/bench_backends.py [--repeats 5] [--size 384x256]

Without numba only the numpy rows are printed.
"""
import argparse
import statistics

from tracefeat import preproc
from tracefeat._accel import BACKENDS, HAVE_NUMBA
from tracefeat.pipeline import PipelineConfig
from tracefeat.pipeline.bench import _time, synthetic_image
from tracefeat.trace import TraceParams, contribution_mask, trace_transform


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--size", default="384x256", help="WIDTHxHEIGHT of the synthetic image")
    args = ap.parse_args()
    w, h = (int(v) for v in args.size.lower().split("x"))

    cfg = PipelineConfig()
    params = cfg.trace_params()
    img = preproc.ImagePlanes.from_rgb8(synthetic_image(w, h))
    planes = preproc.rgb_to_ycbcr(img).planes
    mask_params = TraceParams(100, 100, 185)
    backends = BACKENDS if HAVE_NUMBA else ("numpy",)

    jobs = {
        "trace (3 channels)": lambda b: [trace_transform(p, params, backend=b) for p in planes],
        "mask 100x100x185": lambda b: contribution_mask(mask_params, w, h, backend=b),
    }
    print(f"image {w}x{h}, grid {params.n_phi}x{params.n_rho}x{params.n_xi}, repeats {args.repeats}")
    print(f"{'job':<20} {'backend':<8} {'median ms':>10} {'min ms':>10}")
    medians = {}
    for name, job in jobs.items():
        for b in backends:
            job(b)  # warm-up and compile
            t = _time(lambda: job(b), args.repeats)
            medians[name, b] = statistics.median(t)
            print(f"{name:<20} {b:<8} {medians[name, b] * 1e3:>10.2f} {min(t) * 1e3:>10.2f}")
    if HAVE_NUMBA:
        for name in jobs:
            print(f"{name}: numba speedup {medians[name, 'numpy'] / medians[name, 'numba']:.1f}x")


if __name__ == "__main__":
    main()
