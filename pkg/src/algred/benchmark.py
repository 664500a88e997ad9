"""Throughput comparison of the compiled and pure-python backends.

Run as `python -m algred.benchmark [--frames N]`.  Reports reductions and
decoded frames per second for representative schemes on each available
backend.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from . import _backend
from .hyperbolic import random_sl2
from .sim_engine import get_consts, sample_channel


def _time(fn, *args):
    t0 = time.perf_counter()
    fn(*args)
    return time.perf_counter() - t0


def run(frames: int = 50_000) -> None:
    consts = get_consts(4)
    backends = [("python", _backend.get_backend("python"))]
    if _backend.HAVE_COMPILED:
        backends.append(("compiled", _backend.get_backend("compiled")))

    rng = np.random.default_rng(0)
    h1 = random_sl2(rng, frames)
    sym = rng.integers(0, 4, size=(frames, 4))
    h = sample_channel(rng, frames)
    w = sample_channel(rng, frames)

    jobs = [("reduce", None, None),
            ("ar-zf+mmse", 0, True),
            ("ar-zfdfe+mmse", 1, True),
            ("lll-zf+mmse", 2, True),
            ("ml", 4, False)]
    print(f"{'kernel':15s}" + "".join(f"{name:>15s}" for name, _ in backends))
    for label, scheme, mmse in jobs:
        cells = []
        for _, be in backends:
            n = frames
            if be.BACKEND_NAME == "python" and label.startswith("lll"):
                n = max(frames // 50, 100)  # fallback LLL is slow
            if label == "reduce":
                dt = _time(be.reduce_batch, h1[:n], consts.gmats, consts.gimgs,
                           consts.g_t, consts.g_tinv, consts.max_steps)
            else:
                dt = _time(be.run_frames, scheme, mmse, 0.2, sym[:n], h[:n],
                           w[:n], consts)
            cells.append(f"{n / dt:>13,.0f}/s")
        print(f"{label:15s}" + "".join(f"{c:>15s}" for c in cells))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--frames", type=int, default=50_000)
    args = ap.parse_args()
    run(args.frames)


if __name__ == "__main__":
    main()
