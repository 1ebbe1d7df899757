"""Time the compiled and numpy kernels on a fault campaign and an image round trip.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--size 256]
"""

import argparse
import time

from facsim import _backend
from facsim.dsp import AdderModel, FixedPointImage, round_trip
from facsim.faults import Sampled, enumerate_faults, run_campaign
from facsim.generators import build_fac, build_tmr_adder
from facsim.pgm import synthetic_corpus
from facsim.words import AdderSpec


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--size", type=int, default=256, help="image side for the round trip")
    args = ap.parse_args()

    circuit = build_fac(AdderSpec(8, 5))
    faults = enumerate_faults(circuit)
    tmr = build_tmr_adder(32)
    tmr_faults = enumerate_faults(tmr)
    image = FixedPointImage(synthetic_corpus(args.size)["scene"])
    adder = AdderModel.imprecise(10)
    workloads = {
        f"campaign fac-N8-L5 ({len(faults)} faults x 65536 vectors)": lambda: run_campaign(circuit, faults),
        f"campaign tmr-N32 ({len(tmr_faults)} faults x 256 vectors)":
            lambda: run_campaign(tmr, tmr_faults, Sampled(256, seed=1)),
        f"round trip {args.size}x{args.size} imprecise L=10": lambda: round_trip(image, adder),
    }
    backends = _backend.available()
    print(f"{'workload':<58}" + "".join(f"{b:>10}" for b in backends) + ("   speedup" if len(backends) > 1 else ""))
    for label, fn in workloads.items():
        row = []
        for b in backends:
            _backend.use(b)
            row.append(best_of(fn, args.repeat))
        line = f"{label:<58}" + "".join(f"{t:>9.3f}s" for t in row)
        if len(row) > 1:
            line += f"{row[0] / row[1]:>9.1f}x"
        print(line)


if __name__ == "__main__":
    main()
