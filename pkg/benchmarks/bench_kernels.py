"""Time the compiled and pure-Python kernel backends side by side.

    python3 benchmarks/bench_kernels.py [--batch 16] [--repeat 200] [--json]

Each row is the best-of-five mean time per call, in microseconds, for one
mini-batch at the default architecture shapes. The last rows time a full
forward/backward pass of the network and one training epoch.
"""

from __future__ import annotations

import argparse
import json
import sys
import timeit

import numpy as np

from dvlaccel.dataset import DatasetSplit, build_examples
from dvlaccel.nn import ArchitectureConfig, Network, available_backends, init_parameters
from dvlaccel.nn import _backend
from dvlaccel.simulator import DvlErrorModel, random_fleet, simulate_segment
from dvlaccel.training import TrainConfig, train


def kernel_cases(k, batch: int, rng: np.random.Generator) -> dict:
    arch = ArchitectureConfig()
    x = rng.normal(size=(batch, 3, arch.window))
    w = rng.normal(size=(arch.conv_filters, 3, arch.kernel))
    b = rng.normal(size=arch.conv_filters)
    y = k.conv1d_forward(x, w, b)
    dy = rng.normal(size=y.shape)
    pooled, idx = k.maxpool_forward(y, arch.pool)
    dpool = rng.normal(size=pooled.shape)

    H = arch.lstm_hidden
    seq = rng.normal(size=(batch, arch.steps, arch.conv_filters))
    W = rng.uniform(-0.2, 0.2, size=(4 * H, H + arch.conv_filters))
    bias = rng.uniform(-0.2, 0.2, size=4 * H)
    hs, cs, tc, gates = k.lstm_forward(seq, W, bias)
    dhs = rng.normal(size=hs.shape)
    return {
        "conv forward": lambda: k.conv1d_forward(x, w, b),
        "conv backward": lambda: k.conv1d_backward(x, w, dy),
        "pool forward": lambda: k.maxpool_forward(y, arch.pool),
        "pool backward": lambda: k.maxpool_backward(dpool, idx, y.shape[2]),
        "lstm forward": lambda: k.lstm_forward(seq, W, bias),
        "lstm backward": lambda: k.lstm_backward(dhs, seq, W, gates, cs, tc, hs),
    }


def model_cases(name: str, batch: int, rng: np.random.Generator) -> dict:
    arch = ArchitectureConfig()
    net = Network(init_parameters(arch, 0), name)
    x = rng.normal(size=(batch, 3, arch.window))
    t = rng.normal(size=(batch, 3))
    return {"network forward+backward": lambda: net.loss_and_grad(x, t)}


def epoch_case(name: str) -> dict:
    segs = [simulate_segment(p, DvlErrorModel(), 100, 1, seed=i, segment_id=f"b{i}") for i, p in enumerate(random_fleet(0, 2))]
    split = DatasetSplit(train=[e for s in segs for e in build_examples(s, 12)])
    cfg = TrainConfig(epochs=1, backend=name)
    return {f"training epoch ({len(split.train)} windows)": lambda: train(split, ArchitectureConfig(), cfg)}


def bench(fn, repeat: int) -> float:
    fn()
    return min(timeit.repeat(fn, number=repeat, repeat=5)) / repeat * 1e6


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--batch", type=int, default=16)
    parser.add_argument("--repeat", type=int, default=200)
    parser.add_argument("--json", action="store_true", help="print results as JSON")
    args = parser.parse_args(argv)

    backends = available_backends()
    results: dict[str, dict[str, float]] = {}
    for name in backends:
        k = _backend.get(name)
        cases = kernel_cases(k, args.batch, np.random.default_rng(0))
        cases |= model_cases(name, args.batch, np.random.default_rng(0))
        timings = {label: bench(fn, args.repeat) for label, fn in cases.items()}
        timings |= {label: bench(fn, 1) for label, fn in epoch_case(name).items()}
        results[name] = timings

    if args.json:
        json.dump({"batch": args.batch, "results": results}, sys.stdout, indent=2)
        print()
        return 0

    labels = list(results[backends[0]])
    width = max(map(len, labels))
    print(f"batch {args.batch}, microseconds per call")
    print(f"{'':{width}}" + "".join(f"{b:>12}" for b in backends) + ("     speedup" if len(backends) > 1 else ""))
    for label in labels:
        row = [results[b][label] for b in backends]
        line = f"{label:{width}}" + "".join(f"{v:12.1f}" for v in row)
        if len(backends) > 1:
            line += f"{row[0] / row[-1]:11.2f}x"
        print(line)
    if len(backends) == 1:
        print("compiled backend not built; only the pure-Python kernels were timed")
    return 0


if __name__ == "__main__":
    sys.exit(main())
