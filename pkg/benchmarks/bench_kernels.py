"""Compare the compiled and pure-Python enumeration kernels.

    python3 benchmarks/bench_kernels.py [--count N] [--full33]
"""

import argparse
import time

from gridconf import kernels
from gridconf.grid_model import load_dataset
from gridconf.oracle import enumerate_optimal, kernel_inputs
from gridconf.reliability import assign_failure_rates


def time_range(fn, inputs, k, start, count):
    t0 = time.perf_counter()
    result = fn(*inputs.args(), k, start, count, 10, True)
    return time.perf_counter() - t0, result


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=50_000, help="combinations per range")
    ap.add_argument("--full33", action="store_true", help="also run the full 33-node enumeration on both backends")
    args = ap.parse_args(argv)

    if kernels.evaluate_range_compiled is None:
        print("compiled extension not available; only the Python backend can run")
    print(f"{'dataset':<8} {'backend':<8} {'combos':>9} {'seconds':>9} {'combos/s':>12}")
    for name in ("33", "69"):
        net = load_dataset(name)
        inputs = kernel_inputs(net, assign_failure_rates(net))
        start = 300_000 if name == "33" else 5_000_000
        results = {}
        for label, fn in (("cython", kernels.evaluate_range_compiled), ("python", kernels.evaluate_range_py)):
            if fn is None:
                continue
            secs, results[label] = time_range(fn, inputs, net.n_ties, start, args.count)
            print(f"{net.name:<8} {label:<8} {args.count:>9} {secs:>9.3f} {args.count / secs:>12.0f}")
        if len(results) == 2:
            assert results["cython"] == results["python"], "backends disagree"
            print(f"{net.name:<8} backends agree on {results['cython'][0]} feasible sets")

    if args.full33:
        net = load_dataset("33")
        model = assign_failure_rates(net)
        for use_python in (False, True):
            if not use_python and kernels.evaluate_range_compiled is None:
                continue
            rep = enumerate_optimal(net, model, use_python=use_python)
            print(f"full ieee33 ({rep.backend}): {rep.wall_time_s:.2f} s, best {rep.best_open_edges} acp {rep.best_acp:.6f}")


if __name__ == "__main__":
    main()
