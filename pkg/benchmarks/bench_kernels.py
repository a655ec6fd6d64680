"""Compare the compiled kernels with the NumPy fallback.

Usage: python benchmarks/bench_kernels.py [--qubits 14] [--batch 64] [--repeat 5]

Prints the best-of-N time per call for each kernel and backend, then times a
short noisy digital-analog run end to end under each backend.
"""
import argparse
import time

import numpy as np

from daqsim import _kernels_py, kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def kernel_table(n, b, repeat):
    rng = np.random.default_rng(0)
    base = rng.normal(size=(b, 1 << n)) + 1j * rng.normal(size=(b, 1 << n))
    u = kernels._u8(np.array([[0, 1], [1, 0]], dtype=complex))
    qubits = np.arange(n, dtype=np.int64)
    us = np.tile(np.eye(2, dtype=complex).reshape(1, 4), (n, 1)).view(np.float64)
    idx = rng.integers(0, 16, 1 << n).astype(np.int32)
    rows = np.arange(b, dtype=np.int64)
    table = np.ones((b, 16), dtype=complex).view(np.float64)
    cases = {
        "apply_1q (q=n/2)": lambda m, s: m.apply_1q(s, n // 2, u),
        "apply_layer (all)": lambda m, s: m.apply_layer(s, qubits, us),
        "apply_cnot": lambda m, s: m.apply_cnot(s, 0, n - 1),
        "group_probs": lambda m, s: m.group_probs(s, rows, idx, 16),
        "scale_gather": lambda m, s: m.scale_gather(s, rows, idx, table),
    }
    impls = {"python": _kernels_py}
    if kernels.compiled_available():
        from daqsim import _kernels
        impls["compiled"] = _kernels
    print(f"kernels on {b} x 2^{n} amplitudes, best of {repeat}")
    print(f"{'kernel':<20}" + "".join(f"{k:>12}" for k in impls) + f"{'speedup':>10}")
    for name, fn in cases.items():
        res = {}
        for label, impl in impls.items():
            st = base.copy().view(np.float64)
            res[label] = best_of(lambda: fn(impl, st), repeat)
        line = f"{name:<20}" + "".join(f"{res[k] * 1e3:>10.2f}ms" for k in impls)
        if "compiled" in res:
            line += f"{res['python'] / res['compiled']:>9.1f}x"
        print(line)


def end_to_end(shots):
    from daqsim import compiler as cp
    from daqsim import device as dv
    from daqsim import model as md
    from daqsim import noise as nz

    d = dv.load_device("qx14-like")
    m = md.build_tfim(d)
    sched = cp.trotterize_da(m, d, 1.0, 3, initial="00000001111111")
    print(f"\n14-qubit noisy DA run, {shots} shots")
    for name in ("python", "compiled"):
        if name == "compiled" and not kernels.compiled_available():
            continue
        kernels.use(name)
        t = best_of(lambda: nz.run_trajectories(sched, d, n_runs=shots, master_seed=0), 1)
        print(f"{name:<10}{t:8.2f} s")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--qubits", type=int, default=14)
    p.add_argument("--batch", type=int, default=64)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--shots", type=int, default=256)
    args = p.parse_args()
    kernel_table(args.qubits, args.batch, args.repeat)
    end_to_end(args.shots)


if __name__ == "__main__":
    main()
