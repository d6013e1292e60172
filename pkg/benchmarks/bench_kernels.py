"""Compare the numba and numpy kernels on edit distance and the maxent objective.

    python benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from textnorm import _accel


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def edit_pairs(rng, n=2000, maxlen=12, vocab=20):
    return [(rng.integers(0, vocab, rng.integers(0, maxlen)), rng.integers(0, vocab, rng.integers(0, maxlen)))
            for _ in range(n)]


def maxent_problem(rng, n_groups=3000, n_feats=5000, per_row=12):
    sizes = rng.integers(2, 8, n_groups)
    group_ptr = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    n_rows = int(group_ptr[-1])
    indptr = np.arange(0, (n_rows + 1) * per_row, per_row, dtype=np.int64)
    indices = rng.integers(0, n_feats, n_rows * per_row).astype(np.int64)
    data = np.ones(n_rows * per_row)
    row_ids = np.repeat(np.arange(n_rows), per_row)
    group_ids = np.repeat(np.arange(n_groups), sizes)
    good = np.zeros(n_rows, dtype=bool)
    good[group_ptr[:-1]] = True
    w = rng.normal(size=n_feats)
    return w, np.zeros(n_rows), indptr, indices, data, row_ids, group_ptr, group_ids, good


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    nb = _accel.numba_kernels()
    np_k = _accel.numpy_kernels
    if nb is None:
        print("numba not installed; only the numpy path is available")

    pairs = edit_pairs(rng)
    prob = maxent_problem(rng)
    rows = []
    for name, run in (
        ("edit_distance x2000", lambda k: [k["edit_distance"](a, b) for a, b in pairs]),
        ("maxent objective", lambda k: k["maxent"](*prob)),
    ):
        t_np, out_np = best_of(lambda: run(np_k), args.repeat)
        if nb is None:
            rows.append((name, t_np, float("nan"), "-"))
            continue
        run(nb)  # compile
        t_nb, out_nb = best_of(lambda: run(nb), args.repeat)
        if name.startswith("edit"):
            same = all(int(x) == int(y) for x, y in zip(out_np, out_nb))
        else:
            same = abs(out_np[0] - out_nb[0]) < 1e-8 * max(1.0, abs(out_np[0])) and np.allclose(out_np[1], out_nb[1])
        rows.append((name, t_np, t_nb, "yes" if same else "NO"))

    print(f"{'kernel':<22}{'numpy (s)':>12}{'numba (s)':>12}{'speedup':>10}  agree")
    for name, t_np, t_nb, same in rows:
        print(f"{name:<22}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>10.1f}  {same}")


if __name__ == "__main__":
    main()
