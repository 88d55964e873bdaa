"""Sup-norm of eigenvectors vs n, against the Gaussian extreme-value scale 4 log(n)/n.

Prints the raw power-law slope and the local slope the extreme-value
scale predicts over the same sizes.
"""

import argparse

import numpy as np

from regwave.graphs import sample_regular_graph
from regwave.spectral import eigendecompose


def main():
    p = argparse.ArgumentParser()
    p.add_argument("--d", type=int, default=3)
    p.add_argument("--max-exp", type=int, default=12)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--seed", type=int, default=100)
    args = p.parse_args()
    sizes = [2**k for k in range(8, args.max_exp + 1)]
    sup = []
    for n in sizes:
        vals = []
        for s in range(args.reps):
            g = sample_regular_graph(n, args.d, np.random.default_rng(args.seed + s))
            vals.append(np.max(eigendecompose(g).eigenvectors ** 2))
        sup.append(np.mean(vals))
        print(f"n={n:5d}  mean max u^2 = {sup[-1]:.5f}  n*max/(4 log n) = {sup[-1] * n / (4 * np.log(n)):.3f}", flush=True)
    n = np.array(sizes, dtype=float)
    slope = np.polyfit(np.log(n), np.log(sup), 1)[0]
    ref = np.polyfit(np.log(n), np.log(4 * np.log(n) / n), 1)[0]
    print(f"fitted slope {slope:.3f}; extreme-value scale slope {ref:.3f}")


if __name__ == "__main__":
    main()
