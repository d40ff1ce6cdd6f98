"""Benchmark the compiled kernels against the pure-Python fallback.

Two views: raw kernel throughput on representative shapes, and end-to-end
Q-learning training episodes/s.  Run from the repo root:

    python benchmarks/bench_kernels.py
"""

import os
import random
import subprocess
import sys
import time

import numpy as np

from dialoglab.policy import _kernels_py

try:
    from dialoglab.policy import _speedups
except ImportError:
    _speedups = None

N_ACTIONS, DIM, N_ACTIVE = 24, 68, 14  # toy 4-domain schema shapes
REPEATS = 20000


def bench_kernels(impl):
    rng = np.random.default_rng(0)
    weights = np.ascontiguousarray(rng.normal(size=(N_ACTIONS, DIM)))
    active = np.asarray(sorted(rng.choice(DIM, size=N_ACTIVE, replace=False)), dtype=np.intp)
    nxt = np.asarray(sorted(rng.choice(DIM, size=N_ACTIVE, replace=False)), dtype=np.intp)
    out = np.empty(N_ACTIONS)
    grad = np.zeros_like(weights)
    scratch = np.empty(N_ACTIONS)

    results = {}
    start = time.perf_counter()
    for _ in range(REPEATS):
        impl.q_values(weights, active, out)
    results["q_values"] = REPEATS / (time.perf_counter() - start)

    start = time.perf_counter()
    for _ in range(REPEATS):
        impl.td_update(weights, active, 3, -1.0, nxt, 0.95, 0.0, False)
    results["td_update"] = REPEATS / (time.perf_counter() - start)

    start = time.perf_counter()
    for _ in range(REPEATS):
        impl.softmax_probs(weights, active, scratch)
    results["softmax_probs"] = REPEATS / (time.perf_counter() - start)

    start = time.perf_counter()
    for _ in range(REPEATS):
        impl.policy_grad_accumulate(weights, grad, active, 3, 0.5, scratch)
    results["policy_grad_accumulate"] = REPEATS / (time.perf_counter() - start)
    return results


def bench_training_run(episodes=2000):
    """End-to-end Q-learning episodes/s under the currently selected backend."""
    from dialoglab.config import compose, load_config
    from dialoglab.harness import apply_overrides, run_session

    config = load_config(os.path.join(os.path.dirname(__file__), "..", "configs", "qlearning_restaurant.json"))
    config = apply_overrides(config, {"meta.episodes": episodes})
    composed = compose(config)
    start = time.perf_counter()
    run_session(composed, config.meta, seed=11, keep_transcripts=False)
    return episodes / (time.perf_counter() - start)


def main():
    print(f"kernel shapes: actions={N_ACTIONS} dim={DIM} active={N_ACTIVE}, {REPEATS} calls each\n")
    pure = bench_kernels(_kernels_py)
    rows = [("kernel", "pure py calls/s", "cython calls/s", "speedup")]
    if _speedups is not None:
        compiled = bench_kernels(_speedups)
        for name in pure:
            rows.append((name, f"{pure[name]:,.0f}", f"{compiled[name]:,.0f}", f"{compiled[name] / pure[name]:.1f}x"))
    else:
        for name in pure:
            rows.append((name, f"{pure[name]:,.0f}", "n/a", "n/a"))
    width = [max(len(r[i]) for r in rows) for i in range(4)]
    for r in rows:
        print("  ".join(str(c).ljust(w) for c, w in zip(r, width)))

    print("\nend-to-end Q-learning training (2000 episodes, noise 0.1):")
    from dialoglab.policy import kernels

    eps_per_s = bench_training_run()
    print(f"  backend={kernels.BACKEND}: {eps_per_s:,.0f} episodes/s")
    if kernels.BACKEND == "cython" and os.environ.get("DIALOGLAB_BENCH_CHILD") != "1":
        sys.stdout.flush()
        env = dict(os.environ, DIALOGLAB_PURE="1", DIALOGLAB_BENCH_CHILD="1")
        subprocess.run([sys.executable, os.path.abspath(__file__)], env=env, check=False)


if __name__ == "__main__":
    if os.environ.get("DIALOGLAB_BENCH_CHILD") == "1":
        from dialoglab.policy import kernels

        eps_per_s = bench_training_run()
        print(f"  backend={kernels.BACKEND}: {eps_per_s:,.0f} episodes/s")
    else:
        main()
