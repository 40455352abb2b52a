"""Whale-search optimizer on the classic benchmark functions.

Runs a handful of seeded optimizations per function, shows the
convergence history shrinking monotonically, and contrasts the result
with uniform random sampling at the same evaluation budget.
"""

import numpy as np

from windwoa import BENCHMARKS, Bounds, WoaConfig, woa_optimize

DIM = 10
POP = 30
ITERS = 200

for name, (objective, half_width) in BENCHMARKS.items():
    print(f"\n=== {name} (d={DIM}, bounds +-{half_width}) ===")
    bests = []
    for seed in range(5):
        config = WoaConfig(bounds=Bounds.cube(DIM, -half_width, half_width),
                           population_size=POP, max_iterations=ITERS, seed=seed)
        result = woa_optimize(config, objective)
        bests.append(result.best_fitness)
        print(f"  seed {seed}: start {result.history[0]:.3e} -> best {result.best_fitness:.3e}")

    # same budget spent on plain uniform sampling
    rng = np.random.default_rng(0)
    samples = rng.uniform(-half_width, half_width, (POP * (ITERS + 1), DIM))
    random_best = min(objective(row) for row in samples)
    print(f"  median best {np.median(bests):.3e}  vs random search {random_best:.3e}")
