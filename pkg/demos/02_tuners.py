"""
Differential evolution against grid and random search
=====================================================

Tune CART for F on one triplet with each tuner and compare the cost.
"""
from defecttune.dataset import load_bundled
from defecttune.harness import goal_fitness, derive_seed
from defecttune.params import CART_SPACE
from defecttune.tuner import run_de, run_grid, run_random

ivy = load_bundled().triplet("ivy")
seed = derive_seed(ivy.name, 0)
fitness = goal_fitness(ivy, "f", seed)
fitness(CART_SPACE.decode(CART_SPACE.lower))  # load the compiled tree kernels once

de = run_de(CART_SPACE, fitness, seed)
grid = run_grid(CART_SPACE, fitness)
rnd = run_random(CART_SPACE, fitness, de.evaluations, seed)

for name, r in (("DE", de), ("GRID", grid), ("RANDOM", rnd)):
    print(f"{name:6s} evaluations={r.evaluations:5d} seconds={r.wall_time:7.3f} "
          f"best tune F={r.best.fitness:.3f}")
    print("       ", r.best.params.as_dict())

# DE history: running best per generation of ten
best = float("-inf")
for g in range(0, len(de.history), 10):
    best = max([best] + [f for _, f in de.history[g:g + 10]])
    print(f"generation {g // 10}: best so far {best:.3f}")
