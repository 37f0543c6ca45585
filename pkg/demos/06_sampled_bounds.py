# Sampled commutator growth and covariances against their exponential envelopes.
import numpy as np

from duality_lab import Schedule, covariance_check, lr_check

sched = Schedule.constant([0, 0, 1], [1, 0, 0], 0.5)
phi = np.array([np.sqrt(0.9), np.sqrt(0.1)])

print(" n  k    t   max ratio   (operator)      bound")
for n in (4, 6):
    for k in (1, 2):
        for t in (0.1, 0.5):
            res = lr_check(sched, n, k, t, samples=50, rng_seed=n * 10 + k)
            print(f"{n:2d} {k:2d} {t:4.1f}  {res.max_ratio:10.3e}  {res.max_operator_ratio:10.3e}  {res.bound:10.3e}")

print("\ncovariance, n = 6")
for t in (0.1, 0.3):
    res = covariance_check(phi, sched, 6, t, samples=200, rng_seed=1)
    print(f"t = {t}: max |cov| / (|K1| |K2|) = {res.max_normalized_cov:.3e}, bound {res.bound_per_norm:.3e}")
