# Mean-field qubit vs the exact central qubit, with the finite-n error bound.
import numpy as np

from duality_lab import Schedule, run_duality

phi = np.array([np.sqrt(0.9), np.sqrt(0.1)])  # Bloch vector (0.6, 0, 0.8)
sched = Schedule.constant(h0=[0, 0, 1], v=[1, 0, 0], horizon=1.0)
grid = np.linspace(0, 1, 11)

for n in (64, 1024):
    run = run_duality(phi, sched, n, grid)
    print(f"n = {n}   integrator tolerance ~ {run.tolerance:.1e}")
    print("    t     distance       bound")
    for t, d, b in zip(run.t_grid, run.distances, run.bound_values):
        print(f"  {t:4.1f}  {d:11.3e}  {b:11.3e}")
    print()

# the bound holds, but it is loose: it grows like e^{32 t}
