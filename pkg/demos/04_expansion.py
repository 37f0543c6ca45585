# Nearby states can drift apart under the nonlinear flow; no CPTP map allows that.
import numpy as np

from duality_lab import Schedule
from duality_lab.duality import expansive_demo
from duality_lab.pauli import qubit_from_bloch

sched = Schedule.constant([0, 0, 0], [0, 0, 1], 5.0)  # pure z-torsion
grid = np.linspace(0, 5, 11)

za, zb = 0.1, 0.3
a = qubit_from_bloch([np.sqrt(1 - za ** 2), 0, za])
b = qubit_from_bloch([np.sqrt(1 - zb ** 2), 0, zb])
ratio = expansive_demo(a, b, sched, grid)
for t, r in zip(grid, ratio):
    print(f"t = {t:3.1f}   d(t)/d(0) = {r:6.3f}")

# with the same z projection the pair turns rigidly
b_same = qubit_from_bloch([np.sqrt(1 - za ** 2) * np.cos(0.05), np.sqrt(1 - za ** 2) * np.sin(0.05), za])
print("\nsame z projection, max ratio:", expansive_demo(a, b_same, sched, grid).max().round(6))
