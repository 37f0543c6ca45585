# Torsion: the nonlinear term rotates each state at a rate set by its own projection.
import numpy as np

from duality_lab import Schedule
from duality_lab.meanfield import bloch_flow, measure_torsion

print("  x0    omega    2 V1 x0")
for x0 in (-1.0, -0.5, 0.0, 0.5, 1.0):
    res = measure_torsion(v1=1.0, x0=x0)
    print(f"{x0:5.1f}  {res['omega']:7.4f}  {res['expected']:7.4f}")

# twisting about x and y at once is not a twist about the diagonal
r0 = np.array([0.3, -0.5, 0.8]) / np.linalg.norm([0.3, -0.5, 0.8])
both = bloch_flow(r0, Schedule.constant([0, 0, 0], [1, 1, 0], 1.0), [1.0])[0]
c = 1 / np.sqrt(2)
rot = np.array([[c, c, 0], [-c, c, 0], [0, 0, 1]])  # diagonal -> x
diag = rot.T @ bloch_flow(rot @ r0, Schedule.constant([0, 0, 0], [2, 0, 0], 1.0), [1.0])[0]
print("\ntwo-axis vs diagonal single-axis torsion at t=1:", np.linalg.norm(both - diag).round(4))
