# As n grows, where does the exact central qubit end up?
#
# Each replica feels the central qubit with weight 1/(n-1), so the replicas
# end up precessing freely under h0.  The central qubit then follows
#   dr/dt = 2 (h0 + v * r_rep) x r,   dr_rep/dt = 2 h0 x r_rep
# rather than the self-consistent mean-field flow.
import numpy as np

from duality_lab import Schedule, mf_integrate, replica_driven_flow
from duality_lab.duality import exact_central_series
from duality_lab.pauli import bloch_distance

phi = np.array([np.sqrt(0.9), np.sqrt(0.1)])
r0 = np.array([0.6, 0.0, 0.8])
sched = Schedule.constant([0, 0, 1], [1, 0, 0], 1.0)
grid = np.array([0.25, 0.5, 1.0])

mf = mf_integrate(phi, sched, grid).bloch
limit = replica_driven_flow(r0, sched, grid)
print("distance between the two candidate limits:", np.round(bloch_distance(mf, limit), 4))

print("\n    n   |exact - mean field| at t=1   |exact - replica-driven| at t=1")
for n in (16, 128, 1024):
    ex = exact_central_series(phi, sched, n, grid, dt=5e-4)
    print(f"{n:5d}   {bloch_distance(ex[-1], mf[-1]):18.4e}   {bloch_distance(ex[-1], limit[-1]):22.4e}")

# the first column levels off; the second shrinks like 1/n
