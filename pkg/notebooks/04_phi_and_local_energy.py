"""
The scale-invariant monitor and the local energy inequality
===========================================================

``Phi`` adds the natural space-time norms of ``u``, ``grad u``,
``grad d``, ``Lap d`` and the pressure over a parabolic cylinder
``B_r(x0) x [t0 - r^2, t0]``.  It is unchanged by the parabolic rescaling
``u_r(x, s) = r u(x0 + r x, t0 + r^2 s)``, ``d_r(x, s) = d(x0 + r x, t0 + r^2 s)``.
It should also shrink as ``r -> 0`` around a point where the flow is smooth.
"""

# %%
import numpy as np

from nematic2d import LeslieCoefficients, SolverConfig, TorusGrid, run
from nematic2d import diagnostics as D
from nematic2d import presets

coeffs = LeslieCoefficients(0.5, -1.5, 0.5, 1.0, 1.0, 0.0)
grid = TorusGrid(64)
traj = []
run(grid, presets.random_state(grid, seed=11, director_amplitude=0.8), coeffs,
    SolverConfig(dt=2e-3, steps=150), hooks=[(2, lambda s, k: traj.append(s))])

x0, t0 = (1.2345, 4.321), 0.3
for r in (0.5, 0.25):
    direct = D.phi(grid, traj, coeffs, x0, t0, r)
    g_r, traj_r = D.rescale_trajectory(grid, traj, x0, t0, r)
    scaled = D.phi(g_r, traj_r, coeffs, (0.0, 0.0), 0.0, 1.0)
    print(f"r = {r:4.2f}   Phi = {direct:.10f}   rescaled at radius 1 = {scaled:.10f}")

print("Phi(r) for shrinking r:",
      ["%.4f" % D.phi(grid, traj, coeffs, x0, t0, r) for r in (0.4, 0.3, 0.2)])
print("(snapshots every 0.004 allow radii down to sqrt(8 * 0.004) = 0.18)")

# %% [markdown]
# The local energy inequality bounds the energy change inside a cutoff
# window by flux terms weighted with ``|grad eta^2|``.  Its constant is not
# quantified, so the audit reports both sides.  The ratio shows how much
# room a constant of 10 leaves.

# %%
L = grid.length
for inner, outer in ((0.25, 0.5), (0.5, 0.75), (0.7, 1.0)):
    cut = D.Cutoff((L / 2, L / 2), inner * L / 2, outer * L / 2)
    a = D.local_energy_audit(grid, traj[:11], coeffs, cut)
    print(f"window ({inner:.2f}, {outer:.2f}) L/2:  lhs {a.lhs:+.4f}   flux {a.flux_bound:.4f}"
          f"   passes at C=10: {a.passes(10)}")
