"""Far-field designs and the near-to-far limit of the cost."""
import numpy as np

from metalens.farfield import FarFieldScene, farfield_limit_gap, solve_collimated
from metalens.presets import SQUARE

# Four output directions tilted 0.3 rad away from the axis.
az = np.array([0.1, 1.9, 3.3, 4.6])
th = 0.3
dirs = np.column_stack([np.sin(th) * np.cos(az), np.sin(th) * np.sin(az), np.full(4, np.cos(th))])
g = np.array([0.2, 0.3, 0.25, 0.25])
sol = solve_collimated(FarFieldScene(SQUARE, dirs, g))
print(f"collimated: {sol.report.iterations} iterations, cell areas {np.round(sol.areas, 6)}")

# A point target at distance R along m behaves like direction m with an
# error that shrinks like 1 / R.
m = np.array([0.3, -0.2, np.sqrt(0.87)])
x = np.array([0.5, -0.5])
for R in (1e2, 1e3, 1e4, 1e5):
    print(f"R={R:.0e}: cost gap {float(farfield_limit_gap(x, R * m)):.3e}")
