"""Independent check of a solution by tracing rays through the surface."""
import numpy as np

from metalens import presets
from metalens.solver import solve
from metalens.trace import trace_verify

scene = presets.gaussian_scene(5)
b = solve(scene).b

# Rays start at random points of the aperture, bend by the phase gradient
# and land on the target plane. The share landing on each target should
# equal its prescribed mass.
rep = trace_verify(scene, b, samples=1_000_000, seed=0)
print(f"max |landed share - mass| = {rep.max_deviation:.1e} (tolerance {rep.tolerance:.1e})")
print(f"Snell residual at {rep.snell_points} points: {rep.snell_max:.1e}")

# Shifting one weight moves energy away from that target and the trace sees it.
bad = b.copy()
bad[12] += 0.1
rep = trace_verify(scene, bad, samples=200_000, seed=0)
print(f"perturbed centre weight: share {rep.fractions[12]:.4f} vs mass {rep.expected[12]:.4f}, "
      f"consistent={rep.consistent}")
