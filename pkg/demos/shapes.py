"""Uniform masses on discretized shapes, with the resulting phase."""
import numpy as np

from metalens import presets
from metalens.export import phase_grid
from metalens.solver import solve

scene = presets.shape_scene("four_disks")
print(f"four_disks: {scene.n_targets} targets, each with mass {scene.masses[0]:.5f}")
rep = solve(scene)
print(f"solved in {rep.iterations} iterations, error {rep.error:.1e}")

# The shape is symmetric under both axis reflections and so is the solution.
t = scene.targets
for sign in ([-1, 1], [1, -1]):
    perm = np.argmin((((t * sign)[:, None] - t[None]) ** 2).sum(-1), axis=1)
    print(f"reflection {sign}: max weight change {np.abs(rep.b[perm] - rep.b).max():.1e}")

# The phase min_i c(X, Y_i) + b_i is 2-Lipschitz on the aperture.
xs, ys, phi = phase_grid(scene, rep.b, 101)
h = xs[1] - xs[0]
print(f"phase range [{phi.min():.4f}, {phi.max():.4f}], "
      f"largest neighbour step / spacing = {np.abs(np.diff(phi, axis=1)).max() / h:.3f}")
