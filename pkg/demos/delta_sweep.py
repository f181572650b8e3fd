"""Equal masses on a 5 x 5 grid at several distances from the aperture."""
import numpy as np

from metalens import presets
from metalens.cells import boundary_arcs
from metalens.export import diagram_svg, write_text
from metalens.solver import solve

# With zero weights every cell is the Euclidean Voronoi cell of its target.
# Targets sit in [0, 1]^2 while the aperture is [-1, 1]^2, so the start is
# far from equal masses and close targets (small delta) need more steps.
for delta in presets.SWEEP_DELTAS:
    scene = presets.sweep_scene(delta)
    start = boundary_arcs(scene, np.zeros(25))
    rep = solve(scene)
    print(f"delta={delta:g}: start masses in [{start.areas.min() / 4:.3f}, {start.areas.max() / 4:.3f}], "
          f"{rep.iterations} iterations, final error {rep.error:.1e}")
    write_text(f"out/demo_sweep/delta_{delta:g}.svg", diagram_svg(boundary_arcs(scene, rep.b)))

print("diagrams written to out/demo_sweep/")
