# %% [markdown]
# # Scattering by an annulus and a diamond
#
# Q = q I with q the indicator of 0.6 < |x| < 0.8 plus 1.2 times the indicator
# of |x1| + |x2| < 0.2.  An s-wave arrives at angle pi/4.  The script writes
# the scattered field on the whole box and on the inner square as PGM images.

# %%
import math
from pathlib import Path

import numpy as np

from elastoscatter import (CutoffSpec, LameParams, build_grid, experiment2_potential,
                           plane_wave_2d, solve_scattering)
from elastoscatter.io import write_pgm

out = Path("demo_output")
out.mkdir(exist_ok=True)

params = LameParams(1.0, 4.0, 50.0)
grid = build_grid(2, 2.5, 256)
Q = experiment2_potential(grid)
wave = plane_wave_2d("s", math.pi / 4, params.omega)
res = solve_scattering(params, grid, CutoffSpec(1.0, 2.5), Q, wave)
print(f"GMRES: {res.iterations} iterations, residual {res.final_residual:.2e}")

# %% Images: rows follow x2 (top = largest), columns x1
v = res.v_h.values
for comp in range(2):
    img = v[comp].real.T               # (x2, x1); write_pgm puts the last row on top
    write_pgm(out / f"scattered_x{comp + 1}.pgm", img)
inner = np.abs(grid.axis()) <= 1.0
write_pgm(out / "scattered_x1_inner.pgm", v[0].real.T[np.ix_(inner, inner)])
print("wrote", sorted(p.name for p in out.glob("scattered_*.pgm")))
