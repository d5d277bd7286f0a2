# %% [markdown]
# # Far-field amplitudes over frequency and angle
#
# For each frequency the problem is re-solved and the transverse amplitude is
# evaluated on 256 observation directions.  The modulus peaks in the forward
# direction of the incoming wave.

# %%
import math
from pathlib import Path

import numpy as np

from elastoscatter import (CutoffSpec, LameParams, Selector, build_grid,
                           experiment2_potential, observation_angles, plane_wave_2d, sinogram)
from elastoscatter.io import write_pgm
from elastoscatter.scattering import directions_2d

out = Path("demo_output")
out.mkdir(exist_ok=True)

grid = build_grid(2, 2.5, 128)
Q = experiment2_potential(grid)
angles = observation_angles(256)
omegas = np.linspace(2.5, 50.0, 20)
wave = plane_wave_2d("s", math.pi / 4, omegas[0])
sel = {"re": Selector.default_for("s"), "abs": Selector("s", "abs", "norm")}
sinos = sinogram(LameParams(1.0, 4.0, omegas[0]), grid, CutoffSpec(1.0, 2.5), Q, wave,
                 omegas, directions_2d(angles), selectors=sel)

peak = angles[np.argmax(sinos["abs"].values, axis=1)]
for om, a in zip(omegas[::4], peak[::4]):
    print(f"omega {om:6.2f}: |v_s| peaks at {a / math.pi:.3f} pi")
lo, hi = write_pgm(out / "sinogram_transverse.pgm", sinos["re"].values)
print(f"image range [{lo:.3e}, {hi:.3e}]")
