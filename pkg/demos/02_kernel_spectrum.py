# %% [markdown]
# # Spectrum of the truncated kernel
#
# The kernel is cut off smoothly at R and periodized, so its DFT gives the
# multipliers of the discrete convolution.  Their magnitude decays like
# log|j| / |j|^2; the ratio column below should stay bounded.

# %%
from elastoscatter import (CutoffSpec, LameParams, build_grid, build_kernel_spectrum,
                           decay_report, decay_statistic)

params = LameParams(1.0, 4.0, 10.0)
cutoff = CutoffSpec(rho=1.0, R=2.5)

for N in (32, 64, 128):
    spec = build_kernel_spectrum(build_grid(2, cutoff.R, N), params, cutoff)
    print(f"N = {N}: statistic {decay_statistic(spec):.4f}")
    for band in decay_report(spec):
        print(f"   {band.lower:5.0f} <= |j| < {band.upper:<5.0f} max {band.max_abs:.3e}"
              f"  ratio {band.ratio:.3f}")
