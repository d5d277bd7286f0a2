# %% [markdown]
# # Convergence on a problem with known solution
#
# A smooth bump g supported in the unit disk gives an exact triple: with Q = I
# on the disk and v = (Lame + omega^2) g, the integral equation holds with
# right-hand side f = v + g.  Errors are measured on |x| <= 1.
#
# The kernel's origin sample can be dropped ("zero") or replaced by a weight
# that absorbs the local singular quadrature error ("corrected").

# %%
from elastoscatter import LameParams, convergence_study

params = LameParams(1.0, 1.0, 1.0)
for origin in ("zero", "corrected"):
    print(f"origin = {origin}")
    for row in convergence_study(params, 2.5, [40, 80, 160, 320], origin=origin):
        order = "" if row.order_linf is None else f"{row.order_linf:6.3f}"
        print(f"  h = 1/{round(1 / row.h):<4d} Linf {row.linf:.3e}  L2 {row.l2:.3e}  {order}")
