"""
Strong friction: the Euler flow follows the porous-medium (Darcy) flow.

For large friction the momentum equation relaxes to Darcy's law
a rho u = -grad p. We run both systems from the same initial pressure and
entropy and watch the distance between them, which decays together with
the perturbation itself.

Run with ``python notebooks/02_darcy_limit.py``.
"""

from dampedeuler import scenarios
from dampedeuler.runner import run_scenario

for a in (5.0, 20.0):
    cfg = scenarios.darcy_pair(n=64, a=a, t_end=1.0)
    out = run_scenario(cfg)
    gaps = out.gaps
    print(f"a = {a:>4}: max gap {out.summary['gap_max']:.3e}, final gap {out.summary['gap_final']:.3e}")
    for row in gaps[:: max(1, len(gaps) // 5)]:
        print(f"   t = {row[0]:.3f}  |p - p_D| = {row[1]:.3e}  |u - u_D| = {row[2]:.3e}")

# The gap shrinks as the friction grows: the Darcy flow is the leading
# order of the damped flow for large a.
