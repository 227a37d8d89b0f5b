"""
Relaxation of a small perturbation to the constant equilibrium.

A gas at rest in a closed tube starts with a cosine pressure ripple and a
localized entropy bump. Friction removes kinetic energy, the pressure
flattens to the constant value fixed by the conserved integral of
p^(1/gamma), and the entropy bump stays where it was: at rest the entropy
is only transported, never diffused.

Run with ``python notebooks/01_decay_to_equilibrium.py``.
"""

import numpy as np

from dampedeuler import scenarios
from dampedeuler.runner import run_scenario

cfg = scenarios.small_perturbation_euler(n=128, t_end=8.0)
out = run_scenario(cfg)
print(f"status {out.status}, {out.summary['steps']} steps")
print(f"equilibrium pressure p_bar = {out.refs.p_bar:.6f}, sound speed k2 = {out.refs.k2:.4f}")

# The perturbation norms fall by orders of magnitude.
t = np.array([r.t for r in out.records])
for name in ("l2_xi", "l2_v"):
    y = np.array([getattr(r, name) for r in out.records])
    picks = [np.searchsorted(t, s) for s in (0.0, 2.0, 4.0, 6.0, 8.0)]
    print(name, " ".join(f"{y[min(i, len(y) - 1)]:.3e}" for i in picks))

# With a = 1 the slowest acoustic mode is underdamped, so the norms
# oscillate inside an exponential envelope of rate a/2.
print(f"fitted rate of l2_xi: {out.summary['fit_l2_xi_rate']:.3f} (r^2 {out.summary['fit_l2_xi_r2']:.2f})")

# Mass and total entropy are conserved to round-off.
print(f"relative drift of mass {out.summary['drift_mass']:.1e}, "
      f"of total entropy {out.summary['drift_entropy_total']:.1e}")
