"""
Finite-time singularity from a strong outward momentum pulse.

The moment M(t) = integral of rho u . x obeys a Riccati-type inequality.
When M(0) exceeds a threshold built from the mass, the entropy and the
friction, M cannot stay finite past a horizon T and the smooth solution
must break down. Here a pulse just above the threshold develops a
gradient catastrophe before T, while a pulse at a tenth of the threshold
amplitude runs to T without incident.

The breakdown is detected when max |grad u| passes the configured
``grad_max`` (1e4 by default). That level is tied to the mesh: on 256
cells the steepening front is smeared and the run reaches T without
tripping it, so this demo uses 512 cells.

Run with ``python notebooks/03_blowup_criterion.py``.
"""

from dampedeuler import scenarios
from dampedeuler.runner import criterion_entries, run_scenario

n = 512
for factor in (1.05, 0.1):
    cfg = scenarios.momentum_pulse(n=n, factor=factor)
    crit = criterion_entries(cfg)
    print(f"amplitude factor {factor}: M0 = {crit['M0']:.4g}, threshold = {crit['threshold']:.4g}, "
          f"horizon T = {crit['T']:.4g}, case {crit['case']}")
    out = run_scenario(cfg)
    if out.status == "singularity":
        print(f"   singularity at t = {out.summary['blowup_time']:.4g}: {out.summary['blowup_reason']}")
    else:
        print(f"   reached t = {out.summary['t_final']:.4g} with status {out.status}")
