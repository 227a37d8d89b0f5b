"""
Spectrum of the linearized system around a constant state.

In 1-D each Fourier mode exp(i eta . x) carries three eigenvalues: a
zero for the stationary entropy mode and the damped acoustic pair
-a/2 +- sqrt(a^2/4 - k2^2 |eta|^2). Every further dimension adds a purely
damped shear mode with eigenvalue -a. Low wave numbers
are overdamped and decay slowly, high wave numbers oscillate with decay
rate a/2. The slow overdamped branch tends to the diffusion rate
k2^2 |eta|^2 / a, which is the Darcy limit seen from Fourier space.

Run with ``python notebooks/04_linear_spectrum.py``.
"""

import numpy as np

from dampedeuler.diagnostics import linear_spectrum

a, k2 = 10.0, 1.2
print(f"a = {a}, k2 = {k2}")
print(" |eta|   slowest decay   diffusion rate   fastest imag part")
for eta in (0.5, 1.0, 2.0, 4.0, 8.0, 16.0):
    lam = linear_spectrum([eta], a=a, k2=k2)
    acoustic = lam[np.abs(lam) > 1e-12]
    slow = -acoustic.real.max()
    print(f"{eta:6.1f}   {slow:13.5f}   {k2 ** 2 * eta ** 2 / a:14.5f}   {np.abs(acoustic.imag).max():17.5f}")
