"""
Named scenarios used by the acceptance suite and the demo scripts.

Each factory returns a :class:`~dampedeuler.config.ScenarioConfig`; the
resolution is an argument so that tests can run coarser copies.
"""

from __future__ import annotations

from .config import ScenarioConfig, make_config
from .diagnostics import moment
from .runner import criterion_for_config, initial_gas_state

SMALL_PERTURBATION = [
    {"kind": "cosine_pressure", "eps": 0.05},
    {"kind": "gaussian_bump", "target": "S", "amplitude": 0.1, "width": 0.1, "center": 0.5},
]


def _stride(n, t_end, records, length=1.0, cfl=0.4, speed=1.2):
    # rough step count of an Euler run divided by the wanted number of records
    steps = t_end * n * speed / (cfl * length)
    return max(1, int(steps / records))


def small_perturbation_euler(n: int = 512, t_end: float = 10.0) -> ScenarioConfig:
    """Unit interval, reflecting walls, ``p0 = 1 + 0.05 cos(pi x)`` and an entropy bump."""
    return make_config(system="euler", n=n, t_end=t_end, profiles=SMALL_PERTURBATION,
                       output_stride=_stride(n, t_end, 1000))


def small_perturbation_diffusion(n: int = 256, t_end: float = 0.5) -> ScenarioConfig:
    """The same data under the Darcy-limit solver.

    The diffusive decay rate is about 14, so the run stops at ``t = 0.5``
    where the perturbation is still far above the round-off floor.
    """
    steps = t_end * 2.0 * 1.4 * n * n / 0.9
    return make_config(system="diffusion", n=n, t_end=t_end, profiles=SMALL_PERTURBATION,
                       output_stride=max(1, int(steps / 200)))


def linear_diffusion(n: int = 512, eps: float = 1e-3, t_end: float = 0.1) -> ScenarioConfig:
    """Uniform entropy and a single small cosine pressure mode."""
    steps = t_end * 2.0 * 1.4 * n * n / 0.9
    return make_config(system="diffusion", n=n, t_end=t_end,
                       profiles=[{"kind": "cosine_pressure", "eps": eps}],
                       output_stride=max(1, int(steps / 200)))


def darcy_pair(n: int = 128, a: float = 10.0, t_end: float = 5.0) -> ScenarioConfig:
    """Euler and Darcy runs from the same pressure and entropy, strong friction."""
    return make_config(system="paired", n=n, a=a, t_end=t_end, profiles=SMALL_PERTURBATION,
                       output_dt=t_end / 250)


def compact_bump(n: int = 512, t_end: float = 0.5, amplitude: float = 0.01,
                 radius: float = 0.1) -> ScenarioConfig:
    """Compactly supported pressure bump of radius ``radius`` in ``[0, 2]``."""
    return make_config(system="euler", n=n, length=2.0, t_end=t_end,
                       profiles=[{"kind": "compact_bump", "amplitude": amplitude,
                                  "radius": radius, "center": 1.0}],
                       support=0.1 * amplitude, support_center=[1.0],
                       output_stride=_stride(n, t_end, 100, length=2.0))


def _pulse_config(n, amplitude, t_end, radius):
    return make_config(system="euler", n=n, length=2.0, lower=-1.0, t_end=t_end,
                       profiles=[{"kind": "momentum_pulse", "amplitude": amplitude,
                                  "radius": radius}],
                       output_stride=1)


def pulse_threshold_amplitude(n: int = 512, radius: float = 0.5) -> float:
    """Pulse amplitude at which the initial moment equals the blow-up threshold.

    The constants ``B0``, ``B1`` and the horizon do not depend on the
    velocity, and the moment is linear in the amplitude.
    """
    probe = _pulse_config(n, 1.0, 1.0, radius)
    crit = criterion_for_config(probe)
    return crit.threshold / moment(initial_gas_state(probe)[0])


def momentum_pulse(n: int = 512, factor: float = 1.05, radius: float = 0.5,
                   t_end: float | None = None) -> ScenarioConfig:
    """Outward momentum pulse at the origin of ``[-1, 1]``, support ``h = 1 - radius`` from the walls.

    ``factor`` scales the amplitude relative to the threshold amplitude, so
    ``factor > 1`` satisfies the blow-up criterion and ``factor = 0.1`` is
    the control. ``t_end`` defaults to the criterion horizon ``T``.
    """
    amplitude = factor * pulse_threshold_amplitude(n, radius)
    config = _pulse_config(n, amplitude, 1.0, radius)
    if t_end is None:
        t_end = criterion_for_config(config).T
    return config.replace(t_end=t_end)
