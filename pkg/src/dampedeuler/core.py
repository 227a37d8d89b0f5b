"""
Shared building blocks: equation of state, grids, state containers and
the reference constants of the equilibrium.

Pressure law ``p = A rho**gamma * exp(S)``. States store interior cells only;
ghost layers are produced on demand by the solvers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

BC_TAGS = ("reflecting", "periodic", "neumann")


class DomainError(ValueError):
    """Argument outside the domain of a thermodynamic relation."""


class StateCorruptionError(RuntimeError):
    """State violates positivity or contains non-finite values."""


class BlowupError(RuntimeError):
    """Raised by a solver when it detects vacuum, NaN or a gradient catastrophe."""

    def __init__(self, t: float, reason: str):
        super().__init__(f"singularity at t={t:.17g}: {reason}")
        self.t = t
        self.reason = reason


@dataclass(frozen=True)
class GasParams:
    """Equation-of-state and friction constants.

    ``gamma = 1`` (isothermal limit) is accepted here so that the unit cases
    of the operators can be exercised; scenario configs require ``gamma > 1``.
    """

    A: float = 1.0
    gamma: float = 1.4
    a: float = 1.0
    R_gas: float | None = None
    C_V: float | None = None

    def __post_init__(self):
        if not self.A > 0:
            raise ValueError(f"A > 0 required, got {self.A}")
        if not self.gamma >= 1:
            raise ValueError(f"gamma >= 1 required, got {self.gamma}")
        if not self.a > 0:
            raise ValueError(f"a > 0 required, got {self.a}")


@dataclass(frozen=True)
class Grid:
    """Axis-aligned box of cells ``[lower, lower + length]`` with ghost layers.

    Parameters
    ----------
    n, length, lower, bc : per-axis tuples (scalars are broadcast to ``dim``).
    ghost : ghost-layer width used by the stencils.
    """

    dim: int
    n: tuple[int, ...]
    length: tuple[float, ...]
    lower: tuple[float, ...] = ()
    ghost: int = 2
    bc: tuple[str, ...] = ()

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")

        def per_axis(value, default):
            if value is None or (isinstance(value, tuple) and len(value) == 0):
                value = default
            if np.isscalar(value):
                value = (value,) * self.dim
            value = tuple(value)
            if len(value) != self.dim:
                raise ValueError(f"expected {self.dim} per-axis values, got {value}")
            return value

        object.__setattr__(self, "n", tuple(int(v) for v in per_axis(self.n, None)))
        object.__setattr__(self, "length", tuple(float(v) for v in per_axis(self.length, None)))
        object.__setattr__(self, "lower", tuple(float(v) for v in per_axis(self.lower, 0.0)))
        object.__setattr__(self, "bc", tuple(str(v).lower() for v in per_axis(self.bc, "reflecting")))
        if any(v < 4 for v in self.n):
            raise ValueError(f"n >= 4 required on every axis, got {self.n}")
        if any(not v > 0 for v in self.length):
            raise ValueError(f"length > 0 required, got {self.length}")
        if self.ghost < 1:
            raise ValueError(f"ghost >= 1 required, got {self.ghost}")
        for tag in self.bc:
            if tag not in BC_TAGS:
                raise ValueError(f"unknown boundary tag {tag!r}; expected one of {BC_TAGS}")

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.length, self.n))

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def padded_shape(self) -> tuple[int, ...]:
        return tuple(n + 2 * self.ghost for n in self.n)

    @property
    def upper(self) -> tuple[float, ...]:
        return tuple(lo + L for lo, L in zip(self.lower, self.length))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    @property
    def volume(self) -> float:
        return float(np.prod(self.length))

    @property
    def diameter(self) -> float:
        return float(np.sqrt(np.sum(np.square(self.length))))

    @property
    def interior(self) -> tuple[slice, ...]:
        g = self.ghost
        return tuple(slice(g, g + n) for n in self.n)

    def centers(self, axis: int) -> np.ndarray:
        """1-D array of cell-center coordinates along ``axis``."""
        i = np.arange(self.n[axis])
        return self.lower[axis] + (i + 0.5) * self.dx[axis]

    def mesh(self) -> np.ndarray:
        """Cell centers as an array of shape ``(dim, *n)``."""
        return np.stack(np.meshgrid(*[self.centers(k) for k in range(self.dim)], indexing="ij"))

    def integrate(self, f: np.ndarray) -> np.ndarray | float:
        """Midpoint quadrature over the trailing ``dim`` axes."""
        axes = tuple(range(f.ndim - self.dim, f.ndim))
        return np.sum(f, axis=axes) * self.cell_volume

    def mean(self, f: np.ndarray) -> float:
        return float(self.integrate(f)) / self.volume

    def contains(self, point: Sequence[float]) -> bool:
        return all(lo <= x <= hi for x, lo, hi in zip(point, self.lower, self.upper))


@dataclass
class GasState:
    """Conserved fields of the damped Euler system.

    ``mom`` has shape ``(dim, *grid.n)``; ``sigma = rho * S`` is the entropy
    density, transported conservatively alongside the mass.
    """

    rho: np.ndarray
    mom: np.ndarray
    sigma: np.ndarray
    grid: Grid
    t: float = 0.0

    def copy(self) -> "GasState":
        return GasState(self.rho.copy(), self.mom.copy(), self.sigma.copy(), self.grid, self.t)

    def stacked(self) -> np.ndarray:
        """Conserved variables as one ``(dim + 2, *n)`` array: rho, mom..., sigma."""
        return np.concatenate([self.rho[None], self.mom, self.sigma[None]])

    @classmethod
    def from_stacked(cls, q: np.ndarray, grid: Grid, t: float) -> "GasState":
        d = grid.dim
        return cls(q[0].copy(), q[1:1 + d].copy(), q[1 + d].copy(), grid, t)


@dataclass
class DiffusionState:
    """Pressure and entropy of the Darcy-limit system."""

    p: np.ndarray
    S: np.ndarray
    grid: Grid
    t: float = 0.0

    def copy(self) -> "DiffusionState":
        return DiffusionState(self.p.copy(), self.S.copy(), self.grid, self.t)


@dataclass(frozen=True)
class ReferenceConstants:
    p_bar: float
    S_bar: float
    rho_bar: float
    k1: float
    k2: float


@dataclass
class RunResult:
    """Outcome of a time integration."""

    final: GasState | DiffusionState
    records: list = field(default_factory=list)
    refs: ReferenceConstants | None = None
    status: str = "ok"
    blowup_time: float | None = None
    reason: str = ""
    steps: int = 0


def eos_pressure(rho, S, params: GasParams):
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("eos_pressure needs rho > 0")
    return params.A * rho ** params.gamma * np.exp(S)


def eos_density(p, S, params: GasParams):
    """Invert the pressure law at fixed entropy: ``(p / A)**(1/gamma) * exp(-S/gamma)``."""
    p = np.asarray(p, dtype=float)
    if np.any(p <= 0):
        raise DomainError("eos_density needs p > 0")
    g = params.gamma
    return params.A ** (-1.0 / g) * p ** (1.0 / g) * np.exp(-np.asarray(S) / g)


def reference_constants(p0, S0, grid: Grid, params: GasParams) -> ReferenceConstants:
    """Equilibrium pressure, mean entropy/density and the constants ``k1``, ``k2``.

    ``p_bar = (mean(p0**(1/gamma)))**gamma`` is fixed by the conserved integral
    of ``p**(1/gamma)``; by Jensen it never exceeds the arithmetic mean of ``p0``.
    """
    p0 = np.asarray(p0, dtype=float)
    if np.any(p0 <= 0):
        raise DomainError("reference_constants needs p0 > 0")
    g = params.gamma
    p_bar = grid.mean(p0 ** (1.0 / g)) ** g
    S_bar = grid.mean(np.broadcast_to(S0, p0.shape))
    rho_bar = grid.mean(eos_density(p0, S0, params))
    k1 = np.sqrt(1.0 / (g * rho_bar * p_bar))
    k2 = np.sqrt(g * p_bar / rho_bar)
    return ReferenceConstants(float(p_bar), float(S_bar), float(rho_bar), float(k1), float(k2))


def to_primitive(state: GasState, params: GasParams):
    """Return ``(rho, u, S, p)``; ``u`` has shape ``(dim, *n)``."""
    rho = state.rho
    if not np.all(np.isfinite(rho)) or np.any(rho <= 0):
        raise StateCorruptionError(f"non-positive or non-finite density at t={state.t}")
    u = state.mom / rho
    S = state.sigma / rho
    return rho, u, S, eos_pressure(rho, S, params)


def to_conserved(rho, u, S, grid: Grid, t: float = 0.0) -> GasState:
    rho = np.asarray(rho, dtype=float)
    if np.any(rho <= 0):
        raise DomainError("to_conserved needs rho > 0")
    u = np.asarray(u, dtype=float)
    if u.ndim == 1 and u.shape[0] == grid.dim:
        u = u.reshape((grid.dim,) + (1,) * grid.dim)
    u = np.broadcast_to(u, (grid.dim,) + grid.shape)
    rho = np.broadcast_to(rho, grid.shape).copy()
    S = np.broadcast_to(np.asarray(S, dtype=float), grid.shape)
    return GasState(rho, rho * u, rho * S, grid, t)


def march(state, t_end: float, dt_fn, step_fn, record=None, *, output_stride: int = 10,
          stop_times=(), on_stop=None) -> RunResult:
    """Generic explicit time loop shared by both solvers.

    Steps are shortened to land exactly on ``t_end`` and on every entry of
    ``stop_times`` (where ``on_stop(state)`` is called). A sample is recorded
    initially, every ``output_stride`` steps and at the end. A
    :class:`BlowupError` from ``step_fn`` ends the loop with status
    ``"singularity"``; the last valid state is returned.
    """
    if output_stride < 1:
        raise ValueError("output_stride >= 1 required")
    tol = 1e-12 * max(1.0, abs(t_end))
    stops = sorted(t for t in stop_times if state.t - tol <= t <= t_end + tol)
    result = RunResult(final=state)
    if record is not None:
        result.records.append(record(state, None))
    for ts in stops:
        if abs(ts - state.t) <= tol and on_stop is not None:
            on_stop(state)
    stops = [t for t in stops if t > state.t + tol]
    steps = 0
    while t_end - state.t > tol:
        target = min([t_end] + stops)
        dt = min(dt_fn(state), target - state.t)
        try:
            new = step_fn(state, dt)
        except BlowupError as exc:
            result.status = "singularity"
            result.blowup_time = exc.t
            result.reason = exc.reason
            break
        steps += 1
        if abs(new.t - target) <= tol:
            new.t = target
        done = t_end - new.t <= tol
        if record is not None and (steps % output_stride == 0 or done):
            result.records.append(record(new, state))
        if stops and abs(new.t - stops[0]) <= tol:
            stops.pop(0)
            if on_stop is not None:
                on_stop(new)
        state = new
    result.final = state
    result.steps = steps
    return result
