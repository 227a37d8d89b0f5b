"""
Explicit solver for the nonlinear diffusion (Darcy-limit) system.

Pressure obeys the degenerate parabolic equation

    p_t = gamma p/(a rho) lap p - gamma p/(a rho^2) grad rho . grad p + |grad p|^2/(a rho)

and entropy is carried by the Darcy velocity ``u_hat = -grad p / (a rho)``
(upwinded). Density is never evolved: ``rho = rho(p, S)`` from the EOS.
"""

from __future__ import annotations

from dataclasses import replace
from functools import lru_cache

import numpy as np

from .core import (
    BlowupError,
    DiffusionState,
    GasParams,
    RunResult,
    StateCorruptionError,
    eos_density,
    march,
    reference_constants,
)
from .euler import _sl, pad


class PositivityLossError(BlowupError):
    """Pressure reached zero or below."""


def _central(f, grid, axis):
    """Centered first difference of a padded array along spatial ``axis``."""
    ax = f.ndim - grid.dim + axis
    nd = f.ndim
    return (f[_sl(nd, ax, 2, None)] - f[_sl(nd, ax, 0, -2)]) / (2.0 * grid.dx[axis])


def _crop(f, grid, axis):
    # drop the first/last entry along every axis except ``axis`` (already cropped)
    index = [slice(None)] * f.ndim
    off = f.ndim - grid.dim
    for k in range(grid.dim):
        if k != axis:
            index[off + k] = slice(1, -1)
    return f[tuple(index)]


@lru_cache(maxsize=32)
def _one_ghost(grid):
    return grid if grid.ghost == 1 else replace(grid, ghost=1)


def _padded(state: DiffusionState):
    grid = _one_ghost(state.grid)
    q = pad(np.stack([state.p, state.S]), grid)
    return q[0], q[1], grid


def darcy_velocity(state: DiffusionState, params: GasParams) -> np.ndarray:
    """``u_hat = -grad p / (a rho)``, shape ``(dim, *n)``.

    Central differences in the interior, one-sided differences in the
    boundary cells of non-periodic axes.
    """
    grid = state.grid
    rho = eos_density(state.p, state.S, params)
    u = np.empty((grid.dim,) + grid.shape)
    for k in range(grid.dim):
        if grid.bc[k] == "periodic":
            dp = (np.roll(state.p, -1, axis=k) - np.roll(state.p, 1, axis=k)) / (2 * grid.dx[k])
        else:
            dp = np.gradient(state.p, grid.dx[k], axis=k)
        u[k] = -dp / (params.a * rho)
    return u


def _operators(state: DiffusionState, params: GasParams):
    """Pressure right-hand side, cell velocity, upwinded ``u . grad S`` and ``D = gamma p/(a rho)``."""
    p, S, g1 = _padded(state)
    rho = eos_density(p, S, params)
    a, gam = params.a, params.gamma
    inner = tuple(slice(1, -1) for _ in range(g1.dim))
    pc, rc = p[inner], rho[inner]
    lap = np.zeros(g1.shape)
    grad_p_grad_rho = np.zeros(g1.shape)
    grad_p_sq = np.zeros(g1.shape)
    u = np.empty((g1.dim,) + g1.shape)
    adv = np.zeros(g1.shape)
    nd = p.ndim
    for k in range(g1.dim):
        dx = g1.dx[k]
        lap += _crop((p[_sl(nd, k, 2, None)] - 2 * p[_sl(nd, k, 1, -1)] + p[_sl(nd, k, 0, -2)]) / dx ** 2, g1, k)
        dp = _crop(_central(p, g1, k), g1, k)
        dr = _crop(_central(rho, g1, k), g1, k)
        grad_p_grad_rho += dp * dr
        grad_p_sq += dp * dp
        u[k] = -dp / (a * rc)
        back = _crop((S[_sl(nd, k, 1, -1)] - S[_sl(nd, k, 0, -2)]) / dx, g1, k)
        fwd = _crop((S[_sl(nd, k, 2, None)] - S[_sl(nd, k, 1, -1)]) / dx, g1, k)
        adv += np.where(u[k] > 0, u[k] * back, u[k] * fwd)
    D = gam * pc / (a * rc)
    rhs_p = D * lap - D / rc * grad_p_grad_rho + grad_p_sq / (a * rc)
    return rhs_p, u, adv, D


def _dt_from_operators(ops, grid, safety):
    _, u, _, D = ops
    rate = np.zeros(grid.shape)
    for k in range(grid.dim):
        rate = rate + 2.0 * D / grid.dx[k] ** 2 + np.abs(u[k]) / grid.dx[k]
    return float(safety / rate.max())


def _advance(state, dt, ops):
    rhs_p, _, adv, _ = ops
    p = state.p + dt * rhs_p
    S = state.S - dt * adv
    t = state.t + dt
    if not (np.all(np.isfinite(p)) and np.all(np.isfinite(S))):
        raise StateCorruptionError(f"non-finite values at t={t}")
    if p.min() <= 0:
        raise PositivityLossError(t, f"pressure lost positivity (min p = {p.min():.3e})")
    return DiffusionState(p, S, state.grid, t)


def stable_dt_diffusion(state: DiffusionState, params: GasParams, safety: float = 0.9) -> float:
    """Explicit limit ``safety / max(sum_k 2 D / dx_k^2 + |u_k| / dx_k)``, ``D = gamma p / (a rho)``.

    Without flow this is ``safety * dx^2 / (2 dim D)`` on a uniform grid.
    """
    return _dt_from_operators(_operators(state, params), state.grid, safety)


def step_diffusion(state: DiffusionState, dt: float, params: GasParams) -> DiffusionState:
    """One forward-Euler step with Neumann (even-reflection) ghosts."""
    return _advance(state, dt, _operators(state, params))


def velocity_identity_residual(prev: DiffusionState, nxt: DiffusionState, params: GasParams,
                               k1: float, margin: int = 3) -> float:
    """L2 defect of the evolution law of ``v = u_hat / k1`` between two states.

    ``v_t = k1 (1 - gamma) v div v - k1 v . grad v - (k1/2) grad |v|^2
    + gamma p/(a rho) grad div v``, with a forward difference in time and the
    right side averaged over both levels; cells within ``margin`` of a wall
    are excluded (one-sided boundary differences are only first order).
    """
    grid = prev.grid
    dt = nxt.t - prev.t

    def rhs(s):
        v = darcy_velocity(s, params) / k1
        rho = eos_density(s.p, s.S, params)
        grads = [np.stack(np.gradient(v[i], *grid.dx)) if grid.dim > 1
                 else np.gradient(v[i], grid.dx[0])[None] for i in range(grid.dim)]
        div = sum(grads[i][i] for i in range(grid.dim))
        vsq = np.sum(v * v, axis=0)
        gdiv = np.stack(np.gradient(div, *grid.dx)) if grid.dim > 1 else np.gradient(div, grid.dx[0])[None]
        gvsq = np.stack(np.gradient(vsq, *grid.dx)) if grid.dim > 1 else np.gradient(vsq, grid.dx[0])[None]
        out = np.empty_like(v)
        for i in range(grid.dim):
            conv = sum(v[j] * grads[i][j] for j in range(grid.dim))
            out[i] = (k1 * (1 - params.gamma) * v[i] * div - k1 * conv - 0.5 * k1 * gvsq[i]
                      + params.gamma * s.p / (params.a * rho) * gdiv[i])
        return v, out

    v0, r0 = rhs(prev)
    v1, r1 = rhs(nxt)
    res = (v1 - v0) / dt - 0.5 * (r0 + r1)
    inner = tuple(slice(margin, n - margin) for n in grid.shape)
    res = res[(slice(None),) + inner]
    return float(np.sqrt(np.sum(res ** 2) * grid.cell_volume))


def integrate_diffusion(state: DiffusionState, params: GasParams, t_end: float, *,
                        safety: float = 0.9, output_stride: int = 10, record=None,
                        stop_times=(), on_stop=None) -> RunResult:
    cache = {}

    def ops(s):
        # the step reuses the operators evaluated for the time-step estimate
        if cache.get("state") is not s:
            cache["state"], cache["ops"] = s, _operators(s, params)
        return cache["ops"]

    return march(state, t_end, lambda s: _dt_from_operators(ops(s), s.grid, safety),
                 lambda s, dt: _advance(s, dt, ops(s)), record,
                 output_stride=output_stride, stop_times=stop_times, on_stop=on_stop)


def run_diffusion(config, *, stop_times=(), on_stop=None) -> RunResult:
    """Run the Darcy-limit system for a :class:`~dampedeuler.config.ScenarioConfig`."""
    from .config import initial_fields
    from .diagnostics import Recorder

    p0, _, S0 = initial_fields(config)
    params = config.params
    refs = reference_constants(p0, S0, config.grid, params)
    state = DiffusionState(p0, np.array(S0, dtype=float), config.grid)
    recorder = Recorder(params, refs, support_threshold=config.support_threshold,
                        support_center=config.support_center_point())
    result = integrate_diffusion(state, params, config.t_end, safety=config.safety,
                                 output_stride=config.output_stride, record=recorder,
                                 stop_times=stop_times, on_stop=on_stop)
    result.refs = refs
    return result
