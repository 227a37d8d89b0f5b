"""
Finite-volume integrator for the damped non-isentropic Euler equations.

Conserved variables ``(rho, rho u, rho S)`` are advanced with a Rusanov
(local Lax-Friedrichs) flux on minmod-limited MUSCL face states and SSP-RK2
in time; the friction term is then integrated exactly, ``mom *= exp(-a dt)``.
"""

from __future__ import annotations

import numpy as np

from .core import (
    BlowupError,
    GasParams,
    GasState,
    Grid,
    RunResult,
    StateCorruptionError,
    eos_density,
    march,
    reference_constants,
    to_conserved,
    to_primitive,
)


def _sl(ndim: int, axis: int, start=None, stop=None, step=None):
    index = [slice(None)] * ndim
    index[axis] = slice(start, stop, step)
    return tuple(index)


def fill_ghosts(q: np.ndarray, grid: Grid, odd=None) -> np.ndarray:
    """Fill the ghost layers of a padded ``(nvar, *padded_shape)`` array in place.

    ``odd[k]`` lists the variable indices that change sign under reflection
    across a wall normal to axis ``k`` (the normal momentum). Periodic axes
    wrap; reflecting and Neumann axes mirror.
    """
    g = grid.ghost
    for k in range(grid.dim):
        ax = k + 1
        n = grid.n[k]
        nd = q.ndim
        if grid.bc[k] == "periodic":
            q[_sl(nd, ax, 0, g)] = q[_sl(nd, ax, n, n + g)]
            q[_sl(nd, ax, n + g, n + 2 * g)] = q[_sl(nd, ax, g, 2 * g)]
            continue
        q[_sl(nd, ax, 0, g)] = q[_sl(nd, ax, g, 2 * g)][_sl(nd, ax, step=-1)]
        q[_sl(nd, ax, n + g, n + 2 * g)] = q[_sl(nd, ax, n, n + g)][_sl(nd, ax, step=-1)]
        if grid.bc[k] == "reflecting" and odd is not None:
            for var in odd[k]:
                q[(var,) + _sl(nd - 1, k, 0, g)] *= -1.0
                q[(var,) + _sl(nd - 1, k, n + g, n + 2 * g)] *= -1.0
    return q


def pad(q: np.ndarray, grid: Grid, odd=None) -> np.ndarray:
    """Embed interior ``(nvar, *n)`` data in a padded array with filled ghosts."""
    out = np.zeros((q.shape[0],) + grid.padded_shape)
    out[(slice(None),) + grid.interior] = q
    return fill_ghosts(out, grid, odd)


def apply_boundary(state: GasState) -> np.ndarray:
    """Padded conserved array ``(dim + 2, *padded)`` with boundary ghosts filled.

    Reflecting walls copy density, entropy density and tangential momentum and
    negate the normal momentum, so that ``u . n = 0`` holds on the wall faces.
    """
    grid = state.grid
    return pad(state.stacked(), grid, odd=[[1 + k] for k in range(grid.dim)])


def minmod(a, b):
    return np.where(a * b > 0, np.sign(a) * np.minimum(np.abs(a), np.abs(b)), 0.0)


def _conserved_from_primitive(W, dim):
    rho = W[0]
    out = np.empty((dim + 2,) + W.shape[1:])
    out[0] = rho
    out[1:1 + dim] = rho * W[1:1 + dim]
    out[1 + dim] = rho * W[2 + dim]
    return out


def _physical_flux(W, axis, dim):
    # W rows: rho, u_0..u_{dim-1}, p, S
    rho, p, S = W[0], W[1 + dim], W[2 + dim]
    un = W[1 + axis]
    F = np.empty((dim + 2,) + W.shape[1:])
    F[0] = rho * un
    F[1:1 + dim] = rho * un * W[1:1 + dim]
    F[1 + axis] += p
    F[1 + dim] = rho * S * un
    return F


def rusanov_flux(WL, WR, axis: int, params: GasParams) -> np.ndarray:
    """Local Lax-Friedrichs flux between primitive face states ``(rho, u..., p, S)``."""
    dim = WL.shape[0] - 3
    cL = np.sqrt(params.gamma * WL[1 + dim] / WL[0])
    cR = np.sqrt(params.gamma * WR[1 + dim] / WR[0])
    speed = np.maximum(np.abs(WL[1 + axis]) + cL, np.abs(WR[1 + axis]) + cR)
    FL = _physical_flux(WL, axis, dim)
    FR = _physical_flux(WR, axis, dim)
    UL = _conserved_from_primitive(WL, dim)
    UR = _conserved_from_primitive(WR, dim)
    return 0.5 * (FL + FR) - 0.5 * speed * (UR - UL)


def _primitive_padded(qp, dim, params):
    rho = qp[0]
    u = qp[1:1 + dim] / rho
    S = qp[1 + dim] / rho
    p = params.A * rho ** params.gamma * np.exp(S)
    return np.concatenate([rho[None], u, p[None], S[None]])


def face_fluxes(qp: np.ndarray, grid: Grid, axis: int, params: GasParams, muscl: bool = True):
    """Numerical fluxes on the ``n[axis] + 1`` faces along ``axis``.

    ``qp`` is a padded conserved array; the result keeps the padded extent on
    the other axes.
    """
    dim = grid.dim
    g = grid.ghost
    n = grid.n[axis]
    ax = axis + 1
    W = _primitive_padded(qp, dim, params)
    nd = W.ndim
    if muscl:
        if g < 2:
            raise ValueError("MUSCL reconstruction needs ghost >= 2")
        diff = np.diff(W, axis=ax)
        s = minmod(diff[_sl(nd, ax, 0, -1)], diff[_sl(nd, ax, 1, None)])
        # s[j] is the slope of padded cell j + 1
        WL = W[_sl(nd, ax, g - 1, g + n)] + 0.5 * s[_sl(nd, ax, g - 2, g + n - 1)]
        WR = W[_sl(nd, ax, g, g + n + 1)] - 0.5 * s[_sl(nd, ax, g - 1, g + n)]
    else:
        WL = W[_sl(nd, ax, g - 1, g + n)]
        WR = W[_sl(nd, ax, g, g + n + 1)]
    return rusanov_flux(WL, WR, axis, params)


def flux_divergence(q: np.ndarray, grid: Grid, params: GasParams, muscl: bool = True) -> np.ndarray:
    """``-div F`` on interior cells for interior conserved data ``q``."""
    qp = pad(q, grid, odd=[[1 + k] for k in range(grid.dim)])
    out = np.zeros_like(q)
    for k in range(grid.dim):
        F = face_fluxes(qp, grid, k, params, muscl)
        other = list(grid.interior)
        other[k] = slice(None)
        F = F[(slice(None),) + tuple(other)]
        out -= np.diff(F, axis=k + 1) / grid.dx[k]
    return out


def stable_dt(state: GasState, params: GasParams, cfl: float = 0.4) -> float:
    """``cfl * min(dx / (|u| + c))`` over cells and axes."""
    if not 0 < cfl <= 1:
        raise ValueError(f"cfl must lie in (0, 1], got {cfl}")
    q = state.stacked()
    if not np.all(np.isfinite(q)):
        raise StateCorruptionError(f"non-finite values at t={state.t}")
    rho, u, S, p = to_primitive(state, params)
    c = np.sqrt(params.gamma * p / rho)
    dt = np.inf
    for k in range(state.grid.dim):
        dt = min(dt, state.grid.dx[k] / np.max(np.abs(u[k]) + c))
    return float(cfl * dt)


def _check(q, t, rho_floor):
    if not np.all(np.isfinite(q)):
        raise BlowupError(t, "non-finite values")
    rmin = float(np.min(q[0]))
    if rmin <= rho_floor:
        raise BlowupError(t, f"vacuum (min rho = {rmin:.3e})")


def step_euler(state: GasState, dt: float, params: GasParams, *, muscl: bool = True,
               strang: bool = False, rho_floor: float = 1e-10) -> GasState:
    """Advance one step: hyperbolic update, then exact damping (Lie by default).

    With ``strang=True`` the damping is split into two half steps around the
    flux update. Raises :class:`BlowupError` on vacuum or non-finite values.
    """
    grid = state.grid
    dim = grid.dim
    q = state.stacked()
    t_new = state.t + dt
    if strang:
        q[1:1 + dim] *= np.exp(-0.5 * params.a * dt)
    if muscl:
        q1 = q + dt * flux_divergence(q, grid, params, True)
        _check(q1, t_new, rho_floor)
        q = 0.5 * q + 0.5 * (q1 + dt * flux_divergence(q1, grid, params, True))
    else:
        q = q + dt * flux_divergence(q, grid, params, False)
    _check(q, t_new, rho_floor)
    q[1:1 + dim] *= np.exp(-(0.5 if strang else 1.0) * params.a * dt)
    return GasState.from_stacked(q, grid, t_new)


def integrate_euler(state: GasState, params: GasParams, t_end: float, *, cfl: float = 0.4,
                    muscl: bool = True, strang: bool = False, rho_floor: float = 1e-10,
                    grad_max: float = 1e4, output_stride: int = 10, record=None,
                    stop_times=(), on_stop=None) -> RunResult:
    """Integrate from ``state.t`` to ``t_end``.

    ``record(state, prev)`` builds one diagnostics sample. A gradient
    catastrophe, ``max |du/dx| > grad_max``, ends the run with status
    ``"singularity"`` like vacuum or NaN does.
    """
    from .diagnostics import grad_u_max

    def step(s, dt):
        new = step_euler(s, dt, params, muscl=muscl, strang=strang, rho_floor=rho_floor)
        gmax = grad_u_max(new.mom / new.rho, new.grid)
        if gmax > grad_max:
            raise BlowupError(new.t, f"gradient catastrophe (max |grad u| = {gmax:.3e})")
        return new

    return march(state, t_end, lambda s: stable_dt(s, params, cfl), step, record,
                 output_stride=output_stride, stop_times=stop_times, on_stop=on_stop)


def run_euler(config, *, stop_times=(), on_stop=None) -> RunResult:
    """Run the Euler system for a :class:`~dampedeuler.config.ScenarioConfig`."""
    from .config import initial_fields
    from .diagnostics import Recorder

    p0, u0, S0 = initial_fields(config)
    params = config.params
    state = to_conserved(eos_density(p0, S0, params), u0, S0, config.grid)
    refs = reference_constants(p0, S0, config.grid, params)
    recorder = Recorder(params, refs, support_threshold=config.support_threshold,
                        support_center=config.support_center_point())
    result = integrate_euler(state, params, config.t_end, cfl=config.cfl, muscl=config.muscl,
                             strang=config.strang, rho_floor=config.rho_floor,
                             grad_max=config.grad_max, output_stride=config.output_stride,
                             record=recorder, stop_times=stop_times, on_stop=on_stop)
    result.refs = refs
    return result

