"""
Scalar diagnostics of Euler and Darcy-limit runs.

Conserved integrals, perturbation norms and energies about the equilibrium
``(p_bar, 0, S_bar)``, the moment functional ``M(t) = int rho u . x`` with the
blow-up criterion built on it, decay-rate fits, support radius of the
perturbation, the linearized spectrum and the Euler/Darcy gap.

All integrals are midpoint sums over cells.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field, fields

import numpy as np

from .core import (
    DiffusionState,
    GasParams,
    GasState,
    Grid,
    ReferenceConstants,
    eos_density,
    eos_pressure,
    reference_constants,
    to_primitive,
)

ALPHAS = (-1.0, -0.5, 0.0, 0.5, 1.0)
ALPHA_NAMES = {-1.0: "I_m1", -0.5: "I_mh", 0.0: "I_0", 0.5: "I_ph", 1.0: "I_p1"}

CSV_COLUMNS = (
    "t", "mass", "entropy_total", "p_int_root", "I_m1", "I_mh", "I_0", "I_ph", "I_p1",
    "p_min", "p_max", "S_min", "S_max", "l2_xi", "l2_v", "l2_phi", "l2_omega", "moment",
    "grad_u_max", "support_radius", "dt_used",
)

THREE_D_FACTOR = 3


class CriterionNotApplicable(ValueError):
    """Preconditions of the blow-up criterion fail; says nothing about blow-up."""


class PastBlowupError(ValueError):
    """The moment lower bound has no finite value: its singular time is reached."""


class NotReadyError(RuntimeError):
    """Not enough stored history for time differences."""


# ---------------------------------------------------------------------------
# field helpers

def _fields(state, params: GasParams):
    """``(rho, u, S, p)`` for either state type; diffusion uses the Darcy velocity."""
    if isinstance(state, GasState):
        return to_primitive(state, params)
    from .diffusion import darcy_velocity

    rho = eos_density(state.p, state.S, params)
    return rho, darcy_velocity(state, params), state.S, state.p


def _l2(f, grid: Grid) -> float:
    return float(np.sqrt(np.sum(grid.integrate(np.square(f)))))


def _gradient(f, grid: Grid):
    """Central-difference partials (one-sided at the edges) of a scalar field."""
    if grid.dim == 1:
        return [np.gradient(f, grid.dx[0])]
    return list(np.gradient(f, *grid.dx))


def _partials(f, grid: Grid, order: int):
    """All distinct partial derivatives of the given order of a scalar field."""
    out = []
    for alpha in itertools.combinations_with_replacement(range(grid.dim), order):
        g = f
        for axis in alpha:
            g = _gradient(g, grid)[axis]
        out.append(g)
    return out


def _components(f, grid: Grid):
    f = np.asarray(f)
    return [f] if f.ndim == grid.dim else list(f)


def seminorm_sq(f, grid: Grid, order: int) -> float:
    """Squared discrete ``H^order`` seminorm; vector fields sum over components."""
    return float(sum(_l2(d, grid) ** 2 for c in _components(f, grid)
                     for d in _partials(c, grid, order)))


def grad_u_max(u, grid: Grid) -> float:
    """``max |du_i/dx_j|`` from one-sided differences between neighbouring cells."""
    u = np.asarray(u)
    gmax = 0.0
    for comp in _components(u, grid):
        for k in range(grid.dim):
            gmax = max(gmax, float(np.max(np.abs(np.diff(comp, axis=k)))) / grid.dx[k])
    return gmax


def vorticity(v, grid: Grid):
    """Curl of a velocity-like field; scalar in 2-D, vector in 3-D, ``None`` in 1-D."""
    if grid.dim == 1:
        return None
    if grid.dim == 2:
        return _gradient(v[1], grid)[0] - _gradient(v[0], grid)[1]
    d = [_gradient(v[i], grid) for i in range(3)]
    return np.stack([d[2][1] - d[1][2], d[0][2] - d[2][0], d[1][0] - d[0][1]])


# ---------------------------------------------------------------------------
# integrals

def conserved_integral(state, alpha: float, params: GasParams) -> float:
    """``int rho exp(S/gamma + alpha S)``, conserved in time for every ``alpha``.

    At ``alpha = 0`` this is ``A**(-1/gamma) int p**(1/gamma)``.
    """
    if isinstance(state, GasState):
        rho = state.rho
        S = state.sigma / state.rho
    else:
        rho = eos_density(state.p, state.S, params)
        S = state.S
    return float(state.grid.integrate(rho * np.exp(S / params.gamma + alpha * S)))


def moment(state, params: GasParams | None = None) -> float:
    """``M = int rho u . x`` with ``x`` measured from the coordinate origin.

    ``params`` is only needed for diffusion states (Darcy velocity).
    """
    grid = state.grid
    if not grid.contains((0.0,) * grid.dim):
        raise ValueError(f"origin lies outside the domain {grid.lower}..{grid.upper}")
    x = grid.mesh()
    if isinstance(state, GasState):
        return float(grid.integrate(np.sum(state.mom * x, axis=0)))
    rho, u, _, _ = _fields(state, params)
    return float(grid.integrate(np.sum(rho * u * x, axis=0)))


def moment_identity_terms(state, params: GasParams, p_bar: float):
    """Right-hand side pieces of ``dM/dt + a M``: kinetic, pressure and wall terms.

    Returns ``(int rho |u|^2, d int (p - p_bar), wall)`` where ``wall`` is the
    boundary integral of ``(p - p_bar) x . n`` with ``p`` linearly
    extrapolated to the wall faces.
    """
    grid = state.grid
    rho, u, _, p = _fields(state, params)
    kinetic = float(grid.integrate(rho * np.sum(u * u, axis=0)))
    pressure = grid.dim * float(grid.integrate(p - p_bar))
    wall = 0.0
    for k in range(grid.dim):
        face_area = grid.cell_volume / grid.dx[k]
        lo = 1.5 * np.take(p, 0, axis=k) - 0.5 * np.take(p, 1, axis=k)
        hi = 1.5 * np.take(p, -1, axis=k) - 0.5 * np.take(p, -2, axis=k)
        wall += face_area * (np.sum(hi - p_bar) * grid.upper[k] - np.sum(lo - p_bar) * grid.lower[k])
    return kinetic, pressure, float(wall)


def moment_identity_residual(prev, nxt, params: GasParams, p_bar: float) -> float:
    """Defect of the moment identity between two consecutive states.

    ``|dM/dt + a M - (int rho|u|^2 + d int (p - p_bar) - wall)|`` with the time
    derivative a forward difference and everything else averaged over the
    two time levels.
    """
    dt = nxt.t - prev.t
    if not dt > 0:
        raise ValueError("states must be ordered in time")
    m0, m1 = moment(prev, params), moment(nxt, params)
    r0 = moment_identity_terms(prev, params, p_bar)
    r1 = moment_identity_terms(nxt, params, p_bar)
    rhs = 0.5 * ((r0[0] + r0[1] - r0[2]) + (r1[0] + r1[1] - r1[2]))
    return abs((m1 - m0) / dt + params.a * 0.5 * (m0 + m1) - rhs)


# ---------------------------------------------------------------------------
# records

@dataclass
class DiagnosticsRecord:
    t: float
    mass: float
    entropy_total: float
    I_alpha: dict
    p_int_root: float
    p_min: float
    p_max: float
    S_min: float
    S_max: float
    l2_xi: float
    l2_v: float
    l2_phi: float
    h_xi: float
    h_v: float
    h_phi: float
    l2_omega: float
    moment: float
    grad_u_max: float
    support_radius: float
    dt_used: float
    l2_dS_dt: float = float("nan")

    def row(self) -> list[float]:
        """Values in :data:`CSV_COLUMNS` order."""
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        for alpha, name in ALPHA_NAMES.items():
            values[name] = self.I_alpha[alpha]
        return [float(values[c]) for c in CSV_COLUMNS]


class Recorder:
    """Callable ``(state, prev) -> DiagnosticsRecord`` bound to one run's constants."""

    def __init__(self, params: GasParams, refs: ReferenceConstants, *,
                 support_threshold: float = 1e-4, support_center=None):
        self.params = params
        self.refs = refs
        self.support_threshold = support_threshold
        self.support_center = support_center

    def __call__(self, state, prev=None) -> DiagnosticsRecord:
        params, refs, grid = self.params, self.refs, state.grid
        rho, u, S, p = _fields(state, params)
        xi = p - refs.p_bar
        v = u / refs.k1
        phi = S - refs.S_bar
        omega = vorticity(v, grid)
        try:
            mom = moment(state, params)
        except ValueError:
            mom = float("nan")
        center = self.support_center
        if center is None:
            center = tuple(lo + 0.5 * L for lo, L in zip(grid.lower, grid.length))
        dS = float("nan")
        dt_used = 0.0
        if prev is not None:
            dt_used = state.t - prev.t
            S_prev = prev.sigma / prev.rho if isinstance(prev, GasState) else prev.S
            if dt_used > 0:
                dS = _l2(S - S_prev, grid) / dt_used
        i_alpha = {}
        for alpha in ALPHAS:
            i_alpha[alpha] = float(grid.integrate(rho * np.exp(S / params.gamma + alpha * S)))
        return DiagnosticsRecord(
            t=float(state.t),
            mass=float(grid.integrate(rho)),
            entropy_total=float(grid.integrate(rho * S)),
            I_alpha=i_alpha,
            p_int_root=float(grid.integrate(p ** (1.0 / params.gamma))),
            p_min=float(p.min()), p_max=float(p.max()),
            S_min=float(S.min()), S_max=float(S.max()),
            l2_xi=_l2(xi, grid), l2_v=_l2(v, grid), l2_phi=_l2(phi, grid),
            h_xi=np.sqrt(seminorm_sq(xi, grid, 1) + seminorm_sq(xi, grid, 2)),
            h_v=np.sqrt(seminorm_sq(v, grid, 1) + seminorm_sq(v, grid, 2)),
            h_phi=np.sqrt(seminorm_sq(phi, grid, 1) + seminorm_sq(phi, grid, 2)),
            l2_omega=0.0 if omega is None else _l2(omega, grid),
            moment=mom,
            grad_u_max=grad_u_max(u, grid),
            support_radius=support_radius([xi, u, phi], grid, self.support_threshold, center),
            dt_used=float(dt_used),
            l2_dS_dt=dS,
        )


def series(records, name: str) -> np.ndarray:
    if name in {v: k for k, v in ALPHA_NAMES.items()}:
        alpha = {v: k for k, v in ALPHA_NAMES.items()}[name]
        return np.array([r.I_alpha[alpha] for r in records])
    return np.array([getattr(r, name) for r in records])


def max_relative_drift(records, name: str) -> float:
    """``max |y - y0| / |y0|``; a series starting at 0 is scaled by its largest magnitude."""
    y = series(records, name)
    change = float(np.max(np.abs(y - y[0])))
    scale = abs(y[0]) or float(np.max(np.abs(y)))
    return 0.0 if change == 0 else change / scale


def bracketing_violation(records, p_bar: float) -> float:
    """Largest amount by which ``p_min <= p_bar <= p_max`` fails (0 if it holds)."""
    worst = 0.0
    for r in records:
        worst = max(worst, r.p_min - p_bar, p_bar - r.p_max)
    return worst


# ---------------------------------------------------------------------------
# energies

@dataclass
class EnergyStack:
    """Discrete energies; ``terms`` holds the per-time-derivative pieces of ``E``."""

    E_xi: float
    E_v: float
    E_phi: float
    calE_xi: float
    calE_v: float
    calE_phi: float
    F_xi: float
    terms: dict = field(default_factory=dict)


def _time_derivatives(f0, f1, f2, t0, t1, t2):
    d1 = (f2 - f1) / (t2 - t1)
    d1_prev = (f1 - f0) / (t1 - t0)
    d2 = 2.0 * (d1 - d1_prev) / (t2 - t0)
    return [f2, d1, d2]


def discrete_energy(history, params: GasParams, refs: ReferenceConstants) -> EnergyStack:
    """Energies of the perturbation ``(xi, v, phi)`` from the last three states.

    Time derivatives are backward differences (order <= 2) and spatial ones
    central differences with total order ``l + |alpha| <= 2``; ``F_xi`` allows
    one more spatial order. Higher orders of the continuum definitions are
    dropped because they are noise-dominated on shock-capturing grids.
    """
    if len(history) < 3:
        raise NotReadyError(f"need 3 stored states, have {len(history)}")
    s0, s1, s2 = history[-3:]
    grid = s2.grid
    per_state = []
    for s in (s0, s1, s2):
        _, u, S, p = _fields(s, params)
        per_state.append((p - refs.p_bar, u / refs.k1, S - refs.S_bar))
    ts = (s0.t, s1.t, s2.t)
    if not ts[0] < ts[1] < ts[2]:
        raise NotReadyError("history times must be strictly increasing")

    out = {}
    terms = {}
    for i, name in enumerate(("xi", "v", "phi")):
        dts = _time_derivatives(*(st[i] for st in per_state), *ts)
        e_terms = [_l2(d, grid) ** 2 for d in dts]
        terms[f"E_{name}"] = e_terms
        out[f"E_{name}"] = sum(e_terms)
        out[f"calE_{name}"] = sum(seminorm_sq(dts[ell], grid, m) if m else e_terms[ell]
                                  for ell in range(3) for m in range(3 - ell))
        if name == "xi":
            out["F_xi"] = sum(seminorm_sq(dts[ell], grid, m) if m else e_terms[ell]
                              for ell in range(3) for m in range(4 - ell))
    return EnergyStack(terms=terms, **out)


# ---------------------------------------------------------------------------
# decay fits

@dataclass(frozen=True)
class DecayFit:
    rate: float
    amplitude: float
    r_squared: float
    window: tuple[float, float]


def fit_exponential_decay(t, y, window=None) -> DecayFit:
    """Least-squares fit of ``ln y = ln C - rate * t`` over ``window``.

    The default window is the last 60% of the sampled time span. A constant
    series returns ``rate = 0`` with ``r_squared = 1``.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if window is None:
        window = (t[0] + 0.4 * (t[-1] - t[0]), t[-1])
    lo, hi = window
    mask = (t >= lo) & (t <= hi)
    tw, yw = t[mask], y[mask]
    if tw.size < 5:
        raise ValueError(f"need >= 5 samples in window {window}, got {tw.size}")
    if np.any(yw <= 0):
        raise ValueError("fit_exponential_decay needs strictly positive samples")
    ly = np.log(yw)
    tm = tw.mean()
    lm = ly.mean()
    stt = np.sum((tw - tm) ** 2)
    slope = np.sum((tw - tm) * (ly - lm)) / stt
    intercept = lm - slope * tm
    ss_tot = np.sum((ly - lm) ** 2)
    ss_res = np.sum((ly - (intercept + slope * tw)) ** 2)
    r2 = 1.0 if ss_tot == 0 else max(0.0, 1.0 - ss_res / ss_tot)
    return DecayFit(float(-slope), float(np.exp(intercept)), float(r2), (float(lo), float(hi)))


# ---------------------------------------------------------------------------
# propagation, spectrum, Darcy gap, equilibrium

def support_radius(fields_, grid: Grid, threshold: float, center=None) -> float:
    """Largest distance from ``center`` of a cell where any component exceeds ``threshold``."""
    if not threshold > 0:
        raise ValueError("threshold > 0 required")
    if center is None:
        center = tuple(lo + 0.5 * L for lo, L in zip(grid.lower, grid.length))
    mask = np.zeros(grid.shape, dtype=bool)
    for f in fields_:
        for comp in _components(f, grid):
            mask |= np.abs(comp) > threshold
    if not mask.any():
        return 0.0
    x = grid.mesh()
    dist = np.sqrt(sum((x[k] - center[k]) ** 2 for k in range(grid.dim)))
    return float(dist[mask].max())


def linear_spectrum(eta, constants: ReferenceConstants | None = None,
                    params: GasParams | None = None, *, a: float | None = None,
                    k2: float | None = None) -> np.ndarray:
    """Eigenvalues of the linearization about equilibrium at wave vector ``eta``.

    Ordered as: the entropy mode 0, ``dim - 1`` shear modes ``-a``, then the
    two acoustic roots of ``lam**2 + a lam + k2**2 |eta|**2 = 0``.
    """
    a = params.a if a is None else a
    k2 = constants.k2 if k2 is None else k2
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    dim = eta.size
    e2 = float(np.dot(eta, eta))
    disc = complex(a * a - 4.0 * k2 * k2 * e2)
    root = np.sqrt(disc)
    acoustic = [(-a + root) / 2.0, (-a - root) / 2.0]
    if disc.real >= 0:
        # avoid cancellation in the small root
        big = (-a - root) / 2.0
        acoustic = [k2 * k2 * e2 / big if big != 0 else 0j, big]
    return np.array([0j] + [complex(-a)] * (dim - 1) + acoustic)


def linearized_matrix(eta, a: float, k2: float) -> np.ndarray:
    """Fourier symbol of the linearized system acting on ``(xi, v, phi)``."""
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    d = eta.size
    M = np.zeros((d + 2, d + 2), dtype=complex)
    M[0, 1:1 + d] = -1j * k2 * eta
    M[1:1 + d, 0] = -1j * k2 * eta
    M[1:1 + d, 1:1 + d] = -a * np.eye(d)
    return M


def _h1(f, grid: Grid) -> float:
    return float(np.sqrt(_l2(f, grid) ** 2 + seminorm_sq(f, grid, 1)))


def darcy_gap(euler: GasState, diff: DiffusionState, params: GasParams) -> tuple[float, float]:
    """Discrete ``H^1`` distances ``(|p - p_hat|, |u - u_hat|)`` between the two systems."""
    from .diffusion import darcy_velocity

    if euler.grid != diff.grid:
        raise ValueError("darcy_gap needs both states on the same grid")
    if abs(euler.t - diff.t) > 1e-9 * max(1.0, abs(euler.t)):
        raise ValueError(f"darcy_gap needs equal times, got {euler.t} and {diff.t}")
    grid = euler.grid
    _, u, _, p = to_primitive(euler, params)
    u_hat = darcy_velocity(diff, params)
    gap_p = _h1(p - diff.p, grid)
    gap_u = float(np.sqrt(sum(_h1(c, grid) ** 2 for c in u - u_hat)))
    return gap_p, gap_u


def equilibrium_fields(S_inf, p_bar: float, params: GasParams, thermal: bool = False):
    """Equilibrium density ``rho = A**(-1/gamma) p_bar**(1/gamma) exp(-S/gamma)``.

    With ``thermal=True`` also returns temperature ``p_bar / (R rho)`` and
    internal energy ``C_V theta``; otherwise those are ``None``.
    """
    if not p_bar > 0:
        raise ValueError("p_bar > 0 required")
    rho = eos_density(p_bar, S_inf, params)
    if not thermal:
        return rho, None, None
    if params.R_gas is None or params.C_V is None:
        raise ValueError("R_gas and C_V are required for temperature and internal energy")
    theta = p_bar / (params.R_gas * rho)
    return rho, theta, params.C_V * theta


# ---------------------------------------------------------------------------
# blow-up criterion

@dataclass(frozen=True)
class BlowupCriterion:
    """Constants and threshold of the moment blow-up criterion.

    ``B1`` uses the dimension factor ``d``; ``B1_3d`` the 3-D factor 3.
    """

    B0: float
    B1: float
    r: float
    T: float
    a: float
    threshold: float
    terms: tuple[float, float, float, float]
    case: str
    d: int = 3
    B1_3d: float = float("nan")
    h: float = float("inf")
    M0: float = float("nan")

    @property
    def predicts_blowup(self) -> bool:
        return self.M0 > self.threshold

    @property
    def horizon_limit(self) -> float:
        return np.inf if self.r == 0 else 0.5 * np.pi * self.B0 / self.r


def _case(B0, B1, a, scale):
    if abs(B1) <= 1e-10 * max(1.0, scale):
        return "B1_zero"
    return "B1_above" if B1 > 0.25 * a * a * B0 else "B1_below"


def threshold_terms(B0: float, r: float, a: float, T: float):
    """The four lower limits whose maximum the initial moment must exceed."""
    t1 = a * B0 / (1.0 - np.exp(-a * T))
    if r == 0:
        t2 = t3 = 0.5 * a * B0 + B0 / T
    else:
        x = r * T / B0
        t2 = 0.5 * a * B0 + r / np.tan(x)
        t3 = 0.5 * a * B0 - r + 2.0 * r / (1.0 - np.exp(-2.0 * x))
    t4 = 0.5 * a * B0 + r
    return float(t1), float(t2), float(t3), float(t4)


def criterion_from_constants(B0: float, B1: float, a: float, T: float, *, d: int = 3,
                             B1_3d: float = float("nan"), h: float = float("inf"),
                             M0: float = float("nan"), scale: float = 1.0) -> BlowupCriterion:
    """Evaluate the threshold for given ``B0``, ``B1``, friction ``a`` and horizon ``T``."""
    if not B0 > 0:
        raise ValueError("B0 > 0 required")
    if not T > 0:
        raise ValueError("T > 0 required")
    r = float(np.sqrt(abs(B1 - 0.25 * a * a * B0)))
    terms = threshold_terms(B0, r, a, T)
    return BlowupCriterion(B0=float(B0), B1=float(B1), r=r, T=float(T), a=float(a),
                           threshold=max(terms), terms=terms, case=_case(B0, B1, a, scale),
                           d=d, B1_3d=B1_3d, h=h, M0=M0)


def perturbation_wall_distance(state: GasState, params: GasParams,
                               refs: ReferenceConstants | None = None,
                               threshold: float = 0.0) -> float:
    """Distance from the walls to the support of ``(p - p_bar, u, S - S_bar)``.

    Cells count as perturbed when any component exceeds ``threshold`` plus a
    round-off allowance. Returns ``inf`` for an unperturbed state.
    """
    grid = state.grid
    rho, u, S, p = to_primitive(state, params)
    if refs is None:
        refs = reference_constants(p, S, grid, params)
    tol_p = threshold + 1e-12 * refs.p_bar
    tol_S = threshold + 1e-12 * max(1.0, abs(refs.S_bar))
    tol_u = threshold + 1e-12 * refs.k2
    mask = (np.abs(p - refs.p_bar) > tol_p) | (np.abs(S - refs.S_bar) > tol_S)
    mask |= np.any(np.abs(u) > tol_u, axis=0)
    if not mask.any():
        return float("inf")
    x = grid.mesh()
    h = np.inf
    for k in range(grid.dim):
        half = 0.5 * grid.dx[k]
        h = min(h, float(np.min(x[k][mask] - half - grid.lower[k])),
                float(np.min(grid.upper[k] - x[k][mask] - half)))
    return float(h)


def blowup_criterion(initial: GasState, params: GasParams, T: float, *,
                     h: float | None = None) -> BlowupCriterion:
    """Blow-up criterion for initial data whose perturbation stays off the walls.

    Raises :class:`CriterionNotApplicable` unless ``h > k2 T`` and, for
    ``r > 0``, ``T < (pi/2) B0 / r``.
    """
    grid = initial.grid
    rho, u, S, p = to_primitive(initial, params)
    refs = reference_constants(p, S, grid, params)
    d = grid.dim
    mass = float(grid.integrate(rho))
    B0 = grid.diameter ** 2 * mass
    vol = grid.volume
    lead = params.A * np.exp(S.min()) / vol ** (params.gamma - 1.0) * mass ** params.gamma
    B1 = d * lead - d * refs.p_bar * vol
    B1_3d = THREE_D_FACTOR * (lead - refs.p_bar * vol)
    if h is None:
        h = perturbation_wall_distance(initial, params, refs)
    M0 = moment(initial)
    crit = criterion_from_constants(B0, B1, params.a, T, d=d, B1_3d=B1_3d, h=h, M0=M0,
                                    scale=d * refs.p_bar * vol)
    if not h > refs.k2 * T:
        raise CriterionNotApplicable(
            f"perturbation support is {h:.6g} from the walls, needs > k2*T = {refs.k2 * T:.6g}")
    if crit.r > 0 and not T < crit.horizon_limit:
        raise CriterionNotApplicable(
            f"T = {T:.6g} must be below (pi/2) B0 / r = {crit.horizon_limit:.6g}")
    return crit


def moment_lower_bound(t: float, M0: float, crit: BlowupCriterion, params: GasParams) -> float:
    """Lower bound on ``M(t)`` from the Riccati-type inequality for the moment.

    Raises :class:`PastBlowupError` once the bound's denominator is no longer
    positive, i.e. at or after its predicted singular time.
    """
    a, B0, r = params.a, crit.B0, crit.r
    if crit.case == "B1_zero":
        denom = a * B0 + M0 * (np.exp(-a * t) - 1.0)
        if denom <= 0:
            raise PastBlowupError(f"bound singular before t={t}")
        return float(np.exp(a * t) * M0 * a * B0 / denom)
    N0 = M0 - 0.5 * a * B0
    if r == 0:
        denom = 1.0 - N0 * t / B0
        if denom <= 0:
            raise PastBlowupError(f"bound singular before t={t}")
        return float(0.5 * a * B0 + N0 / denom)
    theta = r * t / B0
    if crit.case == "B1_above":
        if theta >= 0.5 * np.pi:
            raise PastBlowupError(f"bound singular before t={t}")
        tan = np.tan(theta)
        denom = 1.0 - N0 / r * tan
        if denom <= 0:
            raise PastBlowupError(f"bound singular before t={t}")
        return float(0.5 * a * B0 + (r * tan + N0) / denom)
    E = np.exp(2.0 * theta) * (N0 - r) / (N0 + r)
    if 1.0 - E <= 0:
        raise PastBlowupError(f"bound singular before t={t}")
    return float(0.5 * a * B0 - r + 2.0 * r / (1.0 - E))
