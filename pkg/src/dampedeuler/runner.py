"""
Scenario driver: runs a config and writes its artifacts.

Artifacts in the output directory:

``timeseries.csv``
    One row per diagnostics record, columns :data:`~dampedeuler.diagnostics.CSV_COLUMNS`,
    every value written with 17 significant digits. Paired runs also write
    ``timeseries_diffusion.csv`` and ``gap.csv`` (``t,gap_p,gap_u``).
``summary.txt``
    Flat ``key=value`` lines: status, reference constants, blow-up criterion,
    conserved-integral drift, the ``p_bar`` bracketing check and decay fits.
``config.yaml``
    The fully materialized config (parses back to the same scenario).
``snap_<system>_<t>.bin``
    Optional field snapshots, see :func:`write_snapshot`.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig, initial_fields
from .core import (
    DiffusionState,
    GasState,
    eos_density,
    reference_constants,
    to_conserved,
    to_primitive,
)
from .diagnostics import (
    ALPHA_NAMES,
    CSV_COLUMNS,
    CriterionNotApplicable,
    DecayFit,
    Recorder,
    blowup_criterion,
    bracketing_violation,
    darcy_gap,
    fit_exponential_decay,
    max_relative_drift,
    perturbation_wall_distance,
    series,
)
from .diffusion import darcy_velocity, integrate_diffusion, run_diffusion
from .euler import integrate_euler, run_euler

DRIFT_SERIES = ("mass", "entropy_total", "p_int_root") + tuple(ALPHA_NAMES.values())
FIT_SERIES = ("l2_xi", "l2_v", "l2_phi", "l2_dS_dt")


@dataclass
class ScenarioOutcome:
    """Everything :func:`run_scenario` produced, in memory."""

    status: str
    summary: dict
    records: list
    refs: object
    final: object = None
    diffusion_records: list = field(default_factory=list)
    gaps: np.ndarray | None = None
    files: list = field(default_factory=list)


# ---------------------------------------------------------------------------
# file formats

def _fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    if value is None:
        return "none"
    return str(value)


def write_csv(path, columns, rows) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join("%.17g" % v for v in row) + "\n")


def read_csv(path):
    """Return ``(columns, data)`` with ``data`` of shape ``(rows, columns)``."""
    with open(path) as fh:
        columns = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return columns, data


def write_summary(path, summary: dict) -> None:
    with open(path, "w") as fh:
        for key, value in summary.items():
            fh.write(f"{key}={_fmt(value)}\n")


def read_summary(path) -> dict:
    """Parse a summary file back into a dict of strings."""
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line:
                key, _, value = line.partition("=")
                out[key] = value
    return out


def snapshot_fields(state, params) -> dict:
    """Named cell fields of a state: density, velocity components, entropy and pressure."""
    if isinstance(state, GasState):
        rho, u, S, p = to_primitive(state, params)
    else:
        p, S = state.p, state.S
        rho = eos_density(p, S, params)
        u = darcy_velocity(state, params)
    out = {"rho": rho}
    for k in range(state.grid.dim):
        out[f"u{k}"] = u[k]
    out["S"] = S
    out["p"] = p
    return out


def write_snapshot(path, state, params) -> None:
    """Write fields as one JSON header line followed by little-endian float64 data.

    The header holds ``dims``, ``dx``, ``lower``, ``fields`` and ``time``; the
    body is the fields in header order, each row-major over ``dims``.
    """
    fields_ = snapshot_fields(state, params)
    grid = state.grid
    header = {"dims": list(grid.n), "dx": list(grid.dx), "lower": list(grid.lower),
              "fields": list(fields_), "time": float(state.t), "dtype": "<f8"}
    body = np.stack([np.ascontiguousarray(f, dtype="<f8") for f in fields_.values()])
    with open(path, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode("ascii"))
        fh.write(body.tobytes(order="C"))


def read_snapshot(path):
    """Return ``(header, {name: array})`` from a file written by :func:`write_snapshot`."""
    with open(path, "rb") as fh:
        header = json.loads(fh.readline().decode("ascii"))
        raw = np.frombuffer(fh.read(), dtype=header.get("dtype", "<f8"))
    dims = tuple(header["dims"])
    data = raw.reshape((len(header["fields"]),) + dims)
    return header, {name: data[i].astype(float) for i, name in enumerate(header["fields"])}


# ---------------------------------------------------------------------------
# pieces of the summary

def initial_gas_state(config: ScenarioConfig):
    """Initial Euler state and reference constants of a config."""
    p0, u0, S0 = initial_fields(config)
    rho0 = eos_density(p0, S0, config.params)
    state = to_conserved(rho0, u0, S0, config.grid)
    return state, reference_constants(p0, S0, config.grid, config.params)


def criterion_for_config(config: ScenarioConfig):
    """Evaluate the blow-up criterion for the initial data of ``config``.

    The horizon is ``config.horizon`` when set, else ``horizon_fraction``
    times ``min(h / k2, (pi/2) B0 / r)``. Raises
    :class:`~dampedeuler.diagnostics.CriterionNotApplicable` when the
    preconditions fail.
    """
    state, refs = initial_gas_state(config)
    params = config.params
    if not config.grid.contains([0.0] * config.grid.dim):
        raise CriterionNotApplicable("the origin lies outside the domain, the moment is undefined")
    h = perturbation_wall_distance(state, params, refs)
    if not h > 0:
        raise CriterionNotApplicable("initial perturbation touches the walls")
    T = config.horizon
    if T is None:
        probe = blowup_criterion(state, params, 1e-9 * refs.k2, h=h)
        limit = min(h / refs.k2, probe.horizon_limit)
        if not np.isfinite(limit):
            raise CriterionNotApplicable("no finite horizon: set criterion.horizon explicitly")
        T = config.horizon_fraction * limit
    return blowup_criterion(state, params, T, h=h)


def safe_fit(t, y, window_fraction=(0.4, 1.0), floor: float = 0.0) -> DecayFit:
    """Decay fit over a fractional window; all-negligible data gives rate 0.

    Samples at or below ``floor`` in the window are treated as zero. If every
    sample is zero the fit is ``rate = 0, r_squared = 1``; if only some are,
    the fit is undefined and NaNs are returned.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = np.isfinite(y)
    t, y = t[keep], y[keep]
    if t.size == 0:
        return DecayFit(np.nan, np.nan, np.nan, (np.nan, np.nan))
    span = t[-1] - t[0]
    window = (t[0] + window_fraction[0] * span, t[0] + window_fraction[1] * span)
    inside = (t >= window[0]) & (t <= window[1])
    if inside.sum() >= 1 and np.all(y[inside] <= floor):
        return DecayFit(0.0, 0.0, 1.0, window)
    try:
        return fit_exponential_decay(t, y, window)
    except ValueError:
        return DecayFit(np.nan, np.nan, np.nan, window)


def _fit_entries(prefix, fit: DecayFit) -> dict:
    return {f"fit_{prefix}_rate": fit.rate, f"fit_{prefix}_amplitude": fit.amplitude,
            f"fit_{prefix}_r2": fit.r_squared}


def summarize(config: ScenarioConfig, records, refs, status, *, blowup_time=None,
              reason="", steps=0, prefix="") -> dict:
    """Reference constants, drift, bracketing and decay fits of one record series."""
    out = {}
    floor = 1e-12 * max(1.0, refs.p_bar)
    if not prefix:
        out.update(pbar=refs.p_bar, Sbar=refs.S_bar, rhobar=refs.rho_bar, k1=refs.k1, k2=refs.k2)
    out[prefix + "steps"] = steps
    out[prefix + "t_final"] = records[-1].t if records else 0.0
    if blowup_time is not None:
        out[prefix + "blowup_time"] = blowup_time
        out[prefix + "blowup_reason"] = reason
    drifts = {name: max_relative_drift(records, name) for name in DRIFT_SERIES}
    for name, value in drifts.items():
        out[f"{prefix}drift_{name}"] = value
    out[prefix + "drift_max"] = max(drifts.values())
    violation = bracketing_violation(records, refs.p_bar)
    # equilibrium pressure implied by the current integral of p^(1/gamma)
    gamma = config.params.gamma
    p_now = (series(records, "p_int_root") / config.grid.volume) ** gamma
    shift = float(np.max(np.abs(p_now - refs.p_bar)))
    out[prefix + "bracket_violation"] = violation
    out[prefix + "pbar_shift"] = shift
    out[prefix + "bracket_excess"] = max(0.0, violation - shift)
    t = series(records, "t")
    for name in FIT_SERIES:
        fit = safe_fit(t, series(records, name), config.fit_window, floor)
        out.update(_fit_entries(prefix + name, fit))
    return out


def invariant_status(config: ScenarioConfig, summary: dict, status: str, prefix="") -> str:
    """Downgrade ``"ok"`` when drift or bracketing exceed the config tolerances.

    Bracketing is judged after discounting the shift of the equilibrium
    pressure caused by the measured drift of the integral of ``p^(1/gamma)``;
    that drift is itself held to ``drift_tol``.
    """
    if status != "ok":
        return status
    if summary[prefix + "drift_max"] > config.drift_tol:
        return "FAILED-INVARIANT"
    if summary[prefix + "bracket_excess"] > config.bracket_tol:
        return "FAILED-INVARIANT"
    return status


def criterion_entries(config: ScenarioConfig) -> dict:
    if config.system == "diffusion":
        return {"criterion": "not_applicable", "criterion_reason": "diffusion system"}
    try:
        crit = criterion_for_config(config)
    except CriterionNotApplicable as exc:
        return {"criterion": "not_applicable", "criterion_reason": str(exc)}
    return {"criterion": "applicable", "B0": crit.B0, "B1": crit.B1, "B1_3d": crit.B1_3d,
            "r": crit.r, "T": crit.T, "h": crit.h, "threshold": crit.threshold,
            "case": crit.case, "M0": crit.M0, "predicts_blowup": crit.predicts_blowup}


# ---------------------------------------------------------------------------
# drivers

def _snapshot_writer(out_dir, system, params, files):
    def write(state):
        if out_dir is None:
            return
        path = os.path.join(out_dir, f"snap_{system}_{state.t:.6g}.bin")
        write_snapshot(path, state, params)
        files.append(path)
    return write


def _run_paired(config: ScenarioConfig, out_dir, snapshot_times, files):
    params = config.params
    p0, u0, S0 = initial_fields(config)
    grid = config.grid
    refs = reference_constants(p0, S0, grid, params)
    gas = to_conserved(eos_density(p0, S0, params), u0, S0, grid)
    diff = DiffusionState(p0.copy(), np.array(S0, dtype=float), grid)
    # the Darcy data starts from the same pressure, so the integrals of p^(1/gamma) match
    rec_e = Recorder(params, refs, support_threshold=config.support_threshold,
                     support_center=config.support_center_point())
    rec_d = Recorder(params, refs, support_threshold=config.support_threshold,
                     support_center=config.support_center_point())
    dt_out = config.output_dt or config.t_end / 200.0
    n_out = max(1, int(round(config.t_end / dt_out)))
    times = np.linspace(0.0, config.t_end, n_out + 1)
    snap_e = _snapshot_writer(out_dir, "euler", params, files)
    snap_d = _snapshot_writer(out_dir, "diffusion", params, files)
    snaps = [ts for ts in snapshot_times if 0.0 <= ts <= config.t_end]
    records_e, records_d, gaps = [rec_e(gas)], [rec_d(diff)], [(0.0,) + darcy_gap(gas, diff, params)]
    for ts in snaps:
        if ts == 0.0:
            snap_e(gas)
            snap_d(diff)
    status, blowup_time, reason = "ok", None, ""
    steps_e = steps_d = 0
    for t_next in times[1:]:
        inner = [ts for ts in snaps if gas.t < ts <= t_next]
        res_e = integrate_euler(gas, params, float(t_next), cfl=config.cfl, muscl=config.muscl,
                                strang=config.strang, rho_floor=config.rho_floor,
                                grad_max=config.grad_max, stop_times=inner, on_stop=snap_e)
        res_d = integrate_diffusion(diff, params, float(t_next), safety=config.safety,
                                    stop_times=inner, on_stop=snap_d)
        steps_e += res_e.steps
        steps_d += res_d.steps
        for res in (res_e, res_d):
            if res.status != "ok":
                status, blowup_time, reason = res.status, res.blowup_time, res.reason
        if status != "ok":
            gas, diff = res_e.final, res_d.final
            break
        records_e.append(rec_e(res_e.final, gas))
        records_d.append(rec_d(res_d.final, diff))
        gas, diff = res_e.final, res_d.final
        gaps.append((gas.t,) + darcy_gap(gas, diff, params))
    return status, blowup_time, reason, refs, records_e, records_d, np.array(gaps), gas, (steps_e, steps_d)


def run_scenario(config: ScenarioConfig, out_dir=None, *, snapshot_times=(),
                 quiet: bool = True) -> ScenarioOutcome:
    """Run ``config`` and, if ``out_dir`` is given, write its artifacts there.

    A singularity flagged by the solver ends the run with status
    ``"singularity"``; it is not an error. Runs whose conserved-integral
    drift or ``p_bar`` bracketing exceed the config tolerances are marked
    ``"FAILED-INVARIANT"``.
    """
    files = []
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    snapshot_times = sorted(float(t) for t in snapshot_times)
    summary = {"system": config.system}
    diffusion_records, gaps = [], None
    if config.system == "paired":
        (status, blowup_time, reason, refs, records, diffusion_records, gaps, final,
         steps) = _run_paired(config, out_dir, snapshot_times, files)
        summary.update(summarize(config, records, refs, status, blowup_time=blowup_time,
                                 reason=reason, steps=steps[0]))
        summary.update(summarize(config, diffusion_records, refs, status, steps=steps[1],
                                 prefix="diffusion_"))
        gap_total = gaps[:, 1] + gaps[:, 2]
        summary.update(_fit_entries("gap", safe_fit(gaps[:, 0], gap_total, (0.5, 1.0),
                                                    1e-14 * max(1.0, refs.p_bar))))
        summary["gap_max"] = float(gap_total.max())
        summary["gap_final"] = float(gap_total[-1])
        status = invariant_status(config, summary, status)
        status = invariant_status(config, summary, status, prefix="diffusion_")
    else:
        runner = run_euler if config.system == "euler" else run_diffusion
        snap = _snapshot_writer(out_dir, config.system, config.params, files)
        result = runner(config, stop_times=snapshot_times, on_stop=snap)
        records, refs, final = result.records, result.refs, result.final
        summary.update(summarize(config, records, refs, result.status,
                                 blowup_time=result.blowup_time, reason=result.reason,
                                 steps=result.steps))
        status = invariant_status(config, summary, result.status)
    summary.update(criterion_entries(config))
    summary = {"status": status, **summary}

    if out_dir is not None:
        path = os.path.join(out_dir, "timeseries.csv")
        write_csv(path, CSV_COLUMNS, (r.row() for r in records))
        files.append(path)
        if config.system == "paired":
            path = os.path.join(out_dir, "timeseries_diffusion.csv")
            write_csv(path, CSV_COLUMNS, (r.row() for r in diffusion_records))
            files.append(path)
            path = os.path.join(out_dir, "gap.csv")
            write_csv(path, ("t", "gap_p", "gap_u"), gaps)
            files.append(path)
        path = os.path.join(out_dir, "summary.txt")
        write_summary(path, summary)
        files.append(path)
        path = os.path.join(out_dir, "config.yaml")
        with open(path, "w") as fh:
            fh.write(config.to_text())
        files.append(path)
    if not quiet:
        for key, value in summary.items():
            print(f"{key}={_fmt(value)}")
    return ScenarioOutcome(status, summary, records, refs, final, diffusion_records, gaps, files)
