"""
Scenario configuration: schema, validation and initial-data profiles.

A config document is YAML with optional sections::

    system: euler            # euler | diffusion | paired
    t_end: 10.0
    grid:    {dim: 1, n: 512, length: 1.0, bc: reflecting}
    gas:     {A: 1.0, gamma: 1.4, a: 1.0}
    initial:
      p_ref: 1.0
      profiles:
        - {kind: cosine_pressure, eps: 0.05, mode: 1}
        - {kind: gaussian_bump, target: S, amplitude: 0.1, width: 0.1, center: 0.5}

Every leaf key may also be written at top level (``n: 64``,
``profile: equilibrium``). Unknown keys are rejected. :func:`parse_config`
returns a :class:`ScenarioConfig` with all defaults filled in, and
:meth:`ScenarioConfig.to_text` writes a document that parses back to an
equal config.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import yaml

from .core import GasParams, Grid


class ConfigError(ValueError):
    """Config document violates the schema."""


SYSTEMS = ("euler", "diffusion", "paired")
TARGETS = ("p", "S", "u")

# profile kind -> (required params, optional params with defaults)
PROFILES = {
    "equilibrium": ((), {}),
    "cosine_pressure": (("eps",), {"mode": 1, "axis": 0}),
    "gaussian_bump": (("amplitude", "width"), {"center": None, "target": "p", "axis": 0}),
    "compact_bump": (("amplitude", "radius"), {"center": None, "target": "p", "axis": 0}),
    "piecewise": (("values", "breakpoints"), {"target": "p", "axis": 0}),
    "momentum_pulse": (("amplitude", "radius"), {"center": None}),
    "random_modes": (("amplitude",), {"modes": 4, "target": "p"}),
}

SECTIONS = {
    "run": {
        "system": ("euler", str),
        "t_end": (1.0, float),
        "output_stride": (10, int),
        "output_dt": (None, float),
        "seed": (0, int),
    },
    "grid": {
        "dim": (1, int),
        "n": (64, "ints"),
        "length": (1.0, "floats"),
        "lower": (0.0, "floats"),
        "bc": ("reflecting", "strs"),
        "ghost": (2, int),
    },
    "gas": {
        "A": (1.0, float),
        "gamma": (1.4, float),
        "a": (1.0, float),
        "R_gas": (None, float),
        "C_V": (None, float),
    },
    "initial": {
        "p_ref": (1.0, float),
        "S_ref": (0.0, float),
        "profiles": ([], list),
    },
    "numerics": {
        "cfl": (0.4, float),
        "safety": (0.9, float),
        "muscl": (True, bool),
        "strang": (False, bool),
    },
    "thresholds": {
        "support": (1e-4, float),
        "support_center": (None, "floats"),
        "grad_max": (1e4, float),
        "rho_floor": (1e-10, float),
        "drift_tol": (1e-2, float),
        "bracket_tol": (1e-6, float),
    },
    "fit": {
        "window": ([0.4, 1.0], "floats"),
    },
    "criterion": {
        "horizon": (None, float),
        "horizon_fraction": (0.8, float),
    },
}

_LEAF_SECTION = {key: sec for sec, keys in SECTIONS.items() for key in keys}


@dataclass
class ScenarioConfig:
    system: str
    grid: Grid
    params: GasParams
    t_end: float
    profiles: list = field(default_factory=list)
    p_ref: float = 1.0
    S_ref: float = 0.0
    output_stride: int = 10
    output_dt: float | None = None
    seed: int = 0
    cfl: float = 0.4
    safety: float = 0.9
    muscl: bool = True
    strang: bool = False
    support_threshold: float = 1e-4
    support_center: tuple | None = None
    grad_max: float = 1e4
    rho_floor: float = 1e-10
    drift_tol: float = 1e-2
    bracket_tol: float = 1e-6
    fit_window: tuple = (0.4, 1.0)
    horizon: float | None = None
    horizon_fraction: float = 0.8

    def support_center_point(self):
        if self.support_center is not None:
            return tuple(self.support_center)
        return tuple(lo + 0.5 * L for lo, L in zip(self.grid.lower, self.grid.length))

    def to_document(self) -> dict:
        g, gas = self.grid, self.params
        return {
            "system": self.system,
            "t_end": self.t_end,
            "output_stride": self.output_stride,
            "output_dt": self.output_dt,
            "seed": self.seed,
            "grid": {"dim": g.dim, "n": list(g.n), "length": list(g.length),
                     "lower": list(g.lower), "bc": list(g.bc), "ghost": g.ghost},
            "gas": {"A": gas.A, "gamma": gas.gamma, "a": gas.a, "R_gas": gas.R_gas, "C_V": gas.C_V},
            "initial": {"p_ref": self.p_ref, "S_ref": self.S_ref,
                        "profiles": [dict(p) for p in self.profiles]},
            "numerics": {"cfl": self.cfl, "safety": self.safety, "muscl": self.muscl,
                         "strang": self.strang},
            "thresholds": {"support": self.support_threshold,
                           "support_center": None if self.support_center is None else list(self.support_center),
                           "grad_max": self.grad_max, "rho_floor": self.rho_floor,
                           "drift_tol": self.drift_tol, "bracket_tol": self.bracket_tol},
            "fit": {"window": list(self.fit_window)},
            "criterion": {"horizon": self.horizon, "horizon_fraction": self.horizon_fraction},
        }

    def to_text(self) -> str:
        return yaml.safe_dump(self.to_document(), sort_keys=False)

    def replace(self, **changes) -> "ScenarioConfig":
        """Copy with top-level fields or ``grid``/``params`` attributes changed."""
        from dataclasses import replace as _replace

        grid_keys = {"dim", "n", "length", "lower", "bc", "ghost"}
        gas_keys = {"A", "gamma", "a", "R_gas", "C_V"}
        grid_changes = {k: changes.pop(k) for k in list(changes) if k in grid_keys}
        gas_changes = {k: changes.pop(k) for k in list(changes) if k in gas_keys}
        out = _replace(self, **changes)
        if grid_changes:
            out.grid = _replace(out.grid, **grid_changes)
        if gas_changes:
            out.params = _replace(out.params, **gas_changes)
        return out


def _coerce(key, value, kind):
    if value is None:
        return None
    try:
        if kind is float:
            if isinstance(value, bool):
                raise TypeError
            return float(value)
        if kind is int:
            if isinstance(value, bool) or float(value) != int(value):
                raise TypeError
            return int(value)
        if kind is bool:
            if not isinstance(value, bool):
                raise TypeError
            return value
        if kind is str:
            if not isinstance(value, str):
                raise TypeError
            return value
        if kind is list:
            if isinstance(value, (str, dict)):
                value = [value]
            return list(value)
        scalar = {"ints": int, "floats": float, "strs": str}[kind]
        items = value if isinstance(value, (list, tuple)) else [value]
        return [_coerce(key, v, scalar) for v in items]
    except (TypeError, ValueError):
        raise ConfigError(f"{key}: expected {getattr(kind, '__name__', kind)}, got {value!r}") from None


def _flatten(doc: dict) -> dict:
    flat = {}
    for key, value in doc.items():
        if key in SECTIONS and key != "run" and isinstance(value, dict):
            for sub, sub_value in value.items():
                if sub not in SECTIONS[key]:
                    raise ConfigError(f"unknown key {key}.{sub}")
                flat[sub] = sub_value
        elif key == "profile":
            flat.setdefault("profiles", []).append(value)
        elif key in _LEAF_SECTION:
            flat[key] = value
        else:
            raise ConfigError(f"unknown key {key}")
    return flat


def _check_profile(spec, dim) -> dict:
    if isinstance(spec, str):
        spec = {"kind": spec}
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigError(f"profiles: each entry needs a kind, got {spec!r}")
    kind = spec["kind"]
    if kind not in PROFILES:
        raise ConfigError(f"profiles: unknown kind {kind!r}; expected one of {sorted(PROFILES)}")
    required, optional = PROFILES[kind]
    for key in spec:
        if key != "kind" and key not in required and key not in optional:
            raise ConfigError(f"profiles.{kind}: unknown parameter {key}")
    for key in required:
        if key not in spec:
            raise ConfigError(f"profiles.{kind}: missing parameter {key}")
    out = {"kind": kind}
    for key in required:
        out[key] = spec[key]
    for key, default in optional.items():
        out[key] = spec.get(key, default)
    if "target" in out and out["target"] not in TARGETS:
        raise ConfigError(f"profiles.{kind}.target must be one of {TARGETS}")
    if out.get("center") is not None:
        c = out["center"]
        out["center"] = [float(v) for v in (c if isinstance(c, (list, tuple)) else [c] * dim)]
    for key in ("amplitude", "width", "radius", "eps"):
        if key in out:
            out[key] = float(out[key])
    for key in ("width", "radius"):
        if key in out and not out[key] > 0:
            raise ConfigError(f"profiles.{kind}.{key} > 0 required")
    if kind == "cosine_pressure":
        out["mode"] = int(out["mode"])
        if not abs(out["eps"]) < 1:
            raise ConfigError("profiles.cosine_pressure.eps must satisfy |eps| < 1")
    if kind == "piecewise":
        vals = [float(v) for v in out["values"]]
        brk = [float(v) for v in out["breakpoints"]]
        if len(vals) != len(brk) + 1 or brk != sorted(brk):
            raise ConfigError("profiles.piecewise: need len(values) == len(breakpoints) + 1, sorted breakpoints")
        out["values"], out["breakpoints"] = vals, brk
    if kind == "random_modes":
        out["modes"] = int(out["modes"])
    return out


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a YAML scenario document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"malformed document: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a mapping")
    flat = _flatten(doc)
    values = {}
    for key, sec in _LEAF_SECTION.items():
        default, kind = SECTIONS[sec][key]
        values[key] = _coerce(key, flat[key], kind) if key in flat else default
    return build_config(values)


def build_config(v: dict) -> ScenarioConfig:
    if v["system"] not in SYSTEMS:
        raise ConfigError(f"system must be one of {SYSTEMS}, got {v['system']!r}")
    dim = v["dim"]
    if dim not in (1, 2, 3):
        raise ConfigError("dim must be 1, 2 or 3")
    n = v["n"] if isinstance(v["n"], list) else [v["n"]]
    if any(int(k) < 4 for k in n):
        raise ConfigError(f"n >= 4 required, got {n}")
    for name in ("length",):
        vals = v[name] if isinstance(v[name], list) else [v[name]]
        if any(not x > 0 for x in vals):
            raise ConfigError(f"{name} > 0 required")
    if not v["gamma"] > 1:
        raise ConfigError(f"gamma > 1 required, got {v['gamma']}")
    if not v["A"] > 0:
        raise ConfigError(f"A > 0 required, got {v['A']}")
    if not v["a"] > 0:
        raise ConfigError(f"a > 0 required, got {v['a']}")
    if not v["t_end"] >= 0:
        raise ConfigError("t_end >= 0 required")
    if not 0 < v["cfl"] <= 1:
        raise ConfigError("cfl must lie in (0, 1]")
    if not 0 < v["safety"] <= 1:
        raise ConfigError("safety must lie in (0, 1]")
    if v["output_stride"] < 1:
        raise ConfigError("output_stride >= 1 required")
    if v["output_dt"] is not None and not v["output_dt"] > 0:
        raise ConfigError("output_dt > 0 required")
    if not v["p_ref"] > 0:
        raise ConfigError("p_ref > 0 required")
    for key in ("support", "grad_max", "rho_floor", "drift_tol", "bracket_tol"):
        if not v[key] > 0:
            raise ConfigError(f"{key} > 0 required")
    win = v["window"]
    if len(win) != 2 or not 0 <= win[0] < win[1] <= 1:
        raise ConfigError("window must be two fractions 0 <= lo < hi <= 1")
    if v["horizon"] is not None and not v["horizon"] > 0:
        raise ConfigError("horizon > 0 required")
    if not 0 < v["horizon_fraction"] < 1:
        raise ConfigError("horizon_fraction must lie in (0, 1)")
    try:
        grid = Grid(dim=dim, n=tuple(n) if len(n) > 1 else n[0], length=_scalar_or_tuple(v["length"]),
                    lower=_scalar_or_tuple(v["lower"]), ghost=v["ghost"], bc=_scalar_or_tuple(v["bc"]))
        params = GasParams(A=v["A"], gamma=v["gamma"], a=v["a"], R_gas=v["R_gas"], C_V=v["C_V"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if grid.ghost < 2 and v["muscl"]:
        raise ConfigError("ghost >= 2 required with muscl")
    profiles = [_check_profile(p, dim) for p in v["profiles"]] or [{"kind": "equilibrium"}]
    center = v["support_center"]
    if center is not None and len(center) != dim:
        raise ConfigError(f"support_center needs {dim} coordinates")
    cfg = ScenarioConfig(
        system=v["system"], grid=grid, params=params, t_end=v["t_end"], profiles=profiles,
        p_ref=v["p_ref"], S_ref=v["S_ref"], output_stride=v["output_stride"],
        output_dt=v["output_dt"], seed=v["seed"], cfl=v["cfl"], safety=v["safety"],
        muscl=v["muscl"], strang=v["strang"], support_threshold=v["support"],
        support_center=None if center is None else tuple(center), grad_max=v["grad_max"],
        rho_floor=v["rho_floor"], drift_tol=v["drift_tol"], bracket_tol=v["bracket_tol"],
        fit_window=tuple(win), horizon=v["horizon"], horizon_fraction=v["horizon_fraction"],
    )
    p0, _, _ = initial_fields(cfg)
    if not np.all(p0 > 0):
        raise ConfigError("initial profiles must keep p0 > 0 (hence rho0 > 0) everywhere")
    return cfg


def _scalar_or_tuple(vals):
    if isinstance(vals, list):
        return vals[0] if len(vals) == 1 else tuple(vals)
    return vals


def make_config(**kwargs) -> ScenarioConfig:
    """Build a validated config from keyword leaves, e.g. ``make_config(n=128, t_end=1)``."""
    flat = _flatten(kwargs)
    values = {}
    for key, sec in _LEAF_SECTION.items():
        default, kind = SECTIONS[sec][key]
        values[key] = _coerce(key, flat[key], kind) if key in flat else default
    return build_config(values)


# ---------------------------------------------------------------------------
# initial data

def _center(spec, grid):
    c = spec.get("center")
    if c is None:
        return [lo + 0.5 * L for lo, L in zip(grid.lower, grid.length)]
    return c


def _radius2(x, center):
    return sum((x[k] - center[k]) ** 2 for k in range(len(center)))


def _add(target, values, p, u, S, axis):
    if target == "p":
        p += values
    elif target == "S":
        S += values
    else:
        u[axis] += values


def initial_fields(config: ScenarioConfig):
    """Initial ``(p0, u0, S0)`` on the config grid, profiles applied in order.

    ``cosine_pressure`` multiplies ``p`` by ``1 + eps cos(mode pi s / L)``;
    bumps add to their target; ``piecewise`` replaces its target;
    ``momentum_pulse`` adds a radial velocity ``amplitude (x-c)/R (1 - r^2/R^2)^2``
    for ``r < R``.
    """
    grid = config.grid
    x = grid.mesh()
    p = np.full(grid.shape, config.p_ref)
    S = np.full(grid.shape, config.S_ref)
    u = np.zeros((grid.dim,) + grid.shape)
    rng = np.random.default_rng(config.seed)
    for spec in config.profiles:
        kind = spec["kind"]
        if kind == "equilibrium":
            continue
        if kind == "cosine_pressure":
            k = spec["axis"]
            s = x[k] - grid.lower[k]
            p *= 1.0 + spec["eps"] * np.cos(spec["mode"] * np.pi * s / grid.length[k])
        elif kind == "gaussian_bump":
            r2 = _radius2(x, _center(spec, grid))
            _add(spec["target"], spec["amplitude"] * np.exp(-0.5 * r2 / spec["width"] ** 2),
                 p, u, S, spec["axis"])
        elif kind == "compact_bump":
            r2 = _radius2(x, _center(spec, grid)) / spec["radius"] ** 2
            _add(spec["target"], spec["amplitude"] * np.clip(1.0 - r2, 0.0, None) ** 4,
                 p, u, S, spec["axis"])
        elif kind == "piecewise":
            k = spec["axis"]
            idx = np.searchsorted(spec["breakpoints"], x[k], side="right")
            vals = np.asarray(spec["values"])[idx]
            if spec["target"] == "p":
                p = vals.astype(float)
            elif spec["target"] == "S":
                S = vals.astype(float)
            else:
                u[k] = vals
        elif kind == "momentum_pulse":
            c = spec.get("center") or [0.0] * grid.dim
            R = spec["radius"]
            r2 = _radius2(x, c) / R ** 2
            shape = np.clip(1.0 - r2, 0.0, None) ** 2
            for k in range(grid.dim):
                u[k] += spec["amplitude"] * (x[k] - c[k]) / R * shape
        elif kind == "random_modes":
            # cosines are compatible with zero-flux walls
            total = np.zeros(grid.shape)
            for _ in range(spec["modes"]):
                ks = rng.integers(1, 4, size=grid.dim)
                coef = rng.uniform(-1, 1)
                term = np.ones(grid.shape)
                for k in range(grid.dim):
                    term = term * np.cos(ks[k] * np.pi * (x[k] - grid.lower[k]) / grid.length[k])
                total += coef * term
            total *= spec["amplitude"] / max(1.0, spec["modes"])
            _add(spec["target"], total, p, u, S, 0)
    return p, u, S


