import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dampedeuler.core import (
    BlowupError,
    DiffusionState,
    DomainError,
    GasParams,
    Grid,
    StateCorruptionError,
    eos_density,
    eos_pressure,
    march,
    reference_constants,
    to_conserved,
    to_primitive,
)


# ---------------------------------------------------------------------------
# equation of state

def test_pressure_law_unit_values():
    params = GasParams(A=1.0, gamma=1.4)
    assert eos_pressure(1.0, 0.0, params) == pytest.approx(1.0)
    # p = A rho^gamma e^S with A=2, gamma=2, rho=3, S=ln 5
    assert eos_pressure(3.0, np.log(5.0), GasParams(A=2.0, gamma=2.0)) == pytest.approx(90.0)


@settings(max_examples=60, deadline=None)
@given(rho=st.floats(1e-3, 1e3), S=st.floats(-3, 3), gamma=st.floats(1.0, 3.0),
       A=st.floats(0.1, 10))
def test_density_inverts_pressure(rho, S, gamma, A):
    params = GasParams(A=A, gamma=gamma)
    p = eos_pressure(rho, S, params)
    assert eos_density(p, S, params) == pytest.approx(rho, rel=1e-12)


@pytest.mark.parametrize("bad", [0.0, -1.0])
def test_eos_rejects_non_positive(bad):
    params = GasParams()
    with pytest.raises(DomainError):
        eos_pressure(bad, 0.0, params)
    with pytest.raises(DomainError):
        eos_density(bad, 0.0, params)


@pytest.mark.parametrize("kwargs", [{"A": 0}, {"gamma": 0.9}, {"a": 0}, {"a": -1}])
def test_gas_params_validation(kwargs):
    with pytest.raises(ValueError):
        GasParams(**kwargs)


# ---------------------------------------------------------------------------
# grids

def test_grid_broadcasts_per_axis_values():
    g = Grid(dim=2, n=8, length=2.0)
    assert g.n == (8, 8)
    assert g.dx == (0.25, 0.25)
    assert g.bc == ("reflecting", "reflecting")
    assert g.padded_shape == (12, 12)
    assert g.volume == pytest.approx(4.0)
    assert g.diameter == pytest.approx(np.sqrt(8.0))


@pytest.mark.parametrize("kwargs, msg", [
    ({"n": 2}, "n >= 4"),
    ({"length": 0.0}, "length > 0"),
    ({"bc": "sticky"}, "unknown boundary"),
    ({"dim": 4}, "dim must be"),
])
def test_grid_validation(kwargs, msg):
    base = {"dim": 1, "n": 16, "length": 1.0}
    base.update(kwargs)
    with pytest.raises(ValueError, match=msg):
        Grid(**base)


def test_midpoint_quadrature_is_exact_for_linear_fields():
    g = Grid(dim=2, n=(10, 6), length=(1.0, 3.0), lower=(-0.5, 1.0))
    x, y = g.mesh()
    # integral of 2 + x - y over [-0.5, 0.5] x [1, 4] is 3*2 + 0 - 3*2.5
    assert g.integrate(2.0 + x - y) == pytest.approx(-1.5, rel=1e-13)
    assert g.mean(np.ones(g.shape)) == pytest.approx(1.0)


def test_contains_is_closed():
    g = Grid(dim=1, n=8, length=2.0, lower=-1.0)
    assert g.contains([0.0]) and g.contains([-1.0]) and g.contains([1.0])
    assert not g.contains([1.0001])


# ---------------------------------------------------------------------------
# states and reference constants

def test_conserved_primitive_round_trip():
    g = Grid(dim=2, n=8, length=1.0)
    x, y = g.mesh()
    rho = 1.0 + 0.2 * np.sin(2 * np.pi * x)
    u = np.stack([0.1 * y, -0.3 * x])
    S = 0.05 * x * y
    state = to_conserved(rho, u, S, g)
    r2, u2, S2, p2 = to_primitive(state, GasParams())
    np.testing.assert_allclose(r2, rho)
    np.testing.assert_allclose(u2, u)
    np.testing.assert_allclose(S2, S, atol=1e-15)
    np.testing.assert_allclose(p2, eos_pressure(rho, S, GasParams()))


def test_to_conserved_broadcasts_constant_velocity():
    g = Grid(dim=2, n=4, length=1.0)
    state = to_conserved(2.0, [1.0, -1.0], 0.0, g)
    assert state.mom.shape == (2, 4, 4)
    assert np.all(state.mom[0] == 2.0) and np.all(state.mom[1] == -2.0)


def test_to_primitive_rejects_corrupt_state():
    g = Grid(dim=1, n=4, length=1.0)
    state = to_conserved(1.0, 0.0, 0.0, g)
    state.rho[1] = np.nan
    with pytest.raises(StateCorruptionError):
        to_primitive(state, GasParams())


def test_reference_constants_uniform_state():
    g = Grid(dim=1, n=16, length=1.0)
    params = GasParams(gamma=1.4)
    refs = reference_constants(np.full(16, 2.0), np.zeros(16), g, params)
    assert refs.p_bar == pytest.approx(2.0)
    assert refs.rho_bar == pytest.approx(2.0 ** (1 / 1.4))
    assert refs.k1 == pytest.approx(1.0 / np.sqrt(1.4 * refs.rho_bar * 2.0))
    assert refs.k2 == pytest.approx(np.sqrt(1.4 * 2.0 / refs.rho_bar))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0.1, 10.0), min_size=4, max_size=12))
def test_equilibrium_pressure_is_bracketed_and_below_the_mean(values):
    p0 = np.array(values)
    g = Grid(dim=1, n=p0.size, length=1.0)
    refs = reference_constants(p0, np.zeros_like(p0), g, GasParams())
    assert p0.min() * (1 - 1e-12) <= refs.p_bar <= p0.max() * (1 + 1e-12)
    assert refs.p_bar <= p0.mean() * (1 + 1e-12)


# ---------------------------------------------------------------------------
# time loop

def _counter_state(g):
    return DiffusionState(np.ones(g.shape), np.zeros(g.shape), g)


def _drift_step(s, dt):
    return DiffusionState(s.p + dt, s.S, s.grid, s.t + dt)


def test_march_lands_on_stop_times_and_end():
    g = Grid(dim=1, n=4, length=1.0)
    seen = []
    res = march(_counter_state(g), 1.0, lambda s: 0.3, _drift_step,
                record=lambda s, prev: s.t, output_stride=100,
                stop_times=[0.0, 0.5, 0.75, 2.0], on_stop=lambda s: seen.append(s.t))
    assert seen == [0.0, 0.5, 0.75]
    assert res.final.t == 1.0
    assert res.records[0] == 0.0 and res.records[-1] == 1.0
    np.testing.assert_allclose(res.final.p, 2.0)


def test_march_with_zero_duration_returns_initial_state():
    g = Grid(dim=1, n=4, length=1.0)
    s0 = _counter_state(g)
    res = march(s0, 0.0, lambda s: 0.1, _drift_step, record=lambda s, prev: s.t)
    assert res.final is s0 and res.steps == 0 and res.records == [0.0]


def test_march_reports_singularity_and_keeps_last_valid_state():
    g = Grid(dim=1, n=4, length=1.0)

    def step(s, dt):
        if s.t >= 0.25:
            raise BlowupError(s.t + dt, "test")
        return _drift_step(s, dt)

    res = march(_counter_state(g), 1.0, lambda s: 0.125, step)
    assert res.status == "singularity"
    assert res.blowup_time == pytest.approx(0.375)
    assert res.final.t == pytest.approx(0.25)
    assert res.reason == "test"
