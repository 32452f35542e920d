import math

import numpy as np
import pytest

from circadia import (
    ConvergenceError,
    Cosine,
    PhysicalRegimeError,
    ReducedCircuit,
    ValidationError,
    integrate,
    manifold_eta,
    shadow_reduced_dynamics,
    slow_manifold_residual,
)
from circadia.dynamics import _slow_period

RC = ReducedCircuit.from_ratios(0.5, 1.0, 0.5)


def test_removed_parasitic_branch_freezes_the_slow_pair():
    rc = ReducedCircuit.from_ratios(0.0, 1.0, 0.0)
    rec = integrate(rc, Cosine(), (0.3, -0.2, 1.0, 0.0), 2.0 * math.pi)
    final = rec.states[-1]
    # x, p_x carry no force at kappa=0; y is a unit oscillator over one period
    assert final[0] == 0.3
    assert final[1] == -0.2
    assert abs(final[2] - 1.0) < 1e-8
    assert abs(final[3]) < 1e-6
    assert rec.energy_drift < 1e-8


def test_leapfrog_is_time_reversible():
    fwd = integrate(RC, Cosine(), (0.7, 0.3, 0.4, -0.1), 5.0, dt=1e-3,
                    drift_tol=1e-6)
    x, px, y, py = fwd.states[-1]
    back = integrate(RC, Cosine(), (x, -px, y, -py), 5.0, dt=1e-3,
                     drift_tol=1e-6)
    recovered = back.states[-1]
    assert np.max(np.abs(recovered - [0.7, -0.3, 0.4, 0.1])) < 1e-12


def test_global_error_scales_at_second_order():
    eta0 = float(manifold_eta(RC, Cosine(), np.array([1.0]))[0])
    state = (1.0, 0.0, 0.5 * eta0, 0.0)
    ref = integrate(RC, Cosine(), state, 3.0, dt=5e-4,
                    drift_tol=1e-3).states[-1]
    coarse = integrate(RC, Cosine(), state, 3.0, dt=4e-3,
                       drift_tol=1e-3).states[-1]
    halved = integrate(RC, Cosine(), state, 3.0, dt=2e-3,
                       drift_tol=1e-3).states[-1]
    ratio = np.max(np.abs(coarse - ref)) / np.max(np.abs(halved - ref))
    # reference at dt/8 leaves (1-1/64)/(1/4-1/64) = 4.2 for an O(dt^2) method
    assert 3.9 < ratio < 4.5


def test_default_step_meets_the_drift_contract():
    rec = integrate(RC, Cosine(), (1.0, 0.0, 0.2, 0.0), 20.0)
    assert rec.energy_drift <= 1e-8


def test_coarse_steps_fail_loudly_with_a_suggestion():
    with pytest.raises(ConvergenceError, match="try dt"):
        integrate(RC, Cosine(), (1.0, 0.0, 0.2, 0.0), 5.0, dt=2e-2)


def test_integrate_validates_inputs():
    with pytest.raises(ValidationError, match="dt"):
        integrate(RC, Cosine(), (0, 0, 0, 0), 1.0, dt=0.06)
    with pytest.raises(ValidationError, match="dt"):
        integrate(RC, Cosine(), (0, 0, 0, 0), 1.0, dt=0.0)
    with pytest.raises(ValidationError, match="t_end"):
        integrate(RC, Cosine(), (0, 0, 0, 0), 0.0)
    rc_bad = ReducedCircuit.from_ratios(0.0, 1.0, 0.5)
    with pytest.raises(ValidationError, match="singular"):
        integrate(rc_bad, Cosine(), (0, 0, 0, 0), 1.0)


def test_trajectory_csv_schema(tmp_path):
    rec = integrate(RC, Cosine(), (1.0, 0.0, 0.2, 0.0), 0.5)
    path = tmp_path / "traj.csv"
    rec.to_csv(str(path))
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# units:")
    assert lines[1] == "t,x,p_x,y,p_y,E"
    assert len(lines) == 2 + rec.times.size


def test_zero_coupling_manifold_is_the_identity():
    rc = ReducedCircuit.from_ratios(0.3, 1.0, 0.0)
    xs = np.linspace(-2.0, 2.0, 11)
    assert np.max(np.abs(manifold_eta(rc, Cosine(), xs) - xs)) < 1e-12


def test_on_manifold_initialization_keeps_residuals_at_their_order():
    rc = ReducedCircuit.from_ratios(0.2, 1.0, 0.5)
    y_resid, py_resid = slow_manifold_residual(rc, Cosine(), 1.0)
    assert y_resid < 5e-4
    assert py_resid < 1e-2


def test_residual_probe_refuses_bad_regimes():
    with pytest.raises(PhysicalRegimeError):
        slow_manifold_residual(ReducedCircuit.from_ratios(0.2, 1.0, 2.0),
                               Cosine(), 1.0)
    with pytest.raises(ValidationError):
        slow_manifold_residual(ReducedCircuit.from_ratios(0.0, 1.0, 0.0),
                               Cosine(), 1.0)


def test_reduced_flow_shadows_the_full_system():
    rc = ReducedCircuit.from_ratios(0.2, 1.0, 0.5)
    period = _slow_period(rc)
    cmp = shadow_reduced_dynamics(rc, Cosine(), 1.0, 0.0, t_end=period)
    assert cmp.slow_period == pytest.approx(period, rel=1e-12)
    assert cmp.max_deviation < 0.05
    assert cmp.x_full.shape == cmp.x_reduced.shape
    expected = 2.0 * math.pi / (rc.kappa**2 * math.sqrt(rc.beta / (1.0 + rc.beta)))
    assert period == pytest.approx(expected, rel=1e-12)


def test_shadow_refuses_supercritical_screening():
    with pytest.raises(PhysicalRegimeError):
        shadow_reduced_dynamics(ReducedCircuit.from_ratios(0.2, 1.0, 1.5),
                                Cosine(), 1.0, 0.0, t_end=1.0)
