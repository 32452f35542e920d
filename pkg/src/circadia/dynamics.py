"""Symplectic integration of the regularized two-mode classical system.

Equations of motion of the separable dimensionless Hamiltonian

    h = 1/2 kappa^2 p_x^2 + 1/2 p_y^2 + 1/2 (y - kappa*x)^2
        + kappa^2 (lambda_J/xi) u(y/(kappa*sqrt(xi)))

    x' = kappa^2 p_x          p_x' = kappa (y - kappa x)
    y' = p_y                  p_y' = kappa x - y
                                     - kappa (lambda_J/xi^(3/2)) u'(y/(kappa sqrt(xi)))

integrated with leapfrog (kick-drift-kick). The fast mode has period
close to 2*pi in this time unit; the slow mode moves at O(kappa^2). Time is
in 1/omega_C units and energies in kappa^2*H/(hbar*omega_C) units,
matching the extended-basis 2D quantum operator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import ConvergenceError, PhysicalRegimeError, ValidationError
from .params import ReducedCircuit
from .potentials import BiasedCosine, Cosine, PolynomialEven, PotentialModel
from .reduction import (effective_potential, invertibility_threshold,
                        solve_branch_extended)

try:
    from numba import njit
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def wrap(f):
            return f
        return wrap if not (args and callable(args[0])) else args[0]

TWO_PI = 2.0 * math.pi
_RECORD_CAP = 16384


@dataclass
class TrajectoryRecord:
    """Strided samples of one trajectory with its energy series."""

    times: np.ndarray
    states: np.ndarray          # shape (n, 4): x, p_x, y, p_y
    energy: np.ndarray
    kappa: float
    xi: float
    lambdaJ: float
    dt: float

    @property
    def energy_drift(self) -> float:
        e0 = float(self.energy[0])
        scale = max(abs(e0), 1e-12)
        return float(np.max(np.abs(self.energy - e0))) / scale

    def to_csv(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write("# units: t in 1/omega_C; x,p_x,y,p_y dimensionless "
                    "(regularized coordinates); E in kappa^2*H/(hbar*omega_C) "
                    "units\n")
            f.write("t,x,p_x,y,p_y,E\n")
            for t, s, e in zip(self.times, self.states, self.energy):
                f.write(f"{float(t)!r},{float(s[0])!r},{float(s[1])!r},"
                        f"{float(s[2])!r},{float(s[3])!r},{float(e)!r}\n")


@njit(cache=False)
def _run_sine(x, px, y, py, dt, nsteps, stride, rec, kappa, cgrad,
              inv_scale, shift):
    idx = 1
    for s in range(nsteps):
        px += 0.5 * dt * kappa * (y - kappa * x)
        py += 0.5 * dt * (kappa * x - y
                          - cgrad * math.sin(y * inv_scale - shift))
        x += dt * kappa * kappa * px
        y += dt * py
        px += 0.5 * dt * kappa * (y - kappa * x)
        py += 0.5 * dt * (kappa * x - y
                          - cgrad * math.sin(y * inv_scale - shift))
        if (s + 1) % stride == 0:
            rec[idx, 0] = x
            rec[idx, 1] = px
            rec[idx, 2] = y
            rec[idx, 3] = py
            idx += 1
    return x, px, y, py


@njit(cache=False)
def _run_poly(x, px, y, py, dt, nsteps, stride, rec, kappa, cgrad,
              inv_scale, dcoefs):
    idx = 1
    for s in range(nsteps):
        px += 0.5 * dt * kappa * (y - kappa * x)
        phi = y * inv_scale
        phi2 = phi * phi
        du = 0.0
        for j in range(dcoefs.size - 1, -1, -1):
            du = du * phi2 + dcoefs[j]
        du *= phi
        py += 0.5 * dt * (kappa * x - y - cgrad * du)
        x += dt * kappa * kappa * px
        y += dt * py
        px += 0.5 * dt * kappa * (y - kappa * x)
        phi = y * inv_scale
        phi2 = phi * phi
        du = 0.0
        for j in range(dcoefs.size - 1, -1, -1):
            du = du * phi2 + dcoefs[j]
        du *= phi
        py += 0.5 * dt * (kappa * x - y - cgrad * du)
        if (s + 1) % stride == 0:
            rec[idx, 0] = x
            rec[idx, 1] = px
            rec[idx, 2] = y
            rec[idx, 3] = py
            idx += 1
    return x, px, y, py


def _run_generic(x, px, y, py, dt, nsteps, stride, rec, kappa, cgrad,
                 inv_scale, du):
    idx = 1
    for s in range(nsteps):
        px += 0.5 * dt * kappa * (y - kappa * x)
        py += 0.5 * dt * (kappa * x - y - cgrad * float(du(y * inv_scale)))
        x += dt * kappa * kappa * px
        y += dt * py
        px += 0.5 * dt * kappa * (y - kappa * x)
        py += 0.5 * dt * (kappa * x - y - cgrad * float(du(y * inv_scale)))
        if (s + 1) % stride == 0:
            rec[idx, 0] = x
            rec[idx, 1] = px
            rec[idx, 2] = y
            rec[idx, 3] = py
            idx += 1
    return x, px, y, py


def _dispatch_kernel(p: PotentialModel, rc: ReducedCircuit):
    """Pick the compiled force kernel; fall back to a generic python loop."""
    kappa = rc.kappa
    # kappa=0 only reaches here with lambdaJ=0 (integrate rejects the rest),
    # where the junction force vanishes and the argument scale is unused.
    inv_scale = 1.0 / (kappa * math.sqrt(rc.xi)) if kappa > 0 else 0.0
    cgrad = kappa * rc.lambdaJ / rc.xi**1.5
    if rc.lambdaJ == 0.0 or isinstance(p, Cosine):
        return ("sine", cgrad, inv_scale, 0.0)
    if isinstance(p, BiasedCosine):
        return ("sine", cgrad, inv_scale, float(p.phi_ext))
    if isinstance(p, PolynomialEven):
        c = np.asarray(p.coeffs, dtype=float)
        dcoefs = np.array([2.0 * (j + 1) * c[j + 1]
                           for j in range(c.size - 1)], dtype=float)
        if dcoefs.size == 0:
            dcoefs = np.zeros(1)
        return ("poly", cgrad, inv_scale, dcoefs)
    return ("generic", cgrad, inv_scale, p.du)


def _energy(states: np.ndarray, rc: ReducedCircuit,
            p: PotentialModel) -> np.ndarray:
    x, px, y, py = states.T
    e = 0.5 * rc.kappa**2 * px**2 + 0.5 * py**2 + 0.5 * (y - rc.kappa * x)**2
    if rc.lambdaJ != 0.0 and rc.kappa > 0:
        u = np.asarray(p.u(y / (rc.kappa * math.sqrt(rc.xi))), dtype=float)
        e = e + rc.kappa**2 * (rc.lambdaJ / rc.xi) * u
    return e


def integrate(rc: ReducedCircuit, p: PotentialModel, initial_state,
              t_end: float, dt: float = 2e-4,
              drift_tol: float = 1e-8) -> TrajectoryRecord:
    """Leapfrog trajectory of the regularized system.

    dt must resolve the O(1)-period fast oscillation (dt <= 0.05 enforced);
    the default 2e-4 keeps the leapfrog energy oscillation below the 1e-8
    relative drift bound checked after the run. A drift above drift_tol
    raises with a suggested step.
    """
    if dt <= 0 or dt > 0.05:
        raise ValidationError("dt must lie in (0, 0.05]")
    if t_end <= 0:
        raise ValidationError("t_end must be > 0")
    if rc.kappa <= 0 and rc.lambdaJ != 0.0:
        raise ValidationError("kappa=0 with lambdaJ>0 is singular")
    nsteps = max(1, int(math.ceil(t_end / dt - 1e-9)))
    dt_eff = t_end / nsteps
    stride = max(1, nsteps // _RECORD_CAP)
    nrec = nsteps // stride + 1
    rec = np.empty((nrec, 4))
    x0, px0, y0, py0 = (float(v) for v in initial_state)
    rec[0] = (x0, px0, y0, py0)

    kind, cgrad, inv_scale, extra = _dispatch_kernel(p, rc)
    if rc.kappa == 0.0:
        inv_scale = 0.0  # frozen x; u never enters (lambdaJ forced 0 above)
    if kind == "sine" and _HAVE_NUMBA:
        xf, pxf, yf, pyf = _run_sine(x0, px0, y0, py0, dt_eff, nsteps, stride,
                                     rec, rc.kappa, cgrad, inv_scale, extra)
    elif kind == "poly" and _HAVE_NUMBA:
        xf, pxf, yf, pyf = _run_poly(x0, px0, y0, py0, dt_eff, nsteps, stride,
                                     rec, rc.kappa, cgrad, inv_scale, extra)
    else:
        du = extra if kind == "generic" else (
            (lambda q, s=extra: math.sin(q - s)) if kind == "sine"
            else p.du)
        xf, pxf, yf, pyf = _run_generic(x0, px0, y0, py0, dt_eff, nsteps,
                                        stride, rec, rc.kappa, cgrad,
                                        inv_scale, du)

    times = dt_eff * stride * np.arange(nrec)
    states = rec
    if nsteps % stride != 0:
        states = np.vstack([rec, [xf, pxf, yf, pyf]])
        times = np.append(times, t_end)
    energy = _energy(states, rc, p)
    record = TrajectoryRecord(times=times, states=states, energy=energy,
                              kappa=rc.kappa, xi=rc.xi, lambdaJ=rc.lambdaJ,
                              dt=dt_eff)
    if record.energy_drift > drift_tol:
        suggested = dt_eff * math.sqrt(drift_tol / record.energy_drift) * 0.7
        raise ConvergenceError(
            f"energy drift {record.energy_drift:.3e} exceeds {drift_tol:.1e}; "
            f"try dt <= {suggested:.2e}",
            detail=record.energy_drift)
    return record


def _slow_period(rc: ReducedCircuit) -> float:
    """Harmonic slow period near a cosine-family minimum; default horizon."""
    if rc.beta > 0:
        omega = rc.kappa**2 * math.sqrt(rc.beta / (1.0 + rc.beta))
    else:
        omega = rc.kappa**2
    return TWO_PI / omega


def manifold_eta(rc: ReducedCircuit, p: PotentialModel,
                 x: np.ndarray) -> np.ndarray:
    """Slow-manifold leading order: eta1 solving the extended consistency
    equation at drive x; the manifold itself sits at y = kappa*eta1(x)."""
    return solve_branch_extended(p, rc, np.atleast_1d(np.asarray(x, float)))


def slow_manifold_residual(rc: ReducedCircuit, p: PotentialModel, x0: float,
                           t_end: float | None = None, dt: float = 2e-4,
                           drift_tol: float = 1e-8) -> tuple[float, float]:
    """(max |y - kappa*eta1(x)|, max |p_y|) after on-manifold initialization.

    The first 5 fast periods are excluded: p_y(0)=0 is only accurate to the
    manifold's own order, and that initialization ringing is not the slaved
    signal being measured.
    """
    if rc.beta >= invertibility_threshold(p):
        raise PhysicalRegimeError(
            "slow manifold undefined at supercritical beta",
            beta_crit=invertibility_threshold(p))
    if rc.kappa <= 0:
        raise ValidationError("kappa must be > 0")
    if t_end is None:
        t_end = 5.0 * TWO_PI + 0.5 * _slow_period(rc)
    eta0 = float(manifold_eta(rc, p, np.array([x0]))[0])
    record = integrate(rc, p, (x0, 0.0, rc.kappa * eta0, 0.0), t_end, dt,
                       drift_tol=drift_tol)
    keep = record.times >= 5.0 * TWO_PI
    if not np.any(keep):
        raise ValidationError("t_end must exceed the 5-fast-period transient")
    x = record.states[keep, 0]
    y = record.states[keep, 2]
    py = record.states[keep, 3]
    eta = manifold_eta(rc, p, x)
    y_resid = float(np.max(np.abs(y - rc.kappa * eta)))
    py_resid = float(np.max(np.abs(py)))
    return y_resid, py_resid


@dataclass
class ShadowComparison:
    """Full x(t) against the reduced one-degree-of-freedom integration."""

    times: np.ndarray
    x_full: np.ndarray
    x_reduced: np.ndarray
    max_deviation: float
    slow_period: float


def shadow_reduced_dynamics(rc: ReducedCircuit, p: PotentialModel, x0: float,
                            px0: float, t_end: float | None = None,
                            dt: float = 2e-4) -> ShadowComparison:
    """Integrates the reduced Hamiltonian 1/2 kappa^2 p_x^2
    + (kappa^2/xi) V(x) alongside the full system from the same slow initial
    data and reports the worst x deviation on matched sample times."""
    threshold = invertibility_threshold(p)
    if rc.beta >= threshold:
        raise PhysicalRegimeError(
            "reduced dynamics undefined at supercritical beta",
            beta_crit=threshold)
    if rc.kappa <= 0:
        raise ValidationError("kappa must be > 0")
    slow_period = _slow_period(rc)
    if t_end is None:
        t_end = 2.0 * slow_period

    eta0 = float(manifold_eta(rc, p, np.array([x0]))[0])
    full = integrate(rc, p, (x0, px0, rc.kappa * eta0, 0.0), t_end, dt)

    # Force table for the reduced flow: V'(x) sampled once on a span the
    # trajectory cannot leave (energy bound), then interpolated.
    e_red = 0.5 * rc.kappa**2 * px0**2
    grid_probe = effective_potential(p, rc, "ExtendedX",
                                     np.linspace(x0 - TWO_PI * math.sqrt(rc.xi),
                                                 x0 + TWO_PI * math.sqrt(rc.xi),
                                                 512))
    vmin = float(np.min(grid_probe.V)) * rc.kappa**2 / rc.xi
    e_red += rc.kappa**2 / rc.xi * float(
        np.interp(x0, grid_probe.coordinates, grid_probe.V))
    vmax_speed = rc.kappa * math.sqrt(max(2.0 * (e_red - vmin), 0.0) + 1e-12)
    span = vmax_speed * t_end + 2.0 * TWO_PI * math.sqrt(rc.xi)
    xs = np.linspace(x0 - span, x0 + span, 8192)
    ep = effective_potential(p, rc, "ExtendedX", xs)
    vp = CubicSpline(xs, ep.Vp)

    times = full.times
    n = times.size
    x_red = np.empty(n)
    x_red[0] = x0
    coef_force = rc.kappa**2 / rc.xi
    x, px = x0, px0
    for i in range(1, n):
        seg = float(times[i] - times[i - 1])
        m = max(1, int(math.ceil(seg / 0.01)))
        h = seg / m
        for _ in range(m):
            px -= 0.5 * h * coef_force * float(vp(x))
            x += h * rc.kappa**2 * px
            px -= 0.5 * h * coef_force * float(vp(x))
        x_red[i] = x
    dev = float(np.max(np.abs(full.states[:, 0] - x_red)))
    return ShadowComparison(times=times, x_full=full.states[:, 0].copy(),
                            x_reduced=x_red, max_deviation=dev,
                            slow_period=slow_period)
