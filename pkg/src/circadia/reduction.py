"""Consistency-equation solving and effective-potential construction.

The node constraint after removing the parasitic branch is a Kepler-type
transcendental equation in the junction phase phi_c,

    phi = phi_c + beta * u'(phi_c),

single-valued for beta below 1/max(-u''). On that branch the reduced
potential is, in charging-energy units,

    V = lambda_J * ( u(phi_c) + (beta/2) * u'(phi_c)^2 ),
    V'  = lambda_J * u'(phi_c) * s,
    V'' = lambda_J * u''(phi_c) / (1 + beta*u''(phi_c)) * s^2,

with s the coordinate scale of the chosen basis: the compact coordinate is
phi itself (s=1) while the extended coordinate is x = sqrt(xi)*phi, whose
consistency equation x = eta1 + (lambda_J/xi^(3/2)) u'(eta1/sqrt(xi)) is
solved in its own variable. The two parameterizations must land on the same
curve; crosscheck_bases measures how well they do.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import (ConvergenceError, PhysicalRegimeError,
                     UnresolvedClusterError, ValidationError)
from .params import ReducedCircuit
from .potentials import PotentialModel

TWO_PI = 2.0 * math.pi

# Contract-level solve parameters.
GRID_MIN = 4096           # sign-change scan density
RESIDUAL_TOL = 1e-13      # bisection stop; contract is 1e-12
ZERO_TOL = 1e-12          # a sample with |f| below this counts as a root
_REFINE_FACTOR = 128      # subdivision of a suspicious cell


@dataclass(frozen=True)
class BranchSolution:
    """All roots of the consistency equation at one drive value."""

    drive_phi: float
    roots: tuple[float, ...]   # representative closest to the drive first
    invertible: bool
    jacobian_min: float        # min over the window of 1 + beta*u''


@dataclass
class EffectivePotential:
    """Reduced potential sampled on a grid, charging-energy units."""

    basis: str                     # "ExtendedX" | "CompactPhi"
    coordinates: np.ndarray
    V: np.ndarray
    Vp: np.ndarray
    Vpp: np.ndarray
    phi_c: np.ndarray              # branch phase per sample
    minima: list[tuple[float, float]]  # (location, curvature)
    branch_count: np.ndarray
    beta: float = 0.0
    lambdaJ: float = 0.0
    xi: float = 1.0
    meta: dict = field(default_factory=dict)

    def to_csv(self, path: str) -> None:
        write_potential_csv(path, self.basis, self.coordinates, self.V,
                            self.Vp, self.Vpp, self.branch_count)


def write_potential_csv(path, basis, coordinates, V, Vp, Vpp, branch_count):
    """Fixed schema: coordinate, V, Vp, Vpp, branch_count (V columns in E_C units)."""
    name = "x" if basis == "ExtendedX" else "phi"
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# units: coordinate={name} (dimensionless), "
                "V,Vp,Vpp in E_C units\n")
        f.write("coordinate,V,Vp,Vpp,branch_count\n")
        for c, v, vp, vpp, bc in zip(coordinates, V, Vp, Vpp, branch_count):
            f.write(f"{float(c)!r},{float(v)!r},{float(vp)!r},"
                    f"{float(vpp)!r},{int(bc)}\n")


# ---------------------------------------------------------------------------
# root finding


def _bisect_scalar(fun, lo: float, hi: float, flo: float, fhi: float) -> float:
    """Bisection on a bracket; stops on residual, guaranteed by sign change."""
    if flo == 0.0:
        return lo
    if fhi == 0.0:
        return hi
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        fm = fun(mid)
        if abs(fm) < RESIDUAL_TOL or (hi - lo) < 1e-16 * max(1.0, abs(mid)):
            return mid
        if (flo < 0.0) == (fm < 0.0):
            lo, flo = mid, fm
        else:
            hi, fhi = mid, fm
    raise ConvergenceError("bisection stalled", detail=(lo, hi))


def solve_consistency(p: PotentialModel, beta: float, phi: float,
                      window: tuple[float, float]) -> BranchSolution:
    """All real roots of phi = phi_c + beta*u'(phi_c) inside the window.

    Sign-change bracketing on a grid of >= 4096 points, bisection to residual
    below 1e-12. Cells that could hide an unresolved root pair (|f| dipping
    under the local Lipschitz reach without a sign change) get one refinement
    pass; a still-ambiguous cell raises UnresolvedClusterError.
    """
    if beta < 0:
        raise ValidationError("beta must be >= 0")
    a, b = float(window[0]), float(window[1])
    if not (b > a):
        raise ValidationError("window must have positive length")
    if p.is_periodic and (b - a) < p.period - 1e-12:
        raise ValidationError(
            f"window length {b - a} below one period {p.period} of a periodic kind")

    grid = np.linspace(a, b, GRID_MIN + 1)
    fvals = grid + beta * np.asarray(p.du(grid), dtype=float) - phi
    d2 = np.asarray(p.d2u(grid), dtype=float)
    jac = 1.0 + beta * d2
    jacobian_min = float(np.min(jac))

    def f(c: float) -> float:
        return c + beta * float(p.du(c)) - phi

    roots: list[float] = []
    h = grid[1] - grid[0]
    for i in range(GRID_MIN):
        flo, fhi = float(fvals[i]), float(fvals[i + 1])
        # The residual contract (|f| < 1e-12) accepts a near-zero sample as a
        # root outright; requiring an exact 0.0 would leave the same-sign
        # neighbor cell of such a sample suspicious at every depth.
        if abs(flo) < ZERO_TOL:
            roots.append(float(grid[i]))
            continue
        if flo * fhi < 0.0:
            roots.append(_bisect_scalar(f, float(grid[i]), float(grid[i + 1]),
                                        flo, fhi))
            continue
        # Same-sign cell: a root pair can hide only if |f| dips below the
        # cell's Lipschitz reach.
        lip = max(abs(jac[i]), abs(jac[i + 1])) + 1.0
        if min(abs(flo), abs(fhi)) < h * lip:
            roots.extend(_refine_cell(f, float(grid[i]), float(grid[i + 1]),
                                      lip, depth=0))
    if abs(float(fvals[-1])) < ZERO_TOL:
        roots.append(float(grid[-1]))

    roots = _dedupe(roots, h * 1e-6)
    ordered = _order_roots(roots, phi, p.period if p.is_periodic else None)
    invertible = jacobian_min > 0.0
    return BranchSolution(drive_phi=float(phi), roots=tuple(ordered),
                          invertible=invertible, jacobian_min=jacobian_min)


def _refine_cell(f, lo: float, hi: float, lip: float,
                 depth: int) -> list[float]:
    """Subdivide a suspicious same-sign cell until a sign change appears or
    |f| > 0 is certified by the Lipschitz bound; give up after a few levels."""
    sub = np.linspace(lo, hi, _REFINE_FACTOR + 1)
    fs = np.array([f(c) for c in sub])
    found: list[float] = []
    suspicious: list[int] = []
    h = sub[1] - sub[0]
    for j in range(_REFINE_FACTOR):
        if abs(fs[j]) < ZERO_TOL:
            found.append(float(sub[j]))
        elif fs[j] * fs[j + 1] < 0.0:
            found.append(_bisect_scalar(f, float(sub[j]), float(sub[j + 1]),
                                        float(fs[j]), float(fs[j + 1])))
        elif min(abs(fs[j]), abs(fs[j + 1])) < h * lip:
            suspicious.append(j)
    if abs(fs[-1]) < ZERO_TOL:
        found.append(float(sub[-1]))
    if found:
        return found
    if not suspicious:
        return []
    if depth >= 3:
        jmin = int(np.argmin(np.abs(fs)))
        raise UnresolvedClusterError(
            "unresolved cluster: |residual| stays at "
            f"{abs(float(fs[jmin]))!r} without a sign change", bracket=(lo, hi))
    for j in suspicious:
        found.extend(_refine_cell(f, float(sub[j]), float(sub[j + 1]),
                                  lip, depth + 1))
    return found


def _dedupe(roots: list[float], tol: float) -> list[float]:
    if not roots:
        return []
    roots = sorted(roots)
    out = [roots[0]]
    for r in roots[1:]:
        if r - out[-1] > tol:
            out.append(r)
    return out


def _order_roots(roots: list[float], drive: float,
                 period: float | None) -> list[float]:
    """Ascending order, except the representative closest to the drive leads."""
    if len(roots) < 2:
        return roots

    def dist(r: float) -> float:
        if period is None:
            return abs(r - drive)
        d = (r - drive) % period
        return min(d, period - d)

    closest = min(roots, key=dist)
    rest = sorted(r for r in roots if r != closest)
    return [closest] + rest


def invertibility_threshold(p: PotentialModel,
                            window: tuple[float, float] | None = None) -> float:
    """sup{beta : 1 + beta*u''(phi_c) > 0 for all phi_c} = 1/max(-u'').

    Grid scan plus a bounded local refinement of the maximizer; infinite when
    u'' is nonnegative everywhere on the window.
    """
    if window is None:
        window = (0.0, p.period) if p.is_periodic else (-4.0 * TWO_PI, 4.0 * TWO_PI)
    a, b = float(window[0]), float(window[1])
    grid = np.linspace(a, b, GRID_MIN + 1)
    neg_d2 = -np.asarray(p.d2u(grid), dtype=float)
    if not np.all(np.isfinite(neg_d2)):
        raise ValidationError("u'' must be bounded on the window")
    i = int(np.argmax(neg_d2))
    peak = float(neg_d2[i])
    lo = grid[max(i - 2, 0)]
    hi = grid[min(i + 2, len(grid) - 1)]
    res = minimize_scalar(lambda c: float(p.d2u(c)), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-9})
    peak = max(peak, -float(res.fun))
    if peak <= 0.0:
        return math.inf
    return 1.0 / peak


# ---------------------------------------------------------------------------
# vectorized single-branch solves (subcritical regime)


def _solve_branch_vec(residual, jac_floor: float, drives: np.ndarray,
                      reach: float) -> np.ndarray:
    """Roots of a strictly increasing residual(c, drive) for many drives.

    residual(c_array, drive_array) -> array. The initial bracket
    [drive-reach, drive+reach] is widened by doubling until it straddles the
    root, then fixed-count bisection takes over.
    """
    drives = np.asarray(drives, dtype=float)
    w = np.full_like(drives, max(reach, 1.0))
    lo = drives - w
    hi = drives + w
    for _ in range(80):
        bad_lo = residual(lo, drives) > 0.0
        bad_hi = residual(hi, drives) < 0.0
        if not (np.any(bad_lo) or np.any(bad_hi)):
            break
        w = np.where(bad_lo | bad_hi, 2.0 * w, w)
        lo = np.where(bad_lo, drives - w, lo)
        hi = np.where(bad_hi, drives + w, hi)
    else:
        raise ConvergenceError("bracket expansion failed for a monotone branch")
    for _ in range(110):
        mid = 0.5 * (lo + hi)
        fm = residual(mid, drives)
        neg = fm < 0.0
        lo = np.where(neg, mid, lo)
        hi = np.where(neg, hi, mid)
    root = 0.5 * (lo + hi)
    res = np.abs(residual(root, drives))
    if float(np.max(res)) > 1e-12:
        raise ConvergenceError("branch solve residual above 1e-12",
                               detail=float(np.max(res)))
    return root


def solve_branch_compact(p: PotentialModel, beta: float,
                         drives: np.ndarray) -> np.ndarray:
    """Single-valued phi_c(phi) for an array of drives (requires beta < beta_crit)."""

    def residual(c, d):
        return c + beta * np.asarray(p.du(c), dtype=float) - d

    reach = beta * _du_reach(p) + 1.0
    return _solve_branch_vec(residual, 0.0, drives, reach)


def solve_branch_extended(p: PotentialModel, rc: ReducedCircuit,
                          drives: np.ndarray) -> np.ndarray:
    """Single-valued eta1(x): x = eta1 + (lambda_J/xi^(3/2)) u'(eta1/sqrt(xi))."""
    coef = rc.lambdaJ / rc.xi**1.5
    sqxi = math.sqrt(rc.xi)

    def residual(c, d):
        return c + coef * np.asarray(p.du(c / sqxi), dtype=float) - d

    reach = coef * _du_reach(p) + 1.0
    return _solve_branch_vec(residual, 0.0, drives, reach)


def _du_reach(p: PotentialModel) -> float:
    """Cheap bound estimate of |u'| near the working region."""
    if p.is_periodic:
        grid = np.linspace(0.0, p.period, 512)
    else:
        grid = np.linspace(-8.0 * TWO_PI, 8.0 * TWO_PI, 512)
    try:
        vals = np.abs(np.asarray(p.du(grid), dtype=float))
    except ValidationError:
        return 1.0
    return float(np.max(vals)) if np.all(np.isfinite(vals)) else 1.0


# ---------------------------------------------------------------------------
# effective potentials


def _default_grid(p: PotentialModel, rc: ReducedCircuit, basis: str,
                  grid) -> np.ndarray:
    if isinstance(grid, (int, np.integer)):
        n = int(grid)
        if n < 16:
            raise ValidationError("grid point count must be >= 16")
        if basis == "CompactPhi":
            return np.linspace(0.0, TWO_PI, n, endpoint=False)
        span = math.sqrt(rc.xi) * TWO_PI
        return np.linspace(0.0, span, n, endpoint=False)
    arr = np.asarray(grid, dtype=float)
    if arr.ndim != 1 or arr.size < 2 or not np.all(np.diff(arr) > 0):
        raise ValidationError("grid must be a strictly increasing 1D array")
    return arr


def effective_potential(p: PotentialModel, rc: ReducedCircuit, basis: str,
                        grid=1024) -> EffectivePotential:
    """Single-branch reduced potential on a coordinate grid, E_C units.

    basis "CompactPhi": coordinate is the periodic phase phi (default grid
    [0, 2pi)). basis "ExtendedX": coordinate is x = sqrt(xi)*phi solved
    through the extended consistency equation. Refuses at or beyond the
    invertibility threshold, where the branch is multivalued.
    """
    if basis not in ("ExtendedX", "CompactPhi"):
        raise ValidationError(f"unknown basis {basis!r}")
    beta_crit = invertibility_threshold(p)
    if rc.beta >= beta_crit:
        raise PhysicalRegimeError(
            f"multivalued regime: beta={rc.beta!r} >= beta_crit={beta_crit!r}",
            beta_crit=beta_crit)
    coords = _default_grid(p, rc, basis, grid)

    if basis == "CompactPhi":
        phi_c = solve_branch_compact(p, rc.beta, coords)
        scale = 1.0
    else:
        eta1 = solve_branch_extended(p, rc, coords)
        phi_c = eta1 / math.sqrt(rc.xi)
        scale = 1.0 / math.sqrt(rc.xi)

    u0 = np.asarray(p.u(phi_c), dtype=float)
    u1 = np.asarray(p.du(phi_c), dtype=float)
    u2 = np.asarray(p.d2u(phi_c), dtype=float)
    V = rc.lambdaJ * (u0 + 0.5 * rc.beta * u1**2)
    Vp = rc.lambdaJ * u1 * scale
    Vpp = rc.lambdaJ * u2 / (1.0 + rc.beta * u2) * scale**2

    minima = _locate_minima(p, rc, basis, coords, Vp, Vpp, scale)
    return EffectivePotential(
        basis=basis, coordinates=coords, V=V, Vp=Vp, Vpp=Vpp, phi_c=phi_c,
        minima=minima, branch_count=np.ones(coords.size, dtype=int),
        beta=rc.beta, lambdaJ=rc.lambdaJ, xi=rc.xi,
        meta={"beta_crit": beta_crit})


def _locate_minima(p, rc, basis, coords, Vp, Vpp, scale):
    """Minima via sign changes (or exact zeros) of V' along the grid."""

    def vprime(c: float) -> float:
        arr = np.array([c])
        if basis == "CompactPhi":
            pc = solve_branch_compact(p, rc.beta, arr)[0]
        else:
            pc = solve_branch_extended(p, rc, arr)[0] / math.sqrt(rc.xi)
        return rc.lambdaJ * float(p.du(pc)) * scale

    def vsecond(c: float) -> float:
        arr = np.array([c])
        if basis == "CompactPhi":
            pc = solve_branch_compact(p, rc.beta, arr)[0]
        else:
            pc = solve_branch_extended(p, rc, arr)[0] / math.sqrt(rc.xi)
        d2 = float(p.d2u(pc))
        return rc.lambdaJ * d2 / (1.0 + rc.beta * d2) * scale**2

    minima: list[tuple[float, float]] = []
    n = coords.size
    for i in range(n - 1):
        if Vp[i] == 0.0:
            if Vpp[i] > 0.0:
                minima.append((float(coords[i]), float(Vpp[i])))
        elif Vp[i] < 0.0 < Vp[i + 1]:
            loc = _bisect_scalar(vprime, float(coords[i]), float(coords[i + 1]),
                                 float(Vp[i]), float(Vp[i + 1]))
            minima.append((loc, vsecond(loc)))
    if n and Vp[-1] == 0.0 and Vpp[-1] > 0.0:
        minima.append((float(coords[-1]), float(Vpp[-1])))
    return minima


def crosscheck_bases(p: PotentialModel, rc: ReducedCircuit,
                     n: int = 1024) -> float:
    """Max |V_compact(phi) - V_extended(x=sqrt(xi)*phi)| over one period, E_C units.

    The two bases parameterize the same curve through different consistency
    equations; this is the numerical identity check between them.
    """
    phis = np.linspace(0.0, TWO_PI, n, endpoint=False)
    compact = effective_potential(p, rc, "CompactPhi", phis)
    xs = math.sqrt(rc.xi) * phis
    extended = effective_potential(p, rc, "ExtendedX", xs)
    return float(np.max(np.abs(compact.V - extended.V)))


def branch_table(p: PotentialModel, rc: ReducedCircuit, basis: str,
                 grid=1024):
    """Per-drive enumeration of all branches (works in any regime).

    Returns (coordinates, rows) where each row is
    (coordinate, V, Vp, Vpp, branch_count) evaluated per root; multivalued
    drives contribute several rows. Exported raw: no branch is selected.
    """
    if basis not in ("ExtendedX", "CompactPhi"):
        raise ValidationError(f"unknown basis {basis!r}")
    coords = _default_grid(p, rc, basis, grid)
    sqxi = math.sqrt(rc.xi)
    scale = 1.0 if basis == "CompactPhi" else 1.0 / sqxi
    window = (0.0, TWO_PI) if p.is_periodic else (float(coords[0]) - 1.0,
                                                  float(coords[-1]) + 1.0)
    rows = []
    for c in coords:
        drive = float(c) * (1.0 if basis == "CompactPhi" else 1.0 / sqxi)
        sol = solve_consistency(p, rc.beta, drive, window)
        count = len(sol.roots)
        for r in sol.roots:
            u0, u1, u2 = float(p.u(r)), float(p.du(r)), float(p.d2u(r))
            V = rc.lambdaJ * (u0 + 0.5 * rc.beta * u1**2)
            Vp = rc.lambdaJ * u1 * scale
            den = 1.0 + rc.beta * u2
            Vpp = math.inf if den == 0.0 else rc.lambdaJ * u2 / den * scale**2
            rows.append((float(c), V, Vp, Vpp, count))
    return coords, rows
