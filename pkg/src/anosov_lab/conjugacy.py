"""Structural-stability conjugacies h = id + u and smoothness diagnostics.

The conjugacy equation h o A = g o h, with h = id + u and u periodic,
reduces on the lift to

    u(A x) = A u(x) + p(h(x)),        p = displacement of g.

Split in the eigenbasis of A this is a contraction: the stable component
is a forward geometric series (factor lambda_s), the unstable a backward
one (factor 1/lambda_u).  Because A maps the uniform N x N grid to itself
mod 1, the grid iteration involves no interpolation at all; bicubic
interpolation enters only when h is evaluated off-grid.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import DegenerateSecant, NewtonFailed, SolverDiverged
from .interp import PeriodicBicubic
from .lattice import HyperbolicElement, IntMatrix2, invert, power, wrap_point

MAX_DISPLACEMENT = 0.5
DIVERGENCE_PATIENCE = 10


def _grid_points(n: int) -> np.ndarray:
    axis = np.arange(n) / n
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    return np.column_stack([xx.ravel(), yy.ravel()])


def _index_permutation(m: IntMatrix2, n: int) -> np.ndarray:
    """Flat index permutation of the N x N grid under x -> m x mod 1."""
    idx = np.arange(n)
    ii, jj = np.meshgrid(idx, idx, indexing="ij")
    ti = (m.a * ii + m.b * jj) % n
    tj = (m.c * ii + m.d * jj) % n
    return (ti * n + tj).ravel()


@dataclass
class DisplacementField:
    """Periodic displacement u on an N x N grid with bicubic interpolation."""

    grid_size: int
    values: np.ndarray  # (N*N, 2) flat, row-major in (i, j)

    _interp: PeriodicBicubic | None = field(default=None, repr=False)

    def interpolator(self) -> PeriodicBicubic:
        if self._interp is None:
            n = self.grid_size
            self._interp = PeriodicBicubic(self.values.reshape(n, n, 2))
        return self._interp

    def __call__(self, x) -> np.ndarray:
        return self.interpolator()(x)

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))


class Conjugacy:
    """h = id + u conjugating the linear model A to the nonlinear map g."""

    def __init__(self, displacement: DisplacementField, source: HyperbolicElement,
                 target, residual: float):
        self.displacement = displacement
        self.source = source
        self.target = target
        self.residual = residual

    def lift(self, x):
        x = np.asarray(x, dtype=float)
        return x + self.displacement(x)

    def apply(self, x):
        return wrap_point(self.lift(x))

    def inverse_lift(self, y, tol: float = 1e-12, max_iters: int = 200):
        """Solve x + u(x) = y by damped fixed-point iteration."""
        y = np.asarray(y, dtype=float)
        x = y.copy()
        for _ in range(max_iters):
            x_new = y - self.displacement(x)
            if np.max(np.abs(x_new - x)) < tol:
                return x_new
            x = x_new
        return x

    def secant_jacobian(self, x, delta: float = 1e-4) -> np.ndarray:
        """Centered-difference Jacobian of the lift at x (batched)."""
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        pts = np.atleast_2d(x)
        cols = []
        for e in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
            cols.append((self.lift(pts + delta * e) - self.lift(pts - delta * e)) / (2 * delta))
        out = np.stack(cols, axis=2)
        return out[0] if single else out

    def residual_on_grid(self, n: int) -> float:
        """Conjugacy residual sup |h(Ax) - g(h(x))| re-evaluated on an
        arbitrary (finer) grid through the interpolant."""
        pts = _grid_points(n)
        a = self.source.matrix.as_array()
        hx = pts + self.displacement(pts)
        lhs = pts @ a.T + self.displacement(pts @ a.T)
        rhs = hx @ a.T + self.target.displacement(hx)
        d = np.abs(lhs - rhs)
        d = np.minimum(d % 1.0, 1.0 - d % 1.0)
        return float(d.max())


def solve_conjugacy(a_elem: HyperbolicElement, g, n: int = 256, tol: float = 1e-9,
                    max_sweeps: int = 2000, u0: np.ndarray | None = None) -> Conjugacy:
    """Solve h o A = g o h for the identity-homotopic conjugacy h = id + u.

    Component-split fixed-point iteration in the eigenbasis of A: the
    stable coefficient is updated by forward substitution (contraction
    factor lambda_s), the unstable coefficient by backward substitution
    (factor 1/lambda_u).  Raises SolverDiverged when the residual stops
    decreasing for DIVERGENCE_PATIENCE consecutive sweeps or the
    displacement leaves the admissible ball.
    """
    m = a_elem.matrix
    a = m.as_array()
    pts = _grid_points(n)
    fwd = _index_permutation(m, n)          # grid index of A x
    bwd = _index_permutation(invert(m), n)  # grid index of A^{-1} x

    w_s, w_u = a_elem.dual_basis()
    v_s, v_u = a_elem.vs, a_elem.vu
    lam_s = a_elem.signed_lambda_s
    lam_u = a_elem.signed_lambda_u

    u = np.zeros((n * n, 2)) if u0 is None else np.array(u0, dtype=float).reshape(n * n, 2)

    def residual_of(u_arr, p_arr):
        r = u_arr[fwd] - u_arr @ a.T - p_arr
        return float(np.max(np.abs(r)))

    best = np.inf
    stall = 0
    for sweep in range(max_sweeps):
        p = g.displacement(pts + u)
        res = residual_of(u, p)
        if res < tol:
            return Conjugacy(DisplacementField(n, u), a_elem, g, res)
        xi = u @ w_s
        eta = u @ w_u
        p_s = p @ w_s
        p_u = p @ w_u
        # stable: xi(Ax) = lam_s xi(x) + p_s(x), read off at grid point y = Ax
        xi_new = lam_s * xi[bwd] + p_s[bwd]
        # unstable: eta(x) = (eta(Ax) - p_u(x)) / lam_u
        eta_new = (eta[fwd] - p_u) / lam_u
        u = np.outer(xi_new, v_s) + np.outer(eta_new, v_u)
        if np.max(np.abs(u)) >= MAX_DISPLACEMENT:
            raise SolverDiverged(f"|u| reached {np.max(np.abs(u)):.3f} at sweep {sweep}")
        if res < best - 1e-16:
            best = res
            stall = 0
        else:
            stall += 1
            if stall >= DIVERGENCE_PATIENCE:
                raise SolverDiverged(f"residual stalled at {res:.3e} after {sweep + 1} sweeps")
    raise SolverDiverged(f"residual {res:.3e} > tol after {max_sweeps} sweeps")


def pushforward_foliation_direction(h: Conjugacy, linear_direction, x, delta: float) -> np.ndarray:
    """Unit secant direction of the image under h of the line through x."""
    v = np.asarray(linear_direction, dtype=float)
    v = v / np.linalg.norm(v)
    x = np.asarray(x, dtype=float)
    secant = h.lift(x + delta * v) - h.lift(x)
    norm = np.linalg.norm(secant)
    if norm < 1e-12:
        raise DegenerateSecant(f"secant length {norm} at x={x}")
    return secant / norm


def estimate_holder_exponent(h: Conjugacy, direction, scales, n_base: int = 100,
                             seed: int = 0):
    """Least-squares slope of log increment size against log scale.

    Returns (exponent, standard_error); the exponent is the mean over the
    base points of the per-point log-log slope.
    """
    v = np.asarray(direction, dtype=float)
    v = v / np.linalg.norm(v)
    scales = np.asarray(scales, dtype=float)
    rng = np.random.default_rng(seed)
    base = rng.random((n_base, 2))
    log_s = np.log(scales)
    slopes = []
    for x in base:
        incs = np.array([np.linalg.norm(h.lift(x + d * v) - h.lift(x)) for d in scales])
        slope = np.polyfit(log_s, np.log(incs), 1)[0]
        slopes.append(slope)
    slopes = np.array(slopes)
    return float(slopes.mean()), float(slopes.std(ddof=1) / np.sqrt(n_base))


@dataclass
class PeriodicOrbitData:
    """A periodic orbit of g with the eigenvalues of D g^n along it."""

    period: int
    points: np.ndarray  # (n, 2)
    multipliers: tuple  # (mult_u, mult_s), sorted by |.| descending

    @property
    def mult_u(self) -> float:
        return self.multipliers[0]

    @property
    def mult_s(self) -> float:
        return self.multipliers[1]


def _lattice_seeds(m_n: IntMatrix2, n: int):
    """Exact rational solutions of (A^n - I) x = k inside [0,1)^2.

    Enumerated with integer arithmetic so half-open boundary membership is
    decided exactly; the count is |det(A^n - I)|.
    """
    p = m_n.a - 1, m_n.b, m_n.c, m_n.d - 1
    det = p[0] * p[3] - p[1] * p[2]
    if det == 0:
        raise ValueError("A^n - I singular")
    # k ranges over (A^n - I) [0,1)^2; bound by the corner images
    corners = [(0, 0), (p[0], p[2]), (p[1], p[3]), (p[0] + p[1], p[2] + p[3])]
    k1_lo = min(c[0] for c in corners) - 1
    k1_hi = max(c[0] for c in corners) + 1
    k2_lo = min(c[1] for c in corners) - 1
    k2_hi = max(c[1] for c in corners) + 1
    seeds = []
    for k1 in range(k1_lo, k1_hi + 1):
        for k2 in range(k2_lo, k2_hi + 1):
            # x = adj(M) k / det
            x1 = Fraction(p[3] * k1 - p[1] * k2, det)
            x2 = Fraction(-p[2] * k1 + p[0] * k2, det)
            if 0 <= x1 < 1 and 0 <= x2 < 1:
                seeds.append(((float(x1), float(x2)), (k1, k2)))
    assert len(seeds) == abs(det), (len(seeds), det)
    return seeds


def _iterated_lift(g, x, n: int):
    """(g^n)(x) on the lift, plus the chain-rule Jacobian product."""
    pts = np.atleast_2d(np.asarray(x, dtype=float))
    jac = np.broadcast_to(np.eye(2), (len(pts), 2, 2)).copy()
    z = pts
    for _ in range(n):
        j_here = np.atleast_3d(g.jacobian(z)).reshape(-1, 2, 2)
        jac = np.einsum("nij,njk->nik", j_here, jac)
        z = g.lift(z)
    return z, jac


def find_periodic_points(g, a_elem: HyperbolicElement, n: int, newton_tol: float = 1e-12,
                         max_newton: int = 50):
    """All points of period dividing n, via Newton on g^n(x) = x + k.

    Seeds are the exact lattice solutions for the linear part.  Returns
    (orbits, failures) where orbits is a list of PeriodicOrbitData and
    failures the seeds whose Newton iteration did not converge.
    """
    if n > 8:
        raise ValueError("desk scale only: n <= 8")
    m_n = power(a_elem.matrix, n)
    seeds = _lattice_seeds(m_n, n)
    points = []
    failures = []
    for seed, k in seeds:
        x = np.array(seed)
        kv = np.array(k, dtype=float)
        converged = False
        for _ in range(max_newton):
            fx, jac = _iterated_lift(g, x, n)
            res = fx[0] - x - kv
            if np.max(np.abs(res)) < newton_tol:
                converged = True
                break
            j = jac[0] - np.eye(2)
            x = x - np.linalg.solve(j, res)
        if converged:
            points.append(wrap_point(x))
        else:
            failures.append(NewtonFailed(f"seed {seed} for k={k}, period {n}"))
    orbits = _group_orbits(g, points, n)
    return orbits, failures


def _group_orbits(g, points, n: int, tol: float = 1e-8):
    """Partition period-n points into orbits of g and attach multipliers."""
    remaining = [np.asarray(p) for p in points]
    orbits = []
    while remaining:
        x = remaining.pop(0)
        orbit = [x]
        y = x
        while True:
            y = wrap_point(np.atleast_2d(g.apply(y))[0])
            d = [np.max(np.minimum(np.abs(y - r) % 1.0, 1.0 - np.abs(y - r) % 1.0))
                 for r in remaining]
            hit = [i for i, di in enumerate(d) if di < tol]
            if hit:
                orbit.append(remaining.pop(hit[0]))
                y = orbit[-1]
            else:
                break
        _, jac = _iterated_lift(g, orbit[0], n)
        eigs = np.linalg.eigvals(jac[0])
        eigs = sorted(np.real_if_close(eigs), key=abs, reverse=True)
        orbits.append(PeriodicOrbitData(
            period=n,
            points=np.array(orbit),
            multipliers=(complex(eigs[0]).real, complex(eigs[1]).real),
        ))
    return orbits


@dataclass
class MismatchReport:
    """Per-orbit relative multiplier mismatch against the linear model."""

    rows: list  # dicts: period, point, mult_u, mult_s, mismatch
    max_mismatch: float
    failures: list


def compare_smooth_invariants(g, a_elem: HyperbolicElement, max_period: int) -> MismatchReport:
    """Relative difference |log|mult_u| - n log lambda_u| / (n log lambda_u)
    over every orbit of period dividing n, for n = 1 .. max_period.

    Zero mismatch (to tolerance) is necessary for the conjugacy to be C^1.
    """
    log_lam = np.log(a_elem.lambda_u)
    rows = []
    all_failures = []
    for n in range(1, max_period + 1):
        orbits, failures = find_periodic_points(g, a_elem, n)
        all_failures.extend(failures)
        for orb in orbits:
            mism = abs(np.log(abs(orb.mult_u)) - n * log_lam) / (n * log_lam)
            rows.append({
                "period": n,
                "point_x": float(orb.points[0][0]),
                "point_y": float(orb.points[0][1]),
                "mult_u": float(orb.mult_u),
                "mult_s": float(orb.mult_s),
                "mismatch": float(mism),
            })
    max_mism = max((r["mismatch"] for r in rows), default=0.0)
    return MismatchReport(rows=rows, max_mismatch=max_mism, failures=all_failures)
