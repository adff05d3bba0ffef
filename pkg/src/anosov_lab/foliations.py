"""Stable/unstable line fields, leaves, holonomy, and local graph maps.

Line fields are stored as angles mod pi (foliations are unoriented);
orientation is reconstructed during leaf integration by heading
continuity.  Leaves are integrated in the universal cover with fixed-step
4th-order (RK4) steps, and reduced mod 1 only for field lookups, so
crossing logic never wraps ambiguously.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import (
    ChartOverflow,
    LeafEscaped,
    NotConverged,
    SignAmbiguity,
    TangencySuspected,
)
from .interp import PeriodicBicubic
from .lattice import eigen_data

TANGENCY_THRESHOLD = 0.01  # rad; smaller crossing angles are suspect
SIGN_CONTINUITY_LIMIT = math.pi / 2 * 0.9
DEFAULT_STEP = 1e-3


def _unit(theta):
    """Unit vector for an angle mod pi, canonical sign: positive first
    coordinate, positive second if the first vanishes."""
    v = np.stack([np.cos(theta), np.sin(theta)], axis=-1)
    flip = (v[..., 0] < 0) | ((v[..., 0] == 0) & (v[..., 1] < 0))
    return np.where(flip[..., None], -v, v)


def _fold_angle(theta):
    """Reduce to [0, pi)."""
    return np.mod(theta, math.pi)


class LineField:
    """Unit direction field mod pi on an N x N grid, owned by a torus map."""

    def __init__(self, owner, label: str, theta: np.ndarray, converged_residual: float = 0.0):
        if label not in ("stable", "unstable"):
            raise ValueError(label)
        self.owner = owner
        self.label = label
        self.theta = np.asarray(theta, dtype=float)  # (N, N), [0, pi)
        self.grid_size = self.theta.shape[0]
        self.converged_residual = converged_residual
        # interpolate the double-angle embedding so the mod-pi topology is smooth
        self._interp = PeriodicBicubic(
            np.stack([np.cos(2 * self.theta), np.sin(2 * self.theta)], axis=-1)
        )

    @classmethod
    def constant(cls, owner, label: str, direction, grid_size: int = 2) -> "LineField":
        theta = math.atan2(direction[1], direction[0]) % math.pi
        return cls(owner, label, np.full((grid_size, grid_size), theta))

    def angle_at(self, x):
        """Interpolated angle(s) in [0, pi)."""
        emb = self._interp(np.asarray(x, dtype=float))
        emb = np.atleast_2d(emb)
        theta = 0.5 * np.arctan2(emb[:, 1], emb[:, 0]) % math.pi
        return theta[0] if np.asarray(x).ndim == 1 else theta

    def direction_at(self, x):
        """Canonical unit vectors for the interpolated angles."""
        theta = np.atleast_1d(self.angle_at(x))
        out = _unit(theta)
        return out[0] if np.asarray(x).ndim == 1 else out

    def invariance_error(self, n_samples: int = 512, seed: int = 0) -> float:
        """Max angular error of D g (field at x) against field at g(x)."""
        rng = np.random.default_rng(seed)
        pts = rng.random((n_samples, 2))
        vec = self.direction_at(pts)
        jac = np.atleast_3d(self.owner.jacobian(pts)).reshape(-1, 2, 2)
        pushed = np.einsum("nij,nj->ni", jac, vec)
        target = self.direction_at(self.owner.apply(pts))
        cross = np.abs(pushed[:, 0] * target[:, 1] - pushed[:, 1] * target[:, 0])
        dots = np.abs(np.einsum("ni,ni->n", pushed, target))
        return float(np.max(np.arctan2(cross, dots)))

    def max_cell_oscillation(self) -> float:
        """Largest angular jump (mod pi) between neighboring grid cells."""
        t = self.theta
        jumps = []
        for shifted in (np.roll(t, 1, axis=0), np.roll(t, 1, axis=1)):
            d = np.abs(t - shifted) % math.pi
            jumps.append(np.minimum(d, math.pi - d).max())
        return float(max(jumps))


def compute_line_field(g, label: str, n: int = 128, iters: int = 30,
                       tol: float = 1e-8) -> LineField:
    """Converged stable or unstable line field of an Anosov map handle.

    The unstable direction at x is the push-forward of a seed direction
    along the backward orbit; the stable field is the unstable field of
    the inverse map.  Convergence compares transport depths k and k-1.
    """
    handle = g if label == "unstable" else g.inverse()
    seed_dir = eigen_data(handle.linear_part).vu

    axis = np.arange(n) / n
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])

    inv = handle.inverse()
    orbit = [pts]
    for _ in range(iters):
        orbit.append(np.atleast_2d(inv.apply(orbit[-1])))

    v = np.broadcast_to(seed_dir, pts.shape).copy()   # depth iters
    w = np.broadcast_to(seed_dir, pts.shape).copy()   # depth iters - 1
    for j in range(iters, 0, -1):
        jac = np.atleast_3d(handle.jacobian(orbit[j])).reshape(-1, 2, 2)
        v = np.einsum("nij,nj->ni", jac, v)
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        if j < iters:
            w = np.einsum("nij,nj->ni", jac, w)
            w /= np.linalg.norm(w, axis=1, keepdims=True)

    cross = np.abs(v[:, 0] * w[:, 1] - v[:, 1] * w[:, 0])
    dots = np.abs(np.einsum("ni,ni->n", v, w))
    residual = float(np.max(np.arctan2(cross, dots)))
    if residual > tol:
        raise NotConverged(f"angular change {residual:.3e} > {tol:.1e} after {iters} iterations")
    theta = _fold_angle(np.arctan2(v[:, 1], v[:, 0])).reshape(n, n)
    return LineField(g, label, theta, converged_residual=residual)


def _aligned_direction(field: LineField, pts, headings):
    """Field directions at pts with signs matched to the given headings."""
    d = np.atleast_2d(field.direction_at(np.mod(pts, 1.0)))
    dots = np.einsum("ni,ni->n", d, headings)
    d = d * np.sign(dots)[:, None]
    return d, np.abs(dots)


def _rk4_step(field: LineField, pts, headings, h: float):
    """One RK4 step of x' = field direction, batched; returns new points
    and headings plus the worst heading alignment encountered."""
    k1, a1 = _aligned_direction(field, pts, headings)
    k2, a2 = _aligned_direction(field, pts + 0.5 * h * k1, k1)
    k3, a3 = _aligned_direction(field, pts + 0.5 * h * k2, k2)
    k4, a4 = _aligned_direction(field, pts + h * k3, k3)
    new_pts = pts + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
    worst = min(float(np.min(a)) for a in (a1, a2, a3, a4))
    return new_pts, k4, worst


def _flow(field: LineField, starts, headings, n_steps: int, h: float):
    """Batched leaf flow; returns points (n_steps+1, m, 2) and headings."""
    pts = np.atleast_2d(np.asarray(starts, dtype=float)).copy()
    hd = np.atleast_2d(np.asarray(headings, dtype=float)).copy()
    hd /= np.linalg.norm(hd, axis=1, keepdims=True)
    traj = np.empty((n_steps + 1,) + pts.shape)
    heads = np.empty_like(traj)
    traj[0] = pts
    heads[0] = hd
    for i in range(n_steps):
        pts, hd, worst = _rk4_step(field, pts, hd, h)
        if worst < math.cos(SIGN_CONTINUITY_LIMIT):
            raise SignAmbiguity(
                f"field direction flipped by more than {SIGN_CONTINUITY_LIMIT:.2f} rad at step {i}"
            )
        traj[i + 1] = pts
        heads[i + 1] = hd
    return traj, heads


@dataclass
class LeafSegment:
    """Arc-length-parametrized leaf curve in the universal cover."""

    base: np.ndarray          # lift coordinates of the anchor (param 0)
    params: np.ndarray        # (m,) arc-length parameters, uniform spacing
    points: np.ndarray        # (m, 2) lift coordinates
    headings: np.ndarray      # (m, 2) unit tangents
    field_label: str
    field: LineField
    step: float

    @property
    def param_range(self):
        return float(self.params[0]), float(self.params[-1])

    def point_at(self, s: float) -> np.ndarray:
        """Position at parameter s, via one RK4 sub-step from the nearest
        stored node below (single-step error ~ step^5)."""
        return self._at(s)[0]

    def tangent_at(self, s: float) -> np.ndarray:
        return self._at(s)[1]

    def _at(self, s: float):
        s0 = self.params[0]
        idx = int(np.clip(np.floor((s - s0) / self.step + 1e-12), 0, len(self.params) - 1))
        ds = s - self.params[idx]
        if abs(ds) < 1e-15:
            return self.points[idx].copy(), self.headings[idx].copy()
        pt = self.points[idx][None, :]
        hd = self.headings[idx][None, :]
        if ds < 0:
            new_pt, new_hd, _ = _rk4_step(self.field, pt, -hd, -ds)
            return new_pt[0], -new_hd[0]
        new_pt, new_hd, _ = _rk4_step(self.field, pt, hd, ds)
        return new_pt[0], new_hd[0]

    def translated(self, offset) -> "LeafSegment":
        """The same curve shifted by a deck translation (integer vector)."""
        off = np.asarray(offset, dtype=float)
        return LeafSegment(
            base=self.base + off,
            params=self.params.copy(),
            points=self.points + off,
            headings=self.headings.copy(),
            field_label=self.field_label,
            field=self.field,
            step=self.step,
        )


def integrate_leaf(field: LineField, x, length: float, step: float = DEFAULT_STEP,
                   centered: bool = False, initial_heading=None) -> LeafSegment:
    """Fixed-step RK4 integration of the line field through x.

    With ``centered`` the segment covers parameters [-length/2, length/2]
    with the anchor at 0; otherwise [0, length].  Negative ``length``
    integrates against the initial heading.
    """
    x = np.asarray(x, dtype=float)
    if initial_heading is None:
        initial_heading = field.direction_at(np.mod(x, 1.0))
    initial_heading = np.asarray(initial_heading, dtype=float)
    initial_heading = initial_heading / np.linalg.norm(initial_heading)

    if centered:
        half = abs(length) / 2.0
        fwd = _march(field, x, initial_heading, half, step)
        bwd = _march(field, x, -initial_heading, half, step)
        params = np.concatenate([-bwd[0][::-1], fwd[0][1:]])
        points = np.concatenate([bwd[1][::-1], fwd[1][1:]])
        heads = np.concatenate([-bwd[2][::-1], fwd[2][1:]])
    else:
        sign = 1.0 if length >= 0 else -1.0
        params, points, heads = _march(field, x, sign * initial_heading, abs(length), step)
        params = sign * params
        heads = sign * heads
        if sign < 0:
            params = params[::-1]
            points = points[::-1]
            heads = heads[::-1]
    # n_steps rounding makes the realized node spacing differ slightly from
    # the requested step; record the actual spacing for parameter lookups
    return LeafSegment(
        base=x.copy(), params=params, points=points, headings=heads,
        field_label=field.label, field=field,
        step=float(abs(params[1] - params[0])),
    )


def _march(field, x, heading, length, step):
    n_steps = max(1, int(round(length / step)))
    traj, heads = _flow(field, x[None, :], heading[None, :], n_steps, length / n_steps)
    params = np.linspace(0.0, length, n_steps + 1)
    return params, traj[:, 0, :], heads[:, 0, :]


class CurveProjector:
    """Arc-length projection and signed distance onto a leaf segment."""

    def __init__(self, tau: LeafSegment):
        self.tau = tau

    def project(self, x, refine: bool = True):
        """Return (s, signed_distance, tangent) for points x of shape (m, 2).

        Nearest-node search plus parabolic refinement of the squared
        distance; exact for straight segments.  With ``refine`` the foot
        point is recomputed by an RK4 sub-step from the nearest node;
        without it the foot is linearly interpolated between nodes, which
        is cheap and accurate to O(step^2) -- enough for sign tracking
        during leaf marching.
        """
        pts = np.atleast_2d(np.asarray(x, dtype=float))
        nodes = self.tau.points
        heads = self.tau.headings
        d2 = np.sum((pts[:, None, :] - nodes[None, :, :]) ** 2, axis=2)  # (m, nodes)
        idx = np.argmin(d2, axis=1)
        m = len(pts)
        h = self.tau.step
        rows = np.arange(m)
        interior = (idx > 0) & (idx < len(nodes) - 1)
        offset = np.einsum("ni,ni->n", pts - nodes[idx], heads[idx]) / h
        offset[idx == 0] = np.minimum(offset[idx == 0], 0.0)
        offset[idx == len(nodes) - 1] = np.maximum(offset[idx == len(nodes) - 1], 0.0)
        if np.any(interior):
            k = idx[interior]
            dm, d0, dp = d2[interior, k - 1], d2[interior, k], d2[interior, k + 1]
            denom = dm - 2 * d0 + dp
            par = np.where(np.abs(denom) > 1e-30, 0.5 * (dm - dp) / np.where(denom == 0, 1.0, denom), 0.0)
            offset[interior] = np.clip(par, -1.0, 1.0)
        s = self.tau.params[idx] + offset * h
        if refine:
            dist = np.empty(m)
            tang = np.empty((m, 2))
            for i in rows:
                foot, t = self.tau._at(s[i])
                n_vec = np.array([-t[1], t[0]])
                dist[i] = float(np.dot(pts[i] - foot, n_vec))
                tang[i] = t
        else:
            foot = nodes[idx] + (offset * h)[:, None] * heads[idx]
            tang = heads[idx]
            n_vec = np.stack([-tang[:, 1], tang[:, 0]], axis=1)
            dist = np.einsum("ni,ni->n", pts - foot, n_vec)
        return s, dist, tang


def _initial_toward(field, starts, projector):
    """Headings pointing so the signed distance to the target shrinks."""
    starts = np.atleast_2d(starts)
    d = np.atleast_2d(field.direction_at(np.mod(starts, 1.0)))
    _, dist, tang = projector.project(starts, refine=False)
    normal = np.stack([-tang[:, 1], tang[:, 0]], axis=1)
    rate = np.einsum("ni,ni->n", d, normal)
    sign = -np.sign(dist * rate)
    sign[sign == 0] = 1.0
    return d * sign[:, None]


def _cross_to_target(field: LineField, starts, tau2: LeafSegment, budget: float,
                     step: float, tangency_threshold: float = TANGENCY_THRESHOLD):
    """March leaves of ``field`` from ``starts`` until each crosses tau2.

    Returns (s_prime, crossing_angle) arrays.  Raises LeafEscaped when a
    leaf exhausts the budget, TangencySuspected for shallow crossings.
    """
    proj = CurveProjector(tau2)
    pts = np.atleast_2d(np.asarray(starts, dtype=float)).copy()
    m = len(pts)
    hd = _initial_toward(field, pts, proj)
    _, dist, _ = proj.project(pts)
    s_out = np.full(m, np.nan)
    ang_out = np.full(m, np.nan)
    active = np.ones(m, dtype=bool)

    # points starting on the curve cross at once
    on_curve = np.abs(dist) < 1e-13
    if np.any(on_curve):
        s_here, _, tang = proj.project(pts[on_curve])
        s_out[on_curve] = s_here
        d_here = np.atleast_2d(field.direction_at(np.mod(pts[on_curve], 1.0)))
        ang_out[on_curve] = _crossing_angle(d_here, tang)
        active[on_curve] = False

    n_steps = int(math.ceil(budget / step))
    prev_pts = pts.copy()
    prev_hd = hd.copy()
    prev_dist = dist.copy()
    for _ in range(n_steps):
        if not active.any():
            break
        new_pts = prev_pts.copy()
        new_hd = prev_hd.copy()
        stepped, hd_step, worst = _rk4_step(field, prev_pts[active], prev_hd[active], step)
        if worst < math.cos(SIGN_CONTINUITY_LIMIT):
            raise SignAmbiguity("field too rough along holonomy leaf")
        new_pts[active] = stepped
        new_hd[active] = hd_step
        _, new_dist, _ = proj.project(new_pts, refine=False)
        flipped = active & (np.sign(new_dist) != np.sign(prev_dist)) & (prev_dist != 0.0)
        for i in np.where(flipped)[0]:
            s_c, ang = _bisect_crossing(field, prev_pts[i], prev_hd[i], step, proj)
            s_out[i] = s_c
            ang_out[i] = ang
            active[i] = False
        prev_pts, prev_hd, prev_dist = new_pts, new_hd, new_dist
    if active.any():
        raise LeafEscaped(f"{int(active.sum())} leaves did not reach the transversal "
                          f"within budget {budget}")
    if np.any(ang_out < tangency_threshold):
        raise TangencySuspected(
            f"min crossing angle {np.nanmin(ang_out):.4f} rad below {tangency_threshold}"
        )
    return s_out, ang_out


def _bisect_crossing(field, node_pt, node_hd, step, proj: CurveProjector):
    """Bisection on the signed distance within one integration step."""

    def dist_at(sigma):
        if sigma == 0.0:
            p = node_pt[None, :]
            h = node_hd[None, :]
        else:
            p, h, _ = _rk4_step(field, node_pt[None, :], node_hd[None, :], sigma)
        s_p, d, tang = proj.project(p)
        return float(d[0]), float(s_p[0]), h[0], tang[0]

    lo, hi = 0.0, step
    d_lo = dist_at(lo)[0]
    # the bracket comes from the fast (unrefined) distance; widen it a
    # little if the refined distance disagrees near the endpoints
    if np.sign(dist_at(hi)[0]) == np.sign(d_lo):
        widened = False
        for lo_try, hi_try in ((-0.5 * step, 1.5 * step), (-step, 2 * step)):
            if np.sign(dist_at(lo_try)[0]) != np.sign(dist_at(hi_try)[0]):
                lo, hi = lo_try, hi_try
                d_lo = dist_at(lo)[0]
                widened = True
                break
        if not widened:
            raise SignAmbiguity("crossing bracket lost during refinement")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        d_mid, s_mid, h_mid, t_mid = dist_at(mid)
        if abs(d_mid) < 1e-10 or (hi - lo) < 1e-14:
            break
        if np.sign(d_mid) == np.sign(d_lo):
            lo, d_lo = mid, d_mid
        else:
            hi = mid
    angle = _crossing_angle(h_mid[None, :], t_mid[None, :])[0]
    return s_mid, angle


def _crossing_angle(dirs, tangents):
    dirs = np.atleast_2d(dirs)
    tangents = np.atleast_2d(tangents)
    cross = np.abs(dirs[:, 0] * tangents[:, 1] - dirs[:, 1] * tangents[:, 0])
    dots = np.abs(np.einsum("ni,ni->n", dirs, tangents))
    return np.arctan2(cross, dots)


class HolonomyMap:
    """Monotone parameter correspondence between two transversals."""

    def __init__(self, source: LeafSegment, target: LeafSegment,
                 s_values: np.ndarray, s_primes: np.ndarray):
        self.source = source
        self.target = target
        order = np.argsort(s_values)
        s = np.asarray(s_values, dtype=float)[order]
        sp = np.asarray(s_primes, dtype=float)[order]
        d = np.diff(sp)
        if np.all(d > 0):
            self.increasing = True
        elif np.all(d < 0):
            self.increasing = False
        else:
            raise ValueError("holonomy samples are not strictly monotone")
        self.samples = np.column_stack([s, sp])
        self._fwd = PchipInterpolator(s, sp)
        inv_s = sp if self.increasing else sp[::-1]
        inv_v = s if self.increasing else s[::-1]
        self._inv = PchipInterpolator(inv_s, inv_v)

    @property
    def domain(self):
        return float(self.samples[0, 0]), float(self.samples[-1, 0])

    @property
    def range(self):
        sp = self.samples[:, 1]
        return float(sp.min()), float(sp.max())

    def __call__(self, s):
        return self._fwd(s)

    def inverse(self, s_prime):
        return self._inv(s_prime)

    def derivative(self, s):
        return self._fwd.derivative()(s)


def holonomy(field: LineField, tau1: LeafSegment, tau2: LeafSegment,
             n_samples: int = 25, budget: float = 3.0, step: float = DEFAULT_STEP,
             span=None) -> HolonomyMap:
    """Holonomy of ``field`` from tau1 to tau2.

    Slides each sample point of tau1 along the leaves of ``field`` until
    it crosses tau2; crossings are located by sign change of the signed
    distance plus bisection.
    """
    lo, hi = tau1.param_range if span is None else span
    for seg, name in ((tau1, "tau1"), (tau2, "tau2")):
        angle = _crossing_angle(
            seg.headings, np.atleast_2d(field.direction_at(np.mod(seg.points, 1.0)))
        )
        if float(angle.min()) < 0.1:
            raise TangencySuspected(f"{name} not transverse to the field "
                                    f"(min angle {angle.min():.3f} rad)")
    s_values = np.linspace(lo, hi, n_samples)
    starts = np.array([tau1.point_at(s) for s in s_values])
    s_primes, _ = _cross_to_target(field, starts, tau2, budget, step)
    return HolonomyMap(tau1, tau2, s_values, s_primes)


class GraphMap:
    """Local graph of one foliation's leaf over a transverse leaf frame."""

    def __init__(self, basepoint, u_values: np.ndarray, s_values: np.ndarray):
        self.basepoint = np.asarray(basepoint, dtype=float)
        order = np.argsort(u_values)
        self.u_values = np.asarray(u_values, dtype=float)[order]
        self.s_values = np.asarray(s_values, dtype=float)[order]
        self._interp = PchipInterpolator(self.u_values, self.s_values)

    @property
    def domain(self):
        return float(self.u_values[0]), float(self.u_values[-1])

    def __call__(self, u):
        return self._interp(u)

    def slope_at(self, u):
        return float(self._interp.derivative()(u))


def local_graph(z, frame_u: LineField, frame_s: LineField, target: LineField,
                eps: float, n_samples: int = 21, step: float = DEFAULT_STEP,
                chart_margin: float = 3.0) -> GraphMap:
    """Graph map of the target leaf through z in the (frame_u, frame_s)
    leaf coordinates at z.

    Each sample point of the target leaf is projected onto the frame axes
    by integrating frame leaves to their crossings.
    """
    z = np.asarray(z, dtype=float)
    axis_u = integrate_leaf(frame_u, z, 2 * eps * chart_margin, step=step, centered=True)
    axis_s = integrate_leaf(frame_s, z, 2 * eps * chart_margin, step=step, centered=True)
    angle = _crossing_angle(
        np.atleast_2d(target.direction_at(np.mod(z, 1.0))),
        np.atleast_2d(frame_u.direction_at(np.mod(z, 1.0))),
    )[0]
    if angle < 0.05:
        raise TangencySuspected(f"target not transverse to frame_u at z (angle {angle:.3f})")
    # cover u-range [-eps, eps]: leaf length eps / cos of worst angle, padded
    leaf_len = 2 * eps / max(math.cos(min(angle, 1.0)), 0.3) * 1.5
    leaf = integrate_leaf(target, z, leaf_len, step=step, centered=True)
    t_vals = np.linspace(leaf.params[0], leaf.params[-1], n_samples)
    u_vals = np.empty(n_samples)
    s_vals = np.empty(n_samples)
    pts = np.array([leaf.point_at(t) for t in t_vals])
    u_vals, _ = _cross_to_target(frame_s, pts, axis_u, budget=2 * eps * chart_margin, step=step)
    s_vals, _ = _cross_to_target(frame_u, pts, axis_s, budget=2 * eps * chart_margin, step=step)
    if u_vals.max() < eps or u_vals.min() > -eps:
        raise ChartOverflow(
            f"target leaf covers u in [{u_vals.min():.4f}, {u_vals.max():.4f}], "
            f"short of [-{eps}, {eps}]"
        )
    keep = np.abs(u_vals) <= eps * 1.0001
    return GraphMap(z, u_vals[keep], s_vals[keep])


def min_transversality_angle(f1: LineField, f2: LineField):
    """Minimum unsigned angle between two line fields over the grid."""
    if f1.grid_size != f2.grid_size:
        raise ValueError("fields must share a grid")
    d = np.abs(f1.theta - f2.theta) % math.pi
    d = np.minimum(d, math.pi - d)
    flat = int(np.argmin(d))
    n = f1.grid_size
    i, j = divmod(flat, n)
    return float(d.ravel()[flat]), np.array([i / n, j / n])


@dataclass
class HeteroclinicPoint:
    """A point of W^u(z) cap W^s(z), with its leaf parameters and lattice tag."""

    point: np.ndarray      # torus representative in [0,1)^2
    u_param: float         # a: arc length along the unstable leaf from z
    s_param: float         # b: arc length along the stable leaf from z
    lattice: tuple         # the integer vector k of the cover equation


def heteroclinic_points(z, e1, radius: int, field_u: LineField | None = None,
                        field_s: LineField | None = None, step: float = DEFAULT_STEP):
    """Transverse intersections of the unstable and stable leaves through z.

    Solves a v_u = b v_s + k over integer k with |k|_inf <= radius
    (k = 0 excluded as the trivial basepoint).  When nonlinear fields are
    supplied, each linear seed is refined by intersecting the integrated
    leaves of the nonlinear map through z.
    """
    z = np.asarray(z, dtype=float)
    if radius > 3:
        raise ValueError("desk scale only: radius <= 3")
    v_u, v_s = e1.vu, e1.vs
    basis = np.column_stack([v_u, -v_s])
    out = []
    ks = [(k1, k2) for k1 in range(-radius, radius + 1)
          for k2 in range(-radius, radius + 1) if (k1, k2) != (0, 0)]
    for k in ks:
        a, b = np.linalg.solve(basis, np.array(k, dtype=float))
        if field_u is None:
            point = np.mod(z + a * v_u, 1.0)
            out.append(HeteroclinicPoint(point, float(a), float(b), k))
        else:
            out.append(_refine_heteroclinic(z, a, b, k, field_u, field_s, step))
    out.sort(key=lambda h: h.lattice)
    return out


def _refine_heteroclinic(z, a, b, k, field_u, field_s, step):
    """Intersect the integrated unstable leaf with the k-translated stable leaf."""
    pad = 1.3
    stable = integrate_leaf(field_s, z, 2 * abs(b) * pad + 0.2, step=step, centered=True)
    target = stable.translated(np.array(k, dtype=float))
    # march the unstable leaf from near the seed toward the target
    unstable = integrate_leaf(field_u, z, 2 * abs(a) * pad + 0.2, step=step, centered=True)
    proj = CurveProjector(target)
    _, dists, _ = proj.project(unstable.points)
    sign_change = np.where(np.sign(dists[:-1]) != np.sign(dists[1:]))[0]
    if len(sign_change) == 0:
        raise LeafEscaped(f"no stable-leaf crossing for lattice vector {k}")
    # pick the crossing closest to the linear prediction
    cand = sign_change[np.argmin(np.abs(unstable.params[sign_change] - a))]
    s_c, _ = _bisect_crossing(field_u, unstable.points[cand], unstable.headings[cand],
                              step, proj)
    point = unstable.point_at(float(unstable.params[cand]))  # node; refine below
    # the bisection reports the target parameter; recover the point from it
    b_ref = s_c
    pt = target.point_at(b_ref)
    a_ref = CurveProjector(unstable).project(pt[None, :])[0][0]
    return HeteroclinicPoint(np.mod(pt, 1.0), float(a_ref), float(b_ref), k)


def verify_graph_transport(theta_z: GraphMap, theta_zp: GraphMap,
                           hol_s: HolonomyMap, hol_u: HolonomyMap,
                           n_samples: int = 41) -> float:
    """Sup deviation of the graph-transport identity
    theta_z' = hol_u o theta_z o hol_s^{-1} on the common domain.

    ``hol_s`` is the holonomy along the stable foliation between the
    unstable frame leaves at z and z' (it transports u-parameters);
    ``hol_u`` transports s-parameters along the unstable foliation.
    """
    from .errors import DomainMismatch

    lo, hi = theta_zp.domain
    t = np.linspace(lo, hi, n_samples)
    # restrict to t whose pullback stays inside the composed domains
    u_back = hol_s.inverse(t)
    d_lo, d_hi = theta_z.domain
    ok = (u_back >= d_lo) & (u_back <= d_hi)
    if ok.any():
        s_mid = theta_z(u_back[ok])
        h_lo, h_hi = hol_u.domain
        inner = (s_mid >= h_lo) & (s_mid <= h_hi)
        ok_idx = np.where(ok)[0][inner]
    else:
        ok_idx = np.array([], dtype=int)
    if len(ok_idx) == 0:
        raise DomainMismatch("empty common domain for graph transport")
    t = t[ok_idx]
    predicted = hol_u(theta_z(hol_s.inverse(t)))
    measured = theta_zp(t)
    return float(np.max(np.abs(predicted - measured)))
