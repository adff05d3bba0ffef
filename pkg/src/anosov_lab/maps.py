"""Nonlinear torus maps: perturbed automorphisms, diffeomorphisms id + q,
conjugated actions, and cone-field verification of the Anosov property.

Every map handle exposes the same duck-typed surface:

    linear_part   -> IntMatrix2 (the homotopy class of the lift)
    lift(x)       -> lift values, equivariant: lift(x + k) = lift(x) + A k
    displacement(x) -> lift(x) - A x, a periodic function
    apply(x)      -> lift(x) mod 1
    jacobian(x)   -> derivative of the lift (batched (n, 2, 2))
    inverse()     -> handle of the inverse map

All evaluators accept a single point (2,) or a batch (n, 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import Inconclusive, NotADiffeo
from .fourier import FourierPerturbation
from .lattice import HyperbolicElement, IntMatrix2, compose, eigen_data, invert, wrap_point

NEWTON_TOL = 1e-12
NEWTON_MAX_ITERS = 50


def _batched(x):
    x = np.asarray(x, dtype=float)
    return (np.atleast_2d(x), x.ndim == 1)


def _unbatch(out, single):
    return out[0] if single else out


def _solve2(j, rhs):
    """Solve batched 2x2 systems j @ v = rhs by explicit inversion."""
    det = j[:, 0, 0] * j[:, 1, 1] - j[:, 0, 1] * j[:, 1, 0]
    v0 = (j[:, 1, 1] * rhs[:, 0] - j[:, 0, 1] * rhs[:, 1]) / det
    v1 = (-j[:, 1, 0] * rhs[:, 0] + j[:, 0, 0] * rhs[:, 1]) / det
    return np.stack([v0, v1], axis=1)


class PerturbedMap:
    """g = A + p with A a hyperbolic automorphism and p a Fourier perturbation."""

    def __init__(self, base, perturbation: FourierPerturbation):
        # base may be a HyperbolicElement or a bare IntMatrix2 (the cone
        # checker needs non-hyperbolic counterexamples too)
        self.base = base
        self._matrix = base if isinstance(base, IntMatrix2) else base.matrix
        self.perturbation = perturbation
        self._A = self._matrix.as_array()

    @property
    def linear_part(self) -> IntMatrix2:
        return self._matrix

    def lift(self, x):
        pts, single = _batched(x)
        out = pts @ self._A.T + self.perturbation.evaluate(pts)
        return _unbatch(out, single)

    def displacement(self, x):
        pts, single = _batched(x)
        return _unbatch(self.perturbation.evaluate(pts), single)

    def apply(self, x):
        return wrap_point(self.lift(x))

    def jacobian(self, x):
        pts, single = _batched(x)
        out = self._A[None, :, :] + self.perturbation.derivative(pts)
        return _unbatch(out, single)

    def inverse(self):
        return InverseMap(self)


class InverseMap:
    """Inverse of any map handle, evaluated by Newton on the forward lift."""

    def __init__(self, forward):
        self.forward = forward
        self._B = invert(forward.linear_part).as_array()

    @property
    def linear_part(self) -> IntMatrix2:
        return invert(self.forward.linear_part)

    def lift(self, y):
        pts, single = _batched(y)
        z = pts @ self._B.T
        for _ in range(NEWTON_MAX_ITERS):
            res = self.forward.lift(z) - pts
            if np.max(np.abs(res)) < NEWTON_TOL:
                break
            z = z - _solve2(np.atleast_3d(self.forward.jacobian(z)).reshape(-1, 2, 2), res)
        return _unbatch(z, single)

    def displacement(self, y):
        pts, single = _batched(y)
        return _unbatch(self.lift(pts) - pts @ self._B.T, single)

    def apply(self, y):
        return wrap_point(self.lift(y))

    def jacobian(self, y):
        pts, single = _batched(y)
        z = self.lift(pts)
        jf = np.atleast_3d(self.forward.jacobian(z)).reshape(-1, 2, 2)
        det = jf[:, 0, 0] * jf[:, 1, 1] - jf[:, 0, 1] * jf[:, 1, 0]
        inv = np.empty_like(jf)
        inv[:, 0, 0] = jf[:, 1, 1] / det
        inv[:, 0, 1] = -jf[:, 0, 1] / det
        inv[:, 1, 0] = -jf[:, 1, 0] / det
        inv[:, 1, 1] = jf[:, 0, 0] / det
        return _unbatch(inv, single)

    def inverse(self):
        return self.forward


class Diffeo:
    """phi = id + q, invertible when the derivative bound of q is below 1."""

    def __init__(self, q: FourierPerturbation):
        if q.deriv_bound >= 1.0:
            raise NotADiffeo(f"derivative bound {q.deriv_bound:.3f} >= 1")
        self.q = q

    @property
    def is_identity(self) -> bool:
        return self.q.is_zero

    def lift(self, x):
        pts, single = _batched(x)
        return _unbatch(pts + self.q.evaluate(pts), single)

    def apply(self, x):
        return wrap_point(self.lift(x))

    def derivative(self, x):
        pts, single = _batched(x)
        out = np.eye(2)[None, :, :] + self.q.derivative(pts)
        return _unbatch(out, single)

    def inverse_lift(self, y):
        """Solve x + q(x) = y by Newton; the contraction bound makes the
        linear initial guess x = y sufficient."""
        pts, single = _batched(y)
        x = pts.copy()
        for _ in range(NEWTON_MAX_ITERS):
            res = x + self.q.evaluate(x) - pts
            if np.max(np.abs(res)) < NEWTON_TOL:
                break
            jac = np.eye(2)[None, :, :] + self.q.derivative(x)
            x = x - _solve2(jac, res)
        return _unbatch(x, single)

    def inverse_apply(self, y):
        return wrap_point(self.inverse_lift(y))


def build_diffeo(q: FourierPerturbation) -> Diffeo:
    """phi = id + q; raises NotADiffeo when the C^1 bound fails."""
    return Diffeo(q)


class ConjugatedMap:
    """g = phi o A o phi^{-1} for a linear hyperbolic A and a diffeo phi."""

    def __init__(self, phi: Diffeo, base: HyperbolicElement):
        self.phi = phi
        self.base = base
        self._A = base.matrix.as_array()

    @property
    def linear_part(self) -> IntMatrix2:
        return self.base.matrix

    def lift(self, x):
        pts, single = _batched(x)
        w = self.phi.inverse_lift(pts)
        return _unbatch(self.phi.lift(w @ self._A.T), single)

    def displacement(self, x):
        pts, single = _batched(x)
        return _unbatch(self.lift(pts) - pts @ self._A.T, single)

    def apply(self, x):
        return wrap_point(self.lift(x))

    def jacobian(self, x):
        pts, single = _batched(x)
        w = self.phi.inverse_lift(pts)
        d_out = np.atleast_3d(self.phi.derivative(w @ self._A.T)).reshape(-1, 2, 2)
        d_in = np.atleast_3d(self.phi.derivative(w)).reshape(-1, 2, 2)
        det = d_in[:, 0, 0] * d_in[:, 1, 1] - d_in[:, 0, 1] * d_in[:, 1, 0]
        d_in_inv = np.empty_like(d_in)
        d_in_inv[:, 0, 0] = d_in[:, 1, 1] / det
        d_in_inv[:, 0, 1] = -d_in[:, 0, 1] / det
        d_in_inv[:, 1, 0] = -d_in[:, 1, 0] / det
        d_in_inv[:, 1, 1] = d_in[:, 0, 0] / det
        out = np.einsum("nij,jk,nkl->nil", d_out, self._A, d_in_inv)
        return _unbatch(out, single)

    def inverse(self):
        return ConjugatedMap(self.phi, eigen_data(invert(self.base.matrix)))


class ComposedMap:
    """Composition outer o inner of two map handles (for group-action checks)."""

    def __init__(self, outer, inner):
        self.outer = outer
        self.inner = inner

    @property
    def linear_part(self) -> IntMatrix2:
        return compose(self.outer.linear_part, self.inner.linear_part)

    def lift(self, x):
        return self.outer.lift(self.inner.lift(x))

    def displacement(self, x):
        pts, single = _batched(x)
        A = self.linear_part.as_array()
        return _unbatch(self.lift(pts) - pts @ A.T, single)

    def apply(self, x):
        return wrap_point(self.lift(x))

    def jacobian(self, x):
        pts, single = _batched(x)
        j_in = np.atleast_3d(self.inner.jacobian(pts)).reshape(-1, 2, 2)
        j_out = np.atleast_3d(self.outer.jacobian(self.inner.lift(pts))).reshape(-1, 2, 2)
        return _unbatch(np.einsum("nij,njk->nik", j_out, j_in), single)

    def inverse(self):
        return ComposedMap(self.inner.inverse(), self.outer.inverse())


@dataclass
class MarkedAction:
    """A marked action: generator elements with their nonlinear maps, plus
    the diffeomorphism used to build it when known."""

    generators: list  # of (HyperbolicElement, map handle)
    marking: Diffeo | None = None

    def map_for(self, element: HyperbolicElement):
        for el, handle in self.generators:
            if el.matrix == element.matrix:
                return handle
        raise KeyError(f"no generator for {element.matrix.rows()}")

    def homotopy_check(self, n_samples: int = 16, tol: float = 1e-8) -> bool:
        """Each generator's lift commutes with deck translations by its
        linear part (degree check)."""
        rng = np.random.default_rng(0)
        pts = rng.random((n_samples, 2))
        for el, handle in self.generators:
            A = el.matrix.as_array()
            for k in ((1, 0), (0, 1)):
                k = np.array(k, dtype=float)
                lhs = handle.lift(pts + k)
                rhs = handle.lift(pts) + A @ k
                if np.max(np.abs(lhs - rhs)) > tol:
                    return False
        return True


def conjugated_action(phi: Diffeo, generators) -> MarkedAction:
    """Marked action with generator maps phi o F(gamma, .) o phi^{-1}."""
    gens = [(el, ConjugatedMap(phi, el)) for el in generators]
    return MarkedAction(generators=gens, marking=phi)


def perturbed_action(pairs) -> MarkedAction:
    """Marked action from explicit (element, perturbation) pairs, unmarked."""
    gens = [(el, PerturbedMap(el, p)) for el, p in pairs]
    return MarkedAction(generators=gens, marking=None)


@dataclass(frozen=True)
class ConeParams:
    """Aperture (radians) around a center direction, and orbit length."""

    aperture: float
    direction: tuple
    iterations: int = 20

    def __post_init__(self):
        if not 0.0 < self.aperture < math.pi / 2:
            raise ValueError("aperture must lie in (0, pi/2)")


def _rotate(v, angle):
    c, s = math.cos(angle), math.sin(angle)
    return np.array([c * v[0] - s * v[1], s * v[0] + c * v[1]])


def _cone_check(handle, center, aperture, grid_n, orbit_len, n_dirs=9):
    """Invariance and minimal expansion of the cone field under the handle's
    jacobian along forward orbits of a uniform grid.

    Returns (invariant, min_expansion).
    """
    center = np.asarray(center, dtype=float)
    center = center / np.linalg.norm(center)
    angles = np.linspace(-aperture, aperture, n_dirs)
    dirs = np.stack([_rotate(center, a) for a in angles])  # (m, 2)

    axis = (np.arange(grid_n) + 0.5) / grid_n
    xx, yy = np.meshgrid(axis, axis, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])

    invariant = True
    min_exp = np.inf
    for _ in range(orbit_len):
        jac = np.atleast_3d(handle.jacobian(pts)).reshape(-1, 2, 2)
        images = np.einsum("nij,mj->nmi", jac, dirs)
        norms = np.linalg.norm(images, axis=2)
        min_exp = min(min_exp, float(norms.min()))
        # unsigned angle of each image to the cone axis (mod pi)
        dots = np.abs(images @ center)
        cross = np.abs(images[..., 0] * center[1] - images[..., 1] * center[0])
        dev = np.arctan2(cross, dots)
        if float(dev.max()) >= aperture:
            invariant = False
            break
        pts = handle.apply(pts)
    return invariant, min_exp


def verify_anosov_cones(handle, params: ConeParams, grid_n: int = 128):
    """Check the Anosov property via strict cone invariance and expansion.

    The unstable cone around ``params.direction`` is checked under the map;
    the stable cone (around the stable eigen-direction of the linear part)
    is checked dually under the inverse map.  Returns (ok, margin) where
    margin is the smaller of the two one-step expansion factors.
    """
    ok_u, exp_u = _cone_check(handle, params.direction, params.aperture, grid_n, params.iterations)
    margin = exp_u
    if ok_u:
        stable_dir = eigen_data(handle.linear_part).vs
        inv = handle.inverse()
        ok_s, exp_s = _cone_check(inv, stable_dir, params.aperture, grid_n, params.iterations)
        margin = min(exp_u, exp_s)
        ok = ok_u and ok_s
    else:
        ok = False
    if ok and abs(margin - 1.0) <= 1e-6:
        raise Inconclusive(f"expansion margin {margin} within 1e-6 of 1; refine aperture or grid")
    return (ok and margin > 1.0), margin
