"""Integer SL(2,Z) matrix algebra and eigen-geometry of hyperbolic elements.

Everything here is exact integer arithmetic except the eigen data, which
uses the closed-form quadratic formula for 2x2 matrices (no general
eigensolver).  Torus points live in [0,1)^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotHyperbolic

EIGEN_TOL = 1e-12


@dataclass(frozen=True)
class IntMatrix2:
    """A 2x2 integer matrix with determinant 1 (an element of SL(2,Z))."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for entry in (self.a, self.b, self.c, self.d):
            if entry != int(entry):
                raise ValueError(f"non-integer entry {entry!r}")
        if self.det != 1:
            raise ValueError(f"determinant {self.det} != 1, not in SL(2,Z)")

    @classmethod
    def from_rows(cls, rows) -> "IntMatrix2":
        (a, b), (c, d) = rows
        return cls(int(a), int(b), int(c), int(d))

    @property
    def det(self) -> int:
        return self.a * self.d - self.b * self.c

    @property
    def trace(self) -> int:
        return self.a + self.d

    def as_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=float)

    def as_int_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=np.int64)

    def rows(self):
        return [[self.a, self.b], [self.c, self.d]]


IDENTITY = IntMatrix2(1, 0, 0, 1)


def compose(m1: IntMatrix2, m2: IntMatrix2) -> IntMatrix2:
    """Matrix product m1 @ m2, exact in integers."""
    return IntMatrix2(
        m1.a * m2.a + m1.b * m2.c,
        m1.a * m2.b + m1.b * m2.d,
        m1.c * m2.a + m1.d * m2.c,
        m1.c * m2.b + m1.d * m2.d,
    )


def invert(m: IntMatrix2) -> IntMatrix2:
    """Inverse via the adjugate; integral because det = 1."""
    return IntMatrix2(m.d, -m.b, -m.c, m.a)


def power(m: IntMatrix2, n: int) -> IntMatrix2:
    if n < 0:
        return power(invert(m), -n)
    out = IDENTITY
    for _ in range(n):
        out = compose(out, m)
    return out


def is_hyperbolic(m: IntMatrix2) -> bool:
    return abs(m.trace) > 2


def _canonical_direction(v: np.ndarray) -> np.ndarray:
    """Unit vector with positive first coordinate (positive second if first is 0)."""
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v)
    if v[0] < 0 or (v[0] == 0 and v[1] < 0):
        v = -v
    return v


@dataclass(frozen=True)
class HyperbolicElement:
    """A hyperbolic SL(2,Z) matrix with its eigenvalue magnitudes and unit
    eigen-directions.

    ``lambda_u`` and ``lambda_s`` are the magnitudes of the expanding and
    contracting eigenvalues; the signed eigenvalues are
    ``eigen_sign * lambda_u`` and ``eigen_sign * lambda_s`` where
    ``eigen_sign`` follows the sign of the trace.
    """

    matrix: IntMatrix2
    lambda_u: float
    lambda_s: float
    v_u: tuple
    v_s: tuple
    eigen_sign: int

    @property
    def vu(self) -> np.ndarray:
        return np.array(self.v_u)

    @property
    def vs(self) -> np.ndarray:
        return np.array(self.v_s)

    @property
    def signed_lambda_u(self) -> float:
        return self.eigen_sign * self.lambda_u

    @property
    def signed_lambda_s(self) -> float:
        return self.eigen_sign * self.lambda_s

    def dual_basis(self) -> tuple:
        """Rows (w_s, w_u) biorthogonal to (v_s, v_u): w_i . v_j = delta_ij."""
        basis = np.column_stack([self.vs, self.vu])
        dual = np.linalg.inv(basis)
        return dual[0], dual[1]


def eigen_data(m: IntMatrix2) -> HyperbolicElement:
    """Closed-form eigen decomposition of a hyperbolic SL(2,Z) matrix.

    Eigenvalues are (t +- sqrt(t^2 - 4))/2 with t the trace; eigenvectors
    come from the kernel of (M - lambda I), choosing whichever row gives
    the better-conditioned cross product.
    """
    if not is_hyperbolic(m):
        raise NotHyperbolic(f"|trace| = {abs(m.trace)} <= 2 for {m.rows()}")
    t = float(m.trace)
    disc = math.sqrt(t * t - 4.0)
    lam_big = (t + disc) / 2.0 if t > 0 else (t - disc) / 2.0
    lam_small = 1.0 / lam_big  # det = 1
    sign = 1 if t > 0 else -1

    v_u = _canonical_direction(_kernel_vector(m, lam_big))
    v_s = _canonical_direction(_kernel_vector(m, lam_small))
    return HyperbolicElement(
        matrix=m,
        lambda_u=abs(lam_big),
        lambda_s=abs(lam_small),
        v_u=tuple(v_u),
        v_s=tuple(v_s),
        eigen_sign=sign,
    )


def _kernel_vector(m: IntMatrix2, lam: float) -> np.ndarray:
    """Nonzero v with (M - lam I) v = 0, from the better-conditioned row."""
    row1 = np.array([m.a - lam, m.b])
    row2 = np.array([m.c, m.d - lam])
    row = row1 if np.linalg.norm(row1) >= np.linalg.norm(row2) else row2
    return np.array([-row[1], row[0]])


@dataclass(frozen=True)
class PairHypothesisCertificate:
    """Pairwise linear independence of the four eigen-directions of a pair."""

    elements: tuple
    min_pairwise_sine: float

    @property
    def hypothesis_ok(self) -> bool:
        return self.min_pairwise_sine > EIGEN_TOL

    def to_dict(self) -> dict:
        e1, e2 = self.elements
        return {
            "matrices": [e1.matrix.rows(), e2.matrix.rows()],
            "eigenvalues": [
                [e1.signed_lambda_u, e1.signed_lambda_s],
                [e2.signed_lambda_u, e2.signed_lambda_s],
            ],
            "eigenvectors": [
                {"v_u": list(e1.v_u), "v_s": list(e1.v_s)},
                {"v_u": list(e2.v_u), "v_s": list(e2.v_s)},
            ],
            "min_pairwise_sine": self.min_pairwise_sine,
            "hypothesis_ok": self.hypothesis_ok,
        }


def check_pair_hypothesis(e1: HyperbolicElement, e2: HyperbolicElement) -> PairHypothesisCertificate:
    """Minimum |det [v_i v_j]| over the six unordered pairs of eigen-directions."""
    dirs = [e1.vs, e1.vu, e2.vs, e2.vu]
    sines = []
    for i in range(4):
        for j in range(i + 1, 4):
            a, b = dirs[i], dirs[j]
            sines.append(abs(float(a[0] * b[1] - a[1] * b[0])))
    m = min(sines)
    if m <= EIGEN_TOL:
        m = 0.0
    return PairHypothesisCertificate(elements=(e1, e2), min_pairwise_sine=m)


def wrap_point(x) -> np.ndarray:
    """Reduce to the half-open fundamental domain [0,1)^2."""
    y = np.mod(np.asarray(x, dtype=float), 1.0)
    # mod can return 1.0 for tiny negative inputs
    y[y >= 1.0] -= 1.0
    return y


def torus_distance(x, y) -> float:
    """Sup-norm distance on the torus (wrap-aware)."""
    d = np.abs(np.asarray(x, dtype=float) - np.asarray(y, dtype=float))
    d = np.minimum(d % 1.0, 1.0 - d % 1.0)
    return float(np.max(d))


def standard_action_apply(m: IntMatrix2, x) -> np.ndarray:
    """(m @ x) mod 1, the standard linear action on the torus."""
    x = np.asarray(x, dtype=float)
    return wrap_point(x @ m.as_array().T)
