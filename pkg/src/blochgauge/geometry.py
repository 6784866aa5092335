"""Points of the unit ball B_n, the sub-balls B_z and the automorphisms phi_a.

Vectors are dense complex arrays of length n.  The inner product is
<z, w> = sum_j z_j * conj(w_j), linear in the first slot.  Jacobians follow the
row-vector convention: for F = g o phi, grad F(z) = grad g(phi(z)) @ phi'(z).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "BallPoint",
    "SubBall",
    "Automorphism",
    "inner",
    "sub_ball",
    "contains",
    "apply_automorphism",
    "jacobian_at_base",
]


def inner(z, w):
    """Hermitian inner product <z, w>, conjugate-linear in ``w``."""
    return complex(np.vdot(np.asarray(w), np.asarray(z)))


def _as_vector(coords) -> np.ndarray:
    v = np.atleast_1d(np.asarray(coords, dtype=complex)).copy()
    if v.ndim != 1 or v.size == 0:
        raise DomainError(f"expected a non-empty 1-d coordinate vector, got shape {v.shape}")
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class BallPoint:
    """A point z of B_n together with |z| and d_z = 1 - |z|."""

    coords: np.ndarray
    norm: float = field(default=None)
    dz: float = field(init=False)

    def __post_init__(self):
        coords = _as_vector(self.coords)
        object.__setattr__(self, "coords", coords)
        norm = float(np.linalg.norm(coords)) if self.norm is None else float(self.norm)
        if not np.isfinite(norm) or norm >= 1.0:
            raise DomainError(f"point {coords} is not in the open unit ball (|z| = {norm})")
        object.__setattr__(self, "norm", norm)
        object.__setattr__(self, "dz", 1.0 - norm)

    @classmethod
    def polar(cls, radius: float, direction) -> "BallPoint":
        """The point radius * u for a unit vector u; stores |z| = radius exactly."""
        u = _as_vector(direction)
        unorm = np.linalg.norm(u)
        if abs(unorm - 1.0) > 1e-12:
            raise DomainError(f"direction must be a unit vector, |u| = {unorm}")
        return cls(radius * u, norm=float(radius))

    @property
    def n(self) -> int:
        return self.coords.size

    def __repr__(self):
        return f"BallPoint({np.array2string(self.coords, precision=6)}, dz={self.dz:.6g})"


def as_point(z) -> BallPoint:
    return z if isinstance(z, BallPoint) else BallPoint(z)


@dataclass(frozen=True, eq=False)
class SubBall:
    """The open Euclidean ball B_z of radius d_z / 2 about z."""

    center: BallPoint
    radius: float


def sub_ball(z) -> SubBall:
    z = as_point(z)
    return SubBall(z, z.dz / 2.0)


def contains(b: SubBall, w) -> bool:
    """Strict membership |w - center| < radius."""
    w = as_point(w)
    if w.n != b.center.n:
        raise DomainError("dimension mismatch")
    return bool(np.linalg.norm(w.coords - b.center.coords) < b.radius)


class Automorphism:
    """The involutive automorphism phi_a of B_n exchanging a and 0.

    phi_a(z) = (a - P_a z - s_a Q_a z) / (1 - <z, a>),  s_a = sqrt(1 - |a|^2),
    where P_a = a a* / |a|^2 and Q_a = I - P_a.
    """

    def __init__(self, base):
        a = as_point(base)
        if a.norm == 0.0:
            raise DomainError("phi_a is undefined for a = 0")
        self.base = a
        vec = a.coords
        self._a2 = float(np.real(np.vdot(vec, vec)))
        self.P = np.outer(vec, vec.conj()) / self._a2
        self.Q = np.eye(a.n, dtype=complex) - self.P
        self.P.setflags(write=False)
        self.Q.setflags(write=False)
        self._s = np.sqrt(1.0 - self._a2)

    def __call__(self, z):
        """Apply phi_a to a point or to a batch of shape (m, n)."""
        Z = np.asarray(z.coords if isinstance(z, BallPoint) else z, dtype=complex)
        a = self.base.coords
        num = a - Z @ self.P.T - self._s * (Z @ self.Q.T)
        den = 1.0 - Z @ a.conj()
        return num / den[..., None] if Z.ndim > 1 else num / den

    def jacobian_at_base(self) -> np.ndarray:
        """phi_a'(a) = -(1-|a|^2)^{-1} P_a - (1-|a|^2)^{-1/2} Q_a."""
        t = 1.0 - self._a2
        return -self.P / t - self.Q / np.sqrt(t)


def apply_automorphism(a, z) -> BallPoint:
    w = Automorphism(a)(as_point(z))
    return BallPoint(w)


def jacobian_at_base(a) -> np.ndarray:
    return Automorphism(a).jacobian_at_base()
