"""Holomorphic functions on the disk and the ball.

Every function evaluates on batches: points are arrays of shape (m, n), and for
n = 1 a flat complex array of shape (m,) is accepted too.  ``eval`` returns shape
(m,), ``grad`` returns shape (m, n) (gradients are row vectors).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from numpy.polynomial import polynomial as npoly

from . import quadrature as quad
from .boundary import BoundaryData
from .errors import DomainError
from .geometry import BallPoint, as_point

__all__ = [
    "AffineZero",
    "HoloFunction",
    "PowerSeries",
    "Herglotz",
    "Product",
    "ShiftedZeroPoly",
    "Slice",
    "Pullback",
    "Rescaled",
    "evaluate",
    "gradient",
    "make_outer",
    "make_singular_inner",
    "slice_along",
    "hp_norm",
    "HpCheck",
    "MAX_DEGREE_DISK",
    "MAX_DEGREE_BALL",
]

MAX_DEGREE_DISK = 4096
MAX_DEGREE_BALL = 64


def as_batch(Z, n: int) -> np.ndarray:
    """Coerce a point or batch of points to a complex array of shape (m, n)."""
    if isinstance(Z, BallPoint):
        Z = Z.coords[None, :]
    Z = np.asarray(Z, dtype=complex)
    if Z.ndim == 0:
        Z = Z.reshape(1, 1)
    elif Z.ndim == 1:
        Z = Z[:, None] if n == 1 else Z[None, :]
    if Z.shape[-1] != n:
        raise DomainError(f"expected points in C^{n}, got shape {Z.shape}")
    return Z


@dataclass(frozen=True, eq=False)
class AffineZero:
    """The zero set {w : <w - point, normal> = 0}; for n = 1 simply {point}."""

    point: np.ndarray
    normal: np.ndarray

    @classmethod
    def at(cls, point, normal=None):
        p = np.atleast_1d(np.asarray(point, dtype=complex))
        v = np.ones(1, dtype=complex) if normal is None and p.size == 1 else normal
        if v is None:
            nrm = np.linalg.norm(p)
            if nrm == 0:
                raise DomainError("a normal is required for a zero hyperplane through 0")
            v = p / nrm
        return cls(p, np.atleast_1d(np.asarray(v, dtype=complex)))

    def distance(self, Z) -> np.ndarray:
        """Euclidean distance from each point to the zero set."""
        Z = as_batch(Z, self.point.size)
        return np.abs((Z - self.point) @ self.normal.conj()) / np.linalg.norm(self.normal)

    def factor(self, Z) -> np.ndarray:
        return (Z - self.point) @ self.normal.conj()


class HoloFunction:
    """Base class.  Subclasses implement ``_eval`` and ``_grad`` on (m, n) batches.

    ``declared_zeros`` is authoritative when not None; ``zero_free`` records
    structural zero-freeness (exponentials, products of zero-free factors).
    """

    n: int = 1
    declared_zeros: Optional[list] = None
    zero_free: bool = False
    label: str = ""

    def eval(self, Z) -> np.ndarray:
        return self._eval(as_batch(Z, self.n))

    def grad(self, Z) -> np.ndarray:
        return self._grad(as_batch(Z, self.n))

    def log_abs(self, Z) -> np.ndarray:
        """log|f|, overridden where it can be formed without underflow."""
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self.eval(Z)))

    def log_grad(self, Z) -> np.ndarray:
        """grad f / f, shape (m, n); finite for zero-free functions even where |f| underflows."""
        Z = as_batch(Z, self.n)
        with np.errstate(divide="ignore", invalid="ignore"):
            return self._grad(Z) / self._eval(Z)[:, None]

    def log_abs_grad(self, Z):
        """(log|f|, grad f / f) from a single evaluation pass."""
        Z = as_batch(Z, self.n)
        v = self._eval(Z)
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.log(np.abs(v)), self._grad(Z) / v[:, None]

    def __call__(self, z):
        return complex(self.eval(z)[0]) if isinstance(z, BallPoint) else self.eval(z)

    def _eval(self, Z):
        raise NotImplementedError

    def _grad(self, Z):
        raise NotImplementedError

    def __repr__(self):
        return f"{type(self).__name__}({self.label})" if self.label else type(self).__name__


class PowerSeries(HoloFunction):
    """A polynomial: coefficients c_k of z^k for n = 1, or {multi-index: c} for n > 1."""

    def __init__(self, coefficients=None, *, terms=None, n: int = 1, declared_zeros=None, label=""):
        self.label = label
        if terms is not None:
            if n < 2:
                raise DomainError("multi-index terms need n >= 2")
            self.n = n
            self.terms = {}
            for idx, c in dict(terms).items():
                idx = tuple(int(i) for i in idx)
                if len(idx) != n or min(idx) < 0:
                    raise DomainError(f"bad multi-index {idx} for n = {n}")
                if sum(idx) > MAX_DEGREE_BALL:
                    raise DomainError(f"total degree {sum(idx)} exceeds {MAX_DEGREE_BALL}")
                self.terms[idx] = self.terms.get(idx, 0) + complex(c)
            self.coefficients = None
            nonconst = any(sum(i) > 0 and c != 0 for i, c in self.terms.items())
            c0 = self.terms.get((0,) * n, 0)
        else:
            if n != 1:
                raise DomainError("coefficient vectors describe one-variable series; use terms=")
            c = np.atleast_1d(np.asarray(coefficients, dtype=complex))
            if c.size == 0:
                c = np.zeros(1, dtype=complex)
            if c.size - 1 > MAX_DEGREE_DISK:
                raise DomainError(f"degree {c.size - 1} exceeds {MAX_DEGREE_DISK}")
            c.setflags(write=False)
            self.n = 1
            self.coefficients = c
            self.terms = None
            self._dcoef = npoly.polyder(c) if c.size > 1 else np.zeros(1, dtype=complex)
            nonconst = bool(np.any(c[1:] != 0))
            c0 = c[0]
        self.zero_free = (not nonconst) and c0 != 0
        if declared_zeros is not None:
            self.declared_zeros = [z if isinstance(z, AffineZero) else AffineZero.at(z) for z in declared_zeros]
        elif self.zero_free or (not nonconst):
            self.declared_zeros = []

    @classmethod
    def constant(cls, c, n: int = 1):
        if n == 1:
            return cls([c], label=f"const {c}")
        return cls(terms={(0,) * n: c}, n=n, label=f"const {c}")

    def _eval(self, Z):
        if self.coefficients is not None:
            return npoly.polyval(Z[:, 0], self.coefficients)
        out = np.zeros(Z.shape[0], dtype=complex)
        for idx, c in self.terms.items():
            out += c * np.prod(Z ** np.array(idx), axis=1)
        return out

    def _grad(self, Z):
        if self.coefficients is not None:
            return npoly.polyval(Z[:, 0], self._dcoef)[:, None]
        g = np.zeros(Z.shape, dtype=complex)
        for idx, c in self.terms.items():
            e = np.array(idx)
            for j in range(self.n):
                if e[j] == 0:
                    continue
                ej = e.copy()
                ej[j] -= 1
                g[:, j] += c * e[j] * np.prod(Z**ej, axis=1)
        return g


class Herglotz(HoloFunction):
    """F(z) = exp(int (zeta+z)/(zeta-z) d nu(zeta)) on the disk; zero-free by construction."""

    n = 1
    zero_free = True

    def __init__(self, boundary: BoundaryData, nodes: int = quad.DEFAULT_NODES, label=""):
        self.boundary = boundary
        self.nodes = int(nodes)
        self.declared_zeros = []
        self.label = label or boundary.label

    def exponent(self, Z):
        return quad.herglotz_many(self.boundary, as_batch(Z, 1)[:, 0], self.nodes)

    def _eval(self, Z):
        return np.exp(quad.herglotz_many(self.boundary, Z[:, 0], self.nodes))

    def _grad(self, Z):
        z = Z[:, 0]
        F = np.exp(quad.herglotz_many(self.boundary, z, self.nodes))
        U = quad.derivative_factor_many(self.boundary, z, self.nodes)
        return (F * U)[:, None]

    def log_abs(self, Z):
        return quad.poisson_many(self.boundary, as_batch(Z, 1)[:, 0], self.nodes)

    def log_grad(self, Z):
        return quad.derivative_factor_many(self.boundary, as_batch(Z, 1)[:, 0], self.nodes)[:, None]

    def log_abs_grad(self, Z):
        return self.log_abs(Z), self.log_grad(Z)


class Product(HoloFunction):
    def __init__(self, factors: Sequence[HoloFunction], label=""):
        if not factors:
            raise DomainError("empty product")
        dims = {f.n for f in factors}
        if len(dims) != 1:
            raise DomainError("factors live in different dimensions")
        self.factors = list(factors)
        self.n = dims.pop()
        self.zero_free = all(f.zero_free for f in factors)
        if all(f.declared_zeros is not None for f in factors):
            self.declared_zeros = [z for f in factors for z in f.declared_zeros]
        self.label = label

    def _eval(self, Z):
        out = np.ones(Z.shape[0], dtype=complex)
        for f in self.factors:
            out = out * f._eval(Z)
        return out

    def _grad(self, Z):
        vals = [f._eval(Z) for f in self.factors]
        g = np.zeros(Z.shape, dtype=complex)
        for i, f in enumerate(self.factors):
            others = np.ones(Z.shape[0], dtype=complex)
            for j, v in enumerate(vals):
                if j != i:
                    others = others * v
            g += others[:, None] * f._grad(Z)
        return g

    def log_abs(self, Z):
        return sum(f.log_abs(Z) for f in self.factors)

    def log_grad(self, Z):
        return sum(f.log_grad(Z) for f in self.factors)

    def log_abs_grad(self, Z):
        parts = [f.log_abs_grad(Z) for f in self.factors]
        return sum(p[0] for p in parts), sum(p[1] for p in parts)


class ShiftedZeroPoly(HoloFunction):
    """prod_j <z - a_j, v_j>: prescribed zeros (n = 1) or zero hyperplanes (n > 1)."""

    def __init__(self, zeros, n: int = 1, normals=None, scale: complex = 1.0, label=""):
        if normals is None:
            normals = [None] * len(zeros)
        self.declared_zeros = [
            z if isinstance(z, AffineZero) else AffineZero.at(z, v) for z, v in zip(zeros, normals)
        ]
        for z in self.declared_zeros:
            if z.point.size != n or z.normal.size != n:
                raise DomainError("zero data does not match dimension")
        self.n = n
        self.scale = complex(scale)
        self.zero_free = not self.declared_zeros and self.scale != 0
        self.label = label

    def _eval(self, Z):
        out = np.full(Z.shape[0], self.scale, dtype=complex)
        for z in self.declared_zeros:
            out = out * z.factor(Z)
        return out

    def _grad(self, Z):
        facs = [z.factor(Z) for z in self.declared_zeros]
        g = np.zeros(Z.shape, dtype=complex)
        for i, z in enumerate(self.declared_zeros):
            others = np.full(Z.shape[0], self.scale, dtype=complex)
            for j, v in enumerate(facs):
                if j != i:
                    others = others * v
            g += others[:, None] * z.normal.conj()[None, :]
        return g


class Slice(HoloFunction):
    """G(w) = f(w * conj(zeta)) for a unit vector zeta; G'(w) = <grad f, zeta>."""

    n = 1

    def __init__(self, f: HoloFunction, direction, label=""):
        zeta = np.atleast_1d(np.asarray(direction, dtype=complex))
        if zeta.size != f.n or abs(np.linalg.norm(zeta) - 1.0) > 1e-12:
            raise DomainError("slice direction must be a unit vector in C^n")
        self.f = f
        self.zeta = zeta
        self.zero_free = f.zero_free
        self.declared_zeros = [] if f.zero_free else None
        self.label = label

    def _lift(self, Z):
        return Z[:, :1] * self.zeta.conj()[None, :]

    def _eval(self, Z):
        return self.f._eval(self._lift(Z))

    def _grad(self, Z):
        return (self.f._grad(self._lift(Z)) @ self.zeta.conj())[:, None]

    def log_abs(self, Z):
        return self.f.log_abs(self._lift(as_batch(Z, 1)))

    def log_grad(self, Z):
        return (self.f.log_grad(self._lift(as_batch(Z, 1))) @ self.zeta.conj())[:, None]


class Pullback(HoloFunction):
    """g(z) = h(<z, v>) for a one-variable h and |v| <= 1, mapping B_n into the disk."""

    def __init__(self, h: HoloFunction, v, label=""):
        if h.n != 1:
            raise DomainError("pullback needs a function of one variable")
        v = np.atleast_1d(np.asarray(v, dtype=complex))
        if np.linalg.norm(v) > 1.0 + 1e-14:
            raise DomainError("|v| must not exceed 1")
        self.h = h
        self.v = v
        self.n = v.size
        self.zero_free = h.zero_free
        if h.declared_zeros is not None:
            v2 = float(np.real(np.vdot(v, v)))
            self.declared_zeros = [AffineZero(complex(z.point[0]) * v / v2, v) for z in h.declared_zeros]
        self.label = label

    def _inner(self, Z):
        return (Z @ self.v.conj())[:, None]

    def _eval(self, Z):
        return self.h._eval(self._inner(Z))

    def _grad(self, Z):
        return self.h._grad(self._inner(Z)) * self.v.conj()[None, :]

    def log_abs(self, Z):
        return self.h.log_abs(self._inner(as_batch(Z, self.n)))

    def log_grad(self, Z):
        return self.h.log_grad(self._inner(as_batch(Z, self.n))) * self.v.conj()[None, :]


class Rescaled(HoloFunction):
    """g(w) = f(center + scale * w) / divisor."""

    def __init__(self, f: HoloFunction, center, scale: float, divisor: float, label=""):
        self.f = f
        self.n = f.n
        self.center = np.atleast_1d(np.asarray(center, dtype=complex))
        self.scale = float(scale)
        self.divisor = float(divisor)
        self.zero_free = f.zero_free
        if f.declared_zeros is not None:
            self.declared_zeros = [
                AffineZero((z.point - self.center) / self.scale, z.normal) for z in f.declared_zeros
            ]
        self.label = label

    def _map(self, Z):
        return self.center[None, :] + self.scale * Z

    def _eval(self, Z):
        return self.f._eval(self._map(Z)) / self.divisor

    def _grad(self, Z):
        return self.f._grad(self._map(Z)) * (self.scale / self.divisor)

    def log_abs(self, Z):
        return self.f.log_abs(self._map(as_batch(Z, self.n))) - math.log(self.divisor)

    def log_grad(self, Z):
        return self.f.log_grad(self._map(as_batch(Z, self.n))) * self.scale


def evaluate(f: HoloFunction, z) -> complex:
    """f(z) at a single point."""
    return complex(f.eval(as_point(z))[0])


def gradient(f: HoloFunction, z) -> np.ndarray:
    """Row vector (d_1 f, ..., d_n f) at a single point."""
    return f.grad(as_point(z))[0]


def make_outer(bd: BoundaryData, nodes: int = quad.DEFAULT_NODES, label="") -> Herglotz:
    """Outer function with boundary modulus psi."""
    if bd.has_atoms:
        raise DomainError("outer functions take boundary data without atoms")
    if bd.has_density and np.all(bd.psi(max(nodes, bd.min_nodes)) == 0):
        raise DomainError("psi vanishes at every node")
    return Herglotz(bd, nodes, label=label)


def make_singular_inner(atoms, label="") -> Herglotz:
    """Singular inner function of a finite sum of point masses; atoms as (zeta, sigma)."""
    atoms = list(atoms)
    if not atoms:
        raise DomainError("singular inner function needs at least one atom")
    return Herglotz(BoundaryData(None, atoms, label=label), label=label)


def slice_along(f: HoloFunction, direction) -> Slice:
    return Slice(f, direction)


@dataclass(frozen=True)
class HpCheck:
    norm: float
    log_integrable: bool


def hp_norm(bd: BoundaryData, p: float, nodes: int = 2**14) -> HpCheck:
    """Quadrature value of ||psi||_p (max over nodes for p = inf) and a finiteness check on int |log psi|."""
    n = max(int(nodes), bd.min_nodes)
    psi = bd.psi(n)
    logs = bd.log_psi(n)
    if math.isinf(p):
        norm = float(np.max(psi))
    elif p <= 0:
        raise DomainError("p must be positive")
    else:
        norm = float(np.mean(psi**p) ** (1.0 / p))
    return HpCheck(norm, bool(np.isfinite(np.mean(np.abs(logs)))))
