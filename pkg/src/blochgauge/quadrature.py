"""Trapezoid quadrature on the unit circle and the kernels integrated against nu.

For a point z at distance d from the circle the Poisson kernel has width ~d, so
the node count is raised until d >= RESOLUTION * 2 pi / N.  Atom contributions
are always added in closed form.

When the Fourier coefficients of log psi vanish (to rounding) beyond a modest
degree, the density integrals equal a short power series in z and are
evaluated that way instead; this is the N -> infinity limit of the trapezoid
sum and costs O(degree) per point rather than O(N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numpy.polynomial import polynomial as npoly

from .boundary import BoundaryData
from .errors import DomainError, SingularityError

__all__ = [
    "CircleGrid",
    "integrate",
    "required_nodes",
    "poisson",
    "herglotz_integral",
    "herglotz_derivative_factor",
    "poisson_many",
    "herglotz_many",
    "derivative_factor_many",
    "spectral_coefficients",
    "DEFAULT_NODES",
    "MAX_NODES",
]

DEFAULT_NODES = 1024
MAX_NODES = 2**18
RESOLUTION = 10.0
ATOM_PROXIMITY = 1e-9
# kernel block size (entries); small enough to stay cache resident
_BLOCK = 2**15
# relative size below which a Fourier coefficient of log psi counts as zero
SPECTRAL_TAIL = 1e-14


@dataclass(frozen=True, eq=False)
class CircleGrid:
    """N-th roots of unity with uniform weights 1/N."""

    node_count: int
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = int(self.node_count)
        if n < 64 or n & (n - 1):
            raise DomainError(f"node count must be a power of two >= 64, got {n}")
        nodes = np.exp(2j * np.pi * np.arange(n) / n)
        weights = np.full(n, 1.0 / n)
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def angles(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.node_count) / self.node_count


def integrate(grid: CircleGrid, integrand) -> complex:
    """(1/N) sum_k integrand(zeta_k) for a vectorized integrand."""
    vals = np.broadcast_to(np.asarray(integrand(grid.nodes), dtype=complex), grid.nodes.shape)
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        k = int(bad[0])
        raise DomainError(f"integrand is not finite at node {k} (zeta = {grid.nodes[k]:.6g})")
    return complex(np.sum(vals) / grid.node_count)


def required_nodes(d: float, base: int = DEFAULT_NODES, cap: int = MAX_NODES) -> int:
    """Smallest power of two >= base with d >= RESOLUTION * 2 pi / N, capped at ``cap``."""
    n = int(base)
    if d <= 0:
        return cap
    need = RESOLUTION * 2.0 * math.pi / d
    while n < need and n < cap:
        n *= 2
    return max(n, int(base))


def _check_atoms(bd: BoundaryData, z: np.ndarray):
    if not bd.has_atoms:
        return
    dist = bd.atom_distance(z)
    bad = np.flatnonzero(dist.ravel() < ATOM_PROXIMITY)
    if bad.size:
        p = complex(z.ravel()[bad[0]])
        raise SingularityError(f"z = {p:.12g} lies within {ATOM_PROXIMITY:g} of an atom", point=p)


def spectral_coefficients(bd: BoundaryData):
    """Fourier coefficients c_0..c_M of log psi if it is band-limited, else None.

    The coefficients are taken from the trapezoid sum at max(DEFAULT_NODES,
    samples) nodes; the data counts as band-limited when every coefficient
    past N/4 is below SPECTRAL_TAIL times the largest one.
    """
    n = max(DEFAULT_NODES, bd.min_nodes)
    key = ("spectral", n)
    with bd._lock:
        if key in bd._cache:
            return bd._cache[key]
    c = np.fft.fft(bd.log_psi(n)) / n
    mag = np.abs(c)
    scale = max(float(mag.max()), 1e-300)
    out = None
    if np.all(mag[n // 4 : n - n // 4 + 1] <= SPECTRAL_TAIL * scale):
        big = np.flatnonzero(mag[: n // 4] > SPECTRAL_TAIL * scale)
        m = int(big[-1]) if big.size else 0
        out = c[: m + 1].copy()
        out.setflags(write=False)
    with bd._lock:
        bd._cache[key] = out
    return out


def _spectral_sum(c: np.ndarray, z: np.ndarray, kind: str) -> np.ndarray:
    if kind == "derivative":
        k = np.arange(1, c.size)
        return npoly.polyval(z, 2.0 * k * c[1:]) if c.size > 1 else np.zeros(z.shape, complex)
    a = 2.0 * c
    a[0] = c[0].real
    return npoly.polyval(z, a)


_KIND = {}


def _density_sum(bd: BoundaryData, z: np.ndarray, n_nodes: int, kernel, spectral: bool = True) -> np.ndarray:
    """(1/N) sum_k kernel(zeta_k, z) log psi(zeta_k) for a flat array of points."""
    out = np.zeros(z.shape, dtype=complex)
    if not bd.has_density or z.size == 0:
        return out
    if spectral:
        c = spectral_coefficients(bd)
        if c is not None:
            return _spectral_sum(c, z, _KIND[kernel]).astype(complex)
    n_nodes = max(n_nodes, bd.min_nodes)
    nodes = CircleGrid(n_nodes).nodes[None, :]
    nodes = _Nodes(np.ascontiguousarray(nodes.real), np.ascontiguousarray(nodes.imag), nodes)
    h = bd.log_psi(n_nodes)
    step = max(1, _BLOCK // n_nodes)
    for s in range(0, z.size, step):
        zz = z[s : s + step, None]
        out[s : s + step] = kernel(nodes, zz) @ h / n_nodes
    return out


def _nodes_for(z: np.ndarray, base: int) -> int:
    if z.size == 0:
        return base
    return required_nodes(float(np.min(1.0 - np.abs(z))), base)


class _Nodes(NamedTuple):
    """Quadrature nodes (row vectors) with contiguous real and imaginary parts."""

    real: np.ndarray
    imag: np.ndarray
    complex: np.ndarray


def _dist2(zeta, z):
    # differences before squaring: no cancellation when z is close to the circle
    dx = zeta.real - z.real
    dy = zeta.imag - z.imag
    return dx * dx + dy * dy


def _kernel_poisson(zeta, z):
    return (1.0 - np.abs(z) ** 2) / _dist2(zeta, z)


def _kernel_herglotz(zeta, z):
    # (zeta + z)/(zeta - z) = (1 - |z|^2 + 2i Im(z conj zeta)) / |zeta - z|^2
    x, y = z.real, z.imag
    return ((1.0 - np.abs(z) ** 2) + 2j * (y * zeta.real - x * zeta.imag)) / _dist2(zeta, z)


def _kernel_derivative(zeta, z):
    return 2.0 * zeta.complex / (zeta.complex - z) ** 2


_KIND.update({_kernel_poisson: "poisson", _kernel_herglotz: "herglotz", _kernel_derivative: "derivative"})


def _prepare(z):
    z = np.asarray(z, dtype=complex)
    if np.any(np.abs(z) >= 1.0):
        raise DomainError("evaluation point outside the open unit disk")
    return z


def poisson_many(bd: BoundaryData, z, nodes: int = DEFAULT_NODES, escalate: bool = True, spectral: bool = True):
    """P nu at an array of points (real array of the same shape)."""
    z = _prepare(z)
    flat = z.ravel()
    _check_atoms(bd, flat)
    n = _nodes_for(flat, nodes) if escalate else nodes
    val = np.real(_density_sum(bd, flat, n, _kernel_poisson, spectral))
    if bd.has_atoms:
        zeta = bd.atom_locations[None, :]
        zz = flat[:, None]
        val = val - (1.0 - np.abs(zz) ** 2) / np.abs(zeta - zz) ** 2 @ bd.atom_masses
    return val.reshape(z.shape)


def herglotz_many(bd: BoundaryData, z, nodes: int = DEFAULT_NODES, escalate: bool = True, spectral: bool = True):
    """int (zeta+z)/(zeta-z) d nu(zeta); its real part is P nu."""
    z = _prepare(z)
    flat = z.ravel()
    _check_atoms(bd, flat)
    n = _nodes_for(flat, nodes) if escalate else nodes
    val = _density_sum(bd, flat, n, _kernel_herglotz, spectral)
    if bd.has_atoms:
        zeta, zz = bd.atom_locations[None, :], flat[:, None]
        val = val - ((zeta + zz) / (zeta - zz)) @ bd.atom_masses
    return val.reshape(z.shape)


def derivative_factor_many(bd: BoundaryData, z, nodes: int = DEFAULT_NODES, escalate: bool = True, spectral: bool = True):
    """U(z) = int 2 zeta / (zeta - z)^2 d nu(zeta), the logarithmic derivative of exp(herglotz)."""
    z = _prepare(z)
    flat = z.ravel()
    _check_atoms(bd, flat)
    n = _nodes_for(flat, nodes) if escalate else nodes
    val = _density_sum(bd, flat, n, _kernel_derivative, spectral)
    if bd.has_atoms:
        zeta, zz = bd.atom_locations[None, :], flat[:, None]
        val = val - (2.0 * zeta / (zeta - zz) ** 2) @ bd.atom_masses
    return val.reshape(z.shape)


def _grid_nodes(grid) -> int:
    return grid.node_count if isinstance(grid, CircleGrid) else int(grid)


def poisson(bd: BoundaryData, grid: CircleGrid, z: complex, escalate: bool = True, spectral: bool = True) -> float:
    return float(poisson_many(bd, np.array([z]), _grid_nodes(grid), escalate, spectral)[0])


def herglotz_integral(
    bd: BoundaryData, grid: CircleGrid, z: complex, escalate: bool = True, spectral: bool = True
) -> complex:
    return complex(herglotz_many(bd, np.array([z]), _grid_nodes(grid), escalate, spectral)[0])


def herglotz_derivative_factor(
    bd: BoundaryData, grid: CircleGrid, z: complex, escalate: bool = True, spectral: bool = True
) -> complex:
    return complex(derivative_factor_many(bd, np.array([z]), _grid_nodes(grid), escalate, spectral)[0])
