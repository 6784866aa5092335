"""Boundary data nu = log(psi) dm - mu_s on the unit circle, with atomic mu_s."""

from __future__ import annotations

import math
import threading
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainError

__all__ = ["BoundaryData", "PSI_FLOOR", "fourier_resample"]

PSI_FLOOR = 1e-300
ATOM_TOL = 1e-14


def _is_pow2(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


def _log_floored(psi: np.ndarray) -> np.ndarray:
    """log psi with zeros floored at PSI_FLOOR.

    An isolated zero sample (both neighbours positive) marks an integrable
    log singularity such as |1 - zeta| at zeta = 1; there the floored value
    log(1e-300) = -690.8 would dominate the trapezoid sum, so the sample takes
    the mean of its neighbours' logs instead.  Runs of two or more zeros keep
    the floor.
    """
    with np.errstate(divide="ignore"):
        out = np.log(np.maximum(psi, PSI_FLOOR))
    zero = psi <= 0
    if zero.any():
        left, right = np.roll(zero, 1), np.roll(zero, -1)
        isolated = zero & ~left & ~right
        out[isolated] = 0.5 * (np.roll(out, 1)[isolated] + np.roll(out, -1)[isolated])
    return out


def fourier_resample(values: np.ndarray, n_out: int) -> np.ndarray:
    """Trigonometric interpolation of equispaced periodic samples onto ``n_out`` nodes."""
    m = values.size
    if n_out == m:
        return values.copy()
    if n_out < m:
        return values[:: m // n_out].copy()
    c = np.fft.fft(values)
    padded = np.zeros(n_out, dtype=complex)
    half = m // 2
    padded[:half] = c[:half]
    padded[-half + 1 :] = c[half + 1 :]
    # split the Nyquist mode symmetrically
    padded[half] = 0.5 * c[half]
    padded[-half] = 0.5 * c[half]
    return np.real(np.fft.ifft(padded)) * (n_out / m)


class BoundaryData:
    """The signed measure nu = log(psi) dm - sum_j sigma_j delta_{zeta_j}.

    Parameters
    ----------
    density : None, callable or array
        ``None`` means psi == 1.  A callable maps an array of unit-circle points to
        psi >= 0.  An array holds psi at 2^k equispaced nodes exp(2 pi i k / M).
    atoms : sequence of (zeta, sigma)
        Point masses of the singular part, |zeta| = 1, sigma > 0.
    """

    def __init__(
        self,
        density: Optional[Callable | np.ndarray] = None,
        atoms: Sequence[tuple[complex, float]] = (),
        label: str = "",
    ):
        self.label = label
        self._cache: dict[int, np.ndarray] = {}
        self._lock = threading.Lock()
        self.samples: Optional[np.ndarray] = None
        self.density: Optional[Callable] = None
        if density is None:
            pass
        elif callable(density):
            self.density = density
        else:
            s = np.asarray(density, dtype=float).ravel()
            if not _is_pow2(s.size):
                raise DomainError(f"sampled density length {s.size} is not a power of two")
            if np.any(~np.isfinite(s)) or np.any(s < 0):
                raise DomainError("sampled density must be finite and nonnegative")
            if np.all(s == 0):
                raise DomainError("psi vanishes identically")
            s.setflags(write=False)
            self.samples = s
        locs, masses = [], []
        for zeta, sigma in atoms:
            zeta = complex(zeta)
            sigma = float(sigma)
            if not sigma > 0:
                raise DomainError(f"atom mass must be positive, got {sigma}")
            if abs(abs(zeta) - 1.0) > ATOM_TOL:
                raise DomainError(f"atom location {zeta} is not on the unit circle")
            locs.append(zeta)
            masses.append(sigma)
        self.atom_locations = np.array(locs, dtype=complex)
        self.atom_masses = np.array(masses, dtype=float)

    @classmethod
    def from_angles(cls, density=None, atoms=(), label=""):
        """Atoms given as (angle, mass) pairs."""
        return cls(density, [(np.exp(1j * float(t)), m) for t, m in atoms], label=label)

    @property
    def has_density(self) -> bool:
        return self.density is not None or self.samples is not None

    @property
    def has_atoms(self) -> bool:
        return self.atom_masses.size > 0

    @property
    def min_nodes(self) -> int:
        return 0 if self.samples is None else self.samples.size

    @property
    def total_atom_mass(self) -> float:
        return float(self.atom_masses.sum())

    def psi(self, n_nodes: int) -> np.ndarray:
        """psi at the nodes exp(2 pi i k / n_nodes), before flooring."""
        theta = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
        if self.density is not None:
            vals = np.asarray(self.density(np.exp(1j * theta)), dtype=float)
            vals = np.broadcast_to(vals, theta.shape).astype(float)
            if np.any(vals < 0) or np.any(~np.isfinite(vals)):
                raise DomainError("density returned negative or non-finite values")
            return vals
        if self.samples is not None:
            if n_nodes < self.samples.size:
                return self.samples[:: self.samples.size // n_nodes].copy()
            if n_nodes == self.samples.size:
                return self.samples.copy()
            return np.exp(self.log_psi(n_nodes))
        return np.ones(n_nodes)

    def log_psi(self, n_nodes: int) -> np.ndarray:
        """log psi at n_nodes equispaced nodes; zeros floored at PSI_FLOOR."""
        with self._lock:
            hit = self._cache.get(n_nodes)
        if hit is not None:
            return hit
        if not self.has_density:
            out = np.zeros(n_nodes)
        elif self.samples is not None and n_nodes > self.samples.size:
            base = _log_floored(self.samples)
            out = fourier_resample(base, n_nodes)
        else:
            out = _log_floored(self.psi(n_nodes))
        out.setflags(write=False)
        with self._lock:
            self._cache[n_nodes] = out
        return out

    def atom_distance(self, z) -> np.ndarray:
        """Distance from each point of ``z`` to the nearest atom (inf if none)."""
        z = np.asarray(z, dtype=complex)
        if not self.has_atoms:
            return np.full(z.shape, math.inf)
        return np.min(np.abs(z[..., None] - self.atom_locations), axis=-1)

    def __repr__(self):
        kind = "sampled" if self.samples is not None else ("callable" if self.density else "psi=1")
        return f"BoundaryData({self.label or kind}, atoms={len(self.atom_masses)})"
