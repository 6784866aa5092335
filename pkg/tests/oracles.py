"""Reference computations used as test oracles.

Everything here is written independently of the package internals: closed
forms, scipy adaptive quadrature, numpy root finding and dense brute-force
scans.  None of it imports blochgauge.
"""

from __future__ import annotations

import math

import warnings

import numpy as np
from scipy import integrate, special

# ---------------------------------------------------------------------------
# automorphisms


def mobius_disk(a: complex, z: complex) -> complex:
    """(a - z) / (1 - z conj(a)), the one-variable automorphism swapping a and 0."""
    return (a - z) / (1 - z * np.conj(a))


def ball_automorphism(a, z):
    """phi_a(z) written with the projection <z,a>/|a|^2 a, no matrices."""
    a = np.asarray(a, dtype=complex)
    z = np.asarray(z, dtype=complex)
    za = np.vdot(a, z)  # <z, a>
    a2 = float(np.vdot(a, a).real)
    pz = za / a2 * a
    qz = z - pz
    return (a - pz - math.sqrt(1 - a2) * qz) / (1 - za)


def fd_jacobian(fun, a, h=1e-6):
    """Central differences of a holomorphic map C^n -> C^n; column j is d fun / d z_j."""
    a = np.asarray(a, dtype=complex)
    n = a.size
    J = np.empty((n, n), dtype=complex)
    for j in range(n):
        e = np.zeros(n, dtype=complex)
        e[j] = h
        J[:, j] = (fun(a + e) - fun(a - e)) / (2 * h)
    return J


# ---------------------------------------------------------------------------
# circle integrals


def bessel_i0_one() -> float:
    """I_0(1) two ways: scipy's special function and brute-force quadrature at 2^16 nodes."""
    theta = 2 * np.pi * np.arange(2**16) / 2**16
    brute = float(np.mean(np.exp(np.cos(theta))))
    assert abs(brute - special.i0(1.0)) < 1e-14
    return brute


def circle_mean(fun, points=()):
    """(1/2pi) int_0^{2pi} fun(theta) d theta for a complex-valued fun, adaptive."""
    opts = dict(limit=400, epsabs=1e-13, epsrel=1e-13, points=list(points) or None)
    with warnings.catch_warnings():
        # tolerances sit at the rounding floor; quad may report that it cannot do better
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re = integrate.quad(lambda t: np.real(fun(t)), 0, 2 * np.pi, **opts)[0]
        im = integrate.quad(lambda t: np.imag(fun(t)), 0, 2 * np.pi, **opts)[0]
    return complex(re, im) / (2 * np.pi)


def poisson_integral(log_psi, atoms, z: complex) -> float:
    """P nu(z) for nu = log_psi(theta) dm - sum sigma_j delta_{zeta_j}."""
    z = complex(z)

    def kern(t):
        zeta = np.exp(1j * t)
        return (1 - abs(z) ** 2) / abs(zeta - z) ** 2 * log_psi(t)

    val = circle_mean(kern, points=[np.angle(z) % (2 * np.pi)]).real if log_psi else 0.0
    for zeta, sigma in atoms:
        val -= sigma * (1 - abs(z) ** 2) / abs(zeta - z) ** 2
    return val


def herglotz_integral(log_psi, atoms, z: complex) -> complex:
    z = complex(z)
    val = 0j
    if log_psi:
        val = circle_mean(lambda t: (np.exp(1j * t) + z) / (np.exp(1j * t) - z) * log_psi(t))
    for zeta, sigma in atoms:
        val -= sigma * (zeta + z) / (zeta - z)
    return val


def derivative_factor(log_psi, atoms, z: complex) -> complex:
    z = complex(z)
    val = 0j
    if log_psi:
        val = circle_mean(lambda t: 2 * np.exp(1j * t) / (np.exp(1j * t) - z) ** 2 * log_psi(t))
    for zeta, sigma in atoms:
        val -= sigma * 2 * zeta / (zeta - z) ** 2
    return val


def log_abs_one_minus_mean() -> float:
    """int log|1 - e^{it}| dm, integrable log singularity at t = 0 (exactly 0)."""
    f = lambda t: math.log(abs(2 * math.sin(t / 2))) if 0 < t < 2 * math.pi else 0.0
    return integrate.quad(f, 0, 2 * math.pi, limit=400, points=[math.pi])[0] / (2 * math.pi)


# ---------------------------------------------------------------------------
# derivatives and extrema


def fd_gradient(fun, z, h):
    """Complex gradient of a holomorphic fun: C^n batch -> C by central differences."""
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    g = np.empty(z.size, dtype=complex)
    for j in range(z.size):
        e = np.zeros(z.size, dtype=complex)
        e[j] = h
        g[j] = (fun(z + e) - fun(z - e)) / (2 * h)
    return g


def circle_extremes(absfun, center: complex, radius: float, samples: int = 20000):
    """(max, min) of absfun over a dense scan of the circle |w - center| = radius."""
    w = center + radius * np.exp(2j * np.pi * np.arange(samples) / samples)
    v = absfun(w)
    return float(np.max(v)), float(np.min(v))


def roots_inside(coefficients_high_first, center: complex, radius: float) -> int:
    r = np.roots(coefficients_high_first)
    return int(np.sum(np.abs(r - center) < radius))


# ---------------------------------------------------------------------------
# weights


def moderateness_brute(omega, k_max: int) -> float:
    """Pairwise loop over {2^-j (1 + i/8)} with 1/2 <= a/b <= 2."""
    pts = sorted({2.0 ** (-j) * (1 + i / 8) for j in range(k_max + 1) for i in range(9)})
    pts = [p for p in pts if p <= 1.0]
    best = 1.0
    for a in pts:
        for b in pts:
            if 0.5 <= a / b <= 2.0:
                best = max(best, omega(a) / omega(b))
    return best


def fast_majorant_closed_form(alpha: float) -> float:
    """int_0^delta t^alpha / t dt / delta^alpha = 1/alpha."""
    return 1.0 / alpha


def fast_majorant_quad(omega, delta: float) -> float:
    val = integrate.quad(lambda t: omega(t) / t, 0, delta, limit=400, epsabs=0, epsrel=1e-12)[0]
    return val / omega(delta)
