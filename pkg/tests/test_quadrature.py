import mpmath
import numpy as np
import pytest

from blochgauge import quadrature as quad
from blochgauge.boundary import BoundaryData, fourier_resample
from blochgauge.errors import DomainError, SingularityError
import oracles


def exp_cos(z):
    return np.exp(z.real)


SMOOTH = {
    "exp_cos": (exp_cos, lambda t: np.cos(t)),
    "two_plus_cos": (lambda z: 2 + z.real, lambda t: np.log(2 + np.cos(t))),
    "exp_sin3": (lambda z: np.exp(0.5 * (z**3).imag), lambda t: 0.5 * np.sin(3 * t)),
    "rational": (lambda z: 1 / np.abs(1 - 0.6 * z) ** 2, lambda t: -2 * np.log(np.abs(1 - 0.6 * np.exp(1j * t)))),
}


class TestCircleGrid:
    def test_nodes_and_weights(self):
        g = quad.CircleGrid(256)
        ref = np.array([complex(mpmath.expjpi(mpmath.mpf(2 * k) / 256)) for k in range(256)])
        assert np.max(np.abs(g.nodes - ref)) <= 1e-15
        assert g.weights.sum() == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("n", [32, 100, 0])
    def test_rejects_bad_sizes(self, n):
        with pytest.raises(DomainError):
            quad.CircleGrid(n)


class TestIntegrate:
    def test_constant_and_identity(self):
        g = quad.CircleGrid(64)
        assert quad.integrate(g, lambda z: np.ones_like(z)) == pytest.approx(1.0, abs=1e-15)
        assert abs(quad.integrate(g, lambda z: z)) <= 1e-15

    def test_bessel(self):
        val = quad.integrate(quad.CircleGrid(256), lambda z: np.exp(z.real))
        assert abs(val - oracles.bessel_i0_one()) <= 1e-12

    def test_non_finite_names_node(self):
        with pytest.raises(DomainError, match="node 0"), np.errstate(all="ignore"):
            quad.integrate(quad.CircleGrid(64), lambda z: 1 / (z - 1))


class TestPoisson:
    def test_constant_log_density(self):
        bd = BoundaryData(lambda z: np.full(z.shape, np.e))
        for z in (0, 0.3j, -0.95, 0.999 * np.exp(2j)):
            assert quad.poisson(bd, 1024, z) == pytest.approx(1.0, abs=1e-12)

    def test_single_atom(self):
        sigma = 0.7
        bd = BoundaryData(None, [(1.0, sigma)])
        assert quad.poisson(bd, 1024, 0) == pytest.approx(-sigma, abs=1e-15)
        for r in (0.1, 0.5, 0.99):
            assert quad.poisson(bd, 1024, r) == pytest.approx(-sigma * (1 + r) / (1 - r), rel=1e-13)

    @pytest.mark.parametrize("name", sorted(SMOOTH))
    def test_against_adaptive_quadrature(self, name):
        dens, logpsi = SMOOTH[name]
        atoms = [(np.exp(0.4j), 0.3)]
        bd = BoundaryData(dens, atoms)
        rng = np.random.default_rng(0)
        for z in 0.98 * np.sqrt(rng.random(6)) * np.exp(2j * np.pi * rng.random(6)):
            ref = oracles.poisson_integral(logpsi, atoms, z)
            assert quad.poisson(bd, 1024, z) == pytest.approx(ref, abs=1e-10)
            assert quad.poisson(bd, 1024, z, spectral=False) == pytest.approx(ref, abs=1e-10)

    @pytest.mark.parametrize("name", sorted(SMOOTH))
    def test_doubling(self, name):
        bd = BoundaryData(SMOOTH[name][0])
        rng = np.random.default_rng(1)
        z = 0.9 * np.sqrt(rng.random(200)) * np.exp(2j * np.pi * rng.random(200))
        z[0] = 0.9
        a = quad.poisson_many(bd, z, 256, escalate=False, spectral=False)
        b = quad.poisson_many(bd, z, 512, escalate=False, spectral=False)
        assert np.max(np.abs(a - b)) <= 1e-10

    def test_escalation(self):
        assert quad.required_nodes(0.5) == 1024
        assert quad.required_nodes(2.0**-10) == 2**16
        assert quad.required_nodes(1e-9) == quad.MAX_NODES
        for d in (0.3, 1e-2, 1e-3):
            n = quad.required_nodes(d)
            assert d >= quad.RESOLUTION * 2 * np.pi / n or n == quad.MAX_NODES

    def test_near_boundary_escalated(self):
        dens, logpsi = SMOOTH["rational"]
        bd = BoundaryData(dens)
        z = (1 - 2.0**-9) * np.exp(0.3j)
        ref = oracles.poisson_integral(logpsi, [], z)
        assert quad.poisson(bd, 1024, z, spectral=False) == pytest.approx(ref, abs=1e-9)

    def test_nonpositive_measure(self):
        bd = BoundaryData(lambda z: np.exp(-(1 + z.real)), [(1j, 0.2), (-1, 1.0)])
        rng = np.random.default_rng(2)
        z = 0.999 * np.sqrt(rng.random(2000)) * np.exp(2j * np.pi * rng.random(2000))
        z = z[bd.atom_distance(z) > 1e-6]
        p = quad.poisson_many(bd, z)
        assert np.all(p <= 0)
        U = quad.derivative_factor_many(bd, z)
        assert np.all(np.abs(U) <= -2 * p / (1 - np.abs(z) ** 2) * (1 + 1e-12))

    def test_atom_proximity(self):
        bd = BoundaryData(None, [(1.0, 1.0)])
        with pytest.raises(SingularityError):
            quad.poisson(bd, 1024, 1 - 1e-10)

    def test_outside_disk(self):
        with pytest.raises(DomainError):
            quad.poisson_many(BoundaryData(), np.array([1.0]))


class TestDerivativeFactor:
    def test_zero_measure(self):
        assert quad.herglotz_derivative_factor(BoundaryData(), 1024, 0.3) == 0

    def test_single_atom(self):
        bd = BoundaryData(None, [(1.0, 0.4)])
        assert quad.herglotz_derivative_factor(bd, 1024, 0) == pytest.approx(-0.8, abs=1e-15)

    def test_exp_cos_at_origin(self):
        bd = BoundaryData(exp_cos)
        assert quad.herglotz_derivative_factor(bd, 1024, 0) == pytest.approx(1.0, abs=1e-13)
        assert quad.herglotz_derivative_factor(bd, 1024, 0, spectral=False) == pytest.approx(1.0, abs=1e-13)

    @pytest.mark.parametrize("name", ["two_plus_cos", "exp_sin3"])
    def test_against_adaptive_quadrature(self, name):
        dens, logpsi = SMOOTH[name]
        atoms = [(-1.0, 0.5)]
        bd = BoundaryData(dens, atoms)
        for z in (0.2 + 0.1j, -0.5j, 0.8 * np.exp(1j)):
            assert quad.herglotz_derivative_factor(bd, 1024, z) == pytest.approx(
                oracles.derivative_factor(logpsi, atoms, z), abs=1e-10
            )
            assert quad.herglotz_integral(bd, 1024, z) == pytest.approx(
                oracles.herglotz_integral(logpsi, atoms, z), abs=1e-10
            )


class TestSpectralPath:
    def test_band_limited_detected(self):
        c = quad.spectral_coefficients(BoundaryData(exp_cos))
        assert c is not None and c.size == 2
        assert c[1] == pytest.approx(0.5, abs=1e-15)

    def test_rough_data_not_band_limited(self):
        assert quad.spectral_coefficients(BoundaryData(lambda z: np.abs(1 - z))) is None

    def test_agrees_with_kernel(self):
        bd = BoundaryData(SMOOTH["two_plus_cos"][0], [(1j, 0.1)])
        rng = np.random.default_rng(5)
        z = 0.99 * np.sqrt(rng.random(300)) * np.exp(2j * np.pi * rng.random(300))
        for fn in (quad.poisson_many, quad.herglotz_many, quad.derivative_factor_many):
            a, b = fn(bd, z), fn(bd, z, spectral=False)
            assert np.max(np.abs(a - b) / np.maximum(1, np.abs(b))) <= 1e-11


class TestBoundaryData:
    def test_invariants(self):
        with pytest.raises(DomainError):
            BoundaryData(None, [(1.0, -1.0)])
        with pytest.raises(DomainError):
            BoundaryData(None, [(1.1, 1.0)])
        with pytest.raises(DomainError):
            BoundaryData(np.ones(100))

    def test_samples_resampled(self):
        theta = 2 * np.pi * np.arange(64) / 64
        bd = BoundaryData(np.exp(np.cos(theta)))
        fine = 2 * np.pi * np.arange(1024) / 1024
        assert np.max(np.abs(bd.log_psi(1024) - np.cos(fine))) <= 1e-13

    def test_fourier_resample_identity(self):
        x = np.random.default_rng(0).normal(size=32)
        assert np.allclose(fourier_resample(x, 32), x)
        assert np.allclose(fourier_resample(x, 128)[::4], x)

    def test_zero_samples_floored(self):
        bd = BoundaryData(lambda z: np.abs(1 - z))
        assert np.all(np.isfinite(bd.log_psi(256)))
