import math

import numpy as np
import pytest

from blochgauge import quadrature as quad
from blochgauge.boundary import BoundaryData
from blochgauge.errors import DomainError, SingularityError
from blochgauge.functions import (
    AffineZero,
    Herglotz,
    PowerSeries,
    Product,
    Pullback,
    Rescaled,
    ShiftedZeroPoly,
    evaluate,
    gradient,
    hp_norm,
    make_outer,
    make_singular_inner,
    slice_along,
)
import oracles


def disk_points(rng, m, rmax=0.9):
    return rmax * np.sqrt(rng.random(m)) * np.exp(2j * np.pi * rng.random(m))


def ball_points(rng, n, m, rmax=0.9):
    g = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    u = g / np.linalg.norm(g, axis=1, keepdims=True)
    return u * (rmax * rng.random(m) ** (1 / (2 * n)))[:, None]


def herglotz_presets():
    return {
        "singular_inner": make_singular_inner([(1.0, 1.0)]),
        "two_atoms": make_singular_inner([(1.0, 0.5), (-1.0, 0.5)]),
        "outer_exp_cos": make_outer(BoundaryData(lambda z: np.exp(z.real))),
        "outer_two_plus_cos": make_outer(BoundaryData(lambda z: 2 + z.real)),
        "mixed": Herglotz(BoundaryData(lambda z: np.exp(-(1 + z.real)), [(1j, 0.3)])),
    }


def sample_functions():
    log_series = PowerSeries(np.r_[0, 1 / np.arange(1, 200)])
    return {
        "square": PowerSeries([0, 0, 1]),
        "log_series": log_series,
        "product": Product([log_series, PowerSeries([1, 0.5])]),
        "ball_poly": PowerSeries(terms={(1, 0): 1, (1, 2): 2j, (0, 3): -0.5}, n=2),
        "ball_zeros": ShiftedZeroPoly([[0.3, 0], [0, 0.2j]], n=2, normals=[[1, 0], [0, 1]]),
        "pullback": Pullback(make_singular_inner([(1.0, 1.0)]), [0.6, 0.8j]),
        "ball_product": Product(
            [Pullback(make_singular_inner([(1j, 0.5)]), [0.3, 0.4]), PowerSeries(terms={(0, 0): 1, (1, 1): 0.3}, n=2)]
        ),
        "rescaled": Rescaled(PowerSeries([1, 2, 3]), [0.2], 0.4, 1.7),
        **herglotz_presets(),
    }


class TestEval:
    def test_power_series(self):
        assert evaluate(PowerSeries([0, 1]), [0.5]) == 0.5

    def test_zero_measure_is_one(self):
        F = Herglotz(BoundaryData())
        z = disk_points(np.random.default_rng(0), 50, 0.999)
        assert np.all(F.eval(z) == 1.0)

    @pytest.mark.parametrize("sigma", [0.1, 1.0, 3.0])
    def test_single_atom_at_origin(self, sigma):
        F = make_singular_inner([(1.0, sigma)])
        assert evaluate(F, [0.0]) == pytest.approx(math.exp(-sigma), rel=1e-15)

    def test_atom_proximity_rejected(self):
        F = make_singular_inner([(1j, 1.0)])
        with pytest.raises(SingularityError):
            F.eval(np.array([1j * (1 - 1e-10)]))

    def test_degree_caps(self):
        with pytest.raises(DomainError):
            PowerSeries(np.ones(4098))
        with pytest.raises(DomainError):
            PowerSeries(terms={(40, 25): 1}, n=2)

    def test_product_is_product(self):
        rng = np.random.default_rng(1)
        f, g = PowerSeries([1, 2, -1j]), make_outer(BoundaryData(lambda z: 2 + z.real))
        z = disk_points(rng, 100)
        p = Product([f, g]).eval(z)
        assert np.max(np.abs(p - f.eval(z) * g.eval(z)) / np.abs(p)) <= 1e-12

    def test_log_abs_survives_underflow(self):
        F = make_singular_inner([(1.0, 1.0)])
        z = np.array([1 - 1e-6])
        assert F.eval(z)[0] == 0.0
        assert F.log_abs(z)[0] == pytest.approx(-(2 - 1e-6) / 1e-6, rel=1e-9)


class TestGradient:
    def test_examples(self):
        assert gradient(PowerSeries([0, 0, 1]), [0.3])[0] == pytest.approx(0.6)
        assert gradient(PowerSeries.constant(2.5), [0.3])[0] == 0
        assert np.all(gradient(PowerSeries.constant(2.5, n=3), [0.1, 0.2, 0.3]) == 0)

    @pytest.mark.parametrize("sigma", [0.5, 1.0])
    def test_singular_inner_at_origin(self, sigma):
        F = make_singular_inner([(1.0, sigma)])
        assert gradient(F, [0.0])[0] == pytest.approx(-2 * sigma * math.exp(-sigma), rel=1e-14)

    @pytest.mark.parametrize("name", sorted(sample_functions()))
    def test_finite_differences(self, name):
        f = sample_functions()[name]
        rng = np.random.default_rng(7)
        Z = ball_points(rng, f.n, 40) if f.n > 1 else disk_points(rng, 40)[:, None]
        for z in Z:
            dz = 1 - np.linalg.norm(z)
            if name == "rescaled":
                dz = 1.0
            g = f.grad(z[None, :])[0]
            fd = oracles.fd_gradient(lambda w: f.eval(w[None, :])[0], z, 1e-5 * dz)
            if np.linalg.norm(g) >= 1e-8:
                assert np.linalg.norm(g - fd) <= 1e-6 * np.linalg.norm(g)

    @pytest.mark.parametrize("name", sorted(sample_functions()))
    def test_log_grad_consistent(self, name):
        f = sample_functions()[name]
        rng = np.random.default_rng(8)
        Z = ball_points(rng, f.n, 30, 0.8) if f.n > 1 else disk_points(rng, 30, 0.8)[:, None]
        v = f.eval(Z)
        ok = np.abs(v) > 1e-6
        lg = f.log_grad(Z)
        assert np.allclose(lg[ok], (f.grad(Z) / v[:, None])[ok], rtol=1e-11, atol=1e-12)
        L, q = f.log_abs_grad(Z)
        assert np.allclose(L[ok], np.log(np.abs(v[ok])), rtol=1e-12, atol=1e-12)
        assert np.allclose(q[ok], lg[ok], rtol=1e-12, atol=1e-12)


class TestHerglotzConsistency:
    @pytest.mark.parametrize("name", sorted(herglotz_presets()))
    def test_log_modulus_is_poisson(self, name):
        F = herglotz_presets()[name]
        z = disk_points(np.random.default_rng(4), 500, 0.9)
        logF = np.log(np.abs(F.eval(z)))
        assert np.max(np.abs(logF - quad.poisson_many(F.boundary, z))) <= 1e-9


class TestMakeOuter:
    def test_constant_density(self):
        F = make_outer(BoundaryData(lambda z: np.full(z.shape, 3.0)))
        z = disk_points(np.random.default_rng(0), 20)
        assert np.allclose(F.eval(z), 3.0, rtol=1e-14)

    def test_exp_cos_is_exponential(self):
        F = make_outer(BoundaryData(lambda z: np.exp(z.real)))
        assert evaluate(F, [0.0]) == pytest.approx(1.0, abs=1e-14)
        z = disk_points(np.random.default_rng(1), 50, 0.99)
        assert np.allclose(F.eval(z), np.exp(z), rtol=1e-12)

    def test_boundary_modulus(self):
        psi = lambda z: 2 + np.cos(3 * np.angle(z))
        F = make_outer(BoundaryData(psi))
        zeta = np.exp(2j * np.pi * np.arange(37) / 37)
        assert np.allclose(np.abs(F.eval(0.999 * zeta)), psi(zeta), rtol=5e-3)

    def test_abs_one_minus(self):
        # |F(0)| = exp(mean log|1 - zeta|); the oracle evaluates the mean adaptively
        oracle = math.exp(oracles.log_abs_one_minus_mean())
        F = make_outer(BoundaryData(lambda z: np.abs(1 - z)))
        assert abs(evaluate(F, [0.0])) == pytest.approx(oracle, rel=2e-3)
        fine = make_outer(BoundaryData(lambda z: np.abs(1 - z)), nodes=2**16)
        assert abs(evaluate(fine, [0.0])) == pytest.approx(oracle, rel=3e-5)

    def test_rejections(self):
        with pytest.raises(DomainError):
            make_outer(BoundaryData(None, [(1.0, 1.0)]))
        with pytest.raises(DomainError):
            make_outer(BoundaryData(lambda z: np.zeros(z.shape)))


class TestSingularInner:
    def test_two_atoms(self):
        F = make_singular_inner([(1.0, 0.5), (-1.0, 0.5)])
        assert abs(evaluate(F, [0.0])) == pytest.approx(math.exp(-1), rel=1e-15)

    def test_small_mass(self):
        F = make_singular_inner([(1.0, 1e-8)])
        assert abs(evaluate(F, [0.0]) - 1) <= 1e-7

    def test_bounded_by_one(self):
        F = make_singular_inner([(1.0, 1.0), (np.exp(2j), 0.3)])
        z = disk_points(np.random.default_rng(2), 10_000, 0.9999)
        z = z[F.boundary.atom_distance(z) > 1e-6]
        assert np.all(F.log_abs(z) < 0)

    def test_needs_atoms(self):
        with pytest.raises(DomainError):
            make_singular_inner([])


class TestSlice:
    def test_coordinate_slice(self):
        f = PowerSeries(terms={(1, 0): 1}, n=2)
        G = slice_along(f, [1, 0])
        w = disk_points(np.random.default_rng(0), 10)
        assert np.allclose(G.eval(w), w)

    def test_derivative_is_gradient_norm(self):
        f = PowerSeries(terms={(1, 0): 1, (0, 1): 1}, n=2)
        G = slice_along(f, np.array([1, 1]) / math.sqrt(2))
        assert gradient(G, [0.0])[0] == pytest.approx(math.sqrt(2), rel=1e-15)
        assert abs(gradient(G, [0.0])[0]) == pytest.approx(np.linalg.norm(gradient(f, [0, 0])))

    def test_constant(self):
        G = slice_along(PowerSeries.constant(4, n=3), [0, 1j, 0])
        assert np.allclose(G.eval(np.array([0.1, 0.5j])), 4)

    def test_needs_unit_direction(self):
        with pytest.raises(DomainError):
            slice_along(PowerSeries(terms={(1, 0): 1}, n=2), [1, 1])


class TestZeros:
    def test_affine_zero_distance(self):
        z = AffineZero.at([0.3, 0], [1, 0])
        assert z.distance(np.array([[0.5, 0.7j]]))[0] == pytest.approx(0.2)

    def test_pullback_hyperplanes(self):
        h = ShiftedZeroPoly([0.5])
        g = Pullback(h, [0.6, 0.8])
        (hz,) = g.declared_zeros
        p = hz.point + 0.3 * np.array([0.8, -0.6])
        assert abs(g.eval(p[None, :])[0]) <= 1e-15

    def test_product_collects_zeros(self):
        f = Product([ShiftedZeroPoly([0.1]), ShiftedZeroPoly([0.2, -0.4j])])
        assert len(f.declared_zeros) == 3
        assert Product([f, PowerSeries([1, 1, 1])]).declared_zeros is None


class TestHpNorm:
    def test_unit_density(self):
        for p in (0.5, 1, 2, math.inf):
            assert hp_norm(BoundaryData(), p).norm == 1.0

    def test_constant_two_sup(self):
        bd = BoundaryData(lambda z: np.full(z.shape, 2.0))
        assert hp_norm(bd, math.inf).norm == 2.0

    def test_bessel(self):
        bd = BoundaryData(lambda z: np.exp(z.real))
        res = hp_norm(bd, 1)
        assert res.norm == pytest.approx(oracles.bessel_i0_one(), abs=1e-12)
        assert res.log_integrable

    def test_rejects_nonpositive_p(self):
        with pytest.raises(DomainError):
            hp_norm(BoundaryData(), 0)
